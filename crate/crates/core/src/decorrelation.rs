//! Classical decorrelation functionals of a configuration measure: total
//! variation between joint and product laws, its buffer-conditioned average
//! `δ_B(A|C)`, the single-flip bound, the phase deficit `ϑ_B(A|C)` of a pure
//! state, the influence kernel `K_B(u,v)` and the covariance bounds valid for
//! measures with the FKG property.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::audit::AuditReport;
use crate::error::{Error, Result};
use crate::lattice::{Region, Tripartition};
use crate::states::{
    amplitude_decompose, embed_code, extract_code, pow, restriction_codes, spin_value, ProbabilityTable, PureState,
    NULL_EVENT,
};

/// Audit constant for the FKG covariance bounds.
pub const FKG_KAPPA: f64 = 0.5;
/// Smaller constant reported for comparison only.
pub const FKG_KAPPA_QUARTER: f64 = 0.25;
/// Free-site gate for the exact influence kernel.
pub const MAX_KERNEL_FREE_SITES: usize = 12;
/// Window size gate for the phase grid oracle.
pub const MAX_GRID_SITES: usize = 8;
/// Largest number of grid points per buffer sector.
pub const MAX_GRID_POINTS: usize = 1 << 18;

fn check_disjoint(regions: &[&Region]) -> Result<()> {
    for (i, r) in regions.iter().enumerate() {
        for s in &regions[i + 1..] {
            if !r.is_disjoint(s) {
                return Err(Error::Overlap(format!("regions {:?} and {:?} intersect", r.sites(), s.sites())));
            }
        }
    }
    Ok(())
}

/// Joint law of three disjoint regions, stored as `t[(b·n_c + c)·n_a + a]`.
struct Joint3 {
    na: usize,
    nb: usize,
    nc: usize,
    t: Vec<f64>,
}

impl Joint3 {
    fn new(p: &ProbabilityTable, a: &Region, b: &Region, c: &Region) -> Result<Self> {
        check_disjoint(&[a, b, c])?;
        let nu = p.local_dim();
        let abc = a.union(b).union(c);
        let joint = p.marginal(&abc)?;
        let (ca, cb, cc) =
            (restriction_codes(nu, &abc, a), restriction_codes(nu, &abc, b), restriction_codes(nu, &abc, c));
        let (na, nb, nc) = (pow(nu, a.len()), pow(nu, b.len()), pow(nu, c.len()));
        let mut t = vec![0.0; na * nb * nc];
        for (x, &w) in joint.probs().iter().enumerate() {
            t[(cb[x] as usize * nc + cc[x] as usize) * na + ca[x] as usize] += w;
        }
        Ok(Self { na, nb, nc, t })
    }

    fn sector(&self, b: usize) -> &[f64] {
        let size = self.na * self.nc;
        &self.t[b * size..(b + 1) * size]
    }
}

/// Contribution of one buffer configuration to `δ_B(A|C)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorTv {
    pub code: usize,
    pub weight: f64,
    pub tv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvReport {
    pub value: f64,
    /// The same quantity in the `½ Σ |·|` form.
    pub half_abs: f64,
    pub parts: Vec<SectorTv>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

/// `TV(A|C) = ½ Σ |p(σ_A, σ_C) − p(σ_A) p(σ_C)|`.
pub fn tv(p: &ProbabilityTable, a: &Region, c: &Region) -> Result<TvReport> {
    tv_conditional(p, a, &p.window().empty(), c)
}

/// `δ_B(A|C) = Σ p(σ_B, σ_C) Σ_{σ_A} [p(σ_A | σ_C σ_B) − p(σ_A | σ_B)]₊`.
pub fn tv_conditional(p: &ProbabilityTable, a: &Region, b: &Region, c: &Region) -> Result<TvReport> {
    let j = Joint3::new(p, a, b, c)?;
    let (na, nc) = (j.na, j.nc);
    let mut value = 0.0;
    let mut half_abs = 0.0;
    let mut parts = Vec::new();
    let mut pab = vec![0.0; na];
    let mut pbc = vec![0.0; nc];
    for code in 0..j.nb {
        let t = j.sector(code);
        let pb: f64 = t.iter().sum();
        if pb < NULL_EVENT {
            continue;
        }
        pab.iter_mut().for_each(|x| *x = 0.0);
        pbc.iter_mut().for_each(|x| *x = 0.0);
        for ic in 0..nc {
            for ia in 0..na {
                let w = t[ic * na + ia];
                pab[ia] += w;
                pbc[ic] += w;
            }
        }
        let (mut pos, mut abs) = (0.0, 0.0);
        for ic in 0..nc {
            for ia in 0..na {
                let d = t[ic * na + ia] - pab[ia] * pbc[ic] / pb;
                pos += d.max(0.0);
                abs += d.abs();
            }
        }
        value += pos;
        half_abs += 0.5 * abs;
        parts.push(SectorTv { code, weight: pb, tv: pos / pb });
    }
    Ok(TvReport { value, half_abs, parts, a: a.sites().to_vec(), b: b.sites().to_vec(), c: c.sites().to_vec() })
}

/// `Σ_{σ_B} p(σ_B) Σ_{σ_u, σ̂_u} p(σ_u|σ_B) p(σ̂_u|σ_B) · ½ Σ_{σ_A} |p(σ_A|σ_B σ_u) − p(σ_A|σ_B σ̂_u)|`,
/// summed over ordered pairs.
pub fn single_flip_tv(p: &ProbabilityTable, a: &Region, b: &Region, u: usize) -> Result<f64> {
    let window = p.window().clone();
    let us = window.region([u])?;
    let j = Joint3::new(p, a, b, &us)?;
    let (na, nc) = (j.na, j.nc);
    let mut total = 0.0;
    for code in 0..j.nb {
        let t = j.sector(code);
        let pb: f64 = t.iter().sum();
        if pb < NULL_EVENT {
            continue;
        }
        let pu: Vec<f64> = (0..nc).map(|s| t[s * na..(s + 1) * na].iter().sum()).collect();
        for s in 0..nc {
            for h in 0..nc {
                if s == h || pu[s] < NULL_EVENT || pu[h] < NULL_EVENT {
                    continue;
                }
                let flip: f64 =
                    0.5 * (0..na).map(|ia| (t[s * na + ia] / pu[s] - t[h * na + ia] / pu[h]).abs()).sum::<f64>();
                total += pb * (pu[s] / pb) * (pu[h] / pb) * flip;
            }
        }
    }
    Ok(total)
}

fn require_binary(p: &ProbabilityTable) -> Result<()> {
    if p.local_dim() != 2 {
        return Err(Error::InvalidArgument("spin covariances need local dimension 2".into()));
    }
    Ok(())
}

/// `⟨σ_x; σ_u⟩_B = Σ_{σ_B} p(σ_B) ⟨σ_x; σ_u⟩_{σ_B}`.
pub fn averaged_covariance(p: &ProbabilityTable, x: usize, b: &Region, u: usize) -> Result<f64> {
    require_binary(p)?;
    let w = p.window().clone();
    let j = Joint3::new(p, &w.region([x])?, b, &w.region([u])?)?;
    let mut total = 0.0;
    for code in 0..j.nb {
        let t = j.sector(code);
        let pb: f64 = t.iter().sum();
        if pb < NULL_EVENT {
            continue;
        }
        total += pb * spin_covariance(t);
    }
    Ok(total)
}

/// Covariance from the four weights `q[s_x + 2 s_u]` of a pair of spins.
fn spin_covariance(q: &[f64]) -> f64 {
    let z: f64 = q.iter().sum();
    let m = |f: &dyn Fn(usize, usize) -> f64| (0..4).map(|k| q[k] * f(k & 1, k >> 1)).sum::<f64>() / z;
    let exy = m(&|a, b| spin_value(a) * spin_value(b));
    let ex = m(&|a, _| spin_value(a));
    let ey = m(&|_, b| spin_value(b));
    exy - ex * ey
}

/// `κ Σ_{a'∈A} ⟨σ_{a'}; σ_u⟩_B`.
pub fn fkg_rhs(p: &ProbabilityTable, a: &Region, b: &Region, u: usize, kappa: f64) -> Result<f64> {
    check_disjoint(&[a, b, &p.window().region([u])?])?;
    let mut total = 0.0;
    for &x in a.sites() {
        total += averaged_covariance(p, x, b, u)?;
    }
    Ok(kappa * total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    Exact,
    Restricted,
}

#[derive(Clone, Debug, Default)]
pub struct KernelOptions {
    /// Sites that conditioning sets must avoid, besides `u` and `v`.
    pub exclude: Option<Region>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub mode: KernelMode,
    /// Set in restricted mode, where only part of the conditioning sets are visited.
    pub lower_bound: bool,
    pub conditioning_sets: usize,
}

/// `K_B(u,v) = max_{D ⊇ B} max_{σ_D} ⟨σ_u; σ_v⟩_{σ_D}` over `D ⊆ W∖{u,v}`.
pub fn influence_kernel(
    p: &ProbabilityTable,
    b: &Region,
    u: usize,
    v: usize,
    mode: KernelMode,
    opts: &KernelOptions,
) -> Result<KernelValue> {
    require_binary(p)?;
    let w = p.window().clone();
    if p.region().len() != w.site_count() {
        return Err(Error::RegionMismatch("kernel needs the measure on the whole window".into()));
    }
    let uv = w.region([u, v])?;
    if u == v || !uv.is_disjoint(b) {
        return Err(Error::Overlap("u, v must be distinct and outside B".into()));
    }
    let mut blocked = b.union(&uv);
    if let Some(ex) = &opts.exclude {
        blocked = blocked.union(ex);
    }
    let free = blocked.complement();
    match mode {
        KernelMode::Exact => {
            if free.len() > MAX_KERNEL_FREE_SITES {
                return Err(Error::Capacity {
                    what: "kernel free sites",
                    got: free.len(),
                    limit: MAX_KERNEL_FREE_SITES,
                });
            }
            let (value, count) = exact_kernel(p, b, u, v, &free)?;
            Ok(KernelValue { value, mode, lower_bound: false, conditioning_sets: count })
        }
        KernelMode::Restricted => {
            let mut sets: Vec<Region> = vec![b.clone()];
            let max_r = (0..w.site_count()).map(|s| w.distance(u, s)).max().unwrap_or(0);
            for r in 1..=max_r {
                let shell = w.region((0..w.site_count()).filter(|&s| free.contains(s) && w.distance(u, s) == r))?;
                let ball = w.region((0..w.site_count()).filter(|&s| free.contains(s) && w.distance(u, s) <= r))?;
                for extra in [shell, ball] {
                    let d = b.union(&extra);
                    if !extra.is_empty() && !sets.contains(&d) {
                        sets.push(d);
                    }
                }
            }
            let mut best = f64::NEG_INFINITY;
            for d in &sets {
                best = best.max(max_conditional_covariance(p, d, u, v)?);
            }
            Ok(KernelValue { value: best, mode, lower_bound: true, conditioning_sets: sets.len() })
        }
    }
}

fn max_conditional_covariance(p: &ProbabilityTable, d: &Region, u: usize, v: usize) -> Result<f64> {
    let w = p.window();
    let j = Joint3::new(p, &w.region([u])?, d, &w.region([v])?)?;
    let mut best = f64::NEG_INFINITY;
    for code in 0..j.nb {
        let t = j.sector(code);
        if t.iter().sum::<f64>() > NULL_EVENT {
            best = best.max(spin_covariance(t));
        }
    }
    Ok(best)
}

/// Every `D = B ∪ S`, `S ⊆ free`, through one ternary transform in which each
/// free site is fixed to `+`, fixed to `−`, or summed out.
fn exact_kernel(p: &ProbabilityTable, b: &Region, u: usize, v: usize, free: &Region) -> Result<(f64, usize)> {
    let w = p.window();
    let uv = w.region([u, v])?;
    let m = b.union(free).union(&uv);
    let marginal = p.marginal(&m)?;
    let nb = pow(2, b.len());
    let inner = 4 * nb;
    let nf = free.len();
    let strides: Vec<usize> = (0..nf).map(|k| inner * pow(3, k)).collect();
    let mut table = vec![0.0; inner * pow(3, nf)];
    let pos_u = m.position(u).expect("u in m");
    let pos_v = m.position(v).expect("v in m");
    let pos_b: Vec<usize> = b.sites().iter().map(|&s| m.position(s).expect("b in m")).collect();
    let pos_f: Vec<usize> = free.sites().iter().map(|&s| m.position(s).expect("free in m")).collect();
    for (y, &q) in marginal.probs().iter().enumerate() {
        let mut idx = ((y >> pos_u) & 1) + 2 * ((y >> pos_v) & 1);
        for (k, &pb) in pos_b.iter().enumerate() {
            idx += 4 * (((y >> pb) & 1) << k);
        }
        for (k, &pf) in pos_f.iter().enumerate() {
            idx += ((y >> pf) & 1) * strides[k];
        }
        table[idx] += q;
    }
    for &stride in &strides {
        let block = 3 * stride;
        for base in (0..table.len()).step_by(block) {
            for off in 0..stride {
                let i = base + off;
                table[i + 2 * stride] = table[i] + table[i + stride];
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut count = 0;
    for q in table.chunks_exact(4) {
        if q.iter().sum::<f64>() > NULL_EVENT {
            best = best.max(spin_covariance(q));
            count += 1;
        }
    }
    Ok((best, count))
}

// ---------------------------------------------------------------------------
// Phase deficit

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentPhase {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// `α_j` indexed by `code(σ_{A_j}) + ν^{|A_j|} · code(σ_{B_j})`.
    pub table: Vec<f64>,
}

/// Phase functions `α(σ_A, σ_B)`, `γ(σ_C, σ_B)` and the achieved objective
/// `(Σ p |1 − e^{i(α+γ−θ)}|²)^{1/2}`, an upper bound on the infimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseSplit {
    #[serde(skip)]
    pub tri: Tripartition,
    pub local_dim: usize,
    /// `α` indexed by `code(σ_A) + ν^{|A|} · code(σ_B)`, values in `[0, 2π)`.
    pub alpha: Vec<f64>,
    /// `γ` indexed by `code(σ_C) + ν^{|C|} · code(σ_B)`, values in `[0, 2π)`.
    pub gamma: Vec<f64>,
    /// Per-component tables when optimized over a union of components.
    pub components: Option<Vec<ComponentPhase>>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl PhaseSplit {
    pub fn alpha_at(&self, a_code: usize, b_code: usize) -> f64 {
        self.alpha[a_code + pow(self.local_dim, self.tri.a.len()) * b_code]
    }

    pub fn gamma_at(&self, c_code: usize, b_code: usize) -> f64 {
        self.gamma[c_code + pow(self.local_dim, self.tri.c.len()) * b_code]
    }

    /// `α(σ_A, σ_B) + γ(σ_C, σ_B)` for a window configuration.
    pub fn phase_at(&self, x: usize) -> f64 {
        let nu = self.local_dim;
        let (a, b, c) = (&self.tri.a, &self.tri.b, &self.tri.c);
        let bc = extract_code(nu, b, x);
        self.alpha_at(extract_code(nu, a, x), bc) + self.gamma_at(extract_code(nu, c, x), bc)
    }

    /// The objective recomputed from the stored tables.
    pub fn evaluate(&self, psi: &PureState) -> f64 {
        let (p, theta) = amplitude_decompose(psi);
        let s: f64 = p
            .probs()
            .iter()
            .zip(theta.values())
            .enumerate()
            .map(|(x, (&w, &t))| w * chord_sq(self.phase_at(x) - t))
            .sum();
        s.sqrt()
    }
}

/// `|1 − e^{iΔ}|² = 4 sin²(Δ/2)`.
fn chord_sq(delta: f64) -> f64 {
    let s = (0.5 * delta).sin();
    4.0 * s * s
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct PhaseOptions {
    pub max_rounds: usize,
    pub tolerance: f64,
    /// Extra initializations from the heaviest configurations, besides the all-`+` one.
    pub restarts: usize,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self { max_rounds: 500, tolerance: 1e-12, restarts: 8 }
    }
}

/// Weighted phases `w_x e^{iθ_x}` restricted to a set of configurations,
/// with each block of phase variables addressed through its own index map.
struct BlockProblem {
    weights: Vec<f64>,
    theta: Vec<f64>,
    blocks: Vec<(Vec<usize>, usize)>,
}

struct BlockSolution {
    tables: Vec<Vec<f64>>,
    objective_sq: f64,
    rounds: usize,
    converged: bool,
}

impl BlockProblem {
    fn objective_sq(&self, tables: &[Vec<f64>]) -> f64 {
        (0..self.weights.len())
            .map(|i| {
                let s: f64 = self.blocks.iter().zip(tables).map(|((idx, _), t)| t[idx[i]]).sum();
                self.weights[i] * chord_sq(s - self.theta[i])
            })
            .sum()
    }

    /// Block-coordinate descent; every block update is the exact weighted
    /// circular mean given the other blocks.
    fn solve(&self, mut tables: Vec<Vec<f64>>, opts: &PhaseOptions) -> BlockSolution {
        let n = self.weights.len();
        let mut total: Vec<f64> =
            (0..n).map(|i| self.blocks.iter().zip(&tables).map(|((idx, _), t)| t[idx[i]]).sum()).collect();
        let mut obj = self.objective_sq(&tables).sqrt();
        let mut rounds = 0;
        let mut converged = obj <= opts.tolerance;
        while !converged && rounds < opts.max_rounds {
            rounds += 1;
            for (k, (idx, size)) in self.blocks.iter().enumerate() {
                let mut acc = vec![Complex64::new(0.0, 0.0); *size];
                for i in 0..n {
                    let rest = total[i] - tables[k][idx[i]];
                    acc[idx[i]] += Complex64::from_polar(self.weights[i], self.theta[i] - rest);
                }
                for i in 0..n {
                    total[i] -= tables[k][idx[i]];
                }
                for (t, z) in tables[k].iter_mut().zip(&acc) {
                    if z.norm() > 0.0 {
                        *t = z.arg();
                    }
                }
                for i in 0..n {
                    total[i] += tables[k][idx[i]];
                }
            }
            let next = self.objective_sq(&tables).sqrt();
            converged = obj - next < opts.tolerance || next <= opts.tolerance;
            obj = next.min(obj);
        }
        BlockSolution { objective_sq: self.objective_sq(&tables), tables, rounds, converged }
    }
}

fn wrap(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn check_tri(psi: &PureState, tri: &Tripartition) -> Result<()> {
    if tri.window() != psi.window() {
        return Err(Error::RegionMismatch("tripartition lives on another window".into()));
    }
    if tri.a.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(())
}

/// `ϑ_B(A|C)` by block-coordinate minimization, separately in every `σ_B`
/// sector, started from the configuration splitting
/// `α = θ(σ_A σ_B ε_C) − θ(ε_A σ_B ε_C)`, `γ = θ(ε_A σ_B σ_C)` with `ε` all `+`
/// and with further references `ε` taken from the heaviest configurations.
pub fn phase_deficit(psi: &PureState, tri: &Tripartition, opts: &PhaseOptions) -> Result<PhaseSplit> {
    check_tri(psi, tri)?;
    let nu = psi.local_dim();
    let (p, theta) = amplitude_decompose(psi);
    let (a, b, c) = (&tri.a, &tri.b, &tri.c);
    let full = psi.window().full();
    let (ca, cb, cc) =
        (restriction_codes(nu, &full, a), restriction_codes(nu, &full, b), restriction_codes(nu, &full, c));
    let (na, nb, nc) = (pow(nu, a.len()), pow(nu, b.len()), pow(nu, c.len()));
    if p.probs().iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidArgument("empty support".into()));
    }
    let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for x in 0..p.probs().len() {
        if p.probs()[x] > 0.0 {
            sectors[cb[x] as usize].push(x);
        }
    }
    let th = theta.values();
    let results: Vec<(usize, BlockSolution)> = sectors
        .par_iter()
        .enumerate()
        .filter(|(_, xs)| !xs.is_empty())
        .map(|(bcode, xs)| {
            let problem = BlockProblem {
                weights: xs.iter().map(|&x| p.probs()[x]).collect(),
                theta: xs.iter().map(|&x| th[x]).collect(),
                blocks: vec![
                    (xs.iter().map(|&x| ca[x] as usize).collect(), na),
                    (xs.iter().map(|&x| cc[x] as usize).collect(), nc),
                ],
            };
            let bx = embed_code(nu, b, bcode);
            let split_from = |a0: usize, c0: usize| {
                let (ea0, ec0) = (embed_code(nu, a, a0), embed_code(nu, c, c0));
                let alpha: Vec<f64> =
                    (0..na).map(|ia| th[embed_code(nu, a, ia) + bx + ec0] - th[ea0 + bx + ec0]).collect();
                let gamma: Vec<f64> = (0..nc).map(|ic| th[ea0 + bx + embed_code(nu, c, ic)]).collect();
                vec![alpha, gamma]
            };
            let mut refs = vec![(0usize, 0usize)];
            let mut order: Vec<usize> = (0..xs.len()).collect();
            order.sort_by(|&i, &j| problem.weights[j].total_cmp(&problem.weights[i]).then(i.cmp(&j)));
            for &i in order.iter() {
                if refs.len() > opts.restarts {
                    break;
                }
                let r = (ca[xs[i]] as usize, cc[xs[i]] as usize);
                if !refs.contains(&r) {
                    refs.push(r);
                }
            }
            let mut best: Option<BlockSolution> = None;
            for (a0, c0) in refs {
                let sol = problem.solve(split_from(a0, c0), opts);
                let done = sol.objective_sq.sqrt() <= opts.tolerance;
                if best.as_ref().is_none_or(|b| sol.objective_sq < b.objective_sq) {
                    best = Some(sol);
                }
                if done {
                    break;
                }
            }
            (bcode, best.expect("at least one start"))
        })
        .collect();
    let mut alpha = vec![0.0; na * nb];
    let mut gamma = vec![0.0; nc * nb];
    let (mut obj_sq, mut iterations, mut converged) = (0.0, 0, true);
    for (bcode, sol) in results {
        alpha[bcode * na..(bcode + 1) * na].copy_from_slice(&sol.tables[0]);
        gamma[bcode * nc..(bcode + 1) * nc].copy_from_slice(&sol.tables[1]);
        obj_sq += sol.objective_sq;
        iterations += sol.rounds;
        converged &= sol.converged;
    }
    alpha.iter_mut().chain(gamma.iter_mut()).for_each(|t| *t = wrap(*t));
    let mut split = PhaseSplit {
        tri: tri.clone(),
        local_dim: nu,
        alpha,
        gamma,
        components: None,
        objective: obj_sq.sqrt(),
        iterations,
        converged,
    };
    split.objective = split.evaluate(psi);
    Ok(split)
}

/// `ϑ_{B₁..B_n}(A₁..A_n | C)` with `α = Σ α_j(σ_{A_j}, σ_{B_j})`. The returned
/// split is already merged onto `A = ⊔A_j`, `B = ⊔B_j`; the per-component
/// tables are kept in [`PhaseSplit::components`].
pub fn phase_deficit_multi(
    psi: &PureState,
    components: &[(Region, Region)],
    c: &Region,
    opts: &PhaseOptions,
) -> Result<PhaseSplit> {
    if components.is_empty() || components.len() > 4 {
        return Err(Error::InvalidArgument(format!("need 1..=4 components, got {}", components.len())));
    }
    let mut all: Vec<&Region> = components.iter().flat_map(|(a, b)| [a, b]).collect();
    all.push(c);
    check_disjoint(&all)?;
    let w = psi.window().clone();
    let a_union = components.iter().fold(w.empty(), |acc, (a, _)| acc.union(a));
    let b_union = components.iter().fold(w.empty(), |acc, (_, b)| acc.union(b));
    if a_union.union(&b_union).union(c).len() != w.site_count() {
        return Err(Error::InvalidArgument("components and C must cover the window".into()));
    }
    let tri = Tripartition::new(a_union.clone(), b_union.clone(), c.clone())?;
    if components.len() == 1 {
        let mut split = phase_deficit(psi, &tri, opts)?;
        split.components = Some(vec![ComponentPhase {
            a: a_union.sites().to_vec(),
            b: b_union.sites().to_vec(),
            table: split.alpha.clone(),
        }]);
        return Ok(split);
    }
    check_tri(psi, &tri)?;
    let nu = psi.local_dim();
    let (p, theta) = amplitude_decompose(psi);
    let th = theta.values();
    let full = w.full();
    let support: Vec<usize> = (0..p.probs().len()).filter(|&x| p.probs()[x] > 0.0).collect();
    let mut blocks = Vec::new();
    for (a, b) in components {
        let (ca, cb) = (restriction_codes(nu, &full, a), restriction_codes(nu, &full, b));
        let na = pow(nu, a.len());
        blocks.push((support.iter().map(|&x| ca[x] as usize + na * cb[x] as usize).collect(), na * pow(nu, b.len())));
    }
    let (cc, cb) = (restriction_codes(nu, &full, c), restriction_codes(nu, &full, &b_union));
    let nc = pow(nu, c.len());
    blocks.push((support.iter().map(|&x| cc[x] as usize + nc * cb[x] as usize).collect(), nc * pow(nu, b_union.len())));
    let problem = BlockProblem {
        weights: support.iter().map(|&x| p.probs()[x]).collect(),
        theta: support.iter().map(|&x| th[x]).collect(),
        blocks,
    };
    // replace the digits of `x` on `r` by those of `code`
    let put =
        |x: usize, r: &Region, code: usize| x - embed_code(nu, r, extract_code(nu, r, x)) + embed_code(nu, r, code);
    let split_from = |eps: usize| {
        let mut tables = Vec::new();
        for (a, b) in components {
            let na = pow(nu, a.len());
            let table: Vec<f64> = (0..na * pow(nu, b.len()))
                .map(|k| {
                    let with_b = put(eps, b, k / na);
                    th[put(with_b, a, k % na)] - th[with_b]
                })
                .collect();
            tables.push(table);
        }
        let ea = put(eps, &a_union, 0) - embed_code(nu, &a_union, 0)
            + embed_code(nu, &a_union, extract_code(nu, &a_union, eps));
        let gamma: Vec<f64> =
            (0..nc * pow(nu, b_union.len())).map(|k| th[put(put(ea, &b_union, k / nc), c, k % nc)]).collect();
        tables.push(gamma);
        tables
    };
    let mut refs = vec![0usize];
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_by(|&i, &j| problem.weights[j].total_cmp(&problem.weights[i]).then(i.cmp(&j)));
    for &i in &order {
        if refs.len() > opts.restarts {
            break;
        }
        if !refs.contains(&support[i]) {
            refs.push(support[i]);
        }
    }
    let mut best: Option<BlockSolution> = None;
    let mut iterations = 0;
    for eps in refs {
        let sol = problem.solve(split_from(eps), opts);
        iterations += sol.rounds;
        let done = sol.objective_sq.sqrt() <= opts.tolerance;
        if best.as_ref().is_none_or(|b| sol.objective_sq < b.objective_sq) {
            best = Some(sol);
        }
        if done {
            break;
        }
    }
    let best = best.expect("at least one start");
    let tables: Vec<Vec<f64>> = best.tables.iter().map(|t| t.iter().map(|&v| wrap(v)).collect()).collect();
    let comps: Vec<ComponentPhase> = components
        .iter()
        .zip(&tables)
        .map(|((a, b), t)| ComponentPhase { a: a.sites().to_vec(), b: b.sites().to_vec(), table: t.clone() })
        .collect();
    let (na, nb) = (pow(nu, a_union.len()), pow(nu, b_union.len()));
    let mut alpha = vec![0.0; na * nb];
    for bcode in 0..nb {
        for acode in 0..na {
            let x = embed_code(nu, &a_union, acode) + embed_code(nu, &b_union, bcode);
            let s: f64 = components
                .iter()
                .zip(&tables)
                .map(|((a, b), t)| t[extract_code(nu, a, x) + pow(nu, a.len()) * extract_code(nu, b, x)])
                .sum();
            alpha[acode + na * bcode] = wrap(s);
        }
    }
    let mut split = PhaseSplit {
        tri,
        local_dim: nu,
        alpha,
        gamma: tables.last().expect("gamma block").clone(),
        components: Some(comps),
        objective: 0.0,
        iterations,
        converged: best.converged,
    };
    split.objective = split.evaluate(psi);
    Ok(split)
}

/// Objective recomputed directly from the per-component tables, without
/// going through the merged `α`.
pub fn component_objective(psi: &PureState, split: &PhaseSplit) -> Result<f64> {
    let comps =
        split.components.as_ref().ok_or_else(|| Error::InvalidArgument("split has no component tables".into()))?;
    let nu = psi.local_dim();
    let w = psi.window();
    let regions: Vec<(Region, Region)> = comps
        .iter()
        .map(|c| Ok((Region::new(w, c.a.clone())?, Region::new(w, c.b.clone())?)))
        .collect::<Result<_>>()?;
    let (p, theta) = amplitude_decompose(psi);
    let s: f64 = (0..p.probs().len())
        .map(|x| {
            let alpha: f64 = regions
                .iter()
                .zip(comps)
                .map(|((a, b), c)| c.table[extract_code(nu, a, x) + pow(nu, a.len()) * extract_code(nu, b, x)])
                .sum();
            let bx = extract_code(nu, &split.tri.b, x);
            let gamma = split.gamma_at(extract_code(nu, &split.tri.c, x), bx);
            p.probs()[x] * chord_sq(alpha + gamma - theta.values()[x])
        })
        .sum();
    Ok(s.sqrt())
}

/// Exhaustive search over phases on a `2π/steps` grid: in every `σ_B`
/// sector the smaller of the two sides is enumerated on the grid, with its
/// first phase fixed to 0, and the other side is optimized exactly.
pub fn phase_deficit_grid(psi: &PureState, tri: &Tripartition, steps: usize) -> Result<f64> {
    check_tri(psi, tri)?;
    let n = psi.window().site_count();
    if n > MAX_GRID_SITES {
        return Err(Error::Capacity { what: "grid oracle sites", got: n, limit: MAX_GRID_SITES });
    }
    let nu = psi.local_dim();
    let (p, theta) = amplitude_decompose(psi);
    let full = psi.window().full();
    let (ca, cb, cc) = (
        restriction_codes(nu, &full, &tri.a),
        restriction_codes(nu, &full, &tri.b),
        restriction_codes(nu, &full, &tri.c),
    );
    let (na, nb, nc) = (pow(nu, tri.a.len()), pow(nu, tri.b.len()), pow(nu, tri.c.len()));
    let (ns, no, a_small) = if na <= nc { (na, nc, true) } else { (nc, na, false) };
    let points = steps.checked_pow(ns.saturating_sub(1) as u32).unwrap_or(usize::MAX);
    if points > MAX_GRID_POINTS {
        return Err(Error::Capacity { what: "grid points per sector", got: points, limit: MAX_GRID_POINTS });
    }
    let grid: Vec<Complex64> =
        (0..steps).map(|k| Complex64::from_polar(1.0, -(k as f64) * TAU / steps as f64)).collect();
    let mut total = 0.0;
    for bcode in 0..nb {
        // z[s][o] = p e^{iθ} on the (small side, other side) grid of the sector
        let mut z = vec![Complex64::new(0.0, 0.0); ns * no];
        let mut weight = 0.0;
        for x in 0..p.probs().len() {
            if cb[x] as usize != bcode {
                continue;
            }
            let (s, o) = if a_small { (ca[x] as usize, cc[x] as usize) } else { (cc[x] as usize, ca[x] as usize) };
            let w = p.probs()[x];
            z[s * no + o] += Complex64::from_polar(w, theta.values()[x]);
            weight += w;
        }
        if weight == 0.0 {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        let mut digits = vec![0usize; ns];
        let mut acc = vec![Complex64::new(0.0, 0.0); no];
        for _ in 0..points {
            acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for s in 0..ns {
                let g = grid[digits[s]];
                for o in 0..no {
                    acc[o] += z[s * no + o] * g;
                }
            }
            let score: f64 = acc.iter().map(|v| v.norm()).sum();
            if score > best {
                best = score;
            }
            for d in digits.iter_mut().skip(1) {
                *d += 1;
                if *d < steps {
                    break;
                }
                *d = 0;
            }
        }
        total += (2.0 * weight - 2.0 * best).max(0.0);
    }
    Ok(total.sqrt())
}

/// Resolution of the grid oracle, `2π/steps`.
pub fn grid_resolution(steps: usize) -> f64 {
    2.0 * PI / steps as f64
}

// ---------------------------------------------------------------------------
// Audits

/// Symmetry, monotonicity and sub-cocycle of `TV`, single-site
/// telescoping of `δ_B`, the four-term estimate for `A₁ = a, B₁ = b, A₂ = c,
/// B₂ = d`, and the single-flip bound for every `u ∈ c ⊔ d`.
pub fn tv_algebra_audit(
    p: &ProbabilityTable,
    a: &Region,
    b: &Region,
    c: &Region,
    d: &Region,
    slack: f64,
) -> Result<Vec<AuditReport>> {
    check_disjoint(&[a, b, c, d])?;
    let w = p.window().clone();
    let e = w.empty();
    let cd = c.union(d);
    let mut out = Vec::new();
    out.push(AuditReport::eq("tv_symmetry", tv(p, a, c)?.value, tv(p, c, a)?.value, slack));
    let tv_ac = tv(p, a, c)?.value;
    let tv_acd = tv(p, a, &cd)?.value;
    out.push(AuditReport::leq("tv_monotonicity", tv_ac, tv_acd, slack));
    let tv_c_ad = tv_conditional(p, a, c, d)?.value;
    out.push(AuditReport::leq("sub_cocycle", tv_acd, tv_ac + tv_c_ad, slack));
    let lhs = tv_conditional(p, a, b, &cd)?.value;
    let mut given = b.clone();
    let mut chain = 0.0;
    for &s in cd.sites() {
        let site = w.region([s])?;
        chain += tv_conditional(p, a, &given, &site)?.value;
        given = given.union(&site);
    }
    out.push(AuditReport::leq("telescoping", lhs, chain, slack));
    let lhs = tv(p, &a.union(b), &c.union(d))?.value;
    let rhs = tv_conditional(p, a, &e, c)?.value
        + tv_conditional(p, a, b, c)?.value
        + tv_conditional(p, a, d, c)?.value
        + tv_conditional(p, a, &b.union(d), c)?.value;
    out.push(AuditReport::leq("four_term", lhs, rhs, slack));
    for &u in cd.sites() {
        let us = w.region([u])?;
        let lhs = tv_conditional(p, a, b, &us)?.value;
        let rhs = single_flip_tv(p, a, b, u)?;
        out.push(AuditReport::leq("single_flip", lhs, rhs, slack).with_case(format!("u={u}")));
    }
    Ok(out)
}

/// `δ_B(A|{u}) ≤ κ Σ_{a∈A} ⟨σ_a; σ_u⟩_B`.
pub fn key_lemma_audit(
    p: &ProbabilityTable,
    a: &Region,
    b: &Region,
    u: usize,
    kappa: f64,
    slack: f64,
) -> Result<AuditReport> {
    let us = p.window().region([u])?;
    let lhs = tv_conditional(p, a, b, &us)?.value;
    let rhs = fkg_rhs(p, a, b, u, kappa)?;
    Ok(AuditReport::leq("key_lemma", lhs, rhs, slack).with_kappa(kappa))
}

/// `δ_B(A|C) ≤ κ Σ_{u∈A, v∈C} K_B(u,v)`, with exact kernels.
pub fn kernel_sum_audit(
    p: &ProbabilityTable,
    a: &Region,
    b: &Region,
    c: &Region,
    kappa: f64,
    slack: f64,
) -> Result<AuditReport> {
    let lhs = tv_conditional(p, a, b, c)?.value;
    let mut sum = 0.0;
    for &u in a.sites() {
        for &v in c.sites() {
            sum += influence_kernel(p, b, u, v, KernelMode::Exact, &KernelOptions::default())?.value;
        }
    }
    Ok(AuditReport::leq("kernel_sum", lhs, kappa * sum, slack).with_kappa(kappa))
}
