//! Transverse-field Ising model `H = −Σ J σ^z_u σ^z_v − b Σ σ^x_u − h^z Σ σ^z_u`
//! with Pauli operators, free boundary conditions and finite-range
//! ferromagnetic couplings, plus ground-state, correlator and conditional
//! covariance tooling on its z-basis measure.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Region, Window, MAX_STATE_SITES};
use crate::states::{pow, spin_value, ProbabilityTable, PureState, SpinConfiguration};

/// Largest window for which [`Hamiltonian::to_dense`] is allowed.
pub const MAX_DENSE_SITES: usize = 12;
/// Ground states with a spectral gap below this are flagged as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;
const STOQUASTIC_TOLERANCE: f64 = 1e-12;
const PARALLEL_CHUNK: usize = 1 << 12;

/// Bond family `(u, u + offset)` with strength `J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub offset: Vec<i64>,
    #[serde(rename = "J")]
    pub j: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingSpec {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub couplings: Vec<Coupling>,
    pub b: f64,
    #[serde(default)]
    pub hz: f64,
}

impl IsingSpec {
    /// Uniform nearest-neighbour couplings along every lattice axis.
    pub fn nearest_neighbor(dims: &[usize], j: f64, b: f64) -> Self {
        let couplings = (0..dims.len())
            .map(|axis| {
                let mut offset = vec![0; dims.len()];
                offset[axis] = 1;
                Coupling { offset, j }
            })
            .collect();
        Self { dims: dims.to_vec(), couplings, b, hz: 0.0 }
    }

    pub fn chain(n: usize, j: f64, b: f64) -> Self {
        Self::nearest_neighbor(&[n], j, b)
    }

    pub fn window(&self) -> Result<Window> {
        Window::new(&self.dims)
    }

    pub fn validate(&self) -> Result<Window> {
        let window = self.window()?;
        for c in &self.couplings {
            if c.offset.len() != self.dims.len() {
                return Err(Error::InvalidArgument(format!(
                    "coupling offset {:?} does not match window dimension {}",
                    c.offset,
                    self.dims.len()
                )));
            }
            if c.offset.iter().all(|&o| o == 0) {
                return Err(Error::InvalidArgument("coupling offsets must be nonzero".into()));
            }
            if c.j < 0.0 || !c.j.is_finite() {
                return Err(Error::InvalidArgument(format!("couplings must be finite and ≥ 0, got {}", c.j)));
            }
        }
        if self.b < 0.0 || !self.b.is_finite() {
            return Err(Error::InvalidArgument(format!("transverse field must be finite and ≥ 0, got {}", self.b)));
        }
        if !self.hz.is_finite() {
            return Err(Error::InvalidArgument("longitudinal field must be finite".into()));
        }
        Ok(window)
    }
}

/// Sparse TFIM operator: a diagonal plus `−b` on every single spin flip.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    window: Window,
    bonds: Vec<(usize, usize, f64)>,
    b: f64,
    hz: f64,
    diagonal: Vec<f64>,
}

pub fn build_hamiltonian(spec: &IsingSpec) -> Result<Hamiltonian> {
    let window = spec.validate()?;
    let n = window.site_count();
    if n > MAX_STATE_SITES {
        return Err(Error::Capacity { what: "hamiltonian sites", got: n, limit: MAX_STATE_SITES });
    }
    let mut bonds = Vec::new();
    for c in &spec.couplings {
        for u in 0..n {
            if let Some(v) = window.translate(u, &c.offset) {
                bonds.push((u, v, c.j));
            }
        }
    }
    let hz = spec.hz;
    let diagonal = (0..pow(2, n))
        .into_par_iter()
        .map(|x| {
            let s = |site: usize| spin_value((x >> site) & 1);
            let zz: f64 = bonds.iter().map(|&(u, v, j)| j * s(u) * s(v)).sum();
            let field: f64 = if hz == 0.0 { 0.0 } else { hz * (0..n).map(s).sum::<f64>() };
            -zz - field
        })
        .collect();
    Ok(Hamiltonian { window, bonds, b: spec.b, hz, diagonal })
}

impl Hamiltonian {
    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn hz(&self) -> f64 {
        self.hz
    }

    pub fn bonds(&self) -> &[(usize, usize, f64)] {
        &self.bonds
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `out = H v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        let n = self.window.site_count();
        let (b, diag) = (self.b, &self.diagonal);
        out.par_chunks_mut(PARALLEL_CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * PARALLEL_CHUNK;
            for (k, y) in chunk.iter_mut().enumerate() {
                let x = base + k;
                let flips: f64 = (0..n).map(|s| v[x ^ (1 << s)]).sum();
                *y = diag[x] * v[x] - b * flips;
            }
        });
    }

    /// `⟨ψ|H|ψ⟩` for a normalized qubit state on the same window.
    pub fn expectation(&self, psi: &PureState) -> Result<f64> {
        if psi.window() != &self.window || psi.local_dim() != 2 {
            return Err(Error::RegionMismatch("state does not live on the Hamiltonian's window".into()));
        }
        let re: Vec<f64> = psi.amplitudes().iter().map(|z| z.re).collect();
        let im: Vec<f64> = psi.amplitudes().iter().map(|z| z.im).collect();
        let mut h = vec![0.0; self.dim()];
        self.apply(&re, &mut h);
        let mut e = dot(&re, &h);
        self.apply(&im, &mut h);
        e += dot(&im, &h);
        Ok(e)
    }

    /// Dense matrix, for cross-checks on small windows.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.window.site_count();
        if n > MAX_DENSE_SITES {
            return Err(Error::Capacity { what: "dense hamiltonian sites", got: n, limit: MAX_DENSE_SITES });
        }
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            m[(x, x)] = self.diagonal[x];
            for s in 0..n {
                m[(x, x ^ (1 << s))] -= self.b;
            }
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub compute_gap: bool,
    pub accept_degenerate: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, krylov_dim: 60, max_restarts: 200, compute_gap: true, accept_degenerate: false }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: PureState,
    /// `E₁ − E₀`, or `None` when not computed.
    pub gap: Option<f64>,
    pub degenerate: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl GroundStateResult {
    /// Refuse flagged results unless `allow_degenerate` is set.
    pub fn require_unique(&self, allow_degenerate: bool) -> Result<&PureState> {
        if self.degenerate && !allow_degenerate {
            return Err(Error::Degenerate { gap: self.gap.unwrap_or(0.0) });
        }
        Ok(&self.state)
    }
}

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization, and
/// the gap from a second run deflated against the ground vector.
pub fn ground_state(h: &Hamiltonian, opts: &SolverOptions) -> Result<GroundStateResult> {
    if h.b == 0.0 && !opts.accept_degenerate {
        return Err(Error::InvalidArgument(
            "b = 0 has a degenerate ground space; request degenerate mode explicitly".into(),
        ));
    }
    let dim = h.dim();
    let apply = |v: &[f64], out: &mut [f64]| h.apply(v, out);
    let start = vec![1.0; dim];
    let ground = lanczos_lowest(&apply, start, &[], opts)?;
    let mut iterations = ground.iterations;
    let gap = if opts.compute_gap && dim > 1 {
        let start: Vec<f64> = (0..dim).map(|x| 1.0 + 0.5 * ((x as f64) * 0.618_033_988_749_895).fract()).collect();
        let excited = lanczos_lowest(&apply, start, &[&ground.vector], opts)?;
        iterations += excited.iterations;
        Some((excited.value - ground.value).max(0.0))
    } else {
        None
    };
    let degenerate = gap.is_some_and(|g| g < DEGENERACY_GAP);
    let psi = PureState::from_real(&h.window, 2, &ground.vector)?.with_fixed_phase();
    Ok(GroundStateResult { energy: ground.value, state: psi, gap, degenerate, iterations, residual: ground.residual })
}

struct Eigenpair {
    value: f64,
    vector: Vec<f64>,
    iterations: usize,
    residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn orthogonalize(w: &mut [f64], against: &[&[f64]]) {
    for _ in 0..2 {
        for u in against {
            let c = dot(u, w);
            axpy(-c, u, w);
        }
    }
}

fn lanczos_lowest(
    apply: &dyn Fn(&[f64], &mut [f64]),
    start: Vec<f64>,
    deflate: &[&[f64]],
    opts: &SolverOptions,
) -> Result<Eigenpair> {
    let dim = start.len();
    let space = dim.saturating_sub(deflate.len());
    if space == 0 {
        return Err(Error::InvalidArgument("no space left after deflation".into()));
    }
    let m = opts.krylov_dim.clamp(2, 1000).min(space);
    let mut x = start;
    orthogonalize(&mut x, deflate);
    if normalize(&mut x) == 0.0 {
        return Err(Error::InvalidArgument("start vector lies in the deflated space".into()));
    }
    let mut iterations = 0;
    let mut hx = vec![0.0; dim];
    let mut residual = f64::INFINITY;
    for _ in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![x.clone()];
        let mut alphas = Vec::with_capacity(m);
        let mut betas: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![0.0; dim];
        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            iterations += 1;
            let alpha = dot(&basis[j], &w);
            alphas.push(alpha);
            let refs: Vec<&[f64]> = deflate.iter().copied().chain(basis.iter().map(|v| v.as_slice())).collect();
            orthogonalize(&mut w, &refs);
            let beta = normalize(&mut w);
            if basis.len() == m || beta <= 1e-12 * alpha.abs().max(1.0) {
                break;
            }
            betas.push(beta);
            basis.push(w.clone());
        }
        let k = alphas.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c {
                betas[r]
            } else if c + 1 == r {
                betas[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (idx, _) =
            eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty tridiagonal");
        let coeffs = eig.eigenvectors.column(idx);
        x.iter_mut().for_each(|v| *v = 0.0);
        for (c, v) in coeffs.iter().zip(&basis) {
            axpy(*c, v, &mut x);
        }
        orthogonalize(&mut x, deflate);
        normalize(&mut x);
        apply(&x, &mut hx);
        iterations += 1;
        let value = dot(&x, &hx);
        residual = hx.iter().zip(&x).map(|(h, v)| (h - value * v).powi(2)).sum::<f64>().sqrt();
        if residual < opts.tolerance {
            return Ok(Eigenpair { value, vector: x, iterations, residual });
        }
    }
    Err(Error::NotConverged { iterations, residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Z,
}

fn check_qubit_sites(psi: &PureState, sites: &[usize]) -> Result<()> {
    if psi.local_dim() != 2 {
        return Err(Error::InvalidArgument("Pauli correlators need local dimension 2".into()));
    }
    let count = psi.window().site_count();
    for &s in sites {
        if s >= count {
            return Err(Error::SiteOutOfRange { site: s, count });
        }
    }
    Ok(())
}

/// `⟨ψ| F |ψ⟩` for the spin-flip operator `F` flipping every site in `mask`.
fn flip_expectation(psi: &PureState, mask: usize) -> f64 {
    let a = psi.amplitudes();
    a.iter().enumerate().map(|(x, z)| (z.conj() * a[x ^ mask]).re).sum()
}

fn z_expectation(p: &[f64], mask: usize) -> f64 {
    p.iter().enumerate().map(|(x, &q)| if (x & mask).count_ones().is_multiple_of(2) { q } else { -q }).sum()
}

/// `⟨S^a_u⟩`.
pub fn magnetization(psi: &PureState, u: usize, axis: Axis) -> Result<f64> {
    check_qubit_sites(psi, &[u])?;
    Ok(match axis {
        Axis::X => flip_expectation(psi, 1 << u),
        Axis::Z => z_expectation(psi.probabilities().probs(), 1 << u),
    })
}

/// `⟨S^a_u S^a_v⟩`, minus `⟨S^a_u⟩⟨S^a_v⟩` when `truncated`.
pub fn correlator(psi: &PureState, u: usize, v: usize, axis: Axis, truncated: bool) -> Result<f64> {
    check_qubit_sites(psi, &[u, v])?;
    let mask = (1usize << u) ^ (1usize << v);
    let (pair, mu, mv) = match axis {
        Axis::X => {
            let pair = if u == v { 1.0 } else { flip_expectation(psi, mask) };
            let (mu, mv) =
                if truncated { (flip_expectation(psi, 1 << u), flip_expectation(psi, 1 << v)) } else { (0.0, 0.0) };
            (pair, mu, mv)
        }
        Axis::Z => {
            let table = psi.probabilities();
            let p = table.probs();
            let (mu, mv) = if truncated { (z_expectation(p, 1 << u), z_expectation(p, 1 << v)) } else { (0.0, 0.0) };
            (z_expectation(p, mask), mu, mv)
        }
    };
    Ok(pair - mu * mv)
}

/// Covariance of `σ_u, σ_v` under `p` conditioned on `given`.
pub fn conditional_covariance(p: &ProbabilityTable, u: usize, v: usize, given: &SpinConfiguration) -> Result<f64> {
    if p.local_dim() != 2 {
        return Err(Error::InvalidArgument("spin covariances need local dimension 2".into()));
    }
    if given.region.contains(u) || given.region.contains(v) {
        return Err(Error::Overlap(format!("sites {u}, {v} must lie outside the conditioning region")));
    }
    let target = p.window().region([u, v])?;
    let q = p.conditional(&target, given)?;
    let pair = target.clone();
    let spin = |site: usize, code: usize| spin_value((code >> pair.position(site).expect("in target")) & 1);
    let (mut suv, mut su, mut sv) = (0.0, 0.0, 0.0);
    for (code, &w) in q.probs().iter().enumerate() {
        let (a, b) = (spin(u, code), spin(v, code));
        suv += w * a * b;
        su += w * a;
        sv += w * b;
    }
    Ok(suv - su * sv)
}

/// `⟨S^z_u; S^z_v⟩` of the state's z-basis measure conditioned on `given`.
pub fn conditional_correlator(psi: &PureState, u: usize, v: usize, given: &SpinConfiguration) -> Result<f64> {
    check_qubit_sites(psi, &[u, v])?;
    conditional_covariance(&psi.probabilities(), u, v, given)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StoquasticReport {
    pub stoquastic: bool,
    /// Largest of `−Re ψ(σ)` and `|Im ψ(σ)|` over all configurations.
    pub max_violation: f64,
}

/// Nonnegativity of all amplitudes after the global phase fix.
pub fn stoquastic_check(psi: &PureState) -> StoquasticReport {
    let fixed = psi.with_fixed_phase();
    let max_violation =
        fixed.amplitudes().iter().map(|z: &Complex64| (-z.re).max(z.im.abs())).fold(f64::NEG_INFINITY, f64::max);
    StoquasticReport { stoquastic: max_violation <= STOQUASTIC_TOLERANCE, max_violation }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DssReport {
    pub u: usize,
    pub v: usize,
    /// Unconditioned, untruncated `⟨σ_u σ_v⟩`.
    pub bound: f64,
    /// Largest conditional covariance found.
    pub worst: f64,
    pub worst_region: Vec<usize>,
    pub worst_config: usize,
    pub instances: usize,
    pub pass: bool,
}

/// Subsets of `pool` with at most `max_size` elements, in lexicographic order.
pub fn small_subsets(pool: &[usize], max_size: usize) -> Vec<Vec<usize>> {
    fn rec(pool: &[usize], start: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            rec(pool, i + 1, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(pool, 0, max_size, &mut Vec::new(), &mut out);
    out
}

/// Conditional covariances against the unconditioned correlation, over every
/// conditioning set `D ⊆ W∖{u,v}` with `|D| ≤ max_size` and every `σ_D` of
/// positive weight.
pub fn dss_audit(p: &ProbabilityTable, u: usize, v: usize, max_size: usize, slack: f64) -> Result<DssReport> {
    let window = p.window().clone();
    let bound = {
        let m = (1usize << u) ^ (1usize << v);
        if p.region().len() != window.site_count() {
            return Err(Error::RegionMismatch("measure must cover the whole window".into()));
        }
        z_expectation(p.probs(), m)
    };
    let pool: Vec<usize> = (0..window.site_count()).filter(|&s| s != u && s != v).collect();
    let mut report = DssReport {
        u,
        v,
        bound,
        worst: f64::NEG_INFINITY,
        worst_region: Vec::new(),
        worst_config: 0,
        instances: 0,
        pass: true,
    };
    for d in small_subsets(&pool, max_size) {
        let region = Region::new(&window, d.clone())?;
        let local = p.marginal(&region.union(&window.region([u, v])?))?;
        let marginal = local.marginal(&region)?;
        for (code, &w) in marginal.probs().iter().enumerate() {
            if w <= crate::states::NULL_EVENT {
                continue;
            }
            let given = SpinConfiguration::new(region.clone(), code, 2)?;
            let cov = conditional_covariance(&local, u, v, &given)?;
            report.instances += 1;
            if cov > report.worst {
                report.worst = cov;
                report.worst_region = d.clone();
                report.worst_config = code;
            }
        }
    }
    report.pass = report.worst <= report.bound + slack;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn solve(spec: &IsingSpec) -> GroundStateResult {
        ground_state(&build_hamiltonian(spec).unwrap(), &SolverOptions::default()).unwrap()
    }

    fn dense_lowest(h: &Hamiltonian) -> (f64, f64) {
        let mut e: Vec<f64> = SymmetricEigen::new(h.to_dense().unwrap()).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        (e[0], e[1])
    }

    /// Free-fermion ground energy of the open chain: minus the sum of the
    /// singular values of the bidiagonal matrix with `b` on the diagonal and
    /// `J` above it.
    fn free_fermion_energy(n: usize, j: f64, b: f64) -> f64 {
        let m = DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                b
            } else if c == r + 1 {
                j
            } else {
                0.0
            }
        });
        -m.singular_values().iter().sum::<f64>()
    }

    #[test]
    fn single_site() {
        let g = solve(&IsingSpec { dims: vec![1], couplings: vec![], b: 1.0, hz: 0.0 });
        assert!((g.energy + 1.0).abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(g.state.amplitudes().iter().all(|z| (z.re - r).abs() < 1e-10));
    }

    #[test]
    fn classical_pair() {
        let h = build_hamiltonian(&IsingSpec::chain(2, 1.0, 0.0)).unwrap();
        assert_eq!(h.diagonal(), &[-1.0, 1.0, 1.0, -1.0]);
        assert!(ground_state(&h, &SolverOptions::default()).is_err());
        let opts = SolverOptions { accept_degenerate: true, ..Default::default() };
        let g = ground_state(&h, &opts).unwrap();
        assert!(g.degenerate);
        assert!(g.gap.unwrap() < 1e-12);
        assert!(g.require_unique(false).is_err());
        assert!((correlator(&g.state, 0, 1, Axis::Z, false).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_at_criticality() {
        let h = build_hamiltonian(&IsingSpec::chain(2, 1.0, 1.0)).unwrap();
        let (e0, _) = dense_lowest(&h);
        assert!((e0 + 5f64.sqrt()).abs() < 1e-12);
        let g = ground_state(&h, &SolverOptions::default()).unwrap();
        assert!((g.energy - e0).abs() < 1e-12);
    }

    #[test]
    fn sparse_matches_dense() {
        let mut spec = IsingSpec::nearest_neighbor(&[2, 4], 0.7, 1.3);
        spec.couplings.push(Coupling { offset: vec![1, 1], j: 0.2 });
        spec.hz = 0.3;
        let h = build_hamiltonian(&spec).unwrap();
        let dense = h.to_dense().unwrap();
        let v = generators::random_state(h.window(), 2, 5);
        let re: Vec<f64> = v.amplitudes().iter().map(|z| z.re).collect();
        let mut out = vec![0.0; h.dim()];
        h.apply(&re, &mut out);
        let reference = &dense * nalgebra::DVector::from_column_slice(&re);
        assert!(out.iter().zip(reference.iter()).all(|(a, b)| (a - b).abs() < 1e-13));
        assert!((&dense - dense.transpose()).amax() == 0.0);
    }

    #[test]
    fn chain_energies_match_dense_and_free_fermions() {
        for (n, b) in [(6, 0.5), (8, 1.0), (10, 2.0)] {
            let h = build_hamiltonian(&IsingSpec::chain(n, 1.0, b)).unwrap();
            let g = ground_state(&h, &SolverOptions::default()).unwrap();
            let (e0, e1) = dense_lowest(&h);
            assert!((g.energy - e0).abs() < 1e-9, "n={n} b={b}");
            assert!((g.gap.unwrap() - (e1 - e0)).abs() < 1e-8);
            assert!((g.energy - free_fermion_energy(n, 1.0, b)).abs() < 1e-9);
            assert!(g.residual < 1e-10);
            assert!(stoquastic_check(&g.state).stoquastic);
        }
        let g = solve(&IsingSpec::chain(14, 1.0, 1.0));
        assert!((g.energy - free_fermion_energy(14, 1.0, 1.0)).abs() < 1e-9);
    }

    #[test]
    fn ground_state_symmetries() {
        let g = solve(&IsingSpec::nearest_neighbor(&[3, 3], 1.0, 3.0));
        let table = g.state.probabilities();
        let p = table.probs();
        let all = p.len() - 1;
        assert!((0..p.len()).all(|x| (p[x] - p[all ^ x]).abs() < 1e-10));
        let h = build_hamiltonian(&IsingSpec::nearest_neighbor(&[3, 3], 1.0, 3.0)).unwrap();
        for seed in 0..5 {
            let trial = generators::random_state(h.window(), 2, seed);
            assert!(h.expectation(&trial).unwrap() >= g.energy - 1e-12);
        }
    }

    #[test]
    fn correlator_basics() {
        let g = solve(&IsingSpec::chain(6, 1.0, 2.0));
        for axis in [Axis::X, Axis::Z] {
            assert!((correlator(&g.state, 2, 2, axis, false).unwrap() - 1.0).abs() < 1e-12);
        }
        let zz = correlator(&g.state, 1, 4, Axis::Z, false).unwrap();
        assert!((correlator(&g.state, 1, 4, Axis::Z, true).unwrap() - zz).abs() < 1e-12);
        let xx = correlator(&g.state, 1, 4, Axis::X, true).unwrap();
        assert!(xx.abs() <= 2.0);
        let mx = magnetization(&g.state, 0, Axis::X).unwrap();
        assert!(mx > 0.0 && mx < 1.0);
        assert!(correlator(&g.state, 0, 9, Axis::Z, false).is_err());
    }

    #[test]
    fn conditional_correlators() {
        let g = solve(&IsingSpec::chain(6, 1.0, 2.0));
        let w = g.state.window().clone();
        let vacuous = SpinConfiguration::empty(&w);
        let c = conditional_correlator(&g.state, 0, 3, &vacuous).unwrap();
        assert!((c - correlator(&g.state, 0, 3, Axis::Z, true).unwrap()).abs() < 1e-12);
        let prod =
            generators::product_state(&w, &[[0.3, 0.7], [1.0, 2.0], [0.5, 0.5], [1.0, 0.1], [0.2, 1.0], [1.0, 1.0]]);
        let given = SpinConfiguration::new(w.region([1, 4]).unwrap(), 2, 2).unwrap();
        assert!(conditional_correlator(&prod, 0, 5, &given).unwrap().abs() < 1e-15);
        assert!(conditional_correlator(&prod, 1, 5, &given).is_err());
        let ghz = generators::ghz(&w);
        let null = SpinConfiguration::new(w.region([1, 4]).unwrap(), 1, 2).unwrap();
        assert!(matches!(conditional_correlator(&ghz, 0, 5, &null), Err(Error::NullEvent)));
    }

    #[test]
    fn dss_on_small_chain() {
        let g = solve(&IsingSpec::chain(6, 1.0, 1.5));
        let r = dss_audit(&g.state.probabilities(), 1, 4, 2, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.instances, 1 + 4 * 2 + 6 * 4);
    }

    #[test]
    fn stoquastic_examples() {
        let w = Window::chain(1).unwrap();
        let minus = PureState::from_real(&w, 2, &[1.0, -1.0]).unwrap();
        let r = stoquastic_check(&minus);
        assert!(!r.stoquastic);
        assert!((r.max_violation - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let random = generators::random_state(&Window::chain(4).unwrap(), 2, 9);
        assert!(!stoquastic_check(&random).stoquastic);
    }

    #[test]
    fn spec_validation() {
        let mut s = IsingSpec::chain(3, -1.0, 1.0);
        assert!(build_hamiltonian(&s).is_err());
        s.couplings[0].j = 1.0;
        s.couplings[0].offset = vec![0];
        assert!(build_hamiltonian(&s).is_err());
        assert!(matches!(build_hamiltonian(&IsingSpec::chain(25, 1.0, 1.0)), Err(Error::Capacity { .. })));
        let parsed: IsingSpec =
            serde_json::from_str(r#"{"dims":[4],"couplings":[{"offset":[1],"J":1.0}],"b":2.0,"hz":0.0}"#).unwrap();
        assert_eq!(parsed, IsingSpec::chain(4, 1.0, 2.0));
    }
}
