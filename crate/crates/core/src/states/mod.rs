//! Pure states in a computational basis and everything read off them:
//! amplitude/phase decomposition, probability marginals and conditionals,
//! reduced density matrices, entropies, spectral tails, and pinching.
//!
//! Configurations are radix-ν integers. On a window, site `s` is digit `s`
//! (site 0 is the least significant digit). On a region, the `k`-th site of
//! the region's sorted site list is digit `k`. Digit 0 is the spin value +1.

mod density;
pub mod qpsv;

pub use density::{difference_rank, renyi_entropy, spectral_tail, trace_distance, von_neumann_entropy, DensityMatrix};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Region, Window};

pub const NORM_TOLERANCE: f64 = 1e-12;
/// Amplitudes with smaller modulus carry no phase.
pub const ZERO_AMPLITUDE: f64 = 1e-14;
/// Conditioning events lighter than this are treated as null.
pub const NULL_EVENT: f64 = 1e-300;

pub fn pow(nu: usize, n: usize) -> usize {
    nu.checked_pow(n as u32).expect("configuration space fits in usize")
}

/// Map every configuration code of `parent` to the code of its restriction
/// to `sub`. `sub` must be a subset of `parent`.
pub fn restriction_codes(nu: usize, parent: &Region, sub: &Region) -> Vec<u32> {
    let positions: Vec<usize> = sub.sites().iter().map(|&s| parent.position(s).expect("sub ⊆ parent")).collect();
    let n = pow(nu, parent.len());
    let mut out = Vec::with_capacity(n);
    if nu == 2 {
        for x in 0..n {
            let mut code = 0u32;
            for (k, &p) in positions.iter().enumerate() {
                code |= (((x >> p) & 1) as u32) << k;
            }
            out.push(code);
        }
    } else {
        let powers: Vec<usize> = (0..parent.len()).map(|k| pow(nu, k)).collect();
        for x in 0..n {
            let mut code = 0usize;
            let mut scale = 1usize;
            for &p in &positions {
                code += ((x / powers[p]) % nu) * scale;
                scale *= nu;
            }
            out.push(code as u32);
        }
    }
    out
}

/// Digit of the site at position `pos` in a configuration code.
pub fn digit(nu: usize, code: usize, pos: usize) -> usize {
    (code / pow(nu, pos)) % nu
}

/// Window index of the configuration that carries `code` on `region` and
/// digit 0 everywhere else.
pub fn embed_code(nu: usize, region: &Region, code: usize) -> usize {
    let mut rest = code;
    let mut x = 0;
    for &s in region.sites() {
        x += (rest % nu) * pow(nu, s);
        rest /= nu;
    }
    x
}

/// Code on `region` of the window configuration `x`.
pub fn extract_code(nu: usize, region: &Region, x: usize) -> usize {
    let mut code = 0;
    let mut scale = 1;
    for &s in region.sites() {
        code += ((x / pow(nu, s)) % nu) * scale;
        scale *= nu;
    }
    code
}

/// Classical spin value of a binary digit: 0 ↦ +1, 1 ↦ −1.
pub fn spin_value(d: usize) -> f64 {
    if d == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_state_size(sites: usize) -> Result<()> {
    if sites > crate::lattice::MAX_STATE_SITES {
        return Err(Error::Capacity { what: "state sites", got: sites, limit: crate::lattice::MAX_STATE_SITES });
    }
    Ok(())
}

fn check_local_dim(nu: usize) -> Result<()> {
    if (2..=4).contains(&nu) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("local dimension must be 2..=4, got {nu}")))
    }
}

/// An assignment of basis labels to the sites of a region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinConfiguration {
    pub region: Region,
    pub code: usize,
}

impl SpinConfiguration {
    pub fn new(region: Region, code: usize, nu: usize) -> Result<Self> {
        if code >= pow(nu, region.len()) {
            return Err(Error::InvalidArgument(format!(
                "configuration code {code} out of range for {} sites",
                region.len()
            )));
        }
        Ok(Self { region, code })
    }

    pub fn empty(window: &Window) -> Self {
        Self { region: window.empty(), code: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    window: Window,
    local_dim: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wrap a normalized amplitude table.
    pub fn new(window: &Window, local_dim: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_local_dim(local_dim)?;
        check_state_size(window.site_count())?;
        let expected = pow(local_dim, window.site_count());
        if amplitudes.len() != expected {
            return Err(Error::InvalidArgument(format!("expected {expected} amplitudes, got {}", amplitudes.len())));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("state norm is {norm}, not 1")));
        }
        Ok(Self { window: window.clone(), local_dim, amplitudes })
    }

    /// Normalize an arbitrary nonzero amplitude table.
    pub fn normalized(window: &Window, local_dim: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= n);
        Self::new(window, local_dim, amplitudes)
    }

    pub fn from_real(window: &Window, local_dim: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(window, local_dim, amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// The same ray with its largest-modulus amplitude made real positive.
    /// Ties are broken by the lowest configuration code.
    pub fn with_fixed_phase(&self) -> PureState {
        let max = self.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = self.amplitudes.iter().position(|z| z.norm() >= max - 1e-12).expect("nonempty state");
        let phase = Complex64::from_polar(1.0, -self.amplitudes[pivot].arg());
        let amplitudes = self.amplitudes.iter().map(|z| z * phase).collect();
        PureState { window: self.window.clone(), local_dim: self.local_dim, amplitudes }
    }

    /// `p(σ) = |ψ(σ)|²` over the whole window.
    pub fn probabilities(&self) -> ProbabilityTable {
        ProbabilityTable {
            region: self.window.full(),
            local_dim: self.local_dim,
            probs: self.amplitudes.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    /// `⟨ψ| O_R ⊗ 1 |ψ⟩` for an operator given as a dense matrix on region `r`.
    pub fn expectation(&self, r: &Region, op: &DMatrix<Complex64>) -> Result<Complex64> {
        let applied = self.apply_local(r, op)?;
        Ok(self.amplitudes.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum())
    }

    /// `(O_R ⊗ 1) ψ` as a raw amplitude vector.
    pub fn apply_local(&self, r: &Region, op: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
        let d = pow(self.local_dim, r.len());
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::RegionMismatch(format!(
                "operator is {}x{}, region space has dimension {d}",
                op.nrows(),
                op.ncols()
            )));
        }
        let full = self.window.full();
        let codes = restriction_codes(self.local_dim, &full, r);
        let strides: Vec<usize> = r.sites().iter().map(|&s| pow(self.local_dim, s)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (x, &cx) in codes.iter().enumerate() {
            let amp = self.amplitudes[x];
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let cx = cx as usize;
            // base index with the region digits cleared
            let base = x - region_offset(self.local_dim, cx, &strides);
            for row in 0..d {
                let m = op[(row, cx)];
                if m != Complex64::new(0.0, 0.0) {
                    out[base + region_offset(self.local_dim, row, &strides)] += m * amp;
                }
            }
        }
        Ok(out)
    }
}

/// Window index contribution of a region code given the sites' place values.
fn region_offset(nu: usize, code: usize, strides: &[usize]) -> usize {
    let mut rest = code;
    let mut off = 0;
    for &s in strides {
        off += (rest % nu) * s;
        rest /= nu;
    }
    off
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `p(σ)` over the configurations of a region.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    region: Region,
    local_dim: usize,
    probs: Vec<f64>,
}

impl ProbabilityTable {
    pub fn new(region: Region, local_dim: usize, probs: Vec<f64>) -> Result<Self> {
        check_local_dim(local_dim)?;
        check_state_size(region.len())?;
        let expected = pow(local_dim, region.len());
        if probs.len() != expected {
            return Err(Error::InvalidArgument(format!("expected {expected} probabilities, got {}", probs.len())));
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidArgument("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self { region, local_dim, probs })
    }

    /// Normalize nonnegative weights.
    pub fn from_weights(region: Region, local_dim: usize, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::InvalidArgument("weights must have a positive finite total".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(region, local_dim, weights)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn window(&self) -> &Window {
        self.region.window()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, code: usize) -> f64 {
        self.probs[code]
    }

    fn require_subset(&self, s: &Region, what: &str) -> Result<()> {
        if s.window() != self.region.window() {
            return Err(Error::RegionMismatch(format!("{what} lives on another window")));
        }
        if !s.is_subset(&self.region) {
            return Err(Error::RegionMismatch(format!("{what} is not contained in the table's region")));
        }
        Ok(())
    }

    /// Sum out everything but `s`.
    pub fn marginal(&self, s: &Region) -> Result<ProbabilityTable> {
        self.require_subset(s, "marginal region")?;
        let codes = restriction_codes(self.local_dim, &self.region, s);
        let mut probs = vec![0.0; pow(self.local_dim, s.len())];
        for (x, &c) in codes.iter().enumerate() {
            probs[c as usize] += self.probs[x];
        }
        Ok(ProbabilityTable { region: s.clone(), local_dim: self.local_dim, probs })
    }

    /// `p(σ_T | σ_G)` for disjoint target `T` and conditioning region `G`.
    pub fn conditional(&self, target: &Region, given: &SpinConfiguration) -> Result<ProbabilityTable> {
        self.require_subset(target, "target")?;
        self.require_subset(&given.region, "conditioning region")?;
        if !target.is_disjoint(&given.region) {
            return Err(Error::Overlap("target and conditioning region".into()));
        }
        let joint_region = target.union(&given.region);
        let joint = self.marginal(&joint_region)?;
        let t_codes = restriction_codes(self.local_dim, &joint_region, target);
        let g_codes = restriction_codes(self.local_dim, &joint_region, &given.region);
        let mut probs = vec![0.0; pow(self.local_dim, target.len())];
        let mut weight = 0.0;
        for x in 0..joint.probs.len() {
            if g_codes[x] as usize == given.code {
                probs[t_codes[x] as usize] += joint.probs[x];
                weight += joint.probs[x];
            }
        }
        if weight < NULL_EVENT {
            return Err(Error::NullEvent);
        }
        probs.iter_mut().for_each(|p| *p /= weight);
        Ok(ProbabilityTable { region: target.clone(), local_dim: self.local_dim, probs })
    }

    pub fn entropy(&self) -> f64 {
        self.probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
    }
}

/// `θ(σ) = Arg ψ(σ)` on the configurations where the amplitude is nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTable {
    region: Region,
    phases: Vec<f64>,
    defined: Vec<bool>,
}

impl PhaseTable {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn get(&self, code: usize) -> Option<f64> {
        self.defined[code].then(|| self.phases[code])
    }

    /// All phases, with masked entries read as zero.
    pub fn values(&self) -> &[f64] {
        &self.phases
    }

    pub fn is_defined(&self, code: usize) -> bool {
        self.defined[code]
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// True iff every defined phase is zero within `tol`.
    pub fn is_trivial(&self, tol: f64) -> bool {
        self.phases.iter().zip(&self.defined).all(|(&t, &d)| !d || t.abs() <= tol)
    }
}

/// Split a state into `(p, θ)` after fixing the global phase.
pub fn amplitude_decompose(psi: &PureState) -> (ProbabilityTable, PhaseTable) {
    let fixed = psi.with_fixed_phase();
    let probs = fixed.probabilities();
    let mut phases = Vec::with_capacity(fixed.len());
    let mut defined = Vec::with_capacity(fixed.len());
    for z in fixed.amplitudes() {
        if z.norm() > ZERO_AMPLITUDE {
            let mut t = z.arg();
            if t <= -std::f64::consts::PI {
                t += 2.0 * std::f64::consts::PI;
            }
            phases.push(t);
            defined.push(true);
        } else {
            phases.push(0.0);
            defined.push(false);
        }
    }
    (probs, PhaseTable { region: psi.window().full(), phases, defined })
}

/// `Σ e^{iθ} √p |σ⟩`, with masked phases read as zero.
pub fn reconstruct(p: &ProbabilityTable, theta: &PhaseTable) -> Result<PureState> {
    if p.region() != theta.region() || p.region().len() != p.window().site_count() {
        return Err(Error::RegionMismatch("reconstruction needs both tables on the full window".into()));
    }
    let amplitudes = p
        .probs()
        .iter()
        .enumerate()
        .map(|(x, &q)| Complex64::from_polar(q.sqrt(), theta.get(x).unwrap_or(0.0)))
        .collect();
    PureState::new(p.window(), p.local_dim(), amplitudes)
}

/// `ϱ_A(ψ) = tr_{W∖A} |ψ⟩⟨ψ|`.
pub fn reduce(psi: &PureState, a: &Region) -> Result<DensityMatrix> {
    if a.window() != psi.window() {
        return Err(Error::RegionMismatch("region lives on another window".into()));
    }
    let nu = psi.local_dim();
    let full = psi.window().full();
    let rest = a.complement();
    let a_codes = restriction_codes(nu, &full, a);
    let r_codes = restriction_codes(nu, &full, &rest);
    let da = pow(nu, a.len());
    let dr = pow(nu, rest.len());
    let mut m = DMatrix::<Complex64>::zeros(da, dr);
    for (x, z) in psi.amplitudes().iter().enumerate() {
        m[(a_codes[x] as usize, r_codes[x] as usize)] = *z;
    }
    let rho = &m * m.adjoint();
    DensityMatrix::with_region(a.clone(), nu, rho)
}

/// One outcome of a non-destructive measurement of the buffer.
#[derive(Clone, Debug)]
pub struct PinchedMember {
    pub config: SpinConfiguration,
    pub weight: f64,
    pub state: PureState,
}

/// `|ψ⟩⟨ψ| → Σ_σB p(σ_B) |ψ(σ_B)⟩⟨ψ(σ_B)|`, null outcomes omitted.
#[derive(Clone, Debug)]
pub struct PinchedEnsemble {
    pub buffer: Region,
    pub members: Vec<PinchedMember>,
}

impl PinchedEnsemble {
    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|m| m.weight).sum()
    }

    /// `Σ p(σ_B) ϱ_A(ψ(σ_B))`.
    pub fn reduced_mixture(&self, a: &Region) -> Result<DensityMatrix> {
        let mut acc: Option<DMatrix<Complex64>> = None;
        for m in &self.members {
            let r = reduce(&m.state, a)?;
            let term = r.matrix() * Complex64::new(m.weight, 0.0);
            acc = Some(match acc {
                Some(s) => s + term,
                None => term,
            });
        }
        let nu = self.members.first().map(|m| m.state.local_dim()).unwrap_or(2);
        DensityMatrix::with_region(a.clone(), nu, acc.ok_or(Error::EmptyRegion)?)
    }
}

pub fn pinch(psi: &PureState, b: &Region) -> Result<PinchedEnsemble> {
    if b.window() != psi.window() {
        return Err(Error::RegionMismatch("buffer lives on another window".into()));
    }
    let nu = psi.local_dim();
    let codes = restriction_codes(nu, &psi.window().full(), b);
    let sectors = pow(nu, b.len());
    let mut weights = vec![0.0; sectors];
    for (x, z) in psi.amplitudes().iter().enumerate() {
        weights[codes[x] as usize] += z.norm_sqr();
    }
    let mut members = Vec::new();
    for (code, &w) in weights.iter().enumerate() {
        if w < NULL_EVENT {
            continue;
        }
        let scale = 1.0 / w.sqrt();
        let amplitudes = psi
            .amplitudes()
            .iter()
            .zip(&codes)
            .map(|(z, &c)| if c as usize == code { z * scale } else { Complex64::new(0.0, 0.0) })
            .collect();
        members.push(PinchedMember {
            config: SpinConfiguration { region: b.clone(), code },
            weight: w,
            state: PureState::normalized(psi.window(), nu, amplitudes)?,
        });
    }
    Ok(PinchedEnsemble { buffer: b.clone(), members })
}
