//! Test states and measures: GHZ/Bell/product states, seeded random states
//! and measures, and square-root states of classical Gibbs measures with an
//! optional additive phase.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Window;
use crate::states::{pow, spin_value, DensityMatrix, ProbabilityTable, PureState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(|++…+⟩ + |−−…−⟩)/√2`; on two sites this is the Bell pair.
pub fn ghz(window: &Window) -> PureState {
    let n = pow(2, window.site_count());
    let mut amps = vec![0.0; n];
    amps[0] = 1.0;
    amps[n - 1] = 1.0;
    PureState::from_real(window, 2, &amps).expect("nonzero")
}

/// Tensor product of per-site (unnormalized) real qubit vectors.
pub fn product_state(window: &Window, sites: &[[f64; 2]]) -> PureState {
    assert_eq!(sites.len(), window.site_count());
    let n = pow(2, sites.len());
    let amps: Vec<f64> = (0..n).map(|x| (0..sites.len()).map(|s| sites[s][(x >> s) & 1]).product()).collect();
    PureState::from_real(window, 2, &amps).expect("nonzero")
}

/// Haar-like random state from complex Gaussian amplitudes.
pub fn random_state(window: &Window, nu: usize, seed: u64) -> PureState {
    let mut r = rng(seed);
    let n = pow(nu, window.site_count());
    let amps = (0..n).map(|_| Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))).collect();
    PureState::normalized(window, nu, amps).expect("nonzero")
}

/// Random measure on the window's configurations. Some entries are zeroed
/// so that null conditioning events get exercised.
pub fn random_measure(window: &Window, seed: u64) -> ProbabilityTable {
    let mut r = rng(seed);
    let n = pow(2, window.site_count());
    let sparsity: f64 = r.random_range(0.0..0.3);
    let mut w: Vec<f64> =
        (0..n).map(|_| if r.random::<f64>() < sparsity { 0.0 } else { r.random::<f64>().powi(3) }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    ProbabilityTable::from_weights(window.full(), 2, w).expect("positive weights")
}

/// Random density matrix of dimension `dim` with random rank.
pub fn random_density_matrix(dim: usize, seed: u64) -> DensityMatrix {
    let mut r = rng(seed);
    let rank = r.random_range(1..=dim);
    let g = DMatrix::<Complex64>::from_fn(dim, rank, |_, _| {
        Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let t = m.trace();
    DensityMatrix::from_matrix(m / t).expect("valid by construction")
}

/// Random positive semidefinite matrix with trace `trace`.
pub fn random_psd(dim: usize, trace: f64, seed: u64) -> DMatrix<Complex64> {
    let mut r = rng(seed);
    let rank = r.random_range(1..=dim);
    let g = DMatrix::<Complex64>::from_fn(dim, rank, |_, _| {
        Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let t = m.trace().re;
    m * Complex64::new(trace / t, 0.0)
}

/// A pair term `J σ_u σ_v` of a classical energy or phase function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub u: usize,
    pub v: usize,
    pub j: f64,
}

/// Weights `exp(Σ J_uv σ_u σ_v + Σ h_u σ_u)` with σ = ±1, plus an optional
/// additive phase `θ = Σ Ĵ_uv σ_u σ_v + Σ ĥ_u σ_u`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GibbsSpec {
    pub pairs: Vec<PairTerm>,
    #[serde(default)]
    pub fields: Vec<f64>,
    #[serde(default)]
    pub phase_pairs: Vec<PairTerm>,
    #[serde(default)]
    pub phase_fields: Vec<f64>,
}

impl GibbsSpec {
    /// Nearest-neighbour bonds of the window with a common coupling.
    pub fn nearest_neighbor(window: &Window, j: f64) -> Self {
        Self { pairs: nearest_neighbor_bonds(window, |_, _| j), ..Default::default() }
    }

    fn check(&self, window: &Window) -> Result<()> {
        let n = window.site_count();
        let bad = self.pairs.iter().chain(&self.phase_pairs).any(|t| t.u >= n || t.v >= n || t.u == t.v);
        if bad || self.fields.len() > n || self.phase_fields.len() > n {
            return Err(Error::InvalidArgument("Gibbs terms reference sites outside the window".into()));
        }
        Ok(())
    }

    fn energy(terms: &[PairTerm], fields: &[f64], x: usize) -> f64 {
        let s = |site: usize| spin_value((x >> site) & 1);
        terms.iter().map(|t| t.j * s(t.u) * s(t.v)).sum::<f64>()
            + fields.iter().enumerate().map(|(u, &h)| h * s(u)).sum::<f64>()
    }

    pub fn probabilities(&self, window: &Window) -> Result<ProbabilityTable> {
        self.check(window)?;
        let n = pow(2, window.site_count());
        let logw: Vec<f64> = (0..n).map(|x| Self::energy(&self.pairs, &self.fields, x)).collect();
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ProbabilityTable::from_weights(window.full(), 2, logw.into_iter().map(|e| (e - max).exp()).collect())
    }

    pub fn phase(&self, x: usize) -> f64 {
        Self::energy(&self.phase_pairs, &self.phase_fields, x)
    }

    /// `Σ e^{iθ(σ)} √p(σ) |σ⟩`.
    pub fn state(&self, window: &Window) -> Result<PureState> {
        let p = self.probabilities(window)?;
        let amps = p.probs().iter().enumerate().map(|(x, &q)| Complex64::from_polar(q.sqrt(), self.phase(x))).collect();
        PureState::normalized(window, 2, amps)
    }

    /// Largest graph distance spanned by a phase pair term.
    pub fn phase_range(&self, window: &Window) -> usize {
        self.phase_pairs.iter().map(|t| window.distance(t.u, t.v)).max().unwrap_or(0)
    }
}

pub fn nearest_neighbor_bonds(window: &Window, mut coupling: impl FnMut(usize, usize) -> f64) -> Vec<PairTerm> {
    let mut out = Vec::new();
    for u in 0..window.site_count() {
        for v in window.neighbors(u) {
            if v > u {
                out.push(PairTerm { u, v, j: coupling(u, v) });
            }
        }
    }
    out
}
