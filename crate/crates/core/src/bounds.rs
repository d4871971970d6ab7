//! Entropy-side estimates: the rank-aware Fannes bound, subadditivity of
//! `tr F`, the spectral tail bound, the multiscale area-law right-hand side,
//! entropy differences against `ψ_(B_l)`, decay-model fitting and the sweep
//! over buffer widths that certifies conditional decoupling.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approximation::{entanglement_entropy, markov_state, RankReport};
use crate::audit::AuditReport;
use crate::decorrelation::{phase_deficit, tv_conditional, PhaseOptions};
use crate::error::{Error, Result};
use crate::lattice::{buffer, regularity_check, Region, Tripartition};
use crate::states::{
    difference_rank, pow, reduce, spectral_tail, trace_distance, von_neumann_entropy, DensityMatrix, PureState,
};

/// Below this trace distance two states count as equal.
pub const EQUAL_STATES: f64 = 1e-14;
/// Eigenvalues above `−PSD_TOLERANCE` are clipped to zero.
pub const PSD_TOLERANCE: f64 = 1e-12;
/// Largest relative residual of a decay fit that still earns a certificate.
pub const CERTIFICATE_RESIDUAL: f64 = 0.25;
/// Sweep values at or below this level are rounding noise and stay out of fits.
pub const FIT_FLOOR: f64 = 1e-12;

/// `|S(ϱ₁) − S(ϱ₂)| ≤ ½‖ϱ₁−ϱ₂‖₁ (1 + ln(2 rank(ϱ₁−ϱ₂) / ‖ϱ₁−ϱ₂‖₁))`.
pub fn fannes_bound(r1: &DensityMatrix, r2: &DensityMatrix, slack: f64) -> Result<AuditReport> {
    let d = trace_distance(r1, r2)?;
    let lhs = (von_neumann_entropy(r1) - von_neumann_entropy(r2)).abs();
    if d < EQUAL_STATES {
        return Ok(AuditReport::leq("fannes", lhs, 0.0, slack).with_case("equal states"));
    }
    let rank = difference_rank(r1, r2)?.max(1);
    let rhs = 0.5 * d * (1.0 + (2.0 * rank as f64 / d).ln());
    Ok(AuditReport::leq("fannes", lhs, rhs, slack))
}

/// `F(x) = x (1 + ln x⁻¹)` on `[0, 1]`, `1` above.
pub fn f_scalar(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * (1.0 - x.ln())
    }
}

fn psd_spectrum(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let skew = (m - m.adjoint()).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if skew > PSD_TOLERANCE {
        return Err(Error::InvalidArgument(format!("matrix is not Hermitian (deviation {skew:e})")));
    }
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut values: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    for v in values.iter_mut() {
        if *v < -PSD_TOLERANCE {
            return Err(Error::InvalidArgument(format!("matrix is not positive (eigenvalue {v:e})")));
        }
        *v = v.max(0.0);
    }
    Ok(values)
}

/// `tr F(M)` for a positive semidefinite `M`.
pub fn trace_f(m: &DMatrix<Complex64>) -> Result<f64> {
    Ok(psd_spectrum(m)?.into_iter().map(f_scalar).sum())
}

/// `tr F(A+B) ≤ tr F(A) + tr F(B)` and `tr F(A+B) ≤ tr F(A) + N F(tr B / N)`.
pub fn f_trace_check(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, slack: f64) -> Result<[AuditReport; 2]> {
    if a.shape() != b.shape() {
        return Err(Error::InvalidArgument("matrices must have the same shape".into()));
    }
    let n = a.nrows() as f64;
    let (fa, fb, fab) = (trace_f(a)?, trace_f(b)?, trace_f(&(a + b))?);
    let tr_b: f64 = psd_spectrum(b)?.iter().sum();
    Ok([
        AuditReport::leq("f_trace", fab, fa + fb, slack),
        AuditReport::leq("f_trace_jensen", fab, fa + n * f_scalar(tr_b / n), slack),
    ])
}

/// `τ_{ϱ_A}(ν^{|B|}) ≤ 2δ_B(A|C) + 2ϑ̂_B(A|C)`, `C = W ∖ (A ⊔ B)`.
pub fn tail_mass_audit(
    psi: &PureState,
    a: &Region,
    b: &Region,
    opts: &PhaseOptions,
    slack: f64,
) -> Result<AuditReport> {
    let tri = Tripartition::from_core_and_buffer(a.clone(), b.clone())?;
    let delta = tv_conditional(&psi.probabilities(), &tri.a, &tri.b, &tri.c)?.value;
    let vartheta = phase_deficit(psi, &tri, opts)?.objective;
    let tau = spectral_tail(&reduce(psi, a)?, pow(psi.local_dim(), b.len()));
    Ok(AuditReport::leq("tail_mass", tau, 2.0 * delta + 2.0 * vartheta, slack))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayKind {
    Exponential,
    Power,
}

/// `φ(k) = e^{−k/ξ}` or `φ(k) = (1 + k/ξ)^{−α}`, shifted by the decoupling distance `l₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    pub kind: DecayKind,
    pub xi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub l0: usize,
}

impl DecayModel {
    pub fn exponential(xi: f64, l0: usize) -> Result<Self> {
        let m = Self { kind: DecayKind::Exponential, xi, alpha: None, l0 };
        m.validate()?;
        Ok(m)
    }

    pub fn power(xi: f64, alpha: f64, l0: usize) -> Result<Self> {
        let m = Self { kind: DecayKind::Power, xi, alpha: Some(alpha), l0 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.xi <= 0.0 || !self.xi.is_finite() {
            return Err(Error::InvalidArgument(format!("decay scale must be positive, got {}", self.xi)));
        }
        if self.kind == DecayKind::Power {
            match self.alpha {
                Some(a) if a > 2.0 && a.is_finite() => {}
                other => return Err(Error::InvalidArgument(format!("power decay needs α > 2, got {other:?}"))),
            }
        }
        Ok(())
    }

    /// `φ(k)`.
    pub fn phi(&self, k: usize) -> f64 {
        let k = k as f64;
        match self.kind {
            DecayKind::Exponential => (-k / self.xi).exp(),
            DecayKind::Power => (1.0 + k / self.xi).powf(-self.alpha.unwrap_or(3.0)),
        }
    }

    /// `φ(l − l₀)`, or 1 for `l < l₀`.
    pub fn phi_shifted(&self, l: usize) -> f64 {
        if l < self.l0 {
            1.0
        } else {
            self.phi(l - self.l0)
        }
    }

    /// `I₁(l) = Σ_{k=l}^{K} φ(k)(1+k)` and `I₂(l) = Σ_{k=l}^{K} φ(k)(1 + ln φ(k)⁻¹)`.
    pub fn integrals(&self, l: usize, upper: usize) -> (f64, f64) {
        let (mut i1, mut i2) = (0.0, 0.0);
        for k in (l..=upper).rev() {
            let p = self.phi(k);
            if p > 0.0 {
                i1 += p * (1.0 + k as f64);
                i2 += p * (1.0 - p.ln());
            }
        }
        (i1, i2)
    }
}

/// `l₀ = max(1, ⌈c ln |∂A|⌉)`.
pub fn logarithmic_l0(c: f64, boundary_size: usize) -> usize {
    ((c * (boundary_size as f64).ln()).ceil().max(1.0)) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AreaLawReport {
    pub boundary_size: usize,
    pub length_scale: f64,
    /// Measured upper buffer-volume constant `C_d`.
    pub c_upper: f64,
    pub i1: f64,
    pub i2: f64,
    /// `C_d |∂A| (ln ν) [l₀ + 2(1+l₀) I₁(0)] + 2 I₂(0)`.
    pub rhs: f64,
    /// `|∂A| ln L(A)`, the scale entering the single-buffer estimate.
    pub single_scale: f64,
}

/// Right-hand side of the multiscale area-law bound for a regular region.
pub fn area_law_rhs(model: &DecayModel, a: &Region, nu: usize) -> Result<AreaLawReport> {
    model.validate()?;
    let reg = regularity_check(a)?;
    if !reg.is_regular {
        return Err(Error::InvalidArgument(format!("region {:?} is not regular", a.sites())));
    }
    let upper = reg.length_scale.floor() as usize;
    let (i1, i2) = model.integrals(0, upper);
    let l0 = model.l0 as f64;
    let boundary = reg.boundary_size as f64;
    let rhs = reg.c_upper * boundary * (nu as f64).ln() * (l0 + 2.0 * (1.0 + l0) * i1) + 2.0 * i2;
    Ok(AreaLawReport {
        boundary_size: reg.boundary_size,
        length_scale: reg.length_scale,
        c_upper: reg.c_upper,
        i1,
        i2,
        rhs,
        single_scale: boundary * reg.length_scale.max(1.0).ln(),
    })
}

/// `√(2φ(l−l₀)) (1 + ln(ν^{|B_l|}/√(2φ))) + 2 C_d |∂A| (ln ν)(l+1) I₁(l−l₀) + 2 I₂(l−l₀)`.
pub fn entropy_diff_rhs(model: &DecayModel, a: &Region, l: usize, nu: usize) -> Result<f64> {
    model.validate()?;
    if l < model.l0 {
        return Err(Error::InvalidArgument(format!("width {l} is below the decoupling distance {}", model.l0)));
    }
    let reg = regularity_check(a)?;
    let tri = buffer(a, l)?;
    let s = (2.0 * model.phi(l - model.l0)).sqrt();
    let log_dim = tri.b.len() as f64 * (nu as f64).ln();
    let first = if s > 0.0 { s * (1.0 + log_dim - s.ln()) } else { 0.0 };
    let (i1, i2) = model.integrals(l - model.l0, reg.length_scale.floor() as usize);
    let lnu = (nu as f64).ln();
    Ok(first + 2.0 * reg.c_upper * reg.boundary_size as f64 * lnu * (l as f64 + 1.0) * i1 + 2.0 * i2)
}

/// `|S(ϱ_A(ψ)) − S(ϱ_A(ψ_(B_l)))| ≤` [`entropy_diff_rhs`].
pub fn entropy_diff_audit(
    psi: &PureState,
    a: &Region,
    l: usize,
    model: &DecayModel,
    opts: &PhaseOptions,
    slack: f64,
) -> Result<AuditReport> {
    let rhs = entropy_diff_rhs(model, a, l, psi.local_dim())?;
    let tri = buffer(a, l)?;
    let split = phase_deficit(psi, &tri, opts)?;
    let approx = markov_state(psi, &tri, &split)?;
    let lhs = (entanglement_entropy(psi, a)? - von_neumann_entropy(&approx.reduced_a()?)).abs();
    Ok(AuditReport::leq("entropy_diff", lhs, rhs, slack).with_case(format!("l={l}")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Fitted `ln v(l)` at `l = 0`.
    pub intercept: f64,
    pub max_relative_residual: f64,
    pub certificate: bool,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

fn max_relative_residual(values: &[f64], fitted: impl Iterator<Item = f64>) -> f64 {
    values.iter().zip(fitted).map(|(v, f)| ((f - v) / v).abs()).fold(0.0, f64::max)
}

/// Least-squares fit of `ln v(l)` against `l` (exponential) or against
/// `ln(1 + l/ξ)` with a scan over `ξ` (power). The certificate requires a
/// decaying fit whose relative residual stays below [`CERTIFICATE_RESIDUAL`].
/// The decoupling distance is the smallest `l₀` for which
/// `φ(l − l₀) ≥ v(l)` holds on every point.
pub fn decay_fit(series: &[(usize, f64)], kind: DecayKind) -> Result<DecayFit> {
    if series.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 points, got {}", series.len())));
    }
    if let Some(&(l, v)) = series.iter().find(|(_, v)| *v <= 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("value at l={l} must be positive, got {v}")));
    }
    let values: Vec<f64> = series.iter().map(|s| s.1).collect();
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let ls: Vec<f64> = series.iter().map(|s| s.0 as f64).collect();
    let (intercept, xi, alpha, residual) = match kind {
        DecayKind::Exponential => {
            let (c, slope) = linear_fit(&ls, &logs);
            let xi = if slope < 0.0 { -1.0 / slope } else { f64::INFINITY };
            let res = max_relative_residual(&values, ls.iter().map(|l| (c + slope * l).exp()));
            (c, xi, None, res)
        }
        DecayKind::Power => {
            let eval = |xi: f64| {
                let xs: Vec<f64> = ls.iter().map(|l| (1.0 + l / xi).ln()).collect();
                let (c, slope) = linear_fit(&xs, &logs);
                let sse: f64 = xs.iter().zip(&logs).map(|(x, y)| (c + slope * x - y).powi(2)).sum();
                (sse, c, -slope, xs)
            };
            let grid: Vec<f64> = (0..=120).map(|k| 10f64.powf(-3.0 + k as f64 * 0.05)).collect();
            let mut best = grid[0];
            for &g in &grid {
                if eval(g).0 < eval(best).0 {
                    best = g;
                }
            }
            let (mut lo, mut hi) = (best / 10f64.powf(0.05), best * 10f64.powf(0.05));
            for _ in 0..100 {
                let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
                if eval(m1).0 < eval(m2).0 {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let xi = 0.5 * (lo + hi);
            let (_, c, alpha, xs) = eval(xi);
            let res = max_relative_residual(&values, xs.iter().map(|x| (c - alpha * x).exp()));
            (c, xi, Some(alpha), res)
        }
    };
    let decaying = xi.is_finite() && xi > 0.0 && alpha.is_none_or(|a| a > 0.0);
    let mut model = DecayModel { kind, xi, alpha, l0: 0 };
    if decaying {
        let max_l = series.iter().map(|s| s.0).max().unwrap_or(0);
        model.l0 = (0..=max_l + 1)
            .find(|&l0| {
                let m = DecayModel { l0, ..model.clone() };
                series.iter().all(|&(l, v)| m.phi_shifted(l) >= v)
            })
            .unwrap_or(max_l + 1);
    }
    Ok(DecayFit {
        certificate: decaying && residual < CERTIFICATE_RESIDUAL,
        model,
        intercept,
        max_relative_residual: residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecouplingRow {
    pub l: usize,
    pub buffer_size: usize,
    pub delta: f64,
    pub vartheta: f64,
    pub one_minus_overlap: f64,
    pub tau: f64,
    /// `|S(ϱ_A(ψ)) − S(ϱ_A(ψ_(B_l)))|`.
    pub entropy_diff: f64,
    pub rank: RankReport,
    pub fidelity_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecouplingTable {
    pub rows: Vec<DecouplingRow>,
    /// Exponential fit of `δ + ϑ̂` when at least three widths exceed [`FIT_FLOOR`].
    pub fit: Option<DecayFit>,
}

pub const CSV_HEADER: &str = "l,delta,vartheta,one_minus_overlap,tau,entropy_diff";

impl DecouplingTable {
    pub fn column(&self, pick: impl Fn(&DecouplingRow) -> f64) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.l, pick(r))).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e}\n",
                r.l, r.delta, r.vartheta, r.one_minus_overlap, r.tau, r.entropy_diff
            ));
        }
        out
    }
}

/// One row per buffer width: `δ_{B_l}`, `ϑ̂_{B_l}`, `1 − |⟨ψ|ψ_(B_l)⟩|`,
/// `τ_{ϱ_A}(ν^{|B_l|})` and the entropy difference, all exact.
pub fn decoupling_verify(
    psi: &PureState,
    a: &Region,
    widths: &[usize],
    opts: &PhaseOptions,
) -> Result<DecouplingTable> {
    if widths.is_empty() || widths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("widths must be nonempty and strictly increasing".into()));
    }
    let last = buffer(a, *widths.last().expect("nonempty"))?;
    if last.c.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "buffer of width {} exhausts the complement of A",
            widths.last().expect("nonempty")
        )));
    }
    let p = psi.probabilities();
    let rho = reduce(psi, a)?;
    let entropy = von_neumann_entropy(&rho);
    let rows: Vec<DecouplingRow> = widths
        .par_iter()
        .map(|&l| -> Result<DecouplingRow> {
            let tri = buffer(a, l)?;
            let delta = tv_conditional(&p, &tri.a, &tri.b, &tri.c)?.value;
            let split = phase_deficit(psi, &tri, opts)?;
            let approx = markov_state(psi, &tri, &split)?;
            let overlap = psi.inner(&approx.assembled);
            let reduced = approx.reduced_a()?;
            let distance = trace_distance(&rho, &reduced)?;
            let middle = 2.0 * (Complex64::new(1.0, 0.0) - overlap).norm();
            let fidelity_pass = (0.5 * distance).powi(2) <= middle + crate::audit::SLACK
                && middle <= 2.0 * delta + 2.0 * split.objective + crate::audit::SLACK;
            Ok(DecouplingRow {
                l,
                buffer_size: tri.b.len(),
                delta,
                vartheta: split.objective,
                one_minus_overlap: 1.0 - overlap.norm(),
                tau: spectral_tail(&rho, pow(psi.local_dim(), tri.b.len())),
                entropy_diff: (entropy - von_neumann_entropy(&reduced)).abs(),
                rank: approx.rank_check()?,
                fidelity_pass,
            })
        })
        .collect::<Result<_>>()?;
    let series: Vec<(usize, f64)> =
        rows.iter().map(|r| (r.l, r.delta + r.vartheta)).filter(|(_, v)| *v > FIT_FLOOR).collect();
    let fit = if series.len() >= 3 { Some(decay_fit(&series, DecayKind::Exponential)?) } else { None };
    Ok(DecouplingTable { rows, fit })
}
