//! Low-rank approximations of a reduced state `ϱ_A(ψ)` obtained by
//! conditioning on a buffer `B`: the leading-eigenvector mixture `ϱ̂_A`, and
//! the Markovian vector `ψ_(B)` whose `A` and `C` parts are conditionally
//! independent given `σ_B` and whose phase splits as `α(σ_A,σ_B) + γ(σ_C,σ_B)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::audit::AuditReport;
use crate::decorrelation::{phase_deficit, tv_conditional, PhaseOptions, PhaseSplit};
use crate::error::{Error, Result};
use crate::lattice::{Region, Tripartition};
use crate::states::{
    pinch, pow, reduce, restriction_codes, trace_distance, von_neumann_entropy, DensityMatrix, PureState, NULL_EVENT,
};

/// Tolerance on the rank and Schmidt-entropy checks.
pub const RANK_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct MarkovApproximation {
    pub tri: Tripartition,
    /// Supported buffer configurations with their weights `p(σ_B)`.
    pub sectors: Vec<(usize, f64)>,
    /// `φ_A(σ_B)` for every supported sector, in the order of `sectors`.
    pub phi_a: Vec<Vec<Complex64>>,
    pub phi_c: Vec<Vec<Complex64>>,
    pub phase_split: PhaseSplit,
    pub assembled: PureState,
    /// `|‖ψ_(B)‖ − 1|` before renormalization.
    pub renormalization: f64,
}

/// `ψ_(B)(σ) = √(p(σ_B) p(σ_A|σ_B) p(σ_C|σ_B)) e^{i(α + γ)}` for the given phase tables,
/// carrying the global phase that [`amplitude_decompose`](crate::states::amplitude_decompose) removes from `ψ`.
pub fn markov_state(psi: &PureState, tri: &Tripartition, split: &PhaseSplit) -> Result<MarkovApproximation> {
    if &split.tri != tri || tri.window() != psi.window() || split.local_dim != psi.local_dim() {
        return Err(Error::RegionMismatch("phase split was computed for another tripartition".into()));
    }
    let nu = psi.local_dim();
    let full = psi.window().full();
    let (ca, cb, cc) = (
        restriction_codes(nu, &full, &tri.a),
        restriction_codes(nu, &full, &tri.b),
        restriction_codes(nu, &full, &tri.c),
    );
    let (na, nb, nc) = (pow(nu, tri.a.len()), pow(nu, tri.b.len()), pow(nu, tri.c.len()));
    let mut pab = vec![0.0; na * nb];
    let mut pcb = vec![0.0; nc * nb];
    let mut pb = vec![0.0; nb];
    for (x, z) in psi.amplitudes().iter().enumerate() {
        let w = z.norm_sqr();
        let (a, b, c) = (ca[x] as usize, cb[x] as usize, cc[x] as usize);
        pab[a + na * b] += w;
        pcb[c + nc * b] += w;
        pb[b] += w;
    }
    let mut sectors = Vec::new();
    let mut phi_a = Vec::new();
    let mut phi_c = Vec::new();
    let mut index = vec![usize::MAX; nb];
    for b in 0..nb {
        if pb[b] < NULL_EVENT {
            continue;
        }
        index[b] = sectors.len();
        sectors.push((b, pb[b]));
        phi_a.push(
            (0..na)
                .map(|a| Complex64::from_polar((pab[a + na * b] / pb[b]).sqrt(), split.alpha_at(a, b)))
                .collect::<Vec<_>>(),
        );
        phi_c.push(
            (0..nc)
                .map(|c| Complex64::from_polar((pcb[c + nc * b] / pb[b]).sqrt(), split.gamma_at(c, b)))
                .collect::<Vec<_>>(),
        );
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (x, amp) in amplitudes.iter_mut().enumerate() {
        let k = index[cb[x] as usize];
        if k != usize::MAX {
            *amp = phi_a[k][ca[x] as usize] * phi_c[k][cc[x] as usize] * sectors[k].1.sqrt();
        }
    }
    let fixed = psi.with_fixed_phase();
    let (pivot, _) =
        fixed
            .amplitudes()
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (x, z)| if z.norm() > best.1 { (x, z.norm()) } else { best });
    let global = psi.amplitudes()[pivot] / fixed.amplitudes()[pivot];
    for amp in amplitudes.iter_mut() {
        *amp *= global;
    }
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let assembled = PureState::normalized(psi.window(), nu, amplitudes)?;
    Ok(MarkovApproximation {
        tri: tri.clone(),
        sectors,
        phi_a,
        phi_c,
        phase_split: split.clone(),
        assembled,
        renormalization: (norm - 1.0).abs(),
    })
}

impl MarkovApproximation {
    /// `Σ p(σ_B) |φ_A(σ_B)⟩⟨φ_A(σ_B)|`.
    pub fn reduced_a(&self) -> Result<DensityMatrix> {
        let n = self.phi_a.first().map(|v| v.len()).unwrap_or(1);
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for ((_, w), v) in self.sectors.iter().zip(&self.phi_a) {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += v[i] * v[j].conj() * *w;
                }
            }
        }
        DensityMatrix::with_region(self.tri.a.clone(), self.assembled.local_dim(), m)
    }

    /// `rank ϱ_A(ψ_(B)) ≤ ν^{|B|}` and `S(ϱ_A(ψ_(B))) ≤ |B| ln ν`.
    pub fn rank_check(&self) -> Result<RankReport> {
        let rho = reduce(&self.assembled, &self.tri.a)?;
        let nu = self.assembled.local_dim();
        let rank_bound = pow(nu, self.tri.b.len());
        let entropy = von_neumann_entropy(&rho);
        let entropy_bound = self.tri.b.len() as f64 * (nu as f64).ln();
        let rank = rho.rank();
        Ok(RankReport {
            rank,
            rank_bound,
            entropy,
            entropy_bound,
            pass: rank <= rank_bound && entropy <= entropy_bound + RANK_SLACK,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub rank_bound: usize,
    pub entropy: f64,
    pub entropy_bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ReducedApproximation {
    pub a: Region,
    pub b: Region,
    pub sectors: Vec<(usize, f64)>,
    /// `λ(σ_B) = ‖ϱ_A(ψ(σ_B))‖` per sector.
    pub lambdas: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub assembled: DensityMatrix,
    /// `2 Σ p(σ_B) (1 − λ(σ_B))`.
    pub bound: f64,
    /// `‖ϱ_A − ϱ̂_A‖₁`.
    pub distance: f64,
    pub rank: usize,
}

impl ReducedApproximation {
    pub fn audit(&self, slack: f64) -> AuditReport {
        AuditReport::leq("reduced_state", self.distance, self.bound, slack)
    }
}

/// `ϱ̂_A = Σ p(σ_B) |φ̂_A(σ_B)⟩⟨φ̂_A(σ_B)|` with `φ̂_A(σ_B)` a leading
/// eigenvector of `ϱ_A(ψ(σ_B))`.
pub fn reduced_state_approximation(psi: &PureState, a: &Region, b: &Region) -> Result<ReducedApproximation> {
    if !a.is_disjoint(b) {
        return Err(Error::Overlap("A and B must be disjoint".into()));
    }
    if a.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let ensemble = pinch(psi, b)?;
    let n = pow(psi.local_dim(), a.len());
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let (mut sectors, mut lambdas, mut vectors) = (Vec::new(), Vec::new(), Vec::new());
    let mut bound = 0.0;
    for member in &ensemble.members {
        let (lambda, v) = reduce(&member.state, a)?.top_eigenvector();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += v[i] * v[j].conj() * member.weight;
            }
        }
        bound += 2.0 * member.weight * (1.0 - lambda);
        sectors.push((member.config.code, member.weight));
        lambdas.push(lambda);
        vectors.push(v);
    }
    let assembled = DensityMatrix::with_region(a.clone(), psi.local_dim(), m)?;
    let distance = trace_distance(&reduce(psi, a)?, &assembled)?;
    let rank = assembled.rank();
    Ok(ReducedApproximation { a: a.clone(), b: b.clone(), sectors, lambdas, vectors, assembled, bound, distance, rank })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityCheck {
    pub overlap_re: f64,
    pub overlap_im: f64,
    /// `‖ϱ_A(ψ) − ϱ_A(ψ_(B))‖₁`.
    pub trace_distance: f64,
    /// `2 √(2 (1 − Re⟨ψ|ψ_(B)⟩))`.
    pub bound: f64,
    pub pass: bool,
}

/// `⟨ψ|ψ_(B)⟩` and `‖ϱ_A(ψ) − ϱ_A(ψ_(B))‖₁ ≤ 2 √(2 (1 − Re⟨ψ|ψ_(B)⟩))`.
pub fn overlap_and_fidelity(psi: &PureState, approx: &MarkovApproximation, slack: f64) -> Result<FidelityCheck> {
    if psi.window() != approx.assembled.window() {
        return Err(Error::RegionMismatch("approximation lives on another window".into()));
    }
    let overlap = psi.inner(&approx.assembled);
    let distance = trace_distance(&reduce(psi, &approx.tri.a)?, &approx.reduced_a()?)?;
    let bound = 2.0 * (2.0 * (1.0 - overlap.re).max(0.0)).sqrt();
    Ok(FidelityCheck {
        overlap_re: overlap.re,
        overlap_im: overlap.im,
        trace_distance: distance,
        bound,
        pass: distance <= bound + slack,
    })
}

#[derive(Clone, Debug)]
pub struct FidelityAudit {
    pub approximation: MarkovApproximation,
    pub delta: f64,
    /// Achieved phase objective of the tables used to build `ψ_(B)`.
    pub vartheta: f64,
    pub overlap: Complex64,
    pub trace_distance: f64,
    /// `[½‖·‖₁]² ≤ 2|1 − ⟨ψ|ψ_(B)⟩|` and `2|1 − ⟨ψ|ψ_(B)⟩| ≤ 2δ_B(A|C) + 2ϑ̂`.
    pub reports: Vec<AuditReport>,
}

impl FidelityAudit {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Both inequalities of the fidelity bound, with `ψ_(B)` built from the
/// phase tables returned by [`phase_deficit`].
pub fn fidelity_bound_audit(
    psi: &PureState,
    tri: &Tripartition,
    opts: &PhaseOptions,
    slack: f64,
) -> Result<FidelityAudit> {
    let split = phase_deficit(psi, tri, opts)?;
    let approximation = markov_state(psi, tri, &split)?;
    let delta = tv_conditional(&psi.probabilities(), &tri.a, &tri.b, &tri.c)?.value;
    let overlap = psi.inner(&approximation.assembled);
    let distance = trace_distance(&reduce(psi, &tri.a)?, &approximation.reduced_a()?)?;
    let middle = 2.0 * (Complex64::new(1.0, 0.0) - overlap).norm();
    let reports = vec![
        AuditReport::leq("fidelity_trace", (0.5 * distance).powi(2), middle, slack),
        AuditReport::leq("fidelity_overlap", middle, 2.0 * delta + 2.0 * split.objective, slack),
    ];
    Ok(FidelityAudit { vartheta: split.objective, approximation, delta, overlap, trace_distance: distance, reports })
}

/// `S(ϱ_A(ψ))` in nats, computed on the smaller of `A` and its complement.
pub fn entanglement_entropy(psi: &PureState, a: &Region) -> Result<f64> {
    if a.window() != psi.window() {
        return Err(Error::RegionMismatch("region lives on another window".into()));
    }
    let rest = a.complement();
    let side = if rest.len() < a.len() { &rest } else { a };
    Ok(von_neumann_entropy(&reduce(psi, side)?))
}

/// `I(A₁ : A₂) = S(A₁) + S(A₂) − S(A₁ ∪ A₂)` in nats.
pub fn mutual_information(psi: &PureState, a1: &Region, a2: &Region) -> Result<f64> {
    if !a1.is_disjoint(a2) {
        return Err(Error::Overlap("A₁ and A₂ must be disjoint".into()));
    }
    Ok(entanglement_entropy(psi, a1)? + entanglement_entropy(psi, a2)? - entanglement_entropy(psi, &a1.union(a2))?)
}

fn operator_norm(op: &DMatrix<Complex64>) -> f64 {
    let h = (op + op.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `|⟨O₁O₂⟩ − ⟨O₁⟩⟨O₂⟩| ≤ ‖O₁‖ ‖O₂‖ √(2 I(A₁:A₂))`, `I` in nats.
pub fn pinsker_audit(
    psi: &PureState,
    a1: &Region,
    a2: &Region,
    o1: &DMatrix<Complex64>,
    o2: &DMatrix<Complex64>,
    slack: f64,
) -> Result<AuditReport> {
    if !a1.is_disjoint(a2) {
        return Err(Error::Overlap("A₁ and A₂ must be disjoint".into()));
    }
    let nu = psi.local_dim();
    for (op, r) in [(o1, a1), (o2, a2)] {
        if op.nrows() != pow(nu, r.len()) || !op.is_square() {
            return Err(Error::RegionMismatch(format!("observable does not act on region {:?}", r.sites())));
        }
        let skew = (op - op.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if skew > 1e-12 {
            return Err(Error::InvalidArgument("observables must be Hermitian".into()));
        }
    }
    let e1 = psi.expectation(a1, o1)?.re;
    let e2 = psi.expectation(a2, o2)?.re;
    let o1psi = psi.apply_local(a1, o1)?;
    let o2psi = psi.apply_local(a2, o2)?;
    let joint = o1psi.iter().zip(&o2psi).map(|(x, y)| x.conj() * y).sum::<Complex64>().re;
    let lhs = (joint - e1 * e2).abs();
    let info = mutual_information(psi, a1, a2)?.max(0.0);
    let rhs = operator_norm(o1) * operator_norm(o2) * (2.0 * info).sqrt();
    Ok(AuditReport::leq("pinsker", lhs, rhs, slack))
}
