//! Inequality families behind a common [`Audit`] trait, registered by name.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::approximation::{fidelity_bound_audit, mutual_information, pinsker_audit, reduced_state_approximation};
use crate::audit::AuditReport;
use crate::bounds::{fannes_bound, tail_mass_audit};
use crate::decorrelation::{
    kernel_sum_audit, key_lemma_audit, tv_algebra_audit, PhaseOptions, FKG_KAPPA, FKG_KAPPA_QUARTER,
};
use crate::error::{Error, Result};
use crate::ising::dss_audit;
use crate::lattice::{Region, Tripartition};
use crate::states::{reduce, ProbabilityTable, PureState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditSettings {
    pub slack: f64,
    pub kappa: f64,
    pub phase: PhaseOptions,
    /// Largest conditioning set in the DSS scan.
    pub dss_max_size: usize,
}

impl Default for AuditSettings {
    fn default() -> Self {
        Self { slack: crate::audit::SLACK, kappa: FKG_KAPPA, phase: PhaseOptions::default(), dss_max_size: 3 }
    }
}

/// Everything an audit may look at: the state (when pure), its measure, a
/// tripartition with `C` split in two, and a pair of test sites.
#[derive(Clone, Debug)]
pub struct AuditInput {
    pub psi: Option<PureState>,
    pub measure: ProbabilityTable,
    pub tri: Tripartition,
    pub c1: Region,
    pub c2: Region,
    pub u: usize,
    pub v: usize,
    pub settings: AuditSettings,
}

impl AuditInput {
    /// `C` is split into its first `⌈|C|/2⌉` sites and the rest; `u` is the
    /// last site of `A` and `v` the last site of `C`.
    pub fn new(
        psi: Option<PureState>,
        measure: ProbabilityTable,
        tri: Tripartition,
        settings: AuditSettings,
    ) -> Result<Self> {
        if measure.region().len() != tri.window().site_count() || measure.window() != tri.window() {
            return Err(Error::RegionMismatch("measure must cover the tripartition's window".into()));
        }
        let w = tri.window().clone();
        let sites = tri.c.sites();
        let half = sites.len().div_ceil(2);
        let c1 = w.region(sites[..half].iter().copied())?;
        let c2 = w.region(sites[half..].iter().copied())?;
        let u = *tri.a.sites().last().ok_or(Error::EmptyRegion)?;
        let v = *sites.last().ok_or_else(|| Error::InvalidArgument("audits need a nonempty C".into()))?;
        Ok(Self { psi, measure, tri, c1, c2, u, v, settings })
    }

    pub fn from_state(psi: PureState, tri: Tripartition, settings: AuditSettings) -> Result<Self> {
        let p = psi.probabilities();
        Self::new(Some(psi), p, tri, settings)
    }

    fn pure(&self, audit: &str) -> Result<&PureState> {
        self.psi.as_ref().ok_or_else(|| Error::InvalidArgument(format!("audit `{audit}` needs a pure state")))
    }
}

pub trait Audit: Send + Sync {
    fn name(&self) -> &str;
    fn summary(&self) -> &str;
    fn run(&self, input: &AuditInput) -> Result<Vec<AuditReport>>;
}

type AuditFn = fn(&AuditInput) -> Result<Vec<AuditReport>>;

struct FnAudit {
    name: &'static str,
    summary: &'static str,
    run: AuditFn,
}

impl Audit for FnAudit {
    fn name(&self) -> &str {
        self.name
    }

    fn summary(&self) -> &str {
        self.summary
    }

    fn run(&self, input: &AuditInput) -> Result<Vec<AuditReport>> {
        (self.run)(input)
    }
}

pub struct Registry {
    audits: BTreeMap<String, Box<dyn Audit>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self { audits: BTreeMap::new() }
    }

    /// All built-in audits.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        let builtins: [(&'static str, &'static str, AuditFn); 11] = [
            ("fidelity", "[½‖ϱ_A(ψ)−ϱ_A(ψ_(B))‖₁]² ≤ 2|1−⟨ψ|ψ_(B)⟩| ≤ 2δ_B(A|C) + 2ϑ̂", fidelity),
            ("tail_mass", "τ_{ϱ_A}(ν^{|B|}) ≤ 2δ_B(A|C) + 2ϑ̂", tail_mass),
            ("reduced_state", "‖ϱ_A − ϱ̂_A‖₁ ≤ 2 Σ p(σ_B)(1 − λ(σ_B))", reduced_state),
            ("rank", "rank ϱ_A(ψ_(B)) ≤ ν^{|B|} and S(ϱ_A(ψ_(B))) ≤ |B| ln ν", rank),
            ("fannes", "rank-aware Fannes bound between ϱ_A(ψ) and ϱ_A(ψ_(B))", fannes),
            ("tv_algebra", "symmetry, monotonicity, sub-cocycle, telescoping, four-term, single flip", tv_algebra),
            ("key_lemma", "δ_B(A|{u}) ≤ κ Σ_a ⟨σ_a; σ_u⟩_B for every u ∈ C", key_lemma),
            ("kernel_sum", "δ_B(A|C) ≤ κ Σ_{u∈A, v∈C} K_B(u,v)", kernel_sum),
            ("dss", "conditional truncated ⟨σ_u σ_v⟩ ≤ unconditioned ⟨σ_u σ_v⟩", dss),
            ("pinsker", "|⟨O₁O₂⟩ − ⟨O₁⟩⟨O₂⟩| ≤ ‖O₁‖‖O₂‖ √(2 I(A:C))", pinsker),
            ("mutual_information", "I(A:C) ≥ 0", mutual_info),
        ];
        for (name, summary, run) in builtins {
            r.register(Box::new(FnAudit { name, summary, run }));
        }
        r
    }

    pub fn register(&mut self, audit: Box<dyn Audit>) {
        self.audits.insert(audit.name().to_string(), audit);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Audit> {
        self.audits.get(name).map(|a| a.as_ref())
    }

    pub fn names(&self) -> Vec<&str> {
        self.audits.keys().map(|k| k.as_str()).collect()
    }

    /// Run the named audits in the given order; an empty list runs all of them.
    pub fn run(&self, names: &[String], input: &AuditInput) -> Result<Vec<AuditReport>> {
        let selected: Vec<&dyn Audit> = if names.is_empty() {
            self.audits.values().map(|a| a.as_ref()).collect()
        } else {
            names
                .iter()
                .map(|n| {
                    self.get(n).ok_or_else(|| {
                        Error::InvalidArgument(format!("unknown audit `{n}` (known: {})", self.names().join(", ")))
                    })
                })
                .collect::<Result<_>>()?
        };
        let mut out = Vec::new();
        for a in selected {
            out.extend(a.run(input)?);
        }
        Ok(out)
    }
}

fn fidelity(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let psi = input.pure("fidelity")?;
    Ok(fidelity_bound_audit(psi, &input.tri, &input.settings.phase, input.settings.slack)?.reports)
}

fn tail_mass(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let psi = input.pure("tail_mass")?;
    let s = &input.settings;
    Ok(vec![tail_mass_audit(psi, &input.tri.a, &input.tri.b, &s.phase, s.slack)?])
}

fn reduced_state(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let psi = input.pure("reduced_state")?;
    Ok(vec![reduced_state_approximation(psi, &input.tri.a, &input.tri.b)?.audit(input.settings.slack)])
}

fn rank(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let psi = input.pure("rank")?;
    let audit = fidelity_bound_audit(psi, &input.tri, &input.settings.phase, input.settings.slack)?;
    let r = audit.approximation.rank_check()?;
    Ok(vec![
        AuditReport::leq("rank", r.rank as f64, r.rank_bound as f64, 0.0),
        AuditReport::leq("schmidt", r.entropy, r.entropy_bound, crate::approximation::RANK_SLACK),
    ])
}

fn fannes(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let psi = input.pure("fannes")?;
    let audit = fidelity_bound_audit(psi, &input.tri, &input.settings.phase, input.settings.slack)?;
    let exact = reduce(psi, &input.tri.a)?;
    Ok(vec![fannes_bound(&exact, &audit.approximation.reduced_a()?, input.settings.slack)?])
}

fn tv_algebra(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let t = &input.tri;
    tv_algebra_audit(&input.measure, &t.a, &t.b, &input.c1, &input.c2, input.settings.slack)
}

fn key_lemma(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let s = &input.settings;
    let mut out = Vec::new();
    for &u in input.tri.c.sites() {
        let case = format!("u={u}");
        out.push(key_lemma_audit(&input.measure, &input.tri.a, &input.tri.b, u, s.kappa, s.slack)?.with_case(&case));
        if s.kappa != FKG_KAPPA_QUARTER {
            out.push(
                key_lemma_audit(&input.measure, &input.tri.a, &input.tri.b, u, FKG_KAPPA_QUARTER, s.slack)?
                    .with_case(&case)
                    .informational(),
            );
        }
    }
    Ok(out)
}

fn kernel_sum(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let s = &input.settings;
    let t = &input.tri;
    let main = kernel_sum_audit(&input.measure, &t.a, &t.b, &t.c, s.kappa, s.slack)?;
    let quarter = AuditReport::leq("kernel_sum", main.lhs, main.rhs * FKG_KAPPA_QUARTER / s.kappa, s.slack)
        .with_kappa(FKG_KAPPA_QUARTER)
        .informational();
    Ok(vec![main, quarter])
}

fn dss(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let r = dss_audit(&input.measure, input.u, input.v, input.settings.dss_max_size, input.settings.slack)?;
    Ok(vec![AuditReport::leq("dss", r.worst, r.bound, input.settings.slack)
        .with_case(format!("u={},v={},instances={}", r.u, r.v, r.instances))])
}

fn pauli(axis: char) -> DMatrix<Complex64> {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    if axis == 'z' {
        DMatrix::from_row_slice(2, 2, &[l, o, o, -l])
    } else {
        DMatrix::from_row_slice(2, 2, &[o, l, l, o])
    }
}

fn pinsker(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let psi = input.pure("pinsker")?;
    if psi.local_dim() != 2 {
        return Err(Error::InvalidArgument("pinsker audit uses Pauli observables and needs ν = 2".into()));
    }
    let w = psi.window();
    let (a1, a2) = (w.region([input.u])?, w.region([input.v])?);
    let mut out = Vec::new();
    for axis in ['z', 'x'] {
        let op = pauli(axis);
        out.push(
            pinsker_audit(psi, &a1, &a2, &op, &op, input.settings.slack)?
                .with_case(format!("σ^{axis} at u={}, v={}", input.u, input.v)),
        );
    }
    Ok(out)
}

fn mutual_info(input: &AuditInput) -> Result<Vec<AuditReport>> {
    let psi = input.pure("mutual_information")?;
    let i = mutual_information(psi, &input.tri.a, &input.tri.c)?;
    Ok(vec![AuditReport::leq("mutual_information", -i, 0.0, input.settings.slack)])
}
