//! Acceptance suite: one line per criterion with verdict, detail and runtime.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use entanglab::approximation::{
    entanglement_entropy, fidelity_bound_audit, mutual_information, pinsker_audit, RankReport,
};
use entanglab::audit::{AuditReport, SLACK};
use entanglab::bounds::{
    decay_fit, decoupling_verify, f_trace_check, fannes_bound, tail_mass_audit, DecayKind, FIT_FLOOR,
};
use entanglab::decorrelation::{
    grid_resolution, kernel_sum_audit, key_lemma_audit, phase_deficit, phase_deficit_grid, tv_algebra_audit,
    PhaseOptions, FKG_KAPPA, FKG_KAPPA_QUARTER,
};
use entanglab::generators::{self, GibbsSpec, PairTerm};
use entanglab::ising::{build_hamiltonian, dss_audit, ground_state, IsingSpec, SolverOptions};
use entanglab::lattice::{buffer, Region, Tripartition, Window};
use entanglab::states::DensityMatrix;
use entanglab::states::{ProbabilityTable, PureState};

struct Outcome {
    pass: bool,
    detail: String,
}

/// Criteria whose failure is analysed in the decisions ledger. They are
/// still evaluated and printed as FAIL; an unexpected pass is reported too.
const KNOWN_RED: &[usize] = &[3, 7];

#[derive(Default)]
struct Run {
    ranks: Vec<RankReport>,
}

fn qim_ground(spec: &IsingSpec) -> PureState {
    let h = build_hamiltonian(spec).expect("valid model");
    let g = ground_state(&h, &SolverOptions::default()).expect("converged");
    g.require_unique(false).expect("unique ground state").clone()
}

fn chain(n: usize, b: f64) -> PureState {
    qim_ground(&IsingSpec::chain(n, 1.0, b))
}

fn region(w: &Window, sites: impl IntoIterator<Item = usize>) -> Region {
    w.region(sites).expect("sites in window")
}

fn random_tripartition(w: &Window, rng: &mut impl Rng) -> Tripartition {
    loop {
        let labels: Vec<u8> = (0..w.site_count()).map(|_| rng.random_range(0..3u8)).collect();
        let part = |k: u8| region(w, (0..w.site_count()).filter(|&s| labels[s] == k));
        let (a, b, c) = (part(0), part(1), part(2));
        if !a.is_empty() {
            return Tripartition::new(a, b, c).expect("tiles the window");
        }
    }
}

fn count_fail(reports: &[AuditReport]) -> usize {
    reports.iter().filter(|r| !r.pass && !r.informational).count()
}

fn min_margin(reports: &[AuditReport]) -> f64 {
    reports.iter().filter(|r| !r.informational).map(|r| r.margin).fold(f64::INFINITY, f64::min)
}

fn fidelity_corpus() -> Vec<(PureState, Tripartition)> {
    let mut out = Vec::new();
    let w3 = Window::chain(3).unwrap();
    let ghz = generators::ghz(&w3);
    out.push((ghz, Tripartition::new(region(&w3, [0]), region(&w3, [1]), region(&w3, [2])).unwrap()));
    let w2 = Window::chain(2).unwrap();
    let bell = PureState::from_real(&w2, 2, &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
    out.push((bell, Tripartition::new(region(&w2, [0]), w2.empty(), region(&w2, [1])).unwrap()));
    let w8 = Window::chain(8).unwrap();
    let mut rng = generators::rng(11);
    for k in 0..200 {
        let psi = generators::random_state(&w8, 2, 1000 + k);
        out.push((psi, random_tripartition(&w8, &mut rng)));
    }
    let psi = chain(12, 2.0);
    let w12 = psi.window().clone();
    for l in 1..=4 {
        out.push((psi.clone(), buffer(&region(&w12, 0..4), l).unwrap()));
    }
    out
}

fn criterion_1(run: &mut Run) -> Outcome {
    let mut fails = 0;
    let mut margin = f64::INFINITY;
    let corpus = fidelity_corpus();
    let mut hand = true;
    for (k, (psi, tri)) in corpus.iter().enumerate() {
        let audit = fidelity_bound_audit(psi, tri, &PhaseOptions::default(), SLACK).unwrap();
        run.ranks.push(audit.approximation.rank_check().unwrap());
        fails += count_fail(&audit.reports);
        margin = margin.min(min_margin(&audit.reports));
        match k {
            0 => hand &= audit.reports.iter().all(|r| r.lhs.abs() < 1e-14 && r.rhs.abs() < 1e-14),
            1 => {
                hand &= (audit.reports[1].lhs - 0.585786437626905).abs() < 1e-12;
                hand &= (audit.reports[1].rhs - 1.0).abs() < 1e-12;
            }
            _ => {}
        }
    }
    Outcome {
        pass: fails == 0 && hand,
        detail: format!(
            "{} instances, {fails} failures, hand cases exact: {hand}, min margin {margin:.3e}",
            corpus.len()
        ),
    }
}

fn criterion_2(_: &mut Run) -> Outcome {
    let corpus = fidelity_corpus();
    let mut fails = 0;
    let mut margin = f64::INFINITY;
    let mut hand = true;
    for (k, (psi, tri)) in corpus.iter().enumerate() {
        let r = tail_mass_audit(psi, &tri.a, &tri.b, &PhaseOptions::default(), SLACK).unwrap();
        fails += usize::from(!r.pass);
        margin = margin.min(r.margin);
        if k == 1 {
            hand &= (r.lhs - 0.5).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12;
        }
    }
    Outcome {
        pass: fails == 0 && hand,
        detail: format!(
            "{} instances, {fails} failures, Bell τ(1)=½ ≤ 1: {hand}, min margin {margin:.3e}",
            corpus.len()
        ),
    }
}

fn random_four(w: &Window, rng: &mut impl Rng) -> [Region; 4] {
    loop {
        let labels: Vec<u8> = (0..w.site_count()).map(|_| rng.random_range(0..5u8)).collect();
        let part = |k: u8| region(w, (0..w.site_count()).filter(|&s| labels[s] == k));
        let parts = [part(0), part(1), part(2), part(3)];
        if !parts[0].is_empty() && !parts[2].is_empty() && !parts[3].is_empty() {
            return parts;
        }
    }
}

fn criterion_3(_: &mut Run) -> Outcome {
    let w8 = Window::chain(8).unwrap();
    let mut rng = generators::rng(33);
    let names = ["tv_symmetry", "tv_monotonicity", "sub_cocycle", "telescoping", "four_term", "single_flip"];
    let mut fails = [0usize; 6];
    let mut worst_four = f64::INFINITY;
    for k in 0..500 {
        let p = generators::random_measure(&w8, 5000 + k);
        let [a, b, c, d] = random_four(&w8, &mut rng);
        for r in tv_algebra_audit(&p, &a, &b, &c, &d, SLACK).unwrap() {
            let i = names.iter().position(|n| *n == r.inequality).unwrap();
            fails[i] += usize::from(!r.pass);
            if r.inequality == "four_term" {
                worst_four = worst_four.min(r.margin);
            }
        }
    }
    let mut hand = true;
    let w3 = Window::chain(3).unwrap();
    let ghz = generators::ghz(&w3).probabilities();
    let g =
        tv_algebra_audit(&ghz, &region(&w3, [0]), &w3.empty(), &region(&w3, [1]), &region(&w3, [2]), SLACK).unwrap();
    let cocycle = g.iter().find(|r| r.inequality == "sub_cocycle").unwrap();
    hand &= g.iter().all(|r| r.pass) && (cocycle.lhs - 0.5).abs() < 1e-15 && (cocycle.rhs - 0.5).abs() < 1e-15;
    let w4 = Window::chain(4).unwrap();
    let prod = generators::product_state(&w4, &[[0.2, 1.0], [0.7, 0.3], [1.0, 1.0], [0.1, 0.4]]).probabilities();
    let pr = tv_algebra_audit(&prod, &region(&w4, [0]), &region(&w4, [1]), &region(&w4, [2]), &region(&w4, [3]), SLACK)
        .unwrap();
    hand &= pr.iter().all(|r| r.pass && r.lhs.abs() < 1e-14);
    // frozen A₁ = {0}, A₂ = {3}; B₁ = {1}, B₂ = {2} perfectly correlated; d(A₁, A₂) = 3
    let mut probs = vec![0.0; 16];
    probs[0] = 0.5;
    probs[0b0110] = 0.5;
    let cx = ProbabilityTable::new(w4.full(), 2, probs).unwrap();
    let cr = tv_algebra_audit(&cx, &region(&w4, [0]), &region(&w4, [1]), &region(&w4, [3]), &region(&w4, [2]), SLACK)
        .unwrap();
    let four = cr.iter().find(|r| r.inequality == "four_term").unwrap();
    let summary: Vec<String> = names.iter().zip(&fails).map(|(n, f)| format!("{n} {f}/500")).collect();
    Outcome {
        pass: fails.iter().all(|&f| f == 0) && hand && four.pass,
        detail: format!(
            "failures: {}; hand cases {hand}; worst four-term margin {worst_four:.3e}; counterexample four-term lhs {:.3} vs rhs {:.3}",
            summary.join(", "),
            four.lhs,
            four.rhs
        ),
    }
}

fn fkg_instances() -> Vec<(String, ProbabilityTable, Tripartition)> {
    let mut out = Vec::new();
    for &b in &[1.5, 2.0, 4.0] {
        for n in [8usize, 12] {
            let p = chain(n, b).probabilities();
            let w = p.window().clone();
            let a = region(&w, 0..2);
            for l in [1usize, 2] {
                out.push((format!("chain N={n} b={b} l={l}"), p.clone(), buffer(&a, l).unwrap()));
            }
            let mid = region(&w, [n / 2 - 1, n / 2]);
            out.push((format!("chain N={n} b={b} central"), p.clone(), buffer(&mid, 1).unwrap()));
        }
        let p = qim_ground(&IsingSpec::nearest_neighbor(&[3, 4], 1.0, b)).probabilities();
        let w = p.window().clone();
        out.push((format!("3x4 b={b}"), p.clone(), buffer(&region(&w, [0]), 1).unwrap()));
    }
    let mut rng = generators::rng(44);
    for k in 0..6 {
        let w = if k % 2 == 0 { Window::chain(10).unwrap() } else { Window::new(&[3, 3]).unwrap() };
        let spec = GibbsSpec {
            pairs: generators::nearest_neighbor_bonds(&w, |_, _| rng.random_range(0.0..1.2)),
            fields: (0..w.site_count()).map(|_| rng.random_range(-0.5..0.5)).collect(),
            ..Default::default()
        };
        let p = spec.probabilities(&w).unwrap();
        out.push((format!("gibbs {k}"), p, buffer(&region(&w, [0]), 1).unwrap()));
    }
    out
}

fn criterion_4(_: &mut Run) -> Outcome {
    let mut fails = 0;
    let mut checks = 0;
    let mut margin = f64::INFINITY;
    let mut quarter_fails = 0;
    for (_, p, tri) in fkg_instances() {
        for &u in tri.c.sites() {
            let r = key_lemma_audit(&p, &tri.a, &tri.b, u, FKG_KAPPA, SLACK).unwrap();
            let q = key_lemma_audit(&p, &tri.a, &tri.b, u, FKG_KAPPA_QUARTER, SLACK).unwrap();
            checks += 1;
            fails += usize::from(!r.pass);
            quarter_fails += usize::from(!q.pass);
            margin = margin.min(r.margin);
        }
        let k = kernel_sum_audit(&p, &tri.a, &tri.b, &tri.c, FKG_KAPPA, SLACK).unwrap();
        checks += 1;
        fails += usize::from(!k.pass);
        margin = margin.min(k.margin);
    }
    let w2 = Window::chain(2).unwrap();
    let pair = ProbabilityTable::new(w2.full(), 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    let quarter = key_lemma_audit(&pair, &region(&w2, [0]), &w2.empty(), 1, FKG_KAPPA_QUARTER, SLACK).unwrap();
    let half = key_lemma_audit(&pair, &region(&w2, [0]), &w2.empty(), 1, FKG_KAPPA, SLACK).unwrap();
    let counterexample = !quarter.pass && quarter.lhs == 0.5 && quarter.rhs == 0.25 && half.pass && half.rhs == 0.5;
    Outcome {
        pass: fails == 0 && counterexample,
        detail: format!(
            "{checks} checks at κ=½, {fails} failures, min margin {margin:.3e}; κ=¼ fails on {quarter_fails} of them; pair counterexample δ=½ > ¼ reproduced: {counterexample}"
        ),
    }
}

fn criterion_5(_: &mut Run) -> Outcome {
    let mut fails = 0;
    let mut instances = 0;
    let mut margin = f64::INFINITY;
    for &b in &[1.5, 2.0] {
        let p = chain(10, b).probabilities();
        for u in 0..10 {
            for v in u + 1..10 {
                let r = dss_audit(&p, u, v, 3, SLACK).unwrap();
                instances += r.instances;
                fails += usize::from(!r.pass);
                margin = margin.min(r.bound - r.worst);
            }
        }
    }
    Outcome {
        pass: fails == 0,
        detail: format!(
            "90 pairs, {instances} conditional correlations, {fails} failing pairs, min margin {margin:.3e}"
        ),
    }
}

fn criterion_6(run: &mut Run) -> Outcome {
    let mut worst_delta = 0.0f64;
    let mut worst_overlap = 0.0f64;
    let mut cases = 0;
    let mut rng = generators::rng(66);
    let mut states: Vec<(PureState, Region)> = Vec::new();
    for k in 0..4 {
        let w = Window::chain(12).unwrap();
        let spec = GibbsSpec {
            pairs: generators::nearest_neighbor_bonds(&w, |_, _| rng.random_range(-2.0..2.0)),
            fields: (0..12).map(|_| if k % 2 == 0 { 0.0 } else { rng.random_range(-1.0..1.0) }).collect(),
            ..Default::default()
        };
        states.push((spec.state(&w).unwrap(), region(&w, 3..6)));
    }
    let w = Window::new(&[3, 4]).unwrap();
    let critical = GibbsSpec::nearest_neighbor(&w, 0.5 * (1.0 + 2f64.sqrt()).ln());
    states.push((critical.state(&w).unwrap(), region(&w, [0])));
    states.push((critical.state(&w).unwrap(), region(&w, [5])));
    for (psi, a) in &states {
        let mut l = 1;
        loop {
            let tri = buffer(a, l).unwrap();
            if tri.c.is_empty() {
                break;
            }
            let audit = fidelity_bound_audit(psi, &tri, &PhaseOptions::default(), SLACK).unwrap();
            run.ranks.push(audit.approximation.rank_check().unwrap());
            worst_delta = worst_delta.max(audit.delta);
            worst_overlap = worst_overlap.max((1.0 - audit.overlap.norm()).abs());
            cases += 1;
            l += 1;
        }
    }
    Outcome {
        pass: worst_delta <= 1e-12 && worst_overlap <= 1e-12,
        detail: format!(
            "{cases} (state, width) cases; max δ {worst_delta:.2e}; max |1 − |⟨ψ|ψ_(B)⟩|| {worst_overlap:.2e}"
        ),
    }
}

struct Series {
    name: &'static str,
    xi: Vec<f64>,
    certified: Vec<bool>,
}

fn fit_column(points: &[(usize, f64)]) -> (f64, bool, f64) {
    let used: Vec<(usize, f64)> = points.iter().copied().filter(|(_, v)| *v > FIT_FLOOR).collect();
    if used.len() < 3 {
        return (f64::NAN, false, f64::NAN);
    }
    let f = decay_fit(&used, DecayKind::Exponential).unwrap();
    (f.model.xi, f.certificate, f.max_relative_residual)
}

fn criterion_7(run: &mut Run) -> Outcome {
    let sizes = [10usize, 12, 14];
    let mut series = vec![
        Series { name: "delta", xi: vec![], certified: vec![] },
        Series { name: "one_minus_overlap", xi: vec![], certified: vec![] },
        Series { name: "tau", xi: vec![], certified: vec![] },
        Series { name: "mutual_information", xi: vec![], certified: vec![] },
    ];
    let mut residuals = Vec::new();
    let mut entropy_spread = f64::NAN;
    let mut tau_tail = String::new();
    for &n in &sizes {
        let psi = chain(n, 2.0);
        let w = psi.window().clone();
        let table = decoupling_verify(&psi, &region(&w, 0..4), &[1, 2, 3, 4], &PhaseOptions::default()).unwrap();
        for r in &table.rows {
            run.ranks.push(r.rank.clone());
        }
        let cols = [
            table.column(|r| r.delta),
            table.column(|r| r.one_minus_overlap),
            table.column(|r| r.tau),
            (1..=5)
                .map(|d| (d, mutual_information(&psi, &region(&w, [2, 3]), &region(&w, [3 + d, 4 + d])).unwrap()))
                .collect(),
        ];
        for (s, col) in series.iter_mut().zip(&cols) {
            let (xi, cert, res) = fit_column(col);
            s.xi.push(xi);
            s.certified.push(cert);
            residuals.push(format!("{}@{n}:{res:.2}", s.name));
        }
        if n == 14 {
            tau_tail = cols[2].iter().map(|(l, v)| format!("{l}:{v:.1e}")).collect::<Vec<_>>().join(" ");
            let s: Vec<f64> = (3..=7).map(|k| entanglement_entropy(&psi, &region(&w, 0..k)).unwrap()).collect();
            let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            entropy_spread = (hi - lo) / hi;
        }
    }
    let mut pass = entropy_spread < 0.05;
    let mut parts = Vec::new();
    for s in &series {
        let reference = *s.xi.last().unwrap();
        let stable = s.xi.iter().all(|x| ((x - reference) / reference).abs() <= 0.15);
        let certified = s.certified.iter().all(|&c| c);
        pass &= stable && certified;
        parts.push(format!(
            "{} ξ=[{}] cert={certified} stable={stable}",
            s.name,
            s.xi.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
        ));
    }
    Outcome {
        pass,
        detail: format!(
            "{}; τ at N=14 [{tau_tail}]; entropy spread over |A|∈[3,7] at N=14: {:.2}%; residuals {}",
            parts.join("; "),
            100.0 * entropy_spread,
            residuals.join(" ")
        ),
    }
}

fn pauli(axis: char) -> DMatrix<Complex64> {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    if axis == 'z' {
        DMatrix::from_row_slice(2, 2, &[l, o, o, -l])
    } else {
        DMatrix::from_row_slice(2, 2, &[o, l, l, o])
    }
}

fn criterion_8(_: &mut Run) -> Outcome {
    let w3 = Window::chain(3).unwrap();
    let ghz = generators::ghz(&w3);
    let g = pinsker_audit(&ghz, &region(&w3, [0]), &region(&w3, [2]), &pauli('z'), &pauli('z'), SLACK).unwrap();
    let tight = g.pass && (g.lhs - 1.0).abs() < 1e-12 && (g.rhs - 1.17741).abs() < 1e-5;
    let mut fails = 0;
    let mut count = 0;
    for n in [10usize, 12] {
        let psi = chain(n, 2.0);
        let w = psi.window().clone();
        for u in 0..n {
            for v in u + 1..n {
                for axis in ['x', 'z'] {
                    let r = pinsker_audit(&psi, &region(&w, [u]), &region(&w, [v]), &pauli(axis), &pauli(axis), SLACK)
                        .unwrap();
                    fails += usize::from(!r.pass);
                    count += 1;
                }
            }
        }
    }
    Outcome {
        pass: tight && fails == 0,
        detail: format!(
            "GHZ lhs {:.6} ≤ rhs {:.6} (near-tight: {tight}); {count} QIM instances, {fails} failures",
            g.lhs, g.rhs
        ),
    }
}

fn criterion_9(_: &mut Run) -> Outcome {
    let mut rng = generators::rng(99);
    let mut fannes_fail = 0;
    for k in 0..1000u64 {
        let dim = rng.random_range(2..=16);
        let r1 = generators::random_density_matrix(dim, 2 * k);
        let r2 = generators::random_density_matrix(dim, 2 * k + 1);
        fannes_fail += usize::from(!fannes_bound(&r1, &r2, SLACK).unwrap().pass);
    }
    let mut trace_fail = 0;
    for k in 0..1000u64 {
        let dim = rng.random_range(1..=8);
        let a = generators::random_psd(dim, rng.random_range(0.0..1.0), 10_000 + 2 * k);
        let b = generators::random_psd(dim, rng.random_range(0.0..1.0), 10_001 + 2 * k);
        trace_fail += f_trace_check(&a, &b, SLACK).unwrap().iter().filter(|r| !r.pass).count();
    }
    let d1 = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
    let d2 = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
    let hand = fannes_bound(&d1, &d2, SLACK).unwrap();
    let hand_ok = hand.pass && (hand.lhs - LN_2).abs() < 1e-12 && (hand.rhs - 1.19315).abs() < 1e-5;
    Outcome {
        pass: fannes_fail == 0 && trace_fail == 0 && hand_ok,
        detail: format!(
            "Fannes 1000 pairs, {fannes_fail} failures; F-trace 1000 pairs × 2, {trace_fail} failures; hand case {:.5} ≤ {:.5}",
            hand.lhs, hand.rhs
        ),
    }
}

fn criterion_10(run: &mut Run) -> Outcome {
    let fails = run.ranks.iter().filter(|r| !r.pass).count();
    let max_ratio =
        run.ranks.iter().filter(|r| r.entropy_bound > 0.0).map(|r| r.entropy / r.entropy_bound).fold(0.0, f64::max);
    Outcome {
        pass: fails == 0 && !run.ranks.is_empty(),
        detail: format!("{} approximations, {fails} violations; max S/(|B| ln ν) = {max_ratio:.4}", run.ranks.len()),
    }
}

fn criterion_11(_: &mut Run) -> Outcome {
    let w6 = Window::chain(6).unwrap();
    let mut rng = generators::rng(111);
    let res = grid_resolution(64);
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_sanity = f64::NEG_INFINITY;
    let mut count = 0;
    while count < 50 {
        let tri = random_tripartition(&w6, &mut rng);
        if tri.c.is_empty() || tri.a.len().min(tri.c.len()) > 2 {
            continue;
        }
        let psi = generators::random_state(&w6, 2, 7000 + count as u64);
        let opt = phase_deficit(&psi, &tri, &PhaseOptions::default()).unwrap().objective;
        let grid = phase_deficit_grid(&psi, &tri, 64).unwrap();
        worst_gap = worst_gap.max(opt - grid);
        worst_sanity = worst_sanity.max(grid - opt);
        count += 1;
    }
    let mut zero_worst = 0.0f64;
    let mut zero_cases = 0;
    for seed in 0..10u64 {
        let mut r = generators::rng(seed);
        let w = Window::chain(8).unwrap();
        let mut spec = GibbsSpec {
            pairs: generators::nearest_neighbor_bonds(&w, |_, _| r.random_range(-1.0..1.0)),
            fields: (0..8).map(|_| r.random_range(-0.5..0.5)).collect(),
            ..Default::default()
        };
        let a = region(&w, [3]);
        let stoq = spec.state(&w).unwrap();
        for l in 1..=2 {
            let tri = buffer(&a, l).unwrap();
            zero_worst = zero_worst.max(phase_deficit(&stoq, &tri, &PhaseOptions::default()).unwrap().objective);
            zero_cases += 1;
        }
        for u in 0..8usize {
            for v in u + 1..=(u + 2).min(7) {
                spec.phase_pairs.push(PairTerm { u, v, j: r.random_range(-3.0..3.0) });
            }
        }
        spec.phase_fields = (0..8).map(|_| r.random_range(-3.0..3.0)).collect();
        let additive = spec.state(&w).unwrap();
        let tri = buffer(&a, 2).unwrap();
        zero_worst = zero_worst.max(phase_deficit(&additive, &tri, &PhaseOptions::default()).unwrap().objective);
        zero_cases += 1;
    }
    Outcome {
        pass: worst_gap <= res && worst_sanity <= res / 2.0 + 1e-12 && zero_worst <= 1e-12,
        detail: format!(
            "50 states: max(opt − grid) {worst_gap:.3e} (resolution {res:.4}), max(grid − opt) {worst_sanity:.3e}; {zero_cases} stoquastic/additive cases, max objective {zero_worst:.2e}"
        ),
    }
}

fn main() {
    type Criterion = fn(&mut Run) -> Outcome;
    let criteria: [(usize, &str, Criterion, u64); 11] = [
        (1, "fidelity bound", criterion_1, 300),
        (2, "tail mass", criterion_2, 300),
        (3, "TV algebra", criterion_3, 180),
        (4, "FKG bounds with κ=½", criterion_4, 600),
        (5, "DSS inequality", criterion_5, 600),
        (6, "Markov exactness", criterion_6, 120),
        (7, "subcritical decay", criterion_7, 1200),
        (8, "Pinsker", criterion_8, 300),
        (9, "Fannes and F-trace", criterion_9, 120),
        (10, "rank and Schmidt bounds", criterion_10, 60),
        (11, "phase-deficit optimizer", criterion_11, 600),
    ];
    let mut run = Run::default();
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (id, title, f, limit) in criteria {
        let start = Instant::now();
        let out = f(&mut run);
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = out.pass && in_time;
        passed += usize::from(pass);
        let known = KNOWN_RED.contains(&id);
        let tag = match (pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as known red)",
            (false, true) => "FAIL (known, analysed in the decisions ledger)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} [{tag}] {title}: {} ({:.1} s, limit {limit} s)", out.detail, elapsed.as_secs_f64());
        if pass == known {
            unexpected.push(id);
        }
    }
    println!("{passed}/11 criteria pass; known red: {KNOWN_RED:?}");
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
