use num_complex::Complex64;
use proptest::prelude::*;

use entanglab::approximation::{fidelity_bound_audit, markov_state, mutual_information};
use entanglab::audit::SLACK;
use entanglab::bounds::{area_law_rhs, fannes_bound, DecayModel};
use entanglab::decorrelation::{phase_deficit, tv, tv_conditional, PhaseOptions};
use entanglab::generators;
use entanglab::lattice::{Region, Tripartition, Window};
use entanglab::states::{amplitude_decompose, reduce, spectral_tail, PureState};

fn split(w: &Window, labels: &[u8], k: u8) -> Region {
    w.region((0..labels.len()).filter(|&s| labels[s] == k)).unwrap()
}

fn labels(n: usize, parts: u8) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0..parts, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tv_is_symmetric_bounded_and_monotone(seed in 0u64..10_000, lab in labels(6, 4)) {
        let w = Window::chain(6).unwrap();
        let p = generators::random_measure(&w, seed);
        let (a, c, d) = (split(&w, &lab, 0), split(&w, &lab, 1), split(&w, &lab, 2));
        let ac = tv(&p, &a, &c).unwrap().value;
        prop_assert!((ac - tv(&p, &c, &a).unwrap().value).abs() <= SLACK);
        prop_assert!((-SLACK..=1.0 + SLACK).contains(&ac));
        prop_assert!(ac <= tv(&p, &a, &c.union(&d)).unwrap().value + SLACK);
    }

    #[test]
    fn conditional_tv_lies_in_unit_interval(seed in 0u64..10_000, lab in labels(6, 3)) {
        let w = Window::chain(6).unwrap();
        let p = generators::random_measure(&w, seed);
        let v = tv_conditional(&p, &split(&w, &lab, 0), &split(&w, &lab, 1), &split(&w, &lab, 2)).unwrap().value;
        prop_assert!((-SLACK..=1.0 + SLACK).contains(&v));
    }

    #[test]
    fn phase_objective_matches_tables_and_beats_zero_split(seed in 0u64..10_000, lab in labels(5, 3)) {
        let w = Window::chain(5).unwrap();
        prop_assume!(lab.contains(&0));
        let tri = Tripartition::new(split(&w, &lab, 0), split(&w, &lab, 1), split(&w, &lab, 2)).unwrap();
        let psi = generators::random_state(&w, 2, seed);
        let s = phase_deficit(&psi, &tri, &PhaseOptions::default()).unwrap();
        prop_assert!((s.evaluate(&psi) - s.objective).abs() <= 1e-9);
        let (p, theta) = amplitude_decompose(&psi);
        let zero: f64 = p.probs().iter().zip(theta.values()).map(|(w, t)| w * 4.0 * (0.5 * t).sin().powi(2)).sum();
        prop_assert!(s.objective <= zero.sqrt() + 1e-12);
    }

    #[test]
    fn fidelity_bound_is_global_phase_invariant(seed in 0u64..10_000, phase in 0.0..std::f64::consts::TAU, lab in labels(6, 3)) {
        let w = Window::chain(6).unwrap();
        prop_assume!(lab.contains(&0));
        let tri = Tripartition::new(split(&w, &lab, 0), split(&w, &lab, 1), split(&w, &lab, 2)).unwrap();
        let psi = generators::random_state(&w, 2, seed);
        let rotated = PureState::new(
            &w,
            2,
            psi.amplitudes().iter().map(|z| z * Complex64::from_polar(1.0, phase)).collect(),
        )
        .unwrap();
        let a = fidelity_bound_audit(&psi, &tri, &PhaseOptions::default(), SLACK).unwrap();
        let b = fidelity_bound_audit(&rotated, &tri, &PhaseOptions::default(), SLACK).unwrap();
        prop_assert!(a.pass() && b.pass());
        prop_assert!((a.overlap - b.overlap).norm() <= 1e-9);
    }

    #[test]
    fn markov_approximation_respects_rank_bound(seed in 0u64..10_000, lab in labels(6, 3)) {
        let w = Window::chain(6).unwrap();
        prop_assume!(lab.contains(&0));
        let tri = Tripartition::new(split(&w, &lab, 0), split(&w, &lab, 1), split(&w, &lab, 2)).unwrap();
        let psi = generators::random_state(&w, 2, seed);
        let s = phase_deficit(&psi, &tri, &PhaseOptions::default()).unwrap();
        prop_assert!(markov_state(&psi, &tri, &s).unwrap().rank_check().unwrap().pass);
    }

    #[test]
    fn mutual_information_is_nonnegative(seed in 0u64..10_000, lab in labels(6, 3)) {
        let w = Window::chain(6).unwrap();
        let (a1, a2) = (split(&w, &lab, 0), split(&w, &lab, 1));
        let psi = generators::random_state(&w, 2, seed);
        prop_assert!(mutual_information(&psi, &a1, &a2).unwrap() >= -1e-12);
    }

    #[test]
    fn spectral_tail_is_nonincreasing(seed in 0u64..10_000, k in 1usize..5) {
        let w = Window::chain(6).unwrap();
        let psi = generators::random_state(&w, 2, seed);
        let rho = reduce(&psi, &w.region(0..k).unwrap()).unwrap();
        for n in 0..rho.dim() {
            prop_assert!(spectral_tail(&rho, n + 1) <= spectral_tail(&rho, n) + 1e-15);
        }
    }

    #[test]
    fn fannes_holds_on_random_pairs(seed in 0u64..10_000, dim in 2usize..12) {
        let r1 = generators::random_density_matrix(dim, 2 * seed);
        let r2 = generators::random_density_matrix(dim, 2 * seed + 1);
        prop_assert!(fannes_bound(&r1, &r2, SLACK).unwrap().pass);
    }

    #[test]
    fn area_law_grows_with_decoupling_distance(xi in 0.2f64..3.0, l0 in 0usize..6, k in 1usize..5) {
        let w = Window::chain(12).unwrap();
        let a = w.region(0..k).unwrap();
        let lo = area_law_rhs(&DecayModel::exponential(xi, l0).unwrap(), &a, 2).unwrap().rhs;
        let hi = area_law_rhs(&DecayModel::exponential(xi, l0 + 1).unwrap(), &a, 2).unwrap().rhs;
        prop_assert!(lo <= hi + 1e-12);
    }
}
