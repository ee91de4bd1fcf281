use proptest::prelude::*;

use otc_core::cloner::{
    clone_marginals, exact_clone_marginal, shrink, shrinking_factor, CloneBackend, CloneJob,
};
use otc_core::cnf::{parse_dimacs, CnfFormula};
use otc_core::protocols::{
    hoeffding_bound, informationally_complete_set, predicted_failure, predicted_failure_exact,
    required_ancillas_for_range, s_gate, s_gate_closed_form, unbias_estimate,
};
use otc_core::qmath::{partial_trace, SubsystemLayout};
use otc_core::qstate::{
    born_probabilities, expectation, mix, rng_from_seed, state_of_bloch, BlochVector,
    DensityMatrix, Ensemble, Observable,
};
use otc_core::random::{random_density, random_pure_state, random_unitary};
use otc_core::timelike::{
    deutsch_fixed_point, otc_apply, otc_apply_ensemble, self_consistency_residual, CtcSpec,
};

fn layout_strategy() -> impl Strategy<Value = SubsystemLayout> {
    prop::collection::vec(2usize..=3, 2..=3).prop_map(|d| SubsystemLayout::new(d).unwrap())
}

fn state(layout: &SubsystemLayout, seed: u64) -> DensityMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    let rank = 1 + (seed as usize) % layout.total();
    random_density(layout, rank, &mut rng).unwrap()
}

fn bloch_strategy() -> impl Strategy<Value = BlochVector<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_filter_map("inside the ball", |(x, y, z)| {
        BlochVector::new(x, y, z).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decorrelator_is_the_marginal_product(layout in layout_strategy(), seed: u64, pick: usize) {
        let rho = state(&layout, seed);
        let k = pick % layout.len();
        let rest = layout.complement(&[k]);
        let out = otc_apply(&rho, &[k]).unwrap();
        // local statistics survive
        prop_assert!(out.marginal(&[k]).unwrap().max_abs_diff(&rho.marginal(&[k]).unwrap()) < 1e-12);
        prop_assert!(out.marginal(&rest).unwrap().max_abs_diff(&rho.marginal(&rest).unwrap()) < 1e-12);
        // and nothing else is left between the traveller and the rest
        let again = otc_apply(&out, &[k]).unwrap();
        prop_assert!(again.max_abs_diff(&out) < 1e-12);
        let everything: Vec<usize> = (0..layout.len()).collect();
        prop_assert!(otc_apply(&rho, &everything).unwrap().max_abs_diff(&rho) == 0.0);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor(a in 0u64..1000, b in 0u64..1000) {
        let la = SubsystemLayout::new(vec![2]).unwrap();
        let lb = SubsystemLayout::new(vec![3]).unwrap();
        let (ra, rb) = (state(&la, a), state(&lb, b));
        let joint = ra.tensor(&rb).unwrap();
        let back = partial_trace(joint.matrix(), joint.layout(), &[0]).unwrap();
        prop_assert!(back.max_abs_diff(ra.matrix()) < 1e-12);
        prop_assert!((joint.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_branches_pass_unchanged(seed: u64, w in 0.05f64..0.95) {
        let q = SubsystemLayout::qubits(1).unwrap();
        let mut rng = rng_from_seed(seed);
        let branch = |rng: &mut _| {
            random_pure_state::<f64, _>(&q, rng).tensor(&random_pure_state(&q, rng)).unwrap()
        };
        let e = Ensemble::new(vec![(w, branch(&mut rng)), (1.0 - w, branch(&mut rng))]).unwrap();
        let out = otc_apply_ensemble(&e, &[0]).unwrap();
        prop_assert!(out.max_abs_diff(&mix(&e).unwrap()) < 1e-12);
    }

    #[test]
    fn s_gate_squares_the_z_component(n in bloch_strategy()) {
        let rho = state_of_bloch(&n);
        prop_assert!(s_gate(&rho).unwrap().max_abs_diff(&s_gate_closed_form(&rho).unwrap()) <= 1e-10);
    }

    #[test]
    fn fixed_points_are_self_consistent(seed: u64) {
        let mut rng = rng_from_seed(seed);
        let q = SubsystemLayout::qubits(1).unwrap();
        let spec = CtcSpec::appended(random_unitary::<f64, _>(4, &mut rng), &q, &[2]).unwrap();
        let rho = state(&q, seed);
        let fp = deutsch_fixed_point(&rho, &spec, 1e-10, 100_000).unwrap();
        prop_assert!(self_consistency_residual(&rho, &spec, &fp.solution).unwrap() <= 1e-8);
    }

    #[test]
    fn budget_is_the_least_integer_above_the_bound(
        range in 0.1f64..5.0, delta in 0.01f64..1.0, eps in 0.001f64..0.999
    ) {
        let n = required_ancillas_for_range(range, delta, eps).unwrap() as f64;
        let bound = hoeffding_bound(range, delta, eps).unwrap();
        prop_assert!(n > bound * (1.0 - 1e-12));
        prop_assert!(n - 1.0 <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn born_probabilities_are_a_distribution(seed: u64, d in 2usize..=4) {
        let l = SubsystemLayout::new(vec![d]).unwrap();
        let rho = state(&l, seed);
        let mut rng = rng_from_seed(seed ^ 1);
        let u = random_unitary::<f64, _>(d, &mut rng);
        let diag: Vec<f64> = (0..d).map(|k| k as f64 - 1.0).collect();
        let h = u.matmul(&otc_core::qmath::ComplexMatrix::diagonal(&diag)).matmul(&u.adjoint());
        let obs = Observable::new(h.hermitian_part()).unwrap();
        let p = born_probabilities(&rho, &obs).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_cloner_matches_closed_form(seed: u64, d in 2usize..=3, m in 1usize..=4) {
        let l = SubsystemLayout::new(vec![d]).unwrap();
        let rho = state(&l, seed);
        let exact = exact_clone_marginal(&CloneJob::new(rho.clone(), m, CloneBackend::ExactSymmetric).unwrap()).unwrap();
        let model = &clone_marginals(&CloneJob::new(rho, m, CloneBackend::MarginalModel).unwrap()).unwrap()[0];
        prop_assert!(exact.max_abs_diff(model) < 1e-9);
    }

    #[test]
    fn unbiasing_inverts_shrinking(seed: u64, d in 2usize..=3, m in 1usize..=9) {
        let l = SubsystemLayout::new(vec![d]).unwrap();
        let rho = state(&l, seed);
        let s = shrinking_factor::<f64>(d, m).unwrap();
        let noisy = shrink(&rho, s).unwrap();
        for obs in informationally_complete_set::<f64>(d).unwrap() {
            let raw = expectation(&noisy, &obs).unwrap();
            let back = unbias_estimate(raw, &obs, s, d).unwrap();
            prop_assert!((back - expectation(&rho, &obs).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn failure_probability_is_a_probability(n in 1usize..=8, frac in 0.0f64..=1.0, p in 0usize..=6, q in 1usize..=30) {
        let s = ((1u64 << n) as f64 * frac).round() as u64;
        let f = predicted_failure(n, s, p, q).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let exact = predicted_failure_exact(n, s, p, q).unwrap();
        let approx = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        prop_assert!((approx - f).abs() <= 1e-12);
    }

    #[test]
    fn dimacs_round_trips(n in 1usize..=8, raw in prop::collection::vec(prop::collection::vec((1i32..=8, any::<bool>()), 0..4), 0..8)) {
        let clauses: Vec<Vec<i32>> = raw
            .into_iter()
            .map(|c| c.into_iter().map(|(v, neg)| {
                let v = 1 + (v - 1) % n as i32;
                if neg { -v } else { v }
            }).collect())
            .collect();
        let f = CnfFormula::new(n, clauses).unwrap();
        let g = parse_dimacs(&f.to_dimacs()).unwrap();
        prop_assert_eq!(&f, &g);
        let brute = (0..1u64 << n).filter(|&i| f.eval_index(i)).count() as u64;
        prop_assert_eq!(f.count_satisfying().unwrap(), brute);
        if f.is_tautology() {
            prop_assert_eq!(brute, 1u64 << n);
        }
    }
}

#[test]
fn single_precision_instance() {
    let l = SubsystemLayout::qubits(2).unwrap();
    let mut rng = rng_from_seed(12);
    let rho: DensityMatrix<f32> = random_density(&l, 2, &mut rng).unwrap();
    let out = otc_apply(&rho, &[1]).unwrap();
    let a = rho.marginal(&[0]).unwrap();
    let b = rho.marginal(&[1]).unwrap();
    assert!(out.max_abs_diff(&a.tensor(&b).unwrap()) < 1e-5);
}
