use proptest::prelude::*;
use quantbound::bounds::{distributed_bound, glm_bound, glm_wasserstein_bound, orlicz_bound};
use quantbound::estimate::golden_section_max;
use quantbound::infogeom::{fisher_trace_message, fisher_trace_x, orlicz_norm};
use quantbound::risk::lp_loss;
use quantbound::rng::from_seed;
use quantbound::{
    Estimator, GaussianLocation, GridQuantizer, LaplaceLocation, LossOrder, MessageRecord, ParameterSpace,
    QuantizedMleEstimator, Quantizer, ScalarLaw, SignInversionEstimator, SignQuantizer,
};

fn order(p: f64) -> LossOrder {
    LossOrder::new(p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orlicz_norm_is_homogeneous(
        atoms in prop::collection::vec(-5.0f64..5.0, 1..6),
        c in 0.1f64..20.0,
        r in 1.0f64..3.0,
    ) {
        let weights = vec![1.0 / atoms.len() as f64; atoms.len()];
        let law = ScalarLaw::Discrete { atoms, weights };
        let mut rng = from_seed(0);
        let base = orlicz_norm(&law, r, &mut rng).unwrap();
        let scaled = orlicz_norm(&law.scaled(c), r, &mut rng).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-8 * (c * base).max(1e-12));
    }

    #[test]
    fn higher_order_losses_are_smaller_on_the_unit_cube(
        diff in prop::collection::vec(-1.0f64..1.0, 1..6),
        p in 1.01f64..5.0,
        dp in 0.0f64..3.0,
    ) {
        let zero = vec![0.0; diff.len()];
        let a = lp_loss(&diff, &zero, order(p)).unwrap();
        let b = lp_loss(&diff, &zero, order(p + dp)).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn bounds_decrease_in_n(n in 1usize..5000, extra in 1usize..5000, k in 1u32..8, p in 1.55f64..4.0) {
        let o = order(p);
        let a = glm_wasserstein_bound(n, k, 2, 1.0, 1.0, o).unwrap().value;
        let b = glm_wasserstein_bound(n + extra, k, 2, 1.0, 1.0, o).unwrap().value;
        prop_assert!(b <= a * (1.0 + 1e-12));
        let r = (1.0 / (p - 1.0)).max(1.0);
        let a = orlicz_bound(n, k, 2, 1.0, 0.8, r, o).unwrap().value;
        let b = orlicz_bound(n + extra, k + 1, 2, 1.0, 0.8, r, o).unwrap().value;
        prop_assert!(b <= a * (1.0 + 1e-12));
        let a = distributed_bound(3, &vec![0.2; n], 5.0, o).unwrap().value;
        let b = distributed_bound(3, &vec![0.2; n + extra], 5.0, o).unwrap().value;
        prop_assert!(b <= a * (1.0 + 1e-12) && b >= 0.0);
        if p >= 2.0 {
            let a = glm_bound(n, k, 3, 1.0, 1.0, o).unwrap().value;
            let b = glm_bound(n + extra, k + 1, 3, 1.0, 1.0, o).unwrap().value;
            prop_assert!(b <= a);
        }
    }

    #[test]
    fn quantizing_never_adds_fisher_information(t0 in -1.0f64..1.0, t1 in -1.0f64..1.0, bits in 1u32..4) {
        let space = ParameterSpace::new(2, 1.0).unwrap();
        let g = GaussianLocation::new(0.7, space).unwrap();
        let l = LaplaceLocation::new(1.3, space).unwrap();
        let theta = [t0, t1];
        for q in [
            Box::new(SignQuantizer::new(bits, 2).unwrap()) as Box<dyn Quantizer>,
            Box::new(GridQuantizer::new(bits, 2, 3.0).unwrap()),
        ] {
            prop_assert!(fisher_trace_message(q.as_ref(), &g, 1, &theta).unwrap() <= fisher_trace_x(&g, &theta).unwrap() + 1e-9);
            prop_assert!(fisher_trace_message(q.as_ref(), &l, 2, &theta).unwrap() <= fisher_trace_x(&l, &theta).unwrap() + 1e-9);
        }
    }

    #[test]
    fn golden_section_finds_parabola_vertex(c in -0.9f64..0.9) {
        let x = golden_section_max(|t| -(t - c).powi(2), -1.0, 1.0, 1e-10);
        prop_assert!((x - c).abs() < 1e-8);
    }
}

#[test]
fn estimators_stay_in_the_cube() {
    use rand::Rng;
    let space = ParameterSpace::new(2, 0.5).unwrap();
    let g = GaussianLocation::new(1.0, space).unwrap();
    let sign = SignInversionEstimator::new(SignQuantizer::new(1, 2).unwrap());
    let mle = QuantizedMleEstimator::new(GridQuantizer::new(3, 2, 2.0).unwrap());
    let estimators: [&dyn Estimator; 2] = [&sign, &mle];
    let mut rng = from_seed(11);
    for trial in 0..100_000 {
        let est = estimators[trial % 2];
        let alphabet = est.quantizer().alphabet_size();
        let n = rng.random_range(1..6);
        let msgs: Vec<MessageRecord> =
            (1..=n).map(|sensor| MessageRecord { sensor, message: rng.random_range(1..=alphabet) }).collect();
        let theta = est.estimate(&msgs, &g).unwrap();
        assert!(space.contains(&theta), "{theta:?} from {msgs:?}");
    }
}
