use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use postcap::channel::{build_sequence_kernel, PostChannelSpec};
use postcap::directed::{concavity_probe, directed_information, directed_information_stepwise};
use postcap::probability::{CausalKernel, Delay, StepPolicy};

fn random_policy(seed: u64, oa: usize, ia: usize, n: usize, delay: Delay, floor: f64) -> StepPolicy {
    StepPolicy::random(oa, ia, n, delay, floor, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn compose_factorize_round_trip(
        seed in any::<u64>(),
        oa in 2usize..=3,
        ia in 2usize..=3,
        n in 1usize..=3,
        one_step in any::<bool>(),
        floor in prop_oneof![Just(0.0), 0.0..0.5],
    ) {
        let delay = if one_step { Delay::One } else { Delay::Zero };
        let policy = random_policy(seed, oa, ia, n, delay, floor);
        let kernel = policy.compose();
        let report = kernel.validate(1e-9);
        prop_assert!(report.passed(), "max violation {}", report.max_violation);
        let back = StepPolicy::factorize(&kernel).unwrap().compose();
        prop_assert!(back.max_abs_diff(&kernel) <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn directed_information_chain_rule(seed in any::<u64>(), n in 1usize..=4, a in 0.05f64..1.0, b in 0.05f64..1.0) {
        let spec = PostChannelSpec::post_ab(a, b).unwrap();
        let channel = build_sequence_kernel(&spec, n, (seed % 2) as usize).unwrap().to_dense().unwrap();
        let input = random_policy(seed, 2, 2, n, Delay::One, 0.0).compose();
        let total = directed_information(&input, &channel).unwrap();
        let steps: f64 = directed_information_stepwise(&input, &channel).unwrap().iter().sum();
        prop_assert!((total - steps).abs() < 1e-9);
        prop_assert!(total >= -1e-12 && total <= n as f64 + 1e-12);
    }
}

#[test]
fn midpoint_concavity_on_post_04() {
    let spec = PostChannelSpec::post_alpha(0.4).unwrap();
    let channel = build_sequence_kernel(&spec, 3, 0).unwrap().to_dense().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let p1 = StepPolicy::random(2, 2, 3, Delay::One, 0.0, &mut rng).compose();
        let p2 = StepPolicy::random(2, 2, 3, Delay::One, 0.0, &mut rng).compose();
        let (lhs, rhs) = concavity_probe(&channel, &p1, &p2, 0.5).unwrap();
        assert!(lhs >= rhs - 1e-12, "{lhs} < {rhs}");
    }
}

#[test]
fn two_step_channel_factors_into_z_and_s_channels() {
    let alpha = 0.3;
    let spec = PostChannelSpec::post_alpha(alpha).unwrap();
    let kernel: CausalKernel = build_sequence_kernel(&spec, 2, 0).unwrap().to_dense().unwrap();
    let steps = StepPolicy::factorize(&kernel).unwrap();
    for x1 in 0..2 {
        for y in 0..2 {
            let expected = spec.step_kernel(0).unwrap().get(y, x1);
            assert!((steps.prob(1, 0, x1, y) - expected).abs() < 1e-15);
        }
    }
    for y1 in 0..2 {
        let w = spec.step_kernel(y1).unwrap();
        for x1 in 0..2 {
            for x2 in 0..2 {
                let mass = kernel.get(y1 * 2, x1 * 2 + x2) + kernel.get(y1 * 2 + 1, x1 * 2 + x2);
                if mass == 0.0 {
                    continue;
                }
                for y2 in 0..2 {
                    assert!((steps.prob(2, y1, x1 * 2 + x2, y2) - w.get(y2, x2)).abs() < 1e-15);
                }
            }
        }
    }
}
