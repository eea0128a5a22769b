use postcap::capacity::{
    corollary_output_match, kkt_check, maximize_di_feedback, maximize_mi_nofeedback, upper_bound, Initialization,
    OptimizerConfig,
};
use postcap::channel::{PostChannelSpec, StepKernel};
use postcap::closed_form::{binary_dmc_capacity, post_alpha_capacity};
use postcap::construction::{recursive_input_ab, recursive_input_alpha};
use postcap::probability::{CausalKernel, Delay, SequencePmf, StepPolicy};

const Z_HALF: f64 = 0.321_928_094_887_362_3;
const BSC: f64 = 0.531_004_406_410_718_5;

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

#[test]
fn feedback_optimizer_examples() {
    let spec = PostChannelSpec::post_alpha(0.5).unwrap();
    for n in 1..=3 {
        let opt = maximize_di_feedback(&spec, n, 0, &cfg()).unwrap();
        assert!(opt.converged, "{}", opt.kkt.to_text());
        assert!((opt.per_symbol_bits() - Z_HALF).abs() < 1e-6);
        assert!((opt.kkt.implied_capacity_bits - opt.value_bits).abs() < 10.0 * cfg().kkt_tolerance);
        assert!(opt.value_bits <= opt.kkt.upper_bound_bits + 1e-12);
    }
    let bsc = PostChannelSpec::post_ab(0.9, 0.9).unwrap();
    let opt = maximize_di_feedback(&bsc, 1, 0, &cfg()).unwrap();
    assert!((opt.value_bits - BSC).abs() < 1e-8);
}

#[test]
fn feedback_value_is_minus_log_c_per_step() {
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        let spec = PostChannelSpec::post_alpha(alpha).unwrap();
        let c = post_alpha_capacity(alpha).unwrap().capacity_bits;
        for n in 1..=4 {
            let opt = maximize_di_feedback(&spec, n, 0, &cfg()).unwrap();
            assert!((opt.per_symbol_bits() - c).abs() < 1e-5, "alpha {alpha} n {n}");
        }
    }
}

#[test]
fn random_restarts_agree() {
    let spec = PostChannelSpec::post_ab(0.85, 0.55).unwrap();
    let base = maximize_di_feedback(&spec, 3, 1, &cfg()).unwrap();
    for seed in [1, 2, 3] {
        let c = OptimizerConfig { initialization: Initialization::Random(seed), ..cfg() };
        let other = maximize_di_feedback(&spec, 3, 1, &c).unwrap();
        assert!(other.converged);
        assert!((other.value_bits - base.value_bits).abs() < 1e-7);
    }
}

#[test]
fn certificate_examples() {
    let bsc = PostChannelSpec::post_ab(0.9, 0.9).unwrap();
    let uniform = CausalKernel::from_input_pmf(&SequencePmf::uniform(2, 1), 2).unwrap();
    let r = kkt_check(&uniform, &bsc, 1, 0, 1e-9).unwrap();
    assert!(r.passed);
    assert!((r.implied_capacity_bits - BSC).abs() < 1e-12);

    let skewed = CausalKernel::from_input_pmf(&SequencePmf::new(2, 1, vec![0.9, 0.1]).unwrap(), 2).unwrap();
    let r = kkt_check(&skewed, &bsc, 1, 0, 1e-9).unwrap();
    assert!(!r.passed && r.max_violation_support > 1e-3);
    assert!(r.worst_location.is_some());

    // stationary feedback policy of POST(0.5)
    let spec = PostChannelSpec::post_alpha(0.5).unwrap();
    let policy = StepPolicy::from_fn(2, 2, 2, Delay::One, |step, _, y| {
        let state = if step == 1 { 0 } else { y % 2 };
        if state == 0 { vec![0.6, 0.4] } else { vec![0.4, 0.6] }
    })
    .unwrap();
    let r = kkt_check(&policy.compose(), &spec, 2, 0, 1e-9).unwrap();
    assert!(r.passed, "{}", r.to_text());
    assert!((r.implied_capacity_bits - 0.643_856_189_774_724_7).abs() < 1e-12);
    assert!(r.identity_offset.abs() < 1e-12);
    // the per-column form of the condition does not hold here
    assert!(r.literal_support_residual > 1e-3);
}

#[test]
fn certificate_at_closed_form_single_letter_inputs() {
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        let s = post_alpha_capacity(alpha).unwrap();
        let input = CausalKernel::from_input_pmf(&SequencePmf::new(2, 1, s.input_pmf.to_vec()).unwrap(), 2).unwrap();
        let r = kkt_check(&input, &PostChannelSpec::post_alpha(alpha).unwrap(), 1, 0, 1e-9).unwrap();
        assert!(r.passed && (r.implied_capacity_bits - s.capacity_bits).abs() < 1e-10);
    }
    for (a, b) in [(0.9, 0.7), (0.6, 0.95), (0.2, 0.3)] {
        let s = binary_dmc_capacity(a, b).unwrap();
        // the relabeling swaps output labels, so the input pmf carries over
        let p = s.input_pmf.to_vec();
        let input = CausalKernel::from_input_pmf(&SequencePmf::new(2, 1, p).unwrap(), 2).unwrap();
        let r = kkt_check(&input, &PostChannelSpec::post_ab(a, b).unwrap(), 1, 0, 1e-9).unwrap();
        assert!(r.passed, "({a}, {b}) {}", r.to_text());
        assert!((r.implied_capacity_bits - s.capacity_bits).abs() < 1e-10);
    }
}

#[test]
fn certificate_reports_unreachable_outputs() {
    // a channel whose output 1 is only reachable from input 1
    let z = StepKernel::from_rows(vec![vec![1.0, 0.5], vec![0.0, 0.5]]).unwrap();
    let spec = PostChannelSpec::custom(vec![z.clone(), z]).unwrap();
    let input = CausalKernel::from_input_pmf(&SequencePmf::new(2, 1, vec![1.0, 0.0]).unwrap(), 2).unwrap();
    let r = kkt_check(&input, &spec, 1, 0, 1e-9).unwrap();
    assert!(!r.passed);
    assert!(r.max_violation_offsupport.is_infinite());
    assert_eq!(r.worst_location.as_deref(), Some("x = 1, y = -"));
}

#[test]
fn nofeedback_examples() {
    let bsc = PostChannelSpec::post_ab(0.9, 0.9).unwrap();
    let opt = maximize_mi_nofeedback(&bsc, 1, 0, &cfg()).unwrap();
    assert!(opt.input.max_abs_diff(&SequencePmf::uniform(2, 1)) < 1e-9);
    let ub = upper_bound(&PostChannelSpec::post_alpha(0.5).unwrap(), 4, &cfg()).unwrap();
    assert!(ub.per_symbol_bits >= Z_HALF - 1e-9);
    assert!(ub.certified_bits >= ub.per_symbol_bits);
}

#[test]
fn feedback_dominates_nofeedback() {
    for spec in [PostChannelSpec::post_ab(0.8, 0.6).unwrap(), PostChannelSpec::mary(1).unwrap()] {
        for n in 1..=3 {
            for s0 in 0..2 {
                let fb = maximize_di_feedback(&spec, n, s0, &cfg()).unwrap();
                let nf = maximize_mi_nofeedback(&spec, n, s0, &cfg()).unwrap();
                assert!(fb.value_bits >= nf.value_bits - 1e-9, "{} n {n} s0 {s0}", spec.label());
            }
        }
    }
}

#[test]
fn output_matching_examples() {
    let spec = PostChannelSpec::post_alpha(0.5).unwrap();
    let r = corollary_output_match(&spec, 1, 0).unwrap();
    assert!(r.passed && (r.input.values()[0] - 0.6).abs() < 1e-12);
    for s0 in 0..2 {
        let r = corollary_output_match(&spec, 10, s0).unwrap();
        assert!(r.passed, "{}", r.to_text());
        assert!(r.input.max_abs_diff(&recursive_input_alpha(0.5, 10, s0).unwrap()) < 1e-10);
    }
    let ab = PostChannelSpec::post_ab(0.9, 0.7).unwrap();
    let r = corollary_output_match(&ab, 8, 0).unwrap();
    assert!(r.passed && r.feedback_optimum_positive);
    assert!(r.input.max_abs_diff(&recursive_input_ab(0.9, 0.7, 8, 0).unwrap()) < 1e-10);
    assert!(corollary_output_match(&PostChannelSpec::mary(2).unwrap(), 2, 0).is_err());
    assert!(corollary_output_match(&PostChannelSpec::post_ab(0.3, 0.7).unwrap(), 2, 0).is_err());
}
