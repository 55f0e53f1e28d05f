//! End-to-end benchmark behaviour on small synthetic traces.

use sls_core::toybench::{shuffled_labels, two_blobs, RetrainPreset, DEFAULT_HOLDOUT};
use sls_core::toybench::run_benchmark_with;
use sls_core::{gen_synthetic_trace, run_benchmark, train_probe, LrSchedule, Strategy, SyntheticSpec, TsneConfig};

fn config() -> TsneConfig {
    TsneConfig { perplexity: 20.0, ..TsneConfig::default() }
}

/// Six layers, 200 samples, 5 classes, well separated from the bottom up.
fn small_rising() -> SyntheticSpec {
    SyntheticSpec::linear_ramp(6, 200, 5, 4.0, 8.0, 11)
}

#[test]
fn shuffled_labels_probe_at_chance() {
    let (x, labels) = two_blobs(200, 6, 100.0, 1.0, 3);
    let labels = shuffled_labels(&labels, 4);
    let r = train_probe(x.view(), &labels, &LrSchedule::default(), 5, DEFAULT_HOLDOUT).unwrap();
    assert!((r.accuracy - 0.5).abs() <= 0.15, "{}", r.accuracy);
    let again = train_probe(x.view(), &labels, &LrSchedule::default(), 5, DEFAULT_HOLDOUT).unwrap();
    assert_eq!(r, again);
}

#[test]
fn rising_separation_gives_a_rising_profile() {
    let spec = SyntheticSpec {
        n_layers: 6,
        separation_curve: vec![0.5, 1.0, 2.0, 4.0, 8.0, 8.0],
        ..SyntheticSpec::monotone()
    };
    let trace = gen_synthetic_trace(&spec).unwrap();
    let profile = sls_core::evaluate_all_layers(&trace, &TsneConfig::default(), 1).unwrap();
    for w in profile.values.windows(2) {
        assert!(w[1] - w[0] >= -0.05, "{:?}", profile.values);
    }
    assert!(profile.values[5] > profile.values[0] + 0.5);
}

#[test]
fn zero_alpha_keeps_only_the_first_layer() {
    let trace = gen_synthetic_trace(&small_rising()).unwrap();
    let report = run_benchmark(&trace, &[0.0], &config(), &LrSchedule::default(), Strategy::OneShot).unwrap();
    assert!(report.profile.values.iter().all(|&v| v > 0.0), "{:?}", report.profile.values);
    assert_eq!(report.outcomes[0].plan.keep_layers, 1);
    assert_eq!(report.rows.iter().filter(|r| r.kept[0]).count(), 1);
}

#[test]
fn report_shape_and_alpha_order() {
    let trace = gen_synthetic_trace(&small_rising()).unwrap();
    let alphas = [0.1, 0.3, 0.5];
    let report = run_benchmark(&trace, &alphas, &config(), &LrSchedule::default(), Strategy::OneShot).unwrap();

    let keeps: Vec<usize> = report.outcomes.iter().map(|o| o.plan.keep_layers).collect();
    assert!(keeps.windows(2).all(|w| w[0] <= w[1]), "{keeps:?}");

    let csv = report.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "layer,sc_index,probe_accuracy,kept@0.1,kept@0.3,kept@0.5");
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 6));
    for (row, outcome) in [(0, 0), (1, 1), (2, 2)] {
        let kept = report.rows.iter().filter(|r| r.kept[row]).count();
        assert_eq!(kept, report.outcomes[outcome].plan.keep_layers);
    }
    // one-shot retrains exactly once whenever something is pruned
    for o in &report.outcomes {
        let expected = usize::from(o.plan.keep_layers < 6);
        assert_eq!(o.retrain.trajectory.len(), expected);
    }
}

#[test]
fn strategies_reach_the_same_depth() {
    let trace = gen_synthetic_trace(&small_rising()).unwrap();
    let alphas = [0.8, 0.95];
    let one = run_benchmark(&trace, &alphas, &config(), &LrSchedule::default(), Strategy::OneShot).unwrap();
    let many = run_benchmark(&trace, &alphas, &config(), &LrSchedule::default(), Strategy::Iterative).unwrap();
    assert!(many.outcomes.iter().any(|o| o.plan.keep_layers < 5), "plans should remove several layers");
    for (a, b) in one.outcomes.iter().zip(&many.outcomes) {
        assert_eq!(a.retrain.final_depth, b.retrain.final_depth);
        assert_eq!(a.plan.keep_layers, b.plan.keep_layers);
        let removed = 6 - b.plan.keep_layers;
        assert_eq!(b.retrain.trajectory.len(), removed);
        let depths: Vec<usize> = b.retrain.trajectory.iter().map(|s| s.depth).collect();
        assert!(depths.windows(2).all(|w| w[0] == w[1] + 1), "{depths:?}");
    }
}

#[test]
fn retrain_presets_run() {
    let trace = gen_synthetic_trace(&small_rising()).unwrap();
    for preset in [RetrainPreset::OneCycle, RetrainPreset::FromScratch, RetrainPreset::FineTune] {
        let r = run_benchmark_with(&trace, &[0.9], &config(), &LrSchedule::default(), Strategy::OneShot, preset).unwrap();
        assert_eq!(r.preset, preset);
        assert!((0.0..=1.0).contains(&r.outcomes[0].retrain.accuracy));
    }
}

#[test]
fn benchmark_is_deterministic() {
    let spec = SyntheticSpec::linear_ramp(3, 60, 3, 2.0, 6.0, 5);
    let trace = gen_synthetic_trace(&spec).unwrap();
    let cfg = TsneConfig { perplexity: 10.0, ..TsneConfig::default() };
    let a = run_benchmark(&trace, &[0.3], &cfg, &LrSchedule::default(), Strategy::Iterative).unwrap();
    let b = run_benchmark(&trace, &[0.3], &cfg, &LrSchedule::default(), Strategy::Iterative).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn empty_alphas_rejected() {
    let trace = gen_synthetic_trace(&SyntheticSpec::linear_ramp(2, 20, 2, 1.0, 2.0, 1)).unwrap();
    assert!(run_benchmark(&trace, &[], &config(), &LrSchedule::default(), Strategy::OneShot).is_err());
}
