//! SLSF round trips, byte layout and stratified subsampling.

use ndarray::Array2;
use proptest::prelude::*;
use sls_core::trace::{parse_trace, MAGIC};
use sls_core::{load_trace_file, subsample_trace, write_trace, write_trace_file, FeatureTrace};

fn arb_trace() -> impl Strategy<Value = FeatureTrace> {
    (1usize..4, 2u32..5, 1usize..6, "[a-z0-9_-]{0,12}").prop_flat_map(|(n_layers, n_classes, dim, name)| {
        let n_classes_usize = n_classes as usize;
        (n_classes_usize..40).prop_flat_map(move |n_samples| {
            let name = name.clone();
            (
                proptest::collection::vec(proptest::collection::vec(-1e6f32..1e6, n_samples * dim), n_layers),
                proptest::collection::vec(0..n_classes, n_samples),
            )
                .prop_map(move |(data, mut labels)| {
                    // every class must appear
                    for c in 0..n_classes {
                        labels[c as usize] = c;
                    }
                    let layers = data
                        .into_iter()
                        .map(|v| Array2::from_shape_vec((n_samples, dim), v).unwrap())
                        .collect();
                    FeatureTrace::new(name.clone(), n_classes, layers, labels).unwrap()
                })
        })
    })
}

/// The header and body, laid out by hand.
fn expected_bytes(trace: &FeatureTrace) -> Vec<u8> {
    let mut out = b"SLSF".to_vec();
    for v in [
        1u32,
        trace.layers.len() as u32,
        trace.labels.len() as u32,
        trace.layers[0].ncols() as u32,
        trace.n_classes,
        trace.dataset_name.len() as u32,
    ] {
        out.extend(v.to_le_bytes());
    }
    out.extend(trace.dataset_name.as_bytes());
    for layer in &trace.layers {
        for row in layer.rows() {
            for v in row {
                out.extend(v.to_le_bytes());
            }
        }
    }
    for l in &trace.labels {
        out.extend(l.to_le_bytes());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_is_exact(trace in arb_trace()) {
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        prop_assert_eq!(&buf, &expected_bytes(&trace));
        let back = parse_trace(&buf).unwrap();
        prop_assert_eq!(back, trace);
    }

    #[test]
    fn any_truncation_is_rejected(trace in arb_trace(), cut in 0.0..1.0f64) {
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let keep = ((buf.len() as f64) * cut) as usize;
        prop_assert!(parse_trace(&buf[..keep]).is_err());
    }

    #[test]
    fn subsample_is_valid_and_deterministic(trace in arb_trace(), budget in 0usize..40, seed in any::<u64>()) {
        let budget = budget.max(trace.n_classes as usize);
        let a = subsample_trace(&trace, budget, seed).unwrap();
        let b = subsample_trace(&trace, budget, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.labels.len(), budget.min(trace.labels.len()));
        prop_assert!(a.validate().is_ok());
        prop_assert_eq!(a.layers.len(), trace.layers.len());
    }
}

#[test]
fn file_round_trip() {
    let trace = FeatureTrace::new(
        "file",
        2,
        vec![Array2::from_shape_vec((3, 2), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap()],
        vec![0, 1, 1],
    )
    .unwrap();
    let dir = std::env::temp_dir().join(format!("slsf-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.slsf");
    write_trace_file(&trace, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], MAGIC);
    assert_eq!(bytes.len(), 4 + 24 + 4 + 3 * 2 * 4 + 3 * 4);
    assert_eq!(load_trace_file(&path).unwrap(), trace);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn subsample_keeps_class_proportions() {
    // 90 of class 0, 10 of class 1, keep 20: one each, then 18 spare slots split
    // 89 : 9 → 16.35 + 1.65, the larger remainder rounds class 1 up → 17 + 3
    let labels: Vec<u32> = (0..100).map(|i| u32::from(i >= 90)).collect();
    let layer = Array2::from_shape_fn((100, 1), |(i, _)| i as f32);
    let trace = FeatureTrace::new("skew", 2, vec![layer], labels).unwrap();
    let sub = subsample_trace(&trace, 20, 1).unwrap();
    assert_eq!(sub.labels.iter().filter(|&&l| l == 1).count(), 3);
    // rows keep their original order and stay paired with their labels
    let rows: Vec<f32> = sub.layers[0].column(0).to_vec();
    assert!(rows.windows(2).all(|w| w[0] < w[1]));
    for (v, l) in rows.iter().zip(&sub.labels) {
        assert_eq!(u32::from(*v >= 90.0), *l);
    }
}
