mod common;

use heckfa::eval::{unseal, Scenario};
use heckfa::pipeline::{
    inject_bias, load_csv, split, standardize, synthesize, synthesize_population, write_csv, BiasRule, Schema,
    SplitSpec, SyntheticSpec,
};
use heckfa::Dataset;
use proptest::prelude::*;

fn schema(k: usize) -> Schema {
    Schema::new("y", common::names(k))
}

#[test]
fn synthetic_file_round_trips() {
    let spec = SyntheticSpec::standard(500, 5, 0.5);
    let (data, _) = synthesize(&spec, 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.csv");
    write_csv(&data, "y", &path).unwrap();
    let loaded = load_csv(&path, &schema(5)).unwrap();
    assert_eq!(loaded.n(), data.n());
    assert_eq!(loaded.m(), data.m());
    // the writer emits rows in original order, so the reader rebuilds the same permutation
    assert_eq!(loaded, data);
}

#[test]
fn written_training_files_hold_no_hidden_outcomes() {
    let spec = SyntheticSpec::standard(400, 4, 0.5);
    let (data, truth) = synthesize(&spec, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.csv");
    write_csv(&data, "y", &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let cells: std::collections::HashSet<&str> = text.split([',', '\n']).collect();
    let hidden = unseal(truth.hidden_outcomes());
    assert_eq!(hidden.len(), data.n() - data.m());
    for v in hidden {
        assert!(!cells.contains(v.to_string().as_str()), "hidden value {v} leaked");
    }
    let sidecar = serde_json::to_string(&truth).unwrap();
    for v in hidden {
        assert!(!sidecar.contains(&v.to_string()));
    }
}

#[test]
fn threshold_rule_keeps_the_tuned_count() {
    let spec = SyntheticSpec::standard(1395, 6, 0.3);
    let full = synthesize_population(&spec, 4).unwrap();
    let mut x1: Vec<f64> = full.x_sel().column(0).iter().copied().collect();
    x1.sort_by(f64::total_cmp);
    let threshold = 0.5 * (x1[975] + x1[976]);
    let rule: BiasRule = format!("x1 < {threshold}").parse().unwrap();
    let (biased, sealed) = inject_bias(&full, &rule).unwrap();
    assert_eq!(biased.n(), 1395);
    assert_eq!(biased.m(), 976);
    assert_eq!(sealed.len(), 1395 - 976);
    for i in 0..biased.m() {
        assert!(biased.x_sel()[(i, 0)] < threshold);
    }
}

#[test]
fn split_then_bias_then_standardize() {
    let spec = SyntheticSpec::standard(1000, 4, 0.5);
    let full = synthesize_population(&spec, 6).unwrap();
    let sp = SplitSpec {
        train_fraction: 0.7,
        seed: 3,
    };
    let rule: BiasRule = "x3 > -0.3".parse().unwrap();
    let scenario = Scenario::from_population(&full, &sp, Some(&rule), true).unwrap();
    assert_eq!(scenario.train.n(), 700);
    assert_eq!(scenario.test.n(), 300);
    assert_eq!(scenario.sealed.len(), scenario.train.n() - scenario.train.m());
    let st = scenario.standardizer.as_ref().unwrap();
    // training columns are standardized over all rows, observed or not
    for k in 0..4 {
        let col = scenario.train.x_sel().column(k);
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        assert!(st.scale[k] > 0.0);
    }
}

#[test]
fn standardizing_twice_is_the_identity() {
    let spec = SyntheticSpec::standard(300, 4, 0.5);
    let (data, _) = synthesize(&spec, 1).unwrap();
    let (once, _) = standardize(&data).unwrap();
    let (twice, st) = standardize(&once).unwrap();
    assert!((once.x_sel() - twice.x_sel()).amax() < 1e-12);
    let back = st.inverse(&twice).unwrap();
    assert!((back.x_sel() - once.x_sel()).amax() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bias_injection_only_hides_outcomes(seed in 0u64..1000, threshold in -1.0f64..1.0) {
        let spec = SyntheticSpec::standard(200, 4, 0.4);
        let full: Dataset = synthesize_population(&spec, seed).unwrap();
        let rule: BiasRule = format!("x2 >= {threshold}").parse().unwrap();
        let (biased, sealed) = inject_bias(&full, &rule).unwrap();
        prop_assert_eq!(biased.n(), full.n());
        prop_assert_eq!(sealed.len(), full.n() - biased.m());
        let hidden = unseal(&sealed);
        for i in 0..biased.n() {
            let orig = biased.row_order()[i];
            for k in 0..4 {
                prop_assert_eq!(biased.x_sel()[(i, k)].to_bits(), full.x_sel()[(orig, k)].to_bits());
            }
            let y = full.y_observed()[orig];
            if i < biased.m() {
                prop_assert_eq!(biased.y_observed()[i].to_bits(), y.to_bits());
            } else {
                prop_assert_eq!(hidden[i - biased.m()].to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn split_is_a_seeded_partition(n in 4usize..300, frac in 0.05f64..0.95, seed in 0u64..1000) {
        let spec = SyntheticSpec::standard(n, 3, 0.0);
        let full = synthesize_population(&spec, seed).unwrap();
        let sp = SplitSpec { train_fraction: frac, seed };
        let Ok((a, b)) = split(&full, &sp) else { return Ok(()); };
        let (a2, b2) = split(&full, &sp).unwrap();
        prop_assert_eq!(&a, &a2);
        prop_assert_eq!(&b, &b2);
        prop_assert_eq!(a.n() + b.n(), n);
        let mut rows: Vec<Vec<u64>> = a.x_sel().row_iter().chain(b.x_sel().row_iter())
            .map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        let mut orig: Vec<Vec<u64>> = full.x_sel().row_iter().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        rows.sort();
        orig.sort();
        prop_assert_eq!(rows, orig);
    }
}
