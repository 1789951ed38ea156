use heckfa::eval::render::{benchmark_text, reports_csv};
use heckfa::eval::{benchmark, paired_t_test, run_each, run_methods, BenchmarkConfig, FittedModel, Scenario};
use heckfa::pipeline::{synthesize, synthesize_population, SyntheticSpec};
use heckfa::selection::adjusted_r2;
use heckfa::{Method, RhoRange, RunConfig};
use proptest::prelude::*;

fn scenario(seed: u64) -> Scenario {
    let spec = SyntheticSpec::standard(1500, 5, 0.5);
    let (train, _) = synthesize(&spec, seed).unwrap();
    let test = synthesize_population(&spec, seed + 500).unwrap();
    Scenario::new(train, test, true).unwrap()
}

fn small_config(seed: u64) -> RunConfig {
    let mut c = RunConfig::new(RhoRange::new(0.1, 0.9).unwrap(), seed);
    c.epochs = 200;
    c.samples = 100;
    c
}

#[test]
fn every_report_reads_the_holdout_once_and_cross_checks_r2_adj() {
    let sc = scenario(3);
    let runs: Vec<_> = run_each(&sc, &Method::ALL, &small_config(3))
        .unwrap()
        .into_iter()
        .filter_map(|(_, r)| r.ok())
        .collect();
    assert!(runs.len() >= 2);
    assert_eq!(sc.test.reads(), runs.len());
    let m = sc.train.m();
    for run in &runs {
        let r = &run.report;
        let r2 = match &run.model {
            FittedModel::Naive(f) => f.r2,
            FittedModel::Heckman(f) => f.r2,
        };
        assert_eq!(r.r2_adj, adjusted_r2(r2, m, r.mask.j_count()).unwrap());
        assert!(r.runtime_seconds >= 0.0);
        assert!(r.test_mse.is_finite() && r.test_mse > 0.0);
        assert_eq!(r.rho_hat.is_none(), r.method == Method::Naive);
    }
}

#[test]
fn naive_uses_every_feature_and_reports_no_rho() {
    let sc = scenario(4);
    let runs = run_methods(&sc, &[Method::Naive], &small_config(4)).unwrap();
    let r = &runs[0];
    assert_eq!(r.report.mask.j_count(), 5);
    assert!(r.report.rho_hat.is_none() && r.report.accepted_count.is_none());
    assert!(r.pi.is_none() && r.trace.is_none());
}

#[test]
fn benchmark_is_deterministic_and_shaped() {
    let sc = scenario(5);
    let mut bc = BenchmarkConfig::new(small_config(5), Method::ALL.to_vec());
    bc.repeats = 10;
    bc.grid_c = vec![0.25, 0.5, 0.75];
    bc.grid_t = vec![20, 50, 100];
    bc.grid_b = vec![10, 50];
    let a = benchmark(&sc, &bc).unwrap();
    let b = benchmark(&sc, &bc).unwrap();
    let names = sc.train.feature_names().to_vec();
    assert_eq!(benchmark_text(&a, &names), benchmark_text(&b, &names));
    assert_eq!(reports_csv(&a.reports), reports_csv(&b.reports));
    assert_eq!(a.sensitivity.len(), 9);
    assert_eq!(a.runtime_grid.len(), 6);
    assert_eq!(a.reports.len() + a.failures.len(), 4);
    assert!(a.repeat_test_mse.iter().all(|(_, v)| v.len() == 10));
    // one comparison of Heckman-FA against each other method
    assert_eq!(a.comparisons.len(), 3);
    for c in &a.comparisons {
        assert!(c.pairs <= 10);
        if let Ok(t) = &c.result {
            assert!((0.0..=1.0).contains(&t.p_value));
            assert_eq!(t.pairs, c.pairs);
        }
    }
}

proptest! {
    #[test]
    fn t_statistic_flips_sign_with_the_arguments(
        pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..30)
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        match (paired_t_test(&a, &b), paired_t_test(&b, &a)) {
            (Ok(x), Ok(y)) => {
                prop_assert!((x.t_statistic + y.t_statistic).abs() <= 1e-9 * (1.0 + x.t_statistic.abs()));
                prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&x.p_value));
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "asymmetric failure"),
        }
    }
}
