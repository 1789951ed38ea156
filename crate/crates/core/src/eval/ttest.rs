use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    pub mean_diff: f64,
    /// Sample standard deviation of the differences.
    pub std_diff: f64,
    pub t_statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub pairs: usize,
}

/// Paired t-test on `a − b` with `pairs − 1` degrees of freedom.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTestResult> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "paired t-test needs two equal-length samples of at least 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("paired t-test inputs must be finite".into()));
    }
    let n = a.len();
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if d.iter().all(|&v| v == d[0]) || sd == 0.0 {
        return Err(Error::ZeroVarianceDifferences { mean_diff: mean });
    }
    let t = mean / (sd / (n as f64).sqrt());
    Ok(PairedTestResult {
        mean_diff: mean,
        std_diff: sd,
        t_statistic: t,
        p_value: two_sided_p(t, (n - 1) as f64),
        pairs: n,
    })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn two_sided_p(t: f64, df: f64) -> f64 {
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hand_computed_differences() {
        let r = paired_t_test(&[0.0, 0.0, 0.0, 1.0], &[1.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(r.mean_diff, -0.5);
        assert_abs_diff_eq!(r.std_diff, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.t_statistic, -1.0, epsilon = 1e-15);
        // two-sided p of |t| = 1 at 3 df
        assert_abs_diff_eq!(r.p_value, 0.391_002_218_955_770_5, epsilon = 1e-10);
    }

    #[test]
    fn identical_samples_flagged() {
        let a = [1.0, 2.0, 3.0];
        assert!(matches!(paired_t_test(&a, &a), Err(Error::ZeroVarianceDifferences { mean_diff }) if mean_diff == 0.0));
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[2.0]).is_err());
    }

    #[test]
    fn known_quantiles() {
        // t_{0.975, 9} = 2.2621571628540993
        assert_abs_diff_eq!(two_sided_p(2.262_157_162_854_099_3, 9.0), 0.05, epsilon = 1e-10);
        // t_{0.995, 2} = 9.92484320091807
        assert_abs_diff_eq!(two_sided_p(9.924_843_200_918_07, 2.0), 0.01, epsilon = 1e-10);
        assert_eq!(two_sided_p(0.0, 5.0), 1.0);
    }

    proptest::proptest! {
        #[test]
        fn antisymmetric(a in proptest::collection::vec(-10.0f64..10.0, 2..20), shift in 0.1f64..3.0) {
            let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v * 0.7 + shift + i as f64 * 0.13).collect();
            if let (Ok(x), Ok(y)) = (paired_t_test(&a, &b), paired_t_test(&b, &a)) {
                proptest::prop_assert!((x.t_statistic + y.t_statistic).abs() < 1e-12 * (1.0 + x.t_statistic.abs()));
                proptest::prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
                proptest::prop_assert!((0.0..=1.0).contains(&x.p_value));
            }
        }
    }
}
