#![allow(dead_code)]

use heckfa::assignment::{sample_gumbel, AssignmentProbabilities, GumbelDraw};
use heckfa::{Dataset, FeatureMask};
use nalgebra::{DMatrix, Matrix2xX};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

/// A small selection dataset with random coefficients, correlated noise and
/// at least `min_m` observed rows.
pub fn random_dataset(r: &mut ChaCha8Rng, n: usize, k: usize, min_m: usize) -> Dataset {
    loop {
        let x = DMatrix::from_fn(n, k, |_, _| r.sample::<f64, _>(StandardNormal));
        let gamma: Vec<f64> = (0..=k).map(|_| r.random_range(-0.8..0.8)).collect();
        let beta: Vec<f64> = (0..=k).map(|_| r.random_range(-2.0..2.0)).collect();
        let rho: f64 = r.random_range(-0.8..0.8);
        let outcomes: Vec<Option<f64>> = (0..n)
            .map(|i| {
                let z1: f64 = r.sample(StandardNormal);
                let z2: f64 = r.sample(StandardNormal);
                let u_s = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
                let row = |c: &[f64]| c[0] + (0..k).map(|j| c[j + 1] * x[(i, j)]).sum::<f64>();
                (row(&gamma) + u_s > 0.0).then(|| row(&beta) + z1)
            })
            .collect();
        let m = outcomes.iter().filter(|o| o.is_some()).count();
        if m >= min_m && m < n {
            return Dataset::from_rows(x, &outcomes, names(k), Vec::new()).unwrap();
        }
    }
}

/// A random valid probability matrix with entries away from the clamp.
pub fn random_pi(r: &mut ChaCha8Rng, k: usize) -> AssignmentProbabilities {
    let row: Vec<f64> = (0..k).map(|_| r.random_range(0.15..0.85)).collect();
    AssignmentProbabilities::new(Matrix2xX::from_fn(k, |q, c| if q == 1 { row[c] } else { 1.0 - row[c] })).unwrap()
}

/// A Gumbel draw under `pi` whose hard mask assigns at least one feature.
pub fn nonempty_draw(r: &mut ChaCha8Rng, pi: &AssignmentProbabilities, tau: f64) -> (GumbelDraw, FeatureMask) {
    loop {
        let draw = GumbelDraw::from_noise(pi.matrix(), sample_gumbel(r, pi.k()), tau);
        if let Ok(mask) = draw.mask() {
            return (draw, mask);
        }
    }
}
