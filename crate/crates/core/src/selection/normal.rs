//! Standard normal density, distribution, and the inverse Mills ratio.

use std::f64::consts::SQRT_2;

use libm::erfc;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Below this index the ratio is evaluated by continued fraction instead of
/// `φ/Φ`, whose numerator and denominator both head to zero.
const CONTINUED_FRACTION_BELOW: f64 = -10.0;
const CONTINUED_FRACTION_TERMS: u32 = 60;

#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `Φ(x)` through the complementary error function, accurate in relative
/// terms deep into the lower tail.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Inverse Mills ratio `λ(a) = φ(-a) / Φ(a)` for a selection index `a`.
///
/// Strictly positive and strictly decreasing. For `a <= -10` it uses Laplace's
/// continued fraction for the Mills ratio, `λ = x + 1/(x + 2/(x + 3/(x + …)))`
/// with `x = -a`, which converges quickly there and never forms `0/0`.
pub fn inverse_mills(index: f64) -> f64 {
    if index > CONTINUED_FRACTION_BELOW {
        // φ is even, so φ(-a) = φ(a).
        std_normal_pdf(index) / std_normal_cdf(index)
    } else {
        let x = -index;
        let mut tail = x;
        for k in (1..=CONTINUED_FRACTION_TERMS).rev() {
            tail = x + f64::from(k) / tail;
        }
        tail
    }
}
