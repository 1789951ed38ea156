//! Dense least squares via Householder QR.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Designs whose 2-norm condition number exceeds this are rejected as singular.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub coefficients: DVector<f64>,
    pub condition_number: f64,
}

/// 2-norm condition number of a tall matrix, computed from the singular
/// values of its triangular QR factor.
pub fn condition_number(design: &DMatrix<f64>) -> f64 {
    if design.nrows() < design.ncols() || design.ncols() == 0 {
        return f64::INFINITY;
    }
    let r = design.clone().qr().r();
    condition_of_triangular(&r)
}

fn condition_of_triangular(r: &DMatrix<f64>) -> f64 {
    let sv = r.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 || !min.is_finite() || !max.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Minimizes `||y - X b||²`. Fails with [`Error::SingularDesign`] when the
/// design is rank deficient or its condition number exceeds
/// [`MAX_CONDITION_NUMBER`].
pub fn least_squares(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares> {
    let (m, p) = design.shape();
    assert_eq!(m, y.len(), "design rows must match response length");
    if m < p || p == 0 {
        return Err(Error::SingularDesign {
            condition_number: f64::INFINITY,
        });
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let condition_number = condition_of_triangular(&r);
    if !(condition_number <= MAX_CONDITION_NUMBER) {
        return Err(Error::SingularDesign { condition_number });
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, p).into_owned();
    let coefficients = r
        .solve_upper_triangular(&rhs)
        .ok_or(Error::SingularDesign { condition_number })?;
    Ok(LeastSquares {
        coefficients,
        condition_number,
    })
}
