//! Assignment probabilities and Gumbel-Max / Gumbel-Softmax draws.

use nalgebra::{DMatrix, Matrix2xX};
use rand::distr::Open01;
use rand::Rng;

use crate::dataset::{Dataset, FeatureMask};
use crate::error::{Error, Result};

/// Every probability is kept inside `[PI_FLOOR, 1 - PI_FLOOR]`.
pub const PI_FLOOR: f64 = 1e-6;
const PI_CEIL: f64 = 1.0 - PI_FLOOR;
const COLUMN_SUM_TOLERANCE: f64 = 1e-12;

/// The `2 × K` matrix `π`: row 0 holds `π_1k` (not assigned), row 1 holds
/// `π_2k` (assigned).
#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentProbabilities {
    pi: Matrix2xX<f64>,
}

impl AssignmentProbabilities {
    pub fn new(pi: Matrix2xX<f64>) -> Result<Self> {
        if pi.ncols() == 0 {
            return Err(Error::InvalidProbabilities("no features".into()));
        }
        for (k, col) in pi.column_iter().enumerate() {
            if col.iter().any(|&p| !(PI_FLOOR..=PI_CEIL).contains(&p)) {
                return Err(Error::InvalidProbabilities(format!(
                    "column {k} = ({}, {}) leaves [{PI_FLOOR}, 1 - {PI_FLOOR}]",
                    col[0], col[1]
                )));
            }
            if (col[0] + col[1] - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                return Err(Error::InvalidProbabilities(format!("column {k} does not sum to 1")));
            }
        }
        Ok(AssignmentProbabilities { pi })
    }

    /// `π_2k = c`, `π_1k = 1 - c` for every feature.
    pub fn uniform(k: usize, c: f64) -> Result<Self> {
        let mut pi = Matrix2xX::zeros(k);
        for mut col in pi.column_iter_mut() {
            col[0] = 1.0 - c;
            col[1] = c;
        }
        Self::new(pi)
    }

    /// Maps an arbitrary `2 × K` matrix back to the valid set: clamp the
    /// entries, renormalize each column, and clamp once more so rounding
    /// cannot push an entry past the bounds.
    pub fn project(raw: &Matrix2xX<f64>) -> Self {
        let mut pi = Matrix2xX::zeros(raw.ncols());
        for (k, col) in raw.column_iter().enumerate() {
            let a = sanitize(col[0]);
            let b = sanitize(col[1]);
            let assigned = (b / (a + b)).clamp(PI_FLOOR, PI_CEIL);
            pi[(1, k)] = assigned;
            pi[(0, k)] = (1.0 - assigned).clamp(PI_FLOOR, PI_CEIL);
        }
        AssignmentProbabilities { pi }
    }

    /// One projected gradient-descent step `π ← Π(π − α ∇)`.
    pub fn gradient_step(&self, gradient: &Matrix2xX<f64>, learning_rate: f64) -> Self {
        Self::project(&(&self.pi - gradient * learning_rate))
    }

    pub fn k(&self) -> usize {
        self.pi.ncols()
    }

    pub fn matrix(&self) -> &Matrix2xX<f64> {
        &self.pi
    }

    /// `π_2k`
    pub fn assigned(&self, k: usize) -> f64 {
        self.pi[(1, k)]
    }

    /// `π_1k`
    pub fn not_assigned(&self, k: usize) -> f64 {
        self.pi[(0, k)]
    }

    pub fn assigned_row(&self) -> Vec<f64> {
        self.pi.row(1).iter().copied().collect()
    }
}

fn sanitize(p: f64) -> f64 {
    if p.is_nan() {
        0.5
    } else {
        p.clamp(PI_FLOOR, PI_CEIL)
    }
}

/// One Gumbel draw per feature and class, with the hard one-hot sample and
/// its softmax relaxation computed from the same noise.
#[derive(Clone, Debug, PartialEq)]
pub struct GumbelDraw {
    pub g: Matrix2xX<f64>,
    pub z_hard: Matrix2xX<f64>,
    pub z_soft: Matrix2xX<f64>,
    pub tau: f64,
}

impl GumbelDraw {
    /// Builds the draw for fixed noise `g`. `pi` may be any positive matrix;
    /// validity is not required here so finite-difference probes can perturb
    /// single entries.
    pub fn from_noise(pi: &Matrix2xX<f64>, g: Matrix2xX<f64>, tau: f64) -> Self {
        assert!(tau > 0.0, "temperature must be positive");
        assert_eq!(pi.ncols(), g.ncols());
        let k = pi.ncols();
        let mut z_hard = Matrix2xX::zeros(k);
        let mut z_soft = Matrix2xX::zeros(k);
        for c in 0..k {
            let logit_1 = pi[(0, c)].ln() + g[(0, c)];
            let logit_2 = pi[(1, c)].ln() + g[(1, c)];
            // argmax with ties going to the first class
            let hot = usize::from(logit_2 > logit_1);
            z_hard[(hot, c)] = 1.0;
            let d = (logit_2 - logit_1) / tau;
            z_soft[(1, c)] = logistic(d);
            z_soft[(0, c)] = logistic(-d);
        }
        GumbelDraw {
            g,
            z_hard,
            z_soft,
            tau,
        }
    }

    pub fn k(&self) -> usize {
        self.g.ncols()
    }

    /// `ψ(k) = [0 1] Z_·k`
    pub fn psi(&self, k: usize) -> bool {
        self.z_hard[(1, k)] == 1.0
    }

    pub fn assignment(&self) -> Vec<bool> {
        (0..self.k()).map(|k| self.psi(k)).collect()
    }

    /// The hard assignment as a mask; [`Error::AllZeroMask`] when nothing is assigned.
    pub fn mask(&self) -> Result<FeatureMask> {
        FeatureMask::new(self.assignment())
    }

    /// `z̃_1k z̃_2k`, the shared factor of the softmax partials.
    pub fn soft_product(&self, k: usize) -> f64 {
        self.z_soft[(0, k)] * self.z_soft[(1, k)]
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Standard Gumbel(0, 1) noise, `-ln(-ln U)` with `U` uniform on the open interval.
pub fn sample_gumbel<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Matrix2xX<f64> {
    Matrix2xX::from_fn(k, |_, _| {
        let u: f64 = rng.sample(Open01);
        -(-u.ln()).ln()
    })
}

/// Samples `Z` from the categorical distribution `π` via the Gumbel-Max trick
/// and its Gumbel-Softmax relaxation at temperature `tau`.
pub fn draw_gumbel<R: Rng + ?Sized>(pi: &AssignmentProbabilities, tau: f64, rng: &mut R) -> GumbelDraw {
    let g = sample_gumbel(rng, pi.k());
    GumbelDraw::from_noise(pi.matrix(), g, tau)
}

/// Applies a draw to the data: the mask `ψ` and the prediction-feature matrix
/// `X^(p)` whose column `k` equals `X^(s)_·k` when assigned and zero otherwise.
pub fn feature_assign(data: &Dataset, draw: &GumbelDraw) -> Result<(FeatureMask, DMatrix<f64>)> {
    if draw.k() != data.k() {
        return Err(Error::InvalidMask(format!(
            "draw covers {} features, data has {}",
            draw.k(),
            data.k()
        )));
    }
    let mask = draw.mask()?;
    let mut x_pred = data.x_sel().clone();
    for k in 0..data.k() {
        if !mask.is_assigned(k) {
            x_pred.column_mut(k).fill(0.0);
        }
    }
    Ok((mask, x_pred))
}
