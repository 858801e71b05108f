//! Smoothing kernels used as acceptance probabilities and densities.
//!
//! A kernel is accepted-with-probability `K(u / eps) / K(0)`: the raw scaled
//! kernel `eps^-d K(u / eps)` is a density, not a probability, and exceeds
//! one for small tolerances. Dividing by the mode makes the maximum
//! acceptance probability exactly one and leaves the accepted-sample
//! distribution unchanged (the normalization cancels), which is the standard
//! accept-reject convention.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelFamily {
    Gaussian,
    Uniform,
    Epanechnikov,
}

/// A kernel family with tolerance `eps` and positive-definite scaling matrix
/// `lambda` defining the distance `||u||^2 = u' lambda u` (identity when not
/// given).
#[derive(Clone, Debug)]
pub struct KernelSpec {
    family: KernelFamily,
    tolerance: f64,
    scaling: Option<ScaledNorm>,
}

#[derive(Clone, Debug)]
struct ScaledNorm {
    lambda: DMatrix<f64>,
    sqrt_det: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) || !tolerance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "kernel tolerance must be positive and finite, got {tolerance}"
            )));
        }
        Ok(Self {
            family,
            tolerance,
            scaling: None,
        })
    }

    /// Kernel with an explicit scaling matrix; `lambda` must be symmetric
    /// positive definite.
    pub fn with_scaling(family: KernelFamily, tolerance: f64, lambda: DMatrix<f64>) -> Result<Self> {
        let mut spec = Self::new(family, tolerance)?;
        if lambda.nrows() != lambda.ncols() {
            return Err(Error::InvalidConfig("scaling matrix must be square".into()));
        }
        let sym_err: f64 = (&lambda - lambda.transpose()).abs().max();
        if sym_err > 1e-10 * (1.0 + lambda.abs().max()) {
            return Err(Error::InvalidConfig("scaling matrix must be symmetric".into()));
        }
        let chol = Cholesky::new(lambda.clone())
            .ok_or_else(|| Error::InvalidConfig("scaling matrix must be positive definite".into()))?;
        let sqrt_det = chol.l().diagonal().iter().product();
        spec.scaling = Some(ScaledNorm { lambda, sqrt_det });
        Ok(spec)
    }

    /// Diagonal scaling from per-component scales: `lambda = diag(1/s_j^2)`,
    /// so the distance is the Euclidean norm of componentwise standardized
    /// differences.
    pub fn with_component_scales(
        family: KernelFamily,
        tolerance: f64,
        scales: &[f64],
    ) -> Result<Self> {
        if scales.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig(
                "component scales must be positive and finite".into(),
            ));
        }
        let d = scales.len();
        let mut lambda = DMatrix::zeros(d, d);
        for (j, s) in scales.iter().enumerate() {
            lambda[(j, j)] = 1.0 / (s * s);
        }
        Self::with_scaling(family, tolerance, lambda)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Same kernel at a different tolerance.
    pub fn with_tolerance(&self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) || !tolerance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "kernel tolerance must be positive and finite, got {tolerance}"
            )));
        }
        Ok(Self {
            family: self.family,
            tolerance,
            scaling: self.scaling.clone(),
        })
    }

    /// The scaled norm `sqrt(u' lambda u)`.
    pub fn scaled_norm(&self, u: &[f64]) -> Result<f64> {
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel argument".into()));
        }
        match &self.scaling {
            None => Ok(u.iter().map(|v| v * v).sum::<f64>().sqrt()),
            Some(sn) => {
                if sn.lambda.nrows() != u.len() {
                    return Err(Error::DimensionMismatch {
                        expected: sn.lambda.nrows(),
                        got: u.len(),
                        context: "kernel scaling".into(),
                    });
                }
                let v = DVector::from_column_slice(u);
                Ok((&v.transpose() * &sn.lambda * &v)[(0, 0)].max(0.0).sqrt())
            }
        }
    }

    /// Acceptance probability `K(u / eps) / K(0)` in [0, 1].
    pub fn accept_probability(&self, u: &[f64]) -> Result<f64> {
        let r = self.scaled_norm(u)? / self.tolerance;
        Ok(self.accept_probability_of_scaled_norm(r))
    }

    /// Acceptance probability as a function of `||u|| / eps` alone.
    pub fn accept_probability_of_scaled_norm(&self, r: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-0.5 * r * r).exp(),
            KernelFamily::Uniform => {
                if r <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::Epanechnikov => (1.0 - r * r).max(0.0),
        }
    }

    /// The kernel as a probability density on R^d: `eps^-d K(u / eps)` with
    /// `K` normalized to integrate to one under the scaled norm.
    pub fn density(&self, u: &[f64]) -> Result<f64> {
        let d = u.len();
        let r = self.scaled_norm(u)? / self.tolerance;
        let sqrt_det = self.scaling.as_ref().map_or(1.0, |s| s.sqrt_det);
        let vd = unit_ball_volume(d);
        let base = match self.family {
            KernelFamily::Gaussian => {
                let c = sqrt_det / (2.0 * std::f64::consts::PI).powf(d as f64 / 2.0);
                c * (-0.5 * r * r).exp()
            }
            KernelFamily::Uniform => {
                if r <= 1.0 {
                    sqrt_det / vd
                } else {
                    0.0
                }
            }
            KernelFamily::Epanechnikov => {
                // integral of (1 - r^2)+ over the unit ball is 2 V_d / (d + 2)
                let c = sqrt_det * (d as f64 + 2.0) / (2.0 * vd);
                c * (1.0 - r * r).max(0.0)
            }
        };
        Ok(base / self.tolerance.powi(d as i32))
    }
}

/// Volume of the d-dimensional Euclidean unit ball.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}
