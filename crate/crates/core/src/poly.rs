//! Ordinary polynomials in a real variable and their least-squares fits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial with ascending coefficients `c0 + c1·t + … + cn·tⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * t + k as f64 * c)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }
}

/// Least-squares fit of a degree-`degree` polynomial to `(t, y)` samples.
///
/// With `through_origin` the constant term is fixed at zero. The fit runs on
/// `t / max|t|` for conditioning and is mapped back to the raw variable.
pub fn fit_polynomial(t: &[f64], y: &[f64], degree: usize, through_origin: bool) -> Result<Polynomial> {
    if t.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: t.len(),
            right: y.len(),
        });
    }
    let first = usize::from(through_origin);
    let unknowns = degree + 1 - first;
    if t.len() < unknowns {
        return Err(Error::InsufficientPoints {
            needed: unknowns,
            have: t.len(),
        });
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite sample".into()));
    }
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Fit("all abscissae are zero".into()));
    }
    let a = DMatrix::from_fn(t.len(), unknowns, |i, j| (t[i] / scale).powi((j + first) as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::Fit(format!("least squares solve failed: {e}")))?;
    let mut coeffs = vec![0.0; degree + 1];
    for (j, c) in sol.iter().enumerate() {
        let k = j + first;
        coeffs[k] = c / scale.powi(k as i32);
    }
    Ok(Polynomial::new(coeffs))
}
