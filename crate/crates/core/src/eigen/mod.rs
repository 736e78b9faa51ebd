//! Ground-state eigensolvers: sparse Lanczos for production labels and a
//! dense cyclic-Jacobi solver as an independent small-system oracle.

mod jacobi;
mod lanczos;
mod tridiag;

pub use jacobi::dense_ground_state;
pub use lanczos::{lanczos_ground_state, LanczosSettings};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Real coefficient vector over the canonical configuration basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Wavefunction {
    coefficients: Vec<f64>,
}

impl Wavefunction {
    /// Validates finiteness and power-of-two length.
    pub fn from_coefficients(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || !coefficients.len().is_power_of_two() {
            return Err(Error::ShapeMismatch(format!(
                "wavefunction length {} is not a power of two",
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::ShapeMismatch(
                "wavefunction has non-finite coefficients".into(),
            ));
        }
        Ok(Wavefunction { coefficients })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coefficients)
    }

    pub fn dot(&self, other: &Wavefunction) -> f64 {
        dot(&self.coefficients, &other.coefficients)
    }

    /// Signed cosine similarity `<a, b> / (|a| |b|)`.
    pub fn cosine_similarity(&self, other: &Wavefunction) -> f64 {
        self.dot(other) / (self.norm() * other.norm())
    }
}

impl TryFrom<Vec<f64>> for Wavefunction {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Wavefunction::from_coefficients(v)
    }
}

impl From<Wavefunction> for Vec<f64> {
    fn from(w: Wavefunction) -> Vec<f64> {
        w.coefficients
    }
}

/// Ground-state eigenpair with its achieved residual `|H psi - E psi|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub energy: f64,
    pub state: Wavefunction,
    pub residual: f64,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sign that makes the maximum-magnitude entry positive; ties broken by the
/// lowest index (the first entry attaining the maximum decides).
pub(crate) fn gauge_sign(v: &[f64]) -> Result<f64> {
    let mut best = 0usize;
    let mut best_abs = v[0].abs();
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x.abs() > best_abs {
            best = i;
            best_abs = x.abs();
        }
    }
    if best_abs == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(if v[best] < 0.0 { -1.0 } else { 1.0 })
}

/// Removes the overall sign ambiguity of an eigenvector: returns `psi` or
/// `-psi` so that the maximum-magnitude entry is strictly positive.
pub fn gauge_fix(psi: &Wavefunction) -> Result<Wavefunction> {
    let sign = gauge_sign(psi.coefficients())?;
    let coefficients = psi.coefficients().iter().map(|&c| sign * c).collect();
    Ok(Wavefunction { coefficients })
}

/// In-place gauge + normalization used by the solvers.
pub(crate) fn gauge_normalize(v: &mut [f64]) -> Result<()> {
    let sign = gauge_sign(v)?;
    let scale = sign / norm(v);
    for x in v.iter_mut() {
        *x *= scale;
    }
    Ok(())
}
