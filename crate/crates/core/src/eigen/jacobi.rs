//! Cyclic Jacobi diagonalization of small dense symmetric matrices.
//!
//! This is the independent oracle used to validate the Lanczos path: it
//! shares no code with the sparse solver beyond the gauge convention.

use super::{gauge_normalize, EigenPair, Wavefunction};
use crate::error::{Error, Result};

const MAX_DIM: usize = 256;
const MAX_SWEEPS: usize = 60;
const SYMMETRY_TOL: f64 = 1e-12;

/// Full diagonalization by cyclic Jacobi rotations, returning the smallest
/// eigenpair. Sweeps continue until the off-diagonal Frobenius norm drops to
/// `tol`.
pub fn dense_ground_state(matrix: &[Vec<f64>], tol: f64) -> Result<EigenPair> {
    let n = matrix.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim: n, max: MAX_DIM });
    }
    let mut max_asymmetry = 0.0f64;
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "row {i} has length {}, expected {n}",
                row.len()
            )));
        }
        for (j, &x) in row.iter().enumerate() {
            max_asymmetry = max_asymmetry.max((x - matrix[j][i]).abs());
        }
    }
    if max_asymmetry > SYMMETRY_TOL {
        return Err(Error::AsymmetricMatrix { max_asymmetry });
    }

    // Flat working copy plus accumulated rotations.
    let mut a: Vec<f64> = matrix.iter().flatten().copied().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off_sq += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off_sq).sqrt() <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off_sq += a[p * n + q] * a[p * n + q];
            }
        }
        return Err(Error::NonConvergence {
            iterations: MAX_SWEEPS,
            best_residual: (2.0 * off_sq).sqrt(),
        });
    }

    let mut min_idx = 0usize;
    for i in 1..n {
        if a[i * n + i] < a[min_idx * n + min_idx] {
            min_idx = i;
        }
    }
    let energy = a[min_idx * n + min_idx];
    let mut state: Vec<f64> = (0..n).map(|k| v[k * n + min_idx]).collect();
    gauge_normalize(&mut state)?;

    let mut residual_sq = 0.0;
    for (i, row) in matrix.iter().enumerate() {
        let hx: f64 = row.iter().zip(&state).map(|(m, x)| m * x).sum();
        residual_sq += (hx - energy * state[i]).powi(2);
    }

    Ok(EigenPair {
        energy,
        state: Wavefunction::from_coefficients(state)?,
        residual: residual_sq.sqrt(),
    })
}
