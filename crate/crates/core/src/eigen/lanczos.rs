//! Lanczos iteration with full reorthogonalization for the smallest eigenpair
//! of the sparse Ising operator.
//!
//! Krylov dimensions stay small (a few hundred at ten sites), so keeping the
//! whole basis and reorthogonalizing every step is cheap and avoids ghost
//! eigenvalues. The start vector is seeded uniform noise, which makes every
//! produced label reproducible from its settings.

use super::tridiag;
use super::{dot, gauge_normalize, norm, EigenPair, Wavefunction};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianOperator;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Solver settings; the defaults match the dataset-generation contract.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanczosSettings {
    pub tol: f64,
    pub max_krylov: usize,
    pub seed: u64,
}

impl Default for LanczosSettings {
    fn default() -> Self {
        LanczosSettings {
            tol: 1e-10,
            max_krylov: 300,
            seed: 7,
        }
    }
}

/// Ratio of the degeneracy threshold to the convergence tolerance.
const DEGENERACY_FACTOR: f64 = 100.0;

/// Computes the smallest eigenpair of `h` to residual `tol`.
///
/// Fails with [`Error::DegenerateGroundState`] when the two bottom Ritz
/// values are closer than `100 * tol`, and with [`Error::NonConvergence`]
/// when `max_krylov` steps cannot push the residual under `tol`.
pub fn lanczos_ground_state(
    h: &HamiltonianOperator,
    tol: f64,
    max_krylov: usize,
    seed: u64,
) -> Result<EigenPair> {
    if tol <= 0.0 || max_krylov < 2 {
        return Err(Error::InvalidConfig(
            "lanczos requires tol > 0 and max_krylov >= 2".into(),
        ));
    }
    let n = h.dim();
    let max_k = max_krylov.min(n);
    let breakdown = f64::EPSILON * 64.0;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let inv = 1.0 / norm(&v0);
    for x in v0.iter_mut() {
        *x *= inv;
    }

    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut alphas: Vec<f64> = Vec::with_capacity(max_k);
    let mut betas: Vec<f64> = Vec::with_capacity(max_k);
    let mut best_residual = f64::INFINITY;

    for j in 0..max_k {
        let mut w = h.matvec(&basis[j])?;
        if j > 0 {
            let beta_prev = betas[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= beta_prev * vi;
            }
        }
        let alpha = dot(&w, &basis[j]);
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= alpha * vi;
        }
        alphas.push(alpha);
        // Full reorthogonalization, two passes.
        for _ in 0..2 {
            for vi in &basis {
                let overlap = dot(&w, vi);
                for (wi, x) in w.iter_mut().zip(vi) {
                    *wi -= overlap * x;
                }
            }
        }
        #[cfg(debug_assertions)]
        assert_basis_orthogonal(&basis);

        let beta = norm(&w);
        let k = alphas.len();
        let lam0 = tridiag::kth_smallest_eigenvalue(&alphas, &betas, 0);
        let u0 = tridiag::eigenvector_for(&alphas, &betas, lam0);
        let residual_estimate = if k == n { 0.0 } else { beta * u0[k - 1].abs() };
        let exhausted = k == max_k || beta <= breakdown;

        if residual_estimate <= tol || exhausted {
            let mut state = vec![0.0; n];
            for (coeff, vi) in u0.iter().zip(&basis) {
                for (si, x) in state.iter_mut().zip(vi) {
                    *si += coeff * x;
                }
            }
            gauge_normalize(&mut state)?;
            let hx = h.matvec(&state)?;
            let residual = hx
                .iter()
                .zip(&state)
                .map(|(a, b)| (a - lam0 * b) * (a - lam0 * b))
                .sum::<f64>()
                .sqrt();
            best_residual = best_residual.min(residual);
            if residual <= tol {
                if k >= 2 {
                    let lam1 = tridiag::kth_smallest_eigenvalue(&alphas, &betas, 1);
                    let gap = lam1 - lam0;
                    if gap <= DEGENERACY_FACTOR * tol {
                        return Err(Error::DegenerateGroundState {
                            gap,
                            threshold: DEGENERACY_FACTOR * tol,
                        });
                    }
                }
                return Ok(EigenPair {
                    energy: lam0,
                    state: Wavefunction::from_coefficients(state)?,
                    residual,
                });
            }
            if exhausted {
                return Err(Error::NonConvergence {
                    iterations: k,
                    best_residual,
                });
            }
        }

        if k < max_k {
            betas.push(beta);
            let inv = 1.0 / beta;
            let next: Vec<f64> = w.iter().map(|x| x * inv).collect();
            basis.push(next);
        }
    }
    Err(Error::NonConvergence {
        iterations: max_k,
        best_residual,
    })
}

/// Debug-build check that the stored Krylov basis stays orthonormal.
#[cfg(debug_assertions)]
fn assert_basis_orthogonal(basis: &[Vec<f64>]) {
    for (i, vi) in basis.iter().enumerate() {
        for vj in basis.iter().skip(i + 1) {
            let overlap = dot(vi, vj).abs();
            assert!(overlap <= 1e-10, "Krylov basis overlap {overlap}");
        }
    }
}
