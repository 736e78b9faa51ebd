//! Sparse transverse-field Ising Hamiltonian on a periodic chain.
//!
//! ```text
//! H = -(J/N) sum_i s^z_i s^z_{i+1} - (1/N) sum_i (B_z s^z_i + B_x s^x_i)
//! ```
//!
//! with `s_{N+1} = s_1`. In the spin-configuration basis the `s^z` terms are
//! diagonal and the `s^x` terms connect pairs of indices differing in exactly
//! one bit, all with the same element `-B_x / N`. Only the diagonal vector and
//! that scalar are stored; the off-diagonal structure is implicit in bit
//! flips, giving `O(2^N)` memory and `O(N 2^N)` matvec.
//!
//! The sums run literally over `i = 1..N`, so the two-site chain counts its
//! single physical bond twice.

use crate::error::{Error, Result};
use crate::spin::MAX_SPINS;
use serde::{Deserialize, Serialize};

/// Guard for dense materialization: `2^8 = 256` rows at most.
pub const MAX_DENSE_SPINS: usize = 8;

/// Physical parameters of one chain instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub n_spins: usize,
    pub j_coupling: f64,
    pub b_x: f64,
    pub b_z: f64,
}

impl SystemParams {
    pub fn new(n_spins: usize, j_coupling: f64, b_x: f64, b_z: f64) -> Self {
        SystemParams {
            n_spins,
            j_coupling,
            b_x,
            b_z,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_spins < 2 || self.n_spins > MAX_SPINS {
            return Err(Error::SpinCountOutOfRange {
                n_spins: self.n_spins,
                max: MAX_SPINS,
            });
        }
        Ok(())
    }
}

/// Sparse operator: diagonal plus a uniform single-bit-flip coupling.
#[derive(Clone, Debug)]
pub struct HamiltonianOperator {
    params: SystemParams,
    diagonal: Vec<f64>,
    flip_coupling: f64,
}

/// Builds the operator for `params`. The dense matrix is never materialized.
pub fn build_hamiltonian(params: SystemParams) -> Result<HamiltonianOperator> {
    params.validate()?;
    let n = params.n_spins;
    let dim = 1usize << n;
    let inv_n = 1.0 / n as f64;
    let mut diagonal = vec![0.0; dim];
    for (b, d) in diagonal.iter_mut().enumerate() {
        let mut bond_sum = 0i32;
        let mut field_sum = 0i32;
        for i in 0..n {
            let si = if b >> i & 1 == 1 { 1 } else { -1 };
            let sj = if b >> ((i + 1) % n) & 1 == 1 { 1 } else { -1 };
            bond_sum += si * sj;
            field_sum += si;
        }
        *d = -params.j_coupling * inv_n * bond_sum as f64
            - params.b_z * inv_n * field_sum as f64;
    }
    Ok(HamiltonianOperator {
        params,
        diagonal,
        flip_coupling: -params.b_x * inv_n,
    })
}

impl HamiltonianOperator {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// The uniform off-diagonal element `-B_x / N`.
    pub fn flip_coupling(&self) -> f64 {
        self.flip_coupling
    }

    /// `(Hv)[b] = diagonal[b] v[b] + flip sum_i v[b ^ 2^i]`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let mut out = vec![0.0; v.len()];
        self.matvec_into(v, &mut out);
        Ok(out)
    }

    /// Matvec with a caller-provided output buffer (lengths already checked).
    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.params.n_spins;
        for (b, o) in out.iter_mut().enumerate() {
            let mut acc = self.diagonal[b] * v[b];
            if self.flip_coupling != 0.0 {
                let mut flips = 0.0;
                for i in 0..n {
                    flips += v[b ^ (1usize << i)];
                }
                acc += self.flip_coupling * flips;
            }
            *o = acc;
        }
    }

    /// Rayleigh quotient `<v, Hv> / <v, v>`.
    pub fn rayleigh_quotient(&self, v: &[f64]) -> Result<f64> {
        let hv = self.matvec(v)?;
        let num: f64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        Ok(num / den)
    }

    /// Dense symmetric matrix in row-major order, for small-system oracles.
    pub fn dense_matrix(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.params.n_spins;
        if n > MAX_DENSE_SPINS {
            return Err(Error::DimensionTooLarge {
                dim: self.dim(),
                max: 1 << MAX_DENSE_SPINS,
            });
        }
        let dim = self.dim();
        let mut m = vec![vec![0.0; dim]; dim];
        for b in 0..dim {
            m[b][b] = self.diagonal[b];
            for i in 0..n {
                m[b][b ^ (1usize << i)] = self.flip_coupling;
            }
        }
        Ok(m)
    }
}
