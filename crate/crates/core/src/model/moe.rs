//! The mixture-of-experts model.
//!
//! Gating is not learned: every configuration is routed to the expert owning
//! its `S_z` value. Each expert is a small MLP mapping
//! `(b_x, b_z, sigma as 0/1 bits)` to one wavefunction coefficient, so one
//! `(b_x, b_z)` point expands to `2^N` expert sub-inputs. Expert outputs are
//! concatenated in gating order and re-ordered back to the canonical basis.

use crate::eigen::Wavefunction;
use crate::error::{Error, Result};
use crate::nn::{init_parameters, ArchitectureConfig, ForwardCache, Mlp, MlpGradients};
use crate::spin::SzPartition;
use ndarray::Array2;
use rayon::prelude::*;

/// Mixture of expert MLPs over an `S_z` partition.
#[derive(Clone, Debug)]
pub struct MoeModel {
    partition: SzPartition,
    experts: Vec<Mlp>,
    init_seed: u64,
    /// Per expert: `(block_len, n_spins)` matrix of 0/1 site features, rows
    /// in block (ascending canonical) order. Constant across inputs.
    bit_features: Vec<Array2<f64>>,
}

/// Retained per-expert activations for one forward batch.
#[derive(Debug)]
pub struct MoeBatchCache {
    expert_caches: Vec<ForwardCache>,
    batch: usize,
}

/// One point's prediction with the cache needed for its backward pass.
#[derive(Debug)]
pub struct ModelPrediction {
    pub psi_hat: Wavefunction,
    cache: MoeBatchCache,
}

impl MoeModel {
    /// Builds experts of shape `n_spins + 2 -> hidden_width^hidden_layers -> 1`,
    /// expert `e` seeded with `init_seed + e`.
    pub fn new(
        partition: SzPartition,
        hidden_layers: usize,
        hidden_width: usize,
        init_seed: u64,
    ) -> Result<Self> {
        let n_spins = partition.n_spins();
        let arch = ArchitectureConfig::new(n_spins + 2, hidden_layers, hidden_width, 1);
        let experts = (0..partition.n_experts())
            .map(|e| init_parameters(arch, init_seed + e as u64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(partition, experts, init_seed))
    }

    /// Builds the model around existing expert parameter sets.
    pub fn from_experts(
        partition: SzPartition,
        experts: Vec<Mlp>,
        init_seed: u64,
    ) -> Result<Self> {
        if experts.len() != partition.n_experts() {
            return Err(Error::ShapeMismatch(format!(
                "{} experts for a {}-group partition",
                experts.len(),
                partition.n_experts()
            )));
        }
        let want_input = partition.n_spins() + 2;
        for (e, x) in experts.iter().enumerate() {
            if x.arch().input_dim != want_input || x.arch().output_dim != 1 {
                return Err(Error::ShapeMismatch(format!(
                    "expert {e} has shape {:?}, expected input {want_input} and output 1",
                    x.arch()
                )));
            }
        }
        Ok(Self::assemble(partition, experts, init_seed))
    }

    fn assemble(partition: SzPartition, experts: Vec<Mlp>, init_seed: u64) -> Self {
        let n_spins = partition.n_spins();
        let bit_features = (0..partition.n_experts())
            .map(|e| {
                let configs = partition.block_configs(e);
                Array2::from_shape_fn((configs.len(), n_spins), |(row, site)| {
                    if configs[row] >> site & 1 == 1 {
                        1.0
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        MoeModel {
            partition,
            experts,
            init_seed,
            bit_features,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.partition.n_spins()
    }

    pub fn partition(&self) -> &SzPartition {
        &self.partition
    }

    pub fn experts(&self) -> &[Mlp] {
        &self.experts
    }

    pub fn expert_mut(&mut self, e: usize) -> &mut Mlp {
        &mut self.experts[e]
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    pub fn count_parameters(&self) -> usize {
        self.experts.iter().map(|e| e.parameter_count()).sum()
    }

    fn expert_inputs(&self, expert: usize, points: &[(f64, f64)]) -> Array2<f64> {
        let bits = &self.bit_features[expert];
        let block_len = bits.nrows();
        let n = self.n_spins();
        Array2::from_shape_fn((points.len() * block_len, n + 2), |(row, col)| {
            let (bx, bz) = points[row / block_len];
            match col {
                0 => bx,
                1 => bz,
                _ => bits[[row % block_len, col - 2]],
            }
        })
    }

    /// Routes all `2^N` configurations of every point through their experts
    /// and reassembles canonical-order wavefunctions.
    pub fn forward_batch(
        &self,
        points: &[(f64, f64)],
    ) -> Result<(Vec<Wavefunction>, MoeBatchCache)> {
        if points.is_empty() {
            return Err(Error::ShapeMismatch("empty batch".into()));
        }
        let outputs: Vec<(Array2<f64>, ForwardCache)> = (0..self.experts.len())
            .into_par_iter()
            .map(|e| {
                let inputs = self.expert_inputs(e, points);
                self.experts[e].forward(inputs.view())
            })
            .collect::<Result<Vec<_>>>()?;

        let dim = 1usize << self.n_spins();
        let permutation = self.partition.permutation();
        let mut psi = vec![vec![0.0; dim]; points.len()];
        let mut caches = Vec::with_capacity(outputs.len());
        for (e, (y, cache)) in outputs.into_iter().enumerate() {
            let range = self.partition.block_range(e);
            let block_len = range.len();
            for p in 0..points.len() {
                for k in 0..block_len {
                    let canonical = permutation[range.start + k] as usize;
                    psi[p][canonical] = y[[p * block_len + k, 0]];
                }
            }
            caches.push(cache);
        }
        let psi = psi
            .into_iter()
            .map(Wavefunction::from_coefficients)
            .collect::<Result<Vec<_>>>()?;
        Ok((
            psi,
            MoeBatchCache {
                expert_caches: caches,
                batch: points.len(),
            },
        ))
    }

    /// One-point convenience wrapper around [`MoeModel::forward_batch`].
    pub fn forward(&self, b_x: f64, b_z: f64) -> Result<ModelPrediction> {
        let (mut psi, cache) = self.forward_batch(&[(b_x, b_z)])?;
        Ok(ModelPrediction {
            psi_hat: psi.pop().expect("batch of one"),
            cache,
        })
    }

    /// Per-expert parameter gradients given per-point gradients with respect
    /// to the canonical-order wavefunctions. The canonical gradient is
    /// permuted to gating order, sliced per expert, and backpropagated
    /// through each expert independently.
    pub fn backward_batch(
        &self,
        cache: &MoeBatchCache,
        grads: &[Vec<f64>],
    ) -> Result<Vec<MlpGradients>> {
        if grads.len() != cache.batch {
            return Err(Error::ShapeMismatch(format!(
                "{} gradient vectors for a cached batch of {}",
                grads.len(),
                cache.batch
            )));
        }
        let dim = 1usize << self.n_spins();
        for (p, g) in grads.iter().enumerate() {
            if g.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: grads[p].len(),
                });
            }
        }
        let permutation = self.partition.permutation();
        (0..self.experts.len())
            .into_par_iter()
            .map(|e| {
                let range = self.partition.block_range(e);
                let block_len = range.len();
                let dy = Array2::from_shape_fn((cache.batch * block_len, 1), |(row, _)| {
                    let canonical = permutation[range.start + row % block_len] as usize;
                    grads[row / block_len][canonical]
                });
                self.experts[e].backward(&cache.expert_caches[e], dy.view())
            })
            .collect()
    }

    /// One-point backward against a [`ModelPrediction`].
    pub fn backward(
        &self,
        prediction: &ModelPrediction,
        grad_psi_hat: &[f64],
    ) -> Result<Vec<MlpGradients>> {
        self.backward_batch(&prediction.cache, &[grad_psi_hat.to_vec()])
    }
}
