//! Wavefunction-predicting models: the monolithic baseline network and the
//! mixture-of-experts model with magnetization gating and output reordering.

mod baseline;
mod checkpoint;
mod moe;

pub use baseline::{BaselineModel, Featurization};
pub use checkpoint::{load_model, save_model};
pub use moe::{MoeBatchCache, MoeModel, ModelPrediction};

use crate::eigen::Wavefunction;
use crate::error::Result;
use crate::nn::MlpGradients;

/// Either model kind behind one training-facing surface.
#[derive(Clone, Debug)]
pub enum Model {
    Baseline(BaselineModel),
    PgMoe(MoeModel),
}

/// Opaque forward cache for [`Model::backward_batch`].
#[derive(Debug)]
pub enum ModelBatchCache {
    Baseline(crate::nn::ForwardCache),
    PgMoe(MoeBatchCache),
}

impl Model {
    pub fn n_spins(&self) -> usize {
        match self {
            Model::Baseline(m) => m.n_spins(),
            Model::PgMoe(m) => m.n_spins(),
        }
    }

    /// Exact total over every weight and bias of every parameter set.
    pub fn count_parameters(&self) -> usize {
        match self {
            Model::Baseline(m) => m.count_parameters(),
            Model::PgMoe(m) => m.count_parameters(),
        }
    }

    /// Number of independently optimized parameter sets (1 or one per expert).
    pub fn parameter_set_count(&self) -> usize {
        match self {
            Model::Baseline(_) => 1,
            Model::PgMoe(m) => m.experts().len(),
        }
    }

    pub fn parameter_set(&self, i: usize) -> &crate::nn::Mlp {
        match self {
            Model::Baseline(m) => m.net(),
            Model::PgMoe(m) => &m.experts()[i],
        }
    }

    pub fn parameter_set_mut(&mut self, i: usize) -> &mut crate::nn::Mlp {
        match self {
            Model::Baseline(m) => m.net_mut(),
            Model::PgMoe(m) => m.expert_mut(i),
        }
    }

    /// Full wavefunctions for a batch of `(b_x, b_z)` points, with the cache
    /// needed to backpropagate.
    pub fn forward_batch(
        &self,
        points: &[(f64, f64)],
    ) -> Result<(Vec<Wavefunction>, ModelBatchCache)> {
        match self {
            Model::Baseline(m) => {
                let (psi, cache) = m.forward_batch(points)?;
                Ok((psi, ModelBatchCache::Baseline(cache)))
            }
            Model::PgMoe(m) => {
                let (psi, cache) = m.forward_batch(points)?;
                Ok((psi, ModelBatchCache::PgMoe(cache)))
            }
        }
    }

    /// Per-parameter-set gradients from per-point wavefunction gradients.
    pub fn backward_batch(
        &self,
        cache: &ModelBatchCache,
        grads: &[Vec<f64>],
    ) -> Result<Vec<MlpGradients>> {
        match (self, cache) {
            (Model::Baseline(m), ModelBatchCache::Baseline(c)) => {
                Ok(vec![m.backward_batch(c, grads)?])
            }
            (Model::PgMoe(m), ModelBatchCache::PgMoe(c)) => m.backward_batch(c, grads),
            _ => Err(crate::error::Error::ShapeMismatch(
                "cache does not belong to this model kind".into(),
            )),
        }
    }

    /// Memory-bounded inference without caches.
    pub fn predict_batch(&self, points: &[(f64, f64)]) -> Result<Vec<Wavefunction>> {
        let mut out = Vec::with_capacity(points.len());
        for chunk in points.chunks(8.max(1)) {
            let (psi, _) = self.forward_batch(chunk)?;
            out.extend(psi);
        }
        Ok(out)
    }
}
