//! The monolithic baseline: one network mapping the field parameters to all
//! `2^N` coefficients at once.

use crate::eigen::Wavefunction;
use crate::error::{Error, Result};
use crate::nn::{init_parameters, ArchitectureConfig, ForwardCache, Mlp, MlpGradients};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// How `(b_x, b_z)` is presented to the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Featurization {
    /// Input vector is exactly `(b_x, b_z)`.
    FieldsOnly,
    /// `(b_x, b_z)` followed by `width - 2` zeros.
    FieldsPadded { width: usize },
}

impl Featurization {
    pub fn input_dim(&self) -> usize {
        match self {
            Featurization::FieldsOnly => 2,
            Featurization::FieldsPadded { width } => *width,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Featurization::FieldsPadded { width } = self {
            if *width < 2 {
                return Err(Error::InvalidConfig(format!(
                    "padded featurization width {width} must be >= 2"
                )));
            }
        }
        Ok(())
    }
}

/// Feed-forward model with `2^N` output nodes.
#[derive(Clone, Debug)]
pub struct BaselineModel {
    n_spins: usize,
    featurization: Featurization,
    net: Mlp,
}

impl BaselineModel {
    pub fn new(
        n_spins: usize,
        featurization: Featurization,
        hidden_layers: usize,
        hidden_width: usize,
        init_seed: u64,
    ) -> Result<Self> {
        featurization.validate()?;
        let arch = ArchitectureConfig::new(
            featurization.input_dim(),
            hidden_layers,
            hidden_width,
            1usize << n_spins,
        );
        Ok(BaselineModel {
            n_spins,
            featurization,
            net: init_parameters(arch, init_seed)?,
        })
    }

    pub fn from_net(n_spins: usize, featurization: Featurization, net: Mlp) -> Result<Self> {
        featurization.validate()?;
        if net.arch().input_dim != featurization.input_dim()
            || net.arch().output_dim != 1usize << n_spins
        {
            return Err(Error::ShapeMismatch(format!(
                "network shape {:?} does not fit {n_spins} spins with {featurization:?}",
                net.arch()
            )));
        }
        Ok(BaselineModel {
            n_spins,
            featurization,
            net,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn featurization(&self) -> Featurization {
        self.featurization
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    pub fn count_parameters(&self) -> usize {
        self.net.parameter_count()
    }

    fn features(&self, points: &[(f64, f64)]) -> Array2<f64> {
        let width = self.featurization.input_dim();
        Array2::from_shape_fn((points.len(), width), |(row, col)| match col {
            0 => points[row].0,
            1 => points[row].1,
            _ => 0.0,
        })
    }

    pub fn forward_batch(
        &self,
        points: &[(f64, f64)],
    ) -> Result<(Vec<Wavefunction>, ForwardCache)> {
        if points.is_empty() {
            return Err(Error::ShapeMismatch("empty batch".into()));
        }
        let (out, cache) = self.net.forward(self.features(points).view())?;
        let psi = out
            .rows()
            .into_iter()
            .map(|row| Wavefunction::from_coefficients(row.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok((psi, cache))
    }

    /// One full-wavefunction prediction for a single `(b_x, b_z)` point.
    pub fn forward(&self, b_x: f64, b_z: f64) -> Result<Wavefunction> {
        Ok(self.forward_batch(&[(b_x, b_z)])?.0.pop().expect("batch of one"))
    }

    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        grads: &[Vec<f64>],
    ) -> Result<MlpGradients> {
        let dim = 1usize << self.n_spins;
        for g in grads {
            if g.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: g.len(),
                });
            }
        }
        let grad = Array2::from_shape_fn((grads.len(), dim), |(p, k)| grads[p][k]);
        self.net.backward(cache, grad.view())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn fields_only_input_is_the_two_fields() {
        let model = BaselineModel::new(3, Featurization::FieldsOnly, 1, 5, 2).unwrap();
        let psi = model.forward(0.4, 1.2).unwrap();
        let (direct, _) = model.net().forward(array![[0.4, 1.2]].view()).unwrap();
        assert_eq!(psi.coefficients(), direct.row(0).to_slice().unwrap());
        assert_eq!(psi.len(), 8);
    }

    #[test]
    fn padded_featurization_appends_zeros() {
        let model =
            BaselineModel::new(3, Featurization::FieldsPadded { width: 20 }, 1, 5, 2).unwrap();
        let psi = model.forward(0.4, 1.2).unwrap();
        let mut input = vec![0.0; 20];
        input[0] = 0.4;
        input[1] = 1.2;
        let x = Array2::from_shape_vec((1, 20), input).unwrap();
        let (direct, _) = model.net().forward(x.view()).unwrap();
        assert_eq!(psi.coefficients(), direct.row(0).to_slice().unwrap());
    }

    #[test]
    fn published_baseline_parameter_count() {
        let model =
            BaselineModel::new(10, Featurization::FieldsPadded { width: 20 }, 2, 2000, 0).unwrap();
        assert_eq!(model.count_parameters(), 6_093_024);
    }

    #[test]
    fn zero_weight_network_emits_zero_wavefunction() {
        let mut model = BaselineModel::new(3, Featurization::FieldsOnly, 1, 4, 0).unwrap();
        model.net_mut().map_parameters(|_| 0.0);
        let psi = model.forward(0.5, 0.5).unwrap();
        assert!(psi.coefficients().iter().all(|&c| c == 0.0));
        // The loss-side norm guard is what flags this state.
        let err = crate::loss::cosine_loss(&[psi.clone()], &[psi]).unwrap_err();
        assert!(matches!(err, Error::NumericalDegeneracy { .. }));
    }

    #[test]
    fn rejects_undersized_padding() {
        assert!(BaselineModel::new(3, Featurization::FieldsPadded { width: 1 }, 1, 4, 0).is_err());
    }

    #[test]
    fn baseline_and_single_expert_moe_differ_by_construction() {
        // Identical hidden architecture, but the input encodings differ: the
        // baseline sees only the fields while the expert also sees the
        // configuration bits. The two must not be conflated in tests.
        use crate::model::MoeModel;
        use crate::spin::whole_space_partition;
        let baseline = BaselineModel::new(3, Featurization::FieldsOnly, 2, 6, 1).unwrap();
        let moe = MoeModel::new(whole_space_partition(3), 2, 6, 1).unwrap();
        let b = baseline.forward(0.3, 0.7).unwrap();
        let m = moe.forward(0.3, 0.7).unwrap().psi_hat;
        assert_ne!(b, m);
    }
}
