//! Minimal feed-forward network engine: tanh hidden layers, linear output,
//! exact backpropagation, SGD with classical momentum, plateau learning-rate
//! decay, and early stopping.
//!
//! Everything is double precision and deterministic: parameters are generated
//! from a seed in a fixed order and all reductions are sequential.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Comparisons against a best-so-far metric count as improvement only beyond
/// this margin, so float noise cannot reset patience counters.
pub const IMPROVEMENT_EPS: f64 = 1e-12;

/// Network shape: `hidden_layers` tanh layers of width `hidden_width` between
/// a linear input map and a linear output layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureConfig {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub output_dim: usize,
}

impl ArchitectureConfig {
    pub fn new(input_dim: usize, hidden_layers: usize, hidden_width: usize, output_dim: usize) -> Self {
        ArchitectureConfig {
            input_dim,
            hidden_layers,
            hidden_width,
            output_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim < 1 || self.hidden_layers < 1 || self.hidden_width < 1 || self.output_dim < 1
        {
            return Err(Error::InvalidConfig(format!(
                "architecture dimensions must all be >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every affine layer, input to output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers + 1);
        let mut fan_in = self.input_dim;
        for _ in 0..self.hidden_layers {
            dims.push((fan_in, self.hidden_width));
            fan_in = self.hidden_width;
        }
        dims.push((fan_in, self.output_dim));
        dims
    }

    /// Closed-form parameter count: sum of `fan_in * fan_out + fan_out`.
    pub fn parameter_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .map(|(fi, fo)| fi * fo + fo)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Layer {
    /// `(fan_in, fan_out)`; inputs are row vectors, so forward is `x W + b`.
    weight: Array2<f64>,
    bias: Array1<f64>,
}

/// A network with concrete parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    arch: ArchitectureConfig,
    layers: Vec<Layer>,
    init_seed: u64,
}

/// Seeded initialization: weights uniform on `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`,
/// biases zero.
pub fn init_parameters(arch: ArchitectureConfig, seed: u64) -> Result<Mlp> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = arch
        .layer_dims()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            let data: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            Layer {
                weight: Array2::from_shape_vec((fan_in, fan_out), data)
                    .expect("shape matches generated length"),
                bias: Array1::zeros(fan_out),
            }
        })
        .collect();
    Ok(Mlp {
        arch,
        layers,
        init_seed: seed,
    })
}

/// Retained activations from a forward pass; consumed by [`Mlp::backward`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// `activations[0]` is the input batch, `activations[l]` the tanh output
    /// of hidden layer `l`.
    activations: Vec<Array2<f64>>,
}

/// Exact parameter gradients, shaped like the network.
#[derive(Clone, Debug)]
pub struct MlpGradients {
    weight: Vec<Array2<f64>>,
    bias: Vec<Array1<f64>>,
    /// Gradient of the loss with respect to the input batch.
    pub input_grad: Array2<f64>,
}

impl MlpGradients {
    /// Flat view in parameter order (per layer: weights row-major, then bias).
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weight.iter().zip(&self.bias) {
            out.extend(w.iter().copied());
            out.extend(b.iter().copied());
        }
        out
    }
}

impl Mlp {
    pub fn arch(&self) -> &ArchitectureConfig {
        &self.arch
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    pub fn parameter_count(&self) -> usize {
        self.arch.parameter_count()
    }

    /// Affine + tanh for every hidden layer, linear output.
    pub fn forward(&self, input: ArrayView2<'_, f64>) -> Result<(Array2<f64>, ForwardCache)> {
        if input.ncols() != self.arch.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "input width {} does not match architecture input_dim {}",
                input.ncols(),
                self.arch.input_dim
            )));
        }
        let mut activations = Vec::with_capacity(self.arch.hidden_layers + 1);
        activations.push(input.to_owned());
        let mut current = input.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = current.dot(&layer.weight);
            z += &layer.bias;
            if l + 1 < self.layers.len() {
                z.mapv_inplace(f64::tanh);
                activations.push(z.clone());
            }
            current = z;
        }
        Ok((current, ForwardCache { activations }))
    }

    /// Backpropagates `grad_output` (d loss / d output, already carrying the
    /// caller's loss normalization) through the cached activations.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_output: ArrayView2<'_, f64>,
    ) -> Result<MlpGradients> {
        let n_layers = self.layers.len();
        if cache.activations.len() != n_layers {
            return Err(Error::ShapeMismatch(format!(
                "cache holds {} activation levels, expected {}",
                cache.activations.len(),
                n_layers
            )));
        }
        for (l, a) in cache.activations.iter().enumerate() {
            let expected = if l == 0 {
                self.arch.input_dim
            } else {
                self.arch.hidden_width
            };
            if a.ncols() != expected {
                return Err(Error::ShapeMismatch(format!(
                    "cache level {l} has width {}, expected {expected}",
                    a.ncols()
                )));
            }
        }
        let batch = cache.activations[0].nrows();
        if grad_output.nrows() != batch || grad_output.ncols() != self.arch.output_dim {
            return Err(Error::ShapeMismatch(format!(
                "grad_output is {}x{}, expected {}x{}",
                grad_output.nrows(),
                grad_output.ncols(),
                batch,
                self.arch.output_dim
            )));
        }
        let mut weight_grads = vec![Array2::zeros((0, 0)); n_layers];
        let mut bias_grads = vec![Array1::zeros(0); n_layers];
        let mut delta = grad_output.to_owned();
        for l in (0..n_layers).rev() {
            let a_prev = &cache.activations[l];
            weight_grads[l] = a_prev.t().dot(&delta);
            bias_grads[l] = delta.sum_axis(Axis(0));
            let upstream = delta.dot(&self.layers[l].weight.t());
            delta = if l > 0 {
                // a_prev is the tanh output of layer l, so tanh' = 1 - a^2.
                upstream * a_prev.mapv(|a| 1.0 - a * a)
            } else {
                upstream
            };
        }
        Ok(MlpGradients {
            weight: weight_grads,
            bias: bias_grads,
            input_grad: delta,
        })
    }

    /// Flat parameters in the same order as [`MlpGradients::flat`].
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for layer in &self.layers {
            out.extend(layer.weight.iter().copied());
            out.extend(layer.bias.iter().copied());
        }
        out
    }

    /// Rebuilds a network from flat parameters (checkpoint loading).
    pub fn from_flat_parameters(
        arch: ArchitectureConfig,
        init_seed: u64,
        flat: &[f64],
    ) -> Result<Mlp> {
        arch.validate()?;
        if flat.len() != arch.parameter_count() {
            return Err(Error::LengthMismatch {
                expected: arch.parameter_count(),
                got: flat.len(),
            });
        }
        let mut layers = Vec::new();
        let mut cursor = 0usize;
        for (fan_in, fan_out) in arch.layer_dims() {
            let w_len = fan_in * fan_out;
            let weight =
                Array2::from_shape_vec((fan_in, fan_out), flat[cursor..cursor + w_len].to_vec())
                    .expect("length checked above");
            cursor += w_len;
            let bias = Array1::from_vec(flat[cursor..cursor + fan_out].to_vec());
            cursor += fan_out;
            layers.push(Layer { weight, bias });
        }
        Ok(Mlp {
            arch,
            layers,
            init_seed,
        })
    }

    pub fn get_param(&self, flat_index: usize) -> f64 {
        self.flat_parameters()[flat_index]
    }

    pub fn set_param(&mut self, flat_index: usize, value: f64) {
        let mut cursor = flat_index;
        for layer in self.layers.iter_mut() {
            let w_len = layer.weight.len();
            if cursor < w_len {
                *layer
                    .weight
                    .as_slice_mut()
                    .expect("standard layout")
                    .get_mut(cursor)
                    .expect("index in range") = value;
                return;
            }
            cursor -= w_len;
            let b_len = layer.bias.len();
            if cursor < b_len {
                layer.bias[cursor] = value;
                return;
            }
            cursor -= b_len;
        }
        panic!("flat index {flat_index} out of range");
    }

    /// Overwrites every parameter with `f(value)`; test support.
    pub fn map_parameters(&mut self, f: impl Fn(f64) -> f64) {
        for layer in self.layers.iter_mut() {
            layer.weight.mapv_inplace(&f);
            layer.bias.mapv_inplace(&f);
        }
    }
}

/// SGD-with-momentum state plus the plateau schedule for one parameter set.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    velocity_weight: Vec<Array2<f64>>,
    velocity_bias: Vec<Array1<f64>>,
    pub learning_rate: f64,
    pub momentum: f64,
    plateau: PlateauState,
}

/// Plateau tracker: after `patience` consecutive epochs without strict
/// improvement the learning rate is multiplied by `gamma` and the counter
/// resets.
#[derive(Clone, Debug)]
pub struct PlateauState {
    best: f64,
    since_improvement: usize,
    pub patience: usize,
    pub gamma: f64,
}

impl OptimizerState {
    pub fn new(
        arch: &ArchitectureConfig,
        learning_rate: f64,
        momentum: f64,
        gamma: f64,
        plateau_patience: usize,
    ) -> Result<Self> {
        if learning_rate <= 0.0 || !(0.0..1.0).contains(&momentum) {
            return Err(Error::InvalidConfig(format!(
                "need learning_rate > 0 and momentum in [0, 1), got lr={learning_rate}, mom={momentum}"
            )));
        }
        let dims = arch.layer_dims();
        Ok(OptimizerState {
            velocity_weight: dims.iter().map(|&(fi, fo)| Array2::zeros((fi, fo))).collect(),
            velocity_bias: dims.iter().map(|&(_, fo)| Array1::zeros(fo)).collect(),
            learning_rate,
            momentum,
            plateau: PlateauState {
                best: f64::INFINITY,
                since_improvement: 0,
                patience: plateau_patience,
                gamma,
            },
        })
    }
}

/// Classical momentum update: `v <- mom * v + g`, then `theta <- theta - lr * v`.
pub fn sgd_step(params: &mut Mlp, grads: &MlpGradients, state: &mut OptimizerState) -> Result<()> {
    if grads.weight.len() != params.layers.len() {
        return Err(Error::ShapeMismatch(format!(
            "gradient has {} layers, parameters have {}",
            grads.weight.len(),
            params.layers.len()
        )));
    }
    let lr = state.learning_rate;
    let mom = state.momentum;
    for (l, layer) in params.layers.iter_mut().enumerate() {
        let vw = &mut state.velocity_weight[l];
        vw.zip_mut_with(&grads.weight[l], |v, &g| *v = mom * *v + g);
        layer.weight.zip_mut_with(vw, |t, &v| *t -= lr * v);
        let vb = &mut state.velocity_bias[l];
        vb.zip_mut_with(&grads.bias[l], |v, &g| *v = mom * *v + g);
        layer.bias.zip_mut_with(vb, |t, &v| *t -= lr * v);
    }
    Ok(())
}

/// Feeds one epoch's validation loss to the plateau schedule (minimize mode).
pub fn plateau_decay(state: &mut OptimizerState, validation_loss: f64) {
    let p = &mut state.plateau;
    if validation_loss < p.best - IMPROVEMENT_EPS {
        p.best = validation_loss;
        p.since_improvement = 0;
    } else {
        p.since_improvement += 1;
        if p.since_improvement >= p.patience {
            state.learning_rate *= p.gamma;
            p.since_improvement = 0;
        }
    }
}

/// Early-stopping tracker over a maximize-mode validation metric.
#[derive(Clone, Debug)]
pub struct EarlyStopState {
    best: f64,
    since_improvement: usize,
    pub patience: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop,
}

impl EarlyStopState {
    pub fn new(patience: usize) -> Self {
        EarlyStopState {
            best: f64::NEG_INFINITY,
            since_improvement: 0,
            patience,
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    /// Updates with this epoch's metric; returns whether it strictly improved
    /// on the best and the continue/stop decision.
    pub fn update(&mut self, metric: f64) -> (bool, StopDecision) {
        if metric > self.best + IMPROVEMENT_EPS {
            self.best = metric;
            self.since_improvement = 0;
            (true, StopDecision::Continue)
        } else {
            self.since_improvement += 1;
            let decision = if self.since_improvement >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            };
            (false, decision)
        }
    }
}

/// Early stopping as a free-standing operation.
pub fn early_stop(state: &mut EarlyStopState, metric: f64) -> StopDecision {
    state.update(metric).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn parameter_count_closed_form() {
        // 2 -> 200 -> 200 -> 1.
        let arch = ArchitectureConfig::new(2, 2, 200, 1);
        assert_eq!(arch.parameter_count(), 41_001);
        // 20 -> 2000 -> 2000 -> 1024: the published baseline size.
        let big = ArchitectureConfig::new(20, 2, 2000, 1024);
        assert_eq!(big.parameter_count(), 6_093_024);
        // 12 -> 200 -> 200 -> 1: one ten-site expert.
        let expert = ArchitectureConfig::new(12, 2, 200, 1);
        assert_eq!(expert.parameter_count(), 43_001);
    }

    #[test]
    fn parameter_count_matches_explicit_sum_on_random_shapes() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let arch = ArchitectureConfig::new(
                rng.random_range(1..12),
                rng.random_range(1..4),
                rng.random_range(1..16),
                rng.random_range(1..12),
            );
            let net = init_parameters(arch, 0).unwrap();
            let explicit: usize = net
                .layers
                .iter()
                .map(|l| l.weight.len() + l.bias.len())
                .sum();
            assert_eq!(arch.parameter_count(), explicit);
            assert_eq!(net.flat_parameters().len(), explicit);
        }
    }

    #[test]
    fn init_is_seed_deterministic_and_bounded() {
        let arch = ArchitectureConfig::new(3, 2, 5, 2);
        let a = init_parameters(arch, 7).unwrap();
        let b = init_parameters(arch, 7).unwrap();
        assert_eq!(a, b);
        let c = init_parameters(arch, 8).unwrap();
        assert_ne!(a, c);
        for (l, layer) in a.layers.iter().enumerate() {
            let bound = 1.0 / (layer.weight.nrows() as f64).sqrt();
            assert!(layer.weight.iter().all(|w| w.abs() <= bound), "layer {l}");
            assert!(layer.bias.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn zero_parameters_give_zero_outputs() {
        let mut net = init_parameters(ArchitectureConfig::new(4, 2, 6, 3), 1).unwrap();
        net.map_parameters(|_| 0.0);
        let x = array![[0.3, -0.2, 0.9, 0.5], [1.0, 1.0, 1.0, 1.0]];
        let (y, _) = net.forward(x.view()).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn near_linear_regime_for_small_inputs() {
        // With one hidden layer and small inputs, tanh(z) = z + O(z^3), so the
        // network acts like the composition of its affine maps.
        let mut net = init_parameters(ArchitectureConfig::new(2, 1, 4, 1), 3).unwrap();
        net.map_parameters(|w| w * 0.5);
        let eps = 1e-4;
        let x = array![[eps, -2.0 * eps]];
        let (y, _) = net.forward(x.view()).unwrap();
        let w1 = &net.layers[0].weight;
        let w2 = &net.layers[1].weight;
        let linear = x.dot(w1).dot(w2);
        assert_abs_diff_eq!(y[[0, 0]], linear[[0, 0]], epsilon = 1e-12);
    }

    #[test]
    fn input_jacobian_matches_central_differences() {
        let net = init_parameters(ArchitectureConfig::new(3, 2, 6, 2), 11).unwrap();
        let x = array![[0.4, -0.9, 0.2]];
        let (_, cache) = net.forward(x.view()).unwrap();
        // Scalar loss: sum of outputs.
        let grad_out = Array2::ones((1, 2));
        let grads = net.backward(&cache, grad_out.view()).unwrap();
        let step = 1e-5;
        for i in 0..3 {
            let mut xp = x.clone();
            xp[[0, i]] += step;
            let mut xm = x.clone();
            xm[[0, i]] -= step;
            let fp = net.forward(xp.view()).unwrap().0.sum();
            let fm = net.forward(xm.view()).unwrap().0.sum();
            let fd = (fp - fm) / (2.0 * step);
            let analytic = grads.input_grad[[0, i]];
            let rel = (analytic - fd).abs() / fd.abs().max(1e-8);
            assert!(rel <= 1e-6, "input {i}: analytic {analytic}, fd {fd}");
        }
    }

    #[test]
    fn parameter_gradients_match_central_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..10 {
            let arch = ArchitectureConfig::new(
                rng.random_range(1..6),
                rng.random_range(1..3),
                rng.random_range(2..8),
                rng.random_range(1..5),
            );
            let mut net = init_parameters(arch, trial).unwrap();
            let batch = rng.random_range(1..4);
            let x = Array2::from_shape_fn((batch, arch.input_dim), |_| rng.random_range(-1.0..1.0));
            // Loss = sum of outputs weighted by fixed coefficients.
            let coeffs =
                Array2::from_shape_fn((batch, arch.output_dim), |_| rng.random_range(-1.0..1.0));
            let (_, cache) = net.forward(x.view()).unwrap();
            let grads = net.backward(&cache, coeffs.view()).unwrap();
            let flat = grads.flat();
            let step = 1e-5;
            for p in 0..net.parameter_count() {
                let orig = net.get_param(p);
                net.set_param(p, orig + step);
                let fp = (&net.forward(x.view()).unwrap().0 * &coeffs).sum();
                net.set_param(p, orig - step);
                let fm = (&net.forward(x.view()).unwrap().0 * &coeffs).sum();
                net.set_param(p, orig);
                let fd = (fp - fm) / (2.0 * step);
                let rel = (flat[p] - fd).abs() / fd.abs().max(1e-6);
                assert!(
                    rel <= 1e-5,
                    "trial {trial} param {p}: analytic {}, fd {fd}",
                    flat[p]
                );
            }
        }
    }

    #[test]
    fn backward_is_linear_in_upstream_gradient() {
        let net = init_parameters(ArchitectureConfig::new(2, 2, 5, 3), 5).unwrap();
        let x = array![[0.2, -0.6], [0.9, 0.1]];
        let (_, cache) = net.forward(x.view()).unwrap();
        let g1 = Array2::from_shape_fn((2, 3), |(i, j)| (i + j) as f64 * 0.3 - 0.2);
        let g2 = Array2::from_shape_fn((2, 3), |(i, j)| (i as f64 - j as f64) * 0.7);
        let sum = net.backward(&cache, (&g1 + &g2).view()).unwrap().flat();
        let parts: Vec<f64> = net
            .backward(&cache, g1.view())
            .unwrap()
            .flat()
            .iter()
            .zip(net.backward(&cache, g2.view()).unwrap().flat())
            .map(|(a, b)| a + b)
            .collect();
        for (s, p) in sum.iter().zip(&parts) {
            assert_abs_diff_eq!(s, p, epsilon = 1e-12);
        }
        // Zero upstream gradient -> zero parameter gradients.
        let zeros = net
            .backward(&cache, Array2::zeros((2, 3)).view())
            .unwrap()
            .flat();
        assert!(zeros.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn backward_rejects_mismatched_cache() {
        let net = init_parameters(ArchitectureConfig::new(2, 1, 4, 2), 0).unwrap();
        let other = init_parameters(ArchitectureConfig::new(2, 2, 4, 2), 0).unwrap();
        let x = array![[0.1, 0.2]];
        let (_, cache) = net.forward(x.view()).unwrap();
        let grad = Array2::zeros((1, 2));
        assert!(other.backward(&cache, grad.view()).is_err());
        let bad_grad = Array2::zeros((3, 2));
        assert!(net.backward(&cache, bad_grad.view()).is_err());
    }

    fn scalar_net(theta: f64) -> (Mlp, OptimizerState) {
        let arch = ArchitectureConfig::new(1, 1, 1, 1);
        let mut net = init_parameters(arch, 0).unwrap();
        net.map_parameters(|_| theta);
        let state = OptimizerState::new(&arch, 1.0, 0.9, 0.987, 8).unwrap();
        (net, state)
    }

    fn constant_grads(net: &Mlp, g: f64) -> MlpGradients {
        let x = array![[0.0]];
        let (_, cache) = net.forward(x.view()).unwrap();
        let mut grads = net.backward(&cache, array![[0.0]].view()).unwrap();
        for w in grads.weight.iter_mut() {
            w.fill(g);
        }
        for b in grads.bias.iter_mut() {
            b.fill(g);
        }
        grads
    }

    #[test]
    fn momentum_free_step_is_vanilla_sgd() {
        let (mut net, _) = scalar_net(1.0);
        let mut state = OptimizerState::new(net.arch(), 0.5, 0.0, 0.987, 8).unwrap();
        let grads = constant_grads(&net, 0.2);
        sgd_step(&mut net, &grads, &mut state).unwrap();
        for p in net.flat_parameters() {
            assert_abs_diff_eq!(p, 1.0 - 0.5 * 0.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn velocity_persists_without_gradient() {
        let (mut net, mut state) = scalar_net(0.0);
        let push = constant_grads(&net, 1.0);
        sgd_step(&mut net, &push, &mut state).unwrap();
        let after_push = net.flat_parameters()[0];
        let coast = constant_grads(&net, 0.0);
        sgd_step(&mut net, &coast, &mut state).unwrap();
        // v was 1.0; with g = 0, v becomes 0.9 and theta moves by -lr * 0.9.
        assert_abs_diff_eq!(net.flat_parameters()[0], after_push - 0.9, epsilon = 1e-15);
    }

    #[test]
    fn two_constant_steps_accumulate_momentum() {
        let (mut net, mut state) = scalar_net(0.0);
        let g = 0.3;
        let grads = constant_grads(&net, g);
        sgd_step(&mut net, &grads, &mut state).unwrap();
        sgd_step(&mut net, &grads, &mut state).unwrap();
        // Displacement: -(g) - (0.9 g + g) = -2.9 g with lr = 1, mom = 0.9.
        assert_abs_diff_eq!(net.flat_parameters()[0], -2.9 * g, epsilon = 1e-15);
    }

    #[test]
    fn plateau_decay_fires_at_patience() {
        let arch = ArchitectureConfig::new(1, 1, 1, 1);
        let mut state = OptimizerState::new(&arch, 1.0, 0.0, 0.987, 8).unwrap();
        // Strictly decreasing losses leave the rate alone.
        for i in 0..20 {
            plateau_decay(&mut state, 1.0 - i as f64 * 0.01);
        }
        assert_eq!(state.learning_rate, 1.0);
        // Eight flat epochs cut it once.
        for _ in 0..8 {
            plateau_decay(&mut state, 1.0);
        }
        assert_abs_diff_eq!(state.learning_rate, 0.987, epsilon = 1e-15);
        // Eight more cut it again.
        for _ in 0..8 {
            plateau_decay(&mut state, 1.0);
        }
        assert_abs_diff_eq!(state.learning_rate, 0.987 * 0.987, epsilon = 1e-15);
    }

    #[test]
    fn early_stop_patience_window() {
        let mut state = EarlyStopState::new(30);
        // Monotone improvement never stops.
        for i in 0..100 {
            assert_eq!(early_stop(&mut state, i as f64), StopDecision::Continue);
        }
        // A constant metric stops exactly after 30 stale epochs.
        let mut flat = EarlyStopState::new(30);
        flat.update(0.5);
        for i in 0..29 {
            assert_eq!(early_stop(&mut flat, 0.5), StopDecision::Continue, "epoch {i}");
        }
        assert_eq!(early_stop(&mut flat, 0.5), StopDecision::Stop);
        // Improvement inside the window resets the counter.
        let mut reset = EarlyStopState::new(30);
        reset.update(0.5);
        for _ in 0..29 {
            early_stop(&mut reset, 0.5);
        }
        assert_eq!(early_stop(&mut reset, 0.6), StopDecision::Continue);
        for _ in 0..29 {
            assert_eq!(early_stop(&mut reset, 0.6), StopDecision::Continue);
        }
        assert_eq!(early_stop(&mut reset, 0.6), StopDecision::Stop);
    }

    #[test]
    fn from_flat_round_trip() {
        let arch = ArchitectureConfig::new(3, 2, 4, 2);
        let net = init_parameters(arch, 13).unwrap();
        let rebuilt = Mlp::from_flat_parameters(arch, 13, &net.flat_parameters()).unwrap();
        assert_eq!(net, rebuilt);
        assert!(Mlp::from_flat_parameters(arch, 13, &[0.0; 3]).is_err());
    }
}
