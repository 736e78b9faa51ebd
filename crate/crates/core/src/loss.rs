//! Training objectives and their exact gradients with respect to the
//! predicted wavefunction.
//!
//! Two terms are combined: a supervised cosine-similarity loss against oracle
//! labels, and an unsupervised variational term — the Rayleigh quotient of
//! the predicted state — which by the variational principle is minimized
//! exactly on the ground state and needs no labels at all. Per-batch means
//! are taken inside each term; the scaling weights multiply the means.

use crate::eigen::Wavefunction;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianOperator;
use serde::{Deserialize, Serialize};

/// A predicted norm below this is a hard error: renormalizing silently would
/// mask a diverging network.
pub const NORM_FLOOR: f64 = 1e-12;

/// Scaling factors for the two loss terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub lambda_cs: f64,
    pub lambda_pg: f64,
}

impl LossWeights {
    pub fn new(lambda_cs: f64, lambda_pg: f64) -> Self {
        LossWeights {
            lambda_cs,
            lambda_pg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_cs < 0.0 || self.lambda_pg < 0.0 {
            return Err(Error::InvalidConfig(
                "loss weights must be non-negative".into(),
            ));
        }
        if self.lambda_cs == 0.0 && self.lambda_pg == 0.0 {
            return Err(Error::InvalidConfig(
                "at least one loss weight must be positive for training".into(),
            ));
        }
        Ok(())
    }
}

/// Whether the variational term is active yet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainingPhase {
    /// Cosine loss on labeled items only; unlabeled items are skipped.
    Warmup,
    /// Labeled items get both terms, unlabeled items the variational term.
    Full,
}

/// Values of one combined-loss evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub cs_value: f64,
    pub pg_value: f64,
    pub combined: f64,
    pub batch_size: usize,
    /// Unlabeled items ignored because the batch was evaluated in warmup.
    pub skipped_unlabeled: usize,
}

fn check_norm(psi: &[f64], index: usize) -> Result<f64> {
    let norm = psi.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm < NORM_FLOOR {
        return Err(Error::NumericalDegeneracy {
            batch_index: index,
            norm,
        });
    }
    Ok(norm)
}

/// Mean of `1 - cos(theta_i)` over the batch, with the gradient with respect
/// to each predicted vector.
pub fn cosine_loss(
    predicted: &[Wavefunction],
    truth: &[Wavefunction],
) -> Result<(f64, Vec<Vec<f64>>)> {
    if predicted.len() != truth.len() || predicted.is_empty() {
        return Err(Error::LengthMismatch {
            expected: truth.len().max(1),
            got: predicted.len(),
        });
    }
    let m = predicted.len() as f64;
    let mut value = 0.0;
    let mut grads = Vec::with_capacity(predicted.len());
    for (i, (hat, psi)) in predicted.iter().zip(truth).enumerate() {
        if hat.len() != psi.len() {
            return Err(Error::LengthMismatch {
                expected: psi.len(),
                got: hat.len(),
            });
        }
        let hat_norm = check_norm(hat.coefficients(), i)?;
        let psi_norm = psi.norm();
        let dot = hat.dot(psi);
        let cos = dot / (hat_norm * psi_norm);
        value += (1.0 - cos) / m;
        // d(1 - cos)/d hat = -(psi / (|psi||hat|) - cos * hat / |hat|^2).
        let grad: Vec<f64> = hat
            .coefficients()
            .iter()
            .zip(psi.coefficients())
            .map(|(&h, &p)| -(p / (psi_norm * hat_norm) - cos * h / (hat_norm * hat_norm)) / m)
            .collect();
        grads.push(grad);
    }
    Ok((value, grads))
}

/// Mean Rayleigh quotient `<psi|H|psi> / <psi|psi>` over the batch, with the
/// gradient with respect to each predicted vector. Needs no labels.
pub fn pg_loss(
    predicted: &[Wavefunction],
    hams: &[&HamiltonianOperator],
) -> Result<(f64, Vec<Vec<f64>>)> {
    if predicted.len() != hams.len() || predicted.is_empty() {
        return Err(Error::LengthMismatch {
            expected: hams.len().max(1),
            got: predicted.len(),
        });
    }
    let m = predicted.len() as f64;
    let mut value = 0.0;
    let mut grads = Vec::with_capacity(predicted.len());
    for (i, (hat, h)) in predicted.iter().zip(hams).enumerate() {
        check_norm(hat.coefficients(), i)?;
        let psi = hat.coefficients();
        let hpsi = h.matvec(psi)?;
        let norm_sq: f64 = psi.iter().map(|c| c * c).sum();
        let quad: f64 = psi.iter().zip(&hpsi).map(|(a, b)| a * b).sum();
        let rayleigh = quad / norm_sq;
        value += rayleigh / m;
        // d R / d psi = (2 / <psi,psi>) (H psi - R psi).
        let grad: Vec<f64> = psi
            .iter()
            .zip(&hpsi)
            .map(|(&p, &hp)| 2.0 / (m * norm_sq) * (hp - rayleigh * p))
            .collect();
        grads.push(grad);
    }
    Ok((value, grads))
}

/// The weighted combination over a batch that may mix labeled and unlabeled
/// items. Labeled items carry a truth vector; unlabeled items contribute only
/// the variational term, and only once the phase is [`TrainingPhase::Full`].
///
/// Each term averages over the items it actually covers: the cosine term over
/// the labeled items, the variational term over the whole batch.
pub fn combined_loss(
    predicted: &[Wavefunction],
    truth: &[Option<&Wavefunction>],
    hams: &[&HamiltonianOperator],
    weights: &LossWeights,
    phase: TrainingPhase,
) -> Result<(LossReport, Vec<Vec<f64>>)> {
    weights.validate()?;
    if predicted.len() != truth.len() || predicted.len() != hams.len() || predicted.is_empty() {
        return Err(Error::LengthMismatch {
            expected: truth.len().max(1),
            got: predicted.len(),
        });
    }
    let m = predicted.len();
    let mut grads: Vec<Vec<f64>> = predicted.iter().map(|p| vec![0.0; p.len()]).collect();

    // Supervised term over the labeled subset.
    let labeled_idx: Vec<usize> = (0..m).filter(|&i| truth[i].is_some()).collect();
    let mut cs_value = 0.0;
    if !labeled_idx.is_empty() && weights.lambda_cs > 0.0 {
        let preds: Vec<Wavefunction> = labeled_idx.iter().map(|&i| predicted[i].clone()).collect();
        let truths: Vec<Wavefunction> = labeled_idx
            .iter()
            .map(|&i| truth[i].expect("filtered to labeled").clone())
            .collect();
        let (value, cs_grads) = cosine_loss(&preds, &truths)?;
        cs_value = value;
        for (&i, g) in labeled_idx.iter().zip(&cs_grads) {
            for (acc, &gi) in grads[i].iter_mut().zip(g) {
                *acc += weights.lambda_cs * gi;
            }
        }
    }

    // Variational term: full phase covers every item; warmup skips the batch.
    let mut pg_value = 0.0;
    let mut skipped_unlabeled = 0;
    match phase {
        TrainingPhase::Full => {
            if weights.lambda_pg > 0.0 {
                let (value, pg_grads) = pg_loss(predicted, hams)?;
                pg_value = value;
                for (acc_vec, g) in grads.iter_mut().zip(&pg_grads) {
                    for (acc, &gi) in acc_vec.iter_mut().zip(g) {
                        *acc += weights.lambda_pg * gi;
                    }
                }
            }
        }
        TrainingPhase::Warmup => {
            skipped_unlabeled = m - labeled_idx.len();
        }
    }

    let combined = weights.lambda_cs * cs_value + weights.lambda_pg * pg_value;
    Ok((
        LossReport {
            cs_value,
            pg_value,
            combined,
            batch_size: m,
            skipped_unlabeled,
        },
        grads,
    ))
}
