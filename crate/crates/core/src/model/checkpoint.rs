//! Versioned model checkpoints: a JSON header describing the model followed
//! by the raw little-endian parameter data, so round-trips are bit-exact and
//! multi-million-parameter baselines stay compact.

use super::{BaselineModel, Featurization, Model, MoeModel};
use crate::error::{Error, Result};
use crate::nn::{ArchitectureConfig, Mlp};
use crate::spin::{build_partition, SzInterval};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8] = b"PGMOE-CKPT-V1\n";

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    n_spins: usize,
    arch: ArchitectureConfig,
    init_seed: u64,
    param_counts: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<Vec<SzInterval>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    featurization: Option<Featurization>,
}

/// Writes `model` to `path`; the exact parameter bits are preserved.
pub fn save_model(path: &Path, model: &Model) -> Result<()> {
    let (header, sets): (Header, Vec<&Mlp>) = match model {
        Model::Baseline(m) => (
            Header {
                kind: "baseline".into(),
                n_spins: m.n_spins(),
                arch: *m.net().arch(),
                init_seed: m.net().init_seed(),
                param_counts: vec![m.net().parameter_count()],
                partition: None,
                featurization: Some(m.featurization()),
            },
            vec![m.net()],
        ),
        Model::PgMoe(m) => (
            Header {
                kind: "pgmoe".into(),
                n_spins: m.n_spins(),
                arch: *m.experts()[0].arch(),
                init_seed: m.init_seed(),
                param_counts: m.experts().iter().map(|e| e.parameter_count()).collect(),
                partition: Some(m.partition().to_intervals()),
                featurization: None,
            },
            m.experts().iter().collect(),
        ),
    };
    let header_bytes = serde_json::to_vec(&header)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    w.write_all(&header_bytes)?;
    for set in sets {
        for value in set.flat_parameters() {
            w.write_all(&value.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a checkpoint written by [`save_model`].
pub fn load_model(path: &Path) -> Result<Model> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = vec![0u8; MAGIC.len()];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint(format!("{} is truncated", path.display())))?;
    if magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "{} does not start with the checkpoint magic",
            path.display()
        )));
    }
    let mut len_bytes = [0u8; 4];
    r.read_exact(&mut len_bytes)?;
    let mut header_bytes = vec![0u8; u32::from_le_bytes(len_bytes) as usize];
    r.read_exact(&mut header_bytes)?;
    let header: Header = serde_json::from_slice(&header_bytes)?;

    let mut sets = Vec::with_capacity(header.param_counts.len());
    for &count in &header.param_counts {
        if count != header.arch.parameter_count() {
            return Err(Error::Checkpoint(format!(
                "parameter count {count} does not match architecture {:?}",
                header.arch
            )));
        }
        let mut bytes = vec![0u8; count * 8];
        r.read_exact(&mut bytes)
            .map_err(|_| Error::Checkpoint("parameter payload is truncated".into()))?;
        let flat: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        sets.push(flat);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after parameters".into()));
    }

    match header.kind.as_str() {
        "baseline" => {
            let featurization = header.featurization.ok_or_else(|| {
                Error::Checkpoint("baseline checkpoint lacks a featurization".into())
            })?;
            let net = Mlp::from_flat_parameters(header.arch, header.init_seed, &sets[0])?;
            Ok(Model::Baseline(BaselineModel::from_net(
                header.n_spins,
                featurization,
                net,
            )?))
        }
        "pgmoe" => {
            let intervals = header
                .partition
                .ok_or_else(|| Error::Checkpoint("expert checkpoint lacks a partition".into()))?;
            let partition = build_partition(header.n_spins, &intervals)?;
            let experts = sets
                .iter()
                .enumerate()
                .map(|(e, flat)| {
                    Mlp::from_flat_parameters(header.arch, header.init_seed + e as u64, flat)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Model::PgMoe(MoeModel::from_experts(
                partition,
                experts,
                header.init_seed,
            )?))
        }
        other => Err(Error::Checkpoint(format!("unknown model kind {other:?}"))),
    }
}
