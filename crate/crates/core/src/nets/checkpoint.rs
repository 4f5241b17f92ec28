//! Checkpoint container: a versioned JSON file holding the architecture tag,
//! every parameter tensor in row-major order, and (for training resume) the
//! optimizer and environment state including RNG streams. Round-trips are
//! bit-exact for finite values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nets::policy::PolicyParams;
use crate::ppo::TrainResume;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub params: PolicyParams,
    /// Present on training checkpoints; absent on exported policies.
    pub train: Option<TrainResume>,
}

impl Checkpoint {
    pub fn policy_only(params: PolicyParams) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            params,
            train: None,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let ckpt: Checkpoint = serde_json::from_reader(BufReader::new(file))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {})",
                ckpt.version, CHECKPOINT_VERSION
            )));
        }
        Ok(ckpt)
    }
}
