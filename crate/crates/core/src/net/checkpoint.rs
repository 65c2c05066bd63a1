//! Versioned JSON checkpoints.
//!
//! Floats are written in shortest round-trip form, so a reload is bit-exact.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "pushgrasp-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    payload: T,
}

pub fn to_checkpoint_string<T: Serialize>(payload: &T) -> Result<String> {
    Ok(serde_json::to_string(&Envelope {
        format: CHECKPOINT_FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        payload,
    })?)
}

pub fn from_checkpoint_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let env: Envelope<T> = serde_json::from_str(text)?;
    if env.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint(format!("not a checkpoint (format {:?})", env.format)));
    }
    if env.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version {}",
            env.version
        )));
    }
    Ok(env.payload)
}

pub fn save_checkpoint<T: Serialize>(path: &Path, payload: &T) -> Result<()> {
    std::fs::write(path, to_checkpoint_string(payload)?)?;
    Ok(())
}

pub fn load_checkpoint<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Checkpoint(format!("cannot read {}: {e}", path.display())))?;
    from_checkpoint_str(&text)
}

/// Hex SHA-256 of the serialized payload.
pub fn fingerprint<T: Serialize>(payload: &T) -> Result<String> {
    let bytes = serde_json::to_vec(payload)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
