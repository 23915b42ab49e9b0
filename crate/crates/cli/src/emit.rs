//! CSV emission with a `#`-prefixed metadata header so every output file
//! records the tool version and a hash of the configuration that produced
//! it.

use anyhow::{Context, Result};
use std::io::Write;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// FNV-1a over the canonical config serialization.
pub fn config_hash(canonical: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub fn metadata_header(subcommand: &str, canonical_config: &str) -> String {
    format!(
        "# rydnoise {VERSION}\n# subcommand: {subcommand}\n# config-hash: {:016x}\n",
        config_hash(canonical_config)
    )
}

/// Writes `content` to `path`, or to stdout when no path is given.
pub fn write_output(path: Option<&str>, content: &str) -> Result<()> {
    match path {
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .context("writing stdout")?;
        }
        Some(p) => {
            std::fs::write(p, content).with_context(|| format!("writing {p}"))?;
        }
    }
    Ok(())
}

/// Fixed-precision float formatting keeps reruns byte-identical.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.9e}")
    } else if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else if v.is_infinite() {
        "-inf".to_string()
    } else {
        "nan".to_string()
    }
}
