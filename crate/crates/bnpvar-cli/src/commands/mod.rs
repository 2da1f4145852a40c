pub mod diagnose;
pub mod fit;
pub mod forecast;
pub mod network;
pub mod simulate;

use anyhow::Result;
use std::path::Path;
use std::time::Instant;

/// Write a manifest: the round-trippable configuration plus commented
/// metadata (comments are ignored by the parser).
pub fn write_manifest(path: &Path, config_kv: &str, started: Instant) -> Result<()> {
    let mut text = String::new();
    text.push_str("# bnpvar run manifest\n");
    text.push_str(&format!(
        "# wall_time_secs = {:.3}\n",
        started.elapsed().as_secs_f64()
    ));
    text.push_str(config_kv);
    bnpvar::archive::write_atomic(path, text.as_bytes())?;
    Ok(())
}
