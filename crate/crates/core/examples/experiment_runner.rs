//! Config-driven runs: parse a JSON config, write artifacts and a manifest.
//! Output goes to `experiment_out/` in the working directory.
//!
//! Run with `cargo run --release --example experiment_runner`.

use smooth_wasserstein::experiments::{run, ExperimentConfig};
use smooth_wasserstein::Result;
use std::path::Path;

const CONFIG: &str = r#"{
  "kind": "level_curve",
  "seed": 11,
  "spec_a": { "dim": 1, "kind": "uniform_cube", "half_width": 0.5 },
  "m": 64, "n": 64,
  "test": { "p": 1.0, "sigma": 0.1, "replicates": 200 },
  "alphas": [0.05, 0.1, 0.2, 0.3],
  "repetitions": 40
}"#;

fn main() -> Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    let manifest = run(&cfg, Some(Path::new("experiment_out")))?;
    println!("config sha256 {}", manifest.config_sha256);
    for f in &manifest.outputs {
        println!("{:<20} {:>7} bytes  {}", f.file, f.bytes, &f.sha256[..16]);
    }
    println!("diagnostics: {}", manifest.diagnostics);
    Ok(())
}
