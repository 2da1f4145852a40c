use crate::config::RunConfig;
use anyhow::{Context, Result};
use bnpvar::archive::write_atomic;
use bnpvar::seed::stream;
use bnpvar::var::{simulate_var, write_coefficient_csv, DgpConfig, DgpKind};
use clap::Args;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args)]
pub struct SimulateArgs {
    /// Coefficient design: `block` or `random`.
    #[arg(long, default_value = "block")]
    pub kind: String,
    /// Series count.
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    /// Observations to keep (one presample row is added).
    #[arg(long, default_value_t = 100)]
    pub t: usize,
    /// Diagonal block size for the block design.
    #[arg(long, default_value_t = 4)]
    pub block_size: usize,
    /// Nonzero count for the random design.
    #[arg(long, default_value_t = 150)]
    pub nonzeros: usize,
    /// Isotropic noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let kind = match args.kind.as_str() {
        "block" => DgpKind::BlockDiagonal,
        "random" => DgpKind::RandomSparse,
        other => anyhow::bail!("unknown dgp kind {other:?} (expected block|random)"),
    };
    let mut config = DgpConfig {
        kind,
        dimension: args.m,
        block_size: args.block_size,
        nonzero_count: args.nonzeros,
        coefficient_range: (-1.4, 1.4),
        sigma: None,
        horizon: args.t,
    };
    if args.noise_sd != 1.0 {
        config.sigma = Some(
            nalgebra::DMatrix::identity(args.m, args.m) * args.noise_sd * args.noise_sd,
        );
    }
    let mut rng = stream(args.seed, "simulate", 0);
    let (data, truth) = simulate_var(&config, &mut rng).context("simulating panel")?;
    std::fs::create_dir_all(&args.out)?;
    data.to_csv(&args.out.join("data.csv"))?;
    write_coefficient_csv(&args.out.join("truth.csv"), &truth)?;
    let mut cfg = RunConfig {
        units: args.m,
        seed: args.seed,
        data: Some(args.out.join("data.csv")),
        out_dir: Some(args.out.clone()),
        ..RunConfig::default()
    };
    cfg.lags = 1;
    let mut kv = cfg.to_kv();
    kv.push_str(&format!("# dgp_kind = {}\n", args.kind));
    kv.push_str(&format!("# dgp_nonzeros = {}\n", args.nonzeros));
    super::write_manifest(&args.out.join("manifest.txt"), &kv, started)?;
    write_atomic(
        &args.out.join("labels.txt"),
        data.labels.join("\n").as_bytes(),
    )?;
    println!(
        "simulated {} series x {} observations into {}",
        args.m,
        args.t,
        args.out.display()
    );
    Ok(())
}
