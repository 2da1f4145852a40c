use crate::config::RunConfig;
use anyhow::{Context, Result};
use bnpvar::archive::write_atomic;
use bnpvar::evaluate::{rolling_forecast, ForecastConfig, RatioTable};
use bnpvar::sampler::SamplerMode;
use bnpvar::var::TimeSeriesData;
use clap::Args;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args)]
pub struct ForecastArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub units: Option<usize>,
    #[arg(long)]
    pub vars_per_unit: Option<usize>,
    #[arg(long)]
    pub lags: Option<usize>,
    /// Estimation window length.
    #[arg(long, default_value_t = 152)]
    pub window: usize,
    /// Number of one-step origins.
    #[arg(long, default_value_t = 58)]
    pub origins: usize,
    /// Per-origin iterations and burn-in.
    #[arg(long, default_value_t = 1500)]
    pub iterations: usize,
    #[arg(long, default_value_t = 300)]
    pub burnin: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Posterior draws per predictive.
    #[arg(long, default_value_t = 1200)]
    pub predictive_draws: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also run the Bayesian-Lasso baseline and emit the ratio table.
    #[arg(long)]
    pub baseline: bool,
}

pub fn run(args: ForecastArgs) -> Result<()> {
    let started = Instant::now();
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &args.data {
        cfg.data = Some(v.clone());
    }
    if let Some(v) = &args.out {
        cfg.out_dir = Some(v.clone());
    }
    if let Some(v) = args.units {
        cfg.units = v;
    }
    if let Some(v) = args.vars_per_unit {
        cfg.vars_per_unit = v;
    }
    if let Some(v) = args.lags {
        cfg.lags = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    let data_path = cfg.data.clone().context("forecast needs --data")?;
    let out_dir = cfg.out_dir.clone().context("forecast needs --out")?;
    let data = TimeSeriesData::from_csv(&data_path)
        .with_context(|| format!("reading {}", data_path.display()))?;
    let spec = cfg.spec()?;
    data.check_spec(&spec)?;
    let fc = ForecastConfig {
        window: args.window,
        origins: args.origins,
        iterations: args.iterations,
        burn_in: args.burnin,
        thin: args.thin,
        predictive_draws: args.predictive_draws,
        seed: cfg.seed,
    };
    std::fs::create_dir_all(&out_dir)?;
    let hyper = cfg.hyper()?;
    let report = rolling_forecast(&data, &spec, &hyper, cfg.partition, &fc)?;
    write_atomic(&out_dir.join("metrics.csv"), report.to_csv().as_bytes())?;
    if args.baseline {
        let mut baseline_hyper = hyper.clone();
        baseline_hyper.mode = SamplerMode::BayesianLasso;
        let baseline = rolling_forecast(&data, &spec, &baseline_hyper, cfg.partition, &fc)?;
        write_atomic(
            &out_dir.join("metrics_baseline.csv"),
            baseline.to_csv().as_bytes(),
        )?;
        let ratios = RatioTable::against(&report, &baseline)?;
        write_atomic(&out_dir.join("ratios.csv"), ratios.to_csv().as_bytes())?;
    }
    super::write_manifest(&out_dir.join("manifest.txt"), &cfg.to_kv(), started)?;
    println!(
        "aggregate rmse {:.4}, joint lps {:.4} over {} origins ({})",
        report.aggregate_rmse,
        report.aggregate_lps,
        args.origins,
        out_dir.display()
    );
    Ok(())
}
