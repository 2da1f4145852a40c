use crate::config::RunConfig;
use anyhow::{Context, Result};
use bnpvar::archive::DrawArchive;
use bnpvar::sampler::Sampler;
use bnpvar::seed::stream;
use bnpvar::var::TimeSeriesData;
use clap::Args;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args, Default)]
pub struct FitArgs {
    /// Optional key = value configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Draw output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub units: Option<usize>,
    #[arg(long)]
    pub vars_per_unit: Option<usize>,
    #[arg(long)]
    pub lags: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `bnp` or `blasso`.
    #[arg(long)]
    pub mode: Option<String>,
    /// `per-lag` or `single`.
    #[arg(long)]
    pub partition: Option<String>,
    /// Edge-inclusion prior probability (`auto` for 2/(q-1)).
    #[arg(long)]
    pub graph_psi: Option<String>,
}

pub fn resolve_config(args: &FitArgs) -> Result<RunConfig> {
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
    if let Some(v) = args.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = args.burnin {
        cfg.burn_in = v;
    }
    if let Some(v) = args.thin {
        cfg.thin = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.mode {
        cfg.mode = match v.as_str() {
            "bnp" => bnpvar::sampler::SamplerMode::Bnp,
            "blasso" => bnpvar::sampler::SamplerMode::BayesianLasso,
            other => anyhow::bail!("unknown mode {other:?}"),
        };
    }
    if let Some(v) = &args.partition {
        cfg.partition = match v.as_str() {
            "per-lag" => bnpvar::var::BlockPartitioning::PerLag,
            "single" => bnpvar::var::BlockPartitioning::Single,
            other => anyhow::bail!("unknown partition {other:?}"),
        };
    }
    if let Some(v) = &args.graph_psi {
        cfg.graph_psi = if v == "auto" {
            None
        } else {
            Some(v.parse().context("--graph-psi")?)
        };
    }
    Ok(cfg)
}

pub fn run(args: FitArgs) -> Result<()> {
    let started = Instant::now();
    let cfg = resolve_config(&args)?;
    let data_path = cfg
        .data
        .clone()
        .context("fit needs --data or a config with a data key")?;
    let out_dir = cfg
        .out_dir
        .clone()
        .context("fit needs --out or a config with an out_dir key")?;
    let data = TimeSeriesData::from_csv(&data_path)
        .with_context(|| format!("reading {}", data_path.display()))?;
    let spec = cfg.spec()?;
    data.check_spec(&spec)?;
    let hyper = cfg.hyper()?;
    let sampler = Sampler::new(spec, cfg.partition, hyper)?;
    let mut rng = stream(cfg.seed, "chain", 0);
    let records = sampler.run(&data, &mut rng)?;
    let archive = DrawArchive::new(spec, cfg.partition, data.labels.clone(), records);
    archive.write(&out_dir)?;
    super::write_manifest(&out_dir.join("manifest.txt"), &cfg.to_kv(), started)?;
    println!(
        "retained {} draws in {}",
        archive.records.len(),
        out_dir.display()
    );
    Ok(())
}
