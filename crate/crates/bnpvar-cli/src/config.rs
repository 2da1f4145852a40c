//! Run configuration: a flat, diff-friendly `key = value` format shared
//! by config files and the manifest written next to every fit.

use anyhow::{bail, Context, Result};
use bnpvar::dist::GammaScaleShapeParams;
use bnpvar::sampler::{Hyperparameters, McmcSettings, SamplerMode};
use bnpvar::var::{BlockPartitioning, PanelSpec};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Everything a fit or forecast needs, in one round-trippable bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub units: usize,
    pub vars_per_unit: usize,
    pub lags: usize,
    pub partition: BlockPartitioning,
    pub mode: SamplerMode,
    pub nu0: f64,
    pub p0: f64,
    pub s0: f64,
    pub n0: f64,
    pub nu1: f64,
    pub p1: f64,
    pub s1: f64,
    pub n1: f64,
    pub atom_c: f64,
    pub atom_d: f64,
    pub alpha_dp: f64,
    pub alpha_mix: f64,
    pub hiw_df: f64,
    pub hiw_scale: f64,
    /// `None` selects the default `2/(q-1)`.
    pub graph_psi: Option<f64>,
    pub graph_moves: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let h = Hyperparameters::default();
        Self {
            data: None,
            out_dir: None,
            units: 1,
            vars_per_unit: 1,
            lags: 1,
            partition: BlockPartitioning::PerLag,
            mode: SamplerMode::Bnp,
            nu0: h.sparse_gs.nu,
            p0: h.sparse_gs.p(),
            s0: h.sparse_gs.s,
            n0: h.sparse_gs.n,
            nu1: h.nonsparse_gs.nu,
            p1: h.nonsparse_gs.p(),
            s1: h.nonsparse_gs.s,
            n1: h.nonsparse_gs.n,
            atom_c: h.atom_mean.0,
            atom_d: h.atom_mean.1,
            alpha_dp: h.dp_concentration,
            alpha_mix: h.mixing_alpha,
            hiw_df: h.hiw_df,
            hiw_scale: h.hiw_scale,
            graph_psi: None,
            graph_moves: h.graph_moves_per_sweep,
            iterations: h.mcmc.iterations,
            burn_in: h.mcmc.burn_in,
            thin: h.mcmc.thin,
            seed: 0,
            threshold: 0.5,
        }
    }
}

impl RunConfig {
    pub fn spec(&self) -> Result<PanelSpec> {
        Ok(PanelSpec::new(self.units, self.vars_per_unit, self.lags)?)
    }

    pub fn hyper(&self) -> Result<Hyperparameters> {
        let hyper = Hyperparameters {
            sparse_gs: GammaScaleShapeParams::new(self.nu0, self.p0, self.s0, self.n0)?,
            nonsparse_gs: GammaScaleShapeParams::new(self.nu1, self.p1, self.s1, self.n1)?,
            atom_mean: (self.atom_c, self.atom_d),
            dp_concentration: self.alpha_dp,
            mixing_alpha: self.alpha_mix,
            hiw_df: self.hiw_df,
            hiw_scale: self.hiw_scale,
            graph_psi: self.graph_psi,
            graph_moves_per_sweep: self.graph_moves,
            pinned_sparse_atom: None,
            mode: self.mode,
            mcmc: McmcSettings {
                iterations: self.iterations,
                burn_in: self.burn_in,
                thin: self.thin,
                seed: self.seed,
                record_sigma: false,
            },
        };
        hyper.validate()?;
        Ok(hyper)
    }

    /// Serialize as `key = value` lines (comments carry metadata that is
    /// not part of the configuration).
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        if let Some(d) = &self.data {
            let _ = writeln!(s, "data = {}", d.display());
        }
        if let Some(d) = &self.out_dir {
            let _ = writeln!(s, "out_dir = {}", d.display());
        }
        let _ = writeln!(s, "units = {}", self.units);
        let _ = writeln!(s, "vars_per_unit = {}", self.vars_per_unit);
        let _ = writeln!(s, "lags = {}", self.lags);
        let _ = writeln!(
            s,
            "partition = {}",
            match self.partition {
                BlockPartitioning::PerLag => "per-lag",
                BlockPartitioning::Single => "single",
            }
        );
        let _ = writeln!(
            s,
            "mode = {}",
            match self.mode {
                SamplerMode::Bnp => "bnp",
                SamplerMode::BayesianLasso => "blasso",
            }
        );
        for (k, v) in [
            ("nu0", self.nu0),
            ("p0", self.p0),
            ("s0", self.s0),
            ("n0", self.n0),
            ("nu1", self.nu1),
            ("p1", self.p1),
            ("s1", self.s1),
            ("n1", self.n1),
            ("atom_c", self.atom_c),
            ("atom_d", self.atom_d),
            ("alpha_dp", self.alpha_dp),
            ("alpha_mix", self.alpha_mix),
            ("hiw_df", self.hiw_df),
            ("hiw_scale", self.hiw_scale),
            ("threshold", self.threshold),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(
            s,
            "graph_psi = {}",
            match self.graph_psi {
                Some(p) => p.to_string(),
                None => "auto".into(),
            }
        );
        let _ = writeln!(s, "graph_moves = {}", self.graph_moves);
        let _ = writeln!(s, "iterations = {}", self.iterations);
        let _ = writeln!(s, "burn_in = {}", self.burn_in);
        let _ = writeln!(s, "thin = {}", self.thin);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", lineno + 1);
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let parse_f64 = |v: &str, key: &str| -> Result<f64> {
            v.parse::<f64>().with_context(|| format!("key {key}"))
        };
        let parse_usize =
            |v: &str, key: &str| -> Result<usize> { v.parse().with_context(|| format!("key {key}")) };
        for (key, value) in &map {
            match key.as_str() {
                "data" => cfg.data = Some(PathBuf::from(value)),
                "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
                "units" => cfg.units = parse_usize(value, key)?,
                "vars_per_unit" => cfg.vars_per_unit = parse_usize(value, key)?,
                "lags" => cfg.lags = parse_usize(value, key)?,
                "partition" => {
                    cfg.partition = match value.as_str() {
                        "per-lag" => BlockPartitioning::PerLag,
                        "single" => BlockPartitioning::Single,
                        other => bail!("unknown partition {other:?}"),
                    }
                }
                "mode" => {
                    cfg.mode = match value.as_str() {
                        "bnp" => SamplerMode::Bnp,
                        "blasso" => SamplerMode::BayesianLasso,
                        other => bail!("unknown mode {other:?}"),
                    }
                }
                "nu0" => cfg.nu0 = parse_f64(value, key)?,
                "p0" => cfg.p0 = parse_f64(value, key)?,
                "s0" => cfg.s0 = parse_f64(value, key)?,
                "n0" => cfg.n0 = parse_f64(value, key)?,
                "nu1" => cfg.nu1 = parse_f64(value, key)?,
                "p1" => cfg.p1 = parse_f64(value, key)?,
                "s1" => cfg.s1 = parse_f64(value, key)?,
                "n1" => cfg.n1 = parse_f64(value, key)?,
                "atom_c" => cfg.atom_c = parse_f64(value, key)?,
                "atom_d" => cfg.atom_d = parse_f64(value, key)?,
                "alpha_dp" => cfg.alpha_dp = parse_f64(value, key)?,
                "alpha_mix" => cfg.alpha_mix = parse_f64(value, key)?,
                "hiw_df" => cfg.hiw_df = parse_f64(value, key)?,
                "hiw_scale" => cfg.hiw_scale = parse_f64(value, key)?,
                "threshold" => cfg.threshold = parse_f64(value, key)?,
                "graph_psi" => {
                    cfg.graph_psi = if value == "auto" {
                        None
                    } else {
                        Some(parse_f64(value, key)?)
                    }
                }
                "graph_moves" => cfg.graph_moves = parse_usize(value, key)?,
                "iterations" => cfg.iterations = parse_usize(value, key)?,
                "burn_in" => cfg.burn_in = parse_usize(value, key)?,
                "thin" => cfg.thin = parse_usize(value, key)?,
                "seed" => cfg.seed = value.parse().with_context(|| "key seed")?,
                other => bail!("unknown configuration key {other:?}"),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_kv(&text)
    }
}
