//! Prior constants and sampler settings.

use crate::dist::GammaScaleShapeParams;
use crate::error::{Error, Result};

/// Which model the chain targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerMode {
    /// Full nonparametric model.
    Bnp,
    /// Bayesian Lasso baseline: every coefficient pinned to the sparse
    /// component, Dirichlet-process steps skipped.
    BayesianLasso,
}

/// Iteration schedule and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcSettings {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Keep covariance draws in memory (forecasting needs them; they are
    /// never written to the draw files).
    pub record_sigma: bool,
}

impl Default for McmcSettings {
    fn default() -> Self {
        Self {
            iterations: 5000,
            burn_in: 500,
            thin: 5,
            seed: 0,
            record_sigma: false,
        }
    }
}

/// Every fixed prior constant plus the MCMC schedule.
#[derive(Debug, Clone)]
pub struct Hyperparameters {
    /// Hyperprior of the shrink-to-zero component's shape and scale.
    pub sparse_gs: GammaScaleShapeParams,
    /// Base-measure hyperprior of the clustering component.
    pub nonsparse_gs: GammaScaleShapeParams,
    /// Mean and variance `(c, d)` of the base measure's normal location.
    pub atom_mean: (f64, f64),
    /// Dirichlet-process concentration.
    pub dp_concentration: f64,
    /// Beta prior parameter for each block's mixing probability.
    pub mixing_alpha: f64,
    /// Hyper-inverse-Wishart degrees of freedom.
    pub hiw_df: f64,
    /// Scale matrix multiplier: `L = hiw_scale * I`.
    pub hiw_scale: f64,
    /// Edge-inclusion probability; `None` selects `2/(q-1)`.
    pub graph_psi: Option<f64>,
    /// Edge toggles attempted per sweep.
    pub graph_moves_per_sweep: usize,
    /// Upper support bound for the sparse component's shape: the model
    /// truncates its hyperprior to `(0, sparse_shape_cap]`. The default
    /// sparse setting (`nu0 > n0`) is non-normalizable in the shape
    /// direction, and its conjugate updates inherit the defect, so the
    /// untruncated chain drifts into a degenerate ridge; a small cap
    /// keeps the shrinkage kernel heavy-tailed per coordinate. Settings
    /// with `nu < n` are proper and sit far below any reasonable cap.
    pub sparse_shape_cap: f64,
    /// Fix the sparse atom at given `(gamma0, tau0)` instead of sampling.
    pub pinned_sparse_atom: Option<(f64, f64)>,
    pub mode: SamplerMode,
    pub mcmc: McmcSettings,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            sparse_gs: GammaScaleShapeParams::new(30.0, 0.5, 1.0 / 30.0, 18.0).unwrap(),
            nonsparse_gs: GammaScaleShapeParams::new(3.0, 0.5, 1.0 / 3.0, 10.0).unwrap(),
            atom_mean: (0.0, 10.0),
            dp_concentration: 1.0,
            mixing_alpha: 1.0,
            hiw_df: 3.0,
            hiw_scale: 1.0,
            graph_psi: None,
            graph_moves_per_sweep: 1,
            sparse_shape_cap: 5.0,
            pinned_sparse_atom: None,
            mode: SamplerMode::Bnp,
            mcmc: McmcSettings::default(),
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        self.sparse_gs.validate()?;
        self.nonsparse_gs.validate()?;
        // both hyperprior settings must keep p <= 1
        for (name, gs) in [("sparse", &self.sparse_gs), ("nonsparse", &self.nonsparse_gs)] {
            if gs.ln_p > 0.0 {
                return Err(Error::InvalidParam(format!(
                    "{name} gamma scale-shape p must not exceed 1"
                )));
            }
        }
        if !(self.atom_mean.1 > 0.0) {
            return Err(Error::InvalidParam("atom mean variance d must be positive".into()));
        }
        if !(self.dp_concentration > 0.0) {
            return Err(Error::InvalidParam("dp concentration must be positive".into()));
        }
        if !(self.mixing_alpha > 0.0) {
            return Err(Error::InvalidParam("mixing alpha must be positive".into()));
        }
        if !(self.hiw_df > 0.0) || !(self.hiw_scale > 0.0) {
            return Err(Error::InvalidParam("hiw df and scale must be positive".into()));
        }
        if let Some(psi) = self.graph_psi {
            if !(psi > 0.0 && psi < 1.0) {
                return Err(Error::InvalidParam(format!(
                    "graph psi must lie in (0,1), got {psi}"
                )));
            }
        }
        if !(self.sparse_shape_cap > 0.0) {
            return Err(Error::InvalidParam("sparse shape cap must be positive".into()));
        }
        if let Some((g0, t0)) = self.pinned_sparse_atom {
            if !(g0 > 0.0 && t0 > 0.0) {
                return Err(Error::InvalidParam("pinned sparse atom must be positive".into()));
            }
        }
        if self.mcmc.thin < 1 {
            return Err(Error::InvalidParam("thin must be at least 1".into()));
        }
        if self.mcmc.burn_in >= self.mcmc.iterations {
            return Err(Error::InvalidParam(
                "burn-in must be smaller than the iteration count".into(),
            ));
        }
        Ok(())
    }
}
