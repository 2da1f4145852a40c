//! Estimation accuracy and rolling forecast evaluation.

use crate::error::{Error, Result};
use crate::sampler::{DrawRecord, Hyperparameters, Sampler, SamplerMode};
use crate::seed::derive_seed;
use crate::var::{build_design, BlockPartitioning, PanelSpec, TimeSeriesData};
use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Mean squared elementwise deviation between two coefficient matrices.
pub fn msd(estimate: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    if estimate.shape() != truth.shape() {
        return Err(Error::DataMismatch(format!(
            "shape {:?} vs {:?}",
            estimate.shape(),
            truth.shape()
        )));
    }
    let n = (estimate.nrows() * estimate.ncols()) as f64;
    Ok(estimate
        .iter()
        .zip(truth.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

/// Rolling one-step-ahead design.
#[derive(Debug, Clone)]
pub struct ForecastConfig {
    /// Observations per estimation window (must exceed the lag order).
    pub window: usize,
    /// Number of one-step origins to evaluate.
    pub origins: usize,
    /// Per-origin chain length and burn-in (reduced against full runs to
    /// keep rolling exercises tractable).
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Cap on posterior draws fed to each predictive.
    pub predictive_draws: usize,
    pub seed: u64,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            window: 152,
            origins: 58,
            iterations: 1500,
            burn_in: 300,
            thin: 1,
            predictive_draws: 1200,
            seed: 0,
        }
    }
}

/// Forecast metrics: per-series rows plus the aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub series: Vec<String>,
    pub rmse: Vec<f64>,
    /// Average log predictive score of the per-series marginal.
    pub lps: Vec<f64>,
    /// Mean of the per-series RMSEs.
    pub aggregate_rmse: f64,
    /// Average joint log predictive score.
    pub aggregate_lps: f64,
}

impl MetricReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,rmse,lps\n");
        for i in 0..self.series.len() {
            out.push_str(&format!("{},{},{}\n", self.series[i], self.rmse[i], self.lps[i]));
        }
        out.push_str(&format!(
            "aggregate,{},{}\n",
            self.aggregate_rmse, self.aggregate_lps
        ));
        out
    }
}

/// RMSE ratios and score differences against a baseline report
/// (ratio < 1 and difference > 0 favour the model).
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    pub series: Vec<String>,
    pub rmse_ratio: Vec<f64>,
    pub lps_diff: Vec<f64>,
    pub aggregate_rmse_ratio: f64,
    pub aggregate_lps_diff: f64,
}

impl RatioTable {
    pub fn against(model: &MetricReport, baseline: &MetricReport) -> Result<Self> {
        if model.series != baseline.series {
            return Err(Error::DataMismatch("reports cover different series".into()));
        }
        Ok(Self {
            series: model.series.clone(),
            rmse_ratio: model
                .rmse
                .iter()
                .zip(&baseline.rmse)
                .map(|(m, b)| m / b)
                .collect(),
            lps_diff: model
                .lps
                .iter()
                .zip(&baseline.lps)
                .map(|(m, b)| m - b)
                .collect(),
            aggregate_rmse_ratio: model.aggregate_rmse / baseline.aggregate_rmse,
            aggregate_lps_diff: model.aggregate_lps - baseline.aggregate_lps,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,rmse_ratio,lps_diff\n");
        for i in 0..self.series.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.series[i], self.rmse_ratio[i], self.lps_diff[i]
            ));
        }
        out.push_str(&format!(
            "aggregate,{},{}\n",
            self.aggregate_rmse_ratio, self.aggregate_lps_diff
        ));
        out
    }
}

/// One origin's predictive: Gaussian mixture over retained draws.
#[derive(Debug, Clone)]
pub struct PredictiveDraw {
    pub mean: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

/// Score one origin: squared error of the predictive mean per series,
/// marginal log scores per series, and the joint log score, all of the
/// draw-averaged (Rao-Blackwellized) Gaussian mixture.
pub fn score_origin(
    predictive: &[PredictiveDraw],
    realized: &DVector<f64>,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if predictive.is_empty() {
        return Err(Error::InvalidParam("empty predictive".into()));
    }
    let q = realized.len();
    let h = predictive.len() as f64;
    // point forecast: average of component means
    let mut point = DVector::zeros(q);
    for p in predictive {
        point += &p.mean;
    }
    point /= h;
    let sq_err: Vec<f64> = (0..q)
        .map(|r| (point[r] - realized[r]).powi(2))
        .collect();
    // marginal mixture density per series
    let mut lps = Vec::with_capacity(q);
    for r in 0..q {
        let terms: Vec<f64> = predictive
            .iter()
            .map(|p| {
                let var = p.sigma[(r, r)];
                let d = realized[r] - p.mean[r];
                -0.5 * (LN_2PI + var.ln()) - 0.5 * d * d / var
            })
            .collect();
        lps.push(log_mean_exp(&terms));
    }
    // joint mixture density
    let joint_terms: Vec<f64> = predictive
        .iter()
        .map(|p| {
            let chol = p
                .sigma
                .clone()
                .cholesky()
                .ok_or_else(|| Error::NotPositiveDefinite("predictive covariance".into()))?;
            let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
            let r = realized - &p.mean;
            let solved = chol.solve(&r);
            Ok(-0.5 * (q as f64 * LN_2PI + logdet) - 0.5 * r.dot(&solved))
        })
        .collect::<Result<_>>()?;
    Ok((sq_err, lps, log_mean_exp(&joint_terms)))
}

fn log_mean_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + (sum / terms.len() as f64).ln()
}

/// Rolling one-step forecasts: refit on each trailing window, form the
/// draw-averaged Gaussian predictive, and score the realization. Origins
/// run in parallel with seeds derived per origin.
pub fn rolling_forecast(
    data: &TimeSeriesData,
    spec: &PanelSpec,
    hyper: &Hyperparameters,
    partitioning: BlockPartitioning,
    config: &ForecastConfig,
) -> Result<MetricReport> {
    data.check_spec(spec)?;
    if config.window <= spec.lags {
        return Err(Error::InvalidParam(format!(
            "window {} leaves no usable observations at lag order {}",
            config.window, spec.lags
        )));
    }
    if config.origins == 0 {
        return Err(Error::InvalidParam("need at least one forecast origin".into()));
    }
    if config.window + config.origins > data.len() {
        return Err(Error::DataMismatch(format!(
            "window {} + origins {} exceeds the {} available rows",
            config.window,
            config.origins,
            data.len()
        )));
    }
    let q = spec.series_count();
    let mut hyper = hyper.clone();
    hyper.mcmc.iterations = config.iterations;
    hyper.mcmc.burn_in = config.burn_in;
    hyper.mcmc.thin = config.thin;
    hyper.mcmc.record_sigma = true;
    let sampler = Sampler::new(*spec, partitioning, hyper)?;
    let start = data.len() - config.window - config.origins;

    let per_origin: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..config.origins)
        .into_par_iter()
        .map(|o| -> Result<(Vec<f64>, Vec<f64>, f64)> {
            let lo = start + o;
            let window = TimeSeriesData::new(
                data.values.rows(lo, config.window).into_owned(),
                data.labels.clone(),
            )?;
            let mut rng =
                ChaCha12Rng::seed_from_u64(derive_seed(config.seed, "forecast-origin", o as u64));
            let records = sampler.run(&window, &mut rng)?;
            // design at the forecast target, using rows up to the origin
            let context = TimeSeriesData::new(
                data.values.rows(lo, config.window + 1).into_owned(),
                data.labels.clone(),
            )?;
            let x = build_design(&context, spec, config.window)?;
            let realized = data.values.row(lo + config.window).transpose();
            let take = records.len().min(config.predictive_draws);
            let predictive: Vec<PredictiveDraw> = records[records.len() - take..]
                .iter()
                .map(|rec| {
                    let w = sampler
                        .layout
                        .unvec_coefficients(&DVector::from_vec(rec.beta.clone()));
                    PredictiveDraw {
                        mean: &w * &x,
                        sigma: rec
                            .sigma
                            .clone()
                            .expect("record_sigma is set for forecasting"),
                    }
                })
                .collect();
            score_origin(&predictive, &realized)
        })
        .collect::<Result<_>>()?;

    let origins = per_origin.len() as f64;
    let mut rmse = vec![0.0; q];
    let mut lps = vec![0.0; q];
    let mut joint = 0.0;
    for (sq, marg, j) in &per_origin {
        for r in 0..q {
            rmse[r] += sq[r];
            lps[r] += marg[r];
        }
        joint += j;
    }
    for r in 0..q {
        rmse[r] = (rmse[r] / origins).sqrt();
        lps[r] /= origins;
    }
    Ok(MetricReport {
        series: data.labels.clone(),
        aggregate_rmse: rmse.iter().sum::<f64>() / q as f64,
        aggregate_lps: joint / origins,
        rmse,
        lps,
    })
}

/// Bayesian-Lasso baseline: the same Gibbs sampler with every
/// coefficient pinned to the sparse component and the Dirichlet-process
/// steps skipped.
pub fn blasso_baseline(
    data: &TimeSeriesData,
    spec: &PanelSpec,
    hyper: &Hyperparameters,
    partitioning: BlockPartitioning,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<DrawRecord>> {
    let mut hyper = hyper.clone();
    hyper.mode = SamplerMode::BayesianLasso;
    let sampler = Sampler::new(*spec, partitioning, hyper)?;
    sampler.run(data, rng)
}
