//! Panel VAR data structures: the panel layout, lag-design construction,
//! coefficient vectorization, synthetic data generators, stationarity
//! checking and realized-volatility preprocessing.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::io::BufRead;
use std::path::Path;

/// Panel dimensions: `units` cross-sectional units, `vars_per_unit`
/// variables each, `lags` autoregressive lags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanelSpec {
    pub units: usize,
    pub vars_per_unit: usize,
    pub lags: usize,
}

impl PanelSpec {
    pub fn new(units: usize, vars_per_unit: usize, lags: usize) -> Result<Self> {
        if units < 1 || vars_per_unit < 1 || lags < 1 {
            return Err(Error::InvalidParam(
                "panel spec requires units, vars_per_unit and lags >= 1".into(),
            ));
        }
        Ok(Self {
            units,
            vars_per_unit,
            lags,
        })
    }

    /// A plain VAR on `q` series is a panel of `q` one-variable units.
    pub fn var(q: usize, lags: usize) -> Result<Self> {
        Self::new(q, 1, lags)
    }

    /// Total number of series `N m`.
    pub fn series_count(&self) -> usize {
        self.units * self.vars_per_unit
    }

    /// Regressors per equation: intercept plus `N m p` lagged values.
    pub fn regressor_count(&self) -> usize {
        1 + self.series_count() * self.lags
    }

    /// Total coefficient count `n = N m (1 + N m p)`.
    pub fn coefficient_count(&self) -> usize {
        self.series_count() * self.regressor_count()
    }
}

/// `T x (N m)` observation panel with column labels. Rows are time
/// points; the first `lags` rows only feed the design.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesData {
    pub values: DMatrix<f64>,
    pub labels: Vec<String>,
}

impl TimeSeriesData {
    pub fn new(values: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.ncols() {
            return Err(Error::DataMismatch(format!(
                "{} labels for {} columns",
                labels.len(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DataMismatch("data contains non-finite values".into()));
        }
        Ok(Self { values, labels })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    /// Check the panel against a spec: column count `N m` and `T > p`.
    pub fn check_spec(&self, spec: &PanelSpec) -> Result<()> {
        if self.values.ncols() != spec.series_count() {
            return Err(Error::DataMismatch(format!(
                "data has {} series but the spec implies {}",
                self.values.ncols(),
                spec.series_count()
            )));
        }
        if self.len() <= spec.lags {
            return Err(Error::DataMismatch(format!(
                "need more than {} observations, got {}",
                spec.lags,
                self.len()
            )));
        }
        Ok(())
    }

    /// Read a CSV with one header row of labels and one row per time
    /// point, columns ordered unit-major.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut lines = std::io::BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty data file".into()))??;
        let labels: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("row {}: {e}", lineno + 2)))
                })
                .collect::<Result<_>>()?;
            if row.len() != labels.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {}",
                    lineno + 2,
                    row.len(),
                    labels.len()
                )));
            }
            rows.push(row);
        }
        let values = DMatrix::from_fn(rows.len(), labels.len(), |r, c| rows[r][c]);
        Self::new(values, labels)
    }

    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&self.labels.join(","));
        out.push('\n');
        for r in 0..self.values.nrows() {
            let row: Vec<String> = (0..self.values.ncols())
                .map(|c| format!("{}", self.values[(r, c)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        crate::archive::write_atomic(path, out.as_bytes())
    }
}

/// Flat coefficient layout and block partition.
///
/// Coefficients are ordered equation-major: the flat index of equation
/// `r`'s coefficient on regressor `a` is `r * (1 + N m p) + a`, where
/// regressor 0 is the intercept and the lagged values follow unit-major,
/// lag-next, variable-minor (matching the design vector).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientLayout {
    pub spec: PanelSpec,
    /// Regressor indices owned by each block; every equation carries
    /// every block.
    pub block_regressors: Vec<Vec<usize>>,
    /// Block id per flat coefficient index.
    pub block_of: Vec<usize>,
    /// Flat coefficient indices per block, equation-major.
    pub block_coeffs: Vec<Vec<usize>>,
}

/// How coefficients are grouped into prior blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockPartitioning {
    /// One block per lag; intercepts travel with the first lag.
    PerLag,
    /// All coefficients in a single block.
    Single,
}

impl CoefficientLayout {
    pub fn new(spec: PanelSpec, partitioning: BlockPartitioning) -> Self {
        let q = spec.series_count();
        let k = spec.regressor_count();
        let block_regressors: Vec<Vec<usize>> = match partitioning {
            BlockPartitioning::Single => vec![(0..k).collect()],
            BlockPartitioning::PerLag => {
                let mut blocks = vec![Vec::new(); spec.lags];
                blocks[0].push(0); // intercept with lag 1
                for a in 1..k {
                    blocks[Self::lag_of_regressor(&spec, a)].push(a);
                }
                blocks
            }
        };
        let mut block_of = vec![0usize; spec.coefficient_count()];
        let mut block_coeffs = vec![Vec::new(); block_regressors.len()];
        for (b, regs) in block_regressors.iter().enumerate() {
            for r in 0..q {
                for &a in regs {
                    let idx = r * k + a;
                    block_of[idx] = b;
                    block_coeffs[b].push(idx);
                }
            }
        }
        Self {
            spec,
            block_regressors,
            block_of,
            block_coeffs,
        }
    }

    /// Lag (0-based) of a nonzero regressor index.
    fn lag_of_regressor(spec: &PanelSpec, a: usize) -> usize {
        let within_unit = (a - 1) % (spec.vars_per_unit * spec.lags);
        within_unit / spec.vars_per_unit
    }

    pub fn block_count(&self) -> usize {
        self.block_regressors.len()
    }

    pub fn coefficient_count(&self) -> usize {
        self.block_of.len()
    }

    /// Flat index of `(equation, regressor)`.
    pub fn flat_index(&self, equation: usize, regressor: usize) -> usize {
        equation * self.spec.regressor_count() + regressor
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn equation_regressor(&self, idx: usize) -> (usize, usize) {
        let k = self.spec.regressor_count();
        (idx / k, idx % k)
    }

    /// Regressor index of series `src` at lag `l` (0-based lag).
    pub fn regressor_of_series(&self, src: usize, lag: usize) -> usize {
        let m = self.spec.vars_per_unit;
        let p = self.spec.lags;
        let unit = src / m;
        let var = src % m;
        1 + unit * (m * p) + lag * m + var
    }

    /// Flat coefficient index of equation `eq`'s loading on series `src`
    /// at lag `lag`.
    pub fn lag_coeff_index(&self, eq: usize, src: usize, lag: usize) -> usize {
        self.flat_index(eq, self.regressor_of_series(src, lag))
    }

    /// Row-major pair index `phi(i, j) = q (i - 1) + j` in 1-based terms;
    /// 0-based here: `q * i + j`.
    pub fn phi(&self, i: usize, j: usize) -> usize {
        self.spec.series_count() * i + j
    }

    /// Stack a coefficient matrix (rows = equations, columns =
    /// regressors) into the flat vector.
    pub fn vec_coefficients(&self, w: &DMatrix<f64>) -> DVector<f64> {
        let k = self.spec.regressor_count();
        let q = self.spec.series_count();
        DVector::from_fn(q * k, |idx, _| {
            let (r, a) = (idx / k, idx % k);
            w[(r, a)]
        })
    }

    /// Inverse of [`vec_coefficients`](Self::vec_coefficients).
    pub fn unvec_coefficients(&self, beta: &DVector<f64>) -> DMatrix<f64> {
        let k = self.spec.regressor_count();
        let q = self.spec.series_count();
        DMatrix::from_fn(q, k, |r, a| beta[r * k + a])
    }

    /// The `q x q` coefficient matrix at one lag, extracted from the flat
    /// vector (entry `(i, j)` loads equation `i` on series `j`).
    pub fn lag_matrix(&self, beta: &DVector<f64>, lag: usize) -> DMatrix<f64> {
        let q = self.spec.series_count();
        DMatrix::from_fn(q, q, |i, j| beta[self.lag_coeff_index(i, j, lag)])
    }
}

/// Regressor vector `(1, lagged values)` at time `t` (0-based; requires
/// `t >= lags` so that all lags exist).
pub fn build_design(data: &TimeSeriesData, spec: &PanelSpec, t: usize) -> Result<DVector<f64>> {
    data.check_spec(spec)?;
    if t < spec.lags || t >= data.len() {
        return Err(Error::InvalidParam(format!(
            "design time {t} out of range [{}, {})",
            spec.lags,
            data.len()
        )));
    }
    let m = spec.vars_per_unit;
    let p = spec.lags;
    let mut x = DVector::zeros(spec.regressor_count());
    x[0] = 1.0;
    let mut idx = 1;
    for unit in 0..spec.units {
        for lag in 1..=p {
            for var in 0..m {
                x[idx] = data.values[(t - lag, unit * m + var)];
                idx += 1;
            }
        }
    }
    Ok(x)
}

/// True iff the companion matrix of the lag coefficients has spectral
/// radius below one. `b` stacks the lag matrices side by side:
/// `q x (q p)` with lag 1 first.
pub fn check_stationarity(b: &DMatrix<f64>, lags: usize) -> bool {
    let q = b.nrows();
    if b.ncols() != q * lags || q == 0 {
        return false;
    }
    let n = q * lags;
    let mut companion = DMatrix::zeros(n, n);
    companion.view_mut((0, 0), (q, q * lags)).copy_from(b);
    for i in q..n {
        companion[(i, i - q)] = 1.0;
    }
    let eig = companion.complex_eigenvalues();
    eig.iter().all(|z| z.norm() < 1.0 - 1e-12)
}

/// Synthetic data-generating designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgpKind {
    /// Independent uniform entries in square diagonal blocks.
    BlockDiagonal,
    /// A fixed number of uniform entries at random positions.
    RandomSparse,
}

/// Configuration of the VAR(1) synthetic generator.
#[derive(Debug, Clone)]
pub struct DgpConfig {
    pub kind: DgpKind,
    pub dimension: usize,
    pub block_size: usize,
    pub nonzero_count: usize,
    pub coefficient_range: (f64, f64),
    /// Noise covariance; identity when `None`.
    pub sigma: Option<DMatrix<f64>>,
    pub horizon: usize,
}

impl DgpConfig {
    pub fn block(dimension: usize, horizon: usize) -> Self {
        Self {
            kind: DgpKind::BlockDiagonal,
            dimension,
            block_size: 4,
            nonzero_count: 0,
            coefficient_range: (-1.4, 1.4),
            sigma: None,
            horizon,
        }
    }

    pub fn random_sparse(dimension: usize, nonzero_count: usize, horizon: usize) -> Self {
        Self {
            kind: DgpKind::RandomSparse,
            dimension,
            nonzero_count,
            block_size: 4,
            coefficient_range: (-1.4, 1.4),
            sigma: None,
            horizon,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.horizon == 0 {
            return Err(Error::InvalidParam("dgp dimension and horizon must be positive".into()));
        }
        if self.kind == DgpKind::BlockDiagonal {
            if self.block_size == 0 || self.dimension % self.block_size != 0 {
                return Err(Error::InvalidParam(format!(
                    "dimension {} is not a multiple of block size {}",
                    self.dimension, self.block_size
                )));
            }
        } else if self.nonzero_count > self.dimension * self.dimension {
            return Err(Error::InvalidParam("more nonzeros than matrix cells".into()));
        }
        if !(self.coefficient_range.0 < self.coefficient_range.1) {
            return Err(Error::InvalidParam("empty coefficient range".into()));
        }
        if let Some(s) = &self.sigma {
            if s.nrows() != self.dimension || s.ncols() != self.dimension {
                return Err(Error::DataMismatch("noise covariance has wrong size".into()));
            }
        }
        Ok(())
    }
}

const DGP_MAX_REDRAWS: usize = 1000;
const DGP_BURN_IN: usize = 100;

/// Simulate a stationary VAR(1) panel; returns the data (with one extra
/// presample row feeding the first design) and the true coefficient
/// matrix. Coefficient matrices are redrawn until the stationarity check
/// passes; the series starts from zero and a burn-in of 100 pre-sample
/// steps is discarded.
pub fn simulate_var<R: Rng + ?Sized>(
    config: &DgpConfig,
    rng: &mut R,
) -> Result<(TimeSeriesData, DMatrix<f64>)> {
    config.validate()?;
    let q = config.dimension;
    let (lo, hi) = config.coefficient_range;
    let draw_entry = |rng: &mut R| lo + (hi - lo) * rng.random::<f64>();

    let b = match config.kind {
        DgpKind::BlockDiagonal => {
            // blocks are independent, so per-block rejection equals joint
            // rejection on the full matrix
            let mut b = DMatrix::zeros(q, q);
            let s = config.block_size;
            for blk in 0..q / s {
                let mut ok = false;
                for _ in 0..DGP_MAX_REDRAWS {
                    let cand = DMatrix::from_fn(s, s, |_, _| draw_entry(rng));
                    if check_stationarity(&cand, 1) {
                        b.view_mut((blk * s, blk * s), (s, s)).copy_from(&cand);
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    return Err(Error::Numerical(
                        "no stationary block found after 1000 redraws".into(),
                    ));
                }
            }
            b
        }
        DgpKind::RandomSparse => {
            let mut found = None;
            for _ in 0..DGP_MAX_REDRAWS {
                let mut b = DMatrix::zeros(q, q);
                // sample positions without replacement
                let mut cells: Vec<usize> = (0..q * q).collect();
                for k in 0..config.nonzero_count {
                    let pick = k + rng.random_range(0..cells.len() - k);
                    cells.swap(k, pick);
                }
                for &cell in &cells[..config.nonzero_count] {
                    b[(cell / q, cell % q)] = draw_entry(rng);
                }
                if check_stationarity(&b, 1) {
                    found = Some(b);
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::Numerical("no stationary matrix found after 1000 redraws".into())
            })?
        }
    };

    let sigma = config
        .sigma
        .clone()
        .unwrap_or_else(|| DMatrix::identity(q, q));
    let noise_chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("dgp noise covariance".into()))?;

    // simulate with burn-in; keep horizon rows plus one presample row
    let keep = config.horizon + 1;
    let mut y = DVector::<f64>::zeros(q);
    let mut rows = Vec::with_capacity(keep);
    for step in 0..DGP_BURN_IN + keep {
        let z = DVector::from_fn(q, |_, _| {
            let v: f64 = StandardNormal.sample(rng);
            v
        });
        y = &b * &y + noise_chol.l() * z;
        if step >= DGP_BURN_IN {
            rows.push(y.clone());
        }
    }
    let values = DMatrix::from_fn(keep, q, |r, c| rows[r][c]);
    let labels = (1..=q).map(|i| format!("y{i}")).collect();
    Ok((TimeSeriesData::new(values, labels)?, b))
}

/// Garman–Klass realized variance from aligned high/low/close series:
/// `0.5 (ln H - ln L)^2 - (2 ln 2 - 1)(ln C_t - ln C_{t-1})^2`, dropping
/// the first element. The estimator can be negative.
pub fn garman_klass_rv(high: &[f64], low: &[f64], close: &[f64]) -> Result<Vec<f64>> {
    if high.len() != low.len() || low.len() != close.len() {
        return Err(Error::DataMismatch("price series lengths differ".into()));
    }
    if high.len() < 2 {
        return Err(Error::InvalidParam("need at least two price rows".into()));
    }
    if high
        .iter()
        .chain(low)
        .chain(close)
        .any(|&p| !(p > 0.0) || !p.is_finite())
    {
        return Err(Error::InvalidParam("prices must be strictly positive".into()));
    }
    let k = 2.0 * std::f64::consts::LN_2 - 1.0;
    Ok((1..high.len())
        .map(|t| {
            let hl = (high[t].ln() - low[t].ln()).powi(2);
            let cc = (close[t].ln() - close[t - 1].ln()).powi(2);
            0.5 * hl - k * cc
        })
        .collect())
}

/// Write the dense true-coefficient sidecar produced by the simulator.
pub fn write_coefficient_csv(path: &Path, b: &DMatrix<f64>) -> Result<()> {
    let mut out = String::new();
    for r in 0..b.nrows() {
        let row: Vec<String> = (0..b.ncols()).map(|c| format!("{}", b[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    crate::archive::write_atomic(path, out.as_bytes())
}

/// Read a dense coefficient matrix CSV.
pub fn read_coefficient_csv(path: &Path) -> Result<DMatrix<f64>> {
    let content = std::fs::read_to_string(path)?;
    let rows: Vec<Vec<f64>> = content
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::Parse("empty coefficient file".into()));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged coefficient file".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]))
}
