//! Precomputed design quantities for one dataset.

use crate::error::Result;
use crate::var::{build_design, CoefficientLayout, PanelSpec, TimeSeriesData};
use nalgebra::DMatrix;

/// Design matrix, response matrix and the cross-product blocks reused at
/// every sweep.
#[derive(Debug, Clone)]
pub struct DesignData {
    /// `t_eff x (1 + q p)` regressor rows.
    pub x: DMatrix<f64>,
    /// `t_eff x q` responses aligned with `x`.
    pub y: DMatrix<f64>,
    pub t_eff: usize,
    /// Per-block design columns.
    pub x_blocks: Vec<DMatrix<f64>>,
    /// Per-block `X_b' X_b`.
    pub sxx_blocks: Vec<DMatrix<f64>>,
}

impl DesignData {
    pub fn new(
        data: &TimeSeriesData,
        spec: &PanelSpec,
        layout: &CoefficientLayout,
    ) -> Result<Self> {
        data.check_spec(spec)?;
        let t_eff = data.len() - spec.lags;
        let k = spec.regressor_count();
        let q = spec.series_count();
        let mut x = DMatrix::zeros(t_eff, k);
        let mut y = DMatrix::zeros(t_eff, q);
        for (row, t) in (spec.lags..data.len()).enumerate() {
            let xr = build_design(data, spec, t)?;
            x.row_mut(row).copy_from(&xr.transpose());
            y.row_mut(row).copy_from(&data.values.row(t));
        }
        Ok(Self::from_matrices(x, y, layout))
    }

    /// A design with no observations: the sampler then targets the prior.
    pub fn empty(spec: &PanelSpec, layout: &CoefficientLayout) -> Self {
        let k = spec.regressor_count();
        let q = spec.series_count();
        Self::from_matrices(DMatrix::zeros(0, k), DMatrix::zeros(0, q), layout)
    }

    fn from_matrices(x: DMatrix<f64>, y: DMatrix<f64>, layout: &CoefficientLayout) -> Self {
        let t_eff = x.nrows();
        let x_blocks: Vec<DMatrix<f64>> = layout
            .block_regressors
            .iter()
            .map(|regs| {
                DMatrix::from_fn(t_eff, regs.len(), |r, c| x[(r, regs[c])])
            })
            .collect();
        let sxx_blocks = x_blocks
            .iter()
            .map(|xb| xb.transpose() * xb)
            .collect();
        Self {
            x,
            y,
            t_eff,
            x_blocks,
            sxx_blocks,
        }
    }
}
