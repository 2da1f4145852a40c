//! Joint log density of the augmented model, used by invariance tests
//! and debugging. Normalizing constants that do not depend on the state
//! (per-atom base-measure constants and the like) are included where they
//! are cheap; terms over unrepresented sticks are omitted, which matches
//! the slice representation of the chain.

use crate::dist::gs_log_kernel;
use crate::error::{Error, Result};
use crate::graph::{graph_log_prior, hiw_log_normalizer, submatrix};
use crate::sampler::chain::Sampler;
use crate::sampler::design::DesignData;
use crate::sampler::state::ChainState;
use crate::special::ln_gamma;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + var.ln()) - 0.5 * d * d / var
}

fn ln_gamma_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)
}

/// Joint log density of data and the represented state.
pub fn log_joint(sampler: &Sampler, state: &ChainState, design: &DesignData) -> Result<f64> {
    let hyper = &sampler.hyper;
    let layout = &sampler.layout;
    let mut acc = 0.0;

    // likelihood
    if design.t_eff > 0 {
        let chol = state
            .sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("sigma in log_joint".into()))?;
        let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let w = layout.unvec_coefficients(&state.beta);
        let resid = &design.y - &design.x * w.transpose();
        let q = resid.ncols();
        for t in 0..design.t_eff {
            let r = resid.row(t).transpose();
            let solved = chol.solve(&r);
            acc += -0.5 * (q as f64 * LN_2PI + logdet) - 0.5 * r.dot(&solved);
        }
    }

    // per-coefficient factors
    let (gamma0, tau0) = state.sparse_atom;
    for b in 0..layout.block_count() {
        let w = state.weights(b);
        let pi = state.pi[b];
        for &j in &layout.block_coeffs[b] {
            let lam = state.lambda[j];
            if state.xi[j] {
                let k = state.alloc[j];
                if k == 0 || k > state.atoms[b].len() {
                    return Err(Error::InvalidParam("allocation points past atom table".into()));
                }
                if state.slice[j] >= w[k - 1] {
                    return Ok(f64::NEG_INFINITY);
                }
                let atom = state.atoms[b][k - 1];
                acc += (1.0 - pi).ln()
                    + ln_normal(state.beta[j], atom.mu, lam)
                    + ln_gamma_pdf(lam, atom.gamma, atom.tau / 2.0);
            } else {
                if state.slice[j] >= 1.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                acc += pi.ln()
                    + ln_normal(state.beta[j], 0.0, lam)
                    + ln_gamma_pdf(lam, gamma0, tau0 / 2.0);
            }
        }
        // represented sticks and atoms
        let alpha = hyper.dp_concentration;
        for &v in &state.sticks[b] {
            acc += alpha.ln() + (alpha - 1.0) * (1.0 - v).ln();
        }
        let (c_mean, d_var) = hyper.atom_mean;
        for atom in &state.atoms[b] {
            acc += ln_normal(atom.mu, c_mean, d_var)
                + gs_log_kernel(atom.gamma, atom.tau, &hyper.nonsparse_gs);
        }
        // mixing probability prior Be(1, alpha_i)
        let a = hyper.mixing_alpha;
        acc += a.ln() + (a - 1.0) * (1.0 - pi).ln();
    }

    // sparse atom hyperprior (kernel)
    acc += gs_log_kernel(gamma0, tau0, &hyper.sparse_gs);

    // covariance: normalized hyper-inverse-Wishart density
    let q = state.sigma.nrows();
    let scale = nalgebra::DMatrix::identity(q, q) * hyper.hiw_scale;
    acc += hiw_log_normalizer(&state.graph, hyper.hiw_df, &scale)?;
    let jt = state.graph.junction();
    let mut kern = 0.0;
    for clique in &jt.cliques {
        kern += hiw_block_kernel(state, &scale, clique, hyper.hiw_df)?;
    }
    for sep in &jt.separators {
        if !sep.is_empty() {
            kern -= hiw_block_kernel(state, &scale, sep, hyper.hiw_df)?;
        }
    }
    acc += kern;

    // graph prior
    acc += graph_log_prior(&state.graph, sampler.graph_prior());

    Ok(acc)
}

fn hiw_block_kernel(
    state: &ChainState,
    scale: &nalgebra::DMatrix<f64>,
    block: &[usize],
    df: f64,
) -> Result<f64> {
    let sig = submatrix(&state.sigma, block);
    let l = submatrix(scale, block);
    let chol = sig
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("sigma block in log_joint".into()))?;
    let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let inv = chol.inverse();
    let trace = (inv * l).trace();
    let p = block.len() as f64;
    Ok(-0.5 * (df + 2.0 * p) * logdet - 0.5 * trace)
}
