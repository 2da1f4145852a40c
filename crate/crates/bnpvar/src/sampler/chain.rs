//! Sweep implementation and chain driver.

use crate::dist::{
    gig_sample, gs_mh_gamma, hiw_sample, GammaScaleShapeParams, GigParams, GsMarginal,
};
use crate::error::{Error, Result};
use crate::graph::{graph_log_prior, hiw_log_normalizer, propose_toggle, GraphPrior};
use crate::sampler::design::DesignData;
use crate::sampler::hyper::{Hyperparameters, SamplerMode};
use crate::sampler::state::{Atom, ChainState, DrawRecord};
use crate::special::ln_gamma;
use crate::var::{BlockPartitioning, CoefficientLayout, PanelSpec, TimeSeriesData};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal, StandardNormal};

const MAX_STICKS: usize = 100_000;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A configured sampler for one panel layout.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub spec: PanelSpec,
    pub layout: CoefficientLayout,
    pub hyper: Hyperparameters,
    graph_prior: GraphPrior,
    /// Exact sampler for the base-measure shape/scale marginal, used to
    /// refresh unoccupied atoms. Absent in Bayesian-Lasso mode.
    h_marginal: Option<GsMarginal>,
}

impl Sampler {
    pub fn new(
        spec: PanelSpec,
        partitioning: BlockPartitioning,
        hyper: Hyperparameters,
    ) -> Result<Self> {
        hyper.validate()?;
        let q = spec.series_count();
        let graph_prior = match hyper.graph_psi {
            Some(psi) => GraphPrior::new(psi)?,
            None => {
                if q >= 2 {
                    GraphPrior::default_for(q)?
                } else {
                    GraphPrior::new(0.5)?
                }
            }
        };
        let h_marginal = match hyper.mode {
            SamplerMode::Bnp => Some(GsMarginal::new(hyper.nonsparse_gs).map_err(|e| {
                Error::InvalidParam(format!(
                    "base-measure shape/scale hyperprior must be normalizable: {e}"
                ))
            })?),
            SamplerMode::BayesianLasso => None,
        };
        Ok(Self {
            layout: CoefficientLayout::new(spec, partitioning),
            spec,
            hyper,
            graph_prior,
            h_marginal,
        })
    }

    pub fn graph_prior(&self) -> &GraphPrior {
        &self.graph_prior
    }

    fn hiw_scale_matrix(&self) -> DMatrix<f64> {
        DMatrix::identity(self.spec.series_count(), self.spec.series_count())
            * self.hyper.hiw_scale
    }

    /// A starting state: everything drawn from simple over-dispersed
    /// choices; burn-in washes the initialization out.
    pub fn init_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChainState> {
        let n = self.layout.coefficient_count();
        let blocks = self.layout.block_count();
        let q = self.spec.series_count();
        let graph = crate::graph::DecomposableGraph::empty(q);
        let sigma = hiw_sample(self.hyper.hiw_df, &self.hiw_scale_matrix(), &graph, rng)?;
        let sparse_atom = self.hyper.pinned_sparse_atom.unwrap_or((1.0, 1.0));
        let pi = match self.hyper.mode {
            SamplerMode::Bnp => {
                let be = Beta::new(1.0, self.hyper.mixing_alpha)
                    .map_err(|e| Error::InvalidParam(e.to_string()))?;
                (0..blocks).map(|_| be.sample(rng)).collect()
            }
            SamplerMode::BayesianLasso => vec![1.0; blocks],
        };
        let lambda_dist = Gamma::new(sparse_atom.0, 2.0 / sparse_atom.1)
            .map_err(|e| Error::InvalidParam(e.to_string()))?;
        let mut lambda = Vec::with_capacity(n);
        let mut beta = DVector::zeros(n);
        let mut slice = Vec::with_capacity(n);
        for j in 0..n {
            let l: f64 = lambda_dist.sample(rng).max(1e-300);
            beta[j] = l.sqrt() * {
                let z: f64 = StandardNormal.sample(rng);
                z
            };
            lambda.push(l);
            slice.push(positive_uniform(rng));
        }
        Ok(ChainState {
            beta,
            lambda,
            slice,
            xi: vec![false; n],
            alloc: vec![0; n],
            sticks: vec![Vec::new(); blocks],
            atoms: vec![Vec::new(); blocks],
            pi,
            sparse_atom,
            sigma,
            graph,
            gs_step_sparse: 0.5,
            gs_step_atoms: 0.5,
            adapt: Default::default(),
        })
    }

    /// One full sweep in the fixed update order.
    pub fn sweep<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        design: &DesignData,
        rng: &mut R,
    ) -> Result<()> {
        match self.hyper.mode {
            SamplerMode::Bnp => {
                self.update_slice_and_sticks(state, rng)?;
                self.update_lambda(state, rng)?;
                self.update_atoms(state, rng)?;
                self.update_beta(state, design, rng)?;
                self.update_sigma(state, design, rng)?;
                self.update_graph(state, design, rng)?;
                self.update_allocations_collapsed(state, rng)?;
                self.update_pi(state, rng)?;
            }
            SamplerMode::BayesianLasso => {
                self.update_lambda(state, rng)?;
                self.update_sparse_atom(state, rng)?;
                self.update_beta(state, design, rng)?;
                self.update_sigma(state, design, rng)?;
                self.update_graph(state, design, rng)?;
            }
        }
        Ok(())
    }

    /// Step 1: stick-breaking and slice variables.
    ///
    /// Occupied sticks get their beta full conditional, slices are
    /// uniform below their component's weight, and fresh prior sticks are
    /// appended until the represented weights cover `1 - min(u)`.
    pub fn update_slice_and_sticks<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        rng: &mut R,
    ) -> Result<()> {
        let alpha = self.hyper.dp_concentration;
        for b in 0..self.layout.block_count() {
            let coeffs = &self.layout.block_coeffs[b];
            let dstar = coeffs
                .iter()
                .filter(|&&j| state.xi[j])
                .map(|&j| state.alloc[j])
                .max()
                .unwrap_or(0);
            state.sticks[b].truncate(dstar);
            state.atoms[b].truncate(dstar);
            // occupancy counts: eq[k] = #{d = k}, gt[k] = #{d > k}
            let mut eq = vec![0usize; dstar + 1];
            for &j in coeffs {
                if state.xi[j] {
                    eq[state.alloc[j]] += 1;
                }
            }
            let mut gt = vec![0usize; dstar + 1];
            for k in (1..dstar).rev() {
                gt[k] = gt[k + 1] + eq[k + 1];
            }
            for k in 1..=dstar {
                let be = Beta::new(1.0 + eq[k] as f64, alpha + gt[k] as f64)
                    .map_err(|e| Error::InvalidParam(e.to_string()))?;
                let v = clamp_unit(be.sample(rng));
                if k - 1 < state.sticks[b].len() {
                    state.sticks[b][k - 1] = v;
                } else {
                    state.sticks[b].push(v);
                }
            }
            // slices below the allocated component's weight
            let w = state.weights(b);
            let mut umin = 1.0f64;
            for &j in coeffs {
                let u = if state.xi[j] {
                    positive_uniform(rng) * w[state.alloc[j] - 1]
                } else {
                    positive_uniform(rng)
                };
                let u = u.max(f64::MIN_POSITIVE);
                state.slice[j] = u;
                umin = umin.min(u);
            }
            // extend: remaining mass prod(1 - v) must fall below min(u)
            let mut rest: f64 = state.sticks[b].iter().map(|v| 1.0 - v).product();
            let prior = Beta::new(1.0, alpha).map_err(|e| Error::InvalidParam(e.to_string()))?;
            while rest >= umin {
                if state.sticks[b].len() >= MAX_STICKS {
                    return Err(Error::Numerical(format!(
                        "stick representation exceeded {MAX_STICKS} components"
                    )));
                }
                let v = clamp_unit(prior.sample(rng));
                state.sticks[b].push(v);
                rest *= 1.0 - v;
            }
        }
        Ok(())
    }

    /// Step 2: latent scales from their generalized-inverse-Gaussian
    /// full conditionals.
    pub fn update_lambda<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        rng: &mut R,
    ) -> Result<()> {
        let (gamma0, tau0) = state.sparse_atom;
        for b in 0..self.layout.block_count() {
            for &j in &self.layout.block_coeffs[b] {
                let (a, mut bb, c) = if state.xi[j] {
                    let atom = state.atoms[b][state.alloc[j] - 1];
                    let diff = state.beta[j] - atom.mu;
                    (atom.tau, diff * diff, atom.gamma - 0.5)
                } else {
                    (tau0, state.beta[j] * state.beta[j], gamma0 - 0.5)
                };
                // degenerate quadratic term: gamma branch when the order
                // allows it, epsilon jitter otherwise
                if bb < 1e-300 {
                    if c > 0.0 {
                        bb = 0.0;
                    } else {
                        bb = f64::EPSILON;
                    }
                }
                let lam = gig_sample(&GigParams::new(a, bb, c)?, rng)?;
                state.lambda[j] = lam.max(1e-300);
            }
        }
        Ok(())
    }

    /// Step 3 for the Bayesian-Lasso mode: only the sparse atom.
    pub fn update_sparse_atom<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        rng: &mut R,
    ) -> Result<()> {
        if let Some(pinned) = self.hyper.pinned_sparse_atom {
            state.sparse_atom = pinned;
            return Ok(());
        }
        let lambdas = (0..self.layout.coefficient_count())
            .filter(|&j| !state.xi[j])
            .map(|j| state.lambda[j]);
        let post = gs_posterior(&self.hyper.sparse_gs, lambdas)?;
        let (pair, accepted) = gs_move(
            &post,
            state.sparse_atom,
            state.gs_step_sparse,
            self.hyper.sparse_shape_cap,
            rng,
        )?;
        state.sparse_atom = pair;
        state.adapt.sparse_total += 1;
        state.adapt.sparse_accept += usize::from(accepted);
        Ok(())
    }

    /// Step 3: the sparse atom and every represented cluster atom.
    pub fn update_atoms<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        rng: &mut R,
    ) -> Result<()> {
        self.update_sparse_atom(state, rng)?;
        let (c_mean, d_var) = self.hyper.atom_mean;
        let h = self
            .h_marginal
            .as_ref()
            .ok_or_else(|| Error::InvalidParam("atom refresh needs the base measure".into()))?;
        for b in 0..self.layout.block_count() {
            let coeffs = &self.layout.block_coeffs[b];
            for k in 1..=state.sticks[b].len() {
                let members: Vec<usize> = coeffs
                    .iter()
                    .copied()
                    .filter(|&j| state.xi[j] && state.alloc[j] == k)
                    .collect();
                if members.is_empty() {
                    // full conditional is the base measure; draw exactly
                    let atom = draw_base_atom(h, c_mean, d_var, rng)?;
                    if k - 1 < state.atoms[b].len() {
                        state.atoms[b][k - 1] = atom;
                    } else {
                        state.atoms[b].push(atom);
                    }
                    continue;
                }
                // location: conjugate normal
                let mut prec = 1.0 / d_var;
                let mut lin = c_mean / d_var;
                for &j in &members {
                    prec += 1.0 / state.lambda[j];
                    lin += state.beta[j] / state.lambda[j];
                }
                let var = 1.0 / prec;
                let mu = Normal::new(var * lin, var.sqrt())
                    .map_err(|e| Error::InvalidParam(e.to_string()))?
                    .sample(rng);
                // shape/scale: collapsed conjugate move
                let post = gs_posterior(
                    &self.hyper.nonsparse_gs,
                    members.iter().map(|&j| state.lambda[j]),
                )?;
                let current = state.atoms[b][k - 1];
                // atom hyperpriors stay proper under conjugate updates;
                // only the generic numeric range applies
                let (pair, accepted) = gs_move(
                    &post,
                    (current.gamma, current.tau),
                    state.gs_step_atoms,
                    f64::INFINITY,
                    rng,
                )?;
                state.atoms[b][k - 1] = Atom {
                    mu,
                    gamma: pair.0,
                    tau: pair.1,
                };
                state.adapt.atom_total += 1;
                state.adapt.atom_accept += usize::from(accepted);
            }
            debug_assert_eq!(state.atoms[b].len(), state.sticks[b].len());
        }
        Ok(())
    }

    /// Step 4: coefficient blocks from their Gaussian full conditionals.
    ///
    /// The response is residualized on all other blocks, which makes the
    /// normal equations exact for any partition. Within a block the
    /// precision is `Sigma^{-1} (x) X_b' X_b` plus the diagonal prior
    /// precision, and equations in different graph components decouple,
    /// so the solve splits per connected component.
    pub fn update_beta<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        design: &DesignData,
        rng: &mut R,
    ) -> Result<()> {
        let q = self.spec.series_count();
        let sigma_chol = state
            .sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("covariance draw in update_beta".into()))?;
        let sigma_inv = sigma_chol.inverse();
        let components = state.graph.connected_components();
        for b in 0..self.layout.block_count() {
            let regs = &self.layout.block_regressors[b];
            let na = regs.len();
            let xb = &design.x_blocks[b];
            let sxx = &design.sxx_blocks[b];
            // residualize on the other blocks
            let w = self.layout.unvec_coefficients(&state.beta);
            let wb = DMatrix::from_fn(q, na, |r, a| w[(r, regs[a])]);
            let rhs_mat = if design.t_eff > 0 {
                let pred_full = &design.x * w.transpose();
                let y_tilde = &design.y - pred_full + xb * wb.transpose();
                let z = y_tilde * &sigma_inv;
                xb.transpose() * z
            } else {
                DMatrix::zeros(na, q)
            };
            for grp in &components {
                let ge = grp.len();
                let dim = ge * na;
                let mut prec = DMatrix::zeros(dim, dim);
                let mut rhs = DVector::zeros(dim);
                for (e1, &r1) in grp.iter().enumerate() {
                    for (e2, &r2) in grp.iter().enumerate() {
                        let s = sigma_inv[(r1, r2)];
                        if s != 0.0 {
                            for a1 in 0..na {
                                for a2 in 0..na {
                                    prec[(e1 * na + a1, e2 * na + a2)] = s * sxx[(a1, a2)];
                                }
                            }
                        }
                    }
                }
                for (e, &r) in grp.iter().enumerate() {
                    for a in 0..na {
                        let idx = self.layout.flat_index(r, regs[a]);
                        let prior_prec = 1.0 / state.lambda[idx];
                        prec[(e * na + a, e * na + a)] += prior_prec;
                        rhs[e * na + a] = rhs_mat[(a, r)];
                        if state.xi[idx] {
                            let mu = state.atoms[b][state.alloc[idx] - 1].mu;
                            rhs[e * na + a] += prior_prec * mu;
                        }
                    }
                }
                let draw = sample_mvn_from_precision(&prec, &rhs, rng)?;
                for (e, &r) in grp.iter().enumerate() {
                    for a in 0..na {
                        state.beta[self.layout.flat_index(r, regs[a])] = draw[e * na + a];
                    }
                }
            }
        }
        Ok(())
    }

    /// Residual scatter matrix `sum_t r_t r_t'`.
    pub fn residual_scatter(&self, state: &ChainState, design: &DesignData) -> DMatrix<f64> {
        let w = self.layout.unvec_coefficients(&state.beta);
        let resid = &design.y - &design.x * w.transpose();
        resid.transpose() * resid
    }

    /// Step 5: covariance from its hyper-inverse-Wishart conditional.
    pub fn update_sigma<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        design: &DesignData,
        rng: &mut R,
    ) -> Result<()> {
        let scale = self.hiw_scale_matrix() + self.residual_scatter(state, design);
        state.sigma = hiw_sample(
            self.hyper.hiw_df + design.t_eff as f64,
            &scale,
            &state.graph,
            rng,
        )?;
        Ok(())
    }

    /// Step 6: local add/delete Metropolis moves on the graph, using the
    /// ratio of hyper-inverse-Wishart normalizing constants as the
    /// marginal likelihood. The covariance is redrawn under an accepted
    /// graph.
    pub fn update_graph<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        design: &DesignData,
        rng: &mut R,
    ) -> Result<()> {
        if state.graph.max_edges() == 0 {
            return Ok(());
        }
        let prior_scale = self.hiw_scale_matrix();
        let post_scale = &prior_scale + self.residual_scatter(state, design);
        let df0 = self.hyper.hiw_df;
        let df1 = df0 + design.t_eff as f64;
        let mut current_ml = hiw_log_normalizer(&state.graph, df0, &prior_scale)?
            - hiw_log_normalizer(&state.graph, df1, &post_scale)?;
        let mut accepted_any = false;
        for _ in 0..self.hyper.graph_moves_per_sweep.max(1) {
            let proposal = propose_toggle(&state.graph, rng);
            let u: f64 = rng.random();
            let Some(candidate) = proposal.candidate else {
                continue; // non-decomposable: auto-reject
            };
            let cand_ml = hiw_log_normalizer(&candidate, df0, &prior_scale)?
                - hiw_log_normalizer(&candidate, df1, &post_scale)?;
            let log_alpha = graph_log_prior(&candidate, &self.graph_prior)
                - graph_log_prior(&state.graph, &self.graph_prior)
                + cand_ml
                - current_ml
                + proposal.log_ratio;
            if log_alpha >= 0.0 || u.ln() < log_alpha {
                state.graph = candidate;
                current_ml = cand_ml;
                accepted_any = true;
            }
        }
        if accepted_any {
            state.sigma = hiw_sample(df1, &post_scale, &state.graph, rng)?;
        }
        Ok(())
    }

    /// Step 7: joint allocation `(d, xi)` per coefficient from the
    /// discrete conditional over the sparse component and the slice-
    /// admissible clusters.
    pub fn update_allocations<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        rng: &mut R,
    ) -> Result<()> {
        let (gamma0, tau0) = state.sparse_atom;
        let ln_g0 = ln_gamma(gamma0);
        let ln_tau0 = (tau0 / 2.0).ln();
        for b in 0..self.layout.block_count() {
            let w = state.weights(b);
            let atoms = &state.atoms[b];
            let atom_consts: Vec<(f64, f64)> = atoms
                .iter()
                .map(|a| (ln_gamma(a.gamma), (a.tau / 2.0).ln()))
                .collect();
            let pi = state.pi[b];
            let ln_pi = pi.ln();
            let ln_1mpi = (1.0 - pi).ln();
            for &j in &self.layout.block_coeffs[b] {
                let lam = state.lambda[j];
                let ln_lam = lam.ln();
                let beta = state.beta[j];
                let mut labels = vec![0usize];
                let mut lws = vec![
                    ln_pi + ln_normal(beta, 0.0, lam)
                        + gamma0 * ln_tau0
                        + (gamma0 - 1.0) * ln_lam
                        - 0.5 * tau0 * lam
                        - ln_g0,
                ];
                for (k, atom) in atoms.iter().enumerate() {
                    if state.slice[j] < w[k] {
                        let (ln_g, ln_tau) = atom_consts[k];
                        lws.push(
                            ln_1mpi
                                + ln_normal(beta, atom.mu, lam)
                                + atom.gamma * ln_tau
                                + (atom.gamma - 1.0) * ln_lam
                                - 0.5 * atom.tau * lam
                                - ln_g,
                        );
                        labels.push(k + 1);
                    }
                }
                let pick = sample_log_weights(&lws, rng)?;
                let d = labels[pick];
                state.alloc[j] = d;
                state.xi[j] = d != 0;
            }
        }
        Ok(())
    }

    /// Step 7, blocked variant: `(d, xi, lambda)` jointly — the discrete
    /// allocation with the latent scale integrated out analytically
    /// (weights use the closed-form normal-gamma density), followed by an
    /// exact scale draw under the chosen component. Targets the same
    /// joint as [`update_allocations`](Self::update_allocations) but
    /// mixes across components without the latent-scale bottleneck.
    pub fn update_allocations_collapsed<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        rng: &mut R,
    ) -> Result<()> {
        let (gamma0, tau0) = state.sparse_atom;
        let sparse_params = crate::dist::NormalGammaParams::new(0.0, gamma0, tau0)?;
        for b in 0..self.layout.block_count() {
            let w = state.weights(b);
            let atoms = state.atoms[b].clone();
            let atom_params: Vec<crate::dist::NormalGammaParams> = atoms
                .iter()
                .map(|a| crate::dist::NormalGammaParams::new(a.mu, a.gamma, a.tau))
                .collect::<Result<_>>()?;
            let pi = state.pi[b];
            let ln_pi = pi.ln();
            let ln_1mpi = (1.0 - pi).ln();
            for &j in &self.layout.block_coeffs[b] {
                let beta = state.beta[j];
                let mut labels = vec![0usize];
                let mut lws = vec![ln_pi + finite_ng(beta, &sparse_params)?];
                for (k, params) in atom_params.iter().enumerate() {
                    if state.slice[j] < w[k] {
                        lws.push(ln_1mpi + finite_ng(beta, params)?);
                        labels.push(k + 1);
                    }
                }
                let pick = sample_log_weights(&lws, rng)?;
                let d = labels[pick];
                state.alloc[j] = d;
                state.xi[j] = d != 0;
                // exact scale draw under the chosen component
                let (a, mut bb, c) = if d == 0 {
                    (tau0, beta * beta, gamma0 - 0.5)
                } else {
                    let atom = atoms[d - 1];
                    let diff = beta - atom.mu;
                    (atom.tau, diff * diff, atom.gamma - 0.5)
                };
                if bb < 1e-300 {
                    if c > 0.0 {
                        bb = 0.0;
                    } else {
                        bb = f64::EPSILON;
                    }
                }
                let lam = gig_sample(&GigParams::new(a, bb, c)?, rng)?;
                state.lambda[j] = lam.max(1e-300);
            }
        }
        Ok(())
    }

    /// Step 8: mixing probabilities from their beta conditionals.
    pub fn update_pi<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R) -> Result<()> {
        for b in 0..self.layout.block_count() {
            let coeffs = &self.layout.block_coeffs[b];
            let s: usize = coeffs.iter().filter(|&&j| state.xi[j]).count();
            let n_i = coeffs.len();
            let be = Beta::new(
                (n_i - s) as f64 + 1.0,
                self.hyper.mixing_alpha + s as f64,
            )
            .map_err(|e| Error::InvalidParam(e.to_string()))?;
            state.pi[b] = clamp_unit(be.sample(rng));
        }
        Ok(())
    }

    // Robbins-style step adaptation toward ~0.35 acceptance, burn-in only.
    fn adapt_steps(&self, state: &mut ChainState) {
        let adjust = |step: &mut f64, accept: usize, total: usize| {
            if total >= 40 {
                let rate = accept as f64 / total as f64;
                *step = (*step * ((rate - 0.35) * 0.8).exp()).clamp(1e-3, 20.0);
                true
            } else {
                false
            }
        };
        if adjust(
            &mut state.gs_step_sparse,
            state.adapt.sparse_accept,
            state.adapt.sparse_total,
        ) {
            state.adapt.sparse_accept = 0;
            state.adapt.sparse_total = 0;
        }
        if adjust(
            &mut state.gs_step_atoms,
            state.adapt.atom_accept,
            state.adapt.atom_total,
        ) {
            state.adapt.atom_accept = 0;
            state.adapt.atom_total = 0;
        }
    }

    /// Run a full chain over the data: initialization, burn-in with step
    /// adaptation, then thinned recording. Deterministic given the rng.
    pub fn run<R: Rng + ?Sized>(
        &self,
        data: &TimeSeriesData,
        rng: &mut R,
    ) -> Result<Vec<DrawRecord>> {
        let design = DesignData::new(data, &self.spec, &self.layout)?;
        self.run_with_design(&design, rng)
    }

    /// Same as [`run`](Self::run) for a prebuilt (possibly empty) design.
    pub fn run_with_design<R: Rng + ?Sized>(
        &self,
        design: &DesignData,
        rng: &mut R,
    ) -> Result<Vec<DrawRecord>> {
        let mcmc = self.hyper.mcmc;
        let mut state = self.init_state(rng)?;
        let mut records =
            Vec::with_capacity((mcmc.iterations - mcmc.burn_in).div_ceil(mcmc.thin));
        for it in 0..mcmc.iterations {
            self.sweep(&mut state, design, rng).map_err(|e| {
                Error::Numerical(format!(
                    "sweep {it} failed: {e}; state: edges={}, atoms={:?}, lambda_l2={:.3e}",
                    state.graph.edge_count(),
                    state.atoms.iter().map(Vec::len).collect::<Vec<_>>(),
                    state.lambda_l2()
                ))
            })?;
            if it < mcmc.burn_in {
                self.adapt_steps(&mut state);
            }
            if it >= mcmc.burn_in && (it - mcmc.burn_in) % mcmc.thin == 0 {
                records.push(DrawRecord::from_state(&state, it, mcmc.record_sigma));
            }
        }
        Ok(records)
    }
}

fn positive_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>().max(f64::MIN_POSITIVE)
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(1e-15, 1.0 - 1e-15)
}

fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + var.ln()) - 0.5 * d * d / var
}

// exact conjugate update of a gamma scale-shape prior against
// observations lambda ~ Ga(shape, rate = scale/2): the p-product picks up
// lambda/2 per observation
fn gs_posterior(
    prior: &GammaScaleShapeParams,
    lambdas: impl Iterator<Item = f64>,
) -> Result<GammaScaleShapeParams> {
    let mut count = 0usize;
    let mut sum = 0.0;
    let mut ln_sum = 0.0;
    for l in lambdas {
        count += 1;
        sum += l;
        ln_sum += l.ln();
    }
    let n = count as f64;
    GammaScaleShapeParams::with_ln_p(
        prior.nu + n,
        prior.ln_p + ln_sum - n * std::f64::consts::LN_2,
        prior.s + 0.5 * sum,
        prior.n + n,
    )
}

// one collapsed move: MH on the shape (truncated at the cap), exact
// gamma draw of the scale
fn gs_move<R: Rng + ?Sized>(
    params: &GammaScaleShapeParams,
    current: (f64, f64),
    step: f64,
    cap: f64,
    rng: &mut R,
) -> Result<((f64, f64), bool)> {
    let (proposal, accepted) = gs_mh_gamma(params, current.0, step, rng);
    // truncated support: reject moves past the cap
    let (gamma, accepted) = if proposal > cap {
        (current.0, false)
    } else {
        (proposal, accepted)
    };
    let tau = Gamma::new(params.nu * gamma, 1.0 / params.s)
        .map_err(|e| Error::InvalidParam(e.to_string()))?
        .sample(rng);
    Ok(((gamma, tau.max(1e-300)), accepted))
}

fn draw_base_atom<R: Rng + ?Sized>(
    h: &GsMarginal,
    c_mean: f64,
    d_var: f64,
    rng: &mut R,
) -> Result<Atom> {
    let mu = Normal::new(c_mean, d_var.sqrt())
        .map_err(|e| Error::InvalidParam(e.to_string()))?
        .sample(rng);
    let (gamma, tau) = h.sample_pair(rng)?;
    Ok(Atom {
        mu,
        gamma,
        tau: tau.max(1e-300),
    })
}

/// Draw from `N(P^{-1} rhs, P^{-1})` given the precision `P`.
pub(crate) fn sample_mvn_from_precision<R: Rng + ?Sized>(
    prec: &DMatrix<f64>,
    rhs: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let chol = prec
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("coefficient precision".into()))?;
    let mean = chol.solve(rhs);
    let z = DVector::from_fn(prec.nrows(), |_, _| {
        let v: f64 = StandardNormal.sample(rng);
        v
    });
    let noise = chol
        .l()
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    Ok(mean + noise)
}

fn finite_ng(x: f64, params: &crate::dist::NormalGammaParams) -> Result<f64> {
    let v = crate::dist::ng_log_pdf(x, params)?;
    Ok(if v.is_finite() { v } else { 700.0 })
}

fn sample_log_weights<R: Rng + ?Sized>(lws: &[f64], rng: &mut R) -> Result<usize> {
    let max = lws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numerical("allocation weights all zero".into()));
    }
    let probs: Vec<f64> = lws.iter().map(|lw| (lw - max).exp()).collect();
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, p) in probs.iter().enumerate() {
        u -= p;
        if u <= 0.0 {
            return Ok(i);
        }
    }
    Ok(probs.len() - 1)
}
