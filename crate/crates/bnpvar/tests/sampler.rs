//! Conditional-law and invariance tests for the Gibbs sweep: each update
//! is checked against its analytic conditional or a simulation with
//! known truth.

mod common;

use bnpvar::dist::GammaScaleShapeParams;
use bnpvar::graph::DecomposableGraph;
use bnpvar::sampler::{log_joint, Atom, DesignData, Hyperparameters, Sampler, SamplerMode};
use bnpvar::var::{
    check_stationarity, BlockPartitioning, DgpConfig, PanelSpec, TimeSeriesData,
};
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

fn proper_hyper() -> Hyperparameters {
    // both shape/scale hyperpriors normalizable (nu < n)
    Hyperparameters {
        sparse_gs: GammaScaleShapeParams::new(3.0, 0.5, 1.0 / 3.0, 10.0).unwrap(),
        ..Hyperparameters::default()
    }
}

fn small_sampler(q: usize) -> Sampler {
    let spec = PanelSpec::var(q, 1).unwrap();
    Sampler::new(spec, BlockPartitioning::PerLag, proper_hyper()).unwrap()
}

fn empty_design(sampler: &Sampler) -> DesignData {
    DesignData::empty(&sampler.spec, &sampler.layout)
}

#[test]
fn stick_weights_identity() {
    let sampler = small_sampler(2);
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.sticks[0] = vec![0.5; 6];
    let w = state.weights(0);
    for (k, &wk) in w.iter().enumerate() {
        assert!((wk - 0.5f64.powi(k as i32 + 1)).abs() < 1e-15);
    }
}

#[test]
fn slice_extension_covers_min_slice() {
    let sampler = small_sampler(3);
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let mut state = sampler.init_state(&mut rng).unwrap();
    for _ in 0..200 {
        sampler.update_slice_and_sticks(&mut state, &mut rng).unwrap();
        let umin = state
            .slice
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let w = state.weights(0);
        assert!(w.iter().sum::<f64>() > 1.0 - umin);
        // weights are a valid defective probability vector
        assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
        // resample allocations so the loop explores different states
        sampler.update_allocations(&mut state, &mut rng).unwrap();
    }
}

#[test]
fn slices_are_uniform_when_everything_is_sparse() {
    let sampler = small_sampler(2);
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.xi.iter_mut().for_each(|x| *x = false);
    state.alloc.iter_mut().for_each(|d| *d = 0);
    let mut draws = Vec::new();
    for _ in 0..2_000 {
        sampler.update_slice_and_sticks(&mut state, &mut rng).unwrap();
        draws.extend(state.slice.iter().copied());
    }
    let p = ks_one_sample(&mut draws, &|x: f64| x.clamp(0.0, 1.0));
    assert!(p > 0.01, "KS against uniform: p = {p}");
}

#[test]
fn lambda_conditional_gamma_branch() {
    // xi = 0, beta = 0, (gamma0, tau0) = (2, 4): lambda ~ Ga(3/2, rate 2)
    let sampler = small_sampler(2);
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.xi.iter_mut().for_each(|x| *x = false);
    state.beta.fill(0.0);
    state.sparse_atom = (2.0, 4.0);
    let mut draws = Vec::new();
    for _ in 0..40_000 {
        sampler.update_lambda(&mut state, &mut rng).unwrap();
        draws.push(state.lambda[0]);
    }
    let (mean, se) = mean_and_se(&draws);
    assert!((mean - 0.75).abs() < 4.0 * se, "mean {mean} +- {se}");
}

#[test]
fn lambda_conditional_at_atom_mean_reduces_to_gamma() {
    // xi = 1 with beta equal to the atom location
    let sampler = small_sampler(2);
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.sticks[0] = vec![0.5];
    state.atoms[0] = vec![Atom {
        mu: 0.7,
        gamma: 2.0,
        tau: 4.0,
    }];
    for j in 0..state.xi.len() {
        state.xi[j] = true;
        state.alloc[j] = 1;
        state.beta[j] = 0.7;
    }
    let mut draws = Vec::new();
    for _ in 0..40_000 {
        sampler.update_lambda(&mut state, &mut rng).unwrap();
        draws.push(state.lambda[0]);
    }
    let (mean, se) = mean_and_se(&draws);
    assert!((mean - 0.75).abs() < 4.0 * se, "mean {mean} +- {se}");
}

#[test]
fn empty_cluster_refreshes_from_base_measure() {
    let sampler = small_sampler(2);
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.xi.iter_mut().for_each(|x| *x = false);
    state.alloc.iter_mut().for_each(|d| *d = 0);
    state.sticks[0] = vec![0.5];
    state.atoms[0] = vec![Atom {
        mu: 99.0,
        gamma: 1.0,
        tau: 1.0,
    }];
    let mut mus = Vec::new();
    for _ in 0..20_000 {
        sampler.update_atoms(&mut state, &mut rng).unwrap();
        mus.push(state.atoms[0][0].mu);
    }
    // prior refresh: mu ~ N(0, 10)
    let (mean, se) = mean_and_se(&mus);
    assert!(mean.abs() < 4.0 * se);
    let var = mus.iter().map(|m| m * m).sum::<f64>() / mus.len() as f64;
    assert!((var - 10.0).abs() < 0.5, "var {var}");
}

#[test]
fn occupied_cluster_location_posterior_plug_in() {
    // two members, lambdas 1, betas (1, 3), c = 0, d = 10:
    // V = 1/2.1, E = 4/2.1
    let sampler = small_sampler(2);
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.xi.iter_mut().for_each(|x| *x = false);
    state.alloc.iter_mut().for_each(|d| *d = 0);
    state.sticks[0] = vec![0.5];
    state.atoms[0] = vec![Atom {
        mu: 0.0,
        gamma: 1.0,
        tau: 1.0,
    }];
    state.xi[0] = true;
    state.alloc[0] = 1;
    state.beta[0] = 1.0;
    state.lambda[0] = 1.0;
    state.xi[1] = true;
    state.alloc[1] = 1;
    state.beta[1] = 3.0;
    state.lambda[1] = 1.0;
    let mut mus = Vec::new();
    for _ in 0..40_000 {
        // keep member data fixed; only the atom moves
        sampler.update_atoms(&mut state, &mut rng).unwrap();
        mus.push(state.atoms[0][0].mu);
    }
    let (mean, se) = mean_and_se(&mus);
    assert!((mean - 4.0 / 2.1).abs() < 4.0 * se, "mean {mean}");
    let m = mean;
    let var = mus.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / mus.len() as f64;
    assert!((var - 1.0 / 2.1).abs() < 0.02, "var {var}");
}

#[test]
fn beta_prior_only_draw() {
    // no data: block draw comes from N(prior mean, Lambda)
    let sampler = small_sampler(2);
    let design = empty_design(&sampler);
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.xi.iter_mut().for_each(|x| *x = false);
    state.alloc.iter_mut().for_each(|d| *d = 0);
    for (j, l) in state.lambda.iter_mut().enumerate() {
        *l = 0.5 + 0.25 * j as f64;
    }
    let mut draws: Vec<Vec<f64>> = vec![Vec::new(); state.beta.len()];
    for _ in 0..40_000 {
        sampler.update_beta(&mut state, &design, &mut rng).unwrap();
        for (j, d) in draws.iter_mut().enumerate() {
            d.push(state.beta[j]);
        }
    }
    for (j, d) in draws.iter().enumerate() {
        let (mean, se) = mean_and_se(d);
        assert!(mean.abs() < 4.0 * se, "coefficient {j} mean {mean}");
        let var = d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64;
        let expect = 0.5 + 0.25 * j as f64;
        assert!((var - expect).abs() < 0.05 * expect + 0.01, "coefficient {j} var {var}");
    }
}

#[test]
fn beta_conjugate_intercept_limit() {
    // lag coefficient shrunk out, diffuse intercept: posterior mean of
    // the intercept equals the sample mean
    let spec = PanelSpec::var(1, 1).unwrap();
    let sampler = Sampler::new(spec, BlockPartitioning::PerLag, proper_hyper()).unwrap();
    let t = 400;
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let values = DMatrix::from_fn(t, 1, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        2.5 + z
    });
    let data = TimeSeriesData::new(values.clone(), vec!["y1".into()]).unwrap();
    let design = DesignData::new(&data, &spec, &sampler.layout).unwrap();
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.xi.iter_mut().for_each(|x| *x = false);
    state.sigma = DMatrix::identity(1, 1);
    state.lambda[0] = 1e12; // intercept: diffuse
    state.lambda[1] = 1e-12; // lag: pinned to zero
    let ybar = (1..t).map(|r| values[(r, 0)]).sum::<f64>() / (t - 1) as f64;
    let mut draws = Vec::new();
    for _ in 0..20_000 {
        sampler.update_beta(&mut state, &design, &mut rng).unwrap();
        draws.push(state.beta[0]);
        assert!(state.beta[1].abs() < 1e-3);
    }
    let (mean, se) = mean_and_se(&draws);
    assert!((mean - ybar).abs() < 4.0 * se.max(1e-4), "mean {mean} vs {ybar}");
}

#[test]
fn beta_posterior_consistency_on_simulated_data() {
    // T large, strong signal: posterior mean near the truth
    let mut rng = ChaCha12Rng::seed_from_u64(10);
    let mut cfg = DgpConfig::block(4, 10_000);
    cfg.block_size = 4;
    let (data, truth) = bnpvar::var::simulate_var(&cfg, &mut rng).unwrap();
    let spec = PanelSpec::var(4, 1).unwrap();
    let sampler = Sampler::new(spec, BlockPartitioning::PerLag, proper_hyper()).unwrap();
    let design = DesignData::new(&data, &spec, &sampler.layout).unwrap();
    let mut state = sampler.init_state(&mut rng).unwrap();
    // moderate fixed prior scales; the likelihood dominates at this T
    state.lambda.iter_mut().for_each(|l| *l = 1.0);
    state.xi.iter_mut().for_each(|x| *x = false);
    state.sigma = DMatrix::identity(4, 4);
    let mut mean = DVector::zeros(state.beta.len());
    let reps = 400;
    for _ in 0..reps {
        sampler.update_beta(&mut state, &design, &mut rng).unwrap();
        mean += &state.beta;
    }
    mean /= reps as f64;
    let west = sampler.layout.unvec_coefficients(&mean);
    for i in 0..4 {
        for j in 0..4 {
            let est = west[(i, 1 + j)];
            assert!(
                (est - truth[(i, j)]).abs() < 0.05,
                "B[{i},{j}]: {est} vs {}",
                truth[(i, j)]
            );
        }
    }
}

#[test]
fn sigma_prior_draw_and_empty_graph() {
    let sampler = small_sampler(3);
    let design = empty_design(&sampler);
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let mut state = sampler.init_state(&mut rng).unwrap();
    // empty graph: all draws diagonal; diagonal is InvGamma(b/2, l/2)
    let mut d0 = Vec::new();
    for _ in 0..30_000 {
        sampler.update_sigma(&mut state, &design, &mut rng).unwrap();
        assert_eq!(state.sigma[(0, 1)], 0.0);
        assert_eq!(state.sigma[(0, 2)], 0.0);
        d0.push(state.sigma[(0, 0)]);
    }
    use statrs::distribution::ContinuousCDF;
    let ig = statrs::distribution::InverseGamma::new(3.0 / 2.0, 1.0 / 2.0).unwrap();
    let p = ks_one_sample(&mut d0, &|x| ig.cdf(x));
    assert!(p > 0.01, "prior sigma KS p = {p}");
}

#[test]
fn sigma_posterior_mean_matches_residual_covariance() {
    // beta = 0, complete graph: posterior mean ~ S / (b + T - 2)
    let q = 3;
    let t = 10_000;
    let spec = PanelSpec::var(q, 1).unwrap();
    let sampler = Sampler::new(spec, BlockPartitioning::PerLag, proper_hyper()).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    let mut sig_true = DMatrix::identity(q, q);
    sig_true[(0, 1)] = 0.6;
    sig_true[(1, 0)] = 0.6;
    let chol = sig_true.clone().cholesky().unwrap();
    let values = DMatrix::from_fn(t + 1, q, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z
    });
    // rows are iid N(0, sig_true) after mixing
    let mixed = &values * chol.l().transpose();
    let data = TimeSeriesData::new(mixed, (0..q).map(|i| format!("y{i}")).collect()).unwrap();
    let design = DesignData::new(&data, &spec, &sampler.layout).unwrap();
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.beta.fill(0.0);
    state.graph = DecomposableGraph::complete(q);
    let mut mean = DMatrix::zeros(q, q);
    let reps = 400;
    for _ in 0..reps {
        sampler.update_sigma(&mut state, &design, &mut rng).unwrap();
        mean += &state.sigma;
    }
    mean /= reps as f64;
    for i in 0..q {
        for j in 0..q {
            assert!(
                (mean[(i, j)] - sig_true[(i, j)]).abs() < 0.05 * sig_true[(i, i)].max(0.3),
                "sigma[{i},{j}] = {}",
                mean[(i, j)]
            );
        }
    }
}

fn graph_edge_frequency(
    sig_true: &DMatrix<f64>,
    t: usize,
    iters: usize,
    seed: u64,
) -> DMatrix<f64> {
    let q = sig_true.nrows();
    let spec = PanelSpec::var(q, 1).unwrap();
    let sampler = Sampler::new(spec, BlockPartitioning::PerLag, proper_hyper()).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let chol = sig_true.clone().cholesky().unwrap();
    let raw = DMatrix::from_fn(t + 1, q, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z
    });
    let data =
        TimeSeriesData::new(&raw * chol.l().transpose(), (0..q).map(|i| format!("y{i}")).collect())
            .unwrap();
    let design = DesignData::new(&data, &spec, &sampler.layout).unwrap();
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.beta.fill(0.0);
    let mut freq = DMatrix::zeros(q, q);
    let burn = iters / 5;
    for it in 0..iters {
        sampler.update_sigma(&mut state, &design, &mut rng).unwrap();
        sampler.update_graph(&mut state, &design, &mut rng).unwrap();
        if it >= burn {
            for i in 0..q {
                for j in 0..q {
                    if state.graph.has_edge(i, j) {
                        freq[(i, j)] += 1.0;
                    }
                }
            }
        }
    }
    freq / (iters - burn) as f64
}

#[test]
fn graph_update_recovers_dependence_structure() {
    let q = 3;
    // diagonal truth: every inclusion probability low
    let freq = graph_edge_frequency(&DMatrix::identity(q, q), 500, 3_000, 13);
    for i in 0..q {
        for j in (i + 1)..q {
            assert!(freq[(i, j)] < 0.5, "edge ({i},{j}) frequency {}", freq[(i, j)]);
        }
    }
    // strongly correlated pair stands out
    let mut sig = DMatrix::identity(q, q);
    sig[(0, 1)] = 0.9;
    sig[(1, 0)] = 0.9;
    let freq = graph_edge_frequency(&sig, 500, 3_000, 14);
    assert!(freq[(0, 1)] > 0.9, "edge (0,1) frequency {}", freq[(0, 1)]);
}

#[test]
fn allocations_degenerate_and_slice_truncated() {
    let sampler = small_sampler(2);
    let mut rng = ChaCha12Rng::seed_from_u64(15);
    let mut state = sampler.init_state(&mut rng).unwrap();
    // pi = 1: everything sparse with probability one
    state.pi[0] = 1.0;
    state.sticks[0] = vec![0.5];
    state.atoms[0] = vec![Atom {
        mu: 0.0,
        gamma: 2.0,
        tau: 2.0,
    }];
    for _ in 0..50 {
        sampler.update_allocations(&mut state, &mut rng).unwrap();
        assert!(state.xi.iter().all(|&x| !x));
        assert!(state.alloc.iter().all(|&d| d == 0));
    }
    // pi = 0 with slice 0.3 and weights (0.5, 0.25, 0.1): only cluster 1
    // is admissible
    state.pi[0] = 0.0;
    state.sticks[0] = vec![0.5, 0.5, 0.4];
    state.atoms[0] = vec![
        Atom { mu: 0.0, gamma: 2.0, tau: 2.0 },
        Atom { mu: 1.0, gamma: 2.0, tau: 2.0 },
        Atom { mu: -1.0, gamma: 2.0, tau: 2.0 },
    ];
    let w = state.weights(0);
    assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.25).abs() < 1e-12);
    state.slice.iter_mut().for_each(|u| *u = 0.3);
    for _ in 0..200 {
        sampler.update_allocations(&mut state, &mut rng).unwrap();
        assert!(state.alloc.iter().all(|&d| d == 1), "alloc {:?}", state.alloc);
        // restore the slice for the next round
        state.slice.iter_mut().for_each(|u| *u = 0.3);
    }
}

#[test]
fn allocation_favours_matching_atom_as_signal_grows() {
    let sampler = small_sampler(2);
    let mut rng = ChaCha12Rng::seed_from_u64(16);
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.pi[0] = 0.5;
    state.sparse_atom = (2.0, 2.0);
    state.lambda.iter_mut().for_each(|l| *l = 1.0);
    let mut rate_at = |beta: f64, rng: &mut ChaCha12Rng| {
        state.sticks[0] = vec![0.9];
        state.atoms[0] = vec![Atom { mu: beta, gamma: 2.0, tau: 2.0 }];
        state.beta.fill(beta);
        let mut hits = 0;
        let n = 3_000;
        for _ in 0..n {
            state.slice.iter_mut().for_each(|u| *u = 0.05);
            sampler.update_allocations(&mut state, rng).unwrap();
            hits += usize::from(state.xi[0]);
        }
        hits as f64 / n as f64
    };
    let r1 = rate_at(1.0, &mut rng);
    let r5 = rate_at(5.0, &mut rng);
    let r10 = rate_at(10.0, &mut rng);
    assert!(r1 < r5 && r5 <= r10, "rates {r1} {r5} {r10}");
    assert!(r10 > 0.999, "rate at |beta| = 10: {r10}");
}

#[test]
fn pi_conditional_plug_ins() {
    let spec = PanelSpec::var(5, 1).unwrap(); // block size 30
    let sampler = Sampler::new(spec, BlockPartitioning::PerLag, proper_hyper()).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(17);
    let mut state = sampler.init_state(&mut rng).unwrap();
    let n_i = sampler.layout.block_coeffs[0].len();
    // all sparse: Beta(n_i + 1, 1)
    state.xi.iter_mut().for_each(|x| *x = false);
    let mut draws = Vec::new();
    for _ in 0..40_000 {
        sampler.update_pi(&mut state, &mut rng).unwrap();
        draws.push(state.pi[0]);
    }
    let (mean, se) = mean_and_se(&draws);
    let expect = (n_i as f64 + 1.0) / (n_i as f64 + 2.0);
    assert!((mean - expect).abs() < 4.0 * se, "mean {mean} vs {expect}");
    // all allocated: Beta(1, 1 + n_i)
    state.xi.iter_mut().for_each(|x| *x = true);
    state.alloc.iter_mut().for_each(|d| *d = 1);
    let mut draws = Vec::new();
    for _ in 0..40_000 {
        sampler.update_pi(&mut state, &mut rng).unwrap();
        draws.push(state.pi[0]);
    }
    let (mean, se) = mean_and_se(&draws);
    let expect = 1.0 / (n_i as f64 + 2.0);
    assert!((mean - expect).abs() < 4.0 * se, "mean {mean} vs {expect}");
}

#[test]
fn pi_prior_recovery_without_data() {
    // joint resampling of (pi, allocations, ...) at no data keeps the
    // Be(1, alpha) prior: E[pi] = 1/(1 + alpha) = 0.5
    let sampler = small_sampler(1);
    let design = empty_design(&sampler);
    let mut rng = ChaCha12Rng::seed_from_u64(18);
    let mut state = sampler.init_state(&mut rng).unwrap();
    let mut acc = 0.0;
    let sweeps = 20_000;
    for _ in 0..sweeps {
        sampler.sweep(&mut state, &design, &mut rng).unwrap();
        acc += state.pi[0];
    }
    let mean = acc / sweeps as f64;
    assert!((mean - 0.5).abs() < 0.02, "E[pi] = {mean}");
}

#[test]
fn run_chain_record_count_and_determinism() {
    let mut rng = ChaCha12Rng::seed_from_u64(19);
    let (data, _) = bnpvar::var::simulate_var(&DgpConfig::block(4, 40), &mut rng).unwrap();
    let spec = PanelSpec::var(4, 1).unwrap();
    let mut hyper = proper_hyper();
    hyper.mcmc.iterations = 5_000;
    hyper.mcmc.burn_in = 500;
    hyper.mcmc.thin = 5;
    let sampler = Sampler::new(spec, BlockPartitioning::PerLag, hyper).unwrap();
    let run = |seed: u64| {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        sampler.run(&data, &mut rng).unwrap()
    };
    let a = run(42);
    assert_eq!(a.len(), 900);
    assert_eq!(a[0].iteration, 500);
    assert_eq!(a[899].iteration, 4995);
    let b = run(42);
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(ra.beta, rb.beta);
        assert_eq!(ra.xi, rb.xi);
        assert_eq!(ra.alloc, rb.alloc);
        assert_eq!(ra.lambda_l2, rb.lambda_l2);
        assert_eq!(ra.graph_edges, rb.graph_edges);
    }
    let c = run(43);
    assert!(a.iter().zip(&c).any(|(ra, rc)| ra.beta != rc.beta));
}

#[test]
fn slice_validity_and_state_invariants_across_sweeps() {
    let mut rng = ChaCha12Rng::seed_from_u64(20);
    let (data, _) = bnpvar::var::simulate_var(&DgpConfig::block(4, 60), &mut rng).unwrap();
    let spec = PanelSpec::var(4, 1).unwrap();
    let sampler = Sampler::new(spec, BlockPartitioning::PerLag, proper_hyper()).unwrap();
    let design = DesignData::new(&data, &spec, &sampler.layout).unwrap();
    let mut state = sampler.init_state(&mut rng).unwrap();
    for sweep in 0..300 {
        sampler.sweep(&mut state, &design, &mut rng).unwrap();
        let w = state.weights(0);
        for (j, &xi) in state.xi.iter().enumerate() {
            assert_eq!(xi, state.alloc[j] != 0);
            assert!(state.lambda[j] > 0.0);
            if xi {
                assert!(
                    state.slice[j] < w[state.alloc[j] - 1],
                    "sweep {sweep}: slice above weight"
                );
            }
        }
        assert_eq!(state.sticks[0].len(), state.atoms[0].len());
        let lj = log_joint(&sampler, &state, &design).unwrap();
        assert!(lj.is_finite(), "sweep {sweep}: joint density not finite");
    }
}

#[test]
fn relabeling_occupied_clusters_preserves_joint_density() {
    let sampler = small_sampler(2);
    let design = empty_design(&sampler);
    let mut rng = ChaCha12Rng::seed_from_u64(21);
    let mut state = sampler.init_state(&mut rng).unwrap();
    state.sticks[0] = vec![0.4, 0.3, 0.5];
    state.atoms[0] = vec![
        Atom { mu: -1.0, gamma: 2.0, tau: 1.5 },
        Atom { mu: 0.8, gamma: 3.0, tau: 0.7 },
        Atom { mu: 2.0, gamma: 1.2, tau: 2.0 },
    ];
    let n = state.beta.len();
    for j in 0..n {
        state.xi[j] = true;
        state.alloc[j] = 1 + (j % 2); // clusters 1 and 2 occupied
        state.beta[j] = if j % 2 == 0 { -1.1 } else { 0.9 };
        state.lambda[j] = 0.8;
        state.slice[j] = 1e-4; // below every weight in both labelings
    }
    let before = log_joint(&sampler, &state, &design).unwrap();
    // swap cluster 1 and 2: stick fractions, atoms and labels together
    state.sticks[0].swap(0, 1);
    state.atoms[0].swap(0, 1);
    for j in 0..n {
        state.alloc[j] = if state.alloc[j] == 1 { 2 } else { 1 };
    }
    let after = log_joint(&sampler, &state, &design).unwrap();
    assert!(
        (before - after).abs() < 1e-9,
        "joint changed: {before} vs {after}"
    );
}

#[test]
fn prior_of_coefficient_matches_direct_mixture_simulation() {
    // with the likelihood disabled, the chain's beta marginal must match
    // a direct simulation of the two-component mixture prior
    let spec = PanelSpec::var(1, 1).unwrap();
    let hyper = proper_hyper();
    let sampler = Sampler::new(spec, BlockPartitioning::PerLag, hyper.clone()).unwrap();
    let design = empty_design(&sampler);
    let mut rng = ChaCha12Rng::seed_from_u64(22);
    let mut state = sampler.init_state(&mut rng).unwrap();
    let mut chain_draws = Vec::new();
    for it in 0..60_000 {
        sampler.sweep(&mut state, &design, &mut rng).unwrap();
        if it % 20 == 0 {
            chain_draws.push(state.beta[0]);
        }
    }
    // direct simulation from the prior
    let sparse_marginal = bnpvar::dist::GsMarginal::new(hyper.sparse_gs).unwrap();
    let h_marginal = bnpvar::dist::GsMarginal::new(hyper.nonsparse_gs).unwrap();
    let mut direct = Vec::new();
    for _ in 0..chain_draws.len() {
        let pi: f64 = {
            let b = rand_distr::Beta::new(1.0, hyper.mixing_alpha).unwrap();
            b.sample(&mut rng)
        };
        let (mu, gamma, tau) = if rng.random::<f64>() < pi {
            let (g, t) = sparse_marginal.sample_pair(&mut rng).unwrap();
            (0.0, g, t)
        } else {
            // walk the stick-breaking weights to the sampled cluster
            let mut u: f64 = rng.random();
            let be = rand_distr::Beta::new(1.0, hyper.dp_concentration).unwrap();
            loop {
                let v: f64 = be.sample(&mut rng);
                if u < v {
                    break;
                }
                u = (u - v) / (1.0 - v);
            }
            let (g, t) = h_marginal.sample_pair(&mut rng).unwrap();
            let mu = hyper.atom_mean.0
                + hyper.atom_mean.1.sqrt() * {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z
                };
            (mu, g, t)
        };
        let lam = rand_distr::Gamma::new(gamma, 2.0 / tau).unwrap().sample(&mut rng);
        let z: f64 = StandardNormal.sample(&mut rng);
        direct.push(mu + lam.sqrt() * z);
    }
    // two-sample KS
    let d = {
        let mut a = chain_draws.clone();
        let mut b = direct.clone();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (mut i, mut j) = (0, 0);
        let mut d: f64 = 0.0;
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    };
    let ne = (chain_draws.len() * direct.len()) as f64
        / (chain_draws.len() + direct.len()) as f64;
    let p = ks_p_value(d, ne);
    assert!(p > 0.01, "KS p = {p} (D = {d})");
}

#[test]
fn blasso_mode_never_allocates() {
    let mut rng = ChaCha12Rng::seed_from_u64(23);
    let (data, _) = bnpvar::var::simulate_var(&DgpConfig::block(4, 60), &mut rng).unwrap();
    let spec = PanelSpec::var(4, 1).unwrap();
    let mut hyper = proper_hyper();
    hyper.mode = SamplerMode::BayesianLasso;
    hyper.mcmc.iterations = 300;
    hyper.mcmc.burn_in = 100;
    hyper.mcmc.thin = 1;
    let sampler = Sampler::new(spec, BlockPartitioning::PerLag, hyper).unwrap();
    let records = sampler.run(&data, &mut rng).unwrap();
    assert_eq!(records.len(), 200);
    for rec in &records {
        assert!(rec.xi.iter().all(|&x| !x));
        assert!(rec.atoms.iter().all(|a| a.is_empty()));
    }
}

#[test]
fn posterior_recovery_small_strong_signal() {
    // m = 3, strong stationary signal: posterior mean close to truth
    let q = 3;
    let t = 2_000;
    let mut truth = DMatrix::zeros(q, q);
    truth[(0, 0)] = 0.8;
    truth[(1, 1)] = -0.7;
    truth[(2, 2)] = 0.5;
    truth[(0, 1)] = 0.4;
    assert!(check_stationarity(&truth, 1));
    let mut rng = ChaCha12Rng::seed_from_u64(24);
    let mut y = DVector::<f64>::zeros(q);
    let mut values = DMatrix::zeros(t + 1, q);
    for r in 0..=t {
        let z = DVector::from_fn(q, |_, _| {
            let v: f64 = StandardNormal.sample(&mut rng);
            v
        });
        y = &truth * &y + z;
        values.row_mut(r).copy_from(&y.transpose());
    }
    let data = TimeSeriesData::new(values, (0..q).map(|i| format!("y{i}")).collect()).unwrap();
    let spec = PanelSpec::var(q, 1).unwrap();
    let mut hyper = proper_hyper();
    hyper.mcmc.iterations = 1_500;
    hyper.mcmc.burn_in = 300;
    hyper.mcmc.thin = 2;
    let sampler = Sampler::new(spec, BlockPartitioning::PerLag, hyper).unwrap();
    let records = sampler.run(&data, &mut rng).unwrap();
    let n = sampler.layout.coefficient_count();
    let mut mean = vec![0.0; n];
    for rec in &records {
        for (m, b) in mean.iter_mut().zip(&rec.beta) {
            *m += b;
        }
    }
    mean.iter_mut().for_each(|m| *m /= records.len() as f64);
    let west = sampler.layout.unvec_coefficients(&DVector::from_vec(mean));
    for i in 0..q {
        for j in 0..q {
            if truth[(i, j)] != 0.0 {
                let est = west[(i, 1 + j)];
                assert!(
                    (est - truth[(i, j)]).abs() < 0.1,
                    "B[{i},{j}] = {est} vs {}",
                    truth[(i, j)]
                );
            }
        }
    }
}
