//! Chain state and retained draws.

use crate::graph::DecomposableGraph;
use nalgebra::{DMatrix, DVector};

/// One mixture atom `(mu, gamma, tau)` of a block's Dirichlet process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub mu: f64,
    pub gamma: f64,
    pub tau: f64,
}

/// Full latent state of one chain.
///
/// Invariants maintained across sweeps: `sticks[i]` and `atoms[i]` have
/// equal length; `alloc[j] == 0` iff `xi[j]` is false; for allocated
/// coefficients the slice lies below the weight of their cluster.
#[derive(Debug, Clone)]
pub struct ChainState {
    /// Flat coefficient vector (equation-major).
    pub beta: DVector<f64>,
    /// Latent normal-gamma scales, one per coefficient.
    pub lambda: Vec<f64>,
    /// Slice variables, one per coefficient.
    pub slice: Vec<f64>,
    /// Component flags: `true` selects the clustering component.
    pub xi: Vec<bool>,
    /// Cluster labels (1-based; 0 is the sparse sentinel).
    pub alloc: Vec<usize>,
    /// Stick-breaking fractions per block.
    pub sticks: Vec<Vec<f64>>,
    /// Atom table per block, aligned with `sticks`.
    pub atoms: Vec<Vec<Atom>>,
    /// Mixing probabilities per block.
    pub pi: Vec<f64>,
    /// Sparse component `(gamma0, tau0)`; its location is fixed at zero.
    pub sparse_atom: (f64, f64),
    pub sigma: DMatrix<f64>,
    pub graph: DecomposableGraph,
    /// Adapted random-walk steps for the shape updates.
    pub gs_step_sparse: f64,
    pub gs_step_atoms: f64,
    pub adapt: AdaptCounters,
}

/// Acceptance bookkeeping for burn-in step adaptation.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptCounters {
    pub sparse_accept: usize,
    pub sparse_total: usize,
    pub atom_accept: usize,
    pub atom_total: usize,
}

impl ChainState {
    /// Stick-breaking weights `w_k = v_k prod_{l<k} (1 - v_l)` of one
    /// block.
    pub fn weights(&self, block: usize) -> Vec<f64> {
        let v = &self.sticks[block];
        let mut out = Vec::with_capacity(v.len());
        let mut rest = 1.0;
        for &vk in v {
            out.push(vk * rest);
            rest *= 1.0 - vk;
        }
        out
    }

    /// L2 norm of the latent scale vector (the monitored functional).
    pub fn lambda_l2(&self) -> f64 {
        self.lambda.iter().map(|l| l * l).sum::<f64>().sqrt()
    }
}

/// Snapshot of one retained iteration.
#[derive(Debug, Clone)]
pub struct DrawRecord {
    pub iteration: usize,
    pub beta: Vec<f64>,
    pub xi: Vec<bool>,
    pub alloc: Vec<usize>,
    pub pi: Vec<f64>,
    pub sparse_atom: (f64, f64),
    /// Represented atoms per block at record time.
    pub atoms: Vec<Vec<Atom>>,
    pub graph_edges: usize,
    pub lambda_l2: f64,
    /// Covariance draw, kept only when requested.
    pub sigma: Option<DMatrix<f64>>,
}

impl DrawRecord {
    pub fn from_state(state: &ChainState, iteration: usize, record_sigma: bool) -> Self {
        Self {
            iteration,
            beta: state.beta.iter().copied().collect(),
            xi: state.xi.clone(),
            alloc: state.alloc.clone(),
            pi: state.pi.clone(),
            sparse_atom: state.sparse_atom,
            atoms: state.atoms.clone(),
            graph_edges: state.graph.edge_count(),
            lambda_l2: state.lambda_l2(),
            sigma: record_sigma.then(|| state.sigma.clone()),
        }
    }
}
