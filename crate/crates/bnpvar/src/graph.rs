//! Decomposable (chordal) undirected graphs with a maintained junction
//! decomposition, the Bernoulli edge prior, local add/delete proposals
//! and the hyper-inverse-Wishart log normalizing constant.
//!
//! The junction decomposition is rebuilt from a maximum-cardinality
//! search after every accepted toggle; at the model sizes handled here a
//! rebuild costs about as much as the decomposability check itself.

use crate::error::{Error, Result};
use crate::special::ln_mv_gamma;
use nalgebra::DMatrix;
use rand::Rng;

/// Junction decomposition: prime components (cliques) in running-
/// intersection order and the separator attached to each clique after the
/// first. Separator multiplicity is represented by repetition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JunctionTree {
    pub cliques: Vec<Vec<usize>>,
    /// `separators[j]` sits between `cliques[j + 1]` and the union of the
    /// earlier cliques; empty separators join disconnected components.
    pub separators: Vec<Vec<usize>>,
}

/// Undirected decomposable graph over `n` vertices.
#[derive(Debug, Clone)]
pub struct DecomposableGraph {
    n: usize,
    adj: Vec<bool>,
    edge_count: usize,
    junction: JunctionTree,
}

impl PartialEq for DecomposableGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.adj == other.adj
    }
}

impl DecomposableGraph {
    pub fn empty(n: usize) -> Self {
        let junction = JunctionTree {
            cliques: (0..n).map(|v| vec![v]).collect(),
            separators: vec![Vec::new(); n.saturating_sub(1)],
        };
        Self {
            n,
            adj: vec![false; n * n],
            edge_count: 0,
            junction,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut adj = vec![true; n * n];
        for v in 0..n {
            adj[v * n + v] = false;
        }
        Self {
            n,
            adj,
            edge_count: n * (n - 1) / 2,
            junction: JunctionTree {
                cliques: vec![(0..n).collect()],
                separators: Vec::new(),
            },
        }
    }

    /// Build from an edge list; fails when the graph is not decomposable.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![false; n * n];
        let mut count = 0;
        for &(i, j) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidParam(format!("bad edge ({i},{j})")));
            }
            if !adj[i * n + j] {
                adj[i * n + j] = true;
                adj[j * n + i] = true;
                count += 1;
            }
        }
        let junction =
            junction_from_adjacency(n, &adj).ok_or(Error::NotDecomposable)?;
        Ok(Self {
            n,
            adj,
            edge_count: count,
            junction,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Maximum number of edges `C(n, 2)`.
    pub fn max_edges(&self) -> usize {
        self.n * (self.n.saturating_sub(1)) / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adj[i * self.n + j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn junction(&self) -> &JunctionTree {
        &self.junction
    }

    /// The graph with edge `(i, j)` toggled, or `None` when the result is
    /// not decomposable.
    pub fn toggled(&self, i: usize, j: usize) -> Option<Self> {
        if i == j || i >= self.n || j >= self.n {
            return None;
        }
        let mut adj = self.adj.clone();
        let present = adj[i * self.n + j];
        adj[i * self.n + j] = !present;
        adj[j * self.n + i] = !present;
        let junction = junction_from_adjacency(self.n, &adj)?;
        Some(Self {
            n: self.n,
            adj,
            edge_count: if present {
                self.edge_count - 1
            } else {
                self.edge_count + 1
            },
            junction,
        })
    }

    /// Vertex sets of the connected components.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for w in 0..self.n {
                    if self.adj[v * self.n + w] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Plain-text edge list, one `i j` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (i, j) in self.edges() {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }
}

/// Chordality test (maximum-cardinality search) on a raw edge list.
pub fn is_decomposable(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![false; n * n];
    for &(i, j) in edges {
        if i >= n || j >= n || i == j {
            return false;
        }
        adj[i * n + j] = true;
        adj[j * n + i] = true;
    }
    junction_from_adjacency(n, &adj).is_some()
}

// MCS + fill-in check; returns the junction decomposition when chordal.
fn junction_from_adjacency(n: usize, adj: &[bool]) -> Option<JunctionTree> {
    if n == 0 {
        return Some(JunctionTree {
            cliques: Vec::new(),
            separators: Vec::new(),
        });
    }
    // maximum cardinality search
    let mut weight = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n); // visit order
    let mut number = vec![0usize; n]; // visit index per vertex
    for step in 0..n {
        let v = (0..n)
            .filter(|&v| !visited[v])
            .max_by_key(|&v| weight[v])
            .unwrap();
        visited[v] = true;
        number[v] = step;
        order.push(v);
        for w in 0..n {
            if adj[v * n + w] && !visited[w] {
                weight[w] += 1;
            }
        }
    }
    // chordality: earlier-visited neighbours of v minus its parent must
    // be neighbours of the parent
    for (step, &v) in order.iter().enumerate() {
        let prev: Vec<usize> = (0..n)
            .filter(|&w| adj[v * n + w] && number[w] < step)
            .collect();
        if prev.is_empty() {
            continue;
        }
        let parent = *prev.iter().max_by_key(|&&w| number[w]).unwrap();
        for &w in &prev {
            if w != parent && !adj[parent * n + w] {
                return None;
            }
        }
    }
    // candidate cliques: vertex plus earlier neighbours; keep maximal ones
    let mut candidates: Vec<(usize, Vec<usize>)> = Vec::with_capacity(n);
    for (step, &v) in order.iter().enumerate() {
        let mut c: Vec<usize> = (0..n)
            .filter(|&w| adj[v * n + w] && number[w] < step)
            .collect();
        c.push(v);
        c.sort_unstable();
        candidates.push((step, c));
    }
    let mut cliques: Vec<(usize, Vec<usize>)> = Vec::new();
    'outer: for (rank, cand) in candidates {
        let mut dominated = Vec::new();
        for (i, (_, kept)) in cliques.iter().enumerate() {
            if is_subset(&cand, kept) {
                continue 'outer;
            }
            if is_subset(kept, &cand) {
                dominated.push(i);
            }
        }
        for i in dominated.into_iter().rev() {
            cliques.remove(i);
        }
        cliques.push((rank, cand));
    }
    // running-intersection order: ascending max visit index
    cliques.sort_by_key(|(rank, _)| *rank);
    let cliques: Vec<Vec<usize>> = cliques.into_iter().map(|(_, c)| c).collect();
    let mut seen = vec![false; n];
    let mut separators = Vec::with_capacity(cliques.len().saturating_sub(1));
    for (idx, clique) in cliques.iter().enumerate() {
        if idx > 0 {
            let sep: Vec<usize> = clique.iter().copied().filter(|&v| seen[v]).collect();
            // running intersection: the separator must lie inside one
            // earlier clique
            let ok = cliques[..idx]
                .iter()
                .any(|earlier| is_subset(&sep, earlier));
            if !ok {
                return None;
            }
            separators.push(sep);
        }
        for &v in clique {
            seen[v] = true;
        }
    }
    Some(JunctionTree {
        cliques,
        separators,
    })
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|v| big.binary_search(v).is_ok())
}

/// Bernoulli edge-inclusion prior with probability `psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPrior {
    pub psi: f64,
}

impl GraphPrior {
    pub fn new(psi: f64) -> Result<Self> {
        if !(psi > 0.0 && psi < 1.0) {
            return Err(Error::InvalidParam(format!(
                "edge probability must lie in (0,1), got {psi}"
            )));
        }
        Ok(Self { psi })
    }

    /// Default `2/(q-1)`, which puts the prior mode at roughly `q` edges.
    pub fn default_for(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParam(
                "default edge prior needs at least 2 vertices".into(),
            ));
        }
        let psi = (2.0 / (q as f64 - 1.0)).min(0.5);
        Self::new(psi)
    }
}

/// `|E| ln psi + (kappa - |E|) ln(1 - psi)` with `kappa = C(n, 2)`.
pub fn graph_log_prior(g: &DecomposableGraph, prior: &GraphPrior) -> f64 {
    let e = g.edge_count() as f64;
    let kappa = g.max_edges() as f64;
    e * prior.psi.ln() + (kappa - e) * (1.0 - prior.psi).ln()
}

/// A uniform pair toggle proposal. The move is symmetric so the proposal
/// log-ratio is zero; `candidate` is `None` when the toggled graph leaves
/// the decomposable class (callers auto-reject those).
#[derive(Debug, Clone)]
pub struct ToggleProposal {
    pub pair: (usize, usize),
    pub candidate: Option<DecomposableGraph>,
    pub log_ratio: f64,
}

pub fn propose_toggle<R: Rng + ?Sized>(g: &DecomposableGraph, rng: &mut R) -> ToggleProposal {
    let n = g.vertex_count();
    debug_assert!(n >= 2);
    let k = rng.random_range(0..g.max_edges());
    // unrank the k-th pair (i, j), i < j
    let mut i = 0;
    let mut offset = k;
    loop {
        let row = n - 1 - i;
        if offset < row {
            break;
        }
        offset -= row;
        i += 1;
    }
    let j = i + 1 + offset;
    ToggleProposal {
        pair: (i, j),
        candidate: g.toggled(i, j),
        log_ratio: 0.0,
    }
}

/// Log normalizing constant of `HIW_G(df, scale)`: the constant `C` with
/// density `C * prod_P kernel(Sigma_P) / prod_S kernel(Sigma_S)` where
/// each factor is an inverse-Wishart kernel
/// `|Sigma|^{-(df + 2 p)/2} exp(-tr(Sigma^{-1} L)/2)`.
pub fn hiw_log_normalizer(g: &DecomposableGraph, df: f64, scale: &DMatrix<f64>) -> Result<f64> {
    if !(df > 0.0) {
        return Err(Error::InvalidParam(format!(
            "hiw degrees of freedom must be positive, got {df}"
        )));
    }
    if scale.nrows() != g.vertex_count() || scale.ncols() != g.vertex_count() {
        return Err(Error::DataMismatch(format!(
            "scale is {}x{} but the graph has {} vertices",
            scale.nrows(),
            scale.ncols(),
            g.vertex_count()
        )));
    }
    let jt = g.junction();
    let mut acc = 0.0;
    for clique in &jt.cliques {
        acc += block_log_const(df, scale, clique)?;
    }
    for sep in &jt.separators {
        if !sep.is_empty() {
            acc -= block_log_const(df, scale, sep)?;
        }
    }
    Ok(acc)
}

// log of the inverse-Wishart normalizing constant for one block:
// (nu/2) ln|L_P| - (nu p / 2) ln 2 - ln Gamma_p(nu/2), nu = df + p - 1
fn block_log_const(df: f64, scale: &DMatrix<f64>, block: &[usize]) -> Result<f64> {
    let p = block.len();
    let sub = submatrix(scale, block);
    let chol = sub.cholesky().ok_or_else(|| {
        Error::NotPositiveDefinite(format!("hiw scale block {block:?} is not SPD"))
    })?;
    let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let nu = df + p as f64 - 1.0;
    Ok(0.5 * nu * logdet - 0.5 * nu * p as f64 * std::f64::consts::LN_2
        - ln_mv_gamma(p, 0.5 * nu))
}

pub(crate) fn submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}
