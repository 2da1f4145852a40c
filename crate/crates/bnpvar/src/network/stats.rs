//! Topology statistics, degree decomposition and centrality for a
//! weighted lag network. Self-loops are ignored throughout; densities
//! use the `n (n - 1)` normalization.

use super::WeightedLagNetwork;
use crate::error::{Error, Result};

/// Total and per-colour in/out degrees of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDecomposition {
    pub out_total: usize,
    pub out_by_color: Vec<usize>,
    pub in_total: usize,
    pub in_by_color: Vec<usize>,
}

/// Out-degree as the row sum, in-degree as the column sum, each split by
/// edge colour; the per-colour counts sum to the totals by construction.
pub fn degree_decomposition(net: &WeightedLagNetwork, node: usize) -> DegreeDecomposition {
    let k = net.cluster_count();
    let mut out_by_color = vec![0usize; k];
    let mut in_by_color = vec![0usize; k];
    let mut out_total = 0;
    let mut in_total = 0;
    for j in 0..net.nodes {
        if j != node {
            if let Some(c) = net.color_of(node, j) {
                out_total += 1;
                out_by_color[c] += 1;
            }
            if let Some(c) = net.color_of(j, node) {
                in_total += 1;
                in_by_color[c] += 1;
            }
        }
    }
    DegreeDecomposition {
        out_total,
        out_by_color,
        in_total,
        in_by_color,
    }
}

/// Link count, average degree, density and average directed path length.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStats {
    pub links: usize,
    pub avg_degree: f64,
    pub density: f64,
    pub avg_path_length: f64,
}

fn edge_in_layer(net: &WeightedLagNetwork, i: usize, j: usize, layer: Option<usize>) -> bool {
    match (net.color_of(i, j), layer) {
        (Some(_), None) => true,
        (Some(c), Some(l)) => c == l,
        (None, _) => false,
    }
}

/// Statistics of the (optionally colour-filtered) directed graph. The
/// average path length is the mean finite directed shortest-path length
/// over reachable ordered pairs; adjacent nodes have distance one.
pub fn network_stats(net: &WeightedLagNetwork, layer: Option<usize>) -> NetworkStats {
    let n = net.nodes;
    let mut links = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i != j && edge_in_layer(net, i, j, layer) {
                links += 1;
            }
        }
    }
    // BFS from every node over the filtered digraph
    let mut total_dist = 0usize;
    let mut reachable_pairs = 0usize;
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[start] = 0;
        queue.clear();
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for w in 0..n {
                if w != v && dist[w] == usize::MAX && edge_in_layer(net, v, w, layer) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        for (w, &d) in dist.iter().enumerate() {
            if w != start && d != usize::MAX {
                total_dist += d;
                reachable_pairs += 1;
            }
        }
    }
    let avg_path_length = if reachable_pairs > 0 {
        total_dist as f64 / reachable_pairs as f64
    } else {
        0.0
    };
    NetworkStats {
        links,
        avg_degree: links as f64 / n as f64,
        density: links as f64 / (n as f64 * (n as f64 - 1.0)),
        avg_path_length,
    }
}

/// Eigenvector centrality: the principal right eigenvector of the binary
/// (optionally colour-filtered) adjacency by power iteration from a
/// uniform start, normalized to unit maximum. An edgeless graph returns
/// all zeros.
pub fn eigenvector_centrality(
    net: &WeightedLagNetwork,
    layer: Option<usize>,
) -> Result<Vec<f64>> {
    let n = net.nodes;
    if n == 0 {
        return Err(Error::InvalidParam("empty network".into()));
    }
    let any_edge = (0..n).any(|i| (0..n).any(|j| i != j && edge_in_layer(net, i, j, layer)));
    if !any_edge {
        // no linkage information: report uniform zeros
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![1.0f64; n];
    let mut next = vec![0.0f64; n];
    for _ in 0..20_000 {
        // shifted iteration (A + I) x keeps the dominant eigenvalue
        // unique on bipartite/periodic graphs
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = x[i];
            for j in 0..n {
                if i != j && edge_in_layer(net, i, j, layer) {
                    acc += x[j];
                }
            }
            *slot = acc;
        }
        let max = next.iter().cloned().fold(0.0f64, f64::max);
        if max <= 0.0 {
            return Ok(vec![0.0; n]);
        }
        let mut delta = 0.0f64;
        for i in 0..n {
            next[i] /= max;
            delta = delta.max((next[i] - x[i]).abs());
        }
        std::mem::swap(&mut x, &mut next);
        if delta < 1e-13 {
            break;
        }
    }
    Ok(x)
}
