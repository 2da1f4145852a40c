//! Weighted (coloured) Granger-causality networks from posterior draws.
//!
//! For lag `l`, cell `(i, j)` of the adjacency corresponds to equation
//! `i`'s coefficient on series `j`; an edge means the coefficient's
//! posterior inclusion frequency (share of draws allocated to the
//! clustering component) exceeds the threshold. Included coefficients
//! are clustered by least-squares assignment against the posterior
//! co-clustering matrix, and every edge is coloured by its cluster's
//! posterior mean location.
//!
//! Diagonal cells (own-lag effects) are kept in the adjacency and the
//! exports but excluded from link counts, degrees, path lengths and
//! centrality, which use the `n (n - 1)` normalization.

mod stats;

pub use stats::{
    degree_decomposition, eigenvector_centrality, network_stats, DegreeDecomposition,
    NetworkStats,
};

use crate::archive::DrawArchive;
use crate::error::{Error, Result};
use crate::sampler::DrawRecord;
use nalgebra::DMatrix;

/// Posterior pairwise co-clustering probabilities over the included
/// coefficients of one lag.
#[derive(Debug, Clone)]
pub struct CoClusteringMatrix {
    /// Flat coefficient indices of the included items.
    pub items: Vec<usize>,
    /// Symmetric matrix with unit diagonal.
    pub p: DMatrix<f64>,
    /// Items that never appear jointly included with some partner (their
    /// pair probabilities default to zero).
    pub sparse_pairs: usize,
}

/// The draw whose partition best matches the co-clustering matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChosenClustering {
    /// Cluster label per item from the chosen draw (0 marks items that
    /// sit in the sparse component in that draw).
    pub labels: Vec<usize>,
    pub draw_index: usize,
    pub loss: f64,
    /// Number of distinct labels.
    pub k: usize,
}

/// Per-lag weighted network.
#[derive(Debug, Clone)]
pub struct WeightedLagNetwork {
    pub lag: usize,
    pub nodes: usize,
    adjacency: Vec<bool>,
    /// Cluster index per cell (into `cluster_weights`).
    color_index: Vec<Option<usize>>,
    /// Posterior mean location per cluster.
    pub cluster_weights: Vec<f64>,
}

impl WeightedLagNetwork {
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.nodes + j]
    }

    pub fn color_of(&self, i: usize, j: usize) -> Option<usize> {
        self.color_index[i * self.nodes + j]
    }

    /// Edge weight matrix; zero exactly where there is no edge.
    pub fn colors(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nodes, self.nodes, |i, j| {
            self.color_of(i, j)
                .map(|k| self.cluster_weights[k])
                .unwrap_or(0.0)
        })
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_weights.len()
    }

    /// Build directly from edge data (used by exports and tests):
    /// `(source, target, cluster)` triples.
    pub fn from_edges(
        lag: usize,
        nodes: usize,
        cluster_weights: Vec<f64>,
        edges: &[(usize, usize, usize)],
    ) -> Result<Self> {
        let mut adjacency = vec![false; nodes * nodes];
        let mut color_index = vec![None; nodes * nodes];
        for &(i, j, k) in edges {
            if i >= nodes || j >= nodes {
                return Err(Error::InvalidParam(format!("edge ({i},{j}) out of range")));
            }
            if k >= cluster_weights.len() {
                return Err(Error::InvalidParam(format!("cluster {k} out of range")));
            }
            adjacency[i * nodes + j] = true;
            color_index[i * nodes + j] = Some(k);
        }
        Ok(Self {
            lag,
            nodes,
            adjacency,
            color_index,
            cluster_weights,
        })
    }
}

/// Posterior frequency of allocation to the clustering component.
pub fn inclusion_probability(records: &[DrawRecord], coefficient: usize) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records
        .iter()
        .filter(|r| r.xi[coefficient])
        .count() as f64
        / records.len() as f64
}

/// Binary adjacency at one lag: edge iff the inclusion probability of the
/// corresponding coefficient exceeds the threshold.
pub fn map_adjacency(archive: &DrawArchive, lag: usize, threshold: f64) -> Result<DMatrix<u8>> {
    check_lag(archive, lag)?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParam(format!(
            "threshold must lie in (0,1), got {threshold}"
        )));
    }
    let q = archive.spec.series_count();
    Ok(DMatrix::from_fn(q, q, |i, j| {
        let coeff = archive.layout.lag_coeff_index(i, j, lag);
        u8::from(inclusion_probability(&archive.records, coeff) > threshold)
    }))
}

/// Included coefficient indices at one lag for a threshold.
pub fn included_items(archive: &DrawArchive, lag: usize, threshold: f64) -> Result<Vec<usize>> {
    check_lag(archive, lag)?;
    let q = archive.spec.series_count();
    let mut items = Vec::new();
    for i in 0..q {
        for j in 0..q {
            let coeff = archive.layout.lag_coeff_index(i, j, lag);
            if inclusion_probability(&archive.records, coeff) > threshold {
                items.push(coeff);
            }
        }
    }
    Ok(items)
}

fn check_lag(archive: &DrawArchive, lag: usize) -> Result<()> {
    if lag >= archive.spec.lags {
        return Err(Error::InvalidParam(format!(
            "lag {lag} out of range (model has {} lags)",
            archive.spec.lags
        )));
    }
    if archive.records.is_empty() {
        return Err(Error::InvalidParam("no retained draws".into()));
    }
    Ok(())
}

/// Pairwise co-clustering frequencies over draws where both items are
/// included; pairs with no jointly-included draw get probability zero.
pub fn co_clustering(
    archive: &DrawArchive,
    items: &[usize],
) -> Result<CoClusteringMatrix> {
    if items.is_empty() {
        return Err(Error::InvalidParam("co-clustering needs at least one item".into()));
    }
    let m = items.len();
    let mut p = DMatrix::zeros(m, m);
    let mut sparse_pairs = 0usize;
    for a in 0..m {
        p[(a, a)] = 1.0;
        for b in a + 1..m {
            let (ia, ib) = (items[a], items[b]);
            let mut both = 0usize;
            let mut same = 0usize;
            for rec in &archive.records {
                if rec.xi[ia] && rec.xi[ib] {
                    both += 1;
                    if rec.alloc[ia] == rec.alloc[ib] {
                        same += 1;
                    }
                }
            }
            let prob = if both > 0 {
                same as f64 / both as f64
            } else {
                sparse_pairs += 1;
                0.0
            };
            p[(a, b)] = prob;
            p[(b, a)] = prob;
        }
    }
    Ok(CoClusteringMatrix {
        items: items.to_vec(),
        p,
        sparse_pairs,
    })
}

// label vector of one draw over the items: cluster id when included,
// zero otherwise
fn draw_labels(rec: &DrawRecord, items: &[usize]) -> Vec<usize> {
    items
        .iter()
        .map(|&j| if rec.xi[j] { rec.alloc[j] } else { 0 })
        .collect()
}

// squared deviation between a draw's co-membership and the pairwise
// probabilities; membership requires a shared nonzero label
pub(crate) fn partition_loss(labels: &[usize], p: &DMatrix<f64>) -> f64 {
    let m = labels.len();
    let mut loss = 0.0;
    for a in 0..m {
        for b in 0..m {
            let delta = if labels[a] != 0 && labels[a] == labels[b] {
                1.0
            } else {
                0.0
            };
            let d = delta - p[(a, b)];
            loss += d * d;
        }
    }
    loss
}

/// Least-squares clustering: the retained draw whose partition minimizes
/// the squared deviation from the co-clustering matrix. Ties resolve to
/// the earliest draw.
pub fn dahl_clustering(
    archive: &DrawArchive,
    coclust: &CoClusteringMatrix,
) -> Result<ChosenClustering> {
    if archive.records.is_empty() {
        return Err(Error::InvalidParam("no retained draws".into()));
    }
    let mut best: Option<ChosenClustering> = None;
    for (h, rec) in archive.records.iter().enumerate() {
        let labels = draw_labels(rec, &coclust.items);
        let loss = partition_loss(&labels, &coclust.p);
        let better = match &best {
            None => true,
            Some(b) => loss < b.loss,
        };
        if better {
            let mut distinct: Vec<usize> = labels.clone();
            distinct.sort_unstable();
            distinct.dedup();
            best = Some(ChosenClustering {
                labels,
                draw_index: h,
                loss,
                k: distinct.len(),
            });
        }
    }
    let best = best.unwrap();
    debug_assert!(archive
        .records
        .iter()
        .all(|rec| partition_loss(&draw_labels(rec, &coclust.items), &coclust.p) >= best.loss));
    Ok(best)
}

/// Attach cluster colours to an adjacency: every included coefficient is
/// assigned its chosen cluster, and each cluster's weight is the
/// posterior mean of its members' atom locations across draws.
pub fn color_network(
    archive: &DrawArchive,
    lag: usize,
    adjacency: &DMatrix<u8>,
    items: &[usize],
    chosen: &ChosenClustering,
) -> Result<WeightedLagNetwork> {
    check_lag(archive, lag)?;
    let q = archive.spec.series_count();
    if adjacency.nrows() != q || items.len() != chosen.labels.len() {
        return Err(Error::DataMismatch("adjacency/items/labels disagree".into()));
    }
    // distinct chosen labels in order of first appearance
    let mut label_order: Vec<usize> = Vec::new();
    for &l in &chosen.labels {
        if !label_order.contains(&l) {
            label_order.push(l);
        }
    }
    // posterior mean atom location per cluster
    let mut weights = vec![0.0; label_order.len()];
    let mut counts = vec![0usize; label_order.len()];
    for (pos, &item) in items.iter().enumerate() {
        let cluster = label_order
            .iter()
            .position(|&l| l == chosen.labels[pos])
            .unwrap();
        let block = archive.layout.block_of[item];
        for rec in &archive.records {
            if rec.xi[item] {
                let d = rec.alloc[item];
                if d >= 1 && d <= rec.atoms[block].len() {
                    weights[cluster] += rec.atoms[block][d - 1].mu;
                    counts[cluster] += 1;
                }
            }
        }
    }
    for (w, c) in weights.iter_mut().zip(&counts) {
        if *c > 0 {
            *w /= *c as f64;
        }
    }
    let mut adjacency_cells = vec![false; q * q];
    let mut color_index = vec![None; q * q];
    for (pos, &item) in items.iter().enumerate() {
        let (eq, _) = archive.layout.equation_regressor(item);
        // recover the source series from the item's lag position
        let src = (0..q)
            .find(|&j| archive.layout.lag_coeff_index(eq, j, lag) == item)
            .ok_or_else(|| Error::InvalidParam("item is not a lag coefficient".into()))?;
        if adjacency[(eq, src)] != 0 {
            let cluster = label_order
                .iter()
                .position(|&l| l == chosen.labels[pos])
                .unwrap();
            adjacency_cells[eq * q + src] = true;
            color_index[eq * q + src] = Some(cluster);
        }
    }
    Ok(WeightedLagNetwork {
        lag,
        nodes: q,
        adjacency: adjacency_cells,
        color_index,
        cluster_weights: weights,
    })
}

/// Full pipeline for one lag: adjacency, co-clustering, least-squares
/// clustering, colours.
pub fn extract_lag_network(
    archive: &DrawArchive,
    lag: usize,
    threshold: f64,
) -> Result<WeightedLagNetwork> {
    let adjacency = map_adjacency(archive, lag, threshold)?;
    let items = included_items(archive, lag, threshold)?;
    if items.is_empty() {
        return Ok(WeightedLagNetwork {
            lag,
            nodes: archive.spec.series_count(),
            adjacency: vec![false; archive.spec.series_count().pow(2)],
            color_index: vec![None; archive.spec.series_count().pow(2)],
            cluster_weights: Vec::new(),
        });
    }
    let coclust = co_clustering(archive, &items)?;
    let chosen = dahl_clustering(archive, &coclust)?;
    color_network(archive, lag, &adjacency, &items, &chosen)
}

/// Edge-list CSV: `lag,source,target,cluster,weight`, one row per edge
/// (self-loops included).
pub fn edge_csv(net: &WeightedLagNetwork, labels: &[String]) -> String {
    let mut out = String::from("lag,source,target,cluster,weight\n");
    for i in 0..net.nodes {
        for j in 0..net.nodes {
            if let Some(k) = net.color_of(i, j) {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    net.lag + 1,
                    labels[i],
                    labels[j],
                    k + 1,
                    net.cluster_weights[k]
                ));
            }
        }
    }
    out
}

/// GraphViz DOT export with a colour attribute per edge.
pub fn dot_export(net: &WeightedLagNetwork, labels: &[String]) -> String {
    let palette = [
        "blue", "red", "green", "orange", "purple", "brown", "cyan", "magenta",
    ];
    let mut out = format!("digraph lag{} {{\n", net.lag + 1);
    for l in labels {
        out.push_str(&format!("  \"{l}\";\n"));
    }
    for i in 0..net.nodes {
        for j in 0..net.nodes {
            if let Some(k) = net.color_of(i, j) {
                out.push_str(&format!(
                    "  \"{}\" -> \"{}\" [color={}, weight_value=\"{}\"];\n",
                    labels[i],
                    labels[j],
                    palette[k % palette.len()],
                    net.cluster_weights[k]
                ));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// GraphML export with a numeric weight attribute per edge.
pub fn graphml_export(net: &WeightedLagNetwork, labels: &[String]) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n\
         <key id=\"w\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n\
         <key id=\"c\" for=\"edge\" attr.name=\"cluster\" attr.type=\"int\"/>\n",
    );
    out.push_str(&format!("<graph id=\"lag{}\" edgedefault=\"directed\">\n", net.lag + 1));
    for l in labels {
        out.push_str(&format!("  <node id=\"{l}\"/>\n"));
    }
    for i in 0..net.nodes {
        for j in 0..net.nodes {
            if let Some(k) = net.color_of(i, j) {
                out.push_str(&format!(
                    "  <edge source=\"{}\" target=\"{}\"><data key=\"w\">{}</data><data key=\"c\">{}</data></edge>\n",
                    labels[i],
                    labels[j],
                    net.cluster_weights[k],
                    k + 1
                ));
            }
        }
    }
    out.push_str("</graph>\n</graphml>\n");
    out
}
