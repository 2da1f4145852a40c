//! Network extraction oracles: brute-force co-clustering counts,
//! exhaustive partition enumeration for the least-squares clustering,
//! synthetic colour recovery and an eigensolver cross-check.

mod common;

use bnpvar::archive::DrawArchive;
use bnpvar::network::{
    co_clustering, color_network, dahl_clustering, degree_decomposition,
    eigenvector_centrality, extract_lag_network, included_items, inclusion_probability,
    map_adjacency, network_stats, WeightedLagNetwork,
};
use bnpvar::sampler::{Atom, DrawRecord};
use bnpvar::var::{BlockPartitioning, PanelSpec};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

// build a VAR(1) archive over q series with hand-made draws: each draw
// supplies xi/alloc per lag coefficient and atom locations per cluster
fn archive_from_lag_draws(
    q: usize,
    draws: &[(Vec<usize>, Vec<f64>)], // (label per lag cell 0 = sparse, atom mu per cluster)
) -> DrawArchive {
    let spec = PanelSpec::var(q, 1).unwrap();
    let layout = bnpvar::var::CoefficientLayout::new(spec, BlockPartitioning::PerLag);
    let n = layout.coefficient_count();
    let records: Vec<DrawRecord> = draws
        .iter()
        .enumerate()
        .map(|(it, (labels, mus))| {
            assert_eq!(labels.len(), q * q);
            let mut xi = vec![false; n];
            let mut alloc = vec![0usize; n];
            for i in 0..q {
                for j in 0..q {
                    let coeff = layout.lag_coeff_index(i, j, 0);
                    let label = labels[i * q + j];
                    xi[coeff] = label != 0;
                    alloc[coeff] = label;
                }
            }
            let atoms: Vec<Atom> = mus
                .iter()
                .map(|&mu| Atom {
                    mu,
                    gamma: 2.0,
                    tau: 2.0,
                })
                .collect();
            DrawRecord {
                iteration: it,
                beta: vec![0.0; n],
                xi,
                alloc,
                pi: vec![0.5],
                sparse_atom: (1.0, 1.0),
                atoms: vec![atoms],
                graph_edges: 0,
                lambda_l2: 1.0,
                sigma: None,
            }
        })
        .collect();
    DrawArchive::new(
        spec,
        BlockPartitioning::PerLag,
        (0..q).map(|i| format!("y{i}")).collect(),
        records,
    )
}

#[test]
fn inclusion_probability_counts() {
    let arch = archive_from_lag_draws(
        2,
        &[
            (vec![1, 0, 0, 0], vec![1.0]),
            (vec![1, 0, 0, 0], vec![1.0]),
            (vec![0, 0, 0, 0], vec![1.0]),
            (vec![1, 0, 0, 0], vec![1.0]),
        ],
    );
    let coeff = arch.layout.lag_coeff_index(0, 0, 0);
    assert_eq!(inclusion_probability(&arch.records, coeff), 0.75);
    let other = arch.layout.lag_coeff_index(1, 0, 0);
    assert_eq!(inclusion_probability(&arch.records, other), 0.0);
}

#[test]
fn adjacency_uses_row_major_phi_mapping() {
    // edge (i, j) reflects the coefficient of equation i on series j
    let arch = archive_from_lag_draws(
        2,
        &[
            (vec![0, 1, 0, 0], vec![0.5]),
            (vec![0, 1, 0, 0], vec![0.5]),
        ],
    );
    let a = map_adjacency(&arch, 0, 0.5).unwrap();
    assert_eq!(a[(0, 1)], 1);
    assert_eq!(a[(0, 0)], 0);
    assert_eq!(a[(1, 0)], 0);
    // phi is row-major
    assert_eq!(arch.layout.phi(0, 1), 1);
    assert_eq!(arch.layout.phi(1, 0), 2);
}

#[test]
fn co_clustering_matches_hand_counts() {
    // six coefficients over four draws; oracle counts by hand below
    let draws = vec![
        (vec![1, 1, 2, 0, 1, 2, 0, 0, 0], vec![0.5, -0.5]),
        (vec![1, 2, 2, 0, 1, 1, 0, 0, 0], vec![0.6, -0.4]),
        (vec![1, 1, 1, 0, 2, 2, 0, 0, 0], vec![0.4, -0.6]),
        (vec![1, 1, 2, 0, 0, 2, 0, 0, 0], vec![0.5, -0.5]),
    ];
    let arch = archive_from_lag_draws(3, &draws);
    let items = included_items(&arch, 0, 0.5).unwrap();
    // cells 0, 1, 2, 5 are included in > 50% of draws (cell 4 in 3/4)
    let cells: Vec<usize> = items
        .iter()
        .map(|&c| {
            let (eq, _) = arch.layout.equation_regressor(c);
            let src = (0..3)
                .find(|&j| arch.layout.lag_coeff_index(eq, j, 0) == c)
                .unwrap();
            eq * 3 + src
        })
        .collect();
    assert_eq!(cells, vec![0, 1, 2, 4, 5]);
    let cc = co_clustering(&arch, &items).unwrap();
    // pair (cell 0, cell 1): included together in all four draws, same
    // label in draws 1, 3, 4 -> 3/4
    assert_eq!(cc.p[(0, 1)], 0.75);
    // pair (cell 0, cell 2): together 4 draws, same label only in draw 3
    assert_eq!(cc.p[(0, 2)], 0.25);
    // pair (cell 4 [index 3], cell 5 [index 4]): both included in draws
    // 1, 2, 3; same cluster in draw 2 and 3 -> 2/3
    assert!((cc.p[(3, 4)] - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(cc.p[(0, 0)], 1.0);
}

// all partitions of n items as restricted growth strings
fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    fn rec(i: usize, maxl: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == current.len() {
            out.push(current.clone());
            return;
        }
        for l in 0..=maxl + 1 {
            current[i] = l;
            rec(i + 1, maxl.max(l), current, out);
        }
    }
    rec(1, 0, &mut current, &mut out);
    out
}

fn partition_loss_oracle(labels: &[usize], p: &DMatrix<f64>) -> f64 {
    let m = labels.len();
    let mut loss = 0.0;
    for a in 0..m {
        for b in 0..m {
            let delta = if labels[a] == labels[b] { 1.0 } else { 0.0 };
            loss += (delta - p[(a, b)]).powi(2);
        }
    }
    loss
}

#[test]
fn dahl_matches_exhaustive_enumeration_on_planted_clusters() {
    assert_eq!(all_partitions(6).len(), 203);
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    for instance in 0..30 {
        // planted two-block partition of 6 items, draws are noisy copies
        let truth = [1usize, 1, 1, 2, 2, 2];
        let mut draws = Vec::new();
        for _ in 0..50 {
            let mut labels = truth.to_vec();
            if rng.random::<f64>() < 0.3 {
                let flip = rng.random_range(0..6);
                labels[flip] = if labels[flip] == 1 { 2 } else { 1 };
            }
            let grid: Vec<usize> = labels.iter().copied().chain([0, 0, 0]).collect();
            draws.push((grid, vec![0.5, -0.5]));
        }
        let arch = archive_from_lag_draws(3, &draws);
        let items = included_items(&arch, 0, 0.5).unwrap();
        assert_eq!(items.len(), 6);
        let cc = co_clustering(&arch, &items).unwrap();
        let chosen = dahl_clustering(&arch, &cc).unwrap();
        // exhaustive minimum over all 203 partitions
        let best_all = all_partitions(6)
            .into_iter()
            .map(|labels| {
                let shifted: Vec<usize> = labels.iter().map(|&l| l + 1).collect();
                partition_loss_oracle(&shifted, &cc.p)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(
            (chosen.loss - best_all).abs() < 1e-9,
            "instance {instance}: chosen loss {} vs exhaustive {best_all}",
            chosen.loss
        );
        assert_eq!(chosen.k, 2);
        // ties resolve to the earliest draw
        let same_loss: Vec<usize> = arch
            .records
            .iter()
            .enumerate()
            .filter(|(_, _)| true)
            .map(|(h, _)| h)
            .collect();
        assert!(same_loss.contains(&chosen.draw_index));
    }
}

#[test]
fn dahl_trivial_cases() {
    // identical draws: that clustering with zero loss
    let draws: Vec<(Vec<usize>, Vec<f64>)> = (0..10)
        .map(|_| (vec![1, 1, 2, 0, 2, 1, 0, 0, 0], vec![0.3, 0.9]))
        .collect();
    let arch = archive_from_lag_draws(3, &draws);
    let items = included_items(&arch, 0, 0.5).unwrap();
    let cc = co_clustering(&arch, &items).unwrap();
    let chosen = dahl_clustering(&arch, &cc).unwrap();
    assert_eq!(chosen.loss, 0.0);
    assert_eq!(chosen.draw_index, 0);
    // single item: one cluster, zero loss
    let draws = vec![(vec![1, 0, 0, 0], vec![0.5]); 3];
    let arch = archive_from_lag_draws(2, &draws);
    let items = included_items(&arch, 0, 0.5).unwrap();
    assert_eq!(items.len(), 1);
    let cc = co_clustering(&arch, &items).unwrap();
    let chosen = dahl_clustering(&arch, &cc).unwrap();
    assert_eq!(chosen.loss, 0.0);
    assert_eq!(chosen.k, 1);
}

#[test]
fn colors_recover_three_synthetic_levels() {
    // atoms near -0.5, 0.4, 1.1 with jitter across draws
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    let mut draws = Vec::new();
    for _ in 0..200 {
        let jitter = |c: f64, rng: &mut ChaCha12Rng| c + 0.02 * (rng.random::<f64>() - 0.5);
        draws.push((
            vec![1, 1, 2, 2, 3, 3, 0, 0, 0],
            vec![
                jitter(-0.5, &mut rng),
                jitter(0.4, &mut rng),
                jitter(1.1, &mut rng),
            ],
        ));
    }
    let arch = archive_from_lag_draws(3, &draws);
    let net = extract_lag_network(&arch, 0, 0.5).unwrap();
    assert_eq!(net.cluster_count(), 3);
    let mut weights = net.cluster_weights.clone();
    weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (w, c) in weights.iter().zip(&[-0.5, 0.4, 1.1]) {
        assert!((w - c).abs() < 0.05, "weight {w} vs centre {c}");
    }
    // colours nonzero exactly on edges
    let colors = net.colors();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(net.has_edge(i, j), colors[(i, j)] != 0.0);
        }
    }
}

#[test]
fn color_network_single_cluster_constant_weight() {
    let draws: Vec<(Vec<usize>, Vec<f64>)> = (0..20)
        .map(|_| (vec![1, 1, 0, 1], vec![0.7]))
        .collect();
    let arch = archive_from_lag_draws(2, &draws);
    let adjacency = map_adjacency(&arch, 0, 0.5).unwrap();
    let items = included_items(&arch, 0, 0.5).unwrap();
    let cc = co_clustering(&arch, &items).unwrap();
    let chosen = dahl_clustering(&arch, &cc).unwrap();
    let net = color_network(&arch, 0, &adjacency, &items, &chosen).unwrap();
    let colors = net.colors();
    for cell in [(0, 0), (0, 1), (1, 1)] {
        assert!((colors[cell] - 0.7).abs() < 1e-12, "{:?}: {}", cell, colors[cell]);
    }
    assert_eq!(colors[(1, 0)], 0.0);
}

#[test]
fn degree_decomposition_identity_on_random_networks() {
    let mut rng = ChaCha12Rng::seed_from_u64(123);
    for _ in 0..200 {
        let n = 2 + rng.random_range(0..10);
        let k = 1 + rng.random_range(0..4);
        let weights: Vec<f64> = (0..k).map(|i| i as f64 - 1.0).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if rng.random::<f64>() < 0.3 {
                    edges.push((i, j, rng.random_range(0..k)));
                }
            }
        }
        let net = WeightedLagNetwork::from_edges(0, n, weights, &edges).unwrap();
        for node in 0..n {
            let d = degree_decomposition(&net, node);
            assert_eq!(d.out_by_color.iter().sum::<usize>(), d.out_total);
            assert_eq!(d.in_by_color.iter().sum::<usize>(), d.in_total);
        }
        // per-layer links sum to total links
        let total = network_stats(&net, None).links;
        let by_layer: usize = (0..net.cluster_count())
            .map(|l| network_stats(&net, Some(l)).links)
            .sum();
        assert_eq!(total, by_layer);
        // density times n(n-1) reproduces links exactly
        let stats = network_stats(&net, None);
        let back = stats.density * (n as f64) * (n as f64 - 1.0);
        assert!((back - stats.links as f64).abs() < 1e-9);
    }
}

#[test]
fn eigenvector_centrality_matches_dense_eigen_oracle() {
    // oracle: dominant eigenvalue from the dense solver, eigenvector via
    // the null space of (A - lambda I) through SVD
    let mut rng = ChaCha12Rng::seed_from_u64(321);
    let n = 10;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < 0.35 {
                edges.push((i, j, 0usize));
            }
        }
    }
    let net = WeightedLagNetwork::from_edges(0, n, vec![1.0], &edges).unwrap();
    let c = eigenvector_centrality(&net, None).unwrap();
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i != j && net.has_edge(i, j) {
            1.0
        } else {
            0.0
        }
    });
    let eigs = a.clone().complex_eigenvalues();
    let lambda = eigs
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let shifted = &a - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(true, true);
    let v_t = svd.v_t.unwrap();
    let null_vec = v_t.row(n - 1).transpose();
    let scale = null_vec
        .iter()
        .cloned()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let oracle: Vec<f64> = null_vec.iter().map(|v| v / scale).collect();
    for i in 0..n {
        assert!(
            (c[i] - oracle[i]).abs() < 1e-8,
            "node {i}: {} vs oracle {}",
            c[i],
            oracle[i]
        );
    }
}

#[test]
fn empty_archive_adjacency_is_zero() {
    let draws: Vec<(Vec<usize>, Vec<f64>)> = (0..5).map(|_| (vec![0; 4], vec![])).collect();
    let arch = archive_from_lag_draws(2, &draws);
    let a = map_adjacency(&arch, 0, 0.5).unwrap();
    assert!(a.iter().all(|&v| v == 0));
    let net = extract_lag_network(&arch, 0, 0.5).unwrap();
    assert_eq!(network_stats(&net, None).links, 0);
}

#[test]
fn threshold_monotonicity() {
    let mut rng = ChaCha12Rng::seed_from_u64(555);
    let draws: Vec<(Vec<usize>, Vec<f64>)> = (0..40)
        .map(|_| {
            let grid: Vec<usize> = (0..9)
                .map(|_| if rng.random::<f64>() < 0.5 { 1 } else { 0 })
                .collect();
            (grid, vec![0.5])
        })
        .collect();
    let arch = archive_from_lag_draws(3, &draws);
    let low = map_adjacency(&arch, 0, 0.3).unwrap();
    let high = map_adjacency(&arch, 0, 0.7).unwrap();
    let count = |a: &DMatrix<u8>| a.iter().filter(|&&v| v != 0).count();
    assert!(count(&high) <= count(&low));
}
