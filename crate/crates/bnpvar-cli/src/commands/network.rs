use anyhow::{Context, Result};
use bnpvar::archive::{write_atomic, DrawArchive};
use bnpvar::network::{
    degree_decomposition, dot_export, edge_csv, eigenvector_centrality, extract_lag_network,
    graphml_export, network_stats,
};
use clap::Args;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Args)]
pub struct NetworkArgs {
    /// Draw directory produced by `fit`.
    #[arg(long)]
    pub draws: PathBuf,
    /// Output directory (defaults to the draw directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Posterior inclusion threshold for an edge.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

pub fn run(args: NetworkArgs) -> Result<()> {
    let archive = DrawArchive::read(&args.draws)
        .with_context(|| format!("reading draws from {}", args.draws.display()))?;
    let out = args.out.unwrap_or_else(|| args.draws.clone());
    std::fs::create_dir_all(&out)?;
    let labels = if archive.labels.len() == archive.spec.series_count() {
        archive.labels.clone()
    } else {
        (1..=archive.spec.series_count())
            .map(|i| format!("y{i}"))
            .collect()
    };
    let mut stats_csv = String::from("lag,layer,links,avg_degree,density,avg_path_length\n");
    for lag in 0..archive.spec.lags {
        let net = extract_lag_network(&archive, lag, args.threshold)?;
        write_atomic(
            &out.join(format!("edges_lag{}.csv", lag + 1)),
            edge_csv(&net, &labels).as_bytes(),
        )?;
        write_atomic(
            &out.join(format!("network_lag{}.dot", lag + 1)),
            dot_export(&net, &labels).as_bytes(),
        )?;
        write_atomic(
            &out.join(format!("network_lag{}.graphml", lag + 1)),
            graphml_export(&net, &labels).as_bytes(),
        )?;
        // stats: whole network plus one row per colour layer
        let all = network_stats(&net, None);
        let _ = writeln!(
            stats_csv,
            "{},all,{},{},{},{}",
            lag + 1,
            all.links,
            all.avg_degree,
            all.density,
            all.avg_path_length
        );
        for layer in 0..net.cluster_count() {
            let s = network_stats(&net, Some(layer));
            let _ = writeln!(
                stats_csv,
                "{},{},{},{},{},{}",
                lag + 1,
                layer + 1,
                s.links,
                s.avg_degree,
                s.density,
                s.avg_path_length
            );
        }
        // degree decomposition per node
        let mut degrees = String::from("node,out_total,in_total");
        for k in 0..net.cluster_count() {
            let _ = write!(degrees, ",out_c{},in_c{}", k + 1, k + 1);
        }
        degrees.push('\n');
        for node in 0..net.nodes {
            let d = degree_decomposition(&net, node);
            let _ = write!(degrees, "{},{},{}", labels[node], d.out_total, d.in_total);
            for k in 0..net.cluster_count() {
                let _ = write!(degrees, ",{},{}", d.out_by_color[k], d.in_by_color[k]);
            }
            degrees.push('\n');
        }
        write_atomic(
            &out.join(format!("degrees_lag{}.csv", lag + 1)),
            degrees.as_bytes(),
        )?;
        // centrality: overall and per layer
        let mut centrality = String::from("node,overall");
        for k in 0..net.cluster_count() {
            let _ = write!(centrality, ",layer{}", k + 1);
        }
        centrality.push('\n');
        let overall = eigenvector_centrality(&net, None)?;
        let layers: Vec<Vec<f64>> = (0..net.cluster_count())
            .map(|k| eigenvector_centrality(&net, Some(k)))
            .collect::<bnpvar::Result<_>>()?;
        if overall.iter().all(|&v| v == 0.0) {
            eprintln!("note: lag {} network has no edges; centrality is zero", lag + 1);
        }
        for node in 0..net.nodes {
            let _ = write!(centrality, "{},{}", labels[node], overall[node]);
            for layer in &layers {
                let _ = write!(centrality, ",{}", layer[node]);
            }
            centrality.push('\n');
        }
        write_atomic(
            &out.join(format!("centrality_lag{}.csv", lag + 1)),
            centrality.as_bytes(),
        )?;
    }
    write_atomic(&out.join("stats.csv"), stats_csv.as_bytes())?;
    println!(
        "wrote networks for {} lag(s) at threshold {} into {}",
        archive.spec.lags,
        args.threshold,
        out.display()
    );
    Ok(())
}
