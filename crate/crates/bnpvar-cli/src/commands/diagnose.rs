use anyhow::{Context, Result};
use bnpvar::archive::{write_atomic, DrawArchive};
use bnpvar::diagnostics::DiagnosticsReport;
use clap::Args;
use std::path::PathBuf;

#[derive(Args)]
pub struct DiagnoseArgs {
    /// Draw directory produced by `fit`.
    #[arg(long)]
    pub draws: PathBuf,
    /// Report file (defaults to `report.txt` inside the draw directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Extra thinning applied for the after columns.
    #[arg(long, default_value_t = 5)]
    pub thin: usize,
}

pub fn run(args: DiagnoseArgs) -> Result<()> {
    let archive = DrawArchive::read(&args.draws)
        .with_context(|| format!("reading draws from {}", args.draws.display()))?;
    let series: Vec<f64> = archive.records.iter().map(|r| r.lambda_l2).collect();
    let report = DiagnosticsReport::compute("lambda_l2", &series, args.thin)?;
    let out = args.out.unwrap_or_else(|| args.draws.join("report.txt"));
    write_atomic(&out, report.to_text().as_bytes())?;
    println!(
        "cd = {:.4}, ks_p = {:.4}, ineff {:.3} -> {:.3}, acf10 {:.4} -> {:.4} ({})",
        report.cd,
        report.ks_p,
        report.ineff_before,
        report.ineff_after,
        report.acf10_before,
        report.acf10_after,
        out.display()
    );
    Ok(())
}
