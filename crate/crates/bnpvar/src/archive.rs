//! Draw persistence.
//!
//! A run directory holds one flat CSV per variable family, one record
//! per retained iteration:
//!
//! * `draws.csv` — iteration, lambda L2 norm, graph edge count, sparse
//!   atom, mixing probabilities;
//! * `beta.csv`, `xi.csv`, `alloc.csv` — iteration plus one column per
//!   coefficient;
//! * `atoms.csv` — iteration, block, cluster id, location, shape, scale
//!   (one row per represented atom);
//! * `archive.txt` — panel layout and labels needed to reinterpret the
//!   columns.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! re-reading is exact and identical runs produce identical bytes.

use crate::error::{Error, Result};
use crate::sampler::{Atom, DrawRecord};
use crate::var::{BlockPartitioning, CoefficientLayout, PanelSpec};
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

/// Write a file through a temporary sibling and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp-write");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Posterior draws together with the layout they refer to.
#[derive(Debug, Clone)]
pub struct DrawArchive {
    pub spec: PanelSpec,
    pub partitioning: BlockPartitioning,
    pub layout: CoefficientLayout,
    pub labels: Vec<String>,
    pub records: Vec<DrawRecord>,
}

impl DrawArchive {
    pub fn new(
        spec: PanelSpec,
        partitioning: BlockPartitioning,
        labels: Vec<String>,
        records: Vec<DrawRecord>,
    ) -> Self {
        let layout = CoefficientLayout::new(spec, partitioning);
        Self {
            spec,
            partitioning,
            layout,
            labels,
            records,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let n = self.layout.coefficient_count();
        let blocks = self.layout.block_count();

        let mut meta = String::new();
        let _ = writeln!(meta, "units = {}", self.spec.units);
        let _ = writeln!(meta, "vars_per_unit = {}", self.spec.vars_per_unit);
        let _ = writeln!(meta, "lags = {}", self.spec.lags);
        let _ = writeln!(
            meta,
            "partition = {}",
            match self.partitioning {
                BlockPartitioning::PerLag => "per-lag",
                BlockPartitioning::Single => "single",
            }
        );
        let _ = writeln!(meta, "labels = {}", self.labels.join(","));
        let _ = writeln!(meta, "records = {}", self.records.len());
        write_atomic(&dir.join("archive.txt"), meta.as_bytes())?;

        let mut draws = String::from("iteration,lambda_l2,graph_edges,gamma0,tau0");
        for b in 0..blocks {
            let _ = write!(draws, ",pi{}", b + 1);
        }
        draws.push('\n');
        let mut beta = header_row("b", n);
        let mut xi = header_row("xi", n);
        let mut alloc = header_row("d", n);
        let mut atoms = String::from("iteration,block,cluster,mu,gamma,tau\n");
        for rec in &self.records {
            let _ = write!(
                draws,
                "{},{},{},{},{}",
                rec.iteration, rec.lambda_l2, rec.graph_edges, rec.sparse_atom.0, rec.sparse_atom.1
            );
            for &p in &rec.pi {
                let _ = write!(draws, ",{p}");
            }
            draws.push('\n');

            let _ = write!(beta, "{}", rec.iteration);
            for v in &rec.beta {
                let _ = write!(beta, ",{v}");
            }
            beta.push('\n');

            let _ = write!(xi, "{}", rec.iteration);
            for &v in &rec.xi {
                let _ = write!(xi, ",{}", u8::from(v));
            }
            xi.push('\n');

            let _ = write!(alloc, "{}", rec.iteration);
            for &v in &rec.alloc {
                let _ = write!(alloc, ",{v}");
            }
            alloc.push('\n');

            for (b, block_atoms) in rec.atoms.iter().enumerate() {
                for (k, atom) in block_atoms.iter().enumerate() {
                    let _ = writeln!(
                        atoms,
                        "{},{},{},{},{},{}",
                        rec.iteration,
                        b,
                        k + 1,
                        atom.mu,
                        atom.gamma,
                        atom.tau
                    );
                }
            }
        }
        write_atomic(&dir.join("draws.csv"), draws.as_bytes())?;
        write_atomic(&dir.join("beta.csv"), beta.as_bytes())?;
        write_atomic(&dir.join("xi.csv"), xi.as_bytes())?;
        write_atomic(&dir.join("alloc.csv"), alloc.as_bytes())?;
        write_atomic(&dir.join("atoms.csv"), atoms.as_bytes())?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let meta = std::fs::read_to_string(dir.join("archive.txt"))?;
        let mut units = None;
        let mut vars = None;
        let mut lags = None;
        let mut partition = BlockPartitioning::PerLag;
        let mut labels = Vec::new();
        for line in meta.lines() {
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "units" => units = Some(parse_usize(value)?),
                "vars_per_unit" => vars = Some(parse_usize(value)?),
                "lags" => lags = Some(parse_usize(value)?),
                "partition" => {
                    partition = match value {
                        "per-lag" => BlockPartitioning::PerLag,
                        "single" => BlockPartitioning::Single,
                        other => return Err(Error::Parse(format!("unknown partition {other}"))),
                    }
                }
                "labels" => labels = value.split(',').map(|s| s.to_string()).collect(),
                _ => {}
            }
        }
        let spec = PanelSpec::new(
            units.ok_or_else(|| Error::Parse("archive.txt missing units".into()))?,
            vars.ok_or_else(|| Error::Parse("archive.txt missing vars_per_unit".into()))?,
            lags.ok_or_else(|| Error::Parse("archive.txt missing lags".into()))?,
        )?;
        let layout = CoefficientLayout::new(spec, partition);
        let n = layout.coefficient_count();
        let blocks = layout.block_count();

        let draws = read_numeric_csv(&dir.join("draws.csv"), 5 + blocks)?;
        let beta = read_numeric_csv(&dir.join("beta.csv"), 1 + n)?;
        let xi = read_numeric_csv(&dir.join("xi.csv"), 1 + n)?;
        let alloc = read_numeric_csv(&dir.join("alloc.csv"), 1 + n)?;
        if draws.len() != beta.len() || beta.len() != xi.len() || xi.len() != alloc.len() {
            return Err(Error::Parse("draw files disagree on record count".into()));
        }
        if draws.is_empty() {
            return Err(Error::Parse("draw archive is empty".into()));
        }

        let mut records: Vec<DrawRecord> = Vec::with_capacity(draws.len());
        for i in 0..draws.len() {
            let d = &draws[i];
            records.push(DrawRecord {
                iteration: d[0] as usize,
                lambda_l2: d[1],
                graph_edges: d[2] as usize,
                sparse_atom: (d[3], d[4]),
                pi: d[5..].to_vec(),
                beta: beta[i][1..].to_vec(),
                xi: xi[i][1..].iter().map(|&v| v != 0.0).collect(),
                alloc: alloc[i][1..].iter().map(|&v| v as usize).collect(),
                atoms: vec![Vec::new(); blocks],
                sigma: None,
            });
        }
        // atoms.csv is sparse per iteration; index records by iteration
        let mut by_iter = std::collections::HashMap::new();
        for (idx, rec) in records.iter().enumerate() {
            by_iter.insert(rec.iteration, idx);
        }
        let file = std::fs::File::open(dir.join("atoms.csv"))?;
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::Parse(format!("atoms.csv row {}", lineno + 1)));
            }
            let iter = parse_usize(fields[0])?;
            let block = parse_usize(fields[1])?;
            let cluster = parse_usize(fields[2])?;
            let atom = Atom {
                mu: parse_f64(fields[3])?,
                gamma: parse_f64(fields[4])?,
                tau: parse_f64(fields[5])?,
            };
            let idx = by_iter
                .get(&iter)
                .ok_or_else(|| Error::Parse(format!("atoms.csv references iteration {iter}")))?;
            let slot = &mut records[*idx].atoms;
            if block >= slot.len() {
                return Err(Error::Parse("atoms.csv block out of range".into()));
            }
            if slot[block].len() + 1 != cluster {
                return Err(Error::Parse("atoms.csv clusters out of order".into()));
            }
            slot[block].push(atom);
        }
        Ok(Self {
            spec,
            partitioning: partition,
            layout,
            labels,
            records,
        })
    }
}

fn header_row(prefix: &str, n: usize) -> String {
    let mut s = String::from("iteration");
    for i in 0..n {
        let _ = write!(s, ",{prefix}{i}");
    }
    s.push('\n');
    s
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|e| Error::Parse(format!("{e}: {s:?}")))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{e}: {s:?}")))
}

fn read_numeric_csv(path: &Path, expect_cols: usize) -> Result<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(parse_f64)
            .collect::<Result<_>>()?;
        if row.len() != expect_cols {
            return Err(Error::Parse(format!(
                "{}: row {} has {} fields, expected {expect_cols}",
                path.display(),
                lineno + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}
