//! Plot data from a finished run: space-separated columns, `#` headers,
//! blocks separated by two blank lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use xxz_core::bounds::BoundReport;

use crate::{io_at, LabError, RunManifest};

pub const DECAY_DAT: &str = "ct_decay.dat";
pub const ENTROPY_DAT: &str = "entropy.dat";
pub const MARGINS_DAT: &str = "margins.dat";
const MARGIN_BINS: usize = 10;

#[derive(Deserialize)]
struct DecayCsv {
    #[serde(rename = "N")]
    particles: usize,
    #[serde(rename = "K")]
    budget: u32,
    delta: f64,
    d: u64,
    norm: f64,
    bound: f64,
}

#[derive(Deserialize)]
struct StoredReport {
    #[allow(dead_code)]
    job: String,
    #[serde(flatten)]
    report: BoundReport,
}

/// Totally ordered float key for grouping.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn output_path(manifest_path: &Path, manifest: &RunManifest, name: &str) -> Result<PathBuf, LabError> {
    let file = manifest
        .outputs
        .get(name)
        .ok_or_else(|| LabError::Domain(format!("manifest lists no `{name}` output")))?;
    let path = manifest_path.parent().unwrap_or(Path::new(".")).join(file);
    if !path.is_file() {
        return Err(LabError::Domain(format!("output `{name}` missing at {}", path.display())));
    }
    Ok(path)
}

fn load_reports(path: &Path) -> Result<Vec<BoundReport>, LabError> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    let rows: Vec<StoredReport> =
        serde_json::from_str(&text).map_err(|e| LabError::Domain(format!("{}: {e}", path.display())))?;
    Ok(rows.into_iter().map(|r| r.report).collect())
}

/// Writes the plot files next to `out` and returns their paths.
pub fn emit_plots(manifest_path: &Path, out: Option<&Path>) -> Result<Vec<PathBuf>, LabError> {
    let manifest = RunManifest::load(manifest_path)?;
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf());
    for name in manifest.outputs.keys() {
        output_path(manifest_path, &manifest, name)?;
    }
    fs::create_dir_all(&out).map_err(io_at(&out))?;
    let reports = load_reports(&output_path(manifest_path, &manifest, "reports_json")?)?;
    let mut written = Vec::new();

    if manifest.outputs.contains_key("ct_decay_csv") {
        let src = output_path(manifest_path, &manifest, "ct_decay_csv")?;
        let body = decay_data(&src)?;
        written.push(write(&out, DECAY_DAT, &body)?);
    }
    if manifest.outputs.contains_key("entropy_csv") {
        written.push(write(&out, ENTROPY_DAT, &entropy_data(&reports))?);
    }
    written.push(write(&out, MARGINS_DAT, &margin_data(&reports))?);
    Ok(written)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf, LabError> {
    let p = dir.join(name);
    fs::write(&p, body).map_err(io_at(&p))?;
    Ok(p)
}

fn decay_data(src: &Path) -> Result<String, LabError> {
    let mut reader = csv::Reader::from_path(src).map_err(|e| LabError::Domain(format!("{}: {e}", src.display())))?;
    // (N, K, delta) -> d -> (max norm over seeds, bound)
    let mut groups: BTreeMap<(usize, u32, Key), BTreeMap<u64, (f64, f64)>> = BTreeMap::new();
    for row in reader.deserialize::<DecayCsv>() {
        let r = row.map_err(|e| LabError::Domain(format!("{}: {e}", src.display())))?;
        let slot = groups
            .entry((r.particles, r.budget, Key(r.delta)))
            .or_default()
            .entry(r.d)
            .or_insert((0.0, r.bound));
        slot.0 = slot.0.max(r.norm);
        slot.1 = slot.1.min(r.bound);
    }
    let mut s = String::from("# projection decay: d, log max_seeds ||P_X Q||, log C e^{-mu d}\n");
    s.push_str("# rows with vanishing norm are omitted\n");
    for ((n, k, delta), rows) in &groups {
        let _ = write!(s, "\n\n# N={n} K={k} delta={}\n# d log_norm log_bound\n", delta.0);
        for (d, (norm, bound)) in rows {
            if *norm > 0.0 {
                let _ = writeln!(s, "{d} {} {}", norm.ln(), bound.ln());
            }
        }
    }
    Ok(s)
}

fn param(r: &BoundReport, key: &str) -> f64 {
    r.params.get(key).copied().unwrap_or(f64::NAN)
}

fn entropy_data(reports: &[BoundReport]) -> String {
    // (K, delta, alpha) -> ell -> (max measured, bound)
    let mut groups: BTreeMap<(Key, Key, Key), BTreeMap<usize, (f64, f64)>> = BTreeMap::new();
    for r in reports.iter().filter(|r| r.name == "renyi_entropy_bound") {
        let slot = groups
            .entry((Key(param(r, "k")), Key(param(r, "delta")), Key(param(r, "alpha"))))
            .or_default()
            .entry(param(r, "ell") as usize)
            .or_insert((f64::NEG_INFINITY, r.rhs));
        slot.0 = slot.0.max(r.lhs);
    }
    let mut s = String::from("# Renyi entropy against log ell: largest measured value and the bound\n");
    for ((k, delta, alpha), rows) in &groups {
        let _ = write!(
            s,
            "\n\n# K={} delta={} alpha={}\n# ell log_ell renyi_max bound\n",
            k.0, delta.0, alpha.0
        );
        for (ell, (measured, bound)) in rows {
            let _ = writeln!(s, "{ell} {} {measured} {bound}", (*ell as f64).ln());
        }
    }
    s
}

fn margin_data(reports: &[BoundReport]) -> String {
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in reports {
        let name = r.name.split_whitespace().next().unwrap_or("");
        groups.entry(name).or_default().push(r.margin);
    }
    let mut s = String::from("# margin histograms per report name (log-scale reports use log margins)\n");
    for (name, margins) in &groups {
        let lo = margins.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = write!(
            s,
            "\n\n# {name} count={} min={lo} max={hi}\n# bin_lo bin_hi count\n",
            margins.len()
        );
        if !(hi > lo) {
            let _ = writeln!(s, "{lo} {hi} {}", margins.len());
            continue;
        }
        let width = (hi - lo) / MARGIN_BINS as f64;
        let mut counts = [0usize; MARGIN_BINS];
        for m in margins {
            let b = (((m - lo) / width) as usize).min(MARGIN_BINS - 1);
            counts[b] += 1;
        }
        for (i, c) in counts.iter().enumerate() {
            let _ = writeln!(s, "{} {} {c}", lo + width * i as f64, lo + width * (i + 1) as f64);
        }
    }
    s
}
