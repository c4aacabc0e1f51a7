//! CSV and JSON writers. CSV quoting follows RFC 4180 (via the `csv` crate);
//! JSON objects always have their keys sorted.

use std::io;
use std::path::Path;

use serde::Serialize;
use xxz_core::bounds::BoundReport;

use crate::jobs::{DecayRow, EntropyRow};

pub const DECAY_HEADER: [&str; 8] = ["N", "K", "delta", "seed", "d", "norm", "bound", "margin"];
pub const ENTROPY_HEADER: [&str; 13] = [
    "twoJ",
    "L",
    "ell",
    "Delta",
    "K",
    "delta",
    "seed",
    "state_id",
    "N_weight_profile",
    "energy",
    "vn_entropy",
    "renyi_alpha",
    "renyi_value",
];
pub const REPORT_HEADER: [&str; 9] = ["job", "name", "pass", "lhs", "rhs", "margin", "log_scale", "seed", "params"];

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn sorted_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // serde_json's Map is a BTreeMap unless `preserve_order` is enabled
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn csv_error(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// `N:weight` pairs joined by `;`.
pub fn weight_profile(profile: &[(usize, f64)]) -> String {
    profile
        .iter()
        .map(|(n, w)| format!("{n}:{w}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_decay(path: &Path, rows: &[DecayRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(DECAY_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.particles.to_string(),
            r.budget.to_string(),
            r.delta.to_string(),
            r.seed.to_string(),
            r.distance.to_string(),
            r.norm.to_string(),
            r.bound.to_string(),
            (r.bound - r.norm).to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_entropy(path: &Path, rows: &[EntropyRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(ENTROPY_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.two_j.to_string(),
            r.sites.to_string(),
            r.ell.to_string(),
            r.anisotropy.to_string(),
            r.budget.to_string(),
            r.delta.to_string(),
            r.seed.to_string(),
            r.state_id.clone(),
            weight_profile(&r.weight_profile),
            r.energy.to_string(),
            r.von_neumann.to_string(),
            r.alpha.to_string(),
            r.renyi.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_reports_csv(path: &Path, reports: &[(String, BoundReport)]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(REPORT_HEADER).map_err(csv_error)?;
    for (job, r) in reports {
        let params = serde_json::to_string(&r.params).map_err(io::Error::other)?;
        w.write_record([
            job.clone(),
            r.name.clone(),
            r.pass.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.margin.to_string(),
            r.log_scale.to_string(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            params,
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

#[derive(Serialize)]
struct JsonReport<'a> {
    job: &'a str,
    #[serde(flatten)]
    report: &'a BoundReport,
}

pub fn write_reports_json(path: &Path, reports: &[(String, BoundReport)]) -> io::Result<()> {
    let rows: Vec<JsonReport> = reports
        .iter()
        .map(|(job, report)| JsonReport { job, report })
        .collect();
    std::fs::write(path, sorted_json(&rows).map_err(io::Error::other)?)
}
