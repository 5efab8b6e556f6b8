//! Named groups of criteria and their CSV/JSON reports.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

use super::criteria::{self, Config, Family, Outcome, RunRow, ALL_FAMILIES};

pub const SUITES: [&str; 7] = ["all", "dims-identities", "multiclass", "regression", "robust", "stability", "agnostic"];

/// Runs the criteria a suite covers, in criterion order.
pub fn run_suite(name: &str, cfg: &Config) -> Result<Vec<Outcome>> {
    let mc = [Family::Multiclass];
    let reg = [Family::Regression];
    let rob = [Family::Robust];
    Ok(match name {
        "all" => criteria::run_all(cfg),
        "dims-identities" => vec![criteria::graph_identity(cfg), criteria::pseudo_identity(cfg), criteria::graph_vs_pseudo(cfg)],
        "multiclass" => vec![
            criteria::reduction_consistency(cfg, &mc),
            criteria::size_bounds(cfg, &mc),
            criteria::soa_bound(cfg),
            criteria::graph_dim1(cfg),
        ],
        "regression" => vec![criteria::regression_guarantee(cfg), criteria::size_bounds(cfg, &reg), criteria::invariance(cfg, &reg)],
        "robust" => vec![
            criteria::reduction_consistency(cfg, &rob),
            criteria::size_bounds(cfg, &rob),
            criteria::invariance(cfg, &rob),
            criteria::one_inclusion(cfg),
        ],
        "stability" => vec![criteria::stability(cfg), criteria::negative_controls(cfg)],
        "agnostic" => vec![criteria::agnostic(cfg)],
        other => return Err(Error::InvalidParameter(format!("unknown suite {other:?}; expected one of {}", SUITES.join(", ")))),
    })
}

/// All families, for callers that do not filter.
pub fn families() -> &'static [Family] {
    &ALL_FAMILIES
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn sorted_rows(outcomes: &[Outcome]) -> Vec<&RunRow> {
    let mut rows: Vec<&RunRow> = outcomes.iter().flat_map(|o| o.rows.iter()).collect();
    rows.sort_by(|a, b| (&a.class, &a.scheme, a.sample).cmp(&(&b.class, &b.scheme, b.sample)));
    rows
}

pub const CSV_HEADER: [&str; 12] = ["class", "scheme", "sample", "size", "loss", "bound_ok", "stable_ok", "vc", "graph", "pseudo", "littlestone", "wall_time_ms"];

/// Run rows as CSV, sorted by class, scheme and sample index.
pub fn rows_csv(outcomes: &[Outcome]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in sorted_rows(outcomes) {
        w.write_record([
            r.class.clone(),
            r.scheme.clone(),
            r.sample.to_string(),
            opt(&r.size),
            opt(&r.loss),
            opt(&r.bound_ok),
            opt(&r.stable_ok),
            opt(&r.dims.vc),
            opt(&r.dims.graph),
            opt(&r.dims.pseudo),
            opt(&r.dims.littlestone),
            format!("{:.3}", r.wall_time_ms),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
}

#[derive(Serialize)]
struct Report<'a> {
    suite: &'a str,
    seed: u64,
    passed: bool,
    criteria: &'a [Outcome],
    rows: Vec<&'a RunRow>,
}

pub fn report_json(suite: &str, cfg: &Config, outcomes: &[Outcome]) -> Result<String> {
    let report = Report { suite, seed: cfg.seed, passed: outcomes.iter().all(|o| o.passed), criteria: outcomes, rows: sorted_rows(outcomes) };
    serde_json::to_string_pretty(&report).map_err(|e| Error::InvalidParameter(format!("json: {e}")))
}

/// Writes `<suite>.csv` and `<suite>.json` into `dir`.
pub fn write_reports(dir: &Path, suite: &str, cfg: &Config, outcomes: &[Outcome]) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidParameter(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join(format!("{suite}.csv")), rows_csv(outcomes)?).map_err(io)?;
    fs::write(dir.join(format!("{suite}.json")), report_json(suite, cfg, outcomes)?).map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", &Config::default()).is_err());
    }

    #[test]
    fn csv_has_header_and_sorted_rows() {
        let outcomes = run_suite("stability", &Config::default()).unwrap();
        let csv = rows_csv(&outcomes[1..]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.count(), outcomes[1].rows.len());
    }
}
