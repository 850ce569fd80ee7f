//! Delimited (CSV) records for catalogs, censuses, optimizer runs and
//! critical-point surveys.
//!
//! Column order is fixed:
//!
//! | writer | columns |
//! |---|---|
//! | [`write_catalog`] | `permutation,value,classification,multiplicity,min_hessian,max_hessian` |
//! | [`write_census`] | `value,count,classification,reconcilable,false_trap,first_permutation` |
//! | [`write_runs`] | `seed,iterations,terminal_value,terminal_residual,classification,reconcilable,converged` |
//! | [`write_outcomes`] | `seed,iterations,converged,value,residual,classification,reconcilable` |
//! | [`write_histogram`] | `value_bin,count,reconcilable,classification` |
//!
//! Reals are written with 17 significant digits. An empty input yields a
//! header-only file.

use std::collections::BTreeMap;
use std::io::Write;

use crate::catalog::PermutationPoint;
use crate::error::Result;
use crate::landscape::Classification;
use crate::optimizer::{RunRecord, SeedOutcome};
use crate::scalar::{to_f64, Real};
use crate::traps::TrapCensus;

pub const CATALOG_COLUMNS: [&str; 6] = ["permutation", "value", "classification", "multiplicity", "min_hessian", "max_hessian"];
pub const CENSUS_COLUMNS: [&str; 6] = ["value", "count", "classification", "reconcilable", "false_trap", "first_permutation"];
pub const RUN_COLUMNS: [&str; 7] = [
    "seed",
    "iterations",
    "terminal_value",
    "terminal_residual",
    "classification",
    "reconcilable",
    "converged",
];
pub const OUTCOME_COLUMNS: [&str; 7] = ["seed", "iterations", "converged", "value", "residual", "classification", "reconcilable"];
pub const HISTOGRAM_COLUMNS: [&str; 4] = ["value_bin", "count", "reconcilable", "classification"];

/// A real with 17 significant digits.
pub fn real_field<T: Real>(x: T) -> String {
    format!("{:.16e}", to_f64(x))
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

pub fn write_catalog<T: Real, W: Write>(out: W, points: &[PermutationPoint<T>]) -> Result<()> {
    let mut w = writer(out, &CATALOG_COLUMNS)?;
    for p in points {
        w.write_record([
            p.pi.to_string(),
            real_field(p.value),
            p.classification.to_string(),
            p.multiplicity.to_string(),
            real_field(p.min_hessian()),
            real_field(p.max_hessian()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_census<T: Real, W: Write>(out: W, census: &TrapCensus<T>) -> Result<()> {
    let mut w = writer(out, &CENSUS_COLUMNS)?;
    for e in &census.entries {
        w.write_record([
            real_field(e.value),
            e.count.to_string(),
            e.classification.to_string(),
            e.reconcilable.to_string(),
            e.false_trap.to_string(),
            e.first.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_runs<T: Real, W: Write>(out: W, runs: &[RunRecord<T>]) -> Result<()> {
    let mut w = writer(out, &RUN_COLUMNS)?;
    for r in runs {
        w.write_record([
            r.seed.to_string(),
            r.iterations.to_string(),
            real_field(r.terminal_value),
            real_field(r.terminal_residual),
            r.terminal_classification.to_string(),
            r.reconcilable.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_outcomes<T: Real, W: Write>(out: W, outcomes: &[SeedOutcome<T>]) -> Result<()> {
    let mut w = writer(out, &OUTCOME_COLUMNS)?;
    for o in outcomes {
        w.write_record([
            o.seed.to_string(),
            o.iterations.to_string(),
            o.converged.to_string(),
            real_field(o.value),
            real_field(o.residual),
            o.classification.to_string(),
            o.reconcilable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One histogram cell.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramRow {
    pub value_bin: f64,
    pub count: usize,
    pub reconcilable: bool,
    pub classification: Classification,
}

/// Counts `(value, reconcilable, classification)` samples in bins of
/// width `width`, each value going to the nearest multiple of `width`.
/// Rows are ordered by bin, then reconcilability, then classification.
pub fn histogram<T: Real>(samples: impl IntoIterator<Item = (T, bool, Classification)>, width: f64) -> Vec<HistogramRow> {
    let mut cells: BTreeMap<(i64, bool, Classification), usize> = BTreeMap::new();
    for (v, rec, class) in samples {
        let bin = (to_f64(v) / width).round() as i64;
        *cells.entry((bin, rec, class)).or_default() += 1;
    }
    cells
        .into_iter()
        .map(|((bin, reconcilable, classification), count)| HistogramRow {
            value_bin: bin as f64 * width,
            count,
            reconcilable,
            classification,
        })
        .collect()
}

/// Histogram of terminal values of runs.
pub fn run_histogram<T: Real>(runs: &[RunRecord<T>], width: f64) -> Vec<HistogramRow> {
    histogram(runs.iter().map(|r| (r.terminal_value, r.reconcilable, r.terminal_classification)), width)
}

/// Histogram of converged critical-point searches.
pub fn outcome_histogram<T: Real>(outcomes: &[SeedOutcome<T>], width: f64) -> Vec<HistogramRow> {
    histogram(
        outcomes
            .iter()
            .filter(|o| o.converged)
            .map(|o| (o.value, o.reconcilable, o.classification)),
        width,
    )
}

pub fn write_histogram<W: Write>(out: W, rows: &[HistogramRow]) -> Result<()> {
    let mut w = writer(out, &HISTOGRAM_COLUMNS)?;
    for r in rows {
        w.write_record([
            real_field(r.value_bin),
            r.count.to_string(),
            r.reconcilable.to_string(),
            r.classification.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
