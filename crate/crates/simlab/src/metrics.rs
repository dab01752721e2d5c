//! Per-realization rows, group summaries and their CSV form.
//!
//! Floats are written with 9 significant digits. Row values are rounded to
//! that precision when the row is created, so aggregating the rows read back
//! from CSV reproduces the in-memory summary.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::Deserialize;
use vlc_core::estimators::EstimateReport;
use vlc_core::ofdm::Mode;
use vlc_core::Vec3;

use crate::error::SimResult;

/// Rounds to the 9 significant digits used in CSV output.
pub fn quantize(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    format!("{v:.8e}").parse().expect("formatted float parses")
}

pub fn fmt(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn mode_label(mode: Mode) -> &'static str {
    match mode {
        Mode::Lom => "LOM",
        Mode::Lcm => "LCM",
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MetricRow {
    pub experiment: String,
    pub group: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub method: String,
    pub mode: String,
    /// Swept quantity (noise variance, clipping factor), 0 when unused.
    pub parameter: f64,
    /// Euclidean error, m.
    pub error: f64,
    pub iterations: usize,
    pub converged: bool,
    /// RMSE of the row's aggregation group, m.
    pub rmse: f64,
    pub seed: u64,
}

pub const METRIC_HEADER: [&str; 13] = [
    "experiment",
    "group",
    "x",
    "y",
    "z",
    "method",
    "mode",
    "parameter",
    "error",
    "iterations",
    "converged",
    "rmse",
    "seed",
];

impl MetricRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        experiment: &str,
        group: impl Into<String>,
        truth: Vec3,
        mode: Mode,
        parameter: f64,
        report: &EstimateReport,
        seed: u64,
    ) -> Self {
        let error = (report.position - truth).norm();
        // diverged runs can leave non-finite iterates; keep the row finite
        let error = if error.is_finite() { error } else { f64::MAX };
        Self {
            experiment: experiment.to_string(),
            group: group.into(),
            x: quantize(truth.x),
            y: quantize(truth.y),
            z: quantize(truth.z),
            method: report.method.label().to_string(),
            mode: mode_label(mode).to_string(),
            parameter: quantize(parameter),
            error: quantize(error),
            iterations: report.iterations,
            converged: report.converged,
            rmse: 0.0,
            seed,
        }
    }

    fn key(&self) -> (String, String, String, u64) {
        (
            self.group.clone(),
            self.method.clone(),
            self.mode.clone(),
            self.parameter.to_bits(),
        )
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.group.clone(),
            fmt(self.x),
            fmt(self.y),
            fmt(self.z),
            self.method.clone(),
            self.mode.clone(),
            fmt(self.parameter),
            fmt(self.error),
            self.iterations.to_string(),
            self.converged.to_string(),
            fmt(self.rmse),
            self.seed.to_string(),
        ]
    }
}

/// Aggregate of one (group, method, mode, parameter) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: String,
    pub group: String,
    pub method: String,
    pub mode: String,
    pub parameter: f64,
    pub count: usize,
    pub converged_pct: f64,
    pub rmse: f64,
    pub rmse_converged: f64,
    pub mean_error: f64,
    pub mean_iterations: f64,
    pub mean_iterations_converged: f64,
    /// Experiment-specific figure (capacity, fitted slope, ...).
    pub value: f64,
}

pub const SUMMARY_HEADER: [&str; 13] = [
    "experiment",
    "group",
    "method",
    "mode",
    "parameter",
    "count",
    "converged_pct",
    "rmse",
    "rmse_converged",
    "mean_error",
    "mean_iterations",
    "mean_iterations_converged",
    "value",
];

impl SummaryRow {
    /// A row carrying a single figure rather than run statistics.
    pub fn value(experiment: &str, group: &str, method: &str, mode: &str, parameter: f64, value: f64) -> Self {
        Self {
            experiment: experiment.into(),
            group: group.into(),
            method: method.into(),
            mode: mode.into(),
            parameter,
            count: 0,
            converged_pct: f64::NAN,
            rmse: f64::NAN,
            rmse_converged: f64::NAN,
            mean_error: f64::NAN,
            mean_iterations: f64::NAN,
            mean_iterations_converged: f64::NAN,
            value,
        }
    }

    /// Statistics over `rows`, accumulated in slice order.
    pub fn over<'a>(
        experiment: &str,
        group: &str,
        method: &str,
        mode: &str,
        parameter: f64,
        rows: impl IntoIterator<Item = &'a MetricRow>,
    ) -> Self {
        let mut n = 0usize;
        let mut nc = 0usize;
        let (mut se, mut sec, mut e, mut it, mut itc) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for r in rows {
            n += 1;
            se += r.error * r.error;
            e += r.error;
            it += r.iterations as f64;
            if r.converged {
                nc += 1;
                sec += r.error * r.error;
                itc += r.iterations as f64;
            }
        }
        let div = |a: f64, b: usize| if b == 0 { f64::NAN } else { a / b as f64 };
        Self {
            experiment: experiment.into(),
            group: group.into(),
            method: method.into(),
            mode: mode.into(),
            parameter,
            count: n,
            converged_pct: 100.0 * div(nc as f64, n),
            rmse: div(se, n).sqrt(),
            rmse_converged: div(sec, nc).sqrt(),
            mean_error: div(e, n),
            mean_iterations: div(it, n),
            mean_iterations_converged: div(itc, nc),
            value: f64::NAN,
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.group.clone(),
            self.method.clone(),
            self.mode.clone(),
            fmt(self.parameter),
            self.count.to_string(),
            fmt(self.converged_pct),
            fmt(self.rmse),
            fmt(self.rmse_converged),
            fmt(self.mean_error),
            fmt(self.mean_iterations),
            fmt(self.mean_iterations_converged),
            fmt(self.value),
        ]
    }
}

/// Groups rows by (group, method, mode, parameter) in first-seen order,
/// stores each group's RMSE on its rows and returns one summary per group.
pub fn aggregate(rows: &mut [MetricRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, String, String, u64)> = Vec::new();
    let mut members: HashMap<(String, String, String, u64), Vec<usize>> = HashMap::new();
    for (i, r) in rows.iter().enumerate() {
        let k = r.key();
        members
            .entry(k.clone())
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(i);
    }
    let mut out = Vec::with_capacity(order.len());
    for k in order {
        let idx = &members[&k];
        let first = &rows[idx[0]];
        let s = SummaryRow::over(
            &first.experiment,
            &first.group,
            &first.method,
            &first.mode,
            first.parameter,
            idx.iter().map(|i| &rows[*i]),
        );
        for i in idx {
            rows[*i].rmse = s.rmse;
        }
        out.push(s);
    }
    out
}

pub fn write_rows<W: Write>(w: W, rows: &[MetricRow]) -> SimResult<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(METRIC_HEADER)?;
    for r in rows {
        wr.write_record(r.record())?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> SimResult<Vec<MetricRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let rows = rd.deserialize().collect::<Result<Vec<MetricRow>, _>>()?;
    Ok(rows)
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> SimResult<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SUMMARY_HEADER)?;
    for r in rows {
        wr.write_record(r.record())?;
    }
    wr.flush()?;
    Ok(())
}
