use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{SolverConfig, StackedState};
use crate::error::{Error, Result};

/// Column order of the trace CSV.
pub const TRACE_COLUMNS: [&str; 7] =
    ["iter", "avg_est_err", "consensus_err", "objective_G", "objective_gap", "mse_test", "elapsed_ms"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iter: usize,
    pub avg_est_err: Option<f64>,
    pub consensus_err: f64,
    pub objective_g: f64,
    /// `G(theta^t) - min_t G(theta^t)` over the recorded trace.
    pub objective_gap: f64,
    pub mse_test: Option<f64>,
    pub elapsed_ms: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    RelTol,
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub config: SolverConfig,
    pub metrics: Vec<IterationMetrics>,
    pub final_state: StackedState,
    pub stop: StopReason,
}

impl RunTrace {
    pub fn last(&self) -> &IterationMetrics {
        self.metrics.last().expect("a trace always holds the initial point")
    }

    pub fn iterations(&self) -> usize {
        self.final_state.iteration
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_metrics_csv(&self.metrics, out)
    }
}

/// Fills `objective_gap` from the recorded objective values.
pub(crate) fn fill_gaps(metrics: &mut [IterationMetrics]) {
    let best = metrics.iter().map(|m| m.objective_g).fold(f64::INFINITY, f64::min);
    for m in metrics {
        m.objective_gap = m.objective_g - best;
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_metrics_csv<W: Write>(metrics: &[IterationMetrics], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(TRACE_COLUMNS).map_err(to_err)?;
    for m in metrics {
        w.write_record([
            m.iter.to_string(),
            cell(m.avg_est_err),
            cell(Some(m.consensus_err)),
            cell(Some(m.objective_g)),
            cell(Some(m.objective_gap)),
            cell(m.mse_test),
            cell(m.elapsed_ms),
        ])
        .map_err(to_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a trace CSV written by [`write_metrics_csv`].
pub fn read_metrics_csv<R: Read>(input: R) -> Result<Vec<IterationMetrics>> {
    let bad = |msg: String| Error::Csv { path: "<trace>".into(), msg };
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(TRACE_COLUMNS) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|e| bad(format!("{s:?}: {e}")))
        }
    };
    let req = |s: &str| -> Result<f64> { opt(s)?.ok_or_else(|| bad("missing required metric".into())) };
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        out.push(IterationMetrics {
            iter: rec[0].parse().map_err(|e| bad(format!("iter {:?}: {e}", &rec[0])))?,
            avg_est_err: opt(&rec[1])?,
            consensus_err: req(&rec[2])?,
            objective_g: req(&rec[3])?,
            objective_gap: req(&rec[4])?,
            mse_test: opt(&rec[5])?,
            elapsed_ms: opt(&rec[6])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_missing_cells() {
        let metrics = vec![
            IterationMetrics {
                iter: 0,
                avg_est_err: Some(0.1 + 0.2),
                consensus_err: 0.0,
                objective_g: 1.0 / 3.0,
                objective_gap: 1e-300,
                mse_test: None,
                elapsed_ms: None,
            },
            IterationMetrics {
                iter: 5,
                avg_est_err: None,
                consensus_err: 2.5e-17,
                objective_g: -0.0,
                objective_gap: 0.0,
                mse_test: Some(f64::MIN_POSITIVE),
                elapsed_ms: Some(12.0),
            },
        ];
        let mut buf = Vec::new();
        write_metrics_csv(&metrics, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iter,avg_est_err,consensus_err,objective_G,objective_gap,mse_test,elapsed_ms\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(",,"));
        assert_eq!(read_metrics_csv(buf.as_slice()).unwrap(), metrics);
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(read_metrics_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
