//! Run reports, written one JSON object per line.

use std::io::{self, Write};

use nass::search::SearchResult;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub query: usize,
    pub tau: u32,
    pub results: usize,
    pub candidates_verified: usize,
    pub mappings_pushed: u64,
    pub regenerations: usize,
    pub results_from_index: usize,
    pub elapsed_us: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_candidates_verified: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_mappings_pushed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_elapsed_us: Option<u64>,
}

impl Row {
    pub fn new(query: usize, tau: u32, res: &SearchResult, elapsed_us: u64) -> Self {
        Row {
            query,
            tau,
            results: res.hits.len(),
            candidates_verified: res.stats.candidates_verified,
            mappings_pushed: res.stats.mappings_pushed,
            regenerations: res.stats.regenerations,
            results_from_index: res.stats.results_from_index,
            elapsed_us,
            scan_candidates_verified: None,
            scan_mappings_pushed: None,
            scan_elapsed_us: None,
        }
    }

    pub fn with_scan(mut self, scan: &SearchResult, elapsed_us: u64) -> Self {
        self.scan_candidates_verified = Some(scan.stats.candidates_verified);
        self.scan_mappings_pushed = Some(scan.stats.mappings_pushed);
        self.scan_elapsed_us = Some(elapsed_us);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tau: u32,
    pub mode: String,
    pub rows: Vec<Row>,
    pub mean_results: f64,
    pub mean_candidates_verified: f64,
    pub mean_mappings_pushed: f64,
    pub mean_elapsed_us: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_scan_candidates_verified: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_scan_mappings_pushed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_scan_elapsed_us: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

impl RunReport {
    pub fn new(tau: u32, mode: &str, rows: Vec<Row>) -> Self {
        let m = |f: fn(&Row) -> f64| mean(rows.iter().map(f));
        let scan = |f: fn(&Row) -> Option<f64>| -> Option<f64> {
            let xs: Option<Vec<f64>> = rows.iter().map(f).collect();
            xs.filter(|v| !v.is_empty()).map(|v| mean(v.into_iter()))
        };
        RunReport {
            tau,
            mode: mode.to_owned(),
            mean_results: m(|r| r.results as f64),
            mean_candidates_verified: m(|r| r.candidates_verified as f64),
            mean_mappings_pushed: m(|r| r.mappings_pushed as f64),
            mean_elapsed_us: m(|r| r.elapsed_us as f64),
            mean_scan_candidates_verified: scan(|r| r.scan_candidates_verified.map(|x| x as f64)),
            mean_scan_mappings_pushed: scan(|r| r.scan_mappings_pushed.map(|x| x as f64)),
            mean_scan_elapsed_us: scan(|r| r.scan_elapsed_us.map(|x| x as f64)),
            rows,
        }
    }

    pub fn write_line(&self, w: &mut impl Write) -> io::Result<()> {
        serde_json::to_writer(&mut *w, self)?;
        w.write_all(b"\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(query: usize, verified: usize) -> Row {
        Row {
            query,
            tau: 2,
            results: 1,
            candidates_verified: verified,
            mappings_pushed: 10,
            regenerations: 0,
            results_from_index: 0,
            elapsed_us: 5,
            scan_candidates_verified: None,
            scan_mappings_pushed: None,
            scan_elapsed_us: None,
        }
    }

    #[test]
    fn aggregates_are_row_means() {
        let r = RunReport::new(2, "index", vec![row(0, 1), row(1, 4)]);
        assert_eq!(r.mean_candidates_verified, 2.5);
        assert_eq!(r.mean_scan_candidates_verified, None);
        let empty = RunReport::new(2, "index", vec![]);
        assert_eq!(empty.mean_results, 0.0);
    }

    #[test]
    fn json_line_round_trips() {
        let r = RunReport::new(3, "scan", vec![row(0, 2)]);
        let mut buf = Vec::new();
        r.write_line(&mut buf).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 1);
        let back: RunReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, r);
    }
}
