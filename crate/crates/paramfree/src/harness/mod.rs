//! Seeded experiment harness: configuration, runners, CSV reports.
//!
//! Configuration is a flat list of `key=value` pairs ('#' starts a comment)
//! read from a file and/or command-line overrides; there is no nested
//! config language. Every report embeds the library version and the fully
//! resolved configuration (explicit settings plus the defaults actually
//! used), and re-running a subcommand with the same configuration and seed
//! reproduces the report byte for byte: trials are keyed by
//! `(seed, trial index)` counter streams, so parallel and serial execution
//! agree.

mod runners;

pub use runners::{
    run_adaptive, run_concentration, run_lowerbound, run_scaling, run_select,
    run_strong_convexity,
};

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Lowerbound,
    Scaling,
    Concentration,
    Select,
    Adaptive,
    StrongConvexity,
}

impl ExperimentKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "lowerbound" => ExperimentKind::Lowerbound,
            "scaling" => ExperimentKind::Scaling,
            "concentration" => ExperimentKind::Concentration,
            "select" => ExperimentKind::Select,
            "adaptive" => ExperimentKind::Adaptive,
            "strongconvex" => ExperimentKind::StrongConvexity,
            other => return Err(Error::Config(format!("unknown experiment {other:?}"))),
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Lowerbound => "lowerbound",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::Select => "select",
            ExperimentKind::Adaptive => "adaptive",
            ExperimentKind::StrongConvexity => "strongconvex",
        }
    }
}

/// Flat key=value configuration.
#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    map: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new() -> Self {
        ExperimentConfig::default()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = ExperimentConfig::new();
        cfg.merge_lines(&text)?;
        Ok(cfg)
    }

    /// Merge `key=value` lines; later assignments win.
    pub fn merge_lines(&mut self, text: &str) -> Result<()> {
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.merge_pair(line)?;
        }
        Ok(())
    }

    pub fn merge_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {pair:?}")))?;
        self.map.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn experiment(&self) -> Result<ExperimentKind> {
        let name = self
            .get("experiment")
            .ok_or_else(|| Error::Config("missing experiment=<name>".into()))?;
        ExperimentKind::parse(name)
    }
}

/// Config reader that records every value it resolves (explicit or
/// default), so reports can echo the complete effective configuration.
pub(crate) struct Resolver<'a> {
    cfg: &'a ExperimentConfig,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl<'a> Resolver<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Self {
        Resolver { cfg, resolved: RefCell::new(BTreeMap::new()) }
    }

    fn record(&self, key: &str, value: impl ToString) {
        self.resolved.borrow_mut().insert(key.to_string(), value.to_string());
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        let v = self.cfg.get(key).unwrap_or(default).to_string();
        self.record(key, &v);
        v
    }

    pub fn str_required(&self, key: &str) -> Result<String> {
        match self.cfg.get(key) {
            Some(v) => {
                self.record(key, v);
                Ok(v.to_string())
            }
            None => Err(Error::Config(format!("missing required key {key}"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        let v = match self.cfg.get(key) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key} must be a number, got {s:?}")))?,
            None => default,
        };
        self.record(key, v);
        Ok(v)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        let v = match self.cfg.get(key) {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("{key} must be a nonnegative integer, got {s:?}")))?,
            None => default,
        };
        self.record(key, v);
        Ok(v)
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        let v = match self.cfg.get(key) {
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("{key} must be a nonnegative integer, got {s:?}")))?,
            None => default,
        };
        self.record(key, v);
        Ok(v)
    }

    pub fn trials_or(&self, default: usize) -> Result<usize> {
        let t = self.usize_or("trials", default)?;
        if t == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(t)
    }

    pub fn seed(&self) -> Result<u64> {
        self.u64_or("seed", 1)
    }

    pub fn delta(&self) -> Result<f64> {
        let d = self.f64_or("delta", 0.1)?;
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1), got {d}")));
        }
        Ok(d)
    }

    pub fn gamma(&self) -> Result<f64> {
        let g = self.f64_or("gamma", 3.0)?;
        if g < 1.0 {
            return Err(Error::Config(format!("gamma must be at least 1, got {g}")));
        }
        Ok(g)
    }

    /// Single n or comma-separated strictly increasing grid.
    pub fn n_grid(&self, key: &str, default: &str) -> Result<Vec<usize>> {
        let raw = self.str_or(key, default);
        let mut out = Vec::new();
        for part in raw.split(',') {
            let v: usize = part
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{key} entries must be integers, got {part:?}")))?;
            out.push(v);
        }
        if out.is_empty() {
            return Err(Error::Config(format!("{key} must not be empty")));
        }
        if out.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("{key} grid must be strictly increasing: {raw}")));
        }
        Ok(out)
    }

    pub fn finish(self) -> Vec<(String, String)> {
        self.resolved.into_inner().into_iter().collect()
    }
}

/// Shortest-round-trip decimal formatting; reports use it everywhere so
/// that identical runs emit identical bytes.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

/// CSV report: `#`-prefixed metadata (version + resolved config), a header
/// row, one line per record, then `#`-prefixed summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
}

impl ExperimentReport {
    pub fn new(
        meta: Vec<(String, String)>,
        columns: Vec<&str>,
        rows: Vec<Vec<String>>,
        summary: Vec<(String, String)>,
    ) -> Self {
        ExperimentReport {
            meta,
            columns: columns.into_iter().map(|c| c.to_string()).collect(),
            rows,
            summary,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# paramfree={}", crate::VERSION);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            let _ = writeln!(out, "{}", row.join(","));
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# summary.{k}={v}");
        }
        out
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn summary_f64(&self, key: &str) -> Option<f64> {
        self.summary_value(key).and_then(|v| v.parse().ok())
    }
}

/// Dispatch a configuration to its runner.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.experiment()? {
        ExperimentKind::Lowerbound => run_lowerbound(cfg),
        ExperimentKind::Scaling => run_scaling(cfg),
        ExperimentKind::Concentration => run_concentration(cfg),
        ExperimentKind::Select => run_select(cfg),
        ExperimentKind::Adaptive => run_adaptive(cfg),
        ExperimentKind::StrongConvexity => run_strong_convexity(cfg),
    }
}

/// Parse a loss-matrix CSV with header `sample_id,model_0,...,model_K`.
/// Tolerates CRLF line endings, blank lines, and `#` comments.
pub fn parse_loss_csv(text: &str) -> Result<crate::LossMatrix> {
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Config("empty loss CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(|c| c.trim()).collect();
    if cols.len() < 2 || cols[0] != "sample_id" {
        return Err(Error::Config(
            "loss CSV header must be sample_id,model_0,...,model_K".into(),
        ));
    }
    for (i, c) in cols[1..].iter().enumerate() {
        let expect = format!("model_{i}");
        if *c != expect {
            return Err(Error::Config(format!("loss CSV column {i} must be {expect}, got {c}")));
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        let parts: Vec<&str> = line.split(',').map(|c| c.trim()).collect();
        if parts.len() != cols.len() {
            return Err(Error::Config(format!("loss CSV row has {} fields, expected {}", parts.len(), cols.len())));
        }
        let mut row = Vec::with_capacity(parts.len() - 1);
        for p in &parts[1..] {
            row.push(
                p.parse::<f64>()
                    .map_err(|_| Error::Config(format!("loss CSV entry {p:?} is not a number")))?,
            );
        }
        rows.push(row);
    }
    crate::LossMatrix::from_rows(&rows)
}

/// Median of an unsorted slice (mean of the central pair for even lengths).
pub(crate) fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Nearest-rank empirical quantile.
pub(crate) fn quantile(values: &[f64], q: f64) -> f64 {
    debug_assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (q * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

/// Least-squares slope of ln(y) on ln(x) with its standard error.
pub(crate) fn loglog_slope(xs: &[usize], ys: &[f64]) -> (f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    let m = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|&x| (x as f64).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.max(1e-300).ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    if xs.len() <= 2 {
        return (slope, 0.0);
    }
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let fit = my + slope * (x - mx);
            (y - fit) * (y - fit)
        })
        .sum();
    let se = (ssr / (m - 2.0) / sxx).sqrt();
    (slope, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing_and_overrides() {
        let mut cfg = ExperimentConfig::new();
        cfg.merge_lines("# comment\nexperiment=adaptive\nn=100\n\ndelta=0.2\n").unwrap();
        cfg.merge_pair("n=200").unwrap();
        assert_eq!(cfg.experiment().unwrap(), ExperimentKind::Adaptive);
        assert_eq!(cfg.get("n"), Some("200"));
        assert!(cfg.clone().merge_pair("nonsense").is_err());
    }

    #[test]
    fn resolver_validations() {
        let mut cfg = ExperimentConfig::new();
        cfg.set("trials", "0");
        assert!(Resolver::new(&cfg).trials_or(10).is_err());
        let mut cfg = ExperimentConfig::new();
        cfg.set("n", "100,100");
        assert!(Resolver::new(&cfg).n_grid("n", "1").is_err());
        cfg.set("n", "100,200,400");
        assert_eq!(Resolver::new(&cfg).n_grid("n", "1").unwrap(), vec![100, 200, 400]);
        let mut cfg = ExperimentConfig::new();
        cfg.set("delta", "1.5");
        assert!(Resolver::new(&cfg).delta().is_err());
    }

    #[test]
    fn loss_csv_roundtrip() {
        let text = "sample_id,model_0,model_1\n0,0.5,0.25\n1,0.75,1.0\n";
        let m = parse_loss_csv(text).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.k(), 1);
        assert!((m.mean(1) - 0.625).abs() < 1e-15);
        // CRLF endings and comments are tolerated.
        let crlf = "# exported\r\nsample_id,model_0\r\n0,0.5\r\n1,0.75\r\n";
        assert_eq!(parse_loss_csv(crlf).unwrap().n(), 2);
        assert!(parse_loss_csv("bogus,model_0\n0,1\n").is_err());
        assert!(parse_loss_csv("sample_id,model_1\n0,1\n").is_err());
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let ns = [100usize, 200, 400, 800];
        let ys: Vec<f64> = ns.iter().map(|&n| 3.0 / (n as f64).sqrt()).collect();
        let (slope, se) = loglog_slope(&ns, &ys);
        assert!((slope + 0.5).abs() < 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn stats_helpers() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0], 0.9), 9.0);
    }
}
