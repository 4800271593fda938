//! Benchmark driver: dataset labeling and method comparison reports.

mod label;

pub use label::{load_labeled_dir, run_label_pipeline, LabelDataset, MAX_LABEL_M, MAX_LABEL_N};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulations::{build_bsp, CandidateSet, SubaddMode};
use crate::gcn::{build_graph, predict_probs, GcnParams};
use crate::instance::{gen_instance, parse_instance, GenConfig, Instance};
use crate::milp::solve_milp;
use crate::strategies::{
    fcp, local_search, pcp, solve_with_candidates_opts, SolveOptions, Termination,
    DEFAULT_MAX_ITER, DEFAULT_NODE_LIMIT,
};

pub const CSV_COLUMNS: [&str; 7] = [
    "instance_id",
    "method",
    "revenue",
    "time_s",
    "n_candidates",
    "rr_vs_baseline",
    "tr_vs_baseline",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mb,
    Bsp,
    Fcp,
    Pcp,
    FcpLs,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Mb,
        Method::Bsp,
        Method::Fcp,
        Method::Pcp,
        Method::FcpLs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mb => "mb",
            Method::Bsp => "bsp",
            Method::Fcp => "fcp",
            Method::Pcp => "pcp",
            Method::FcpLs => "fcp-ls",
        }
    }

    pub fn needs_model(self) -> bool {
        matches!(self, Method::Fcp | Method::Pcp | Method::FcpLs)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown method `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Instance `i` is drawn with seed `seed + i`.
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub instances: usize,
    pub methods: Vec<Method>,
    pub baseline: Method,
    pub model: Option<PathBuf>,
    /// Read instance documents from this directory instead of generating them.
    pub instance_dir: Option<PathBuf>,
    pub max_iter: usize,
    pub node_limit: usize,
    pub abs_gap: f64,
    /// Wall-clock columns are left empty when false, which makes reports
    /// byte-identical across runs.
    pub record_time: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            seed: 0,
            n: 6,
            m: 4,
            instances: 30,
            methods: vec![Method::Mb, Method::Fcp],
            baseline: Method::Mb,
            model: None,
            instance_dir: None,
            max_iter: DEFAULT_MAX_ITER,
            node_limit: DEFAULT_NODE_LIMIT,
            abs_gap: 1e-6,
            record_time: true,
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: BenchConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are representable in TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        if !self.methods.contains(&self.baseline) {
            return Err(Error::Config(format!(
                "baseline `{}` is not among the requested methods",
                self.baseline
            )));
        }
        if self.instance_dir.is_none() && (self.n == 0 || self.m == 0 || self.instances == 0) {
            return Err(Error::Config("n, m and instances must be positive".into()));
        }
        if self.methods.iter().any(|m| m.needs_model()) && self.model.is_none() {
            return Err(Error::Config("GCN methods need a `model` path".into()));
        }
        if !(self.abs_gap >= 0.0) {
            return Err(Error::Config("abs_gap must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Accepted local-search revenues of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSearchSummary {
    pub initial_revenue: Option<f64>,
    pub accepted: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance_id: usize,
    pub method: Method,
    pub revenue: f64,
    pub time_s: Option<f64>,
    pub n_candidates: usize,
    pub rr: Option<f64>,
    pub tr: Option<f64>,
    pub proven_optimal: bool,
    pub local_search: Option<LocalSearchSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub method: Method,
    pub count: usize,
    /// Mean and standard error of revenue, time, candidate count, RR and TR.
    pub mean: [Option<f64>; 5],
    pub stderr: [Option<f64>; 5],
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    /// Sorted by instance, then by method in request order.
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<Aggregate>,
}

fn mean_stderr(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), Some(0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BenchReport {
    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn aggregate(&self, method: Method) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.method == method)
    }

    /// Raw rows followed by `mean` and `stderr` rows per method.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).unwrap();
        for r in &self.rows {
            w.write_record([
                r.instance_id.to_string(),
                r.method.to_string(),
                r.revenue.to_string(),
                cell(r.time_s),
                r.n_candidates.to_string(),
                cell(r.rr),
                cell(r.tr),
            ])
            .unwrap();
        }
        for a in &self.aggregates {
            for (label, stats) in [("mean", &a.mean), ("stderr", &a.stderr)] {
                let mut record = vec![label.to_string(), a.method.to_string()];
                record.extend(stats.iter().map(|&v| cell(v)));
                w.write_record(&record).unwrap();
            }
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text)
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, crate::instance::serialize_instance(inst)).map_err(|e| Error::io(path, e))
}

/// Instance documents (`*.txt`) in `dir`, by file name.
fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "txt") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no instance documents"),
        ));
    }
    Ok(files)
}

fn bench_instances(cfg: &BenchConfig) -> Result<Vec<Instance>> {
    match &cfg.instance_dir {
        Some(dir) => instance_files(dir)?
            .iter()
            .map(|p| load_instance(p))
            .collect(),
        None => (0..cfg.instances as u64)
            .map(|i| gen_instance(&GenConfig::with_seed(cfg.seed + i), cfg.n, cfg.m))
            .collect(),
    }
}

struct Outcome {
    revenue: f64,
    n_candidates: usize,
    proven_optimal: bool,
    local_search: Option<LocalSearchSummary>,
}

fn run_method(
    method: Method,
    inst: &Instance,
    params: Option<&GcnParams>,
    cfg: &BenchConfig,
) -> Result<Outcome> {
    let opts = SolveOptions {
        abs_gap: cfg.abs_gap,
        node_limit: cfg.node_limit,
        ..SolveOptions::default()
    };
    let probs = || -> Result<_> {
        let params = params.ok_or_else(|| Error::Config("GCN methods need a model".into()))?;
        predict_probs(params, &build_graph(inst))
    };
    let solved = |cands: &CandidateSet, mode: SubaddMode| -> Result<Outcome> {
        let sol = solve_with_candidates_opts(inst, cands, mode, &opts)?;
        Ok(Outcome {
            revenue: sol.objective,
            n_candidates: cands.len(),
            proven_optimal: sol.meta.proven_optimal,
            local_search: None,
        })
    };
    match method {
        Method::Mb => solved(&CandidateSet::full(inst.n()), SubaddMode::Full),
        Method::Bsp => {
            let model = build_bsp(inst)?;
            let sol = model.extract(&solve_milp(&model.milp, cfg.abs_gap, cfg.node_limit)?)?;
            Ok(Outcome {
                revenue: sol.objective,
                n_candidates: inst.n() + 1,
                proven_optimal: sol.meta.proven_optimal,
                local_search: None,
            })
        }
        Method::Fcp => solved(&fcp(&probs()?), SubaddMode::Full),
        Method::Pcp => solved(&pcp(&probs()?), SubaddMode::PcpChain),
        Method::FcpLs => {
            let probs = probs()?;
            let res = local_search(inst, &probs, &fcp(&probs), cfg.max_iter)?;
            Ok(Outcome {
                revenue: res.solution.objective,
                n_candidates: res.state.pool.len(),
                proven_optimal: res.solution.meta.proven_optimal,
                local_search: Some(LocalSearchSummary {
                    initial_revenue: res.initial_revenue,
                    accepted: res.state.moves.iter().map(|m| m.revenue).collect(),
                    iterations: res.state.iterations,
                    termination: res.termination,
                }),
            })
        }
    }
}

fn ratio(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    }
}

/// Runs every requested method on every instance. Timing covers prediction
/// and solving but not model loading.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let params = match (&cfg.model, cfg.methods.iter().any(|m| m.needs_model())) {
        (Some(path), true) => Some(GcnParams::load(path)?),
        _ => None,
    };
    let instances = bench_instances(cfg)?;
    let mut rows = Vec::with_capacity(instances.len() * cfg.methods.len());
    for (id, inst) in instances.iter().enumerate() {
        let mut batch = Vec::with_capacity(cfg.methods.len());
        for &method in &cfg.methods {
            let start = Instant::now();
            let out = run_method(method, inst, params.as_ref(), cfg)?;
            let elapsed = start.elapsed().as_secs_f64();
            batch.push(BenchRow {
                instance_id: id,
                method,
                revenue: out.revenue,
                time_s: cfg.record_time.then_some(elapsed),
                n_candidates: out.n_candidates,
                rr: None,
                tr: None,
                proven_optimal: out.proven_optimal,
                local_search: out.local_search,
            });
        }
        let base = batch
            .iter()
            .find(|r| r.method == cfg.baseline)
            .map(|r| (r.revenue, r.time_s))
            .expect("baseline is a requested method");
        for row in &mut batch {
            row.rr = ratio(Some(row.revenue), Some(base.0));
            row.tr = ratio(row.time_s, base.1);
        }
        rows.extend(batch);
    }
    let aggregates = cfg
        .methods
        .iter()
        .map(|&method| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.method == method).collect();
            let columns: [Vec<f64>; 5] = [
                mine.iter().map(|r| r.revenue).collect(),
                mine.iter().filter_map(|r| r.time_s).collect(),
                mine.iter().map(|r| r.n_candidates as f64).collect(),
                mine.iter().filter_map(|r| r.rr).collect(),
                mine.iter().filter_map(|r| r.tr).collect(),
            ];
            let stats = columns.map(|c| mean_stderr(&c));
            Aggregate {
                method,
                count: mine.len(),
                mean: stats.map(|s| s.0),
                stderr: stats.map(|s| s.1),
            }
        })
        .collect();
    Ok(BenchReport {
        config: cfg.clone(),
        rows,
        aggregates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("gurobi".parse::<Method>().is_err());
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = BenchConfig::from_toml("methods = [\"mb\", \"bsp\"]\nn = 3").unwrap();
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.m, 4);
        assert_eq!(BenchConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert!(BenchConfig::from_toml("methods = [\"fcp\"]\nbaseline = \"fcp\"").is_err());
        assert!(BenchConfig::from_toml("methods = [\"bsp\"]").is_err());
        assert!(BenchConfig::from_toml("colour = 3").is_err());
    }

    #[test]
    fn standard_error() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert_eq!(m, Some(2.0));
        assert!((s.unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_stderr(&[]), (None, None));
    }
}
