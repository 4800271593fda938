use std::fmt::Write;

use super::{build_graph, GraphData};
use crate::error::{Error, Result};
use crate::formulations::PricingSolution;
use crate::instance::format::{fmt_row, parse_row};
use crate::instance::Instance;

pub const PROBS_HEADER: &str = "bundle-probs v1";
pub const LABELS_HEADER: &str = "bundle-labels v1";

/// Segment-by-product purchase probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMatrix {
    values: Vec<Vec<f64>>,
}

impl ProbMatrix {
    /// Rows are segments. Every entry must lie strictly inside `(0, 1)`.
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.first().map_or(0, Vec::len);
        if values.is_empty() || n == 0 {
            return Err(Error::arg("probability matrix must be nonempty"));
        }
        if values.iter().any(|r| r.len() != n) {
            return Err(Error::arg("probability rows differ in length"));
        }
        if let Some(v) = values.iter().flatten().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::arg(format!("probability {v} is outside (0, 1)")));
        }
        Ok(ProbMatrix { values })
    }

    pub(crate) fn from_rows_unchecked(values: Vec<Vec<f64>>) -> Self {
        ProbMatrix { values }
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.values[0].len()
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k][j]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{PROBS_HEADER}").unwrap();
        writeln!(out, "m = {}", self.m()).unwrap();
        writeln!(out, "n = {}", self.n()).unwrap();
        for (k, row) in self.values.iter().enumerate() {
            writeln!(out, "P[{k}] = {}", fmt_row(row)).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines
            .next()
            .ok_or_else(|| Error::parse(0, "empty document"))?;
        if header != PROBS_HEADER {
            return Err(Error::parse(
                line,
                format!("expected header `{PROBS_HEADER}`"),
            ));
        }
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (line, text) = lines
                .next()
                .ok_or_else(|| Error::parse(0, format!("missing `{key}`")))?;
            let (k, v) = text
                .split_once('=')
                .ok_or_else(|| Error::parse(line, format!("expected `{key} = ...`")))?;
            if k.trim() != key {
                return Err(Error::parse(
                    line,
                    format!("expected `{key}`, found `{}`", k.trim()),
                ));
            }
            Ok((line, v.trim().to_string()))
        };
        let dim = |line: usize, v: &str| {
            v.parse::<usize>()
                .ok()
                .filter(|&d| d > 0)
                .ok_or_else(|| Error::parse(line, "expected a positive integer"))
        };
        let (line, v) = field("m")?;
        let m = dim(line, &v)?;
        let (line, v) = field("n")?;
        let n = dim(line, &v)?;
        let mut values = Vec::with_capacity(m);
        for k in 0..m {
            let (line, v) = field(&format!("P[{k}]"))?;
            let row = parse_row(line, &v)?;
            if row.len() != n {
                return Err(Error::parse(
                    line,
                    format!("expected {n} values, found {}", row.len()),
                ));
            }
            values.push(row);
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::parse(line, "trailing content"));
        }
        ProbMatrix::new(values)
    }
}

/// A graph with its optimal-membership targets `target[k][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledExample {
    pub graph: GraphData,
    pub target: Vec<Vec<u8>>,
}

impl LabeledExample {
    pub fn new(graph: GraphData, target: Vec<Vec<u8>>) -> Result<Self> {
        if target.len() != graph.m || target.iter().any(|r| r.len() != graph.n) {
            return Err(Error::arg("target dimensions do not match the graph"));
        }
        if target.iter().flatten().any(|&t| t > 1) {
            return Err(Error::arg("targets must be 0 or 1"));
        }
        Ok(LabeledExample { graph, target })
    }
}

/// Membership of each product in the bundle each segment buys at `sol`.
pub fn make_labels(inst: &Instance, sol: &PricingSolution) -> Result<LabeledExample> {
    if sol.assignment.len() != inst.m() {
        return Err(Error::arg(format!(
            "solution assigns {} segments, instance has {}",
            sol.assignment.len(),
            inst.m()
        )));
    }
    if sol.assignment.iter().any(|&b| b >= sol.bundles.len())
        || sol.bundles.iter().any(|b| b.span() > inst.n())
    {
        return Err(Error::arg("solution bundles do not fit the instance"));
    }
    LabeledExample::new(build_graph(inst), sol.membership(inst.n()))
}

/// Target document: the header, `m`, `n`, then one `T[k] = ...` row of 0/1
/// entries per segment.
pub fn serialize_targets(target: &[Vec<u8>]) -> String {
    let mut out = String::new();
    writeln!(out, "{LABELS_HEADER}").unwrap();
    writeln!(out, "m = {}", target.len()).unwrap();
    writeln!(out, "n = {}", target.first().map_or(0, Vec::len)).unwrap();
    for (k, row) in target.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(u8::to_string).collect();
        writeln!(out, "T[{k}] = {}", cells.join(" ")).unwrap();
    }
    out
}

pub fn parse_targets(text: &str) -> Result<Vec<Vec<u8>>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "empty document"))?;
    if header != LABELS_HEADER {
        return Err(Error::parse(
            line,
            format!("expected header `{LABELS_HEADER}`"),
        ));
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (line, text) = lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("missing `{key}`")))?;
        match text.split_once('=') {
            Some((k, v)) if k.trim() == key => Ok((line, v.trim().to_string())),
            _ => Err(Error::parse(line, format!("expected `{key} = ...`"))),
        }
    };
    let dim = |(line, v): (usize, String)| {
        v.parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::parse(line, "expected a positive integer"))
    };
    let m = dim(field("m")?)?;
    let n = dim(field("n")?)?;
    let mut target = Vec::with_capacity(m);
    for k in 0..m {
        let (line, v) = field(&format!("T[{k}]"))?;
        let row = v
            .split_whitespace()
            .map(|tok| match tok {
                "0" => Ok(0),
                "1" => Ok(1),
                _ => Err(Error::parse(line, format!("label `{tok}` is not 0 or 1"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        if row.len() != n {
            return Err(Error::parse(
                line,
                format!("expected {n} labels, found {}", row.len()),
            ));
        }
        target.push(row);
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::parse(line, "trailing content"));
    }
    Ok(target)
}
