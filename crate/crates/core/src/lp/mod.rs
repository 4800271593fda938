//! Dense two-phase simplex for small linear programs.
//!
//! Models are stored row-wise with sparse coefficient lists; the solver
//! expands them into a dense bounded-variable tableau.

mod simplex;

use std::fmt::Write;

use crate::error::{Error, Result};

pub use simplex::PivotRule;

/// Primal feasibility tolerance.
pub const TAU_FEAS: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const TAU_OPT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl RowSense {
    fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: String,
    /// `(variable index, coefficient)` pairs; indices must be distinct.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A linear program `opt c.x + offset` subject to rows and variable bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub var_names: Vec<String>,
    pub rows: Vec<Row>,
}

impl LpModel {
    pub fn new(sense: Sense) -> Self {
        LpModel {
            sense,
            objective: Vec::new(),
            objective_offset: 0.0,
            lower: Vec::new(),
            upper: Vec::new(),
            var_names: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a variable with bounds `[lower, upper]` and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.var_names.push(name.into());
        self.objective.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> usize {
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x));
        let bounds = x
            .iter()
            .enumerate()
            .map(|(j, &v)| (self.lower[j] - v).max(v - self.upper[j]).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n || self.var_names.len() != n {
            return Err(Error::arg("variable arrays have inconsistent lengths"));
        }
        if !self.objective_offset.is_finite() {
            return Err(Error::arg("objective offset must be finite"));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(Error::arg(format!(
                    "objective coefficient of `{}` is not finite",
                    self.var_names[j]
                )));
            }
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::arg(format!(
                    "invalid bounds [{lo}, {hi}] on `{}`",
                    self.var_names[j]
                )));
            }
            if lo > hi {
                return Err(Error::arg(format!(
                    "lower bound {lo} exceeds upper bound {hi} on `{}`",
                    self.var_names[j]
                )));
            }
        }
        for row in &self.rows {
            if !row.rhs.is_finite() {
                return Err(Error::arg(format!(
                    "row `{}` has a non-finite rhs",
                    row.name
                )));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(Error::arg(format!(
                        "row `{}` references variable {j} of {n}",
                        row.name
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::arg(format!(
                        "row `{}` has a non-finite coefficient",
                        row.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Human-readable listing, one constraint per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let verb = match self.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        let terms = |coeffs: &mut dyn Iterator<Item = (usize, f64)>| {
            let parts: Vec<String> = coeffs
                .filter(|&(_, a)| a != 0.0)
                .map(|(j, a)| format!("{a:+} {}", self.var_names[j]))
                .collect();
            if parts.is_empty() {
                "0".to_string()
            } else {
                parts.join(" ")
            }
        };
        let mut obj = self.objective.iter().copied().enumerate();
        writeln!(
            out,
            "{verb} {} {:+}",
            terms(&mut obj),
            self.objective_offset
        )
        .unwrap();
        for row in &self.rows {
            let mut it = row.coeffs.iter().copied();
            writeln!(
                out,
                "{}: {} {} {}",
                row.name,
                terms(&mut it),
                row.sense.symbol(),
                row.rhs
            )
            .unwrap();
        }
        for j in 0..self.num_vars() {
            if self.lower[j] != 0.0 || self.upper[j] != f64::INFINITY {
                writeln!(
                    out,
                    "bound: {} <= {} <= {}",
                    self.lower[j], self.var_names[j], self.upper[j]
                )
                .unwrap();
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values; empty unless optimal.
    pub x: Vec<f64>,
    /// Objective including the model offset; NaN unless optimal.
    pub objective: f64,
    /// Row duals in the model's own objective sense; empty unless optimal.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LpOptions {
    pub pivot_rule: PivotRule,
    /// Pivot budget; `None` means `50 * (vars + rows)`.
    pub iteration_limit: Option<usize>,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            pivot_rule: PivotRule::Bland,
            iteration_limit: None,
        }
    }
}

pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    solve_lp_with(model, &LpOptions::default())
}

pub fn solve_lp_with(model: &LpModel, options: &LpOptions) -> Result<LpSolution> {
    model.validate()?;
    simplex::solve(model, options)
}

#[cfg(test)]
mod tests;
