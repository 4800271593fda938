//! Branch-and-bound over binary variables, plus exact pricing solvers used to
//! validate and to replace it at larger sizes.

mod bnb;
mod oracle;
mod search;

use crate::error::{Error, Result};
use crate::lp::LpModel;

pub use bnb::{solve_milp, solve_milp_with, MilpOptions, MilpStatus, Progress};
pub use oracle::{brute_force_pricing, MAX_ENUMERATED_ASSIGNMENTS};
pub use search::{fixed_assignment_prices, solve_hm_search, SearchOptions};

/// Integrality tolerance on binaries.
pub const INT_TOL: f64 = 1e-6;

/// A linear model with some variables restricted to `{0, 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub lp: LpModel,
    pub binaries: Vec<usize>,
    /// Big-M constants used by the linearization, for diagnostics.
    pub big_m: Vec<(String, f64)>,
}

impl MilpModel {
    pub fn new(lp: LpModel, binaries: Vec<usize>, big_m: Vec<(String, f64)>) -> Result<Self> {
        let model = MilpModel {
            lp,
            binaries,
            big_m,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.lp.validate()?;
        for &j in &self.binaries {
            if j >= self.lp.num_vars() {
                return Err(Error::arg(format!(
                    "binary index {j} out of range for {} variables",
                    self.lp.num_vars()
                )));
            }
            if self.lp.lower[j] < 0.0 || self.lp.upper[j] > 1.0 {
                return Err(Error::arg(format!(
                    "binary `{}` must have bounds within [0, 1]",
                    self.lp.var_names[j]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent values, if one was found.
    pub x: Option<Vec<f64>>,
    /// Incumbent objective; NaN without an incumbent.
    pub objective: f64,
    pub best_bound: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    /// Incumbent and bound after every processed node.
    pub progress: Vec<Progress>,
}

impl MilpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == MilpStatus::Optimal
    }
}
