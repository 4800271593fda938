use super::CandidateSet;
use crate::instance::{Bundle, Instance};

/// Solver bookkeeping attached to a [`PricingSolution`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveMeta {
    pub nodes: usize,
    pub lp_iterations: usize,
    pub lp_solves: usize,
    /// Best proven bound on the objective of the model that produced it.
    pub best_bound: f64,
    pub proven_optimal: bool,
}

/// Prices and segment choices over a candidate set.
///
/// Per-pair quantities are indexed `[segment][candidate]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PricingSolution {
    pub bundles: Vec<Bundle>,
    pub prices: Vec<f64>,
    /// Candidate position chosen by each segment.
    pub assignment: Vec<usize>,
    pub effective_prices: Vec<Vec<f64>>,
    pub surplus: Vec<f64>,
    pub profits: Vec<Vec<f64>>,
    pub objective: f64,
    pub meta: SolveMeta,
}

impl PricingSolution {
    /// Derives every dependent quantity from prices and an assignment.
    /// Prices within rounding noise of zero are snapped to zero and the empty
    /// bundle is always free.
    pub fn from_prices(
        inst: &Instance,
        cands: &CandidateSet,
        prices: &[f64],
        assignment: &[usize],
        meta: SolveMeta,
    ) -> Self {
        let l = cands.len();
        let mut p: Vec<f64> = prices
            .iter()
            .map(|&v| if v.abs() < 1e-12 { 0.0 } else { v })
            .collect();
        p[0] = 0.0;
        let mut effective = vec![vec![0.0; l]; inst.m()];
        let mut profits = vec![vec![0.0; l]; inst.m()];
        let mut surplus = Vec::with_capacity(inst.m());
        let mut objective = 0.0;
        for (k, &b) in assignment.iter().enumerate() {
            let bundle = cands.get(b);
            effective[k][b] = p[b];
            let z = p[b] - inst.cost_of(k, bundle);
            profits[k][b] = z;
            objective += inst.alpha()[k] * z;
            surplus.push(if b == 0 {
                0.0
            } else {
                inst.reservation_of(k, bundle) - p[b]
            });
        }
        PricingSolution {
            bundles: cands.bundles().to_vec(),
            prices: p,
            assignment: assignment.to_vec(),
            effective_prices: effective,
            surplus,
            profits,
            objective,
            meta,
        }
    }

    pub fn assigned_bundle(&self, k: usize) -> Bundle {
        self.bundles[self.assignment[k]]
    }

    pub fn price_of(&self, b: Bundle) -> Option<f64> {
        self.bundles
            .iter()
            .position(|&x| x == b)
            .map(|i| self.prices[i])
    }

    /// Checks nonnegativity, incentive compatibility and individual
    /// rationality within `tol`, returning the first violation found.
    pub fn check(&self, inst: &Instance, tol: f64) -> Result<(), String> {
        if self.assignment.len() != inst.m() {
            return Err(format!(
                "assignment covers {} segments, expected {}",
                self.assignment.len(),
                inst.m()
            ));
        }
        if self.prices[0] != 0.0 || self.bundles[0] != Bundle::EMPTY {
            return Err("empty bundle must be first and free".into());
        }
        if let Some((i, p)) = self.prices.iter().enumerate().find(|(_, &p)| p < -tol) {
            return Err(format!("price of {} is negative: {p}", self.bundles[i]));
        }
        for (k, &b) in self.assignment.iter().enumerate() {
            let s = self.surplus[k];
            if s < -tol {
                return Err(format!("segment {k} has negative surplus {s}"));
            }
            if b == 0 && s != 0.0 {
                return Err(format!("segment {k} buys nothing but has surplus {s}"));
            }
            let chosen = inst.reservation_of(k, self.bundles[b]) - self.prices[b];
            if (chosen - s).abs() > tol {
                return Err(format!("segment {k} surplus {s} differs from {chosen}"));
            }
            for (i, &other) in self.bundles.iter().enumerate() {
                let alt = inst.reservation_of(k, other) - self.prices[i];
                if alt > s + tol {
                    return Err(format!(
                        "segment {k} prefers {other} (surplus {alt}) over its bundle (surplus {s})"
                    ));
                }
            }
        }
        let recomputed: f64 = self
            .assignment
            .iter()
            .enumerate()
            .map(|(k, &b)| inst.alpha()[k] * (self.prices[b] - inst.cost_of(k, self.bundles[b])))
            .sum();
        if (recomputed - self.objective).abs() > tol {
            return Err(format!(
                "objective {} differs from recomputed {recomputed}",
                self.objective
            ));
        }
        Ok(())
    }

    /// Segment-by-product membership matrix of the chosen bundles.
    pub fn membership(&self, n: usize) -> Vec<Vec<u8>> {
        self.assignment
            .iter()
            .map(|&b| (0..n).map(|j| self.bundles[b].contains(j) as u8).collect())
            .collect()
    }
}
