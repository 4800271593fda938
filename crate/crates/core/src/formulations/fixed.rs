use super::{gen_subadditivity, CandidateSet, PricingSolution, SolveMeta, SubaddMode};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::{solve_lp, LpModel, RowSense, Sense};

/// Pricing LP for a fixed segment-to-bundle assignment. Variables are the
/// candidate prices followed by one surplus per segment.
#[derive(Clone, Debug)]
pub struct FixedAssignmentLp {
    pub lp: LpModel,
    pub assignment: Vec<usize>,
}

/// `assignment[k]` is the candidate position given to segment `k`.
pub fn build_fixed_assignment_lp(
    inst: &Instance,
    cands: &CandidateSet,
    assignment: &[usize],
    mode: SubaddMode,
) -> Result<FixedAssignmentLp> {
    let (m, l) = (inst.m(), cands.len());
    if assignment.len() != m {
        return Err(Error::arg(format!(
            "assignment has {} entries for {m} segments",
            assignment.len()
        )));
    }
    if let Some((k, &b)) = assignment.iter().enumerate().find(|(_, &b)| b >= l) {
        return Err(Error::arg(format!(
            "segment {k} is assigned candidate {b}, but only {l} candidates exist"
        )));
    }
    if cands.span() > inst.n() {
        return Err(Error::arg(
            "candidate bundles reference products outside the instance",
        ));
    }
    let mut lp = LpModel::new(Sense::Maximize);
    for b in 0..l {
        let hi = if b == 0 { 0.0 } else { f64::INFINITY };
        lp.add_var(format!("p[{b}]"), 0.0, hi, 0.0);
    }
    for k in 0..m {
        lp.add_var(format!("s[{k}]"), 0.0, f64::INFINITY, 0.0);
    }
    for (k, &b) in assignment.iter().enumerate() {
        let a = inst.alpha()[k];
        lp.objective[b] += a;
        lp.objective_offset -= a * inst.cost_of(k, cands.get(b));
    }
    for k in 0..m {
        for (i, bundle) in cands.iter() {
            lp.add_row(
                format!("lower[{k},{i}]"),
                vec![(l + k, 1.0), (i, 1.0)],
                RowSense::Ge,
                inst.reservation_of(k, bundle),
            );
        }
    }
    for (k, &b) in assignment.iter().enumerate() {
        lp.add_row(
            format!("bind[{k}]"),
            vec![(l + k, 1.0), (b, 1.0)],
            RowSense::Le,
            inst.reservation_of(k, cands.get(b)),
        );
    }
    for (i, row) in gen_subadditivity(cands, mode).into_iter().enumerate() {
        lp.add_row(format!("subadd[{i}]"), row.terms(), RowSense::Le, 0.0);
    }
    Ok(FixedAssignmentLp {
        lp,
        assignment: assignment.to_vec(),
    })
}

impl FixedAssignmentLp {
    /// Solves the LP; `None` when the assignment admits no supporting prices.
    pub fn solve(&self, inst: &Instance, cands: &CandidateSet) -> Result<Option<PricingSolution>> {
        let sol = solve_lp(&self.lp)?;
        if !sol.is_optimal() {
            return Ok(None);
        }
        let meta = SolveMeta {
            nodes: 0,
            lp_iterations: sol.iterations,
            lp_solves: 1,
            best_bound: sol.objective,
            proven_optimal: true,
        };
        let prices = &sol.x[..cands.len()];
        Ok(Some(PricingSolution::from_prices(
            inst,
            cands,
            prices,
            &self.assignment,
            meta,
        )))
    }
}
