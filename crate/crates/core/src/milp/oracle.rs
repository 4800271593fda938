use crate::error::{Error, Result};
use crate::formulations::{build_fixed_assignment_lp, CandidateSet, PricingSolution, SubaddMode};
use crate::instance::Instance;

/// Enumeration guard for [`brute_force_pricing`].
pub const MAX_ENUMERATED_ASSIGNMENTS: usize = 1_000_000;

/// Solves the fixed-assignment LP for every segment-to-candidate assignment
/// and keeps the best. Among equal objectives the first assignment in
/// lexicographic order wins.
pub fn brute_force_pricing(inst: &Instance, cands: &CandidateSet) -> Result<PricingSolution> {
    let (m, l) = (inst.m(), cands.len());
    let total = (0..m).try_fold(1usize, |acc, _| acc.checked_mul(l));
    let total = match total {
        Some(t) if t <= MAX_ENUMERATED_ASSIGNMENTS => t,
        _ => {
            return Err(Error::Resource(format!(
                "{l}^{m} assignments exceed the enumeration guard of {MAX_ENUMERATED_ASSIGNMENTS}"
            )))
        }
    };
    let mut assignment = vec![0usize; m];
    let mut best: Option<PricingSolution> = None;
    let mut lp_iterations = 0;
    for _ in 0..total {
        let fixed = build_fixed_assignment_lp(inst, cands, &assignment, SubaddMode::Full)?;
        if let Some(sol) = fixed.solve(inst, cands)? {
            lp_iterations += sol.meta.lp_iterations;
            if best
                .as_ref()
                .is_none_or(|b| sol.objective > b.objective + 1e-12)
            {
                best = Some(sol);
            }
        }
        for slot in assignment.iter_mut().rev() {
            *slot += 1;
            if *slot < l {
                break;
            }
            *slot = 0;
        }
    }
    let mut best = best.ok_or_else(|| Error::Solver("no feasible assignment found".into()))?;
    best.meta.lp_solves = total;
    best.meta.lp_iterations = lp_iterations;
    best.meta.best_bound = best.objective;
    best.meta.proven_optimal = true;
    Ok(best)
}
