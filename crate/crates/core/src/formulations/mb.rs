use super::{gen_subadditivity, CandidateSet, PricingSolution, SolveMeta, SubaddMode};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::{LpModel, RowSense, Sense};
use crate::milp::{MilpModel, MilpSolution};

/// Variable positions of the mixed-bundling model. Blocks are laid out as
/// `theta`, `p`, `P`, `s`, `Z`, each per-pair block row-major by segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MbLayout {
    pub m: usize,
    pub l: usize,
}

impl MbLayout {
    pub fn theta(&self, k: usize, b: usize) -> usize {
        k * self.l + b
    }

    pub fn price(&self, b: usize) -> usize {
        self.m * self.l + b
    }

    pub fn effective(&self, k: usize, b: usize) -> usize {
        self.m * self.l + self.l + k * self.l + b
    }

    pub fn surplus(&self, k: usize) -> usize {
        2 * self.m * self.l + self.l + k
    }

    pub fn profit(&self, k: usize, b: usize) -> usize {
        2 * self.m * self.l + self.l + self.m + k * self.l + b
    }

    pub fn num_vars(&self) -> usize {
        3 * self.m * self.l + self.l + self.m
    }
}

#[derive(Clone, Debug)]
pub struct MbModel {
    pub milp: MilpModel,
    pub layout: MbLayout,
    pub r_max: f64,
}

pub fn build_mb(inst: &Instance, cands: &CandidateSet) -> Result<MbModel> {
    build_mb_with(inst, cands, SubaddMode::Full)
}

pub fn build_mb_with(inst: &Instance, cands: &CandidateSet, mode: SubaddMode) -> Result<MbModel> {
    if cands.is_empty() {
        return Err(Error::arg("candidate set is empty"));
    }
    if cands.span() > inst.n() {
        return Err(Error::arg(
            "candidate bundles reference products outside the instance",
        ));
    }
    let (m, l) = (inst.m(), cands.len());
    let layout = MbLayout { m, l };
    let reserv: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            cands
                .bundles()
                .iter()
                .map(|&b| inst.reservation_of(k, b))
                .collect()
        })
        .collect();
    let r_max = reserv.iter().flatten().copied().fold(0.0, f64::max);

    let mut lp = LpModel::new(Sense::Maximize);
    for k in 0..m {
        for b in 0..l {
            lp.add_var(format!("theta[{k},{b}]"), 0.0, 1.0, 0.0);
        }
    }
    for b in 0..l {
        let hi = if b == 0 { 0.0 } else { f64::INFINITY };
        lp.add_var(format!("p[{b}]"), 0.0, hi, 0.0);
    }
    for k in 0..m {
        for b in 0..l {
            lp.add_var(format!("P[{k},{b}]"), 0.0, f64::INFINITY, 0.0);
        }
    }
    for k in 0..m {
        lp.add_var(format!("s[{k}]"), 0.0, f64::INFINITY, 0.0);
    }
    for k in 0..m {
        for b in 0..l {
            lp.add_var(
                format!("Z[{k},{b}]"),
                f64::NEG_INFINITY,
                f64::INFINITY,
                inst.alpha()[k],
            );
        }
    }
    debug_assert_eq!(lp.num_vars(), layout.num_vars());

    for k in 0..m {
        let coeffs = (0..l).map(|b| (layout.theta(k, b), 1.0)).collect();
        lp.add_row(format!("choose[{k}]"), coeffs, RowSense::Eq, 1.0);
    }
    for k in 0..m {
        for b in 0..l {
            lp.add_row(
                format!("ic[{k},{b}]"),
                vec![(layout.surplus(k), 1.0), (layout.price(b), 1.0)],
                RowSense::Ge,
                reserv[k][b],
            );
            lp.add_row(
                format!("link_lo[{k},{b}]"),
                vec![
                    (layout.price(b), 1.0),
                    (layout.theta(k, b), r_max),
                    (layout.effective(k, b), -1.0),
                ],
                RowSense::Le,
                r_max,
            );
            lp.add_row(
                format!("link_hi[{k},{b}]"),
                vec![(layout.effective(k, b), 1.0), (layout.price(b), -1.0)],
                RowSense::Le,
                0.0,
            );
        }
    }
    for k in 0..m {
        let mut coeffs = vec![(layout.surplus(k), 1.0)];
        for b in 0..l {
            coeffs.push((layout.theta(k, b), -reserv[k][b]));
            coeffs.push((layout.effective(k, b), 1.0));
        }
        lp.add_row(format!("surplus[{k}]"), coeffs, RowSense::Eq, 0.0);
    }
    for k in 0..m {
        for b in 0..l {
            lp.add_row(
                format!("ir[{k},{b}]"),
                vec![
                    (layout.theta(k, b), reserv[k][b]),
                    (layout.effective(k, b), -1.0),
                ],
                RowSense::Ge,
                0.0,
            );
        }
    }
    for k in 0..m {
        for j in (0..m).filter(|&j| j != k) {
            let mut coeffs = vec![(layout.surplus(k), 1.0)];
            for b in 0..l {
                coeffs.push((layout.theta(j, b), -reserv[k][b]));
                coeffs.push((layout.effective(j, b), 1.0));
            }
            lp.add_row(format!("envy[{k},{j}]"), coeffs, RowSense::Ge, 0.0);
        }
    }
    for k in 0..m {
        for b in 0..l {
            let cost = inst.cost_of(k, cands.get(b));
            lp.add_row(
                format!("profit[{k},{b}]"),
                vec![
                    (layout.profit(k, b), 1.0),
                    (layout.effective(k, b), -1.0),
                    (layout.theta(k, b), cost),
                ],
                RowSense::Eq,
                0.0,
            );
        }
    }
    for (i, row) in gen_subadditivity(cands, mode).into_iter().enumerate() {
        let coeffs = row
            .terms()
            .into_iter()
            .map(|(b, a)| (layout.price(b), a))
            .collect();
        lp.add_row(format!("subadd[{i}]"), coeffs, RowSense::Le, 0.0);
    }

    let binaries = (0..m * l).collect();
    let milp = MilpModel::new(lp, binaries, vec![("R_max".to_string(), r_max)])?;
    Ok(MbModel {
        milp,
        layout,
        r_max,
    })
}

impl MbModel {
    /// Reads prices and the assignment out of a solved model. Binaries are
    /// rounded to the nearest integer.
    pub fn extract(
        &self,
        inst: &Instance,
        cands: &CandidateSet,
        sol: &MilpSolution,
    ) -> Result<PricingSolution> {
        let x = sol
            .x
            .as_ref()
            .ok_or_else(|| Error::Solver("no incumbent to extract".into()))?;
        let lay = self.layout;
        let assignment: Vec<usize> = (0..lay.m)
            .map(|k| {
                (0..lay.l)
                    .max_by(|&a, &b| {
                        x[lay.theta(k, a)]
                            .total_cmp(&x[lay.theta(k, b)])
                            .then(b.cmp(&a))
                    })
                    .unwrap_or(0)
            })
            .collect();
        let prices: Vec<f64> = (0..lay.l).map(|b| x[lay.price(b)].max(0.0)).collect();
        let meta = SolveMeta {
            nodes: sol.nodes,
            lp_iterations: sol.lp_iterations,
            lp_solves: sol.nodes,
            best_bound: sol.best_bound,
            proven_optimal: sol.is_optimal(),
        };
        Ok(PricingSolution::from_prices(
            inst,
            cands,
            &prices,
            &assignment,
            meta,
        ))
    }
}
