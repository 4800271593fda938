use super::{CandidateSet, PricingSolution, SolveMeta};
use crate::error::{Error, Result};
use crate::instance::{Bundle, Instance};
use crate::lp::{LpModel, RowSense, Sense};
use crate::milp::{MilpModel, MilpSolution};

/// Bundle-size pricing model. Size `s` runs over `0..=n`; variables are laid
/// out as `theta`, `p`, `P`, `s`, `Z` like the mixed-bundling model.
#[derive(Clone, Debug)]
pub struct BspModel {
    pub milp: MilpModel,
    /// Bundle that realizes each segment's size-`s` valuation.
    pub best_bundle: Vec<Vec<Bundle>>,
    pub valuation: Vec<Vec<f64>>,
    pub cost: Vec<Vec<f64>>,
    pub big_m: f64,
    n: usize,
    m: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BspSolution {
    pub size_prices: Vec<f64>,
    /// Chosen size per segment.
    pub sizes: Vec<usize>,
    pub bundles: Vec<Bundle>,
    pub objective: f64,
    pub meta: SolveMeta,
}

/// Segment `k`'s most valued bundle of every size: products by descending
/// utility, cheaper first on equal utility, then lower index.
fn size_prefixes(inst: &Instance, k: usize) -> Vec<Bundle> {
    let u = &inst.utility()[k];
    let c = inst.unit_cost();
    let mut order: Vec<usize> = (0..inst.n()).collect();
    order.sort_by(|&a, &b| {
        u[b].total_cmp(&u[a])
            .then(c[a].total_cmp(&c[b]))
            .then(a.cmp(&b))
    });
    let mut out = vec![Bundle::EMPTY];
    let mut cur = Bundle::EMPTY;
    for j in order {
        cur = cur.with(j);
        out.push(cur);
    }
    out
}

pub fn build_bsp(inst: &Instance) -> Result<BspModel> {
    let (n, m) = (inst.n(), inst.m());
    let sizes = n + 1;
    let best_bundle: Vec<Vec<Bundle>> = (0..m).map(|k| size_prefixes(inst, k)).collect();
    let valuation: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            best_bundle[k]
                .iter()
                .map(|&b| inst.reservation_of(k, b))
                .collect()
        })
        .collect();
    let cost: Vec<Vec<f64>> = (0..m)
        .map(|k| best_bundle[k].iter().map(|&b| inst.cost_of(k, b)).collect())
        .collect();
    let big_m = valuation.iter().flatten().copied().fold(0.0, f64::max);

    let theta = |k: usize, s: usize| k * sizes + s;
    let price = |s: usize| m * sizes + s;
    let eff = |k: usize, s: usize| m * sizes + sizes + k * sizes + s;
    let surplus = |k: usize| 2 * m * sizes + sizes + k;
    let profit = |k: usize, s: usize| 2 * m * sizes + sizes + m + k * sizes + s;

    let mut lp = LpModel::new(Sense::Maximize);
    for k in 0..m {
        for s in 0..sizes {
            lp.add_var(format!("theta[{k},{s}]"), 0.0, 1.0, 0.0);
        }
    }
    for s in 0..sizes {
        let hi = if s == 0 { 0.0 } else { f64::INFINITY };
        lp.add_var(format!("p[{s}]"), 0.0, hi, 0.0);
    }
    for k in 0..m {
        for s in 0..sizes {
            lp.add_var(format!("P[{k},{s}]"), 0.0, f64::INFINITY, 0.0);
        }
    }
    for k in 0..m {
        lp.add_var(format!("s[{k}]"), f64::NEG_INFINITY, f64::INFINITY, 0.0);
    }
    for k in 0..m {
        for s in 0..sizes {
            lp.add_var(format!("Z[{k},{s}]"), 0.0, f64::INFINITY, inst.alpha()[k]);
        }
    }

    for k in 0..m {
        for s in 0..sizes {
            lp.add_row(
                format!("ic[{k},{s}]"),
                vec![(surplus(k), 1.0), (price(s), 1.0)],
                RowSense::Ge,
                valuation[k][s],
            );
        }
    }
    for k in 0..m {
        let coeffs = (0..sizes).map(|s| (theta(k, s), 1.0)).collect();
        lp.add_row(format!("choose[{k}]"), coeffs, RowSense::Eq, 1.0);
    }
    for k in 0..m {
        for s in 0..sizes {
            lp.add_row(
                format!("link_hi[{k},{s}]"),
                vec![(eff(k, s), 1.0), (price(s), -1.0)],
                RowSense::Le,
                0.0,
            );
            lp.add_row(
                format!("link_lo[{k},{s}]"),
                vec![(eff(k, s), 1.0), (price(s), -1.0), (theta(k, s), -big_m)],
                RowSense::Ge,
                -big_m,
            );
            lp.add_row(
                format!("profit[{k},{s}]"),
                vec![
                    (profit(k, s), 1.0),
                    (eff(k, s), -1.0),
                    (theta(k, s), cost[k][s]),
                ],
                RowSense::Eq,
                0.0,
            );
        }
    }
    for k in 0..m {
        let mut coeffs = vec![(surplus(k), 1.0)];
        for s in 0..sizes {
            coeffs.push((theta(k, s), -valuation[k][s]));
            coeffs.push((eff(k, s), 1.0));
        }
        lp.add_row(format!("surplus[{k}]"), coeffs, RowSense::Eq, 0.0);
    }
    for k in 0..m {
        for j in (0..m).filter(|&j| j != k) {
            let mut coeffs = vec![(surplus(k), 1.0)];
            for s in 0..sizes {
                coeffs.push((theta(j, s), -valuation[k][s]));
                coeffs.push((eff(j, s), 1.0));
            }
            lp.add_row(format!("envy[{k},{j}]"), coeffs, RowSense::Ge, 0.0);
        }
    }
    for k in 0..m {
        for s in 0..sizes {
            lp.add_row(
                format!("ir[{k},{s}]"),
                vec![(theta(k, s), valuation[k][s]), (eff(k, s), -1.0)],
                RowSense::Ge,
                0.0,
            );
        }
    }
    for s1 in 1..sizes {
        for s2 in s1..sizes {
            if s1 + s2 > n {
                break;
            }
            let coeffs = if s1 == s2 {
                vec![(price(s1 + s2), 1.0), (price(s1), -2.0)]
            } else {
                vec![(price(s1 + s2), 1.0), (price(s1), -1.0), (price(s2), -1.0)]
            };
            lp.add_row(format!("subadd[{s1},{s2}]"), coeffs, RowSense::Le, 0.0);
        }
    }
    for s in 0..n {
        lp.add_row(
            format!("mono[{s}]"),
            vec![(price(s + 1), 1.0), (price(s), -1.0)],
            RowSense::Ge,
            0.0,
        );
    }

    let binaries = (0..m * sizes).collect();
    let milp = MilpModel::new(lp, binaries, vec![("M".to_string(), big_m)])?;
    Ok(BspModel {
        milp,
        best_bundle,
        valuation,
        cost,
        big_m,
        n,
        m,
    })
}

impl BspModel {
    pub fn extract(&self, sol: &MilpSolution) -> Result<BspSolution> {
        let x = sol
            .x
            .as_ref()
            .ok_or_else(|| Error::Solver("no incumbent to extract".into()))?;
        let sizes = self.n + 1;
        let chosen: Vec<usize> = (0..self.m)
            .map(|k| {
                (0..sizes)
                    .max_by(|&a, &b| {
                        x[k * sizes + a]
                            .total_cmp(&x[k * sizes + b])
                            .then(b.cmp(&a))
                    })
                    .unwrap_or(0)
            })
            .collect();
        let size_prices: Vec<f64> = (0..sizes)
            .map(|s| {
                if s == 0 {
                    0.0
                } else {
                    x[self.m * sizes + s].max(0.0)
                }
            })
            .collect();
        let bundles = chosen
            .iter()
            .enumerate()
            .map(|(k, &s)| self.best_bundle[k][s])
            .collect();
        Ok(BspSolution {
            objective: sol.objective,
            size_prices,
            sizes: chosen,
            bundles,
            meta: SolveMeta {
                nodes: sol.nodes,
                lp_iterations: sol.lp_iterations,
                lp_solves: sol.nodes,
                best_bound: sol.best_bound,
                proven_optimal: sol.is_optimal(),
            },
        })
    }
}

impl BspSolution {
    /// Expands size prices to one price per bundle over the candidate set.
    pub fn to_pricing(&self, inst: &Instance, cands: &CandidateSet) -> Result<PricingSolution> {
        let prices: Vec<f64> = cands
            .iter()
            .map(|(_, b)| self.size_prices[b.len()])
            .collect();
        let assignment = self
            .bundles
            .iter()
            .map(|&b| {
                cands
                    .position(b)
                    .ok_or_else(|| Error::arg(format!("bundle {b} missing from candidates")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PricingSolution::from_prices(
            inst,
            cands,
            &prices,
            &assignment,
            self.meta.clone(),
        ))
    }
}
