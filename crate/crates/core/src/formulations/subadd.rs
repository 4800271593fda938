//! Price sub-additivity rows over a candidate set.
//!
//! Only disjoint two-way partitions are emitted. Together with price
//! monotonicity they imply sub-additivity over arbitrary K-way covers, so
//! cover rows are never generated.

use std::collections::HashSet;

use super::CandidateSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SubaddMode {
    /// `p[whole] <= p[left] + p[right]` for every disjoint candidate pair
    /// whose union is a candidate.
    #[default]
    Full,
    /// Full partition rows over the pooled set plus `p[b_i] <= p[b_{i+1}]`
    /// along each segment's nested chain.
    PcpChain,
}

/// One sub-additivity row, expressed with candidate positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubaddRow {
    Partition {
        whole: usize,
        left: usize,
        right: usize,
    },
    Monotone {
        lower: usize,
        upper: usize,
    },
}

impl SubaddRow {
    /// Row as `(position, coefficient)` terms of a `<= 0` constraint.
    pub fn terms(self) -> Vec<(usize, f64)> {
        match self {
            SubaddRow::Partition { whole, left, right } => {
                vec![(whole, 1.0), (left, -1.0), (right, -1.0)]
            }
            SubaddRow::Monotone { lower, upper } => vec![(lower, 1.0), (upper, -1.0)],
        }
    }

    pub fn holds(self, prices: &[f64], tol: f64) -> bool {
        self.terms()
            .iter()
            .map(|&(i, a)| a * prices[i])
            .sum::<f64>()
            <= tol
    }
}

pub fn gen_subadditivity(cands: &CandidateSet, mode: SubaddMode) -> Vec<SubaddRow> {
    let bundles = cands.bundles();
    let mut rows = Vec::new();
    for left in 1..bundles.len() {
        for right in (left + 1)..bundles.len() {
            let (a, b) = (bundles[left], bundles[right]);
            if !a.is_disjoint(b) {
                continue;
            }
            if let Some(whole) = cands.position(a.union(b)) {
                rows.push(SubaddRow::Partition { whole, left, right });
            }
        }
    }
    if mode == SubaddMode::PcpChain {
        let mut seen = HashSet::new();
        for chain in cands.chains() {
            for pair in chain.windows(2) {
                let row = SubaddRow::Monotone {
                    lower: pair[0],
                    upper: pair[1],
                };
                if seen.insert(row) {
                    rows.push(row);
                }
            }
        }
    }
    rows
}
