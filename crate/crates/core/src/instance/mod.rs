//! Bundle-pricing problem instances.
//!
//! An instance fixes `n` products and `m` customer segments. Segment `k`
//! values bundle `b` at `R[k][b] = f(sum of u[k][j] over j in b)` and serving
//! it costs `sum of c_unit[j] over j in b` plus the segment's serving cost.
//! Products and segments are 0-based throughout the crate.

mod bundle;
pub(crate) mod format;
mod generate;

pub use bundle::{Bundle, Members, MAX_PRODUCTS};
pub use format::{parse_instance, serialize_instance, INSTANCE_HEADER};
pub use generate::{gen_instance, AlphaMode, GenConfig};

use crate::error::{Error, Result};

/// Concave transform applied to summed utilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReservationKind {
    #[default]
    Sqrt,
    /// Additive valuations; used for tests.
    Identity,
}

impl ReservationKind {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            ReservationKind::Sqrt => x.sqrt(),
            ReservationKind::Identity => x,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ReservationKind::Sqrt => "sqrt",
            ReservationKind::Identity => "identity",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "sqrt" => Some(ReservationKind::Sqrt),
            "identity" => Some(ReservationKind::Identity),
            _ => None,
        }
    }
}

/// Immutable problem data. Construct through [`Instance::new`], which checks
/// dimensions and signs.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    n: usize,
    m: usize,
    alpha: Vec<f64>,
    utility: Vec<Vec<f64>>,
    unit_cost: Vec<f64>,
    serve_cost: Vec<f64>,
    reservation: ReservationKind,
}

impl Instance {
    pub fn new(
        alpha: Vec<f64>,
        utility: Vec<Vec<f64>>,
        unit_cost: Vec<f64>,
        serve_cost: Vec<f64>,
        reservation: ReservationKind,
    ) -> Result<Self> {
        let m = alpha.len();
        let n = unit_cost.len();
        if m == 0 {
            return Err(Error::arg("instance needs at least one segment"));
        }
        if n == 0 {
            return Err(Error::arg("instance needs at least one product"));
        }
        if n > MAX_PRODUCTS {
            return Err(Error::arg(format!(
                "{n} products exceed the supported maximum of {MAX_PRODUCTS}"
            )));
        }
        if utility.len() != m {
            return Err(Error::arg(format!(
                "utility has {} rows, expected {m}",
                utility.len()
            )));
        }
        for (k, row) in utility.iter().enumerate() {
            if row.len() != n {
                return Err(Error::arg(format!(
                    "utility row {k} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        if serve_cost.len() != m {
            return Err(Error::arg(format!(
                "serve cost has {} entries, expected {m}",
                serve_cost.len()
            )));
        }
        let all = alpha
            .iter()
            .chain(utility.iter().flatten())
            .chain(unit_cost.iter())
            .chain(serve_cost.iter());
        for &v in all {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::arg(format!(
                    "instance values must be finite and nonnegative, found {v}"
                )));
            }
        }
        if alpha.iter().sum::<f64>() <= 0.0 {
            return Err(Error::arg("segment proportions must have a positive sum"));
        }
        Ok(Instance {
            n,
            m,
            alpha,
            utility,
            unit_cost,
            serve_cost,
            reservation,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn utility(&self) -> &[Vec<f64>] {
        &self.utility
    }

    pub fn unit_cost(&self) -> &[f64] {
        &self.unit_cost
    }

    pub fn serve_cost(&self) -> &[f64] {
        &self.serve_cost
    }

    pub fn reservation_kind(&self) -> ReservationKind {
        self.reservation
    }

    fn check(&self, k: usize, b: Bundle) -> Result<()> {
        if k >= self.m {
            return Err(Error::arg(format!(
                "segment {k} out of range for {} segments",
                self.m
            )));
        }
        if b.span() > self.n {
            return Err(Error::arg(format!(
                "bundle {b} references products beyond {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Reservation value of segment `k` for bundle `b`.
    pub fn reservation(&self, k: usize, b: Bundle) -> Result<f64> {
        self.check(k, b)?;
        Ok(self.reservation_of(k, b))
    }

    /// Cost of serving bundle `b` to segment `k`. Zero for the empty bundle.
    pub fn bundle_cost(&self, k: usize, b: Bundle) -> Result<f64> {
        self.check(k, b)?;
        Ok(self.cost_of(k, b))
    }

    /// Unchecked variant of [`Instance::reservation`] for hot loops.
    pub(crate) fn reservation_of(&self, k: usize, b: Bundle) -> f64 {
        let row = &self.utility[k];
        let total: f64 = b.iter().map(|j| row[j]).sum();
        self.reservation.apply(total)
    }

    pub(crate) fn cost_of(&self, k: usize, b: Bundle) -> f64 {
        if b.is_empty() {
            return 0.0;
        }
        b.iter().map(|j| self.unit_cost[j]).sum::<f64>() + self.serve_cost[k]
    }
}
