use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, ReservationKind, MAX_PRODUCTS};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AlphaMode {
    /// Every segment gets `1/m`.
    #[default]
    Equal,
    /// Flat-Dirichlet proportions (normalized unit exponentials).
    Random,
}

/// Synthetic instance distribution. Each field range is a closed uniform support.
#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub u_range: (f64, f64),
    pub c_unit_range: (f64, f64),
    pub c_serve_range: (f64, f64),
    pub alpha_mode: AlphaMode,
    pub reservation: ReservationKind,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            u_range: (0.0, 1.0),
            c_unit_range: (0.0, 0.1),
            c_serve_range: (0.0, 0.05),
            alpha_mode: AlphaMode::Equal,
            reservation: ReservationKind::Sqrt,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        GenConfig {
            seed,
            ..GenConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("u_range", self.u_range),
            ("c_unit_range", self.c_unit_range),
            ("c_serve_range", self.c_serve_range),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
                return Err(Error::Config(format!(
                    "{name} must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        lo + (hi - lo) * rng.gen::<f64>()
    }
}

/// Draws an instance; the result depends only on `(cfg, n, m)`.
pub fn gen_instance(cfg: &GenConfig, n: usize, m: usize) -> Result<Instance> {
    cfg.validate()?;
    if n == 0 || m == 0 {
        return Err(Error::Config(format!(
            "need n >= 1 and m >= 1, got n={n}, m={m}"
        )));
    }
    if n > MAX_PRODUCTS {
        return Err(Error::Config(format!("n={n} exceeds {MAX_PRODUCTS}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let utility: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| draw(&mut rng, cfg.u_range)).collect())
        .collect();
    let unit_cost: Vec<f64> = (0..n).map(|_| draw(&mut rng, cfg.c_unit_range)).collect();
    let serve_cost: Vec<f64> = (0..m).map(|_| draw(&mut rng, cfg.c_serve_range)).collect();
    let alpha = match cfg.alpha_mode {
        AlphaMode::Equal => vec![1.0 / m as f64; m],
        AlphaMode::Random => {
            let raw: Vec<f64> = (0..m).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect()
        }
    };
    Instance::new(alpha, utility, unit_cost, serve_cost, cfg.reservation)
}
