use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{eval_loss, loss_and_grad_parts, BatchPart, Mode};
use super::{GcnParams, LabeledExample, DEFAULT_HIDDEN};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Edges per gradient step.
    pub batch_size: usize,
    pub dropout: f64,
    pub patience: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub validation_fraction: f64,
    pub d_hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 500,
            batch_size: 512,
            dropout: 0.5,
            patience: 50,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            validation_fraction: 0.2,
            d_hidden: DEFAULT_HIDDEN,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and nonnegative");
        }
        if self.batch_size == 0 || self.d_hidden == 0 {
            return bad("batch size and hidden width must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam decays must lie in [0, 1)");
        }
        if !(self.adam_eps > 0.0) {
            return bad("Adam epsilon must be positive");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation fraction must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    /// Parameters with the lowest validation loss seen.
    pub params: GcnParams,
    pub initial_val_loss: f64,
    pub best_val_loss: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    /// `(mean training batch loss, validation loss)` per epoch.
    pub history: Vec<(f64, f64)>,
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
}

struct Adam {
    m: GcnParams,
    v: GcnParams,
    t: i32,
}

impl Adam {
    fn step(&mut self, params: &mut GcnParams, grad: &GcnParams, cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(grad.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut());
        for (((p, g), m), v) in tensors {
            for i in 0..p.data.len() {
                let gi = g.data[i];
                m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * gi;
                v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * gi * gi;
                let mhat = m.data[i] / c1;
                let vhat = v.data[i] / c2;
                p.data[i] -= cfg.learning_rate * mhat / (vhat.sqrt() + cfg.adam_eps);
            }
        }
    }
}

pub fn train(dataset: &[LabeledExample], cfg: &TrainConfig) -> Result<GcnParams> {
    train_with_report(dataset, cfg).map(|r| r.params)
}

/// Adam on mean edge BCE with early stopping on held-out examples. With a
/// zero validation fraction the training set doubles as validation set.
pub fn train_with_report(dataset: &[LabeledExample], cfg: &TrainConfig) -> Result<TrainReport> {
    if dataset.is_empty() {
        return Err(Error::arg("training dataset is empty"));
    }
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((dataset.len() as f64) * cfg.validation_fraction).round() as usize;
    let n_val = n_val.min(dataset.len().saturating_sub(1));
    let val_indices: Vec<usize> = order[..n_val].to_vec();
    let train_indices: Vec<usize> = order[n_val..].to_vec();
    let val: Vec<LabeledExample> = if val_indices.is_empty() {
        train_indices.iter().map(|&i| dataset[i].clone()).collect()
    } else {
        val_indices.iter().map(|&i| dataset[i].clone()).collect()
    };

    let mut params = GcnParams::init(cfg.d_hidden, cfg.seed);
    let mut adam = Adam {
        m: params.zeros_like(),
        v: params.zeros_like(),
        t: 0,
    };
    let initial_val_loss = eval_loss(&params, &val)?;
    let mut best = (initial_val_loss, params.clone(), 0usize);
    let mut since_best = 0;
    let mut history = Vec::new();
    let mut epoch_order = train_indices.clone();
    let mut epochs_run = 0;
    for epoch in 1..=cfg.epochs {
        epoch_order.shuffle(&mut rng);
        let edges: Vec<(usize, usize, usize)> = epoch_order
            .iter()
            .flat_map(|&i| {
                let (n, m) = (dataset[i].graph.n, dataset[i].graph.m);
                (0..n).flat_map(move |j| (0..m).map(move |k| (i, j, k)))
            })
            .collect();
        let mut batch_losses = 0.0;
        let mut steps = 0;
        for chunk in edges.chunks(cfg.batch_size) {
            let mut parts: Vec<BatchPart> = Vec::new();
            for &(i, j, k) in chunk {
                match parts.last_mut() {
                    Some(p) if std::ptr::eq(p.example, &dataset[i]) => p.edges.push((j, k)),
                    _ => parts.push(BatchPart {
                        example: &dataset[i],
                        edges: vec![(j, k)],
                    }),
                }
            }
            let (loss, grad) =
                loss_and_grad_parts(&params, &parts, Mode::Train, cfg.dropout, &mut rng)?;
            adam.step(&mut params, &grad, cfg);
            batch_losses += loss;
            steps += 1;
        }
        let val_loss = eval_loss(&params, &val)?;
        history.push((batch_losses / steps.max(1) as f64, val_loss));
        epochs_run = epoch;
        if val_loss < best.0 {
            best = (val_loss, params.clone(), epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    let (best_val_loss, params, best_epoch) = best;
    Ok(TrainReport {
        params,
        initial_val_loss,
        best_val_loss,
        best_epoch,
        epochs_run,
        history,
        train_indices,
        val_indices,
    })
}
