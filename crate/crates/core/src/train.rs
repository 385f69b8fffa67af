//! Shared next-token training loop.
//!
//! Used by base-task training and by every transfer mode. Per-entry
//! trainability masks are enforced at the optimizer, so frozen entries stay
//! bit-identical no matter how long training runs. The `Trainer` type steps
//! one epoch at a time; `train` drives it to completion and tracks the
//! best-evaluation checkpoint.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{self, ModelConfig, ModelError, ModelParams, ParamVars, SEQ_LEN};
use crate::numerics::autodiff::Tape;
use crate::numerics::optim::{Optimizer, OptimizerError, OptimizerKind};
use crate::numerics::rng::Rng;

/// Per-entry trainability: 1 = trainable, 0 = frozen. Groups without an
/// entry are fully trainable.
pub type Trainability = BTreeMap<String, Vec<u8>>;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f32,
    pub weight_decay: f32,
    /// Seed for per-epoch batch shuffling.
    pub shuffle_seed: u64,
    /// Stop once eval accuracy reaches 1.0. The best checkpoint is already
    /// fixed at that point (ties break to the earliest epoch), so this
    /// cannot change the selected model or its test accuracy.
    pub stop_at_perfect_eval: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 100,
            lr: 2e-4,
            weight_decay: 0.01,
            shuffle_seed: 0,
            stop_at_perfect_eval: true,
        }
    }
}

#[derive(Debug)]
pub enum TrainError {
    /// Loss or a gradient went non-finite; the trial must abort.
    NonFinite { epoch: usize, detail: String },
    Model(ModelError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::NonFinite { epoch, detail } => {
                write!(f, "non-finite value at epoch {epoch}: {detail}")
            }
            TrainError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TrainError {}

impl From<ModelError> for TrainError {
    fn from(e: ModelError) -> Self {
        TrainError::Model(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub train_loss: f32,
    pub eval_accuracy: f32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Ok,
    Diverged { epoch: usize, detail: String },
}

impl RunStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RunStatus::Ok)
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters at the best-evaluation epoch.
    pub best_params: ModelParams,
    /// Parameters at the end of the run (used for freeze verification).
    pub final_params: ModelParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub status: RunStatus,
}

/// Epoch-stepped trainer over a fixed token set.
pub struct Trainer<'a> {
    model_cfg: &'a ModelConfig,
    cfg: TrainConfig,
    params: ModelParams,
    trainable: Option<&'a Trainability>,
    opt: Optimizer,
    train_tokens: &'a [u32],
    order: Vec<usize>,
    rng: Rng,
    epoch: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(
        init: ModelParams,
        trainable: Option<&'a Trainability>,
        model_cfg: &'a ModelConfig,
        train_tokens: &'a [u32],
        cfg: TrainConfig,
    ) -> Self {
        assert!(!train_tokens.is_empty(), "empty training set");
        assert_eq!(train_tokens.len() % SEQ_LEN, 0);
        let rows = train_tokens.len() / SEQ_LEN;
        let opt = Optimizer::new(OptimizerKind::adamw(cfg.weight_decay), cfg.lr);
        let rng = Rng::new(cfg.shuffle_seed).fork("batch-shuffle");
        Self {
            model_cfg,
            cfg,
            params: init,
            trainable,
            opt,
            train_tokens,
            order: (0..rows).collect(),
            rng,
            epoch: 0,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn into_params(self) -> ModelParams {
        self.params
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// One pass over the training set; returns the mean training loss.
    pub fn run_epoch(&mut self) -> Result<f32, TrainError> {
        let mut order = core::mem::take(&mut self.order);
        self.rng.shuffle(&mut order);
        let rows = order.len();
        let mut loss_sum = 0.0f64;
        let mut batch_tokens: Vec<u32> = Vec::with_capacity(self.cfg.batch_size * SEQ_LEN);
        let mut result = Ok(());
        for chunk in order.chunks(self.cfg.batch_size) {
            batch_tokens.clear();
            for &r in chunk {
                batch_tokens.extend_from_slice(&self.train_tokens[r * SEQ_LEN..(r + 1) * SEQ_LEN]);
            }
            match self.train_batch(&batch_tokens) {
                Ok(loss) => loss_sum += loss as f64 * chunk.len() as f64,
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        self.order = order;
        result?;
        self.epoch += 1;
        Ok((loss_sum / rows as f64) as f32)
    }

    fn train_batch(&mut self, tokens: &[u32]) -> Result<f32, TrainError> {
        let mut tape = Tape::new();
        let pv = ParamVars::all_leaves(&mut tape, &self.params);
        let logits = model::forward_tape(&mut tape, &pv, self.model_cfg, tokens)?;
        let pairs = model::next_token_pairs(tokens);
        let loss = tape.cross_entropy_mean(logits, &pairs).map_err(ModelError::from)?;
        let loss_value = tape.value(loss).item();
        if !loss_value.is_finite() {
            return Err(TrainError::NonFinite {
                epoch: self.epoch,
                detail: "training loss".into(),
            });
        }
        tape.backward(loss).map_err(ModelError::from)?;
        self.opt.start_step();
        for (name, value) in self.params.iter_mut() {
            let var = pv.get(name)?;
            let grad = tape
                .take_grad(var)
                .expect("trainable leaf missing gradient");
            let bits = self.trainable.and_then(|t| t.get(name)).map(Vec::as_slice);
            self.opt
                .update(name, value, &grad, bits)
                .map_err(|e| match e {
                    OptimizerError::NonFiniteGrad { group, .. } => TrainError::NonFinite {
                        epoch: self.epoch,
                        detail: group,
                    },
                    other => TrainError::NonFinite {
                        epoch: self.epoch,
                        detail: alloc::format!("{other}"),
                    },
                })?;
        }
        Ok(loss_value)
    }

    pub fn eval_accuracy(&self, eval_tokens: &[u32]) -> Result<f32, ModelError> {
        model::answer_accuracy(&self.params, self.model_cfg, eval_tokens, None)
    }
}

/// Trains to completion, evaluating once per epoch and keeping the
/// best-eval checkpoint (ties break to the earliest epoch). A non-finite
/// loss or gradient ends the run with `RunStatus::Diverged`.
pub fn train(
    init: ModelParams,
    trainable: Option<&Trainability>,
    model_cfg: &ModelConfig,
    train_tokens: &[u32],
    eval_tokens: &[u32],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, ModelError> {
    let mut trainer = Trainer::new(init, trainable, model_cfg, train_tokens, cfg.clone());
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best_epoch = 0usize;
    let mut best_acc = f32::NEG_INFINITY;
    let mut best_params = trainer.params().clone();
    let mut status = RunStatus::Ok;
    for epoch in 0..cfg.epochs {
        match trainer.run_epoch() {
            Ok(train_loss) => {
                let eval_accuracy = trainer.eval_accuracy(eval_tokens)?;
                history.push(EpochRecord {
                    train_loss,
                    eval_accuracy,
                });
                if eval_accuracy > best_acc {
                    best_acc = eval_accuracy;
                    best_epoch = epoch;
                    best_params = trainer.params().clone();
                }
                if cfg.stop_at_perfect_eval && eval_accuracy >= 1.0 {
                    break;
                }
            }
            Err(TrainError::NonFinite { epoch, detail }) => {
                status = RunStatus::Diverged { epoch, detail };
                break;
            }
            Err(TrainError::Model(e)) => return Err(e),
        }
    }
    Ok(TrainOutcome {
        best_params,
        final_params: trainer.into_params(),
        history,
        best_epoch,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{self, SampleSize, TaskSpec};

    fn tiny_setup() -> (ModelConfig, TaskSpec) {
        let spec = TaskSpec::t1(7, 16);
        let cfg = ModelConfig {
            n_layers: 1,
            n_heads: 2,
            d_model: 16,
            d_ff: 32,
            vocab_size: spec.vocab_size(),
            init_std: 0.02,
        };
        (cfg, spec)
    }

    #[test]
    fn fixed_seed_identical_loss_sequence() {
        let (cfg, spec) = tiny_setup();
        let data = tasks::gen_train(&spec, SampleSize::Count(64), 3, false).unwrap();
        let tokens = data.tokens();
        let run = |_: u32| {
            let params = model::build_model(&cfg, 11).unwrap();
            let mut trainer = Trainer::new(
                params,
                None,
                &cfg,
                &tokens,
                TrainConfig {
                    epochs: 3,
                    batch_size: 16,
                    lr: 1e-3,
                    weight_decay: 0.01,
                    shuffle_seed: 5,
                    stop_at_perfect_eval: false,
                },
            );
            let mut losses = Vec::new();
            for _ in 0..3 {
                losses.push(trainer.run_epoch().unwrap());
            }
            (losses, trainer.into_params())
        };
        let (losses_a, params_a) = run(0);
        let (losses_b, params_b) = run(1);
        assert_eq!(losses_a, losses_b);
        assert_eq!(params_a.content_hash(), params_b.content_hash());
    }

    #[test]
    fn loss_decreases_under_training() {
        let (cfg, spec) = tiny_setup();
        let data = tasks::gen_train(&spec, SampleSize::Count(128), 7, true).unwrap();
        let tokens = data.tokens();
        let params = model::build_model(&cfg, 1).unwrap();
        let mut trainer = Trainer::new(
            params,
            None,
            &cfg,
            &tokens,
            TrainConfig {
                epochs: 5,
                batch_size: 32,
                lr: 3e-3,
                weight_decay: 0.0,
                shuffle_seed: 2,
                stop_at_perfect_eval: false,
            },
        );
        let first = trainer.run_epoch().unwrap();
        let mut last = first;
        for _ in 0..4 {
            last = trainer.run_epoch().unwrap();
        }
        assert!(last < first, "loss did not decrease: {first} -> {last}");
    }

    #[test]
    fn frozen_group_survives_training_bit_exact() {
        let (cfg, spec) = tiny_setup();
        let data = tasks::gen_train(&spec, SampleSize::Count(64), 9, false).unwrap();
        let tokens = data.tokens();
        let params = model::build_model(&cfg, 4).unwrap();
        let frozen_group = "h0.attn.qkv.w";
        let before: Vec<u32> = params
            .get(frozen_group)
            .unwrap()
            .data()
            .iter()
            .map(|v| v.to_bits())
            .collect();
        let mut trainable = Trainability::new();
        trainable.insert(
            frozen_group.into(),
            alloc::vec![0u8; params.get(frozen_group).unwrap().len()],
        );
        let out = train(
            params,
            Some(&trainable),
            &cfg,
            &tokens,
            &tokens,
            &TrainConfig {
                epochs: 3,
                batch_size: 16,
                lr: 1e-3,
                weight_decay: 0.01,
                shuffle_seed: 0,
                stop_at_perfect_eval: false,
            },
        )
        .unwrap();
        let after: Vec<u32> = out
            .final_params
            .get(frozen_group)
            .unwrap()
            .data()
            .iter()
            .map(|v| v.to_bits())
            .collect();
        assert_eq!(before, after);
    }
}
