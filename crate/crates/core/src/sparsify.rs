//! Continuous sparsification and subnetwork discovery.
//!
//! A soft weight-level mask sigma(beta * s) multiplies each maskable
//! parameter group; beta anneals exponentially from `beta_start` so the
//! soft mask hardens over training, and at test time the mask binarizes to
//! the strict indicator s > 0. Discovery trains only the mask logits s on a
//! subtask objective plus an l0 surrogate penalty, leaving the model
//! parameters untouched (asserted bit-exactly every epoch).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{
    self, is_maskable, EffectiveParams, ModelConfig, ModelError, ModelParams, ParamVars,
};
use crate::numerics::array::Array;
use crate::numerics::autodiff::Tape;
use crate::numerics::kernels;
use crate::numerics::optim::{Optimizer, OptimizerError, OptimizerKind};
use crate::numerics::rng::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct SparsifyConfig {
    pub beta_start: f32,
    pub beta_final: f32,
    /// Initial value of every mask logit (alpha).
    pub mask_init: f32,
    /// Sparsity penalty grid; discovery keeps the best run across it.
    pub lambda_grid: Vec<f32>,
    pub epochs: usize,
    pub mask_lr: f32,
    pub batch_size: usize,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        Self {
            beta_start: 1.0,
            beta_final: 100.0,
            mask_init: -0.1,
            lambda_grid: vec![1e-7, 5e-7, 1e-8],
            epochs: 50,
            mask_lr: 1e-3,
            batch_size: 100,
        }
    }
}

#[derive(Debug)]
pub enum SparsifyError {
    /// The maskable-group filter selected nothing.
    EmptySelection,
    EpochOutOfRange { epoch: usize, limit: usize },
    /// Mask training diverged (non-finite loss or gradient).
    Diverged { lambda: f32, epoch: usize },
    /// Every lambda grid point diverged; no mask was produced.
    AllRunsDiverged,
    Model(ModelError),
}

impl fmt::Display for SparsifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SparsifyError::EmptySelection => write!(f, "mask filter selected no groups"),
            SparsifyError::EpochOutOfRange { epoch, limit } => {
                write!(f, "epoch {epoch} beyond schedule end {limit}")
            }
            SparsifyError::Diverged { lambda, epoch } => {
                write!(f, "mask training diverged at lambda {lambda}, epoch {epoch}")
            }
            SparsifyError::AllRunsDiverged => {
                write!(f, "every lambda grid point diverged; no mask produced")
            }
            SparsifyError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SparsifyError {}

impl From<ModelError> for SparsifyError {
    fn from(e: ModelError) -> Self {
        SparsifyError::Model(e)
    }
}

/// Mask logits for every maskable group plus the current scale beta.
#[derive(Clone, Debug)]
pub struct MaskState {
    /// (group name, logits) in model definition order.
    pub logits: Vec<(String, Array)>,
    pub beta: f32,
}

impl MaskState {
    pub fn group(&self, name: &str) -> Option<&Array> {
        self.logits
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
    }

    pub fn total_entries(&self) -> usize {
        self.logits.iter().map(|(_, a)| a.len()).sum()
    }
}

/// Hard 0/1 mask per group; 1 marks a kept (subnetwork) weight.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMask {
    pub groups: Vec<(String, Vec<u8>)>,
}

impl BinaryMask {
    pub fn group(&self, name: &str) -> Option<&[u8]> {
        self.groups
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, bits)| bits.as_slice())
    }

    pub fn kept_count(&self) -> usize {
        self.groups
            .iter()
            .map(|(_, bits)| bits.iter().filter(|&&b| b != 0).count())
            .sum()
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|(_, bits)| bits.len()).sum()
    }

    /// Kept fraction over maskable entries.
    pub fn density(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        self.kept_count() as f64 / self.total() as f64
    }

    /// Number of positions kept by both masks.
    pub fn overlap(&self, other: &BinaryMask) -> usize {
        let mut n = 0;
        for (name, bits) in &self.groups {
            if let Some(ob) = other.group(name) {
                n += bits
                    .iter()
                    .zip(ob)
                    .filter(|&(&a, &b)| a != 0 && b != 0)
                    .count();
            }
        }
        n
    }

    /// FNV-1a over group names and bits; identifies a mask in run configs.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut absorb = |byte: u8| {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        };
        for (name, bits) in &self.groups {
            for b in name.bytes() {
                absorb(b);
            }
            for &b in bits {
                absorb(b);
            }
        }
        h
    }
}

/// Per-group and overall density report.
#[derive(Clone, Debug, PartialEq)]
pub struct SubnetStats {
    pub per_group: Vec<GroupStat>,
    pub kept_total: usize,
    pub maskable_total: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupStat {
    pub name: String,
    pub kept: usize,
    pub total: usize,
}

impl SubnetStats {
    pub fn overall_fraction(&self) -> f64 {
        if self.maskable_total == 0 {
            0.0
        } else {
            self.kept_total as f64 / self.maskable_total as f64
        }
    }
}

/// Initializes mask logits to `mask_init` for every group passing `filter`.
pub fn init_mask(
    params: &ModelParams,
    cfg: &SparsifyConfig,
    filter: impl Fn(&str) -> bool,
) -> Result<MaskState, SparsifyError> {
    let mut logits = Vec::new();
    for (name, value) in params.iter() {
        if filter(name) {
            logits.push((String::from(name), Array::full(value.shape(), cfg.mask_init)));
        }
    }
    if logits.is_empty() {
        return Err(SparsifyError::EmptySelection);
    }
    Ok(MaskState {
        logits,
        beta: cfg.beta_start,
    })
}

/// Soft effective parameters: theta * sigma(beta * s) for masked groups.
/// Unmasked groups fall through to their stored values at use sites.
pub fn effective_params(params: &ModelParams, mask: &MaskState) -> EffectiveParams {
    let mut out = EffectiveParams::new();
    for (name, s) in &mask.logits {
        let theta = params.get(name).expect("mask group must exist in params");
        let mut eff = theta.clone();
        for (e, &sv) in eff.data_mut().iter_mut().zip(s.data()) {
            *e *= kernels::sigmoid(mask.beta * sv);
        }
        out.insert(name.clone(), eff);
    }
    out
}

/// Hard effective parameters: theta * gamma for a binary mask.
pub fn binary_effective_params(params: &ModelParams, mask: &BinaryMask) -> EffectiveParams {
    let mut out = EffectiveParams::new();
    for (name, bits) in &mask.groups {
        let theta = params.get(name).expect("mask group must exist in params");
        let mut eff = theta.clone();
        for (e, &b) in eff.data_mut().iter_mut().zip(bits) {
            if b == 0 {
                *e = 0.0;
            }
        }
        out.insert(name.clone(), eff);
    }
    out
}

/// beta(epoch) = beta_start * beta_final^(epoch / epochs): the exponential
/// schedule that multiplies beta by beta_final^(1/n) at each epoch end.
pub fn schedule_beta(epoch: usize, cfg: &SparsifyConfig) -> Result<f32, SparsifyError> {
    if epoch > cfg.epochs {
        return Err(SparsifyError::EpochOutOfRange {
            epoch,
            limit: cfg.epochs,
        });
    }
    let frac = epoch as f64 / cfg.epochs as f64;
    Ok((cfg.beta_start as f64 * libm::pow(cfg.beta_final as f64, frac)) as f32)
}

/// l0 surrogate: lambda * sum over masked entries of sigma(beta * s).
/// As beta grows this anneals toward a count of positive logits.
pub fn l0_penalty(mask: &MaskState, lambda: f32) -> f32 {
    let mut total = 0.0f32;
    for (_, s) in &mask.logits {
        for &sv in s.data() {
            total += kernels::sigmoid(mask.beta * sv);
        }
    }
    lambda * total
}

/// Test-time binarization: gamma = 1 exactly where s > 0 (s = 0 excluded).
pub fn binarize(mask: &MaskState) -> BinaryMask {
    let groups = mask
        .logits
        .iter()
        .map(|(name, s)| {
            (
                name.clone(),
                s.data().iter().map(|&v| u8::from(v > 0.0)).collect(),
            )
        })
        .collect();
    BinaryMask { groups }
}

/// Density report for a binary mask.
pub fn subnet_stats(mask: &BinaryMask) -> SubnetStats {
    let per_group: Vec<GroupStat> = mask
        .groups
        .iter()
        .map(|(name, bits)| GroupStat {
            name: name.clone(),
            kept: bits.iter().filter(|&&b| b != 0).count(),
            total: bits.len(),
        })
        .collect();
    let kept_total = per_group.iter().map(|g| g.kept).sum();
    let maskable_total = per_group.iter().map(|g| g.total).sum();
    SubnetStats {
        per_group,
        kept_total,
        maskable_total,
    }
}

/// Metrics from one mask-training epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscoveryEpoch {
    pub loss: f32,
    pub binarized_accuracy: f32,
    pub density: f64,
    pub beta: f32,
}

/// History of one lambda grid point.
#[derive(Clone, Debug)]
pub struct LambdaRun {
    pub lambda: f32,
    pub epochs: Vec<DiscoveryEpoch>,
    pub diverged: bool,
}

#[derive(Clone, Debug)]
pub struct DiscoveryOutcome {
    pub mask: BinaryMask,
    pub best_lambda: f32,
    pub best_epoch: usize,
    pub best_accuracy: f32,
    pub runs: Vec<LambdaRun>,
}

/// Candidate ranking: higher binarized accuracy wins; ties prefer the
/// sparser mask, then the earlier grid point / epoch.
fn better(acc: f32, density: f64, best_acc: f32, best_density: f64) -> bool {
    acc > best_acc || (acc == best_acc && density < best_density)
}

struct LambdaResult {
    run: LambdaRun,
    best: Option<(BinaryMask, usize, f32, f64)>,
}

/// Trains mask logits for one lambda. `params` is never modified; its
/// content hash is asserted after every epoch.
fn discover_one(
    params: &ModelParams,
    model_cfg: &ModelConfig,
    train_tokens: &[u32],
    eval_tokens: &[u32],
    cfg: &SparsifyConfig,
    lambda: f32,
    shuffle_seed: u64,
) -> Result<LambdaResult, SparsifyError> {
    let theta_hash = params.content_hash();
    let mut mask = init_mask(params, cfg, is_maskable)?;
    let mut opt = Optimizer::new(
        // Decay on mask logits would drag them toward the binarization
        // threshold; the penalty term handles sparsity pressure instead.
        OptimizerKind::AdamW {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        },
        cfg.mask_lr,
    );
    let rows = train_tokens.len() / model::SEQ_LEN;
    let mut order: Vec<usize> = (0..rows).collect();
    let mut rng = Rng::new(shuffle_seed).fork("mask-shuffle");
    let mut epochs_out = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(BinaryMask, usize, f32, f64)> = None;

    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0f64;
        let mut batch_tokens: Vec<u32> = Vec::with_capacity(cfg.batch_size * model::SEQ_LEN);
        for chunk in order.chunks(cfg.batch_size) {
            batch_tokens.clear();
            for &r in chunk {
                batch_tokens
                    .extend_from_slice(&train_tokens[r * model::SEQ_LEN..(r + 1) * model::SEQ_LEN]);
            }
            let loss = mask_batch(params, model_cfg, &mut mask, &mut opt, lambda, &batch_tokens)
                .map_err(|e| match e {
                    MaskBatchError::NonFinite => SparsifyError::Diverged { lambda, epoch },
                    MaskBatchError::Model(m) => SparsifyError::Model(m),
                })?;
            loss_sum += loss as f64 * chunk.len() as f64;
        }
        // Scheduler runs at epoch end, so epoch e trains at beta(e).
        mask.beta = schedule_beta(epoch + 1, cfg)?;
        assert_eq!(
            params.content_hash(),
            theta_hash,
            "model parameters changed during discovery"
        );

        let binary = binarize(&mask);
        let density = binary.density();
        let eff = binary_effective_params(params, &binary);
        let accuracy = model::answer_accuracy(params, model_cfg, eval_tokens, Some(&eff))?;
        epochs_out.push(DiscoveryEpoch {
            loss: (loss_sum / rows as f64) as f32,
            binarized_accuracy: accuracy,
            density,
            beta: mask.beta,
        });
        let improves = match &best {
            None => true,
            Some((_, _, best_acc, best_density)) => {
                better(accuracy, density, *best_acc, *best_density)
            }
        };
        if improves {
            best = Some((binary, epoch, accuracy, density));
        }
    }
    Ok(LambdaResult {
        run: LambdaRun {
            lambda,
            epochs: epochs_out,
            diverged: false,
        },
        best,
    })
}

enum MaskBatchError {
    NonFinite,
    Model(ModelError),
}

impl From<ModelError> for MaskBatchError {
    fn from(e: ModelError) -> Self {
        MaskBatchError::Model(e)
    }
}

/// One gradient step on the mask logits: forward with theta * sigma(beta*s),
/// subtask cross-entropy plus the l0 surrogate, backward into s only.
fn mask_batch(
    params: &ModelParams,
    model_cfg: &ModelConfig,
    mask: &mut MaskState,
    opt: &mut Optimizer,
    lambda: f32,
    tokens: &[u32],
) -> Result<f32, MaskBatchError> {
    let mut tape = Tape::new();
    let mut pv = ParamVars::new();
    let mut logit_vars = vec![None; mask.logits.len()];
    let mut soft_vars = Vec::with_capacity(mask.logits.len());
    for (name, value) in params.iter() {
        let slot = mask.logits.iter().position(|(n, _)| n == name);
        if let Some(slot) = slot {
            let s_var = tape.leaf(mask.logits[slot].1.clone());
            let scaled = tape.scale(s_var, mask.beta);
            let soft = tape.sigmoid(scaled);
            let theta = tape.constant(value.clone());
            let eff = tape.mul(theta, soft).map_err(ModelError::from)?;
            pv.bind(name, eff);
            logit_vars[slot] = Some(s_var);
            soft_vars.push(soft);
        } else {
            pv.bind(name, tape.constant(value.clone()));
        }
    }
    let logits = model::forward_tape(&mut tape, &pv, model_cfg, tokens)?;
    let pairs = model::next_token_pairs(tokens);
    let ce = tape
        .cross_entropy_mean(logits, &pairs)
        .map_err(ModelError::from)?;
    let mut penalty = None;
    for &soft in &soft_vars {
        let group_sum = tape.sum(soft);
        penalty = Some(match penalty {
            None => group_sum,
            Some(acc) => tape.add(acc, group_sum).map_err(ModelError::from)?,
        });
    }
    let scaled_penalty = tape.scale(penalty.expect("at least one masked group"), lambda);
    let loss = tape.add(ce, scaled_penalty).map_err(ModelError::from)?;
    let loss_value = tape.value(loss).item();
    if !loss_value.is_finite() {
        return Err(MaskBatchError::NonFinite);
    }
    tape.backward(loss).map_err(ModelError::from)?;
    opt.start_step();
    for ((name, s), var) in mask.logits.iter_mut().zip(&logit_vars) {
        let var = var.expect("every mask group must exist in params");
        let grad = tape.take_grad(var).expect("mask logit missing gradient");
        opt.update(name, s, &grad, None).map_err(|e| match e {
            OptimizerError::NonFiniteGrad { .. } => MaskBatchError::NonFinite,
            OptimizerError::ShapeMismatch { group } => {
                MaskBatchError::Model(ModelError::UnknownGroup(group))
            }
        })?;
    }
    Ok(loss_value)
}

/// Full subnetwork discovery: runs the lambda grid and returns the
/// binarized mask with the best held-out subtask accuracy.
pub fn discover(
    params: &ModelParams,
    model_cfg: &ModelConfig,
    train_tokens: &[u32],
    eval_tokens: &[u32],
    cfg: &SparsifyConfig,
    shuffle_seed: u64,
) -> Result<DiscoveryOutcome, SparsifyError> {
    let mut runs = Vec::with_capacity(cfg.lambda_grid.len());
    let mut best: Option<(BinaryMask, f32, usize, f32, f64)> = None;
    for &lambda in &cfg.lambda_grid {
        // Every grid point sees the same shuffle seed so runs differ only
        // in lambda.
        let result = match discover_one(
            params,
            model_cfg,
            train_tokens,
            eval_tokens,
            cfg,
            lambda,
            shuffle_seed,
        ) {
            Ok(r) => r,
            Err(SparsifyError::Diverged { lambda, .. }) => {
                runs.push(LambdaRun {
                    lambda,
                    epochs: Vec::new(),
                    diverged: true,
                });
                continue;
            }
            Err(other) => return Err(other),
        };
        if let Some((mask, epoch, acc, density)) = result.best {
            let improves = match &best {
                None => true,
                Some((_, _, _, best_acc, best_density)) => {
                    better(acc, density, *best_acc, *best_density)
                }
            };
            if improves {
                best = Some((mask, lambda, epoch, acc, density));
            }
        }
        runs.push(result.run);
    }
    let (mask, best_lambda, best_epoch, best_accuracy, _) =
        best.ok_or(SparsifyError::AllRunsDiverged)?;
    Ok(DiscoveryOutcome {
        mask,
        best_lambda,
        best_epoch,
        best_accuracy,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;

    fn tiny_model() -> (ModelConfig, ModelParams) {
        let cfg = ModelConfig {
            n_layers: 2,
            n_heads: 2,
            d_model: 8,
            d_ff: 16,
            vocab_size: 11,
            init_std: 0.02,
        };
        let params = build_model(&cfg, 42).unwrap();
        (cfg, params)
    }

    #[test]
    fn default_filter_masks_attn_mlp_only() {
        let (_, params) = tiny_model();
        let mask = init_mask(&params, &SparsifyConfig::default(), is_maskable).unwrap();
        for name in ["tok_embed", "pos_embed", "unembed.w", "ln_f.gain", "h0.ln1.gain"] {
            assert!(mask.group(name).is_none(), "{name} must be unmasked");
        }
        for name in [
            "h0.attn.qkv.w",
            "h0.attn.qkv.b",
            "h0.attn.out.w",
            "h0.mlp.in.w",
            "h1.mlp.out.w",
            "h1.mlp.out.b",
        ] {
            assert!(mask.group(name).is_some(), "{name} must be masked");
        }
    }

    #[test]
    fn empty_selection_is_an_error() {
        let (_, params) = tiny_model();
        let err = init_mask(&params, &SparsifyConfig::default(), |_| false).unwrap_err();
        assert!(matches!(err, SparsifyError::EmptySelection));
    }

    #[test]
    fn fresh_mask_soft_value() {
        // alpha = -0.1, beta = 1: sigma(-0.1) = 0.47502 everywhere.
        let (_, params) = tiny_model();
        let cfg = SparsifyConfig::default();
        let mask = init_mask(&params, &cfg, is_maskable).unwrap();
        let eff = effective_params(&params, &mask);
        let theta = params.get("h0.attn.qkv.w").unwrap();
        let got = eff.get("h0.attn.qkv.w").unwrap();
        for (&e, &t) in got.data().iter().zip(theta.data()) {
            assert!((e - 0.47502 * t).abs() <= 1e-6 + 1e-5 * t.abs());
        }
    }

    #[test]
    fn saturated_mask_recovers_theta() {
        let (_, params) = tiny_model();
        let cfg = SparsifyConfig::default();
        let mut mask = init_mask(&params, &cfg, is_maskable).unwrap();
        for (_, s) in mask.logits.iter_mut() {
            for v in s.data_mut() {
                *v = 100.0;
            }
        }
        mask.beta = 100.0;
        let eff = effective_params(&params, &mask);
        let theta = params.get("h0.mlp.in.w").unwrap();
        let got = eff.get("h0.mlp.in.w").unwrap();
        for (&e, &t) in got.data().iter().zip(theta.data()) {
            assert!((e - t).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_logits_halve_theta() {
        let (_, params) = tiny_model();
        let cfg = SparsifyConfig::default();
        let mut mask = init_mask(&params, &cfg, is_maskable).unwrap();
        for (_, s) in mask.logits.iter_mut() {
            for v in s.data_mut() {
                *v = 0.0;
            }
        }
        let eff = effective_params(&params, &mask);
        let theta = params.get("h1.attn.out.w").unwrap();
        let got = eff.get("h1.attn.out.w").unwrap();
        for (&e, &t) in got.data().iter().zip(theta.data()) {
            assert_eq!(e, 0.5 * t);
        }
    }

    #[test]
    fn beta_schedule_endpoints_and_midpoint() {
        let cfg = SparsifyConfig::default();
        assert!((schedule_beta(0, &cfg).unwrap() - 1.0).abs() < 1e-6);
        assert!((schedule_beta(50, &cfg).unwrap() - 100.0).abs() < 1e-6);
        assert!((schedule_beta(25, &cfg).unwrap() - 10.0).abs() < 1e-5);
        assert!(schedule_beta(51, &cfg).is_err());
    }

    #[test]
    fn beta_schedule_constant_ratio() {
        let cfg = SparsifyConfig::default();
        let ratio = (schedule_beta(1, &cfg).unwrap() as f64) / (schedule_beta(0, &cfg).unwrap() as f64);
        for e in 1..cfg.epochs {
            let r = (schedule_beta(e + 1, &cfg).unwrap() as f64)
                / (schedule_beta(e, &cfg).unwrap() as f64);
            assert!((r - ratio).abs() < 1e-6, "ratio drift at epoch {e}");
        }
    }

    #[test]
    fn l0_penalty_values() {
        let (_, params) = tiny_model();
        let cfg = SparsifyConfig::default();
        let mut mask = init_mask(&params, &cfg, is_maskable).unwrap();
        assert_eq!(l0_penalty(&mask, 0.0), 0.0);
        // All entries s = -10 at beta = 100: sigma saturates to 0.
        for (_, s) in mask.logits.iter_mut() {
            for v in s.data_mut() {
                *v = -10.0;
            }
        }
        mask.beta = 100.0;
        assert!(l0_penalty(&mask, 1.0) < 1e-3);
        // Single entry check: s = 0 contributes lambda * 0.5.
        let single = MaskState {
            logits: vec![(String::from("g"), Array::zeros(&[1]))],
            beta: 1.0,
        };
        assert_eq!(l0_penalty(&single, 2.0), 1.0);
    }

    #[test]
    fn binarize_strict_positive() {
        let mask = MaskState {
            logits: vec![(
                String::from("g"),
                Array::from_vec(&[3], vec![-0.1, 0.0, 0.3]).unwrap(),
            )],
            beta: 1.0,
        };
        let binary = binarize(&mask);
        assert_eq!(binary.group("g").unwrap(), &[0, 0, 1]);
    }

    #[test]
    fn fresh_mask_binarizes_empty() {
        let (_, params) = tiny_model();
        let cfg = SparsifyConfig::default();
        let mask = init_mask(&params, &cfg, is_maskable).unwrap();
        let binary = binarize(&mask);
        assert_eq!(binary.kept_count(), 0);
        assert_eq!(subnet_stats(&binary).overall_fraction(), 0.0);
    }

    #[test]
    fn stats_for_full_mask() {
        let (_, params) = tiny_model();
        let cfg = SparsifyConfig::default();
        let mut mask = init_mask(&params, &cfg, is_maskable).unwrap();
        for (_, s) in mask.logits.iter_mut() {
            for v in s.data_mut() {
                *v = 1.0;
            }
        }
        let stats = subnet_stats(&binarize(&mask));
        assert_eq!(stats.overall_fraction(), 1.0);
        assert_eq!(stats.kept_total, stats.maskable_total);
    }

    #[test]
    fn soft_mask_strictly_bounded() {
        // sigma(beta s) in (0, 1) for finite inputs, so effective params
        // never exceed theta in magnitude.
        let (_, params) = tiny_model();
        let cfg = SparsifyConfig::default();
        let mut mask = init_mask(&params, &cfg, is_maskable).unwrap();
        let mut rng = Rng::new(1);
        for (_, s) in mask.logits.iter_mut() {
            for v in s.data_mut() {
                *v = rng.normal(0.0, 5.0);
            }
        }
        mask.beta = 3.0;
        let eff = effective_params(&params, &mask);
        for (name, e) in &eff {
            let theta = params.get(name).unwrap();
            for (&ev, &tv) in e.data().iter().zip(theta.data()) {
                assert!(ev.abs() <= tv.abs());
            }
        }
    }
}
