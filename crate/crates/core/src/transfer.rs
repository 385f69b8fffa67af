//! Subnetwork transplantation and the transfer baselines.
//!
//! The transplant assembles gamma * theta_original + (1 - gamma) * theta_new
//! entrywise (exact selection, no float arithmetic) and, when the
//! subnetwork is frozen, marks exactly the gamma = 1 entries untrainable.
//! Controls: layer-matched random masks, complement-sampled masks,
//! full-model transfer, and training from scratch. Freezing is enforced at
//! the optimizer and verified bit-exactly after every run.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{self, ModelConfig, ModelError, ModelParams};
use crate::numerics::rng::Rng;
use crate::sparsify::BinaryMask;
use crate::train::{self, RunStatus, TrainConfig, TrainOutcome, Trainability};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransferMode {
    /// Discovered subnetwork transplanted frozen (the headline method).
    Induction,
    /// Discovered subnetwork transplanted but left trainable.
    InductionTrainable,
    /// All base-task weights copied, everything trainable.
    FullTransfer,
    /// Layer-matched random subnetwork, frozen.
    RandomSubnet,
    /// Subnetwork sampled from the complement of the discovered one, frozen.
    ComplementSubnet,
    /// Fresh initialization; ignores the base model entirely.
    Scratch,
}

impl TransferMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransferMode::Induction => "induction",
            TransferMode::InductionTrainable => "induction-trainable",
            TransferMode::FullTransfer => "full-transfer",
            TransferMode::RandomSubnet => "random-subnet",
            TransferMode::ComplementSubnet => "complement-subnet",
            TransferMode::Scratch => "scratch",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "induction" => TransferMode::Induction,
            "induction-trainable" => TransferMode::InductionTrainable,
            "full-transfer" => TransferMode::FullTransfer,
            "random-subnet" => TransferMode::RandomSubnet,
            "complement-subnet" => TransferMode::ComplementSubnet,
            "scratch" => TransferMode::Scratch,
            _ => return None,
        })
    }

    pub fn requires_mask(&self) -> bool {
        matches!(
            self,
            TransferMode::Induction
                | TransferMode::InductionTrainable
                | TransferMode::RandomSubnet
                | TransferMode::ComplementSubnet
        )
    }

    /// Whether the transplanted subnetwork stays frozen under this mode.
    pub fn freeze(&self) -> bool {
        matches!(
            self,
            TransferMode::Induction | TransferMode::RandomSubnet | TransferMode::ComplementSubnet
        )
    }
}

impl fmt::Display for TransferMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One transfer run: mode, the mask it transplants (where applicable), the
/// seed for re-initialized weights, and the freeze flag.
#[derive(Clone, Debug)]
pub struct TransferPlan {
    pub mode: TransferMode,
    pub mask: Option<BinaryMask>,
    pub reinit_seed: u64,
    pub freeze: bool,
}

impl TransferPlan {
    pub fn new(mode: TransferMode, mask: Option<BinaryMask>, reinit_seed: u64) -> Self {
        Self {
            mode,
            mask,
            reinit_seed,
            freeze: mode.freeze(),
        }
    }
}

#[derive(Debug)]
pub enum TransferError {
    /// Mode requires a mask but none was supplied.
    MissingMask(TransferMode),
    /// Mask group missing from the model or shaped differently.
    MaskShapeMismatch { group: String },
    /// A group's complement holds fewer entries than its kept count.
    ComplementInfeasible { group: String, kept: usize, zeros: usize },
    Model(ModelError),
}

impl fmt::Display for TransferError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransferError::MissingMask(mode) => write!(f, "mode {mode} requires a mask"),
            TransferError::MaskShapeMismatch { group } => {
                write!(f, "mask does not match parameter group '{group}'")
            }
            TransferError::ComplementInfeasible { group, kept, zeros } => write!(
                f,
                "complement sampling infeasible for '{group}': need {kept} from {zeros} zeros"
            ),
            TransferError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TransferError {}

impl From<ModelError> for TransferError {
    fn from(e: ModelError) -> Self {
        TransferError::Model(e)
    }
}

/// Parameters mixed from an original model and a fresh initialization,
/// plus the per-entry trainability map enforcing the freeze.
#[derive(Clone, Debug)]
pub struct MixedParams {
    pub params: ModelParams,
    pub trainable: Trainability,
}

/// Assembles the transferred model: masked groups take theta_original where
/// gamma = 1 and fresh theta_new elsewhere; groups outside the mask
/// (embeddings, layer norms, unembedding) are fully re-initialized. With
/// `freeze`, exactly the gamma = 1 entries are marked untrainable.
pub fn transplant(
    original: &ModelParams,
    model_cfg: &ModelConfig,
    mask: &BinaryMask,
    reinit_seed: u64,
    freeze: bool,
) -> Result<MixedParams, TransferError> {
    let fresh = model::build_model(model_cfg, reinit_seed)?;
    let mut params = ModelParams::new();
    let mut trainable = Trainability::new();
    for (name, orig_value) in original.iter() {
        let new_value = fresh
            .get(name)
            .expect("fresh model has identical group names");
        match mask.group(name) {
            Some(bits) => {
                if bits.len() != orig_value.len() {
                    return Err(TransferError::MaskShapeMismatch { group: name.into() });
                }
                let mut mixed = new_value.clone();
                for ((m, &bit), &orig) in
                    mixed.data_mut().iter_mut().zip(bits).zip(orig_value.data())
                {
                    if bit != 0 {
                        *m = orig;
                    }
                }
                params.insert(name, mixed);
                if freeze {
                    // Trainability is the negation of gamma.
                    trainable.insert(name.into(), bits.iter().map(|&b| 1 - b).collect());
                }
            }
            None => {
                params.insert(name, new_value.clone());
            }
        }
    }
    Ok(MixedParams { params, trainable })
}

/// Builds the starting model and trainability for a plan.
pub fn assemble(
    plan: &TransferPlan,
    original: &ModelParams,
    model_cfg: &ModelConfig,
) -> Result<MixedParams, TransferError> {
    match plan.mode {
        TransferMode::Scratch => Ok(MixedParams {
            params: model::build_model(model_cfg, plan.reinit_seed)?,
            trainable: Trainability::new(),
        }),
        TransferMode::FullTransfer => Ok(MixedParams {
            params: original.clone(),
            trainable: Trainability::new(),
        }),
        _ => {
            let mask = plan
                .mask
                .as_ref()
                .ok_or(TransferError::MissingMask(plan.mode))?;
            transplant(original, model_cfg, mask, plan.reinit_seed, plan.freeze)
        }
    }
}

/// Random subnetwork with exactly the reference's kept count in every
/// group ("layer-matched").
pub fn sample_random_subnet(reference: &BinaryMask, seed: u64) -> BinaryMask {
    let mut rng = Rng::new(seed).fork("random-subnet");
    let groups = reference
        .groups
        .iter()
        .map(|(name, bits)| {
            let kept = bits.iter().filter(|&&b| b != 0).count();
            let mut out = vec![0u8; bits.len()];
            for idx in rng.sample_distinct(bits.len(), kept) {
                out[idx] = 1;
            }
            (name.clone(), out)
        })
        .collect();
    BinaryMask { groups }
}

/// Random subnetwork with the reference's per-group counts, sampled only
/// from positions the reference excludes; overlap is zero by construction.
pub fn sample_complement_subnet(
    reference: &BinaryMask,
    seed: u64,
) -> Result<BinaryMask, TransferError> {
    let mut rng = Rng::new(seed).fork("complement-subnet");
    let mut groups = Vec::with_capacity(reference.groups.len());
    for (name, bits) in &reference.groups {
        let kept = bits.iter().filter(|&&b| b != 0).count();
        let zeros: Vec<usize> = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 0)
            .map(|(i, _)| i)
            .collect();
        if kept > zeros.len() {
            return Err(TransferError::ComplementInfeasible {
                group: name.clone(),
                kept,
                zeros: zeros.len(),
            });
        }
        let mut out = vec![0u8; bits.len()];
        for pick in rng.sample_distinct(zeros.len(), kept) {
            out[zeros[pick]] = 1;
        }
        groups.push((name.clone(), out));
    }
    Ok(BinaryMask { groups })
}

#[derive(Clone, Debug)]
pub struct TransferOutcome {
    pub history: Vec<train::EpochRecord>,
    pub best_epoch: usize,
    /// Test accuracy of the best-eval checkpoint; present only when the
    /// run finished cleanly.
    pub test_accuracy: Option<f32>,
    pub status: RunStatus,
    pub final_params: ModelParams,
    pub best_params: ModelParams,
}

/// Executes one transfer run end to end: assembles the plan's model, trains
/// it, verifies frozen entries stayed bit-identical, and reports the test
/// accuracy of the best-eval checkpoint.
pub fn run_transfer(
    plan: &TransferPlan,
    original: &ModelParams,
    model_cfg: &ModelConfig,
    train_tokens: &[u32],
    eval_tokens: &[u32],
    test_tokens: &[u32],
    train_cfg: &TrainConfig,
) -> Result<TransferOutcome, TransferError> {
    let mixed = assemble(plan, original, model_cfg)?;
    let initial = mixed.params.clone();
    let outcome: TrainOutcome = train::train(
        mixed.params,
        Some(&mixed.trainable),
        model_cfg,
        train_tokens,
        eval_tokens,
        train_cfg,
    )?;
    verify_frozen(&initial, &outcome.final_params, &mixed.trainable);
    verify_frozen(&initial, &outcome.best_params, &mixed.trainable);
    let test_accuracy = match outcome.status {
        RunStatus::Ok => Some(model::answer_accuracy(
            &outcome.best_params,
            model_cfg,
            test_tokens,
            None,
        )?),
        RunStatus::Diverged { .. } => None,
    };
    Ok(TransferOutcome {
        history: outcome.history,
        best_epoch: outcome.best_epoch,
        test_accuracy,
        status: outcome.status,
        final_params: outcome.final_params,
        best_params: outcome.best_params,
    })
}

/// Panics if any frozen entry changed; freezing is a correctness contract,
/// so a violation is an internal bug rather than a recoverable error.
fn verify_frozen(initial: &ModelParams, current: &ModelParams, trainable: &Trainability) {
    for (name, bits) in trainable {
        let before = initial.get(name).expect("group exists").data();
        let after = current.get(name).expect("group exists").data();
        for (i, &bit) in bits.iter().enumerate() {
            if bit == 0 {
                assert!(
                    before[i].to_bits() == after[i].to_bits(),
                    "frozen entry mutated in group '{name}' at index {i}"
                );
            }
        }
    }
}
