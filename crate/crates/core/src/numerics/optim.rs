//! AdamW (decoupled weight decay) and SGD with momentum.
//!
//! Updates can be restricted by a per-entry trainability mask: a frozen
//! entry is skipped entirely (no moment update, no decay), which keeps its
//! value bit-identical across any number of steps.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::numerics::array::Array;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizerKind {
    AdamW {
        beta1: f32,
        beta2: f32,
        eps: f32,
        weight_decay: f32,
    },
    SgdMomentum {
        momentum: f32,
        weight_decay: f32,
    },
}

impl OptimizerKind {
    /// AdamW with the betas used throughout the training runs.
    pub fn adamw(weight_decay: f32) -> Self {
        OptimizerKind::AdamW {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
        }
    }

    pub fn sgd(momentum: f32) -> Self {
        OptimizerKind::SgdMomentum {
            momentum,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerError {
    /// A gradient contained NaN or infinity; the trial must abort.
    NonFiniteGrad { group: String, step: u64 },
    ShapeMismatch { group: String },
}

impl fmt::Display for OptimizerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizerError::NonFiniteGrad { group, step } => {
                write!(f, "non-finite gradient for '{group}' at step {step}")
            }
            OptimizerError::ShapeMismatch { group } => {
                write!(f, "gradient/parameter shape mismatch for '{group}'")
            }
        }
    }
}

impl core::error::Error for OptimizerError {}

struct Slots {
    m: Vec<f32>,
    v: Vec<f32>,
}

/// Optimizer state: kind, learning rate, step count and per-group moment
/// buffers keyed by parameter-group name.
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f32,
    step_count: u64,
    slots: BTreeMap<String, Slots>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f32) -> Self {
        assert!(lr > 0.0, "learning rate must be positive");
        Self {
            kind,
            lr,
            step_count: 0,
            slots: BTreeMap::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn lr(&self) -> f32 {
        self.lr
    }

    /// Starts a new optimizer step; call once per batch before the
    /// per-group updates.
    pub fn start_step(&mut self) {
        self.step_count += 1;
    }

    /// Applies one update to a parameter group. `trainable`, when given,
    /// holds one 0/1 flag per entry; entries flagged 0 are left untouched.
    pub fn update(
        &mut self,
        group: &str,
        param: &mut Array,
        grad: &Array,
        trainable: Option<&[u8]>,
    ) -> Result<(), OptimizerError> {
        if !param.same_shape(grad) {
            return Err(OptimizerError::ShapeMismatch {
                group: group.to_string(),
            });
        }
        if let Some(t) = trainable {
            if t.len() != param.len() {
                return Err(OptimizerError::ShapeMismatch {
                    group: group.to_string(),
                });
            }
        }
        if !grad.all_finite() {
            return Err(OptimizerError::NonFiniteGrad {
                group: group.to_string(),
                step: self.step_count,
            });
        }
        let n = param.len();
        let slots = self.slots.entry(group.to_string()).or_insert_with(|| {
            let v_len = match self.kind {
                OptimizerKind::AdamW { .. } => n,
                OptimizerKind::SgdMomentum { .. } => 0,
            };
            Slots {
                m: vec![0.0; n],
                v: vec![0.0; v_len],
            }
        });
        let p = param.data_mut();
        let g = grad.data();
        let live = |i: usize| trainable.is_none_or(|t| t[i] != 0);
        match self.kind {
            OptimizerKind::AdamW {
                beta1,
                beta2,
                eps,
                weight_decay,
            } => {
                let t = self.step_count as i32;
                let bc1 = 1.0 - libm::powf(beta1, t as f32);
                let bc2 = 1.0 - libm::powf(beta2, t as f32);
                for i in 0..n {
                    if !live(i) {
                        continue;
                    }
                    let m = &mut slots.m[i];
                    let v = &mut slots.v[i];
                    *m = beta1 * *m + (1.0 - beta1) * g[i];
                    *v = beta2 * *v + (1.0 - beta2) * g[i] * g[i];
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    p[i] -= self.lr * (m_hat / (libm::sqrtf(v_hat) + eps) + weight_decay * p[i]);
                }
            }
            OptimizerKind::SgdMomentum {
                momentum,
                weight_decay,
            } => {
                for i in 0..n {
                    if !live(i) {
                        continue;
                    }
                    let vel = &mut slots.m[i];
                    let g_eff = g[i] + weight_decay * p[i];
                    *vel = momentum * *vel + g_eff;
                    p[i] -= self.lr * *vel;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_grad_zero_decay_leaves_params() {
        let mut opt = Optimizer::new(OptimizerKind::adamw(0.0), 0.1);
        let mut p = Array::from_vec(&[2], vec![1.0, -2.0]).unwrap();
        let g = Array::zeros(&[2]);
        opt.start_step();
        opt.update("w", &mut p, &g, None).unwrap();
        assert_eq!(p.data(), &[1.0, -2.0]);
    }

    #[test]
    fn first_adamw_step_moves_by_lr() {
        // g = 1, lr = 0.1, no decay: bias-corrected m/sqrt(v) = 1, so the
        // parameter decreases by about lr.
        let mut opt = Optimizer::new(OptimizerKind::adamw(0.0), 0.1);
        let mut p = Array::scalar(0.5);
        let g = Array::scalar(1.0);
        opt.start_step();
        opt.update("w", &mut p, &g, None).unwrap();
        assert!((p.item() - 0.4).abs() < 1e-6, "param {}", p.item());
    }

    #[test]
    fn sgd_momentum_second_step_scales() {
        // Two equal-gradient steps: second delta is lr * g * (1 + mu).
        let mu = 0.9f32;
        let lr = 0.01f32;
        let g_val = 2.0f32;
        let mut opt = Optimizer::new(OptimizerKind::sgd(mu), lr);
        let mut p = Array::scalar(0.0);
        let g = Array::scalar(g_val);
        opt.start_step();
        opt.update("w", &mut p, &g, None).unwrap();
        let after_first = p.item();
        assert!((after_first + lr * g_val).abs() < 1e-7);
        opt.start_step();
        opt.update("w", &mut p, &g, None).unwrap();
        let second_delta = after_first - p.item();
        assert!((second_delta - lr * g_val * (1.0 + mu)).abs() < 1e-6);
    }

    #[test]
    fn frozen_entries_bit_exact() {
        let mut opt = Optimizer::new(OptimizerKind::adamw(0.01), 0.05);
        let mut p = Array::from_vec(&[4], vec![0.25, -1.5, 3.0, 0.125]).unwrap();
        let before = p.clone();
        let g = Array::from_vec(&[4], vec![1.0, -2.0, 0.5, 4.0]).unwrap();
        let trainable = [0u8, 1, 0, 1];
        for _ in 0..10 {
            opt.start_step();
            opt.update("w", &mut p, &g, Some(&trainable)).unwrap();
        }
        assert_eq!(p.data()[0].to_bits(), before.data()[0].to_bits());
        assert_eq!(p.data()[2].to_bits(), before.data()[2].to_bits());
        assert_ne!(p.data()[1].to_bits(), before.data()[1].to_bits());
        assert_ne!(p.data()[3].to_bits(), before.data()[3].to_bits());
    }

    #[test]
    fn nan_gradient_is_an_error() {
        let mut opt = Optimizer::new(OptimizerKind::adamw(0.0), 0.1);
        let mut p = Array::scalar(1.0);
        let g = Array::scalar(f32::NAN);
        opt.start_step();
        let err = opt.update("w", &mut p, &g, None).unwrap_err();
        assert!(matches!(err, OptimizerError::NonFiniteGrad { .. }));
    }
}
