//! Shared numeric kernels.
//!
//! The autodiff tape and the inference-only forward path both call into
//! these, so the two paths produce bit-identical values. All loops run in a
//! fixed order; none of them reassociate sums, so results are deterministic
//! for a given build.

/// c[m,n] += a[m,k] @ b[k,n]
pub fn matmul_nn_acc(a: &[f32], b: &[f32], c: &mut [f32], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        let c_row = &mut c[i * n..(i + 1) * n];
        for (p, &a_ip) in a_row.iter().enumerate() {
            let b_row = &b[p * n..(p + 1) * n];
            for (c_j, &b_j) in c_row.iter_mut().zip(b_row) {
                *c_j += a_ip * b_j;
            }
        }
    }
}

/// c[m,k] += a[m,n] @ b[k,n]ᵀ  (dot products of rows of `a` with rows of `b`)
pub fn matmul_nt_acc(a: &[f32], b: &[f32], c: &mut [f32], m: usize, n: usize, k: usize) {
    debug_assert_eq!(a.len(), m * n);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * k);
    for i in 0..m {
        let a_row = &a[i * n..(i + 1) * n];
        let c_row = &mut c[i * k..(i + 1) * k];
        for (j, c_ij) in c_row.iter_mut().enumerate() {
            let b_row = &b[j * n..(j + 1) * n];
            *c_ij += dot(a_row, b_row);
        }
    }
}

/// c[k,n] += a[m,k]ᵀ @ b[m,n]
pub fn matmul_tn_acc(a: &[f32], b: &[f32], c: &mut [f32], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    debug_assert_eq!(c.len(), k * n);
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        let b_row = &b[i * n..(i + 1) * n];
        for (p, &a_ip) in a_row.iter().enumerate() {
            let c_row = &mut c[p * n..(p + 1) * n];
            for (c_j, &b_j) in c_row.iter_mut().zip(b_row) {
                *c_j += a_ip * b_j;
            }
        }
    }
}

/// Dot product with four accumulators. The fixed split keeps the summation
/// order deterministic while letting the compiler vectorize each lane.
fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f32; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        for lane in 0..4 {
            acc[lane] += a[i * 4 + lane] * b[i * 4 + lane];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in chunks * 4..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn sigmoid(x: f32) -> f32 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::expf(-x))
    } else {
        let e = libm::expf(x);
        e / (1.0 + e)
    }
}

const GELU_SQRT_2_OVER_PI: f32 = 0.797_884_6;
const GELU_CUBIC: f32 = 0.044_715;

/// GELU, tanh approximation (the GPT-2 variant).
pub fn gelu(x: f32) -> f32 {
    let u = GELU_SQRT_2_OVER_PI * (x + GELU_CUBIC * x * x * x);
    0.5 * x * (1.0 + libm::tanhf(u))
}

pub fn gelu_grad(x: f32) -> f32 {
    let u = GELU_SQRT_2_OVER_PI * (x + GELU_CUBIC * x * x * x);
    let t = libm::tanhf(u);
    let du = GELU_SQRT_2_OVER_PI * (1.0 + 3.0 * GELU_CUBIC * x * x);
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du
}

pub const LAYER_NORM_EPS: f32 = 1e-5;

/// Per-row layer norm with affine output. Writes normalized values before
/// the affine map into `xhat` and the reciprocal std into `inv_std`
/// (both needed by the backward pass).
#[allow(clippy::too_many_arguments)]
pub fn layer_norm_forward(
    x: &[f32],
    gain: &[f32],
    bias: &[f32],
    out: &mut [f32],
    xhat: &mut [f32],
    inv_std: &mut [f32],
    rows: usize,
    cols: usize,
) {
    for r in 0..rows {
        let row = &x[r * cols..(r + 1) * cols];
        let mut mean = 0.0f32;
        for &v in row {
            mean += v;
        }
        mean /= cols as f32;
        let mut var = 0.0f32;
        for &v in row {
            let d = v - mean;
            var += d * d;
        }
        var /= cols as f32;
        let inv = 1.0 / libm::sqrtf(var + LAYER_NORM_EPS);
        inv_std[r] = inv;
        for j in 0..cols {
            let h = (row[j] - mean) * inv;
            xhat[r * cols + j] = h;
            out[r * cols + j] = h * gain[j] + bias[j];
        }
    }
}

/// Backward of `layer_norm_forward`. Accumulates into the gradient slices.
#[allow(clippy::too_many_arguments)]
pub fn layer_norm_backward(
    dout: &[f32],
    gain: &[f32],
    xhat: &[f32],
    inv_std: &[f32],
    dx: &mut [f32],
    dgain: &mut [f32],
    dbias: &mut [f32],
    rows: usize,
    cols: usize,
) {
    for r in 0..rows {
        let dout_row = &dout[r * cols..(r + 1) * cols];
        let xhat_row = &xhat[r * cols..(r + 1) * cols];
        let mut sum_dh = 0.0f32;
        let mut sum_dh_xhat = 0.0f32;
        for j in 0..cols {
            let dh = dout_row[j] * gain[j];
            sum_dh += dh;
            sum_dh_xhat += dh * xhat_row[j];
            dgain[j] += dout_row[j] * xhat_row[j];
            dbias[j] += dout_row[j];
        }
        let mean_dh = sum_dh / cols as f32;
        let mean_dh_xhat = sum_dh_xhat / cols as f32;
        let inv = inv_std[r];
        for j in 0..cols {
            let dh = dout_row[j] * gain[j];
            dx[r * cols + j] += inv * (dh - mean_dh - xhat_row[j] * mean_dh_xhat);
        }
    }
}

/// Causal multi-head self-attention over packed qkv rows.
///
/// `qkv` is `[batch * seq, 3 * d_model]` with the q, k, v projections
/// concatenated along the feature axis. Writes the per-head attention
/// weights (lower-triangular, row-softmaxed) into `weights`, laid out as
/// `[batch, head, t, t']`, for use by the backward pass.
pub fn attention_forward(
    qkv: &[f32],
    out: &mut [f32],
    weights: &mut [f32],
    batch: usize,
    seq: usize,
    d_model: usize,
    n_heads: usize,
) {
    let dh = d_model / n_heads;
    let scale = 1.0 / libm::sqrtf(dh as f32);
    let stride = 3 * d_model;
    for b in 0..batch {
        for h in 0..n_heads {
            let w_base = ((b * n_heads) + h) * seq * seq;
            for t in 0..seq {
                let q = &qkv[(b * seq + t) * stride + h * dh..][..dh];
                // Scores over keys 0..=t, softmaxed in place.
                let mut scores = [0.0f32; 16];
                debug_assert!(seq <= 16);
                let mut max = f32::NEG_INFINITY;
                for tp in 0..=t {
                    let k = &qkv[(b * seq + tp) * stride + d_model + h * dh..][..dh];
                    let mut s = 0.0f32;
                    for i in 0..dh {
                        s += q[i] * k[i];
                    }
                    s *= scale;
                    scores[tp] = s;
                    if s > max {
                        max = s;
                    }
                }
                let mut denom = 0.0f32;
                for s in scores.iter_mut().take(t + 1) {
                    *s = libm::expf(*s - max);
                    denom += *s;
                }
                let inv = 1.0 / denom;
                let out_row = &mut out[(b * seq + t) * d_model + h * dh..][..dh];
                for tp in 0..=t {
                    let w = scores[tp] * inv;
                    weights[w_base + t * seq + tp] = w;
                    let v = &qkv[(b * seq + tp) * stride + 2 * d_model + h * dh..][..dh];
                    for i in 0..dh {
                        out_row[i] += w * v[i];
                    }
                }
            }
        }
    }
}

/// Backward of `attention_forward`; accumulates into `dqkv`.
#[allow(clippy::too_many_arguments)]
pub fn attention_backward(
    qkv: &[f32],
    weights: &[f32],
    dout: &[f32],
    dqkv: &mut [f32],
    batch: usize,
    seq: usize,
    d_model: usize,
    n_heads: usize,
) {
    let dh = d_model / n_heads;
    let scale = 1.0 / libm::sqrtf(dh as f32);
    let stride = 3 * d_model;
    for b in 0..batch {
        for h in 0..n_heads {
            let w_base = ((b * n_heads) + h) * seq * seq;
            for t in 0..seq {
                let dout_row = &dout[(b * seq + t) * d_model + h * dh..][..dh];
                // dv and dw from out_t = sum_{t'} w[t,t'] v_{t'}
                let mut dw = [0.0f32; 16];
                for tp in 0..=t {
                    let w = weights[w_base + t * seq + tp];
                    let v = &qkv[(b * seq + tp) * stride + 2 * d_model + h * dh..][..dh];
                    let dv = &mut dqkv[(b * seq + tp) * stride + 2 * d_model + h * dh..][..dh];
                    let mut acc = 0.0f32;
                    for i in 0..dh {
                        dv[i] += w * dout_row[i];
                        acc += v[i] * dout_row[i];
                    }
                    dw[tp] = acc;
                }
                // Softmax backward: ds = w * (dw - sum_u w_u dw_u)
                let mut wdw = 0.0f32;
                for tp in 0..=t {
                    wdw += weights[w_base + t * seq + tp] * dw[tp];
                }
                for tp in 0..=t {
                    let ds = weights[w_base + t * seq + tp] * (dw[tp] - wdw) * scale;
                    let k = &qkv[(b * seq + tp) * stride + d_model + h * dh..][..dh];
                    let q = &qkv[(b * seq + t) * stride + h * dh..][..dh];
                    // Split borrows: q-grad and k-grad live in different rows
                    // unless t == tp, so index directly.
                    for i in 0..dh {
                        dqkv[(b * seq + t) * stride + h * dh + i] += ds * k[i];
                        dqkv[(b * seq + tp) * stride + d_model + h * dh + i] += ds * q[i];
                    }
                }
            }
        }
    }
}

/// Mean cross-entropy over `(row, class)` pairs of a logits matrix.
/// Returns the loss; the gradient is handled by the tape op.
pub fn cross_entropy_mean(logits: &[f32], cols: usize, pairs: &[(u32, u32)]) -> f32 {
    let mut total = 0.0f32;
    for &(row, class) in pairs {
        let row = &logits[row as usize * cols..(row as usize + 1) * cols];
        total += log_sum_exp(row) - row[class as usize];
    }
    total / pairs.len() as f32
}

/// log(sum(exp(x))) stabilized by max subtraction.
pub fn log_sum_exp(row: &[f32]) -> f32 {
    let mut max = f32::NEG_INFINITY;
    for &v in row {
        if v > max {
            max = v;
        }
    }
    let mut sum = 0.0f32;
    for &v in row {
        sum += libm::expf(v - max);
    }
    max + libm::logf(sum)
}

/// Writes softmax of one logits row into `out`.
pub fn softmax_row(row: &[f32], out: &mut [f32]) {
    let mut max = f32::NEG_INFINITY;
    for &v in row {
        if v > max {
            max = v;
        }
    }
    let mut sum = 0.0f32;
    for (o, &v) in out.iter_mut().zip(row) {
        let e = libm::expf(v - max);
        *o = e;
        sum += e;
    }
    let inv = 1.0 / sum;
    for o in out.iter_mut() {
        *o *= inv;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn matmul_identity() {
        // [[1,0],[0,1]] x [[5,6],[7,8]] = [[5,6],[7,8]]
        let a = [1.0, 0.0, 0.0, 1.0];
        let b = [5.0, 6.0, 7.0, 8.0];
        let mut c = [0.0; 4];
        matmul_nn_acc(&a, &b, &mut c, 2, 2, 2);
        assert_eq!(c, b);
    }

    #[test]
    fn matmul_row_times_col() {
        // [[1,2]] x [[3],[4]] = [[11]]
        let a = [1.0, 2.0];
        let b = [3.0, 4.0];
        let mut c = [0.0; 1];
        matmul_nn_acc(&a, &b, &mut c, 1, 2, 1);
        assert_eq!(c, [11.0]);
    }

    #[test]
    fn matmul_transposed_variants_agree() {
        // a[2,3], b[3,4]; check nt/tn against nn on explicit transposes.
        let a: Vec<f32> = (0..6).map(|i| i as f32 * 0.5 - 1.0).collect();
        let b: Vec<f32> = (0..12).map(|i| (i as f32).sin()).collect();
        let mut c = vec![0.0; 8];
        matmul_nn_acc(&a, &b, &mut c, 2, 3, 4);

        // nt: a[2,3] @ bt[4,3]^T
        let mut bt = vec![0.0; 12];
        for i in 0..3 {
            for j in 0..4 {
                bt[j * 3 + i] = b[i * 4 + j];
            }
        }
        let mut c2 = vec![0.0; 8];
        matmul_nt_acc(&a, &bt, &mut c2, 2, 3, 4);
        for (x, y) in c.iter().zip(&c2) {
            assert!((x - y).abs() < 1e-6);
        }

        // tn: at[3,2]^T @ b... use at so that at^T = a
        let mut at = vec![0.0; 6];
        for i in 0..2 {
            for j in 0..3 {
                at[j * 2 + i] = a[i * 3 + j];
            }
        }
        let mut c3 = vec![0.0; 8];
        matmul_tn_acc(&at, &b, &mut c3, 3, 2, 4);
        for (x, y) in c.iter().zip(&c3) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(-0.1) - 0.47502).abs() < 1e-5);
        assert!(sigmoid(100.0) > 0.999_999);
        assert!(sigmoid(-100.0) < 1e-6);
    }

    #[test]
    fn gelu_zero() {
        assert_eq!(gelu(0.0), 0.0);
        // Monotone-ish sanity away from zero.
        assert!(gelu(2.0) > 1.9 && gelu(2.0) < 2.0);
        assert!(gelu(-3.0).abs() < 0.01);
    }

    #[test]
    fn log_sum_exp_uniform() {
        let row = [0.5f32; 8];
        let expected = 0.5 + (8.0f32).ln();
        assert!((log_sum_exp(&row) - expected).abs() < 1e-5);
    }

    #[test]
    fn layer_norm_two_values() {
        // x=[1,3] -> [-1, 1] with unit gain, zero bias.
        let x = [1.0, 3.0];
        let gain = [1.0, 1.0];
        let bias = [0.0, 0.0];
        let mut out = [0.0; 2];
        let mut xhat = [0.0; 2];
        let mut inv = [0.0; 1];
        layer_norm_forward(&x, &gain, &bias, &mut out, &mut xhat, &mut inv, 1, 2);
        assert!((out[0] + 1.0).abs() < 1e-4);
        assert!((out[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn layer_norm_constant_row_is_zero() {
        let x = [2.5f32; 4];
        let gain = [1.0f32; 4];
        let bias = [0.0f32; 4];
        let mut out = [9.0; 4];
        let mut xhat = [0.0; 4];
        let mut inv = [0.0; 1];
        layer_norm_forward(&x, &gain, &bias, &mut out, &mut xhat, &mut inv, 1, 4);
        for v in out {
            assert_eq!(v, 0.0);
        }
    }
}
