//! Reverse-mode automatic differentiation on a flat tape.
//!
//! Nodes are appended in execution order, which is already a topological
//! order of the DAG; `backward` walks the tape once in reverse and
//! accumulates gradients additively into every node that needs them.
//! Tapes are built per batch and discarded after the optimizer step.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::numerics::array::{Array, ShapeError};
use crate::numerics::kernels;

/// Handle to a tape node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone, PartialEq)]
pub enum AutodiffError {
    Shape(ShapeError),
    /// `backward` called on a non-scalar node.
    NonScalarLoss { len: usize },
    /// A lookup or target index is outside the valid range.
    IndexOutOfRange { index: usize, limit: usize },
}

impl fmt::Display for AutodiffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AutodiffError::Shape(e) => write!(f, "{e}"),
            AutodiffError::NonScalarLoss { len } => {
                write!(f, "backward requires a scalar loss, got {len} elements")
            }
            AutodiffError::IndexOutOfRange { index, limit } => {
                write!(f, "index {index} out of range (limit {limit})")
            }
        }
    }
}

impl core::error::Error for AutodiffError {}

impl From<ShapeError> for AutodiffError {
    fn from(e: ShapeError) -> Self {
        AutodiffError::Shape(e)
    }
}

enum Op {
    Leaf,
    Matmul {
        a: Var,
        b: Var,
    },
    Add {
        a: Var,
        b: Var,
    },
    /// Row-broadcast add: x is [r, n], bias is [n].
    AddBias {
        x: Var,
        bias: Var,
    },
    Mul {
        a: Var,
        b: Var,
    },
    Scale {
        x: Var,
        factor: f32,
    },
    Sigmoid {
        x: Var,
    },
    Gelu {
        x: Var,
    },
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        xhat: Vec<f32>,
        inv_std: Vec<f32>,
    },
    CausalAttention {
        qkv: Var,
        batch: usize,
        seq: usize,
        n_heads: usize,
        weights: Vec<f32>,
    },
    /// Row gather: out[i] = table[ids[i]].
    Embedding {
        table: Var,
        ids: Vec<u32>,
    },
    /// Mean of -log softmax(logits[row])[class] over the given pairs.
    CrossEntropyMean {
        logits: Var,
        pairs: Vec<(u32, u32)>,
    },
    Sum {
        x: Var,
    },
}

struct Node {
    value: Array,
    grad: Option<Array>,
    needs_grad: bool,
    op: Op,
}

/// Flat autodiff tape. Append-only; node order is the topological order.
pub struct Tape {
    nodes: Vec<Node>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    /// Trainable leaf: participates in backward.
    pub fn leaf(&mut self, value: Array) -> Var {
        self.push(value, true, Op::Leaf)
    }

    /// Constant leaf: backward never reaches it.
    pub fn constant(&mut self, value: Array) -> Var {
        self.push(value, false, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Array {
        &self.nodes[v.0].value
    }

    /// Gradient of a node after `backward`; `None` for nodes that do not
    /// need gradients or before backward has run.
    pub fn grad(&self, v: Var) -> Option<&Array> {
        self.nodes[v.0].grad.as_ref()
    }

    pub fn take_grad(&mut self, v: Var) -> Option<Array> {
        self.nodes[v.0].grad.take()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array, needs_grad: bool, op: Op) -> Var {
        debug_assert!(
            value.all_finite(),
            "non-finite value produced in forward pass"
        );
        self.nodes.push(Node {
            value,
            grad: None,
            needs_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    /// Adds `delta` elementwise into the gradient buffer of `v`.
    fn accumulate(&mut self, v: Var, delta: &Array) {
        let g = self.nodes[v.0]
            .grad
            .as_mut()
            .expect("gradient buffer missing for node that needs grad");
        debug_assert!(g.same_shape(delta));
        for (g, &d) in g.data_mut().iter_mut().zip(delta.data()) {
            *g += d;
        }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (av, bv) = (self.value(a), self.value(b));
        let (m, k) = (av.rows(), av.cols());
        let (k2, n) = (bv.rows(), bv.cols());
        if k != k2 {
            return Err(ShapeError {
                expected: vec![k, n],
                got: vec![k2, n],
                context: "matmul: inner dimensions disagree",
            }
            .into());
        }
        let mut out = Array::zeros(&[m, n]);
        kernels::matmul_nn_acc(av.data(), bv.data(), out.data_mut(), m, k, n);
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(out, needs, Op::Matmul { a, b }))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (av, bv) = (self.value(a), self.value(b));
        if !av.same_shape(bv) {
            return Err(ShapeError {
                expected: av.shape().to_vec(),
                got: bv.shape().to_vec(),
                context: "add: shape mismatch",
            }
            .into());
        }
        let mut out = av.clone();
        for (o, &x) in out.data_mut().iter_mut().zip(bv.data()) {
            *o += x;
        }
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(out, needs, Op::Add { a, b }))
    }

    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var, AutodiffError> {
        let (xv, bv) = (self.value(x), self.value(bias));
        let n = xv.cols();
        if bv.len() != n {
            return Err(ShapeError {
                expected: vec![n],
                got: bv.shape().to_vec(),
                context: "add_bias: bias length must match columns",
            }
            .into());
        }
        let rows = xv.rows();
        let mut out = xv.clone();
        {
            let data = out.data_mut();
            let b = bv.data();
            for r in 0..rows {
                for j in 0..n {
                    data[r * n + j] += b[j];
                }
            }
        }
        let needs = self.needs(x) || self.needs(bias);
        Ok(self.push(out, needs, Op::AddBias { x, bias }))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (av, bv) = (self.value(a), self.value(b));
        if !av.same_shape(bv) {
            return Err(ShapeError {
                expected: av.shape().to_vec(),
                got: bv.shape().to_vec(),
                context: "mul: shape mismatch",
            }
            .into());
        }
        let mut out = av.clone();
        for (o, &x) in out.data_mut().iter_mut().zip(bv.data()) {
            *o *= x;
        }
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(out, needs, Op::Mul { a, b }))
    }

    pub fn scale(&mut self, x: Var, factor: f32) -> Var {
        let mut out = self.value(x).clone();
        for o in out.data_mut() {
            *o *= factor;
        }
        let needs = self.needs(x);
        self.push(out, needs, Op::Scale { x, factor })
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        for o in out.data_mut() {
            *o = kernels::sigmoid(*o);
        }
        let needs = self.needs(x);
        self.push(out, needs, Op::Sigmoid { x })
    }

    pub fn gelu(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        for o in out.data_mut() {
            *o = kernels::gelu(*o);
        }
        let needs = self.needs(x);
        self.push(out, needs, Op::Gelu { x })
    }

    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var) -> Result<Var, AutodiffError> {
        let (xv, gv, bv) = (self.value(x), self.value(gain), self.value(bias));
        let cols = xv.cols();
        if gv.len() != cols || bv.len() != cols {
            return Err(ShapeError {
                expected: vec![cols],
                got: vec![gv.len(), bv.len()],
                context: "layer_norm: gain/bias must match last dimension",
            }
            .into());
        }
        let rows = xv.rows();
        let mut out = Array::zeros(xv.shape());
        let mut xhat = vec![0.0f32; rows * cols];
        let mut inv_std = vec![0.0f32; rows];
        kernels::layer_norm_forward(
            xv.data(),
            gv.data(),
            bv.data(),
            out.data_mut(),
            &mut xhat,
            &mut inv_std,
            rows,
            cols,
        );
        let needs = self.needs(x) || self.needs(gain) || self.needs(bias);
        Ok(self.push(
            out,
            needs,
            Op::LayerNorm {
                x,
                gain,
                bias,
                xhat,
                inv_std,
            },
        ))
    }

    /// Causal multi-head self-attention over packed qkv rows
    /// (`[batch * seq, 3 * d_model]`).
    pub fn causal_attention(
        &mut self,
        qkv: Var,
        seq: usize,
        n_heads: usize,
    ) -> Result<Var, AutodiffError> {
        let qkvv = self.value(qkv);
        let rows = qkvv.rows();
        let three_d = qkvv.cols();
        if !three_d.is_multiple_of(3) || !rows.is_multiple_of(seq) {
            return Err(ShapeError {
                expected: vec![seq, 3],
                got: vec![rows, three_d],
                context: "causal_attention: rows must tile seq and cols must be 3*d_model",
            }
            .into());
        }
        let d_model = three_d / 3;
        if !d_model.is_multiple_of(n_heads) {
            return Err(ShapeError {
                expected: vec![n_heads],
                got: vec![d_model],
                context: "causal_attention: d_model must be divisible by n_heads",
            }
            .into());
        }
        let batch = rows / seq;
        let mut out = Array::zeros(&[rows, d_model]);
        let mut weights = vec![0.0f32; batch * n_heads * seq * seq];
        kernels::attention_forward(
            qkvv.data(),
            out.data_mut(),
            &mut weights,
            batch,
            seq,
            d_model,
            n_heads,
        );
        let needs = self.needs(qkv);
        Ok(self.push(
            out,
            needs,
            Op::CausalAttention {
                qkv,
                batch,
                seq,
                n_heads,
                weights,
            },
        ))
    }

    /// Row gather from an embedding table.
    pub fn embedding(&mut self, table: Var, ids: &[u32]) -> Result<Var, AutodiffError> {
        let tv = self.value(table);
        let vocab = tv.rows();
        let dim = tv.cols();
        for &id in ids {
            if id as usize >= vocab {
                return Err(AutodiffError::IndexOutOfRange {
                    index: id as usize,
                    limit: vocab,
                });
            }
        }
        let mut out = Array::zeros(&[ids.len(), dim]);
        {
            let data = out.data_mut();
            for (i, &id) in ids.iter().enumerate() {
                data[i * dim..(i + 1) * dim]
                    .copy_from_slice(&tv.data()[id as usize * dim..(id as usize + 1) * dim]);
            }
        }
        let needs = self.needs(table);
        Ok(self.push(
            out,
            needs,
            Op::Embedding {
                table,
                ids: ids.to_vec(),
            },
        ))
    }

    /// Mean cross-entropy of softmaxed logits rows against target classes.
    pub fn cross_entropy_mean(
        &mut self,
        logits: Var,
        pairs: &[(u32, u32)],
    ) -> Result<Var, AutodiffError> {
        let lv = self.value(logits);
        let (rows, cols) = (lv.rows(), lv.cols());
        if pairs.is_empty() {
            return Err(ShapeError {
                expected: vec![1],
                got: vec![0],
                context: "cross_entropy_mean: empty target set",
            }
            .into());
        }
        for &(r, c) in pairs {
            if r as usize >= rows {
                return Err(AutodiffError::IndexOutOfRange {
                    index: r as usize,
                    limit: rows,
                });
            }
            if c as usize >= cols {
                return Err(AutodiffError::IndexOutOfRange {
                    index: c as usize,
                    limit: cols,
                });
            }
        }
        let loss = kernels::cross_entropy_mean(lv.data(), cols, pairs);
        let needs = self.needs(logits);
        Ok(self.push(
            Array::scalar(loss),
            needs,
            Op::CrossEntropyMean {
                logits,
                pairs: pairs.to_vec(),
            },
        ))
    }

    /// Sum of all elements.
    pub fn sum(&mut self, x: Var) -> Var {
        let mut total = 0.0f32;
        for &v in self.value(x).data() {
            total += v;
        }
        let needs = self.needs(x);
        self.push(Array::scalar(total), needs, Op::Sum { x })
    }

    /// Reverse pass from a scalar loss. Every node with `needs_grad` that
    /// the loss depends on receives its accumulated gradient.
    pub fn backward(&mut self, loss: Var) -> Result<(), AutodiffError> {
        if self.value(loss).len() != 1 {
            return Err(AutodiffError::NonScalarLoss {
                len: self.value(loss).len(),
            });
        }
        for node in &mut self.nodes {
            node.grad = if node.needs_grad {
                Some(Array::zeros(node.value.shape()))
            } else {
                None
            };
        }
        if !self.nodes[loss.0].needs_grad {
            // Loss does not depend on any trainable leaf; nothing to do.
            return Ok(());
        }
        self.nodes[loss.0].grad.as_mut().unwrap().data_mut()[0] = 1.0;

        for i in (0..=loss.0).rev() {
            if !self.nodes[i].needs_grad {
                continue;
            }
            // Detach this node's op and output gradient so input nodes can
            // be borrowed freely while propagating.
            let op = core::mem::replace(&mut self.nodes[i].op, Op::Leaf);
            let dout = self.nodes[i].grad.take().unwrap();
            self.propagate(&op, &dout);
            self.nodes[i].grad = Some(dout);
            self.nodes[i].op = op;
        }
        Ok(())
    }

    fn propagate(&mut self, op: &Op, dout: &Array) {
        match op {
            Op::Leaf => {}
            Op::Matmul { a, b } => {
                let (m, k) = (self.value(*a).rows(), self.value(*a).cols());
                let n = self.value(*b).cols();
                if self.needs(*a) {
                    // da = dout @ b^T
                    let mut da = Array::zeros(&[m, k]);
                    kernels::matmul_nt_acc(
                        dout.data(),
                        self.value(*b).data(),
                        da.data_mut(),
                        m,
                        n,
                        k,
                    );
                    self.accumulate(*a, &da);
                }
                if self.needs(*b) {
                    // db = a^T @ dout
                    let mut db = Array::zeros(&[k, n]);
                    kernels::matmul_tn_acc(
                        self.value(*a).data(),
                        dout.data(),
                        db.data_mut(),
                        m,
                        k,
                        n,
                    );
                    self.accumulate(*b, &db);
                }
            }
            Op::Add { a, b } => {
                if self.needs(*a) {
                    self.accumulate(*a, dout);
                }
                if self.needs(*b) {
                    self.accumulate(*b, dout);
                }
            }
            Op::AddBias { x, bias } => {
                if self.needs(*x) {
                    self.accumulate(*x, dout);
                }
                if self.needs(*bias) {
                    let n = self.value(*bias).len();
                    let mut db = Array::zeros(&[n]);
                    {
                        let dbd = db.data_mut();
                        for (idx, &d) in dout.data().iter().enumerate() {
                            dbd[idx % n] += d;
                        }
                    }
                    self.accumulate(*bias, &db);
                }
            }
            Op::Mul { a, b } => {
                if self.needs(*a) {
                    let mut da = dout.clone();
                    for (d, &bv) in da.data_mut().iter_mut().zip(self.value(*b).data()) {
                        *d *= bv;
                    }
                    self.accumulate(*a, &da);
                }
                if self.needs(*b) {
                    let mut db = dout.clone();
                    for (d, &av) in db.data_mut().iter_mut().zip(self.value(*a).data()) {
                        *d *= av;
                    }
                    self.accumulate(*b, &db);
                }
            }
            Op::Scale { x, factor } => {
                if self.needs(*x) {
                    let mut dx = dout.clone();
                    for d in dx.data_mut() {
                        *d *= *factor;
                    }
                    self.accumulate(*x, &dx);
                }
            }
            Op::Sigmoid { x } => {
                if self.needs(*x) {
                    // d sigma = sigma (1 - sigma); the output value holds sigma.
                    // The output of this op is the node being propagated, whose
                    // value is reachable via grad shape equality with dout; the
                    // sigma values were stored as the node's value, so recompute
                    // from the input instead to avoid carrying the node index.
                    let mut dx = dout.clone();
                    for (d, &v) in dx.data_mut().iter_mut().zip(self.value(*x).data()) {
                        let s = kernels::sigmoid(v);
                        *d *= s * (1.0 - s);
                    }
                    self.accumulate(*x, &dx);
                }
            }
            Op::Gelu { x } => {
                if self.needs(*x) {
                    let mut dx = dout.clone();
                    for (d, &v) in dx.data_mut().iter_mut().zip(self.value(*x).data()) {
                        *d *= kernels::gelu_grad(v);
                    }
                    self.accumulate(*x, &dx);
                }
            }
            Op::LayerNorm {
                x,
                gain,
                bias,
                xhat,
                inv_std,
            } => {
                let rows = dout.rows();
                let cols = dout.cols();
                let mut dx = Array::zeros(&[rows, cols]);
                let mut dgain = Array::zeros(&[cols]);
                let mut dbias = Array::zeros(&[cols]);
                kernels::layer_norm_backward(
                    dout.data(),
                    self.value(*gain).data(),
                    xhat,
                    inv_std,
                    dx.data_mut(),
                    dgain.data_mut(),
                    dbias.data_mut(),
                    rows,
                    cols,
                );
                if self.needs(*x) {
                    self.accumulate(*x, &dx);
                }
                if self.needs(*gain) {
                    self.accumulate(*gain, &dgain);
                }
                if self.needs(*bias) {
                    self.accumulate(*bias, &dbias);
                }
            }
            Op::CausalAttention {
                qkv,
                batch,
                seq,
                n_heads,
                weights,
            } => {
                if self.needs(*qkv) {
                    let d_model = self.value(*qkv).cols() / 3;
                    let mut dqkv = Array::zeros(self.value(*qkv).shape());
                    kernels::attention_backward(
                        self.value(*qkv).data(),
                        weights,
                        dout.data(),
                        dqkv.data_mut(),
                        *batch,
                        *seq,
                        d_model,
                        *n_heads,
                    );
                    self.accumulate(*qkv, &dqkv);
                }
            }
            Op::Embedding { table, ids } => {
                if self.needs(*table) {
                    let dim = self.value(*table).cols();
                    let mut dt = Array::zeros(self.value(*table).shape());
                    {
                        let dtd = dt.data_mut();
                        for (r, &id) in ids.iter().enumerate() {
                            let src = &dout.data()[r * dim..(r + 1) * dim];
                            let dst = &mut dtd[id as usize * dim..(id as usize + 1) * dim];
                            for (d, &s) in dst.iter_mut().zip(src) {
                                *d += s;
                            }
                        }
                    }
                    self.accumulate(*table, &dt);
                }
            }
            Op::CrossEntropyMean { logits, pairs } => {
                if self.needs(*logits) {
                    let d = dout.data()[0] / pairs.len() as f32;
                    let cols = self.value(*logits).cols();
                    let mut dl = Array::zeros(self.value(*logits).shape());
                    let mut probs = vec![0.0f32; cols];
                    {
                        let src = self.value(*logits).data();
                        // Recompute softmax per target row; rows can repeat, in
                        // which case contributions accumulate.
                        let dld = dl.data_mut();
                        for &(row, class) in pairs {
                            let r = row as usize;
                            kernels::softmax_row(&src[r * cols..(r + 1) * cols], &mut probs);
                            let grow = &mut dld[r * cols..(r + 1) * cols];
                            for (gv, &p) in grow.iter_mut().zip(&probs) {
                                *gv += d * p;
                            }
                            grow[class as usize] -= d;
                        }
                    }
                    self.accumulate(*logits, &dl);
                }
            }
            Op::Sum { x } => {
                if self.needs(*x) {
                    let d = dout.data()[0];
                    let delta = Array::full(self.value(*x).shape(), d);
                    self.accumulate(*x, &delta);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn quadratic_gradient() {
        // loss = sum(w * w), w = [1, 2] -> grad [2, 4]
        let mut tape = Tape::new();
        let w = tape.leaf(Array::from_vec(&[2], vec![1.0, 2.0]).unwrap());
        let sq = tape.mul(w, w).unwrap();
        let loss = tape.sum(sq);
        tape.backward(loss).unwrap();
        assert_eq!(tape.grad(w).unwrap().data(), &[2.0, 4.0]);
    }

    #[test]
    fn diamond_graph_accumulates() {
        // y = x*x; loss = sum(y + y) -> dloss/dx = 4x
        let mut tape = Tape::new();
        let x = tape.leaf(Array::from_vec(&[2], vec![3.0, -1.0]).unwrap());
        let y = tape.mul(x, x).unwrap();
        let z = tape.add(y, y).unwrap();
        let loss = tape.sum(z);
        tape.backward(loss).unwrap();
        assert_eq!(tape.grad(x).unwrap().data(), &[12.0, -4.0]);
    }

    #[test]
    fn constant_leaf_gets_no_grad() {
        let mut tape = Tape::new();
        let w = tape.leaf(Array::from_vec(&[2], vec![1.0, 2.0]).unwrap());
        let c = tape.constant(Array::from_vec(&[2], vec![5.0, 5.0]).unwrap());
        let p = tape.mul(w, c).unwrap();
        let loss = tape.sum(p);
        tape.backward(loss).unwrap();
        assert!(tape.grad(c).is_none());
        assert_eq!(tape.grad(w).unwrap().data(), &[5.0, 5.0]);
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut tape = Tape::new();
        let w = tape.leaf(Array::from_vec(&[2], vec![1.0, 2.0]).unwrap());
        let err = tape.backward(w).unwrap_err();
        assert!(matches!(err, AutodiffError::NonScalarLoss { len: 2 }));
    }

    #[test]
    fn matmul_shape_mismatch_rejected() {
        let mut tape = Tape::new();
        let a = tape.leaf(Array::zeros(&[2, 3]));
        let b = tape.leaf(Array::zeros(&[4, 2]));
        assert!(tape.matmul(a, b).is_err());
    }

    #[test]
    fn cross_entropy_uniform_logits() {
        // Equal logits over V classes -> ln(V).
        let v = 101;
        let mut tape = Tape::new();
        let logits = tape.leaf(Array::zeros(&[1, v]));
        let loss = tape.cross_entropy_mean(logits, &[(0, 7)]).unwrap();
        assert!((tape.value(loss).item() - (v as f32).ln()).abs() < 1e-5);
    }

    #[test]
    fn cross_entropy_confident_logits() {
        // logits = [10, -10], target 0 -> about 2.06e-9.
        let mut tape = Tape::new();
        let logits = tape.leaf(Array::from_vec(&[1, 2], vec![10.0, -10.0]).unwrap());
        let loss = tape.cross_entropy_mean(logits, &[(0, 0)]).unwrap();
        let got = tape.value(loss).item();
        assert!((0.0..1e-7).contains(&got), "loss {got}");
    }

    #[test]
    fn cross_entropy_gradient_is_softmax_minus_onehot() {
        let mut tape = Tape::new();
        let logits = tape.leaf(Array::from_vec(&[1, 3], vec![0.3, -0.2, 1.1]).unwrap());
        let loss = tape.cross_entropy_mean(logits, &[(0, 2)]).unwrap();
        tape.backward(loss).unwrap();
        let mut probs = vec![0.0f32; 3];
        kernels::softmax_row(&[0.3, -0.2, 1.1], &mut probs);
        let grad = tape.grad(logits).unwrap().data().to_vec();
        for (j, &g) in grad.iter().enumerate() {
            let expected = probs[j] - if j == 2 { 1.0 } else { 0.0 };
            assert!((g - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn cross_entropy_target_out_of_range() {
        let mut tape = Tape::new();
        let logits = tape.leaf(Array::zeros(&[1, 3]));
        let err = tape.cross_entropy_mean(logits, &[(0, 3)]).unwrap_err();
        assert!(matches!(err, AutodiffError::IndexOutOfRange { .. }));
    }

    #[test]
    fn embedding_out_of_range() {
        let mut tape = Tape::new();
        let table = tape.leaf(Array::zeros(&[4, 2]));
        assert!(tape.embedding(table, &[4]).is_err());
    }

    #[test]
    fn sigmoid_forward_values() {
        let mut tape = Tape::new();
        let x = tape.leaf(Array::from_vec(&[2], vec![0.0, -0.1]).unwrap());
        let y = tape.sigmoid(x);
        let out = tape.value(y).data();
        assert_eq!(out[0], 0.5);
        assert!((out[1] - 0.47502).abs() < 1e-5);
    }
}
