//! Modular-arithmetic tasks and dataset construction.
//!
//! A task is a polynomial in two inputs reduced mod a prime p; rows are
//! encoded as the four tokens `a b <sep> answer` with the separator id set
//! to `input_max` (one past the largest number token). Generation is pure
//! and deterministic per seed.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::model::SEQ_LEN;
use crate::numerics::rng::Rng;

/// One monomial: coeff * a^a_pow * b^b_pow. Coefficients may be negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: i64,
    pub a_pow: u32,
    pub b_pow: u32,
}

/// A polynomial-over-two-inputs modular computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskSpec {
    pub terms: Vec<Term>,
    pub modulus: u32,
    pub input_max: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskError {
    EmptySpec,
    /// More rows requested than distinct pairs remain.
    Infeasible { requested: usize, available: usize },
    ValueOutOfRange { value: u32, limit: u32 },
}

impl fmt::Display for TaskError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskError::EmptySpec => write!(f, "task needs at least one term"),
            TaskError::Infeasible {
                requested,
                available,
            } => write!(f, "requested {requested} rows but only {available} available"),
            TaskError::ValueOutOfRange { value, limit } => {
                write!(f, "value {value} out of range (limit {limit})")
            }
        }
    }
}

impl core::error::Error for TaskError {}

impl TaskSpec {
    pub fn new(terms: &[(i64, u32, u32)], modulus: u32, input_max: u32) -> Result<Self, TaskError> {
        if terms.is_empty() {
            return Err(TaskError::EmptySpec);
        }
        Ok(Self {
            terms: terms
                .iter()
                .map(|&(coeff, a_pow, b_pow)| Term {
                    coeff,
                    a_pow,
                    b_pow,
                })
                .collect(),
            modulus,
            input_max,
        })
    }

    /// T1 := a + ab  (mod p)
    pub fn t1(modulus: u32, input_max: u32) -> Self {
        Self::new(&[(1, 1, 0), (1, 1, 1)], modulus, input_max).unwrap()
    }

    /// T2 := a^2 + ab  (mod p)
    pub fn t2(modulus: u32, input_max: u32) -> Self {
        Self::new(&[(1, 2, 0), (1, 1, 1)], modulus, input_max).unwrap()
    }

    /// S1 := ab  (mod p)
    pub fn s1(modulus: u32, input_max: u32) -> Self {
        Self::new(&[(1, 1, 1)], modulus, input_max).unwrap()
    }

    /// S2 := a  (mod p)
    pub fn s2(modulus: u32, input_max: u32) -> Self {
        Self::new(&[(1, 1, 0)], modulus, input_max).unwrap()
    }

    /// S3 := a^2  (mod p)
    pub fn s3(modulus: u32, input_max: u32) -> Self {
        Self::new(&[(1, 2, 0)], modulus, input_max).unwrap()
    }

    /// Separator token id: one past the largest number token.
    pub fn sep_id(&self) -> u32 {
        self.input_max
    }

    /// Vocabulary size: number tokens plus the separator.
    pub fn vocab_size(&self) -> usize {
        self.input_max as usize + 1
    }

    pub fn total_pairs(&self) -> usize {
        self.input_max as usize * self.input_max as usize
    }

    /// Human-readable formula, e.g. `a + a*b (mod 7)`.
    pub fn formula(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.terms.iter().enumerate() {
            let mag = t.coeff.unsigned_abs();
            if i == 0 {
                if t.coeff < 0 {
                    s.push('-');
                }
            } else if t.coeff < 0 {
                s.push_str(" - ");
            } else {
                s.push_str(" + ");
            }
            let mut factors: Vec<String> = Vec::new();
            if mag != 1 || (t.a_pow == 0 && t.b_pow == 0) {
                factors.push({
                    let mut f = String::new();
                    let _ = write!(f, "{mag}");
                    f
                });
            }
            for (sym, pow) in [("a", t.a_pow), ("b", t.b_pow)] {
                if pow == 1 {
                    factors.push(sym.into());
                } else if pow > 1 {
                    let mut f = String::new();
                    let _ = write!(f, "{sym}^{pow}");
                    factors.push(f);
                }
            }
            s.push_str(&factors.join("*"));
        }
        let _ = write!(s, " (mod {})", self.modulus);
        s
    }
}

/// Exact modular evaluation; negative intermediate sums reduce to the
/// canonical residue in [0, p).
pub fn eval_task(spec: &TaskSpec, a: u32, b: u32) -> u32 {
    let p = spec.modulus as i64;
    let mut acc: i64 = 0;
    for t in &spec.terms {
        let mut term = t.coeff.rem_euclid(p);
        let ap = pow_mod(a as i64 % p, t.a_pow, p);
        let bp = pow_mod(b as i64 % p, t.b_pow, p);
        term = term * ap % p;
        term = term * bp % p;
        acc = (acc + term) % p;
    }
    acc.rem_euclid(p) as u32
}

fn pow_mod(mut base: i64, mut exp: u32, p: i64) -> i64 {
    base = base.rem_euclid(p);
    let mut acc = 1i64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// One task instance: the input pair and its modular answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Row {
    pub a: u32,
    pub b: u32,
    pub answer: u32,
}

impl Row {
    pub fn pair_index(&self, input_max: u32) -> u64 {
        self.a as u64 * input_max as u64 + self.b as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Eval,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Eval => "eval",
            Split::Test => "test",
        }
    }
}

/// Immutable set of rows for one task and split.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub spec: TaskSpec,
    pub rows: Vec<Row>,
    pub split: Split,
    pub seed: u64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Flat token encoding of all rows, 4 ids per row.
    pub fn tokens(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.rows.len() * SEQ_LEN);
        for row in &self.rows {
            out.extend_from_slice(&encode(&self.spec, row.a, row.b, row.answer).unwrap());
        }
        out
    }

    /// Pair indices of all rows, for exclusion bookkeeping.
    pub fn pair_set(&self) -> BTreeSet<u64> {
        self.rows
            .iter()
            .map(|r| r.pair_index(self.spec.input_max))
            .collect()
    }

    /// Concatenates rows of `other` (same spec) into this dataset.
    pub fn extend_from(&mut self, other: &Dataset) {
        debug_assert_eq!(self.spec, other.spec);
        self.rows.extend_from_slice(&other.rows);
    }
}

/// Token encoding `[a, b, sep, answer]`.
pub fn encode(spec: &TaskSpec, a: u32, b: u32, answer: u32) -> Result<[u32; 4], TaskError> {
    if a >= spec.input_max || b >= spec.input_max {
        return Err(TaskError::ValueOutOfRange {
            value: a.max(b),
            limit: spec.input_max,
        });
    }
    if answer >= spec.modulus {
        return Err(TaskError::ValueOutOfRange {
            value: answer,
            limit: spec.modulus,
        });
    }
    Ok([a, b, spec.sep_id(), answer])
}

/// Inverse of `encode`.
pub fn decode(spec: &TaskSpec, tokens: &[u32; 4]) -> Result<Row, TaskError> {
    let [a, b, sep, answer] = *tokens;
    if sep != spec.sep_id() {
        return Err(TaskError::ValueOutOfRange {
            value: sep,
            limit: spec.sep_id(),
        });
    }
    if a >= spec.input_max || b >= spec.input_max {
        return Err(TaskError::ValueOutOfRange {
            value: a.max(b),
            limit: spec.input_max,
        });
    }
    if answer >= spec.modulus {
        return Err(TaskError::ValueOutOfRange {
            value: answer,
            limit: spec.modulus,
        });
    }
    Ok(Row { a, b, answer })
}

fn row_for_pair(spec: &TaskSpec, a: u32, b: u32) -> Row {
    Row {
        a,
        b,
        answer: eval_task(spec, a, b),
    }
}

/// Requested training-set size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleSize {
    Fraction(f64),
    Count(usize),
}

impl SampleSize {
    pub fn resolve(&self, total: usize) -> usize {
        match *self {
            SampleSize::Fraction(f) => libm::round(f * total as f64) as usize,
            SampleSize::Count(c) => c,
        }
    }
}

/// Uniform sample of distinct (a, b) pairs. With `coverage` set, any number
/// token absent from the sample is repaired by appending its diagonal row
/// (i, i) so every token appears at least once.
pub fn gen_train(
    spec: &TaskSpec,
    size: SampleSize,
    seed: u64,
    coverage: bool,
) -> Result<Dataset, TaskError> {
    let total = spec.total_pairs();
    let count = size.resolve(total);
    if count > total {
        return Err(TaskError::Infeasible {
            requested: count,
            available: total,
        });
    }
    let mut rng = Rng::new(seed);
    let max = spec.input_max;
    let mut rows: Vec<Row> = rng
        .sample_distinct(total, count)
        .into_iter()
        .map(|idx| row_for_pair(spec, (idx as u32) / max, (idx as u32) % max))
        .collect();
    if coverage {
        let mut seen = alloc::vec![false; max as usize];
        for row in &rows {
            seen[row.a as usize] = true;
            seen[row.b as usize] = true;
        }
        for (i, &present) in seen.iter().enumerate() {
            if !present {
                let i = i as u32;
                // Diagonal repair rows may duplicate sampled pairs only if
                // (i, i) was sampled, in which case i was already seen.
                rows.push(row_for_pair(spec, i, i));
            }
        }
    }
    Ok(Dataset {
        spec: spec.clone(),
        rows,
        split: Split::Train,
        seed,
    })
}

/// The ambiguous core: one row per i with both inputs equal, covering every
/// number token while leaving the combining computation under-determined.
pub fn gen_ambiguous_core(spec: &TaskSpec) -> Dataset {
    let rows = (0..spec.input_max)
        .map(|i| row_for_pair(spec, i, i))
        .collect();
    Dataset {
        spec: spec.clone(),
        rows,
        split: Split::Train,
        seed: 0,
    }
}

/// Uniform sample of `n` distinct pairs avoiding `exclusion`. Diagonal
/// pairs are allowed. Used for disambiguation samples and for fresh
/// eval/test holdouts.
pub fn gen_pairs_excluding(
    spec: &TaskSpec,
    n: usize,
    seed: u64,
    exclusion: &BTreeSet<u64>,
    split: Split,
) -> Result<Dataset, TaskError> {
    let total = spec.total_pairs();
    let available = total - exclusion.len();
    if n > available {
        return Err(TaskError::Infeasible {
            requested: n,
            available,
        });
    }
    let allowed: Vec<u32> = (0..total as u64)
        .filter(|idx| !exclusion.contains(idx))
        .map(|idx| idx as u32)
        .collect();
    let mut rng = Rng::new(seed);
    let max = spec.input_max;
    let rows = rng
        .sample_distinct(allowed.len(), n)
        .into_iter()
        .map(|i| {
            let idx = allowed[i];
            row_for_pair(spec, idx / max, idx % max)
        })
        .collect();
    Ok(Dataset {
        spec: spec.clone(),
        rows,
        split,
        seed,
    })
}

/// Disambiguation samples: off-core training rows where the two inputs are
/// unconstrained.
pub fn gen_disambiguation(
    spec: &TaskSpec,
    n: usize,
    seed: u64,
    exclusion: &BTreeSet<u64>,
) -> Result<Dataset, TaskError> {
    gen_pairs_excluding(spec, n, seed, exclusion, Split::Train)
}
