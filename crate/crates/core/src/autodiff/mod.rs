//! Reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] records every primitive application; [`Tape::backward`] walks
//! the record in reverse and accumulates exact analytic gradients into the
//! trainable leaves. The primitive set is exactly what the reconstruction
//! model, gating network, and statistics-aware loss need — no broadcasting
//! beyond scalars, no higher-order derivatives.
//!
//! Tapes are single-threaded and short-lived: one per training step or
//! scoring call. Trainable parameters live outside the tape as [`Mat`]s and
//! are re-inserted as leaves each step.

mod adam;
mod serialize;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use serialize::{read_params, write_params};

use crate::error::{Error, Result};
use crate::mat::Mat;
use std::sync::atomic::{AtomicU64, Ordering};

static NEXT_TAPE_ID: AtomicU64 = AtomicU64::new(1);

/// Handle to a tensor recorded on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var {
    tape: u64,
    index: usize,
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Matmul(usize, usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    ScalarMul(usize, f64),
    /// Matrix times a 1x1 tensor.
    MulScalarT(usize, usize),
    Transpose(usize),
    ConcatCols(usize, usize),
    RowSlice(usize, usize, usize),
    Relu(usize),
    Sigmoid(usize),
    Log(usize),
    Sqrt(usize),
    Sum(usize),
    Mean(usize),
    Std(usize, f64),
    RowL2Normalize(usize),
    Clamp(usize, f64, f64),
}

struct Node {
    value: Mat,
    grad: Mat,
    needs_grad: bool,
    op: Op,
}

/// Recorded computation, topologically ordered by construction.
pub struct Tape {
    id: u64,
    nodes: Vec<Node>,
    backward_done: bool,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Tape {
        Tape {
            id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
            backward_done: false,
        }
    }

    fn push(&mut self, value: Mat, needs_grad: bool, op: Op) -> Var {
        let grad = Mat::zeros(value.rows(), value.cols());
        self.nodes.push(Node {
            value,
            grad,
            needs_grad,
            op,
        });
        Var {
            tape: self.id,
            index: self.nodes.len() - 1,
        }
    }

    fn check(&self, v: Var) -> Result<usize> {
        if v.tape != self.id {
            return Err(Error::Usage(format!(
                "tensor belongs to tape {} but was used with tape {}",
                v.tape, self.id
            )));
        }
        Ok(v.index)
    }

    fn shape(&self, i: usize) -> (usize, usize) {
        self.nodes[i].value.shape()
    }

    /// Constant leaf; gradients do not flow into it.
    pub fn constant(&mut self, value: Mat) -> Var {
        self.push(value, false, Op::Leaf)
    }

    /// Trainable leaf; `grad` is populated by `backward`.
    pub fn param(&mut self, value: Mat) -> Var {
        self.push(value, true, Op::Leaf)
    }

    /// 1x1 constant.
    pub fn scalar(&mut self, v: f64) -> Var {
        self.constant(Mat::from_vec(1, 1, vec![v]))
    }

    pub fn value(&self, v: Var) -> &Mat {
        let i = self.check(v).expect("tensor from another tape");
        &self.nodes[i].value
    }

    pub fn scalar_value(&self, v: Var) -> f64 {
        let m = self.value(v);
        assert_eq!(m.shape(), (1, 1), "expected a scalar tensor");
        m.at(0, 0)
    }

    /// Gradient of a leaf after `backward`.
    pub fn grad(&self, v: Var) -> Result<&Mat> {
        let i = self.check(v)?;
        if !self.backward_done {
            return Err(Error::Usage("gradient read before backward".into()));
        }
        Ok(&self.nodes[i].grad)
    }

    fn binary_same_shape(&mut self, op_name: &'static str, a: Var, b: Var) -> Result<(usize, usize)> {
        let ia = self.check(a)?;
        let ib = self.check(b)?;
        if self.shape(ia) != self.shape(ib) {
            return Err(Error::Shape {
                op: op_name,
                lhs: self.shape(ia),
                rhs: self.shape(ib),
            });
        }
        Ok((ia, ib))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let ia = self.check(a)?;
        let ib = self.check(b)?;
        if self.shape(ia).1 != self.shape(ib).0 {
            return Err(Error::Shape {
                op: "matmul",
                lhs: self.shape(ia),
                rhs: self.shape(ib),
            });
        }
        let value = self.nodes[ia].value.matmul(&self.nodes[ib].value);
        let ng = self.nodes[ia].needs_grad || self.nodes[ib].needs_grad;
        Ok(self.push(value, ng, Op::Matmul(ia, ib)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ia, ib) = self.binary_same_shape("add", a, b)?;
        let value = self.nodes[ia].value.add(&self.nodes[ib].value);
        let ng = self.nodes[ia].needs_grad || self.nodes[ib].needs_grad;
        Ok(self.push(value, ng, Op::Add(ia, ib)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ia, ib) = self.binary_same_shape("sub", a, b)?;
        let value = self.nodes[ia].value.sub(&self.nodes[ib].value);
        let ng = self.nodes[ia].needs_grad || self.nodes[ib].needs_grad;
        Ok(self.push(value, ng, Op::Sub(ia, ib)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ia, ib) = self.binary_same_shape("mul", a, b)?;
        let value = self.nodes[ia].value.hadamard(&self.nodes[ib].value);
        let ng = self.nodes[ia].needs_grad || self.nodes[ib].needs_grad;
        Ok(self.push(value, ng, Op::Mul(ia, ib)))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ia, ib) = self.binary_same_shape("div", a, b)?;
        let value = self.nodes[ia].value.zip(&self.nodes[ib].value, |x, y| x / y);
        let ng = self.nodes[ia].needs_grad || self.nodes[ib].needs_grad;
        Ok(self.push(value, ng, Op::Div(ia, ib)))
    }

    pub fn scalar_mul(&mut self, a: Var, c: f64) -> Result<Var> {
        let ia = self.check(a)?;
        let value = self.nodes[ia].value.scale(c);
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, ng, Op::ScalarMul(ia, c)))
    }

    /// Multiply a matrix by a 1x1 tensor, differentiable in both.
    pub fn mul_scalar_t(&mut self, a: Var, s: Var) -> Result<Var> {
        let ia = self.check(a)?;
        let is = self.check(s)?;
        if self.shape(is) != (1, 1) {
            return Err(Error::Shape {
                op: "mul_scalar_t",
                lhs: self.shape(ia),
                rhs: self.shape(is),
            });
        }
        let sv = self.nodes[is].value.at(0, 0);
        let value = self.nodes[ia].value.scale(sv);
        let ng = self.nodes[ia].needs_grad || self.nodes[is].needs_grad;
        Ok(self.push(value, ng, Op::MulScalarT(ia, is)))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let ia = self.check(a)?;
        let value = self.nodes[ia].value.transpose();
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, ng, Op::Transpose(ia)))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let ia = self.check(a)?;
        let ib = self.check(b)?;
        if self.shape(ia).0 != self.shape(ib).0 {
            return Err(Error::Shape {
                op: "concat_cols",
                lhs: self.shape(ia),
                rhs: self.shape(ib),
            });
        }
        let value = self.nodes[ia].value.concat_cols(&self.nodes[ib].value);
        let ng = self.nodes[ia].needs_grad || self.nodes[ib].needs_grad;
        Ok(self.push(value, ng, Op::ConcatCols(ia, ib)))
    }

    /// Rows `start..end` of `a`.
    pub fn row_slice(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let ia = self.check(a)?;
        let (rows, cols) = self.shape(ia);
        if start >= end || end > rows {
            return Err(Error::Usage(format!(
                "row_slice {start}..{end} out of range for {rows} rows"
            )));
        }
        let src = &self.nodes[ia].value;
        let mut value = Mat::zeros(end - start, cols);
        for r in start..end {
            value.data_mut()[(r - start) * cols..(r - start + 1) * cols]
                .copy_from_slice(src.row(r));
        }
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, ng, Op::RowSlice(ia, start, end)))
    }

    fn unary(&mut self, a: Var, op: fn(usize) -> Op, f: impl Fn(f64) -> f64) -> Result<Var> {
        let ia = self.check(a)?;
        let value = self.nodes[ia].value.map(f);
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, ng, op(ia)))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.unary(a, Op::Relu, |x| if x > 0.0 { x } else { 0.0 })
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        self.unary(a, Op::Sigmoid, |x| 1.0 / (1.0 + (-x).exp()))
    }

    /// Natural log. Callers clamp into a positive domain first.
    pub fn log(&mut self, a: Var) -> Result<Var> {
        self.unary(a, Op::Log, f64::ln)
    }

    pub fn sqrt(&mut self, a: Var) -> Result<Var> {
        self.unary(a, Op::Sqrt, f64::sqrt)
    }

    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Result<Var> {
        let ia = self.check(a)?;
        let value = self.nodes[ia].value.map(|x| x.clamp(lo, hi));
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, ng, Op::Clamp(ia, lo, hi)))
    }

    /// Sum over all entries, to a 1x1 tensor.
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let ia = self.check(a)?;
        let value = Mat::from_vec(1, 1, vec![self.nodes[ia].value.sum()]);
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, ng, Op::Sum(ia)))
    }

    /// Mean over all entries, to a 1x1 tensor.
    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let ia = self.check(a)?;
        let n = self.nodes[ia].value.len() as f64;
        let value = Mat::from_vec(1, 1, vec![self.nodes[ia].value.sum() / n]);
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, ng, Op::Mean(ia)))
    }

    /// Population standard deviation over all entries: sqrt(var + eps).
    /// The epsilon keeps the gradient finite for constant inputs.
    pub fn std(&mut self, a: Var, eps: f64) -> Result<Var> {
        let ia = self.check(a)?;
        let m = &self.nodes[ia].value;
        let n = m.len() as f64;
        let mu = m.sum() / n;
        let var = m.iter().map(|&x| (x - mu) * (x - mu)).sum::<f64>() / n;
        let value = Mat::from_vec(1, 1, vec![(var + eps).sqrt()]);
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, ng, Op::Std(ia, eps)))
    }

    /// Normalize each row to unit l2 norm; rows with norm below 1e-12 are
    /// left at zero (the zero-row guard for cosine errors).
    pub fn row_l2_normalize(&mut self, a: Var) -> Result<Var> {
        let ia = self.check(a)?;
        let m = &self.nodes[ia].value;
        let (rows, cols) = m.shape();
        let mut value = Mat::zeros(rows, cols);
        for r in 0..rows {
            let norm = m.row(r).iter().map(|&x| x * x).sum::<f64>().sqrt();
            if norm >= 1e-12 {
                for c in 0..cols {
                    value.set(r, c, m.at(r, c) / norm);
                }
            }
        }
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, ng, Op::RowL2Normalize(ia)))
    }

    /// Reverse pass from a scalar output. Leaf gradients become readable via
    /// [`Tape::grad`]. A tape supports exactly one backward call.
    pub fn backward(&mut self, root: Var) -> Result<()> {
        let ir = self.check(root)?;
        if self.shape(ir) != (1, 1) {
            return Err(Error::Usage(format!(
                "backward requires a scalar output, got {}x{}",
                self.shape(ir).0,
                self.shape(ir).1
            )));
        }
        if self.backward_done {
            return Err(Error::Usage(
                "backward already ran on this tape; rebuild the forward pass first".into(),
            ));
        }
        self.backward_done = true;
        self.nodes[ir].grad.set(0, 0, 1.0);

        for i in (0..=ir).rev() {
            if !self.nodes[i].needs_grad {
                continue;
            }
            let op = self.nodes[i].op.clone();
            match op {
                Op::Leaf => {}
                Op::Matmul(a, b) => {
                    let ga = self.nodes[i].grad.matmul(&self.nodes[b].value.transpose());
                    let gb = self.nodes[a].value.transpose().matmul(&self.nodes[i].grad);
                    self.accum(a, &ga);
                    self.accum(b, &gb);
                }
                Op::Add(a, b) => {
                    let g = self.nodes[i].grad.clone();
                    self.accum(a, &g);
                    self.accum(b, &g);
                }
                Op::Sub(a, b) => {
                    let g = self.nodes[i].grad.clone();
                    self.accum(a, &g);
                    let neg = g.scale(-1.0);
                    self.accum(b, &neg);
                }
                Op::Mul(a, b) => {
                    let ga = self.nodes[i].grad.hadamard(&self.nodes[b].value);
                    let gb = self.nodes[i].grad.hadamard(&self.nodes[a].value);
                    self.accum(a, &ga);
                    self.accum(b, &gb);
                }
                Op::Div(a, b) => {
                    let g = &self.nodes[i].grad;
                    let bv = &self.nodes[b].value;
                    let ga = g.zip(bv, |gz, y| gz / y);
                    let gb = g
                        .hadamard(&self.nodes[i].value)
                        .zip(bv, |gz_z, y| -gz_z / y);
                    self.accum(a, &ga);
                    self.accum(b, &gb);
                }
                Op::ScalarMul(a, c) => {
                    let ga = self.nodes[i].grad.scale(c);
                    self.accum(a, &ga);
                }
                Op::MulScalarT(a, s) => {
                    let sv = self.nodes[s].value.at(0, 0);
                    let ga = self.nodes[i].grad.scale(sv);
                    let gs = self.nodes[i].grad.hadamard(&self.nodes[a].value).sum();
                    self.accum(a, &ga);
                    let gs = Mat::from_vec(1, 1, vec![gs]);
                    self.accum(s, &gs);
                }
                Op::Transpose(a) => {
                    let ga = self.nodes[i].grad.transpose();
                    self.accum(a, &ga);
                }
                Op::ConcatCols(a, b) => {
                    let ca = self.shape(a).1;
                    let (rows, cols) = self.shape(i);
                    let mut ga = Mat::zeros(rows, ca);
                    let mut gb = Mat::zeros(rows, cols - ca);
                    for r in 0..rows {
                        for c in 0..ca {
                            ga.set(r, c, self.nodes[i].grad.at(r, c));
                        }
                        for c in ca..cols {
                            gb.set(r, c - ca, self.nodes[i].grad.at(r, c));
                        }
                    }
                    self.accum(a, &ga);
                    self.accum(b, &gb);
                }
                Op::RowSlice(a, start, end) => {
                    let cols = self.shape(a).1;
                    let mut ga = Mat::zeros(self.shape(a).0, cols);
                    for r in start..end {
                        for c in 0..cols {
                            ga.set(r, c, self.nodes[i].grad.at(r - start, c));
                        }
                    }
                    self.accum(a, &ga);
                }
                Op::Relu(a) => {
                    let ga = self.nodes[i].grad.zip(&self.nodes[a].value, |g, x| {
                        if x > 0.0 {
                            g
                        } else {
                            0.0
                        }
                    });
                    self.accum(a, &ga);
                }
                Op::Sigmoid(a) => {
                    let ga = self
                        .nodes[i]
                        .grad
                        .zip(&self.nodes[i].value, |g, z| g * z * (1.0 - z));
                    self.accum(a, &ga);
                }
                Op::Log(a) => {
                    let ga = self.nodes[i].grad.zip(&self.nodes[a].value, |g, x| g / x);
                    self.accum(a, &ga);
                }
                Op::Sqrt(a) => {
                    let ga = self
                        .nodes[i]
                        .grad
                        .zip(&self.nodes[i].value, |g, z| g / (2.0 * z));
                    self.accum(a, &ga);
                }
                Op::Sum(a) => {
                    let g = self.nodes[i].grad.at(0, 0);
                    let (r, c) = self.shape(a);
                    let ga = Mat::filled(r, c, g);
                    self.accum(a, &ga);
                }
                Op::Mean(a) => {
                    let g = self.nodes[i].grad.at(0, 0);
                    let (r, c) = self.shape(a);
                    let ga = Mat::filled(r, c, g / (r * c) as f64);
                    self.accum(a, &ga);
                }
                Op::Std(a, _eps) => {
                    let g = self.nodes[i].grad.at(0, 0);
                    let z = self.nodes[i].value.at(0, 0);
                    let m = &self.nodes[a].value;
                    let n = m.len() as f64;
                    let mu = m.sum() / n;
                    let ga = m.map(|x| g * (x - mu) / (n * z));
                    self.accum(a, &ga);
                }
                Op::RowL2Normalize(a) => {
                    let (rows, cols) = self.shape(a);
                    let mut ga = Mat::zeros(rows, cols);
                    for r in 0..rows {
                        let x = self.nodes[a].value.row(r);
                        let norm = x.iter().map(|&v| v * v).sum::<f64>().sqrt();
                        if norm < 1e-12 {
                            continue;
                        }
                        let y = self.nodes[i].value.row(r);
                        let gy = self.nodes[i].grad.row(r);
                        let dot: f64 = gy.iter().zip(y).map(|(&g, &yv)| g * yv).sum();
                        for c in 0..cols {
                            ga.set(r, c, (gy[c] - dot * y[c]) / norm);
                        }
                    }
                    self.accum(a, &ga);
                }
                Op::Clamp(a, lo, hi) => {
                    let ga = self.nodes[i].grad.zip(&self.nodes[a].value, |g, x| {
                        if x > lo && x < hi {
                            g
                        } else {
                            0.0
                        }
                    });
                    self.accum(a, &ga);
                }
            }
        }
        Ok(())
    }

    fn accum(&mut self, target: usize, delta: &Mat) {
        if self.nodes[target].needs_grad {
            self.nodes[target].grad.axpy(delta, 1.0);
        }
    }
}
