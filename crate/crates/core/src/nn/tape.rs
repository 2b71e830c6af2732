//! Reverse-mode differentiation over small dense matrices.
//!
//! A [`Tape`] records one forward computation. Parameter leaves borrow their
//! values from a [`ParamStore`]; calling [`Tape::backward`] accumulates
//! parameter gradients into a [`Grads`] buffer.

use super::matrix::{matmul_at_acc, matmul_bt_acc};
use super::{Grads, Matrix, ParamId, ParamStore};

/// Probability floor applied before taking a logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

enum Value {
    Owned(Matrix),
    Param(ParamId),
}

enum Op {
    Leaf,
    Gather {
        pid: ParamId,
        rows: Vec<usize>,
    },
    GatherSum {
        pid: ParamId,
        rows: Vec<usize>,
    },
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Tanh(Var),
    Sigmoid(Var),
    Softmax(Var),
    Transpose(Var),
    Rows(Var, Vec<usize>),
    Cols(Var, usize, usize),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    CrossEntropy {
        probs: Var,
        label: usize,
        weight: f64,
    },
}

struct Node {
    value: Value,
    op: Op,
    needs_grad: bool,
}

pub struct Tape<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Self {
            params,
            nodes: Vec::with_capacity(256),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix {
        match &self.nodes[v.0].value {
            Value::Owned(m) => m,
            Value::Param(pid) => self.params.get(*pid),
        }
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn push(&mut self, value: Matrix, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value: Value::Owned(value),
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, m: Matrix) -> Var {
        self.push(m, Op::Leaf, false)
    }

    pub fn param(&mut self, pid: ParamId) -> Var {
        self.nodes.push(Node {
            value: Value::Param(pid),
            op: Op::Leaf,
            needs_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    /// Rows `rows` of a parameter table, stacked in order.
    pub fn gather(&mut self, pid: ParamId, rows: &[usize]) -> Var {
        let table = self.params.get(pid);
        let mut out = Matrix::zeros(rows.len(), table.cols);
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(table.row(r));
        }
        self.push(
            out,
            Op::Gather {
                pid,
                rows: rows.to_vec(),
            },
            true,
        )
    }

    /// Sum of the parameter rows listed in `rows` as a `1 × cols` row; this
    /// is a binary vector times the table without materializing the vector.
    pub fn gather_sum(&mut self, pid: ParamId, rows: &[usize]) -> Var {
        let table = self.params.get(pid);
        let mut out = Matrix::zeros(1, table.cols);
        for &r in rows {
            for (o, x) in out.data.iter_mut().zip(table.row(r)) {
                *o += x;
            }
        }
        self.push(
            out,
            Op::GatherSum {
                pid,
                rows: rows.to_vec(),
            },
            true,
        )
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).matmul(self.value(b));
        let ng = self.needs(a) || self.needs(b);
        self.push(out, Op::MatMul(a, b), ng)
    }

    fn zip_with(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.shape(), y.shape(), "elementwise shape");
        let data = x.data.iter().zip(&y.data).map(|(p, q)| f(*p, *q)).collect();
        let out = Matrix::from_vec(x.rows, x.cols, data);
        let ng = self.needs(a) || self.needs(b);
        self.push(out, op, ng)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |p, q| p + q, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |p, q| p - q, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |p, q| p * q, Op::Mul(a, b))
    }

    /// `a + 1ᵀ·row`: add a `1 × c` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let (x, r) = (self.value(a), self.value(row));
        assert_eq!((1, x.cols), r.shape(), "broadcast row shape");
        let mut out = x.clone();
        for i in 0..out.rows {
            for (o, b) in out.row_mut(i).iter_mut().zip(&r.data) {
                *o += b;
            }
        }
        let ng = self.needs(a) || self.needs(row);
        self.push(out, Op::AddRow(a, row), ng)
    }

    fn map(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let x = self.value(a);
        let out = Matrix::from_vec(x.rows, x.cols, x.data.iter().map(|v| f(*v)).collect());
        let ng = self.needs(a);
        self.push(out, op, ng)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map(a, f64::tanh, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.map(a, sigmoid, Op::Sigmoid(a))
    }

    /// Softmax over every element of `a` (used on row or column vectors).
    pub fn softmax(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let out = Matrix::from_vec(x.rows, x.cols, softmax(&x.data));
        let ng = self.needs(a);
        self.push(out, Op::Softmax(a), ng)
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let out = self.value(a).transpose();
        let ng = self.needs(a);
        self.push(out, Op::Transpose(a), ng)
    }

    pub fn rows(&mut self, a: Var, idx: &[usize]) -> Var {
        let x = self.value(a);
        let mut out = Matrix::zeros(idx.len(), x.cols);
        for (i, &r) in idx.iter().enumerate() {
            out.row_mut(i).copy_from_slice(x.row(r));
        }
        let ng = self.needs(a);
        self.push(out, Op::Rows(a, idx.to_vec()), ng)
    }

    pub fn row(&mut self, a: Var, r: usize) -> Var {
        self.rows(a, &[r])
    }

    /// Columns `start..end`.
    pub fn cols(&mut self, a: Var, start: usize, end: usize) -> Var {
        let x = self.value(a);
        assert!(start <= end && end <= x.cols, "column slice");
        let w = end - start;
        let mut out = Matrix::zeros(x.rows, w);
        for i in 0..x.rows {
            out.row_mut(i).copy_from_slice(&x.row(i)[start..end]);
        }
        let ng = self.needs(a);
        self.push(out, Op::Cols(a, start, end), ng)
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows;
        let total: usize = parts.iter().map(|p| self.value(*p).cols).sum();
        let mut out = Matrix::zeros(rows, total);
        let mut off = 0;
        for p in parts {
            let m = self.value(*p);
            assert_eq!(m.rows, rows, "concat_cols rows");
            for i in 0..rows {
                out.row_mut(i)[off..off + m.cols].copy_from_slice(m.row(i));
            }
            off += m.cols;
        }
        let ng = parts.iter().any(|p| self.needs(*p));
        self.push(out, Op::ConcatCols(parts.to_vec()), ng)
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        let cols = self.value(parts[0]).cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            let m = self.value(*p);
            assert_eq!(m.cols, cols, "concat_rows cols");
            data.extend_from_slice(&m.data);
            rows += m.rows;
        }
        let ng = parts.iter().any(|p| self.needs(*p));
        self.push(
            Matrix::from_vec(rows, cols, data),
            Op::ConcatRows(parts.to_vec()),
            ng,
        )
    }

    /// `-weight · ln(max(probs[label], PROB_FLOOR))` as a `1 × 1` node.
    pub fn cross_entropy(&mut self, probs: Var, label: usize, weight: f64) -> Var {
        let p = self.value(probs).data[label];
        let loss = -weight * p.max(PROB_FLOOR).ln();
        let ng = self.needs(probs);
        self.push(
            Matrix::from_vec(1, 1, vec![loss]),
            Op::CrossEntropy {
                probs,
                label,
                weight,
            },
            ng,
        )
    }

    /// Accumulate `scale · ∂root/∂θ` into `grads`. `root` must be `1 × 1`.
    pub fn backward(&self, root: Var, grads: &mut Grads, scale: f64) {
        assert_eq!(self.value(root).shape(), (1, 1), "backward from a scalar");
        let mut gs: Vec<Option<Matrix>> = (0..=root.0).map(|_| None).collect();
        gs[root.0] = Some(Matrix::from_vec(1, 1, vec![scale]));
        for i in (0..=root.0).rev() {
            let Some(g) = gs[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            match &node.op {
                Op::Leaf => {
                    if let Value::Param(pid) = node.value {
                        grads.get_mut(pid).add_assign(&g);
                    }
                }
                Op::Gather { pid, rows } => {
                    let t = grads.get_mut(*pid);
                    for (r, &row) in rows.iter().enumerate() {
                        for (o, x) in t.row_mut(row).iter_mut().zip(g.row(r)) {
                            *o += x;
                        }
                    }
                }
                Op::GatherSum { pid, rows } => {
                    let t = grads.get_mut(*pid);
                    for &row in rows {
                        for (o, x) in t.row_mut(row).iter_mut().zip(&g.data) {
                            *o += x;
                        }
                    }
                }
                Op::MatMul(a, b) => {
                    if let Some(t) = self.target(*a, &mut gs, grads) {
                        matmul_bt_acc(&g, self.value(*b), t);
                    }
                    if let Some(t) = self.target(*b, &mut gs, grads) {
                        matmul_at_acc(self.value(*a), &g, t);
                    }
                }
                Op::Add(a, b) => {
                    for v in [*a, *b] {
                        if let Some(t) = self.target(v, &mut gs, grads) {
                            t.add_assign(&g);
                        }
                    }
                }
                Op::Sub(a, b) => {
                    if let Some(t) = self.target(*a, &mut gs, grads) {
                        t.add_assign(&g);
                    }
                    if let Some(t) = self.target(*b, &mut gs, grads) {
                        for (o, x) in t.data.iter_mut().zip(&g.data) {
                            *o -= x;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (x, y) = (self.value(*a), self.value(*b));
                    if let Some(t) = self.target(*a, &mut gs, grads) {
                        for ((o, gv), yv) in t.data.iter_mut().zip(&g.data).zip(&y.data) {
                            *o += gv * yv;
                        }
                    }
                    if let Some(t) = self.target(*b, &mut gs, grads) {
                        for ((o, gv), xv) in t.data.iter_mut().zip(&g.data).zip(&x.data) {
                            *o += gv * xv;
                        }
                    }
                }
                Op::AddRow(a, row) => {
                    if let Some(t) = self.target(*a, &mut gs, grads) {
                        t.add_assign(&g);
                    }
                    if let Some(t) = self.target(*row, &mut gs, grads) {
                        for r in 0..g.rows {
                            for (o, x) in t.data.iter_mut().zip(g.row(r)) {
                                *o += x;
                            }
                        }
                    }
                }
                Op::Tanh(a) => {
                    let y = self.value(Var(i));
                    if let Some(t) = self.target(*a, &mut gs, grads) {
                        for ((o, gv), yv) in t.data.iter_mut().zip(&g.data).zip(&y.data) {
                            *o += gv * (1.0 - yv * yv);
                        }
                    }
                }
                Op::Sigmoid(a) => {
                    let y = self.value(Var(i));
                    if let Some(t) = self.target(*a, &mut gs, grads) {
                        for ((o, gv), yv) in t.data.iter_mut().zip(&g.data).zip(&y.data) {
                            *o += gv * yv * (1.0 - yv);
                        }
                    }
                }
                Op::Softmax(a) => {
                    let y = self.value(Var(i));
                    let dot: f64 = g.data.iter().zip(&y.data).map(|(p, q)| p * q).sum();
                    if let Some(t) = self.target(*a, &mut gs, grads) {
                        for ((o, gv), yv) in t.data.iter_mut().zip(&g.data).zip(&y.data) {
                            *o += yv * (gv - dot);
                        }
                    }
                }
                Op::Transpose(a) => {
                    if let Some(t) = self.target(*a, &mut gs, grads) {
                        t.add_assign(&g.transpose());
                    }
                }
                Op::Rows(a, idx) => {
                    if let Some(t) = self.target(*a, &mut gs, grads) {
                        for (r, &src) in idx.iter().enumerate() {
                            for (o, x) in t.row_mut(src).iter_mut().zip(g.row(r)) {
                                *o += x;
                            }
                        }
                    }
                }
                Op::Cols(a, start, end) => {
                    if let Some(t) = self.target(*a, &mut gs, grads) {
                        for r in 0..g.rows {
                            for (o, x) in t.row_mut(r)[*start..*end].iter_mut().zip(g.row(r)) {
                                *o += x;
                            }
                        }
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let w = self.value(*p).cols;
                        if let Some(t) = self.target(*p, &mut gs, grads) {
                            for r in 0..g.rows {
                                for (o, x) in t.row_mut(r).iter_mut().zip(&g.row(r)[off..off + w]) {
                                    *o += x;
                                }
                            }
                        }
                        off += w;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let n = self.value(*p).len();
                        if let Some(t) = self.target(*p, &mut gs, grads) {
                            for (o, x) in t.data.iter_mut().zip(&g.data[off..off + n]) {
                                *o += x;
                            }
                        }
                        off += n;
                    }
                }
                Op::CrossEntropy {
                    probs,
                    label,
                    weight,
                } => {
                    let p = self.value(*probs).data[*label];
                    if p > PROB_FLOOR {
                        if let Some(t) = self.target(*probs, &mut gs, grads) {
                            t.data[*label] += -weight / p * g.data[0];
                        }
                    }
                }
            }
        }
    }

    fn target<'g>(
        &self,
        v: Var,
        gs: &'g mut [Option<Matrix>],
        grads: &'g mut Grads,
    ) -> Option<&'g mut Matrix> {
        let node = &self.nodes[v.0];
        if !node.needs_grad {
            return None;
        }
        match (&node.op, &node.value) {
            (Op::Leaf, Value::Param(pid)) => Some(grads.get_mut(*pid)),
            _ => {
                let (r, c) = self.value(v).shape();
                Some(gs[v.0].get_or_insert_with(|| Matrix::zeros(r, c)))
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Max-shifted softmax.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::params::{seeded_rng, uniform};

    /// Central differences over every parameter entry.
    fn check(store: &mut ParamStore, f: impl Fn(&mut Tape) -> Var) {
        let mut grads = store.zeros_like();
        {
            let mut t = Tape::new(store);
            let out = f(&mut t);
            t.backward(out, &mut grads, 1.0);
        }
        let h = 1e-6;
        for pid in store.ids().collect::<Vec<_>>() {
            for k in 0..store.get(pid).len() {
                let orig = store.get(pid).data[k];
                store.get_mut(pid).data[k] = orig + h;
                let up = {
                    let mut t = Tape::new(store);
                    let o = f(&mut t);
                    t.value(o).data[0]
                };
                store.get_mut(pid).data[k] = orig - h;
                let down = {
                    let mut t = Tape::new(store);
                    let o = f(&mut t);
                    t.value(o).data[0]
                };
                store.get_mut(pid).data[k] = orig;
                let num = (up - down) / (2.0 * h);
                let ana = grads.get(pid).data[k];
                let err = (num - ana).abs() / num.abs().max(ana.abs()).max(1e-6);
                assert!(
                    err < 1e-5,
                    "{} [{k}]: numeric {num} analytic {ana}",
                    store.name(pid)
                );
            }
        }
    }

    #[test]
    fn every_op_differentiates() {
        let mut rng = seeded_rng(1);
        let mut s = ParamStore::new();
        let a = s.add("a", uniform(&mut rng, 3, 4, 1.0));
        let b = s.add("b", uniform(&mut rng, 4, 2, 1.0));
        let r = s.add("r", uniform(&mut rng, 1, 2, 1.0));
        let e = s.add("e", uniform(&mut rng, 5, 2, 1.0));
        check(&mut s, |t| {
            let (va, vb, vr) = (t.param(a), t.param(b), t.param(r));
            let ab = t.matmul(va, vb);
            let ab = t.add_row(ab, vr);
            let th = t.tanh(ab);
            let sg = t.sigmoid(ab);
            let m = t.mul(th, sg);
            let g = t.gather(e, &[4, 1, 1]);
            let sm = t.add(m, g);
            let d = t.sub(sm, th);
            let rows = t.rows(d, &[2, 0]);
            let c0 = t.cols(rows, 0, 1);
            let c1 = t.cols(rows, 1, 2);
            let cat = t.concat_cols(&[c1, c0, c1]);
            let gs = t.gather_sum(e, &[0, 3, 3]);
            let r0 = t.cols(vr, 0, 1);
            let gs3 = t.concat_cols(&[gs, r0]);
            let stacked = t.concat_rows(&[cat, gs3]);
            let tr = t.transpose(stacked);
            let col = t.cols(tr, 0, 1);
            let colt = t.transpose(col);
            let p = t.softmax(colt);
            t.cross_entropy(p, 1, 0.7)
        });
    }

    #[test]
    fn softmax_is_normalized_and_shift_invariant() {
        let p = softmax(&[1.0, 2.0, 3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let q = softmax(&[1001.0, 1002.0, 1003.0]);
        for (x, y) in p.iter().zip(&q) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn floored_cross_entropy_has_no_gradient() {
        let mut s = ParamStore::new();
        let a = s.add("a", Matrix::row_vector(vec![0.0, 1.0]));
        let mut g = s.zeros_like();
        let t_loss = {
            let mut t = Tape::new(&s);
            let v = t.param(a);
            let l = t.cross_entropy(v, 0, 1.0);
            t.backward(l, &mut g, 1.0);
            t.value(l).data[0]
        };
        assert!((t_loss + PROB_FLOOR.ln()).abs() < 1e-9);
        assert_eq!(g.get(a).data, vec![0.0, 0.0]);
    }
}
