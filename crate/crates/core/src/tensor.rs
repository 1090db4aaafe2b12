//! Minimal dense-tensor engine with reverse-mode differentiation.
//!
//! Tensors are flat row-major `f64` buffers with a shape. A [`Tape`] records
//! every operation of a forward pass (define-by-run) and replays the recorded
//! gradient rules in reverse on [`Tape::backward`]. Gradients accumulate
//! additively, so a tensor feeding several consumers (weight sharing across
//! timesteps) receives the sum of all contributions.
//!
//! Everything is single-threaded per tape; no operation mutates its inputs.

use std::cell::{Cell, Ref, RefCell};
use std::rc::Rc;

use crate::error::{Error, Result};

const BCE_EPS: f64 = 1e-12;

struct Inner {
    shape: Vec<usize>,
    values: RefCell<Vec<f64>>,
    requires_grad: bool,
    grad: RefCell<Option<Vec<f64>>>,
}

/// Dense n-dimensional array participating in a differentiation tape.
///
/// Cloning is cheap (shared handle); two clones refer to the same buffer.
/// Scalars are represented as shape `[1]`.
#[derive(Clone)]
pub struct Tensor {
    inner: Rc<Inner>,
}

impl std::fmt::Debug for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tensor")
            .field("shape", &self.inner.shape)
            .field("values", &*self.inner.values.borrow())
            .field("requires_grad", &self.inner.requires_grad)
            .finish()
    }
}

impl Tensor {
    fn build(shape: Vec<usize>, values: Vec<f64>, requires_grad: bool) -> Result<Tensor> {
        let numel: usize = shape.iter().product();
        if numel != values.len() {
            return Err(Error::contract(format!(
                "shape {:?} implies {} values, got {}",
                shape,
                numel,
                values.len()
            )));
        }
        debug_assert!(values.iter().all(|v| v.is_finite()), "non-finite tensor values");
        Ok(Tensor {
            inner: Rc::new(Inner {
                shape,
                values: RefCell::new(values),
                requires_grad,
                grad: RefCell::new(None),
            }),
        })
    }

    /// Trainable leaf (gradients retained by `backward`).
    pub fn param(shape: Vec<usize>, values: Vec<f64>) -> Result<Tensor> {
        Tensor::build(shape, values, true)
    }

    /// Non-trainable leaf.
    pub fn constant(shape: Vec<usize>, values: Vec<f64>) -> Result<Tensor> {
        Tensor::build(shape, values, false)
    }

    pub fn zeros(shape: Vec<usize>) -> Tensor {
        let numel: usize = shape.iter().product();
        Tensor::build(shape, vec![0.0; numel], false).expect("zeros")
    }

    pub fn scalar(v: f64) -> Tensor {
        Tensor::build(vec![1], vec![v], false).expect("scalar")
    }

    pub fn vector(values: Vec<f64>) -> Tensor {
        let n = values.len();
        Tensor::build(vec![n], values, false).expect("vector")
    }

    pub fn matrix(rows: usize, cols: usize, values: Vec<f64>) -> Result<Tensor> {
        Tensor::build(vec![rows, cols], values, false)
    }

    /// Output of a tape operation.
    fn computed(shape: Vec<usize>, values: Vec<f64>) -> Tensor {
        Tensor::build(shape, values, false).expect("op output shape/value mismatch")
    }

    pub fn shape(&self) -> &[usize] {
        &self.inner.shape
    }

    pub fn numel(&self) -> usize {
        self.inner.shape.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.inner.shape.len()
    }

    pub fn requires_grad(&self) -> bool {
        self.inner.requires_grad
    }

    pub fn values(&self) -> Ref<'_, Vec<f64>> {
        self.inner.values.borrow()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.inner.values.borrow().clone()
    }

    /// The single value of a scalar tensor.
    pub fn item(&self) -> f64 {
        assert_eq!(self.numel(), 1, "item() on non-scalar tensor");
        self.inner.values.borrow()[0]
    }

    pub fn value_at(&self, idx: usize) -> f64 {
        self.inner.values.borrow()[idx]
    }

    /// Overwrite one element in place (parameter updates, finite differences).
    pub fn set_value_at(&self, idx: usize, v: f64) {
        self.inner.values.borrow_mut()[idx] = v;
    }

    pub fn set_values(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.numel() {
            return Err(Error::contract(format!(
                "set_values: expected {} values, got {}",
                self.numel(),
                values.len()
            )));
        }
        self.inner.values.borrow_mut().copy_from_slice(values);
        Ok(())
    }

    /// Accumulated gradient, if any backward pass touched this tensor.
    pub fn grad(&self) -> Option<Vec<f64>> {
        self.inner.grad.borrow().clone()
    }

    /// Gradient, treating never-touched as zero (unreachable leaves).
    pub fn grad_or_zeros(&self) -> Vec<f64> {
        self.inner
            .grad
            .borrow()
            .clone()
            .unwrap_or_else(|| vec![0.0; self.numel()])
    }

    pub fn clear_grad(&self) {
        *self.inner.grad.borrow_mut() = None;
    }

    /// Add externally computed gradient contributions (used where the
    /// gradient is cheaper by hand than by tape, e.g. sparse features).
    pub fn add_grad(&self, deltas: &[f64]) -> Result<()> {
        if deltas.len() != self.numel() {
            return Err(Error::contract(format!(
                "add_grad: expected {} values, got {}",
                self.numel(),
                deltas.len()
            )));
        }
        self.accum_grad(|g| {
            for (gi, di) in g.iter_mut().zip(deltas.iter()) {
                *gi += di;
            }
        });
        Ok(())
    }

    /// True if both handles refer to the same buffer.
    pub fn same_buffer(&self, other: &Tensor) -> bool {
        Rc::ptr_eq(&self.inner, &other.inner)
    }

    fn accum_grad(&self, f: impl FnOnce(&mut [f64])) {
        let mut slot = self.inner.grad.borrow_mut();
        let g = slot.get_or_insert_with(|| vec![0.0; self.numel()]);
        f(g);
    }

    fn grad_ref(&self) -> Ref<'_, Option<Vec<f64>>> {
        self.inner.grad.borrow()
    }
}

/// Ordered record of one forward pass; rebuilt per pass (define-by-run).
///
/// Each recorded step knows how to push the output's gradient back into its
/// inputs. [`Tape::backward`] walks the record in reverse once.
pub struct Tape {
    steps: RefCell<Vec<Box<dyn Fn()>>>,
    spent: Cell<bool>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Tape {
        Tape {
            steps: RefCell::new(Vec::new()),
            spent: Cell::new(false),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.borrow().is_empty()
    }

    fn record(&self, step: impl Fn() + 'static) {
        self.steps.borrow_mut().push(Box::new(step));
    }

    /// Matrix product `A[m×k] · B[k×n]`.
    ///
    /// Gradients: `dA = dC·Bᵀ`, `dB = Aᵀ·dC`.
    pub fn matmul(&self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0] {
            return Err(Error::dim("matmul", a.shape(), b.shape()));
        }
        let (m, k) = (a.shape()[0], a.shape()[1]);
        let n = b.shape()[1];
        let av = a.values();
        let bv = b.values();
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for p in 0..k {
                let aip = av[i * k + p];
                for j in 0..n {
                    out[i * n + j] += aip * bv[p * n + j];
                }
            }
        }
        drop(av);
        drop(bv);
        let c = Tensor::computed(vec![m, n], out);
        let (a, b, c2) = (a.clone(), b.clone(), c.clone());
        self.record(move || {
            let dref = c2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            {
                let bv = b.values();
                a.accum_grad(|ga| {
                    for i in 0..m {
                        for p in 0..k {
                            let mut s = 0.0;
                            for j in 0..n {
                                s += d[i * n + j] * bv[p * n + j];
                            }
                            ga[i * k + p] += s;
                        }
                    }
                });
            }
            let av = a.values();
            b.accum_grad(|gb| {
                for p in 0..k {
                    for i in 0..m {
                        let aip = av[i * k + p];
                        for j in 0..n {
                            gb[p * n + j] += aip * d[i * n + j];
                        }
                    }
                }
            });
        });
        Ok(c)
    }

    /// Matrix-vector product `W[m×k] · x[k]`, the workhorse of every layer.
    pub fn matvec(&self, w: &Tensor, x: &Tensor) -> Result<Tensor> {
        if w.rank() != 2 || x.rank() != 1 || w.shape()[1] != x.shape()[0] {
            return Err(Error::dim("matvec", w.shape(), x.shape()));
        }
        let (m, k) = (w.shape()[0], w.shape()[1]);
        let wv = w.values();
        let xv = x.values();
        let mut out = vec![0.0; m];
        for i in 0..m {
            let row = &wv[i * k..(i + 1) * k];
            let mut s = 0.0;
            for (a, b) in row.iter().zip(xv.iter()) {
                s += a * b;
            }
            out[i] = s;
        }
        drop(wv);
        drop(xv);
        let y = Tensor::computed(vec![m], out);
        let (w, x, y2) = (w.clone(), x.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            {
                let xv = x.values();
                w.accum_grad(|gw| {
                    for i in 0..m {
                        let di = d[i];
                        for j in 0..k {
                            gw[i * k + j] += di * xv[j];
                        }
                    }
                });
            }
            let wv = w.values();
            x.accum_grad(|gx| {
                for i in 0..m {
                    let di = d[i];
                    for j in 0..k {
                        gx[j] += wv[i * k + j] * di;
                    }
                }
            });
        });
        Ok(y)
    }

    fn elementwise(
        &self,
        op: &'static str,
        a: &Tensor,
        b: &Tensor,
        fwd: fn(f64, f64) -> f64,
        back: fn(da: &mut [f64], db: &mut Vec<f64>, av: &[f64], bv: &[f64], d: &[f64]),
    ) -> Result<Tensor> {
        if a.shape() != b.shape() {
            return Err(Error::dim(op, a.shape(), b.shape()));
        }
        let out: Vec<f64> = a
            .values()
            .iter()
            .zip(b.values().iter())
            .map(|(&x, &y)| fwd(x, y))
            .collect();
        let c = Tensor::computed(a.shape().to_vec(), out);
        let (a, b, c2) = (a.clone(), b.clone(), c.clone());
        self.record(move || {
            let dref = c2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            // Inputs may alias each other; accumulate one side at a time.
            let av = a.to_vec();
            let bv = b.to_vec();
            let mut db = vec![0.0; bv.len()];
            a.accum_grad(|ga| back(ga, &mut db, &av, &bv, d));
            b.accum_grad(|gb| {
                for (g, inc) in gb.iter_mut().zip(db.iter()) {
                    *g += inc;
                }
            });
        });
        Ok(c)
    }

    pub fn add(&self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        self.elementwise("add", a, b, |x, y| x + y, |da, db, _, _, d| {
            for i in 0..d.len() {
                da[i] += d[i];
                db[i] += d[i];
            }
        })
    }

    pub fn sub(&self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        self.elementwise("sub", a, b, |x, y| x - y, |da, db, _, _, d| {
            for i in 0..d.len() {
                da[i] += d[i];
                db[i] -= d[i];
            }
        })
    }

    /// Hadamard (elementwise) product.
    pub fn hadamard(&self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        self.elementwise("hadamard", a, b, |x, y| x * y, |da, db, av, bv, d| {
            for i in 0..d.len() {
                da[i] += d[i] * bv[i];
                db[i] += d[i] * av[i];
            }
        })
    }

    /// Elementwise maximum; ties send the gradient to `a`.
    pub fn emax(&self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        self.elementwise("emax", a, b, |x, y| x.max(y), |da, db, av, bv, d| {
            for i in 0..d.len() {
                if av[i] >= bv[i] {
                    da[i] += d[i];
                } else {
                    db[i] += d[i];
                }
            }
        })
    }

    /// Multiply by a plain constant.
    pub fn scale(&self, a: &Tensor, c: f64) -> Result<Tensor> {
        let out: Vec<f64> = a.values().iter().map(|&x| x * c).collect();
        let y = Tensor::computed(a.shape().to_vec(), out);
        let (a, y2) = (a.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            a.accum_grad(|ga| {
                for (g, di) in ga.iter_mut().zip(d.iter()) {
                    *g += c * di;
                }
            });
        });
        Ok(y)
    }

    /// Multiply a tensor by a scalar *tensor*; gradient flows to both.
    pub fn scale_by(&self, v: &Tensor, s: &Tensor) -> Result<Tensor> {
        if s.numel() != 1 {
            return Err(Error::dim("scale_by", v.shape(), s.shape()));
        }
        let sv = s.item();
        let out: Vec<f64> = v.values().iter().map(|&x| x * sv).collect();
        let y = Tensor::computed(v.shape().to_vec(), out);
        let (v, s, y2) = (v.clone(), s.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            let sv = s.item();
            {
                let vv = v.values();
                s.accum_grad(|gs| {
                    let mut acc = 0.0;
                    for (x, di) in vv.iter().zip(d.iter()) {
                        acc += x * di;
                    }
                    gs[0] += acc;
                });
            }
            v.accum_grad(|gv| {
                for (g, di) in gv.iter_mut().zip(d.iter()) {
                    *g += sv * di;
                }
            });
        });
        Ok(y)
    }

    pub fn sigmoid(&self, x: &Tensor) -> Result<Tensor> {
        let out: Vec<f64> = x.values().iter().map(|&v| 1.0 / (1.0 + (-v).exp())).collect();
        let y = Tensor::computed(x.shape().to_vec(), out);
        let (x, y2) = (x.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            let yv = y2.to_vec();
            x.accum_grad(|gx| {
                for i in 0..d.len() {
                    gx[i] += d[i] * yv[i] * (1.0 - yv[i]);
                }
            });
        });
        Ok(y)
    }

    pub fn tanh(&self, x: &Tensor) -> Result<Tensor> {
        let out: Vec<f64> = x.values().iter().map(|&v| v.tanh()).collect();
        let y = Tensor::computed(x.shape().to_vec(), out);
        let (x, y2) = (x.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            let yv = y2.to_vec();
            x.accum_grad(|gx| {
                for i in 0..d.len() {
                    gx[i] += d[i] * (1.0 - yv[i] * yv[i]);
                }
            });
        });
        Ok(y)
    }

    /// Numerically stable softmax over a vector (max subtraction).
    pub fn softmax(&self, v: &Tensor) -> Result<Tensor> {
        if v.rank() != 1 || v.numel() == 0 {
            return Err(Error::dim("softmax", v.shape(), &[]));
        }
        let vv = v.values();
        let max = vv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = vv.iter().map(|&x| (x - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let out: Vec<f64> = exps.iter().map(|e| e / sum).collect();
        drop(vv);
        let y = Tensor::computed(v.shape().to_vec(), out);
        let (v, y2) = (v.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            let yv = y2.to_vec();
            let dotted: f64 = d.iter().zip(yv.iter()).map(|(a, b)| a * b).sum();
            v.accum_grad(|gv| {
                for i in 0..d.len() {
                    gv[i] += yv[i] * (d[i] - dotted);
                }
            });
        });
        Ok(y)
    }

    /// Concatenate two vectors; the gradient splits back.
    pub fn concat(&self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.rank() != 1 || b.rank() != 1 {
            return Err(Error::dim("concat", a.shape(), b.shape()));
        }
        let (na, nb) = (a.numel(), b.numel());
        let mut out = a.to_vec();
        out.extend_from_slice(&b.values());
        let y = Tensor::computed(vec![na + nb], out);
        let (a, b, y2) = (a.clone(), b.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            a.accum_grad(|ga| {
                for i in 0..na {
                    ga[i] += d[i];
                }
            });
            b.accum_grad(|gb| {
                for i in 0..nb {
                    gb[i] += d[na + i];
                }
            });
        });
        Ok(y)
    }

    /// Dot product of two equal-length vectors, as a scalar tensor.
    pub fn dot(&self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.rank() != 1 || a.shape() != b.shape() {
            return Err(Error::dim("dot", a.shape(), b.shape()));
        }
        let s: f64 = a.values().iter().zip(b.values().iter()).map(|(x, y)| x * y).sum();
        let y = Tensor::computed(vec![1], vec![s]);
        let (a, b, y2) = (a.clone(), b.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            let d0 = d[0];
            let av = a.to_vec();
            let bv = b.to_vec();
            a.accum_grad(|ga| {
                for (g, y) in ga.iter_mut().zip(bv.iter()) {
                    *g += d0 * y;
                }
            });
            b.accum_grad(|gb| {
                for (g, x) in gb.iter_mut().zip(av.iter()) {
                    *g += d0 * x;
                }
            });
        });
        Ok(y)
    }

    /// Select element `i` of a vector as a scalar tensor.
    pub fn index(&self, v: &Tensor, i: usize) -> Result<Tensor> {
        if v.rank() != 1 || i >= v.numel() {
            return Err(Error::contract(format!(
                "index {} out of range for shape {:?}",
                i,
                v.shape()
            )));
        }
        let y = Tensor::computed(vec![1], vec![v.value_at(i)]);
        let (v, y2) = (v.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            let d0 = d[0];
            v.accum_grad(|gv| gv[i] += d0);
        });
        Ok(y)
    }

    /// Sum of a vector's elements, as a scalar tensor.
    pub fn sum(&self, v: &Tensor) -> Result<Tensor> {
        if v.rank() != 1 {
            return Err(Error::dim("sum", v.shape(), &[]));
        }
        let s: f64 = v.values().iter().sum();
        let y = Tensor::computed(vec![1], vec![s]);
        let (v, y2) = (v.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            let d0 = d[0];
            v.accum_grad(|gv| {
                for g in gv.iter_mut() {
                    *g += d0;
                }
            });
        });
        Ok(y)
    }

    /// Select row `r` of a matrix; the gradient accumulates into that row only.
    pub fn row(&self, m: &Tensor, r: usize) -> Result<Tensor> {
        if m.rank() != 2 {
            return Err(Error::dim("row", m.shape(), &[]));
        }
        let (rows, cols) = (m.shape()[0], m.shape()[1]);
        if r >= rows {
            return Err(Error::contract(format!(
                "row {} out of range for shape {:?}",
                r,
                m.shape()
            )));
        }
        let out = m.values()[r * cols..(r + 1) * cols].to_vec();
        let y = Tensor::computed(vec![cols], out);
        let (m, y2) = (m.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            m.accum_grad(|gm| {
                for j in 0..cols {
                    gm[r * cols + j] += d[j];
                }
            });
        });
        Ok(y)
    }

    /// Binary cross-entropy of a predicted probability against a 0/1 label.
    ///
    /// `q` is clamped to `[1e-12, 1-1e-12]` before the logs; the gradient is
    /// zero where the clamp binds.
    pub fn bce(&self, q: &Tensor, label: f64) -> Result<Tensor> {
        if q.numel() != 1 {
            return Err(Error::dim("bce", q.shape(), &[1]));
        }
        if label != 0.0 && label != 1.0 {
            return Err(Error::contract(format!("bce label must be 0 or 1, got {label}")));
        }
        let qraw = q.item();
        let qc = qraw.clamp(BCE_EPS, 1.0 - BCE_EPS);
        let loss = -(label * qc.ln() + (1.0 - label) * (1.0 - qc).ln());
        let y = Tensor::computed(vec![1], vec![loss]);
        let (q, y2) = (q.clone(), y.clone());
        self.record(move || {
            let dref = y2.grad_ref();
            let Some(d) = dref.as_ref() else { return };
            let qraw = q.item();
            if qraw <= BCE_EPS || qraw >= 1.0 - BCE_EPS {
                return; // clamped flat region
            }
            let g = (qraw - label) / (qraw * (1.0 - qraw));
            let d0 = d[0];
            q.accum_grad(|gq| gq[0] += d0 * g);
        });
        Ok(y)
    }

    /// Reverse traversal: populates `grad` for every tensor reachable from
    /// `loss`, leaves included. One traversal per tape.
    pub fn backward(&self, loss: &Tensor) -> Result<()> {
        if loss.numel() != 1 {
            return Err(Error::contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                loss.shape()
            )));
        }
        if self.spent.replace(true) {
            return Err(Error::contract(
                "backward already ran on this tape".to_string(),
            ));
        }
        loss.accum_grad(|g| g[0] += 1.0);
        for step in self.steps.borrow().iter().rev() {
            step();
        }
        Ok(())
    }
}

/// SGD with classical momentum: `v ← momentum·v + g`, `p ← p − lr·v`.
///
/// One velocity buffer per registered parameter, initialized to zero.
pub struct OptimizerState {
    learning_rate: f64,
    momentum: f64,
    velocity: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new(learning_rate: f64, momentum: f64, params: &[Tensor]) -> Result<OptimizerState> {
        if !learning_rate.is_finite() || learning_rate < 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be non-negative, got {learning_rate}"
            )));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::Config(format!(
                "momentum must be in [0, 1), got {momentum}"
            )));
        }
        Ok(OptimizerState {
            learning_rate,
            momentum,
            velocity: params.iter().map(|p| vec![0.0; p.numel()]).collect(),
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    /// One update over the same parameter list the state was built with.
    /// Gradients are consumed (cleared) by the step.
    pub fn step(&mut self, params: &[Tensor]) -> Result<()> {
        if params.len() != self.velocity.len() {
            return Err(Error::contract(format!(
                "optimizer registered {} parameters, got {}",
                self.velocity.len(),
                params.len()
            )));
        }
        for (p, v) in params.iter().zip(self.velocity.iter_mut()) {
            if p.numel() != v.len() {
                return Err(Error::contract(
                    "parameter shape changed since optimizer registration".to_string(),
                ));
            }
            let g = p.grad_or_zeros();
            {
                let mut values = p.inner.values.borrow_mut();
                for i in 0..v.len() {
                    v[i] = self.momentum * v[i] + g[i];
                    values[i] -= self.learning_rate * v[i];
                }
            }
            p.clear_grad();
        }
        Ok(())
    }
}
