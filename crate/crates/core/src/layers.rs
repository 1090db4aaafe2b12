//! Reusable neural layers: GRU cell, bidirectional GRU runner,
//! relevance-vector attention, average/max pooling, embedding lookup,
//! sigmoid classifier, and binary cross-entropy.
//!
//! Layers are parameter containers; forward passes go through a [`Tape`]
//! and never mutate the parameters, so read-only concurrent forwards on
//! separate tapes are safe. Updates require exclusive access.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{Tape, Tensor};

/// Reserved token id for padding; its embedding row is frozen at zero.
pub const PAD_ID: usize = 0;
/// Reserved token id for unknown words.
pub const UNK_ID: usize = 1;

fn uniform(rng: &mut impl Rng, n: usize, bound: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-bound..bound)).collect()
}

/// Gated recurrent unit: update gate `z`, reset gate `r`, candidate state,
/// and a convex combination of previous and candidate states.
#[derive(Debug, Clone)]
pub struct GRUCell {
    pub w_z: Tensor,
    pub w_r: Tensor,
    pub w_h: Tensor,
    pub u_z: Tensor,
    pub u_r: Tensor,
    pub u_h: Tensor,
    pub b_z: Tensor,
    pub b_r: Tensor,
    pub b_h: Tensor,
    input_dim: usize,
    hidden_dim: usize,
}

impl GRUCell {
    /// Fresh cell with uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weight
    /// matrices and zero biases.
    pub fn new(input_dim: usize, hidden_dim: usize, rng: &mut impl Rng) -> GRUCell {
        assert!(input_dim >= 1 && hidden_dim >= 1);
        let wb = 1.0 / (input_dim as f64).sqrt();
        let ub = 1.0 / (hidden_dim as f64).sqrt();
        fn mat<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: f64) -> Tensor {
            Tensor::param(vec![rows, cols], uniform(rng, rows * cols, bound)).expect("gru init")
        }
        GRUCell {
            w_z: mat(rng, hidden_dim, input_dim, wb),
            w_r: mat(rng, hidden_dim, input_dim, wb),
            w_h: mat(rng, hidden_dim, input_dim, wb),
            u_z: mat(rng, hidden_dim, hidden_dim, ub),
            u_r: mat(rng, hidden_dim, hidden_dim, ub),
            u_h: mat(rng, hidden_dim, hidden_dim, ub),
            b_z: Tensor::param(vec![hidden_dim], vec![0.0; hidden_dim]).unwrap(),
            b_r: Tensor::param(vec![hidden_dim], vec![0.0; hidden_dim]).unwrap(),
            b_h: Tensor::param(vec![hidden_dim], vec![0.0; hidden_dim]).unwrap(),
            input_dim,
            hidden_dim,
        }
    }

    /// All-zero cell (tests and checkpoint loading).
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> GRUCell {
        let mat = |r, c| Tensor::param(vec![r, c], vec![0.0; r * c]).unwrap();
        GRUCell {
            w_z: mat(hidden_dim, input_dim),
            w_r: mat(hidden_dim, input_dim),
            w_h: mat(hidden_dim, input_dim),
            u_z: mat(hidden_dim, hidden_dim),
            u_r: mat(hidden_dim, hidden_dim),
            u_h: mat(hidden_dim, hidden_dim),
            b_z: Tensor::param(vec![hidden_dim], vec![0.0; hidden_dim]).unwrap(),
            b_r: Tensor::param(vec![hidden_dim], vec![0.0; hidden_dim]).unwrap(),
            b_h: Tensor::param(vec![hidden_dim], vec![0.0; hidden_dim]).unwrap(),
            input_dim,
            hidden_dim,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn zero_state(&self) -> Tensor {
        Tensor::zeros(vec![self.hidden_dim])
    }

    /// One recurrence step:
    /// `z = σ(W_z x + U_z h + b_z)`, `r = σ(W_r x + U_r h + b_r)`,
    /// `h̃ = tanh(W_h x + U_h (r ⊙ h) + b_h)`, `h' = (1−z) ⊙ h + z ⊙ h̃`.
    pub fn step(&self, tape: &Tape, x: &Tensor, h_prev: &Tensor) -> Result<Tensor> {
        if x.shape() != [self.input_dim] {
            return Err(Error::dim("gru_step input", x.shape(), &[self.input_dim]));
        }
        if h_prev.shape() != [self.hidden_dim] {
            return Err(Error::dim("gru_step state", h_prev.shape(), &[self.hidden_dim]));
        }
        let gate = |w: &Tensor, u: &Tensor, b: &Tensor| -> Result<Tensor> {
            let wx = tape.matvec(w, x)?;
            let uh = tape.matvec(u, h_prev)?;
            tape.add(&tape.add(&wx, &uh)?, b)
        };
        let z = tape.sigmoid(&gate(&self.w_z, &self.u_z, &self.b_z)?)?;
        let r = tape.sigmoid(&gate(&self.w_r, &self.u_r, &self.b_r)?)?;
        let rh = tape.hadamard(&r, h_prev)?;
        let wx = tape.matvec(&self.w_h, x)?;
        let uh = tape.matvec(&self.u_h, &rh)?;
        let candidate = tape.tanh(&tape.add(&tape.add(&wx, &uh)?, &self.b_h)?)?;
        let ones = Tensor::vector(vec![1.0; self.hidden_dim]);
        let keep = tape.hadamard(&tape.sub(&ones, &z)?, h_prev)?;
        let take = tape.hadamard(&z, &candidate)?;
        tape.add(&keep, &take)
    }

    pub fn params(&self, prefix: &str) -> Vec<(String, Tensor)> {
        [
            ("w_z", &self.w_z),
            ("w_r", &self.w_r),
            ("w_h", &self.w_h),
            ("u_z", &self.u_z),
            ("u_r", &self.u_r),
            ("u_h", &self.u_h),
            ("b_z", &self.b_z),
            ("b_r", &self.b_r),
            ("b_h", &self.b_h),
        ]
        .into_iter()
        .map(|(name, t)| (format!("{prefix}.{name}"), t.clone()))
        .collect()
    }
}

/// Run a forward and a backward GRU over a sequence; annotation `j` is the
/// concatenation of the forward state after reading `x_1..x_j` and the
/// backward state after reading `x_T..x_j`. Initial states are zero.
pub fn bigru_run(tape: &Tape, fwd: &GRUCell, bwd: &GRUCell, sequence: &[Tensor]) -> Result<Vec<Tensor>> {
    if sequence.is_empty() {
        return Err(Error::contract("bigru_run: empty sequence"));
    }
    if fwd.input_dim != bwd.input_dim || fwd.hidden_dim != bwd.hidden_dim {
        return Err(Error::dim(
            "bigru_run cells",
            &[fwd.input_dim, fwd.hidden_dim],
            &[bwd.input_dim, bwd.hidden_dim],
        ));
    }
    let t = sequence.len();
    let mut forward = Vec::with_capacity(t);
    let mut state = fwd.zero_state();
    for x in sequence {
        state = fwd.step(tape, x, &state)?;
        forward.push(state.clone());
    }
    let mut backward = vec![None; t];
    let mut state = bwd.zero_state();
    for (j, x) in sequence.iter().enumerate().rev() {
        state = bwd.step(tape, x, &state)?;
        backward[j] = Some(state.clone());
    }
    forward
        .iter()
        .zip(backward.into_iter())
        .map(|(f, b)| tape.concat(f, &b.expect("filled")))
        .collect()
}

/// One-layer MLP over each annotation plus a trained relevance vector;
/// softmax similarities become the weights of an attentive sum.
#[derive(Debug, Clone)]
pub struct AttentionLayer {
    pub w: Tensor,
    pub b: Tensor,
    pub u: Tensor,
    ann_dim: usize,
}

impl AttentionLayer {
    pub fn new(ann_dim: usize, att_dim: usize, rng: &mut impl Rng) -> AttentionLayer {
        let bound = 1.0 / (ann_dim as f64).sqrt();
        AttentionLayer {
            w: Tensor::param(vec![att_dim, ann_dim], uniform(rng, att_dim * ann_dim, bound))
                .unwrap(),
            b: Tensor::param(vec![att_dim], vec![0.0; att_dim]).unwrap(),
            u: Tensor::param(vec![att_dim], uniform(rng, att_dim, 0.25)).unwrap(),
            ann_dim,
        }
    }

    pub fn zeros(ann_dim: usize, att_dim: usize) -> AttentionLayer {
        AttentionLayer {
            w: Tensor::param(vec![att_dim, ann_dim], vec![0.0; att_dim * ann_dim]).unwrap(),
            b: Tensor::param(vec![att_dim], vec![0.0; att_dim]).unwrap(),
            u: Tensor::param(vec![att_dim], vec![0.0; att_dim]).unwrap(),
            ann_dim,
        }
    }

    pub fn ann_dim(&self) -> usize {
        self.ann_dim
    }

    /// Attentive sum of `annotations`. Returns the context vector together
    /// with the softmax weights (one per annotation, summing to 1).
    pub fn pool(&self, tape: &Tape, annotations: &[Tensor]) -> Result<(Tensor, Tensor)> {
        if annotations.is_empty() {
            return Err(Error::contract("attention_pool: no annotations"));
        }
        let mut logits: Option<Tensor> = None;
        for h in annotations {
            if h.shape() != [self.ann_dim] {
                return Err(Error::dim("attention_pool", h.shape(), &[self.ann_dim]));
            }
            let proj = tape.tanh(&tape.add(&tape.matvec(&self.w, h)?, &self.b)?)?;
            let score = tape.dot(&proj, &self.u)?;
            logits = Some(match logits {
                None => score,
                Some(acc) => tape.concat(&acc, &score)?,
            });
        }
        let weights = tape.softmax(&logits.expect("non-empty"))?;
        let mut context: Option<Tensor> = None;
        for (j, h) in annotations.iter().enumerate() {
            let wj = tape.index(&weights, j)?;
            let term = tape.scale_by(h, &wj)?;
            context = Some(match context {
                None => term,
                Some(acc) => tape.add(&acc, &term)?,
            });
        }
        Ok((context.expect("non-empty"), weights))
    }

    pub fn params(&self, prefix: &str) -> Vec<(String, Tensor)> {
        vec![
            (format!("{prefix}.w"), self.w.clone()),
            (format!("{prefix}.b"), self.b.clone()),
            (format!("{prefix}.u"), self.u.clone()),
        ]
    }
}

/// Elementwise mean across a list of equal-shaped vectors.
pub fn average_pool(tape: &Tape, annotations: &[Tensor]) -> Result<Tensor> {
    if annotations.is_empty() {
        return Err(Error::contract("average_pool: no annotations"));
    }
    let mut acc = annotations[0].clone();
    for a in &annotations[1..] {
        acc = tape.add(&acc, a)?;
    }
    tape.scale(&acc, 1.0 / annotations.len() as f64)
}

/// Elementwise max across a list of equal-shaped vectors.
pub fn max_pool(tape: &Tape, annotations: &[Tensor]) -> Result<Tensor> {
    if annotations.is_empty() {
        return Err(Error::contract("max_pool: no annotations"));
    }
    let mut acc = annotations[0].clone();
    for a in &annotations[1..] {
        acc = tape.emax(&acc, a)?;
    }
    Ok(acc)
}

/// Token-id to embedding-row lookup table. Row `PAD_ID` stays zero and
/// never receives gradient.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub weights: Tensor,
    pub trainable: bool,
    vocab_size: usize,
    dim: usize,
}

impl EmbeddingTable {
    /// All non-PAD rows drawn uniform(-0.25, 0.25).
    pub fn seeded_uniform(vocab_size: usize, dim: usize, rng: &mut impl Rng) -> EmbeddingTable {
        let mut values = vec![0.0; vocab_size * dim];
        for row in 1..vocab_size {
            for v in &mut values[row * dim..(row + 1) * dim] {
                *v = rng.random_range(-0.25..0.25);
            }
        }
        EmbeddingTable {
            weights: Tensor::param(vec![vocab_size, dim], values).unwrap(),
            trainable: true,
            vocab_size,
            dim,
        }
    }

    /// Build from explicit rows; row `PAD_ID` is forced to zero.
    pub fn from_rows(rows: Vec<Vec<f64>>, trainable: bool) -> Result<EmbeddingTable> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::contract("embedding table must be non-empty"));
        }
        let dim = rows[0].len();
        let vocab_size = rows.len();
        let mut values = Vec::with_capacity(vocab_size * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::dim("embedding rows", &[row.len()], &[dim]));
            }
            if i == PAD_ID {
                values.extend(std::iter::repeat(0.0).take(dim));
            } else {
                values.extend_from_slice(row);
            }
        }
        Ok(EmbeddingTable {
            weights: Tensor::param(vec![vocab_size, dim], values).unwrap(),
            trainable,
            vocab_size,
            dim,
        })
    }

    pub fn zeros(vocab_size: usize, dim: usize) -> EmbeddingTable {
        EmbeddingTable {
            weights: Tensor::param(vec![vocab_size, dim], vec![0.0; vocab_size * dim]).unwrap(),
            trainable: true,
            vocab_size,
            dim,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Embedding of one token id. PAD yields a detached zero vector, so the
    /// PAD row can never be updated.
    pub fn lookup(&self, tape: &Tape, id: usize) -> Result<Tensor> {
        if id >= self.vocab_size {
            return Err(Error::contract(format!(
                "token id {} out of range (vocab size {})",
                id, self.vocab_size
            )));
        }
        if id == PAD_ID {
            return Ok(Tensor::zeros(vec![self.dim]));
        }
        tape.row(&self.weights, id)
    }

    pub fn embed(&self, tape: &Tape, ids: &[usize]) -> Result<Vec<Tensor>> {
        ids.iter().map(|&id| self.lookup(tape, id)).collect()
    }

    pub fn params(&self, prefix: &str) -> Vec<(String, Tensor)> {
        vec![(format!("{prefix}.weights"), self.weights.clone())]
    }
}

/// Final sigmoid layer: `sigmoid(w · v + b)`.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub w: Tensor,
    pub b: Tensor,
    dim: usize,
}

impl Classifier {
    pub fn new(dim: usize, rng: &mut impl Rng) -> Classifier {
        let bound = 1.0 / (dim as f64).sqrt();
        Classifier {
            w: Tensor::param(vec![dim], uniform(rng, dim, bound)).unwrap(),
            b: Tensor::param(vec![1], vec![0.0]).unwrap(),
            dim,
        }
    }

    pub fn zeros(dim: usize) -> Classifier {
        Classifier {
            w: Tensor::param(vec![dim], vec![0.0; dim]).unwrap(),
            b: Tensor::param(vec![1], vec![0.0]).unwrap(),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Probability of the positive (fake) class, strictly inside (0, 1).
    pub fn apply(&self, tape: &Tape, v: &Tensor) -> Result<Tensor> {
        if v.shape() != [self.dim] {
            return Err(Error::dim("classify", v.shape(), &[self.dim]));
        }
        let z = tape.add(&tape.dot(&self.w, v)?, &self.b)?;
        tape.sigmoid(&z)
    }

    pub fn params(&self, prefix: &str) -> Vec<(String, Tensor)> {
        vec![
            (format!("{prefix}.w"), self.w.clone()),
            (format!("{prefix}.b"), self.b.clone()),
        ]
    }
}

/// Per-example binary cross-entropy; `label` is 0 (genuine) or 1 (fake).
pub fn bce_loss(tape: &Tape, q: &Tensor, label: f64) -> Result<Tensor> {
    tape.bce(q, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn gru_step_zero_params() {
        let cell = GRUCell::zeros(3, 2);
        let tape = Tape::new();
        let x = Tensor::vector(vec![0.4, -0.2, 1.0]);
        let h = Tensor::vector(vec![1.0, -1.0]);
        // z = r = 0.5, candidate = 0, so h' = 0.5 * h_prev
        let out = cell.step(&tape, &x, &h).unwrap();
        assert_close(&out.to_vec(), &[0.5, -0.5], 1e-15);

        let h0 = Tensor::vector(vec![0.0, 0.0]);
        let out0 = cell.step(&tape, &x, &h0).unwrap();
        assert_close(&out0.to_vec(), &[0.0, 0.0], 1e-15);
    }

    #[test]
    fn gru_step_scalar_recurrence_oracle() {
        // hidden=1, input=1, every weight 1, biases 0
        let cell = GRUCell::zeros(1, 1);
        for t in [&cell.w_z, &cell.w_r, &cell.w_h, &cell.u_z, &cell.u_r, &cell.u_h] {
            t.set_values(&[1.0]).unwrap();
        }
        let tape = Tape::new();
        let x = Tensor::vector(vec![1.0]);
        let h = Tensor::vector(vec![0.0]);
        let got = cell.step(&tape, &x, &h).unwrap().item();

        // independent scalar evaluation, one equation at a time
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let (xv, hv) = (1.0, 0.0);
        let z = sig(1.0 * xv + 1.0 * hv);
        let r = sig(1.0 * xv + 1.0 * hv);
        let cand = (1.0 * xv + 1.0 * (r * hv)).tanh();
        let expect = (1.0 - z) * hv + z * cand;
        assert!((got - expect).abs() <= 1e-12);
    }

    #[test]
    fn gru_step_dimension_errors() {
        let cell = GRUCell::zeros(3, 2);
        let tape = Tape::new();
        let bad_x = Tensor::vector(vec![1.0, 2.0]);
        let h = Tensor::vector(vec![0.0, 0.0]);
        assert!(cell.step(&tape, &bad_x, &h).is_err());
    }

    #[test]
    fn gru_output_between_state_and_candidate() {
        // convex combination: every coordinate of h' lies between h and h~
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cell = GRUCell::new(3, 4, &mut rng);
        let tape = Tape::new();
        let x = Tensor::vector((0..3).map(|i| (i as f64) / 2.0 - 0.5).collect());
        let h = Tensor::vector(vec![0.8, -0.3, 0.1, -0.9]);
        let out = cell.step(&tape, &x, &h).unwrap().to_vec();
        // recompute candidate by hand from tape-free math
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mv = |w: &Tensor, v: &[f64]| -> Vec<f64> {
            let (r, c) = (w.shape()[0], w.shape()[1]);
            let wv = w.to_vec();
            (0..r)
                .map(|i| (0..c).map(|j| wv[i * c + j] * v[j]).sum())
                .collect()
        };
        let xv = x.to_vec();
        let hv = h.to_vec();
        let rgate: Vec<f64> = mv(&cell.w_r, &xv)
            .iter()
            .zip(mv(&cell.u_r, &hv))
            .map(|(a, b)| sig(a + b))
            .collect();
        let rh: Vec<f64> = rgate.iter().zip(hv.iter()).map(|(r, h)| r * h).collect();
        let cand: Vec<f64> = mv(&cell.w_h, &xv)
            .iter()
            .zip(mv(&cell.u_h, &rh))
            .map(|(a, b)| (a + b).tanh())
            .collect();
        for i in 0..4 {
            let lo = hv[i].min(cand[i]) - 1e-12;
            let hi = hv[i].max(cand[i]) + 1e-12;
            assert!(out[i] >= lo && out[i] <= hi);
        }
    }

    #[test]
    fn bigru_single_step_definitional() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fwd = GRUCell::new(3, 2, &mut rng);
        let bwd = GRUCell::new(3, 2, &mut rng);
        let tape = Tape::new();
        let x = Tensor::vector(vec![0.1, -0.4, 0.9]);
        let anns = bigru_run(&tape, &fwd, &bwd, &[x.clone()]).unwrap();
        assert_eq!(anns.len(), 1);
        let f = fwd.step(&tape, &x, &fwd.zero_state()).unwrap();
        let b = bwd.step(&tape, &x, &bwd.zero_state()).unwrap();
        let expect = tape.concat(&f, &b).unwrap();
        assert_close(&anns[0].to_vec(), &expect.to_vec(), 1e-15);
    }

    #[test]
    fn bigru_palindrome_symmetry() {
        // shared cell + palindromic input: forward half of annotation j
        // equals backward half of annotation T+1-j
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cell = GRUCell::new(2, 3, &mut rng);
        let tape = Tape::new();
        let x = Tensor::vector(vec![0.3, -0.6]);
        let y = Tensor::vector(vec![-0.2, 0.5]);
        let seq = [x.clone(), y, x];
        let anns = bigru_run(&tape, &cell, &cell, &seq).unwrap();
        for j in 0..3 {
            let a = anns[j].to_vec();
            let b = anns[2 - j].to_vec();
            assert_close(&a[..3], &b[3..], 1e-12);
        }
    }

    #[test]
    fn bigru_empty_sequence_errors() {
        let cell = GRUCell::zeros(2, 2);
        let tape = Tape::new();
        assert!(bigru_run(&tape, &cell, &cell, &[]).is_err());
    }

    #[test]
    fn attention_single_and_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layer = AttentionLayer::new(4, 4, &mut rng);
        let tape = Tape::new();
        let h = Tensor::vector(vec![0.5, -0.1, 0.9, 0.2]);
        let (ctx, w) = layer.pool(&tape, &[h.clone()]).unwrap();
        assert_eq!(w.to_vec(), vec![1.0]);
        assert_close(&ctx.to_vec(), &h.to_vec(), 1e-15);

        let (ctx2, w2) = layer.pool(&tape, &[h.clone(), h.clone()]).unwrap();
        assert_close(&w2.to_vec(), &[0.5, 0.5], 1e-12);
        assert_close(&ctx2.to_vec(), &h.to_vec(), 1e-12);
    }

    #[test]
    fn attention_permutation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let layer = AttentionLayer::new(3, 3, &mut rng);
        let tape = Tape::new();
        let anns: Vec<Tensor> = (0..4)
            .map(|_| Tensor::vector((0..3).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let (ctx, w) = layer.pool(&tape, &anns).unwrap();
        let permuted = [anns[2].clone(), anns[0].clone(), anns[3].clone(), anns[1].clone()];
        let (ctx_p, w_p) = layer.pool(&tape, &permuted).unwrap();
        let wv = w.to_vec();
        let wp = w_p.to_vec();
        assert_close(&[wp[0], wp[1], wp[2], wp[3]], &[wv[2], wv[0], wv[3], wv[1]], 1e-12);
        assert_close(&ctx.to_vec(), &ctx_p.to_vec(), 1e-12);
    }

    #[test]
    fn attention_context_in_convex_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let layer = AttentionLayer::new(3, 3, &mut rng);
        let tape = Tape::new();
        let anns: Vec<Tensor> = (0..5)
            .map(|_| Tensor::vector((0..3).map(|_| rng.random_range(-2.0..2.0)).collect()))
            .collect();
        let (ctx, w) = layer.pool(&tape, &anns).unwrap();
        let sum: f64 = w.to_vec().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        for wv in w.to_vec() {
            assert!(wv > 0.0 && wv <= 1.0);
        }
        let ctxv = ctx.to_vec();
        for c in 0..3 {
            let coords: Vec<f64> = anns.iter().map(|a| a.value_at(c)).collect();
            let lo = coords.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(ctxv[c] >= lo - 1e-12 && ctxv[c] <= hi + 1e-12);
        }
    }

    #[test]
    fn pooling_examples() {
        let tape = Tape::new();
        let a = Tensor::vector(vec![1.0, 3.0]);
        let b = Tensor::vector(vec![3.0, 5.0]);
        assert_eq!(average_pool(&tape, &[a.clone(), b]).unwrap().to_vec(), vec![2.0, 4.0]);
        let c = Tensor::vector(vec![1.0, 5.0]);
        let d = Tensor::vector(vec![3.0, 2.0]);
        assert_eq!(max_pool(&tape, &[c, d]).unwrap().to_vec(), vec![3.0, 5.0]);
        assert_eq!(average_pool(&tape, &[a.clone()]).unwrap().to_vec(), a.to_vec());
        assert_eq!(max_pool(&tape, &[a.clone()]).unwrap().to_vec(), a.to_vec());
        assert!(average_pool(&tape, &[]).is_err());
        assert!(max_pool(&tape, &[]).is_err());
    }

    #[test]
    fn embedding_lookup_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let table = EmbeddingTable::seeded_uniform(5, 3, &mut rng);
        let tape = Tape::new();
        assert_eq!(table.lookup(&tape, PAD_ID).unwrap().to_vec(), vec![0.0; 3]);
        let row2 = table.lookup(&tape, 2).unwrap().to_vec();
        let w = table.weights.to_vec();
        assert_eq!(row2, w[6..9].to_vec());
        assert!(table.lookup(&tape, 5).is_err());
        for v in &w[3..] {
            assert!(*v > -0.25 && *v < 0.25);
        }
    }

    #[test]
    fn embedding_gradient_touches_only_used_rows() {
        use crate::tensor::OptimizerState;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let table = EmbeddingTable::seeded_uniform(6, 3, &mut rng);
        let before = table.weights.to_vec();
        let tape = Tape::new();
        let x = table.lookup(&tape, 3).unwrap();
        let s = tape.sum(&x).unwrap();
        tape.backward(&s).unwrap();
        let params = [table.weights.clone()];
        let mut opt = OptimizerState::new(0.1, 0.0, &params).unwrap();
        opt.step(&params).unwrap();
        let after = table.weights.to_vec();
        for row in 0..6 {
            let changed = before[row * 3..(row + 1) * 3] != after[row * 3..(row + 1) * 3];
            assert_eq!(changed, row == 3, "row {row}");
        }
    }

    #[test]
    fn classifier_examples() {
        let tape = Tape::new();
        let c = Classifier::zeros(3);
        let v = Tensor::vector(vec![0.7, -0.2, 0.1]);
        assert_eq!(c.apply(&tape, &v).unwrap().item(), 0.5);

        let c1 = Classifier::zeros(1);
        c1.w.set_values(&[1.0]).unwrap();
        assert_eq!(c1.apply(&tape, &Tensor::vector(vec![0.0])).unwrap().item(), 0.5);

        c1.b.set_values(&[20.0]).unwrap();
        let p = c1.apply(&tape, &Tensor::vector(vec![0.0])).unwrap().item();
        assert!(p >= 1.0 - 1e-8);

        let wrong = Tensor::vector(vec![1.0, 2.0]);
        assert!(c1.apply(&tape, &wrong).is_err());
    }

    #[test]
    fn bce_loss_examples() {
        let tape = Tape::new();
        let half = Tensor::scalar(0.5);
        assert!((bce_loss(&tape, &half, 1.0).unwrap().item() - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((bce_loss(&tape, &half, 0.0).unwrap().item() - std::f64::consts::LN_2).abs() < 1e-12);
    }
}
