//! Straight-line oracle: a tape-free, plain-f64 re-implementation of the
//! forward equations, used to falsify the tensor-engine path. Softmax here
//! is the textbook exp/sum form (no max subtraction) so the two routes are
//! genuinely independent.
#![allow(dead_code)]

use threehan::data::EncodedArticle;
use threehan::layers::{AttentionLayer, Classifier, EmbeddingTable, GRUCell};
use threehan::model::ThreeHanModel;
use threehan::tensor::Tensor;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    (0..rows)
        .map(|i| (0..cols).map(|j| w[i * cols + j] * x[j]).sum())
        .collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn grab(t: &Tensor) -> Vec<f64> {
    t.to_vec()
}

pub struct OracleCell {
    w_z: Vec<f64>,
    w_r: Vec<f64>,
    w_h: Vec<f64>,
    u_z: Vec<f64>,
    u_r: Vec<f64>,
    u_h: Vec<f64>,
    b_z: Vec<f64>,
    b_r: Vec<f64>,
    b_h: Vec<f64>,
    pub input: usize,
    pub hidden: usize,
}

impl OracleCell {
    pub fn from_cell(cell: &GRUCell) -> OracleCell {
        OracleCell {
            w_z: grab(&cell.w_z),
            w_r: grab(&cell.w_r),
            w_h: grab(&cell.w_h),
            u_z: grab(&cell.u_z),
            u_r: grab(&cell.u_r),
            u_h: grab(&cell.u_h),
            b_z: grab(&cell.b_z),
            b_r: grab(&cell.b_r),
            b_h: grab(&cell.b_h),
            input: cell.input_dim(),
            hidden: cell.hidden_dim(),
        }
    }

    pub fn step(&self, x: &[f64], h_prev: &[f64]) -> Vec<f64> {
        let (n, k) = (self.hidden, self.input);
        let z: Vec<f64> = add(&matvec(&self.w_z, n, k, x), &matvec(&self.u_z, n, n, h_prev))
            .iter()
            .zip(&self.b_z)
            .map(|(v, b)| sigmoid(v + b))
            .collect();
        let r: Vec<f64> = add(&matvec(&self.w_r, n, k, x), &matvec(&self.u_r, n, n, h_prev))
            .iter()
            .zip(&self.b_r)
            .map(|(v, b)| sigmoid(v + b))
            .collect();
        let rh: Vec<f64> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
        let cand: Vec<f64> = add(&matvec(&self.w_h, n, k, x), &matvec(&self.u_h, n, n, &rh))
            .iter()
            .zip(&self.b_h)
            .map(|(v, b)| (v + b).tanh())
            .collect();
        (0..n)
            .map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * cand[i])
            .collect()
    }
}

pub fn oracle_bigru(fwd: &OracleCell, bwd: &OracleCell, seq: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let t = seq.len();
    let mut forward = Vec::with_capacity(t);
    let mut h = vec![0.0; fwd.hidden];
    for x in seq {
        h = fwd.step(x, &h);
        forward.push(h.clone());
    }
    let mut backward = vec![Vec::new(); t];
    let mut h = vec![0.0; bwd.hidden];
    for j in (0..t).rev() {
        h = bwd.step(&seq[j], &h);
        backward[j] = h.clone();
    }
    (0..t)
        .map(|j| {
            let mut ann = forward[j].clone();
            ann.extend_from_slice(&backward[j]);
            ann
        })
        .collect()
}

pub struct OracleAttention {
    w: Vec<f64>,
    b: Vec<f64>,
    u: Vec<f64>,
    ann: usize,
    att: usize,
}

impl OracleAttention {
    pub fn from_layer(layer: &AttentionLayer) -> OracleAttention {
        let att = layer.b.numel();
        OracleAttention {
            w: grab(&layer.w),
            b: grab(&layer.b),
            u: grab(&layer.u),
            ann: layer.ann_dim(),
            att,
        }
    }

    pub fn pool(&self, annotations: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        let mut scores = Vec::with_capacity(annotations.len());
        for h in annotations {
            let proj: Vec<f64> = add(&matvec(&self.w, self.att, self.ann, h), &self.b)
                .iter()
                .map(|v| v.tanh())
                .collect();
            scores.push(proj.iter().zip(&self.u).map(|(a, b)| a * b).sum::<f64>());
        }
        let total: f64 = scores.iter().map(|s| s.exp()).sum();
        let weights: Vec<f64> = scores.iter().map(|s| s.exp() / total).collect();
        let mut context = vec![0.0; self.ann];
        for (w, h) in weights.iter().zip(annotations) {
            for i in 0..self.ann {
                context[i] += w * h[i];
            }
        }
        (context, weights)
    }
}

pub struct OracleEmbedding {
    rows: Vec<f64>,
    dim: usize,
}

impl OracleEmbedding {
    pub fn from_table(table: &EmbeddingTable) -> OracleEmbedding {
        OracleEmbedding {
            rows: grab(&table.weights),
            dim: table.dim(),
        }
    }

    pub fn lookup(&self, id: usize) -> Vec<f64> {
        self.rows[id * self.dim..(id + 1) * self.dim].to_vec()
    }
}

pub struct OracleClassifier {
    w: Vec<f64>,
    b: f64,
}

impl OracleClassifier {
    pub fn from_classifier(c: &Classifier) -> OracleClassifier {
        OracleClassifier {
            w: grab(&c.w),
            b: c.b.item(),
        }
    }

    pub fn apply(&self, v: &[f64]) -> f64 {
        sigmoid(self.w.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() + self.b)
    }
}

/// Whole-stack oracle over an attention-composed 3HAN.
pub struct Oracle3Han {
    pub embedding: OracleEmbedding,
    pub word_fwd: OracleCell,
    pub word_bwd: OracleCell,
    pub word_att: OracleAttention,
    pub sent_fwd: OracleCell,
    pub sent_bwd: OracleCell,
    pub sent_att: OracleAttention,
    pub head_fwd: OracleCell,
    pub head_bwd: OracleCell,
    pub head_att: OracleAttention,
    pub classifier: OracleClassifier,
}

pub struct OracleTrace {
    pub word_weights: Vec<Vec<f64>>,
    pub sentence_weights: Vec<f64>,
    pub headline_weights: Vec<f64>,
}

impl Oracle3Han {
    pub fn from_model(m: &ThreeHanModel) -> Oracle3Han {
        Oracle3Han {
            embedding: OracleEmbedding::from_table(&m.embedding),
            word_fwd: OracleCell::from_cell(&m.word_fwd),
            word_bwd: OracleCell::from_cell(&m.word_bwd),
            word_att: OracleAttention::from_layer(m.word_att.as_ref().expect("attention")),
            sent_fwd: OracleCell::from_cell(&m.sent_fwd),
            sent_bwd: OracleCell::from_cell(&m.sent_bwd),
            sent_att: OracleAttention::from_layer(m.sent_att.as_ref().expect("attention")),
            head_fwd: OracleCell::from_cell(&m.head_fwd),
            head_bwd: OracleCell::from_cell(&m.head_bwd),
            head_att: OracleAttention::from_layer(m.head_att.as_ref().expect("attention")),
            classifier: OracleClassifier::from_classifier(&m.classifier),
        }
    }

    pub fn encode_sentence(&self, ids: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let embeds: Vec<Vec<f64>> = ids.iter().map(|&i| self.embedding.lookup(i)).collect();
        let anns = oracle_bigru(&self.word_fwd, &self.word_bwd, &embeds);
        self.word_att.pool(&anns)
    }

    pub fn encode_body(&self, sentence_vectors: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        let anns = oracle_bigru(&self.sent_fwd, &self.sent_bwd, sentence_vectors);
        self.sent_att.pool(&anns)
    }

    pub fn encode_headline(&self, ids: &[usize], body_vector: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut seq: Vec<Vec<f64>> = ids.iter().map(|&i| self.embedding.lookup(i)).collect();
        seq.push(body_vector.to_vec());
        let anns = oracle_bigru(&self.head_fwd, &self.head_bwd, &seq);
        self.head_att.pool(&anns)
    }

    pub fn forward(&self, article: &EncodedArticle, mask_padding: bool) -> (f64, OracleTrace) {
        let rows = if mask_padding {
            article.n_sentences
        } else {
            article.sentence_ids.len()
        };
        let mut svecs = Vec::new();
        let mut word_weights = Vec::new();
        for i in 0..rows {
            let row = &article.sentence_ids[i];
            let ids = if mask_padding {
                &row[..article.sentence_lens[i]]
            } else {
                &row[..]
            };
            let (s, w) = self.encode_sentence(ids);
            svecs.push(s);
            word_weights.push(w);
        }
        let (body, sentence_weights) = self.encode_body(&svecs);
        let head_ids = if mask_padding {
            &article.headline_ids[..article.headline_len]
        } else {
            &article.headline_ids[..]
        };
        let (news, headline_weights) = self.encode_headline(head_ids, &body);
        (
            self.classifier.apply(&news),
            OracleTrace {
                word_weights,
                sentence_weights,
                headline_weights,
            },
        )
    }
}

pub fn assert_all_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: length mismatch");
    for (i, (x, y)) in a.iter().zip(b.iter()).enumerate() {
        assert!(
            (x - y).abs() <= tol,
            "{what}[{i}]: {x} vs {y} (|diff| = {})",
            (x - y).abs()
        );
    }
}

/// Tiny hand-built article on a 10-token vocabulary: 2 sentences of 3
/// words, 2 headline words (matches the small gradient-check setup).
pub fn tiny_article() -> EncodedArticle {
    EncodedArticle {
        headline_ids: vec![2, 7],
        sentence_ids: vec![vec![3, 4, 5], vec![6, 8, 0]],
        headline_len: 2,
        sentence_lens: vec![3, 2],
        n_sentences: 2,
        label: threehan::data::Label::Fake,
    }
}

pub fn tiny_config(seed: u64) -> threehan::model::ModelConfig {
    threehan::model::ModelConfig {
        embed_dim: 4,
        gru_hidden: 2,
        att_dim: 4,
        max_words_per_sentence: 3,
        max_sentences: 2,
        max_headline_words: 2,
        seed,
        ..threehan::model::ModelConfig::default()
    }
}
