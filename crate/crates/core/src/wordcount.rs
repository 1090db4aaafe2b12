//! Word-count baselines: bag-of-words and bag-of-ngrams featurizers (raw
//! counts or TF-IDF), a logistic-regression classifier trained with the
//! shared SGD-with-momentum optimizer, and the majority heuristic.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Label;
use crate::error::{Error, Result};
use crate::tensor::{OptimizerState, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    Bow,
    BowTfidf,
    Ngram,
    NgramTfidf,
}

impl FeatureMode {
    fn uses_ngrams(self) -> bool {
        matches!(self, FeatureMode::Ngram | FeatureMode::NgramTfidf)
    }

    fn uses_tfidf(self) -> bool {
        matches!(self, FeatureMode::BowTfidf | FeatureMode::NgramTfidf)
    }
}

/// Sparse feature vector: (feature index, value), sorted by index.
pub type SparseVec = Vec<(usize, f64)>;

/// Fitted count featurizer over a tokenized corpus (headline concatenated
/// with body per document).
#[derive(Debug, Clone)]
pub struct CountFeaturizer {
    mode: FeatureMode,
    n_max: usize,
    feature_index: HashMap<String, usize>,
    features: Vec<String>,
    doc_freq: Vec<u64>,
    n_docs: usize,
}

fn ngrams(doc: &[String], n_max: usize, mut emit: impl FnMut(String)) {
    for n in 1..=n_max {
        if doc.len() < n {
            break;
        }
        for window in doc.windows(n) {
            emit(window.join(" "));
        }
    }
}

impl CountFeaturizer {
    /// Select the `max_features` most frequent features (unigrams, or all
    /// n-gram orders 1..=n_max for the ngram modes), ordered by descending
    /// corpus frequency with lexicographic tie-break.
    pub fn fit(
        corpus: &[Vec<String>],
        mode: FeatureMode,
        max_features: usize,
        n_max: usize,
    ) -> Result<CountFeaturizer> {
        if corpus.is_empty() {
            return Err(Error::contract("fit_featurizer: empty corpus"));
        }
        if max_features == 0 || n_max == 0 {
            return Err(Error::Config("max_features and n_max must be positive".into()));
        }
        let order = if mode.uses_ngrams() { n_max } else { 1 };
        let mut total: HashMap<String, u64> = HashMap::new();
        let mut docs: HashMap<String, u64> = HashMap::new();
        for doc in corpus {
            let mut local: Vec<String> = Vec::new();
            ngrams(doc, order, |f| local.push(f));
            for f in &local {
                *total.entry(f.clone()).or_insert(0) += 1;
            }
            let mut uniq: Vec<&String> = local.iter().collect();
            uniq.sort();
            uniq.dedup();
            for f in uniq {
                *docs.entry(f.clone()).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(String, u64)> = total.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_features);

        let mut features = Vec::with_capacity(ranked.len());
        let mut doc_freq = Vec::with_capacity(ranked.len());
        let mut feature_index = HashMap::with_capacity(ranked.len());
        for (i, (feature, _)) in ranked.into_iter().enumerate() {
            doc_freq.push(docs[&feature]);
            feature_index.insert(feature.clone(), i);
            features.push(feature);
        }
        Ok(CountFeaturizer {
            mode,
            n_max: order,
            feature_index,
            features,
            doc_freq,
            n_docs: corpus.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature(&self, index: usize) -> Option<&str> {
        self.features.get(index).map(|s| s.as_str())
    }

    pub fn mode(&self) -> FeatureMode {
        self.mode
    }

    fn idf(&self, index: usize) -> f64 {
        ((1 + self.n_docs) as f64 / (1 + self.doc_freq[index]) as f64).ln()
    }

    /// Counts for bow/ngram modes; `count * ln((1+N)/(1+df))` for TF-IDF.
    /// Unseen tokens are ignored.
    pub fn featurize(&self, doc: &[String]) -> SparseVec {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        ngrams(doc, self.n_max, |f| {
            if let Some(&i) = self.feature_index.get(&f) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        });
        let mut out: SparseVec = counts.into_iter().collect();
        out.sort_by_key(|&(i, _)| i);
        if self.mode.uses_tfidf() {
            for (i, v) in &mut out {
                *v *= self.idf(*i);
            }
        }
        out
    }

    /// `feature<TAB>index<TAB>df` lines after a `#` header carrying the
    /// fitted corpus size.
    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "#mode={}\tn_max={}\tn_docs={}\n",
            match self.mode {
                FeatureMode::Bow => "bow",
                FeatureMode::BowTfidf => "bow_tfidf",
                FeatureMode::Ngram => "ngram",
                FeatureMode::NgramTfidf => "ngram_tfidf",
            },
            self.n_max,
            self.n_docs
        );
        for (i, f) in self.features.iter().enumerate() {
            out.push_str(&format!("{f}\t{i}\t{}\n", self.doc_freq[i]));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<CountFeaturizer> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("featurizer file is empty".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Format("featurizer line 1: missing '#' header".into()))?;
        let mut mode = None;
        let mut n_max = None;
        let mut n_docs = None;
        for field in header.split('\t') {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("featurizer header field {field:?}")))?;
            match k {
                "mode" => {
                    mode = Some(match v {
                        "bow" => FeatureMode::Bow,
                        "bow_tfidf" => FeatureMode::BowTfidf,
                        "ngram" => FeatureMode::Ngram,
                        "ngram_tfidf" => FeatureMode::NgramTfidf,
                        other => {
                            return Err(Error::Format(format!("featurizer mode {other:?}")))
                        }
                    })
                }
                "n_max" => n_max = v.parse().ok(),
                "n_docs" => n_docs = v.parse().ok(),
                other => return Err(Error::Format(format!("featurizer header key {other:?}"))),
            }
        }
        let (mode, n_max, n_docs) = match (mode, n_max, n_docs) {
            (Some(m), Some(n), Some(d)) => (m, n, d),
            _ => return Err(Error::Format("featurizer header is incomplete".into())),
        };
        let mut features = Vec::new();
        let mut doc_freq = Vec::new();
        let mut feature_index = HashMap::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (f, i, df) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(f), Some(i), Some(df), None) => (f, i, df),
                _ => {
                    return Err(Error::Format(format!(
                        "featurizer line {}: expected feature<TAB>index<TAB>df",
                        lineno + 2
                    )))
                }
            };
            let i: usize = i.parse().map_err(|_| {
                Error::Format(format!("featurizer line {}: bad index {i:?}", lineno + 2))
            })?;
            if i != features.len() {
                return Err(Error::Format(format!(
                    "featurizer line {}: indices must be dense, got {i}",
                    lineno + 2
                )));
            }
            let df: u64 = df.parse().map_err(|_| {
                Error::Format(format!("featurizer line {}: bad df {df:?}", lineno + 2))
            })?;
            feature_index.insert(f.to_string(), i);
            features.push(f.to_string());
            doc_freq.push(df);
        }
        Ok(CountFeaturizer {
            mode,
            n_max,
            feature_index,
            features,
            doc_freq,
            n_docs,
        })
    }
}

/// Binomial logistic regression over sparse count vectors.
pub struct LogisticModel {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl LogisticModel {
    pub fn zeros(dim: usize) -> LogisticModel {
        LogisticModel {
            weights: Tensor::param(vec![dim.max(1)], vec![0.0; dim.max(1)]).unwrap(),
            bias: Tensor::param(vec![1], vec![0.0]).unwrap(),
        }
    }

    pub fn predict(&self, features: &SparseVec) -> f64 {
        let w = self.weights.values();
        let mut z = self.bias.item();
        for &(i, v) in features {
            z += w[i] * v;
        }
        1.0 / (1.0 + (-z).exp())
    }

    pub fn predict_label(&self, features: &SparseVec) -> Label {
        if self.predict(features) >= 0.5 {
            Label::Fake
        } else {
            Label::Genuine
        }
    }
}

/// SGD settings for logistic regression (same defaults as the neural
/// models).
#[derive(Debug, Clone)]
pub struct LogRegConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            epochs: 10,
            seed: 42,
        }
    }
}

/// BCE-trained logistic regression via the shared optimizer; analytic
/// gradient `(q - p) * x` accumulated per mini-batch.
pub fn train_logreg(
    features: &[SparseVec],
    labels: &[Label],
    dim: usize,
    config: &LogRegConfig,
) -> Result<LogisticModel> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::contract(format!(
            "train_logreg: {} feature rows vs {} labels",
            features.len(),
            labels.len()
        )));
    }
    let model = LogisticModel::zeros(dim);
    let params = [model.weights.clone(), model.bias.clone()];
    let mut optimizer = OptimizerState::new(config.learning_rate, config.momentum, &params)?;
    let n = features.len();
    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(
            config.seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let mut gw = vec![0.0; model.weights.numel()];
            let mut gb = 0.0;
            for &i in batch {
                let residual = model.predict(&features[i]) - labels[i].as_f64();
                for &(j, v) in &features[i] {
                    gw[j] += residual * v;
                }
                gb += residual;
            }
            let scale = 1.0 / batch.len() as f64;
            for g in &mut gw {
                *g *= scale;
            }
            model.weights.add_grad(&gw)?;
            model.bias.add_grad(&[gb * scale])?;
            optimizer.step(&params)?;
        }
    }
    Ok(model)
}

pub fn logreg_accuracy(model: &LogisticModel, features: &[SparseVec], labels: &[Label]) -> f64 {
    let correct = features
        .iter()
        .zip(labels.iter())
        .filter(|(f, l)| model.predict_label(f) == **l)
        .count();
    correct as f64 / labels.len().max(1) as f64
}

/// Modal training label; ties classify as fake.
pub fn majority_baseline(train_labels: &[Label]) -> Result<Label> {
    if train_labels.is_empty() {
        return Err(Error::contract("majority_baseline: empty labels"));
    }
    let fakes = train_labels.iter().filter(|l| **l == Label::Fake).count();
    let genuine = train_labels.len() - fakes;
    Ok(if fakes >= genuine { Label::Fake } else { Label::Genuine })
}

/// Accuracy of a constant predictor on a labeled set.
pub fn constant_accuracy(prediction: Label, labels: &[Label]) -> f64 {
    let hits = labels.iter().filter(|l| **l == prediction).count();
    hits as f64 / labels.len().max(1) as f64
}
