//! The 3HAN hierarchy and its neural baselines: model assembly, forward
//! passes with attention tracing, training, headline pre-training,
//! evaluation, and checkpoints.

mod checkpoint;
mod train;

pub use checkpoint::{
    load_model, load_pretrained, model_from_bytes, model_to_bytes, pretrained_to_bytes,
    save_model, save_pretrained,
};
pub use train::{
    evaluate, pretrain_headline, train, EpochStats, PretrainedLevel1, TrainHistory,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::EncodedArticle;
use crate::error::{Error, Result};
use crate::layers::{
    average_pool, bigru_run, max_pool, AttentionLayer, Classifier, EmbeddingTable, GRUCell,
};
use crate::tensor::{Tape, Tensor};

/// Annotation dimension of the flat GRU baseline (the other models derive
/// theirs from `gru_hidden`).
pub const FLAT_GRU_HIDDEN: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    ThreeHan,
    Han,
    GruFlat,
    GruAveFlat,
    GloveAve,
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Architecture::ThreeHan => "3han",
            Architecture::Han => "han",
            Architecture::GruFlat => "gru_flat",
            Architecture::GruAveFlat => "gru_ave_flat",
            Architecture::GloveAve => "glove_ave",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    Attention,
    Average,
    Max,
}

impl std::fmt::Display for Composition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Composition::Attention => "attention",
            Composition::Average => "average",
            Composition::Max => "max",
        })
    }
}

impl std::str::FromStr for Composition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Composition> {
        match s {
            "attention" => Ok(Composition::Attention),
            "average" | "ave" => Ok(Composition::Average),
            "max" => Ok(Composition::Max),
            other => Err(Error::Config(format!("unknown composition {other:?}"))),
        }
    }
}

/// Parse an architecture name; composed aliases like `3han-ave` also fix
/// the composition.
pub fn parse_architecture(s: &str) -> Result<(Architecture, Option<Composition>)> {
    let norm = s.to_lowercase().replace('-', "_");
    let (arch, comp) = match norm.as_str() {
        "3han" => (Architecture::ThreeHan, None),
        "3han_ave" => (Architecture::ThreeHan, Some(Composition::Average)),
        "3han_max" => (Architecture::ThreeHan, Some(Composition::Max)),
        "han" => (Architecture::Han, None),
        "han_ave" => (Architecture::Han, Some(Composition::Average)),
        "han_max" => (Architecture::Han, Some(Composition::Max)),
        "gru" | "gru_flat" => (Architecture::GruFlat, None),
        "gru_ave" | "gru_ave_flat" => (Architecture::GruAveFlat, None),
        "glove_ave" => (Architecture::GloveAve, None),
        other => return Err(Error::Config(format!("unknown architecture {other:?}"))),
    };
    Ok((arch, comp))
}

impl std::str::FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Architecture> {
        Ok(parse_architecture(s)?.0)
    }
}

/// Hyperparameters and structural dimensions of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub composition: Composition,
    pub embed_dim: usize,
    pub gru_hidden: usize,
    pub att_dim: usize,
    pub max_words_per_sentence: usize,
    pub max_sentences: usize,
    pub max_headline_words: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// When true, GRUs and attention run over true lengths only instead of
    /// the padded grid. Off by default.
    pub mask_padding: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            architecture: Architecture::ThreeHan,
            composition: Composition::Attention,
            embed_dim: 100,
            gru_hidden: 50,
            att_dim: 100,
            max_words_per_sentence: 32,
            max_sentences: 21,
            max_headline_words: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            epochs: 5,
            seed: 42,
            mask_padding: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("embed_dim", self.embed_dim),
            ("gru_hidden", self.gru_hidden),
            ("att_dim", self.att_dim),
            ("max_words_per_sentence", self.max_words_per_sentence),
            ("max_sentences", self.max_sentences),
            ("max_headline_words", self.max_headline_words),
            ("batch_size", self.batch_size),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.embed_dim != 2 * self.gru_hidden {
            return Err(Error::Config(format!(
                "embed_dim ({}) must equal 2 * gru_hidden ({}) so the body vector can join the headline sequence",
                self.embed_dim, self.gru_hidden
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Config(format!(
                "learning_rate must be non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }

    pub fn pad_config(&self) -> crate::data::PadConfig {
        crate::data::PadConfig {
            max_words_per_sentence: self.max_words_per_sentence,
            max_sentences: self.max_sentences,
            max_headline_words: self.max_headline_words,
        }
    }
}

/// Per-article attention weights for export: word weights per processed
/// sentence, sentence weights, and headline weights (last entry is the
/// body-vector position).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionTrace {
    pub word_weights: Vec<Vec<f64>>,
    pub sentence_weights: Vec<f64>,
    pub headline_weights: Vec<f64>,
}

fn compose(
    tape: &Tape,
    annotations: &[Tensor],
    attention: Option<&AttentionLayer>,
    composition: Composition,
) -> Result<(Tensor, Option<Tensor>)> {
    match composition {
        Composition::Attention => {
            let layer = attention.ok_or_else(|| {
                Error::contract("attention composition without an attention layer")
            })?;
            let (ctx, weights) = layer.pool(tape, annotations)?;
            Ok((ctx, Some(weights)))
        }
        Composition::Average => Ok((average_pool(tape, annotations)?, None)),
        Composition::Max => Ok((max_pool(tape, annotations)?, None)),
    }
}

/// The full three-level network: word, sentence, and headline encoders with
/// their attention layers, plus the sigmoid classifier.
#[derive(Debug)]
pub struct ThreeHanModel {
    pub embedding: EmbeddingTable,
    pub word_fwd: GRUCell,
    pub word_bwd: GRUCell,
    pub word_att: Option<AttentionLayer>,
    pub sent_fwd: GRUCell,
    pub sent_bwd: GRUCell,
    pub sent_att: Option<AttentionLayer>,
    pub head_fwd: GRUCell,
    pub head_bwd: GRUCell,
    pub head_att: Option<AttentionLayer>,
    pub classifier: Classifier,
    pub composition: Composition,
}

impl ThreeHanModel {
    /// Words to sentence vector: embed, bidirectional GRU, then compose.
    pub fn encode_sentence(
        &self,
        tape: &Tape,
        token_ids: &[usize],
    ) -> Result<(Tensor, Option<Tensor>)> {
        if token_ids.is_empty() {
            return Err(Error::contract("encode_sentence: empty sentence"));
        }
        let embeds = self.embedding.embed(tape, token_ids)?;
        let annotations = bigru_run(tape, &self.word_fwd, &self.word_bwd, &embeds)?;
        compose(tape, &annotations, self.word_att.as_ref(), self.composition)
    }

    /// Sentence vectors to body vector.
    pub fn encode_body(
        &self,
        tape: &Tape,
        sentence_vectors: &[Tensor],
    ) -> Result<(Tensor, Option<Tensor>)> {
        if sentence_vectors.is_empty() {
            return Err(Error::contract("encode_body: empty body"));
        }
        let annotations = bigru_run(tape, &self.sent_fwd, &self.sent_bwd, sentence_vectors)?;
        compose(tape, &annotations, self.sent_att.as_ref(), self.composition)
    }

    /// Headline words plus the body vector (as the final pseudo-token) to
    /// the news vector.
    pub fn encode_headline(
        &self,
        tape: &Tape,
        headline_ids: &[usize],
        body_vector: &Tensor,
    ) -> Result<(Tensor, Option<Tensor>)> {
        if headline_ids.is_empty() {
            return Err(Error::contract("encode_headline: empty headline"));
        }
        if body_vector.shape() != [self.embedding.dim()] {
            return Err(Error::dim(
                "encode_headline body vector",
                body_vector.shape(),
                &[self.embedding.dim()],
            ));
        }
        let mut sequence = self.embedding.embed(tape, headline_ids)?;
        sequence.push(body_vector.clone());
        let annotations = bigru_run(tape, &self.head_fwd, &self.head_bwd, &sequence)?;
        compose(tape, &annotations, self.head_att.as_ref(), self.composition)
    }

    pub fn forward(
        &self,
        tape: &Tape,
        article: &EncodedArticle,
        mask_padding: bool,
    ) -> Result<(Tensor, Option<AttentionTrace>)> {
        let mut sentence_vectors = Vec::new();
        let mut word_rows = Vec::new();
        let rows = if mask_padding {
            article.n_sentences
        } else {
            article.sentence_ids.len()
        };
        for i in 0..rows {
            let row = &article.sentence_ids[i];
            let ids = if mask_padding {
                &row[..article.sentence_lens[i]]
            } else {
                &row[..]
            };
            let (s, w) = self.encode_sentence(tape, ids)?;
            sentence_vectors.push(s);
            word_rows.push(w);
        }
        let (body_vector, sentence_w) = self.encode_body(tape, &sentence_vectors)?;
        let head_ids = if mask_padding {
            &article.headline_ids[..article.headline_len]
        } else {
            &article.headline_ids[..]
        };
        let (news_vector, headline_w) = self.encode_headline(tape, head_ids, &body_vector)?;
        let probability = self.classifier.apply(tape, &news_vector)?;
        let trace = match self.composition {
            Composition::Attention => Some(AttentionTrace {
                word_weights: word_rows
                    .into_iter()
                    .map(|w| w.expect("attention composition").to_vec())
                    .collect(),
                sentence_weights: sentence_w.expect("attention composition").to_vec(),
                headline_weights: headline_w.expect("attention composition").to_vec(),
            }),
            _ => None,
        };
        Ok((probability, trace))
    }

    fn params(&self) -> Vec<(String, Tensor)> {
        let mut out = self.embedding.params("embedding");
        out.extend(self.word_fwd.params("word_fwd"));
        out.extend(self.word_bwd.params("word_bwd"));
        if let Some(att) = &self.word_att {
            out.extend(att.params("word_att"));
        }
        out.extend(self.sent_fwd.params("sent_fwd"));
        out.extend(self.sent_bwd.params("sent_bwd"));
        if let Some(att) = &self.sent_att {
            out.extend(att.params("sent_att"));
        }
        out.extend(self.head_fwd.params("head_fwd"));
        out.extend(self.head_bwd.params("head_bwd"));
        if let Some(att) = &self.head_att {
            out.extend(att.params("head_att"));
        }
        out.extend(self.classifier.params("classifier"));
        out
    }
}

/// Two-level baseline: the headline is prepended to the body as its first
/// sentence; the body vector feeds the classifier directly.
#[derive(Debug)]
pub struct HanModel {
    pub embedding: EmbeddingTable,
    pub word_fwd: GRUCell,
    pub word_bwd: GRUCell,
    pub word_att: Option<AttentionLayer>,
    pub sent_fwd: GRUCell,
    pub sent_bwd: GRUCell,
    pub sent_att: Option<AttentionLayer>,
    pub classifier: Classifier,
    pub composition: Composition,
}

impl HanModel {
    fn encode_sentence(&self, tape: &Tape, ids: &[usize]) -> Result<(Tensor, Option<Tensor>)> {
        if ids.is_empty() {
            return Err(Error::contract("encode_sentence: empty sentence"));
        }
        let embeds = self.embedding.embed(tape, ids)?;
        let annotations = bigru_run(tape, &self.word_fwd, &self.word_bwd, &embeds)?;
        compose(tape, &annotations, self.word_att.as_ref(), self.composition)
    }

    pub fn forward(
        &self,
        tape: &Tape,
        article: &EncodedArticle,
        mask_padding: bool,
    ) -> Result<(Tensor, Option<AttentionTrace>)> {
        let mut sentence_vectors = Vec::new();
        let mut word_rows = Vec::new();
        let head_ids = if mask_padding {
            &article.headline_ids[..article.headline_len]
        } else {
            &article.headline_ids[..]
        };
        let (h, hw) = self.encode_sentence(tape, head_ids)?;
        sentence_vectors.push(h);
        word_rows.push(hw);
        let rows = if mask_padding {
            article.n_sentences
        } else {
            article.sentence_ids.len()
        };
        for i in 0..rows {
            let row = &article.sentence_ids[i];
            let ids = if mask_padding {
                &row[..article.sentence_lens[i]]
            } else {
                &row[..]
            };
            let (s, w) = self.encode_sentence(tape, ids)?;
            sentence_vectors.push(s);
            word_rows.push(w);
        }
        let annotations = bigru_run(tape, &self.sent_fwd, &self.sent_bwd, &sentence_vectors)?;
        let (body_vector, sentence_w) =
            compose(tape, &annotations, self.sent_att.as_ref(), self.composition)?;
        let probability = self.classifier.apply(tape, &body_vector)?;
        let trace = match self.composition {
            Composition::Attention => Some(AttentionTrace {
                word_weights: word_rows
                    .into_iter()
                    .map(|w| w.expect("attention composition").to_vec())
                    .collect(),
                sentence_weights: sentence_w.expect("attention composition").to_vec(),
                headline_weights: Vec::new(),
            }),
            _ => None,
        };
        Ok((probability, trace))
    }

    fn params(&self) -> Vec<(String, Tensor)> {
        let mut out = self.embedding.params("embedding");
        out.extend(self.word_fwd.params("word_fwd"));
        out.extend(self.word_bwd.params("word_bwd"));
        if let Some(att) = &self.word_att {
            out.extend(att.params("word_att"));
        }
        out.extend(self.sent_fwd.params("sent_fwd"));
        out.extend(self.sent_bwd.params("sent_bwd"));
        if let Some(att) = &self.sent_att {
            out.extend(att.params("sent_att"));
        }
        out.extend(self.classifier.params("classifier"));
        out
    }
}

/// Single unidirectional GRU over the flat word sequence (headline then
/// body, true tokens only); readout is the last state or the mean of all
/// states.
#[derive(Debug)]
pub struct FlatGruModel {
    pub embedding: EmbeddingTable,
    pub cell: GRUCell,
    pub classifier: Classifier,
    pub average_readout: bool,
}

impl FlatGruModel {
    fn flat_ids(article: &EncodedArticle) -> Vec<usize> {
        let mut ids = article.headline_ids[..article.headline_len].to_vec();
        for (row, &len) in article.sentence_ids.iter().zip(article.sentence_lens.iter()) {
            ids.extend_from_slice(&row[..len]);
        }
        ids
    }

    pub fn forward(&self, tape: &Tape, article: &EncodedArticle) -> Result<Tensor> {
        let ids = Self::flat_ids(article);
        if ids.is_empty() {
            return Err(Error::contract("flat forward: empty article"));
        }
        let embeds = self.embedding.embed(tape, &ids)?;
        let mut state = self.cell.zero_state();
        let mut states = Vec::with_capacity(embeds.len());
        for x in &embeds {
            state = self.cell.step(tape, x, &state)?;
            states.push(state.clone());
        }
        let feature = if self.average_readout {
            average_pool(tape, &states)?
        } else {
            state
        };
        self.classifier.apply(tape, &feature)
    }

    fn params(&self) -> Vec<(String, Tensor)> {
        let mut out = self.embedding.params("embedding");
        out.extend(self.cell.params("gru"));
        out.extend(self.classifier.params("classifier"));
        out
    }
}

/// Mean of the word embeddings over the flat sequence, straight into the
/// classifier.
#[derive(Debug)]
pub struct GloveAveModel {
    pub embedding: EmbeddingTable,
    pub classifier: Classifier,
}

impl GloveAveModel {
    pub fn forward(&self, tape: &Tape, article: &EncodedArticle) -> Result<Tensor> {
        let ids = FlatGruModel::flat_ids(article);
        if ids.is_empty() {
            return Err(Error::contract("glove_ave forward: empty article"));
        }
        let embeds = self.embedding.embed(tape, &ids)?;
        let feature = average_pool(tape, &embeds)?;
        self.classifier.apply(tape, &feature)
    }

    fn params(&self) -> Vec<(String, Tensor)> {
        let mut out = self.embedding.params("embedding");
        out.extend(self.classifier.params("classifier"));
        out
    }
}

#[derive(Debug)]
pub enum Variant {
    ThreeHan(ThreeHanModel),
    Han(HanModel),
    FlatGru(FlatGruModel),
    GloveAve(GloveAveModel),
}

/// One assembled network with its configuration and vocabulary size.
#[derive(Debug)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab_size: usize,
    pub variant: Variant,
}

impl Model {
    /// Build with a fresh seeded embedding table (uniform(-0.25, 0.25)).
    pub fn new(config: &ModelConfig, vocab_size: usize) -> Result<Model> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let embedding = EmbeddingTable::seeded_uniform(vocab_size, config.embed_dim, &mut rng);
        Model::assemble(config, embedding, &mut rng)
    }

    /// Build around an existing embedding table (pretrained vectors). The
    /// seed still drives layer initialization, with the same draw order as
    /// [`Model::new`] after the embedding.
    pub fn with_embedding(config: &ModelConfig, embedding: EmbeddingTable) -> Result<Model> {
        config.validate()?;
        if embedding.dim() != config.embed_dim {
            return Err(Error::dim(
                "model embedding",
                &[embedding.vocab_size(), embedding.dim()],
                &[embedding.vocab_size(), config.embed_dim],
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        // burn the same draws Model::new spends on the table
        let _ = EmbeddingTable::seeded_uniform(embedding.vocab_size(), config.embed_dim, &mut rng);
        Model::assemble(config, embedding, &mut rng)
    }

    /// All-zero parameters (tests, checkpoint loading).
    pub fn zeroed(config: &ModelConfig, vocab_size: usize) -> Result<Model> {
        config.validate()?;
        let model = Model::new(config, vocab_size)?;
        for (_, t) in model.params() {
            t.set_values(&vec![0.0; t.numel()])?;
        }
        Ok(model)
    }

    fn assemble(
        config: &ModelConfig,
        embedding: EmbeddingTable,
        rng: &mut ChaCha8Rng,
    ) -> Result<Model> {
        let embed = config.embed_dim;
        let hidden = config.gru_hidden;
        let ann = 2 * hidden;
        let comp = config.composition;
        let att = |rng: &mut ChaCha8Rng| -> Option<AttentionLayer> {
            (comp == Composition::Attention).then(|| AttentionLayer::new(ann, config.att_dim, rng))
        };
        let variant = match config.architecture {
            Architecture::ThreeHan => {
                let word_fwd = GRUCell::new(embed, hidden, rng);
                let word_bwd = GRUCell::new(embed, hidden, rng);
                let word_att = att(rng);
                let sent_fwd = GRUCell::new(ann, hidden, rng);
                let sent_bwd = GRUCell::new(ann, hidden, rng);
                let sent_att = att(rng);
                let head_fwd = GRUCell::new(embed, hidden, rng);
                let head_bwd = GRUCell::new(embed, hidden, rng);
                let head_att = att(rng);
                let classifier = Classifier::new(ann, rng);
                Variant::ThreeHan(ThreeHanModel {
                    embedding,
                    word_fwd,
                    word_bwd,
                    word_att,
                    sent_fwd,
                    sent_bwd,
                    sent_att,
                    head_fwd,
                    head_bwd,
                    head_att,
                    classifier,
                    composition: comp,
                })
            }
            Architecture::Han => {
                let word_fwd = GRUCell::new(embed, hidden, rng);
                let word_bwd = GRUCell::new(embed, hidden, rng);
                let word_att = att(rng);
                let sent_fwd = GRUCell::new(ann, hidden, rng);
                let sent_bwd = GRUCell::new(ann, hidden, rng);
                let sent_att = att(rng);
                let classifier = Classifier::new(ann, rng);
                Variant::Han(HanModel {
                    embedding,
                    word_fwd,
                    word_bwd,
                    word_att,
                    sent_fwd,
                    sent_bwd,
                    sent_att,
                    classifier,
                    composition: comp,
                })
            }
            Architecture::GruFlat | Architecture::GruAveFlat => {
                let cell = GRUCell::new(embed, FLAT_GRU_HIDDEN, rng);
                let classifier = Classifier::new(FLAT_GRU_HIDDEN, rng);
                Variant::FlatGru(FlatGruModel {
                    embedding,
                    cell,
                    classifier,
                    average_readout: config.architecture == Architecture::GruAveFlat,
                })
            }
            Architecture::GloveAve => {
                let classifier = Classifier::new(embed, rng);
                Variant::GloveAve(GloveAveModel {
                    embedding,
                    classifier,
                })
            }
        };
        Ok(Model {
            config: config.clone(),
            vocab_size: embedding_vocab(&variant),
            variant,
        })
    }

    /// Forward pass; the trace is present for attention-composed
    /// hierarchical models.
    pub fn forward(
        &self,
        tape: &Tape,
        article: &EncodedArticle,
    ) -> Result<(Tensor, Option<AttentionTrace>)> {
        let mask = self.config.mask_padding;
        match &self.variant {
            Variant::ThreeHan(m) => m.forward(tape, article, mask),
            Variant::Han(m) => m.forward(tape, article, mask),
            Variant::FlatGru(m) => Ok((m.forward(tape, article)?, None)),
            Variant::GloveAve(m) => Ok((m.forward(tape, article)?, None)),
        }
    }

    /// Every named parameter, in a fixed order (checkpoints, grad checks).
    pub fn params(&self) -> Vec<(String, Tensor)> {
        match &self.variant {
            Variant::ThreeHan(m) => m.params(),
            Variant::Han(m) => m.params(),
            Variant::FlatGru(m) => m.params(),
            Variant::GloveAve(m) => m.params(),
        }
    }

    /// Parameters the optimizer updates (drops the embedding table when it
    /// is frozen).
    pub fn trainable_params(&self) -> Vec<Tensor> {
        let trainable_embedding = self.embedding().trainable;
        self.params()
            .into_iter()
            .filter(|(name, _)| trainable_embedding || name != "embedding.weights")
            .map(|(_, t)| t)
            .collect()
    }

    pub fn embedding(&self) -> &EmbeddingTable {
        match &self.variant {
            Variant::ThreeHan(m) => &m.embedding,
            Variant::Han(m) => &m.embedding,
            Variant::FlatGru(m) => &m.embedding,
            Variant::GloveAve(m) => &m.embedding,
        }
    }

    pub fn set_embedding_trainable(&mut self, trainable: bool) {
        let table = match &mut self.variant {
            Variant::ThreeHan(m) => &mut m.embedding,
            Variant::Han(m) => &mut m.embedding,
            Variant::FlatGru(m) => &mut m.embedding,
            Variant::GloveAve(m) => &mut m.embedding,
        };
        table.trainable = trainable;
    }

    pub fn as_three_han(&self) -> Option<&ThreeHanModel> {
        match &self.variant {
            Variant::ThreeHan(m) => Some(m),
            _ => None,
        }
    }

    /// Copy pretrained level-1 weights (embedding, word GRUs, word
    /// attention) into this model, bit-exactly.
    pub fn init_from_pretrained(&self, pre: &PretrainedLevel1) -> Result<()> {
        let (embedding, word_fwd, word_bwd, word_att) = match &self.variant {
            Variant::ThreeHan(m) => (&m.embedding, &m.word_fwd, &m.word_bwd, m.word_att.as_ref()),
            Variant::Han(m) => (&m.embedding, &m.word_fwd, &m.word_bwd, m.word_att.as_ref()),
            _ => {
                return Err(Error::Config(
                    "pretrained level-1 weights only transfer into 3han or han models".into(),
                ))
            }
        };
        let word_att = word_att.ok_or_else(|| {
            Error::Config("pretrained transfer needs attention composition".into())
        })?;
        copy_tensor(&embedding.weights, &pre.embedding.weights)?;
        copy_cell(word_fwd, &pre.word_fwd)?;
        copy_tensor(&word_att.w, &pre.word_att.w)?;
        copy_tensor(&word_att.b, &pre.word_att.b)?;
        copy_tensor(&word_att.u, &pre.word_att.u)?;
        copy_cell(word_bwd, &pre.word_bwd)
    }
}

fn embedding_vocab(variant: &Variant) -> usize {
    match variant {
        Variant::ThreeHan(m) => m.embedding.vocab_size(),
        Variant::Han(m) => m.embedding.vocab_size(),
        Variant::FlatGru(m) => m.embedding.vocab_size(),
        Variant::GloveAve(m) => m.embedding.vocab_size(),
    }
}

fn copy_tensor(dst: &Tensor, src: &Tensor) -> Result<()> {
    if dst.shape() != src.shape() {
        return Err(Error::dim("parameter transfer", dst.shape(), src.shape()));
    }
    dst.set_values(&src.to_vec())
}

fn copy_cell(dst: &GRUCell, src: &GRUCell) -> Result<()> {
    for (d, s) in dst.params("x").iter().zip(src.params("x").iter()) {
        copy_tensor(&d.1, &s.1)?;
    }
    Ok(())
}
