//! Text-to-tensor pipeline: tokenization, vocabulary, padding/encoding,
//! pretrained-embedding loading, dataset splits, and corpus file formats.
//!
//! Everything here is deterministic: identical inputs and seeds reproduce
//! identical outputs byte for byte.

mod synth;

pub use synth::{synth_corpus, SynthSpec};

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::{EmbeddingTable, PAD_ID, UNK_ID};

pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Tokens kept in the corpus beyond letters and digits; each is emitted as
/// its own token.
const SIGNIFICANT_PUNCTUATION: [char; 8] = ['.', ',', '!', '?', '\'', '"', ';', ':'];

/// Words occurring more often than this get their own vocabulary id;
/// words at exactly the threshold are merged into UNK.
const VOCAB_FREQ_THRESHOLD: u64 = 5;

/// Article class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Label {
    Genuine,
    Fake,
}

impl Label {
    pub fn as_f64(self) -> f64 {
        match self {
            Label::Genuine => 0.0,
            Label::Fake => 1.0,
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        match l {
            Label::Genuine => 0,
            Label::Fake => 1,
        }
    }
}

impl TryFrom<u8> for Label {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Label, String> {
        match v {
            0 => Ok(Label::Genuine),
            1 => Ok(Label::Fake),
            other => Err(format!("label must be 0 (genuine) or 1 (fake), got {other}")),
        }
    }
}

/// One article as it appears in a corpus file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawArticle {
    pub headline: String,
    pub body: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
}

/// Tokenized form: headline word list plus body sentences.
#[derive(Debug, Clone)]
pub struct TokenizedArticle {
    pub headline: Vec<String>,
    pub sentences: Vec<Vec<String>>,
    pub label: Label,
    pub source_id: Option<String>,
}

/// Padding/truncation limits applied at encode time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadConfig {
    pub max_words_per_sentence: usize,
    pub max_sentences: usize,
    pub max_headline_words: usize,
}

impl Default for PadConfig {
    fn default() -> Self {
        PadConfig {
            max_words_per_sentence: 32,
            max_sentences: 21,
            max_headline_words: 32,
        }
    }
}

/// Padded integer-id form of one article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedArticle {
    pub headline_ids: Vec<usize>,
    pub sentence_ids: Vec<Vec<usize>>,
    pub headline_len: usize,
    pub sentence_lens: Vec<usize>,
    pub n_sentences: usize,
    pub label: Label,
}

/// Token-to-id map with reserved PAD (0) and UNK (1) entries.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    token_to_id: HashMap<String, usize>,
    tokens: Vec<String>,
    frequencies: Vec<u64>,
}

impl Vocabulary {
    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    /// Id of `token`, falling back to UNK for anything unmapped.
    pub fn id(&self, token: &str) -> usize {
        *self.token_to_id.get(token).unwrap_or(&UNK_ID)
    }

    pub fn lookup(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(|s| s.as_str())
    }

    pub fn frequency(&self, id: usize) -> u64 {
        self.frequencies.get(id).copied().unwrap_or(0)
    }

    /// `token<TAB>id<TAB>frequency` per line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, token) in self.tokens.iter().enumerate() {
            out.push_str(&format!("{token}\t{id}\t{}\n", self.frequencies[id]));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Vocabulary> {
        let mut tokens = Vec::new();
        let mut frequencies = Vec::new();
        let mut token_to_id = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (token, id, freq) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(t), Some(i), Some(f), None) => (t, i, f),
                _ => {
                    return Err(Error::Format(format!(
                        "vocabulary line {}: expected token<TAB>id<TAB>frequency",
                        lineno + 1
                    )))
                }
            };
            let id: usize = id.parse().map_err(|_| {
                Error::Format(format!("vocabulary line {}: bad id {id:?}", lineno + 1))
            })?;
            if id != tokens.len() {
                return Err(Error::Format(format!(
                    "vocabulary line {}: ids must be dense and ascending, got {id}",
                    lineno + 1
                )));
            }
            let freq: u64 = freq.parse().map_err(|_| {
                Error::Format(format!("vocabulary line {}: bad frequency {freq:?}", lineno + 1))
            })?;
            token_to_id.insert(token.to_string(), id);
            tokens.push(token.to_string());
            frequencies.push(freq);
        }
        if tokens.len() < 2 || tokens[PAD_ID] != PAD_TOKEN || tokens[UNK_ID] != UNK_TOKEN {
            return Err(Error::Format(
                "vocabulary must start with the <pad> and <unk> rows".to_string(),
            ));
        }
        Ok(Vocabulary {
            token_to_id,
            tokens,
            frequencies,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_tsv().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Vocabulary> {
        Vocabulary::from_tsv(&fs::read_to_string(path)?)
    }
}

/// Lowercase, clean, and split text into sentences of tokens.
///
/// Sentences end at `.`, `!` or `?` followed by whitespace or end of text.
/// Characters outside `[a-z0-9]` and the significant punctuation set are
/// dropped in place; punctuation marks become standalone tokens.
pub fn tokenize(text: &str) -> Vec<Vec<String>> {
    let lower = text.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut chunks: Vec<&[char]> = Vec::new();
    let mut start = 0;
    for i in 0..chars.len() {
        if matches!(chars[i], '.' | '!' | '?')
            && (i + 1 == chars.len() || chars[i + 1].is_whitespace())
        {
            chunks.push(&chars[start..=i]);
            start = i + 1;
        }
    }
    if start < chars.len() {
        chunks.push(&chars[start..]);
    }
    chunks
        .into_iter()
        .filter_map(|chunk| {
            let toks = tokenize_chunk(chunk);
            (!toks.is_empty()).then_some(toks)
        })
        .collect()
}

/// Flattened token list (headlines are a single word sequence).
pub fn tokenize_words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().flatten().collect()
}

fn tokenize_chunk(chars: &[char]) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for &c in chars {
        if c.is_ascii_lowercase() || c.is_ascii_digit() {
            current.push(c);
        } else if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if SIGNIFICANT_PUNCTUATION.contains(&c) {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(c.to_string());
        }
        // anything else is dropped in place
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

pub fn tokenize_article(article: &RawArticle) -> TokenizedArticle {
    TokenizedArticle {
        headline: tokenize_words(&article.headline),
        sentences: tokenize(&article.body),
        label: article.label,
        source_id: article.source_id.clone(),
    }
}

/// Build the vocabulary over headline and body tokens of the whole corpus.
///
/// Frequency > 5 earns an id; exactly 5 merges the occurrences into UNK;
/// below 5 gets nothing (such tokens map to UNK at encode time). Ids are
/// assigned by descending frequency with lexicographic tie-break.
pub fn build_vocab(articles: &[TokenizedArticle]) -> Result<Vocabulary> {
    if articles.is_empty() {
        return Err(Error::contract("build_vocab: empty corpus"));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for article in articles {
        for tok in article.headline.iter().chain(article.sentences.iter().flatten()) {
            *counts.entry(tok.as_str()).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = Vec::new();
    let mut unk_freq = 0;
    for (tok, n) in &counts {
        if *n > VOCAB_FREQ_THRESHOLD {
            kept.push((tok, *n));
        } else if *n == VOCAB_FREQ_THRESHOLD {
            unk_freq += n;
        }
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut tokens = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
    let mut frequencies = vec![0, unk_freq];
    for (tok, n) in kept {
        tokens.push(tok.to_string());
        frequencies.push(n);
    }
    let token_to_id = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        token_to_id,
        tokens,
        frequencies,
    })
}

/// Map tokens to ids, truncate to the configured maxima, pad with PAD, and
/// record the true (post-truncation) lengths.
pub fn encode(
    article: &TokenizedArticle,
    vocab: &Vocabulary,
    pad: &PadConfig,
) -> Result<EncodedArticle> {
    if article.headline.is_empty() || article.sentences.is_empty() {
        return Err(Error::EmptyArticle);
    }
    let headline_len = article.headline.len().min(pad.max_headline_words);
    let mut headline_ids: Vec<usize> = article.headline[..headline_len]
        .iter()
        .map(|t| vocab.id(t))
        .collect();
    headline_ids.resize(pad.max_headline_words, PAD_ID);

    let n_sentences = article.sentences.len().min(pad.max_sentences);
    let mut sentence_ids = Vec::with_capacity(pad.max_sentences);
    let mut sentence_lens = Vec::with_capacity(n_sentences);
    for sentence in &article.sentences[..n_sentences] {
        let len = sentence.len().min(pad.max_words_per_sentence);
        let mut ids: Vec<usize> = sentence[..len].iter().map(|t| vocab.id(t)).collect();
        ids.resize(pad.max_words_per_sentence, PAD_ID);
        sentence_ids.push(ids);
        sentence_lens.push(len);
    }
    while sentence_ids.len() < pad.max_sentences {
        sentence_ids.push(vec![PAD_ID; pad.max_words_per_sentence]);
    }
    Ok(EncodedArticle {
        headline_ids,
        sentence_ids,
        headline_len,
        sentence_lens,
        n_sentences,
        label: article.label,
    })
}

/// Stratified shuffled split: each class is shuffled and sliced by the
/// ratios, then each part is shuffled again so classes interleave.
pub fn split_dataset<T: Clone>(
    items: &[T],
    label_of: impl Fn(&T) -> Label,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let (r0, r1, r2) = ratios;
    if r0 < 0.0 || r1 < 0.0 || r2 < 0.0 || (r0 + r1 + r2 - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split ratios must be non-negative and sum to 1, got ({r0}, {r1}, {r2})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, item) in items.iter().enumerate() {
        by_class[u8::from(label_of(item)) as usize].push(i);
    }
    let mut parts: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for class in &mut by_class {
        class.shuffle(&mut rng);
        let n = class.len();
        let c1 = ((r0 * n as f64).round() as usize).min(n);
        let c2 = (((r0 + r1) * n as f64).round() as usize).clamp(c1, n);
        parts[0].extend_from_slice(&class[..c1]);
        parts[1].extend_from_slice(&class[c1..c2]);
        parts[2].extend_from_slice(&class[c2..]);
    }
    for part in &mut parts {
        part.shuffle(&mut rng);
    }
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!(
            "split ratios ({r0}, {r1}, {r2}) produce an empty part on {} items",
            items.len()
        )));
    }
    let take = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect();
    Ok((take(&parts[0]), take(&parts[1]), take(&parts[2])))
}

/// Load pretrained word vectors (`token v1 .. v_dim` per line) for the
/// vocabulary. Tokens absent from the file, and UNK, get seeded
/// uniform(-0.25, 0.25) rows; PAD stays zero. The table is trainable.
pub fn load_embeddings(
    vocab: &Vocabulary,
    path: &Path,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingTable> {
    let text = fs::read_to_string(path)?;
    embeddings_from_str(vocab, &text, dim, seed)
}

pub fn embeddings_from_str(
    vocab: &Vocabulary,
    text: &str,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingTable> {
    let mut file_rows: HashMap<usize, Vec<f64>> = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-empty line");
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(Error::Format(format!(
                "embedding line {}: expected {} values for {token:?}, got {}",
                lineno + 1,
                dim,
                values.len()
            )));
        }
        let Some(id) = vocab.lookup(token) else {
            continue;
        };
        let mut row = Vec::with_capacity(dim);
        for v in values {
            row.push(v.parse::<f64>().map_err(|_| {
                Error::Format(format!("embedding line {}: bad number {v:?}", lineno + 1))
            })?);
        }
        file_rows.insert(id, row);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(vocab.size());
    for id in 0..vocab.size() {
        if id == PAD_ID {
            rows.push(vec![0.0; dim]);
        } else if id != UNK_ID && file_rows.contains_key(&id) {
            rows.push(file_rows[&id].clone());
        } else {
            rows.push((0..dim).map(|_| rng.random_range(-0.25..0.25)).collect());
        }
    }
    EmbeddingTable::from_rows(rows, true)
}

/// Write the table back in embedding-file format (real tokens only).
pub fn write_embedding_file(
    table: &EmbeddingTable,
    vocab: &Vocabulary,
    path: &Path,
) -> Result<()> {
    let weights = table.weights.to_vec();
    let dim = table.dim();
    let mut out = String::new();
    for id in (UNK_ID + 1)..vocab.size() {
        out.push_str(vocab.token(id).expect("dense ids"));
        for v in &weights[id * dim..(id + 1) * dim] {
            out.push(' ');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// One JSON article per line.
pub fn read_corpus(path: &Path) -> Result<Vec<RawArticle>> {
    let text = fs::read_to_string(path)?;
    let mut articles = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let article: RawArticle = serde_json::from_str(line).map_err(|e| {
            Error::Format(format!("corpus line {}: {e}", lineno + 1))
        })?;
        if article.headline.trim().is_empty() || article.body.trim().is_empty() {
            return Err(Error::Format(format!(
                "corpus line {}: headline and body must be non-empty",
                lineno + 1
            )));
        }
        articles.push(article);
    }
    Ok(articles)
}

pub fn corpus_to_string(articles: &[RawArticle]) -> String {
    let mut out = String::new();
    for a in articles {
        out.push_str(&serde_json::to_string(a).expect("serializable article"));
        out.push('\n');
    }
    out
}

pub fn write_corpus(articles: &[RawArticle], path: &Path) -> Result<()> {
    write_atomic(path, corpus_to_string(articles).as_bytes())
}

/// Write via a temp file in the same directory, then rename into place, so
/// failures never leave partial output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp_name = format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
    );
    let tmp = match path.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(d) => d.join(&tmp_name),
        None => std::path::PathBuf::from(&tmp_name),
    };
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
