//! Subcommand implementations: prepare, synth, train, pretrain, evaluate,
//! predict, explain. Output files are written atomically; every error
//! surfaces as a one-line diagnostic and a nonzero exit in main.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use threehan::data::{
    build_vocab, encode, load_embeddings, read_corpus, split_dataset, synth_corpus,
    tokenize_article, write_atomic, write_corpus, EncodedArticle, Label, PadConfig, RawArticle,
    TokenizedArticle, Vocabulary,
};
use threehan::error::{Error, Result};
use threehan::model::{
    evaluate, load_model, load_pretrained, pretrain_headline, save_model, save_pretrained, train,
    Model,
};
use threehan::tensor::Tape;

use crate::config::RunConfig;
use crate::heatmap::{self, HeatmapInput};

/// Header line of an encoded split file.
#[derive(Debug, serde::Serialize, serde::Deserialize, PartialEq, Eq)]
pub struct EncodedMeta {
    pub vocab_size: usize,
    pub max_words_per_sentence: usize,
    pub max_sentences: usize,
    pub max_headline_words: usize,
}

pub fn write_encoded(path: &Path, meta: &EncodedMeta, articles: &[EncodedArticle]) -> Result<()> {
    let mut out = serde_json::to_string(meta).expect("serializable meta");
    out.push('\n');
    for article in articles {
        out.push_str(&serde_json::to_string(article).expect("serializable article"));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_encoded(path: &Path) -> Result<(EncodedMeta, Vec<EncodedArticle>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty encoded dataset", path.display())))?;
    let meta: EncodedMeta = serde_json::from_str(header)
        .map_err(|e| Error::Format(format!("{} line 1: {e}", path.display())))?;
    let mut articles = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let article: EncodedArticle = serde_json::from_str(line)
            .map_err(|e| Error::Format(format!("{} line {}: {e}", path.display(), lineno + 1)))?;
        articles.push(article);
    }
    Ok((meta, articles))
}

fn tokenize_corpus(raw: &[RawArticle]) -> Vec<TokenizedArticle> {
    raw.iter().map(tokenize_article).collect()
}

/// Encode every article, skipping (with a warning) any that tokenize to
/// nothing.
fn encode_corpus(
    tokenized: &[TokenizedArticle],
    vocab: &Vocabulary,
    pad: &PadConfig,
) -> Result<Vec<EncodedArticle>> {
    let mut encoded = Vec::with_capacity(tokenized.len());
    for (i, article) in tokenized.iter().enumerate() {
        match encode(article, vocab, pad) {
            Ok(e) => encoded.push(e),
            Err(Error::EmptyArticle) => {
                eprintln!("warning: article {} is empty after tokenization, skipped", i + 1);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(encoded)
}

/// Per-label corpus statistics in the shape of the dataset table:
/// sites, articles, average words per sentence, average sentences.
fn corpus_stats(tokenized: &[TokenizedArticle]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:>5} {:>9} {:>10} {:>14}",
        "type", "sites", "articles", "avg_words", "avg_sentences"
    );
    for (label, name) in [(Label::Fake, "fake"), (Label::Genuine, "genuine")] {
        let subset: Vec<&TokenizedArticle> =
            tokenized.iter().filter(|a| a.label == label).collect();
        let sites: std::collections::BTreeSet<&str> = subset
            .iter()
            .filter_map(|a| a.source_id.as_deref())
            .collect();
        let sentences: usize = subset.iter().map(|a| a.sentences.len()).sum();
        let words: usize = subset
            .iter()
            .map(|a| a.sentences.iter().map(Vec::len).sum::<usize>())
            .sum();
        let _ = writeln!(
            out,
            "{:<8} {:>5} {:>9} {:>10.2} {:>14.2}",
            name,
            sites.len(),
            subset.len(),
            words as f64 / sentences.max(1) as f64,
            sentences as f64 / subset.len().max(1) as f64,
        );
    }
    out
}

pub fn cmd_synth(config: &RunConfig, out: &Path) -> Result<()> {
    let articles = synth_corpus(&config.synth, config.model.seed)?;
    write_corpus(&articles, out)?;
    let fakes = articles.iter().filter(|a| a.label == Label::Fake).count();
    println!(
        "wrote {} articles ({} fake / {} genuine) to {}",
        articles.len(),
        fakes,
        articles.len() - fakes,
        out.display()
    );
    Ok(())
}

pub fn cmd_prepare(config: &RunConfig, corpus_path: &Path, out_dir: &Path) -> Result<()> {
    let raw = read_corpus(corpus_path)?;
    if raw.is_empty() {
        return Err(Error::Format(format!("empty corpus: {}", corpus_path.display())));
    }
    let tokenized = tokenize_corpus(&raw);
    let vocab = build_vocab(&tokenized)?;
    let pad = config.model.pad_config();
    let encoded = encode_corpus(&tokenized, &vocab, &pad)?;
    if encoded.is_empty() {
        return Err(Error::Format(format!(
            "empty corpus after tokenization: {}",
            corpus_path.display()
        )));
    }
    let (train_set, val_set, test_set) =
        split_dataset(&encoded, |a| a.label, config.ratios(), config.model.seed)?;

    fs::create_dir_all(out_dir)?;
    vocab.save(&out_dir.join("vocab.tsv"))?;
    let meta = EncodedMeta {
        vocab_size: vocab.size(),
        max_words_per_sentence: pad.max_words_per_sentence,
        max_sentences: pad.max_sentences,
        max_headline_words: pad.max_headline_words,
    };
    write_encoded(&out_dir.join("train.jsonl"), &meta, &train_set)?;
    write_encoded(&out_dir.join("val.jsonl"), &meta, &val_set)?;
    write_encoded(&out_dir.join("test.jsonl"), &meta, &test_set)?;

    print!("{}", corpus_stats(&tokenized));
    println!(
        "vocabulary: {} tokens; splits: {} train / {} val / {} test -> {}",
        vocab.size(),
        train_set.len(),
        val_set.len(),
        test_set.len(),
        out_dir.display()
    );
    Ok(())
}

fn check_meta(config: &RunConfig, meta: &EncodedMeta) -> Result<()> {
    let pad = config.model.pad_config();
    if pad.max_words_per_sentence != meta.max_words_per_sentence
        || pad.max_sentences != meta.max_sentences
        || pad.max_headline_words != meta.max_headline_words
    {
        return Err(Error::Config(format!(
            "encoded data was padded to {}/{}/{} (words/sentences/headline) but the config says {}/{}/{}",
            meta.max_words_per_sentence,
            meta.max_sentences,
            meta.max_headline_words,
            pad.max_words_per_sentence,
            pad.max_sentences,
            pad.max_headline_words
        )));
    }
    Ok(())
}

pub fn cmd_train(
    config: &RunConfig,
    data_dir: &Path,
    checkpoint_out: &Path,
    history_out: &Path,
    init_from: Option<&Path>,
    embeddings: Option<&Path>,
) -> Result<()> {
    let (meta, train_set) = read_encoded(&data_dir.join("train.jsonl"))?;
    let (val_meta, val_set) = read_encoded(&data_dir.join("val.jsonl"))?;
    if meta != val_meta {
        return Err(Error::Format("train and val splits disagree on their header".into()));
    }
    check_meta(config, &meta)?;

    let model = match embeddings {
        Some(path) => {
            let vocab = Vocabulary::load(&data_dir.join("vocab.tsv"))?;
            if vocab.size() != meta.vocab_size {
                return Err(Error::Format(format!(
                    "vocabulary has {} tokens but the encoded data says {}",
                    vocab.size(),
                    meta.vocab_size
                )));
            }
            let table = load_embeddings(&vocab, path, config.model.embed_dim, config.model.seed)?;
            Model::with_embedding(&config.model, table)?
        }
        None => Model::new(&config.model, meta.vocab_size)?,
    };
    if let Some(path) = init_from {
        let (pre, _, pre_vocab) = load_pretrained(path)?;
        if pre_vocab != meta.vocab_size {
            return Err(Error::Config(format!(
                "pretrained checkpoint was built for vocab size {pre_vocab}, data has {}",
                meta.vocab_size
            )));
        }
        model.init_from_pretrained(&pre)?;
    }

    let history = train(&model, &train_set, &val_set)?;
    save_model(&model, checkpoint_out)?;
    write_atomic(history_out, history.to_csv().as_bytes())?;
    println!(
        "final validation accuracy: {:.4}",
        history.final_val_accuracy().unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn cmd_pretrain(config: &RunConfig, data_dir: &Path, out: &Path) -> Result<()> {
    let (meta, train_set) = read_encoded(&data_dir.join("train.jsonl"))?;
    let (_, val_set) = read_encoded(&data_dir.join("val.jsonl"))?;
    check_meta(config, &meta)?;
    let (pre, history) = pretrain_headline(&train_set, &val_set, &config.model, meta.vocab_size)?;
    save_pretrained(&pre, &config.model, meta.vocab_size, out)?;
    println!(
        "headline pre-training validation accuracy: {:.4}",
        history.final_val_accuracy().unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn cmd_evaluate(checkpoint: &Path, dataset: &Path) -> Result<()> {
    let model = load_model(checkpoint)?;
    let (meta, articles) = read_encoded(dataset)?;
    if meta.vocab_size != model.vocab_size {
        return Err(Error::Config(format!(
            "vocab size mismatch: checkpoint has {}, dataset has {}",
            model.vocab_size, meta.vocab_size
        )));
    }
    let accuracy = evaluate(&model, &articles)?;
    println!("{accuracy:.4}");
    Ok(())
}

/// Input line for predict/explain: label is optional.
#[derive(Debug, Deserialize)]
struct InputRecord {
    headline: String,
    body: String,
    #[serde(default)]
    label: Option<u8>,
}

fn record_to_article(record: InputRecord) -> Result<RawArticle> {
    let label = match record.label {
        Some(v) => Label::try_from(v).map_err(Error::Format)?,
        None => Label::Genuine,
    };
    Ok(RawArticle {
        headline: record.headline,
        body: record.body,
        label,
        source_id: None,
    })
}

pub fn cmd_predict(checkpoint: &Path, vocab_path: &Path, input: &Path) -> Result<()> {
    let model = load_model(checkpoint)?;
    let vocab = Vocabulary::load(vocab_path)?;
    if vocab.size() != model.vocab_size {
        return Err(Error::Config(format!(
            "vocab size mismatch: checkpoint has {}, vocabulary file has {}",
            model.vocab_size,
            vocab.size()
        )));
    }
    let pad = model.config.pad_config();
    let text = fs::read_to_string(input)?;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: InputRecord = serde_json::from_str(line)
            .map_err(|e| Error::Format(format!("input line {}: {e}", lineno + 1)))?;
        let article = record_to_article(record)?;
        let tokenized = tokenize_article(&article);
        let encoded = encode(&tokenized, &vocab, &pad).map_err(|e| match e {
            Error::EmptyArticle => {
                Error::Format(format!("input line {}: article is empty after tokenization", lineno + 1))
            }
            other => other,
        })?;
        let tape = Tape::new();
        let (prob, _) = model.forward(&tape, &encoded)?;
        println!("{:.6}", prob.item());
    }
    Ok(())
}

pub fn cmd_explain(
    config: &RunConfig,
    checkpoint: &Path,
    vocab_path: &Path,
    article_path: &Path,
    out: &Path,
) -> Result<()> {
    let model = load_model(checkpoint)?;
    let vocab = Vocabulary::load(vocab_path)?;
    if vocab.size() != model.vocab_size {
        return Err(Error::Config(format!(
            "vocab size mismatch: checkpoint has {}, vocabulary file has {}",
            model.vocab_size,
            vocab.size()
        )));
    }
    let text = fs::read_to_string(article_path)?;
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::Format(format!("{}: no article found", article_path.display())))?;
    let record: InputRecord =
        serde_json::from_str(line).map_err(|e| Error::Format(format!("article: {e}")))?;
    let article = record_to_article(record)?;
    let tokenized = tokenize_article(&article);
    let pad = model.config.pad_config();
    let encoded = encode(&tokenized, &vocab, &pad)?;

    let tape = Tape::new();
    let (prob, trace) = model.forward(&tape, &encoded)?;
    let trace = trace.ok_or_else(|| {
        Error::Config(format!(
            "explain needs an attention-composed hierarchical model, got {} with {} composition",
            model.config.architecture, model.config.composition
        ))
    })?;
    if trace.headline_weights.is_empty() {
        return Err(Error::Config(
            "explain needs the three-level model (the two-level baseline has no headline layer)"
                .into(),
        ));
    }

    let headline_tokens: Vec<String> = tokenized
        .headline
        .iter()
        .take(encoded.headline_len)
        .cloned()
        .collect();
    let sentence_tokens: Vec<Vec<String>> = tokenized
        .sentences
        .iter()
        .take(encoded.n_sentences)
        .zip(encoded.sentence_lens.iter())
        .map(|(s, &len)| s.iter().take(len).cloned().collect())
        .collect();
    let html = heatmap::render(&HeatmapInput {
        probability: prob.item(),
        trace: &trace,
        headline_tokens: &headline_tokens,
        sentence_tokens: &sentence_tokens,
        top_sentences: config.top_sentences,
        words_per_sentence: config.words_per_sentence,
    });
    write_atomic(out, html.as_bytes())?;
    println!("{:.6}", prob.item());
    Ok(())
}
