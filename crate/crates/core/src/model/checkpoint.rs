//! Self-describing binary checkpoints.
//!
//! Layout: magic `3HAN`, version byte, kind byte (full model or pretrained
//! level-1), a length-prefixed `key=value` config block, then named
//! parameter blocks (name length, name, rank, extents, little-endian f64
//! values). Round-trips are bit-exact.

use std::fs;
use std::path::Path;

use crate::data::write_atomic;
use crate::error::{Error, Result};
use crate::layers::{AttentionLayer, EmbeddingTable, GRUCell};
use crate::tensor::Tensor;

use super::{Model, ModelConfig, PretrainedLevel1};

const MAGIC: &[u8; 4] = b"3HAN";
const VERSION: u8 = 1;
const KIND_MODEL: u8 = 0;
const KIND_PRETRAINED: u8 = 1;

fn config_block(config: &ModelConfig, vocab_size: usize, embedding_trainable: bool) -> String {
    let mut s = String::new();
    s.push_str(&format!("architecture={}\n", config.architecture));
    s.push_str(&format!("composition={}\n", config.composition));
    s.push_str(&format!("embed_dim={}\n", config.embed_dim));
    s.push_str(&format!("gru_hidden={}\n", config.gru_hidden));
    s.push_str(&format!("att_dim={}\n", config.att_dim));
    s.push_str(&format!(
        "max_words_per_sentence={}\n",
        config.max_words_per_sentence
    ));
    s.push_str(&format!("max_sentences={}\n", config.max_sentences));
    s.push_str(&format!("max_headline_words={}\n", config.max_headline_words));
    s.push_str(&format!("learning_rate={}\n", config.learning_rate));
    s.push_str(&format!("momentum={}\n", config.momentum));
    s.push_str(&format!("batch_size={}\n", config.batch_size));
    s.push_str(&format!("epochs={}\n", config.epochs));
    s.push_str(&format!("seed={}\n", config.seed));
    s.push_str(&format!("mask_padding={}\n", config.mask_padding));
    s.push_str(&format!("vocab_size={vocab_size}\n"));
    s.push_str(&format!("embedding_trainable={embedding_trainable}\n"));
    s
}

fn parse_config_block(text: &str) -> Result<(ModelConfig, usize, bool)> {
    let mut config = ModelConfig::default();
    let mut vocab_size = None;
    let mut embedding_trainable = true;
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Format(format!("checkpoint config line {line:?} has no '='"))
        })?;
        let bad =
            |what: &str| Error::Format(format!("checkpoint config: bad {what} value {value:?}"));
        match key {
            "architecture" => config.architecture = value.parse()?,
            "composition" => config.composition = value.parse()?,
            "embed_dim" => config.embed_dim = value.parse().map_err(|_| bad(key))?,
            "gru_hidden" => config.gru_hidden = value.parse().map_err(|_| bad(key))?,
            "att_dim" => config.att_dim = value.parse().map_err(|_| bad(key))?,
            "max_words_per_sentence" => {
                config.max_words_per_sentence = value.parse().map_err(|_| bad(key))?
            }
            "max_sentences" => config.max_sentences = value.parse().map_err(|_| bad(key))?,
            "max_headline_words" => {
                config.max_headline_words = value.parse().map_err(|_| bad(key))?
            }
            "learning_rate" => config.learning_rate = value.parse().map_err(|_| bad(key))?,
            "momentum" => config.momentum = value.parse().map_err(|_| bad(key))?,
            "batch_size" => config.batch_size = value.parse().map_err(|_| bad(key))?,
            "epochs" => config.epochs = value.parse().map_err(|_| bad(key))?,
            "seed" => config.seed = value.parse().map_err(|_| bad(key))?,
            "mask_padding" => config.mask_padding = value.parse().map_err(|_| bad(key))?,
            "vocab_size" => vocab_size = Some(value.parse().map_err(|_| bad(key))?),
            "embedding_trainable" => {
                embedding_trainable = value.parse().map_err(|_| bad(key))?
            }
            other => {
                return Err(Error::Format(format!(
                    "checkpoint config: unknown key {other:?}"
                )))
            }
        }
    }
    let vocab_size =
        vocab_size.ok_or_else(|| Error::Format("checkpoint config: missing vocab_size".into()))?;
    Ok((config, vocab_size, embedding_trainable))
}

fn push_params(out: &mut Vec<u8>, params: &[(String, Tensor)]) {
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for (name, tensor) in params {
        let name_bytes = name.as_bytes();
        out.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
        out.extend_from_slice(name_bytes);
        out.push(tensor.rank() as u8);
        for &extent in tensor.shape() {
            out.extend_from_slice(&(extent as u32).to_le_bytes());
        }
        for v in tensor.values().iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

fn to_bytes(kind: u8, config_text: &str, params: &[(String, Tensor)]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(kind);
    out.extend_from_slice(&(config_text.len() as u32).to_le_bytes());
    out.extend_from_slice(config_text.as_bytes());
    push_params(&mut out, params);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(format!(
                "checkpoint truncated at byte {} (needed {} more)",
                self.bytes.len(),
                self.pos + n - self.bytes.len()
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

struct ParsedCheckpoint {
    kind: u8,
    config: ModelConfig,
    vocab_size: usize,
    embedding_trainable: bool,
    params: Vec<(String, Vec<usize>, Vec<f64>)>,
}

fn parse(bytes: &[u8]) -> Result<ParsedCheckpoint> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format("bad magic at byte 0 (not a 3HAN checkpoint)".into()));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {version} at byte 4"
        )));
    }
    let kind = r.u8()?;
    if kind != KIND_MODEL && kind != KIND_PRETRAINED {
        return Err(Error::Format(format!("unknown checkpoint kind {kind} at byte 5")));
    }
    let config_len = r.u32()? as usize;
    let config_text = std::str::from_utf8(r.take(config_len)?)
        .map_err(|_| Error::Format("checkpoint config block is not UTF-8".into()))?;
    let (config, vocab_size, embedding_trainable) = parse_config_block(config_text)?;
    let count = r.u32()? as usize;
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| Error::Format("checkpoint parameter name is not UTF-8".into()))?
            .to_string();
        let rank = r.u8()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32()? as usize);
        }
        let numel: usize = shape.iter().product();
        let mut values = Vec::with_capacity(numel);
        for _ in 0..numel {
            values.push(r.f64()?);
        }
        params.push((name, shape, values));
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "checkpoint has {} trailing bytes at byte {}",
            bytes.len() - r.pos,
            r.pos
        )));
    }
    Ok(ParsedCheckpoint {
        kind,
        config,
        vocab_size,
        embedding_trainable,
        params,
    })
}

fn fill_named(
    targets: Vec<(String, Tensor)>,
    blocks: Vec<(String, Vec<usize>, Vec<f64>)>,
) -> Result<()> {
    let mut map: std::collections::HashMap<String, Tensor> = targets.into_iter().collect();
    for (name, shape, values) in blocks {
        let tensor = map.remove(&name).ok_or_else(|| {
            Error::Format(format!("checkpoint parameter {name:?} does not fit this model"))
        })?;
        if tensor.shape() != shape.as_slice() {
            return Err(Error::Format(format!(
                "checkpoint parameter {name:?} has shape {shape:?}, model expects {:?}",
                tensor.shape()
            )));
        }
        tensor.set_values(&values)?;
    }
    if let Some(missing) = map.keys().next() {
        return Err(Error::Format(format!(
            "checkpoint is missing parameter {missing:?}"
        )));
    }
    Ok(())
}

pub fn model_to_bytes(model: &Model) -> Vec<u8> {
    let text = config_block(&model.config, model.vocab_size, model.embedding().trainable);
    to_bytes(KIND_MODEL, &text, &model.params())
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<Model> {
    let parsed = parse(bytes)?;
    if parsed.kind != KIND_MODEL {
        return Err(Error::Format(
            "checkpoint holds pretrained level-1 weights, not a full model".into(),
        ));
    }
    let mut model = Model::zeroed(&parsed.config, parsed.vocab_size)?;
    model.set_embedding_trainable(parsed.embedding_trainable);
    fill_named(model.params(), parsed.params)?;
    Ok(model)
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    write_atomic(path, &model_to_bytes(model))
}

pub fn load_model(path: &Path) -> Result<Model> {
    model_from_bytes(&fs::read(path)?)
}

fn pretrained_params(pre: &PretrainedLevel1) -> Vec<(String, Tensor)> {
    let mut out = pre.embedding.params("embedding");
    out.extend(pre.word_fwd.params("word_fwd"));
    out.extend(pre.word_bwd.params("word_bwd"));
    out.extend(pre.word_att.params("word_att"));
    out
}

pub fn pretrained_to_bytes(
    pre: &PretrainedLevel1,
    config: &ModelConfig,
    vocab_size: usize,
) -> Vec<u8> {
    let text = config_block(config, vocab_size, pre.embedding.trainable);
    to_bytes(KIND_PRETRAINED, &text, &pretrained_params(pre))
}

pub fn save_pretrained(
    pre: &PretrainedLevel1,
    config: &ModelConfig,
    vocab_size: usize,
    path: &Path,
) -> Result<()> {
    write_atomic(path, &pretrained_to_bytes(pre, config, vocab_size))
}

pub fn load_pretrained(path: &Path) -> Result<(PretrainedLevel1, ModelConfig, usize)> {
    let parsed = parse(&fs::read(path)?)?;
    if parsed.kind != KIND_PRETRAINED {
        return Err(Error::Format(
            "checkpoint holds a full model, not pretrained level-1 weights".into(),
        ));
    }
    let config = parsed.config;
    let mut embedding = EmbeddingTable::zeros(parsed.vocab_size, config.embed_dim);
    embedding.trainable = parsed.embedding_trainable;
    let pre = PretrainedLevel1 {
        embedding,
        word_fwd: GRUCell::zeros(config.embed_dim, config.gru_hidden),
        word_bwd: GRUCell::zeros(config.embed_dim, config.gru_hidden),
        word_att: AttentionLayer::zeros(2 * config.gru_hidden, config.att_dim),
    };
    fill_named(pretrained_params(&pre), parsed.params)?;
    Ok((pre, config, parsed.vocab_size))
}
