//! Training loop, evaluation, and supervised headline pre-training.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{EncodedArticle, Label};
use crate::error::{Error, Result};
use crate::layers::{bce_loss, bigru_run, AttentionLayer, Classifier, EmbeddingTable, GRUCell};
use crate::tensor::{OptimizerState, Tape, Tensor};

use super::{Composition, Model, ModelConfig};

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
}

impl TrainHistory {
    /// `epoch,train_loss,train_acc,val_acc` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,train_acc,val_acc\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.epoch, e.train_loss, e.train_accuracy, e.val_accuracy
            ));
        }
        out
    }

    pub fn final_val_accuracy(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.val_accuracy)
    }
}

fn predicted_label(probability: f64) -> Label {
    // ties at exactly 0.5 classify as fake
    if probability >= 0.5 {
        Label::Fake
    } else {
        Label::Genuine
    }
}

fn epoch_shuffle_seed(seed: u64, epoch: usize) -> u64 {
    seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub(crate) fn evaluate_with<F>(forward: &F, dataset: &[EncodedArticle]) -> Result<f64>
where
    F: Fn(&Tape, &EncodedArticle) -> Result<Tensor>,
{
    if dataset.is_empty() {
        return Err(Error::contract("evaluate: empty dataset"));
    }
    let mut correct = 0usize;
    for article in dataset {
        let tape = Tape::new();
        let prob = forward(&tape, article)?;
        if predicted_label(prob.item()) == article.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Fraction of articles whose thresholded probability matches the label.
pub fn evaluate(model: &Model, dataset: &[EncodedArticle]) -> Result<f64> {
    evaluate_with(&|tape, article| model.forward(tape, article).map(|(p, _)| p), dataset)
}

pub(crate) fn run_training<F>(
    forward: &F,
    params: &[Tensor],
    train_set: &[EncodedArticle],
    val_set: &[EncodedArticle],
    config: &ModelConfig,
) -> Result<TrainHistory>
where
    F: Fn(&Tape, &EncodedArticle) -> Result<Tensor>,
{
    if train_set.is_empty() {
        return Err(Error::contract("train: empty training set"));
    }
    if val_set.is_empty() {
        return Err(Error::contract("train: empty validation set"));
    }
    let mut optimizer = OptimizerState::new(config.learning_rate, config.momentum, params)?;
    let mut history = TrainHistory::default();
    let n = train_set.len();
    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(epoch_shuffle_seed(config.seed, epoch));
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch_size) {
            let tape = Tape::new();
            let mut batch_loss: Option<Tensor> = None;
            for &i in batch {
                let article = &train_set[i];
                let prob = forward(&tape, article)?;
                if predicted_label(prob.item()) == article.label {
                    correct += 1;
                }
                let loss = bce_loss(&tape, &prob, article.label.as_f64())?;
                batch_loss = Some(match batch_loss {
                    None => loss,
                    Some(acc) => tape.add(&acc, &loss)?,
                });
            }
            let mean = tape.scale(&batch_loss.expect("non-empty batch"), 1.0 / batch.len() as f64)?;
            loss_sum += mean.item() * batch.len() as f64;
            tape.backward(&mean)?;
            optimizer.step(params)?;
        }
        history.epochs.push(EpochStats {
            epoch: epoch + 1,
            train_loss: loss_sum / n as f64,
            train_accuracy: correct as f64 / n as f64,
            val_accuracy: evaluate_with(forward, val_set)?,
        });
    }
    Ok(history)
}

/// Mini-batch SGD training of any model variant. Shuffling is fixed per
/// seed and epoch, so identical inputs give identical histories.
pub fn train(
    model: &Model,
    train_set: &[EncodedArticle],
    val_set: &[EncodedArticle],
) -> Result<TrainHistory> {
    let params = model.trainable_params();
    run_training(
        &|tape, article| model.forward(tape, article).map(|(p, _)| p),
        &params,
        train_set,
        val_set,
        &model.config,
    )
}

/// Level-1 weights produced by headline pre-training.
#[derive(Debug)]
pub struct PretrainedLevel1 {
    pub embedding: EmbeddingTable,
    pub word_fwd: GRUCell,
    pub word_bwd: GRUCell,
    pub word_att: AttentionLayer,
}

/// Supervised pre-training on headlines alone: an auxiliary model made of
/// the word encoder, word attention, and a throwaway sigmoid classifier is
/// trained with the article labels, then everything but the classifier is
/// returned for transfer.
///
/// The auxiliary layers are initialized with the same seed and draw order
/// as a fresh model, so a cold start and a pre-trained start differ only by
/// the pre-training updates.
pub fn pretrain_headline(
    train_set: &[EncodedArticle],
    val_set: &[EncodedArticle],
    config: &ModelConfig,
    vocab_size: usize,
) -> Result<(PretrainedLevel1, TrainHistory)> {
    config.validate()?;
    if config.composition != Composition::Attention {
        return Err(Error::Config(
            "headline pre-training requires attention composition".into(),
        ));
    }
    if train_set.is_empty() {
        return Err(Error::contract("pretrain: empty training set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let embedding = EmbeddingTable::seeded_uniform(vocab_size, config.embed_dim, &mut rng);
    let word_fwd = GRUCell::new(config.embed_dim, config.gru_hidden, &mut rng);
    let word_bwd = GRUCell::new(config.embed_dim, config.gru_hidden, &mut rng);
    let word_att = AttentionLayer::new(2 * config.gru_hidden, config.att_dim, &mut rng);
    let classifier = Classifier::new(2 * config.gru_hidden, &mut rng);

    let mask = config.mask_padding;
    let forward = |tape: &Tape, article: &EncodedArticle| -> Result<Tensor> {
        let ids = if mask {
            &article.headline_ids[..article.headline_len]
        } else {
            &article.headline_ids[..]
        };
        let embeds = embedding.embed(tape, ids)?;
        let annotations = bigru_run(tape, &word_fwd, &word_bwd, &embeds)?;
        let (context, _) = word_att.pool(tape, &annotations)?;
        classifier.apply(tape, &context)
    };

    let mut params = embedding.params("embedding");
    params.extend(word_fwd.params("word_fwd"));
    params.extend(word_bwd.params("word_bwd"));
    params.extend(word_att.params("word_att"));
    params.extend(classifier.params("classifier"));
    let tensors: Vec<Tensor> = params.into_iter().map(|(_, t)| t).collect();

    let history = run_training(&forward, &tensors, train_set, val_set, config)?;
    Ok((
        PretrainedLevel1 {
            embedding,
            word_fwd,
            word_bwd,
            word_att,
        },
        history,
    ))
}
