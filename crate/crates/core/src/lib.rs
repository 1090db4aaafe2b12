//! Three-level hierarchical attention network (3HAN) for classifying news
//! articles as fake or genuine, built from scratch on a minimal reverse-mode
//! autodiff engine.
//!
//! The crate is organized bottom-up:
//!
//! - [`tensor`]: dense tensors, the differentiation tape, SGD with momentum
//! - [`layers`]: GRU cell, bidirectional runner, relevance-vector attention,
//!   pooling, embeddings, sigmoid classifier, binary cross-entropy
//! - [`data`]: tokenization, vocabulary, padding/encoding, embedding files,
//!   dataset splits, and a synthetic corpus generator
//! - [`model`]: the 3HAN hierarchy, the neural baselines, training,
//!   headline pre-training, evaluation, and checkpoints
//! - [`wordcount`]: bag-of-words / n-gram featurizers with logistic
//!   regression, plus the majority baseline
//! - [`gradcheck`]: finite-difference utilities used by the test suites

pub mod data;
pub mod error;
pub mod gradcheck;
pub mod layers;
pub mod model;
pub mod tensor;
pub mod wordcount;

pub use error::{Error, Result};
pub use tensor::{OptimizerState, Tape, Tensor};
