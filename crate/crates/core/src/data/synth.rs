//! Synthetic two-class corpus generator for desk-scale experiments.
//!
//! Articles are built from four token pools: per-class pools, a shared
//! pool, and two topic pools. Three knobs shape the signal:
//!
//! - `class_token_prob`: probability a body/headline token comes from the
//!   label's class pool. 0 makes the class distributions identical; 1 makes
//!   the class vocabularies fully disjoint.
//! - `phi`: fraction of fake articles whose headline talks about the
//!   *opposite* topic from the body. With identical body distributions this
//!   is a pure headline-body stance signal: the marginal distribution of
//!   headlines and bodies alone carries nothing, only their relation does.
//! - `marker_prob`: probability a fake headline carries a sensational
//!   marker token, a weak headline-local cue.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{Label, RawArticle};

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n_per_class: usize,
    /// Size of each class-specific token pool.
    pub class_tokens: usize,
    /// Size of the shared background pool.
    pub shared_tokens: usize,
    /// Size of each topic pool.
    pub topic_tokens: usize,
    /// Probability a body token is drawn from the label's class pool.
    pub class_token_prob: f64,
    /// Probability a body token is drawn from the article's topic pool.
    pub topic_token_prob: f64,
    /// Probability a headline token is drawn from the headline's topic pool.
    pub headline_topic_prob: f64,
    /// Probability a headline token is drawn from the label's class pool.
    pub headline_class_prob: f64,
    /// Prior probability of topic A (0.5 keeps the two topics balanced).
    pub topic_bias: f64,
    /// Fraction of fake articles whose headline contradicts the body topic.
    pub phi: f64,
    /// Probability a fake headline contains a marker token.
    pub marker_prob: f64,
    /// Inclusive range of sentences per body.
    pub sentences: (usize, usize),
    /// Inclusive range of words per sentence.
    pub words: (usize, usize),
    /// Inclusive range of words per headline.
    pub headline_words: (usize, usize),
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_per_class: 100,
            class_tokens: 12,
            shared_tokens: 20,
            topic_tokens: 12,
            class_token_prob: 0.0,
            topic_token_prob: 0.0,
            headline_topic_prob: 0.0,
            headline_class_prob: 0.0,
            topic_bias: 0.5,
            phi: 0.0,
            marker_prob: 0.0,
            sentences: (2, 4),
            words: (4, 8),
            headline_words: (3, 6),
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 {
            return Err(Error::Config("synth: n_per_class must be positive".into()));
        }
        for (name, p) in [
            ("class_token_prob", self.class_token_prob),
            ("topic_token_prob", self.topic_token_prob),
            ("headline_topic_prob", self.headline_topic_prob),
            ("headline_class_prob", self.headline_class_prob),
            ("topic_bias", self.topic_bias),
            ("phi", self.phi),
            ("marker_prob", self.marker_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("synth: {name} must be in [0, 1], got {p}")));
            }
        }
        if self.class_token_prob + self.topic_token_prob > 1.0 {
            return Err(Error::Config(
                "synth: class_token_prob + topic_token_prob must not exceed 1".into(),
            ));
        }
        if self.headline_class_prob + self.headline_topic_prob > 1.0 {
            return Err(Error::Config(
                "synth: headline_class_prob + headline_topic_prob must not exceed 1".into(),
            ));
        }
        for (name, (lo, hi)) in [
            ("sentences", self.sentences),
            ("words", self.words),
            ("headline_words", self.headline_words),
        ] {
            if lo == 0 || hi < lo {
                return Err(Error::Config(format!(
                    "synth: {name} range ({lo}, {hi}) is invalid"
                )));
            }
        }
        if self.shared_tokens == 0 || self.class_tokens == 0 || self.topic_tokens == 0 {
            return Err(Error::Config("synth: token pools must be non-empty".into()));
        }
        Ok(())
    }
}

const MARKERS: [&str; 6] = ["shocking", "unbelievable", "exposed", "secret", "banned", "miracle"];

struct Pools {
    class: [Vec<String>; 2],
    shared: Vec<String>,
    topic: [Vec<String>; 2],
}

fn make_pools(spec: &SynthSpec) -> Pools {
    let name = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i:03}")).collect();
    Pools {
        class: [
            name("cg", spec.class_tokens),
            name("cf", spec.class_tokens),
        ],
        shared: name("sh", spec.shared_tokens),
        topic: [name("ta", spec.topic_tokens), name("tb", spec.topic_tokens)],
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [String]) -> &'a str {
    &pool[rng.random_range(0..pool.len())]
}

fn body_token<'a>(
    rng: &mut ChaCha8Rng,
    spec: &SynthSpec,
    pools: &'a Pools,
    label: Label,
    topic: usize,
) -> &'a str {
    let r: f64 = rng.random();
    if r < spec.topic_token_prob {
        pick(rng, &pools.topic[topic])
    } else if r < spec.topic_token_prob + spec.class_token_prob {
        pick(rng, &pools.class[u8::from(label) as usize])
    } else {
        pick(rng, &pools.shared)
    }
}

fn headline_token<'a>(
    rng: &mut ChaCha8Rng,
    spec: &SynthSpec,
    pools: &'a Pools,
    label: Label,
    topic: usize,
) -> &'a str {
    let r: f64 = rng.random();
    if r < spec.headline_topic_prob {
        pick(rng, &pools.topic[topic])
    } else if r < spec.headline_topic_prob + spec.headline_class_prob {
        pick(rng, &pools.class[u8::from(label) as usize])
    } else {
        pick(rng, &pools.shared)
    }
}

/// Generate a balanced two-class corpus; deterministic per seed.
pub fn synth_corpus(spec: &SynthSpec, seed: u64) -> Result<Vec<RawArticle>> {
    spec.validate()?;
    let pools = make_pools(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut articles = Vec::with_capacity(2 * spec.n_per_class);
    for i in 0..2 * spec.n_per_class {
        let label = if i % 2 == 0 { Label::Fake } else { Label::Genuine };
        let body_topic = if rng.random::<f64>() < spec.topic_bias { 0 } else { 1 };
        let headline_topic = if label == Label::Fake && rng.random::<f64>() < spec.phi {
            1 - body_topic
        } else {
            body_topic
        };

        let n_sentences = rng.random_range(spec.sentences.0..=spec.sentences.1);
        let mut body = String::new();
        for s in 0..n_sentences {
            if s > 0 {
                body.push(' ');
            }
            let n_words = rng.random_range(spec.words.0..=spec.words.1);
            for w in 0..n_words {
                if w > 0 {
                    body.push(' ');
                }
                body.push_str(body_token(&mut rng, spec, &pools, label, body_topic));
            }
            body.push('.');
        }

        let n_head = rng.random_range(spec.headline_words.0..=spec.headline_words.1);
        let mut head_tokens: Vec<String> = (0..n_head)
            .map(|_| headline_token(&mut rng, spec, &pools, label, headline_topic).to_string())
            .collect();
        if label == Label::Fake && rng.random::<f64>() < spec.marker_prob {
            let pos = rng.random_range(0..=head_tokens.len());
            let marker = MARKERS[rng.random_range(0..MARKERS.len())];
            head_tokens.insert(pos, marker.to_string());
        }

        articles.push(RawArticle {
            headline: head_tokens.join(" "),
            body,
            label,
            source_id: Some(format!(
                "synth-{}-{}",
                match label {
                    Label::Fake => "fake",
                    Label::Genuine => "genuine",
                },
                i % 3
            )),
        });
    }
    Ok(articles)
}
