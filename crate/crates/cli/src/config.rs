//! Run configuration: built-in defaults, overridden by a flat `key = value`
//! config file, overridden by command-line flags. Unknown keys are
//! rejected; the resolved configuration is echoed to stderr at startup.

use std::fmt::Write as _;
use std::path::Path;

use threehan::data::SynthSpec;
use threehan::error::{Error, Result};
use threehan::model::{parse_architecture, Composition, ModelConfig};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub train_ratio: f64,
    pub val_ratio: f64,
    pub test_ratio: f64,
    pub synth: SynthSpec,
    pub top_sentences: usize,
    pub words_per_sentence: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::default(),
            train_ratio: 0.2,
            val_ratio: 0.1,
            test_ratio: 0.7,
            synth: SynthSpec::default(),
            top_sentences: 5,
            words_per_sentence: 8,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for key {key:?}")))
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "architecture" => {
                let (arch, comp) = parse_architecture(value)?;
                self.model.architecture = arch;
                if let Some(comp) = comp {
                    self.model.composition = comp;
                }
            }
            "composition" => self.model.composition = value.parse::<Composition>()?,
            "embed_dim" => self.model.embed_dim = parse(key, value)?,
            "gru_hidden" => self.model.gru_hidden = parse(key, value)?,
            "att_dim" => self.model.att_dim = parse(key, value)?,
            "max_words_per_sentence" => self.model.max_words_per_sentence = parse(key, value)?,
            "max_sentences" => self.model.max_sentences = parse(key, value)?,
            "max_headline_words" => self.model.max_headline_words = parse(key, value)?,
            "learning_rate" => self.model.learning_rate = parse(key, value)?,
            "momentum" => self.model.momentum = parse(key, value)?,
            "batch_size" => self.model.batch_size = parse(key, value)?,
            "epochs" => self.model.epochs = parse(key, value)?,
            "seed" => self.model.seed = parse(key, value)?,
            "mask_padding" => self.model.mask_padding = parse(key, value)?,
            "train_ratio" => self.train_ratio = parse(key, value)?,
            "val_ratio" => self.val_ratio = parse(key, value)?,
            "test_ratio" => self.test_ratio = parse(key, value)?,
            "n_per_class" => self.synth.n_per_class = parse(key, value)?,
            "class_tokens" => self.synth.class_tokens = parse(key, value)?,
            "shared_tokens" => self.synth.shared_tokens = parse(key, value)?,
            "topic_tokens" => self.synth.topic_tokens = parse(key, value)?,
            "class_token_prob" => self.synth.class_token_prob = parse(key, value)?,
            "topic_token_prob" => self.synth.topic_token_prob = parse(key, value)?,
            "headline_topic_prob" => self.synth.headline_topic_prob = parse(key, value)?,
            "headline_class_prob" => self.synth.headline_class_prob = parse(key, value)?,
            "topic_bias" => self.synth.topic_bias = parse(key, value)?,
            "phi" => self.synth.phi = parse(key, value)?,
            "marker_prob" => self.synth.marker_prob = parse(key, value)?,
            "sentences_min" => self.synth.sentences.0 = parse(key, value)?,
            "sentences_max" => self.synth.sentences.1 = parse(key, value)?,
            "words_min" => self.synth.words.0 = parse(key, value)?,
            "words_max" => self.synth.words.1 = parse(key, value)?,
            "headline_words_min" => self.synth.headline_words.0 = parse(key, value)?,
            "headline_words_max" => self.synth.headline_words.1 = parse(key, value)?,
            "top_sentences" => self.top_sentences = parse(key, value)?,
            "words_per_sentence" => self.words_per_sentence = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Overlay a flat config file (`key = value` lines; `#` comments).
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "config file line {}: expected key = value, got {raw:?}",
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let sum = self.train_ratio + self.val_ratio + self.test_ratio;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split ratios must sum to 1, got {} + {} + {}",
                self.train_ratio, self.val_ratio, self.test_ratio
            )));
        }
        Ok(())
    }

    pub fn ratios(&self) -> (f64, f64, f64) {
        (self.train_ratio, self.val_ratio, self.test_ratio)
    }

    /// Render every resolved key, in the order `set` accepts them.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let m = &self.model;
        let sy = &self.synth;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("architecture", m.architecture.to_string());
        kv("composition", m.composition.to_string());
        kv("embed_dim", m.embed_dim.to_string());
        kv("gru_hidden", m.gru_hidden.to_string());
        kv("att_dim", m.att_dim.to_string());
        kv("max_words_per_sentence", m.max_words_per_sentence.to_string());
        kv("max_sentences", m.max_sentences.to_string());
        kv("max_headline_words", m.max_headline_words.to_string());
        kv("learning_rate", m.learning_rate.to_string());
        kv("momentum", m.momentum.to_string());
        kv("batch_size", m.batch_size.to_string());
        kv("epochs", m.epochs.to_string());
        kv("seed", m.seed.to_string());
        kv("mask_padding", m.mask_padding.to_string());
        kv("train_ratio", self.train_ratio.to_string());
        kv("val_ratio", self.val_ratio.to_string());
        kv("test_ratio", self.test_ratio.to_string());
        kv("n_per_class", sy.n_per_class.to_string());
        kv("class_tokens", sy.class_tokens.to_string());
        kv("shared_tokens", sy.shared_tokens.to_string());
        kv("topic_tokens", sy.topic_tokens.to_string());
        kv("class_token_prob", sy.class_token_prob.to_string());
        kv("topic_token_prob", sy.topic_token_prob.to_string());
        kv("headline_topic_prob", sy.headline_topic_prob.to_string());
        kv("headline_class_prob", sy.headline_class_prob.to_string());
        kv("topic_bias", sy.topic_bias.to_string());
        kv("phi", sy.phi.to_string());
        kv("marker_prob", sy.marker_prob.to_string());
        kv("sentences_min", sy.sentences.0.to_string());
        kv("sentences_max", sy.sentences.1.to_string());
        kv("words_min", sy.words.0.to_string());
        kv("words_max", sy.words.1.to_string());
        kv("headline_words_min", sy.headline_words.0.to_string());
        kv("headline_words_max", sy.headline_words.1.to_string());
        kv("top_sentences", self.top_sentences.to_string());
        kv("words_per_sentence", self.words_per_sentence.to_string());
        s
    }
}

/// Model/split/synth overrides shared by every subcommand.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Flat key = value config file applied before the flags.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long)]
    pub architecture: Option<String>,
    #[arg(long)]
    pub composition: Option<String>,
    #[arg(long)]
    pub embed_dim: Option<usize>,
    #[arg(long)]
    pub gru_hidden: Option<usize>,
    #[arg(long)]
    pub att_dim: Option<usize>,
    #[arg(long)]
    pub max_words_per_sentence: Option<usize>,
    #[arg(long)]
    pub max_sentences: Option<usize>,
    #[arg(long)]
    pub max_headline_words: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mask_padding: Option<bool>,
    #[arg(long)]
    pub train_ratio: Option<f64>,
    #[arg(long)]
    pub val_ratio: Option<f64>,
    #[arg(long)]
    pub test_ratio: Option<f64>,
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[arg(long)]
    pub class_tokens: Option<usize>,
    #[arg(long)]
    pub shared_tokens: Option<usize>,
    #[arg(long)]
    pub topic_tokens: Option<usize>,
    #[arg(long)]
    pub class_token_prob: Option<f64>,
    #[arg(long)]
    pub topic_token_prob: Option<f64>,
    #[arg(long)]
    pub headline_topic_prob: Option<f64>,
    #[arg(long)]
    pub headline_class_prob: Option<f64>,
    #[arg(long)]
    pub topic_bias: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub marker_prob: Option<f64>,
    #[arg(long)]
    pub sentences_min: Option<usize>,
    #[arg(long)]
    pub sentences_max: Option<usize>,
    #[arg(long)]
    pub words_min: Option<usize>,
    #[arg(long)]
    pub words_max: Option<usize>,
    #[arg(long)]
    pub headline_words_min: Option<usize>,
    #[arg(long)]
    pub headline_words_max: Option<usize>,
    #[arg(long)]
    pub top_sentences: Option<usize>,
    #[arg(long)]
    pub words_per_sentence: Option<usize>,
}

/// defaults -> config file -> command-line flags.
pub fn resolve(overrides: &Overrides) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &overrides.config {
        config.apply_file(path)?;
    }
    macro_rules! flag {
        ($field:ident) => {
            if let Some(v) = &overrides.$field {
                config.set(stringify!($field), &v.to_string())?;
            }
        };
    }
    flag!(architecture);
    flag!(composition);
    flag!(embed_dim);
    flag!(gru_hidden);
    flag!(att_dim);
    flag!(max_words_per_sentence);
    flag!(max_sentences);
    flag!(max_headline_words);
    flag!(learning_rate);
    flag!(momentum);
    flag!(batch_size);
    flag!(epochs);
    flag!(seed);
    flag!(mask_padding);
    flag!(train_ratio);
    flag!(val_ratio);
    flag!(test_ratio);
    flag!(n_per_class);
    flag!(class_tokens);
    flag!(shared_tokens);
    flag!(topic_tokens);
    flag!(class_token_prob);
    flag!(topic_token_prob);
    flag!(headline_topic_prob);
    flag!(headline_class_prob);
    flag!(topic_bias);
    flag!(phi);
    flag!(marker_prob);
    flag!(sentences_min);
    flag!(sentences_max);
    flag!(words_min);
    flag!(words_max);
    flag!(headline_words_min);
    flag!(headline_words_max);
    flag!(top_sentences);
    flag!(words_per_sentence);
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flag_over_file_over_default() {
        let dir = std::env::temp_dir().join(format!("threehan-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "# comment\nepochs = 7\nseed = 9\n").unwrap();
        let overrides = Overrides {
            config: Some(path.clone()),
            seed: Some(123),
            ..Overrides::default()
        };
        let config = resolve(&overrides).unwrap();
        assert_eq!(config.model.epochs, 7); // file beats default
        assert_eq!(config.model.seed, 123); // flag beats file
        assert_eq!(config.model.batch_size, 32); // default
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut config = RunConfig::default();
        let err = config.set("learning_rat", "0.1").unwrap_err().to_string();
        assert!(err.contains("unknown config key"), "{err}");
    }

    #[test]
    fn architecture_aliases_set_composition() {
        let mut config = RunConfig::default();
        config.set("architecture", "3han-max").unwrap();
        assert_eq!(config.model.composition, threehan::model::Composition::Max);
    }

    #[test]
    fn render_round_trips_through_set() {
        let mut config = RunConfig::default();
        config.set("phi", "0.75").unwrap();
        config.set("epochs", "3").unwrap();
        let rendered = config.render();
        let mut rebuilt = RunConfig::default();
        for line in rendered.lines() {
            let (k, v) = line.split_once('=').unwrap();
            rebuilt.set(k.trim(), v.trim()).unwrap();
        }
        assert_eq!(rebuilt.render(), rendered);
    }
}
