//! Training, pre-training, evaluation, and checkpoint behavior.

mod common;

use common::{tiny_article, tiny_config};
use threehan::data::{
    build_vocab, encode, split_dataset, synth_corpus, tokenize_article, EncodedArticle, Label,
    SynthSpec, Vocabulary,
};
use threehan::model::{
    evaluate, load_model, model_from_bytes, model_to_bytes, parse_architecture,
    pretrain_headline, train, Architecture, Composition, Model, ModelConfig, Variant,
};
use threehan::tensor::Tape;

fn small_config(architecture: Architecture, seed: u64) -> ModelConfig {
    ModelConfig {
        architecture,
        embed_dim: 8,
        gru_hidden: 4,
        att_dim: 8,
        max_words_per_sentence: 8,
        max_sentences: 4,
        max_headline_words: 6,
        epochs: 2,
        batch_size: 8,
        seed,
        ..ModelConfig::default()
    }
}

fn encoded_corpus(spec: &SynthSpec, config: &ModelConfig, seed: u64) -> (Vec<EncodedArticle>, Vocabulary) {
    let raw = synth_corpus(spec, seed).unwrap();
    let tokenized: Vec<_> = raw.iter().map(tokenize_article).collect();
    let vocab = build_vocab(&tokenized).unwrap();
    let encoded = tokenized
        .iter()
        .map(|t| encode(t, &vocab, &config.pad_config()).unwrap())
        .collect();
    (encoded, vocab)
}

#[test]
fn training_is_deterministic_per_seed() {
    let spec = SynthSpec {
        n_per_class: 16,
        class_token_prob: 0.8,
        ..SynthSpec::default()
    };
    let config = small_config(Architecture::ThreeHan, 3);
    let (articles, vocab) = encoded_corpus(&spec, &config, 10);
    let run = || {
        let model = Model::new(&config, vocab.size()).unwrap();
        let history = train(&model, &articles, &articles).unwrap();
        (history.to_csv(), model_to_bytes(&model))
    };
    let (h1, c1) = run();
    let (h2, c2) = run();
    assert_eq!(h1, h2, "history files must be byte-identical");
    assert_eq!(c1, c2, "checkpoints must be byte-identical");
}

#[test]
fn zero_learning_rate_is_a_fixed_point() {
    let spec = SynthSpec {
        n_per_class: 8,
        ..SynthSpec::default()
    };
    let mut config = small_config(Architecture::ThreeHan, 4);
    config.learning_rate = 0.0;
    config.epochs = 3;
    let (articles, vocab) = encoded_corpus(&spec, &config, 11);
    let model = Model::new(&config, vocab.size()).unwrap();
    let before = model_to_bytes(&model);
    train(&model, &articles, &articles).unwrap();
    assert_eq!(before, model_to_bytes(&model));
}

#[test]
fn first_epoch_improves_on_untrained_loss() {
    // needs enough mini-batches for learning to show up within one epoch
    let spec = SynthSpec {
        n_per_class: 1000,
        class_token_prob: 1.0,
        headline_class_prob: 1.0,
        ..SynthSpec::default()
    };
    let mut config = small_config(Architecture::ThreeHan, 5);
    config.batch_size = 16;
    config.epochs = 1;
    let (articles, vocab) = encoded_corpus(&spec, &config, 12);

    // mean BCE of the untrained model over the whole set
    let untrained = Model::new(&config, vocab.size()).unwrap();
    let mut untrained_loss = 0.0;
    for a in &articles {
        let tape = Tape::new();
        let (p, _) = untrained.forward(&tape, a).unwrap();
        untrained_loss += threehan::layers::bce_loss(&tape, &p, a.label.as_f64())
            .unwrap()
            .item();
    }
    untrained_loss /= articles.len() as f64;

    let model = Model::new(&config, vocab.size()).unwrap();
    let history = train(&model, &articles, &articles).unwrap();
    assert!(
        history.epochs[0].train_loss < untrained_loss,
        "{} vs untrained {}",
        history.epochs[0].train_loss,
        untrained_loss
    );
}

#[test]
fn evaluate_matches_tie_rule_and_perfect_oracle() {
    let config = tiny_config(6);
    let zero = Model::zeroed(&config, 10).unwrap();
    // zero model predicts exactly 0.5 -> fake for every article
    let mut set = Vec::new();
    for i in 0..10 {
        let mut a = tiny_article();
        a.label = if i % 2 == 0 { Label::Fake } else { Label::Genuine };
        set.push(a);
    }
    assert_eq!(evaluate(&zero, &set).unwrap(), 0.5);
    let all_fake: Vec<EncodedArticle> = set
        .iter()
        .map(|a| {
            let mut a = a.clone();
            a.label = Label::Fake;
            a
        })
        .collect();
    assert_eq!(evaluate(&zero, &all_fake).unwrap(), 1.0);
    assert!(evaluate(&zero, &[]).is_err());
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let config = small_config(Architecture::ThreeHan, 21);
    let model = Model::new(&config, 40).unwrap();
    let article = EncodedArticle {
        headline_ids: vec![2, 3, 4, 0, 0, 0],
        sentence_ids: vec![
            vec![5, 6, 7, 8, 0, 0, 0, 0],
            vec![9, 10, 0, 0, 0, 0, 0, 0],
            vec![0; 8],
            vec![0; 8],
        ],
        headline_len: 3,
        sentence_lens: vec![4, 2],
        n_sentences: 2,
        label: Label::Fake,
    };
    let tape = Tape::new();
    let (p1, t1) = model.forward(&tape, &article).unwrap();

    let bytes = model_to_bytes(&model);
    let reloaded = model_from_bytes(&bytes).unwrap();
    let tape = Tape::new();
    let (p2, t2) = reloaded.forward(&tape, &article).unwrap();
    assert_eq!(p1.item().to_bits(), p2.item().to_bits());
    assert_eq!(t1, t2);
    assert_eq!(bytes, model_to_bytes(&reloaded));
}

#[test]
fn truncated_checkpoint_reports_offset() {
    let config = small_config(Architecture::ThreeHan, 22);
    let model = Model::new(&config, 12).unwrap();
    let bytes = model_to_bytes(&model);
    let truncated = &bytes[..bytes.len() - 9];
    let err = model_from_bytes(truncated).unwrap_err().to_string();
    assert!(err.contains("truncated"), "{err}");
    let garbage = b"NOPE blah";
    let err = model_from_bytes(garbage).unwrap_err().to_string();
    assert!(err.contains("magic"), "{err}");
}

#[test]
fn zero_checkpoint_loads_to_half_probability() {
    let config = tiny_config(1);
    let zero = Model::zeroed(&config, 10).unwrap();
    let reloaded = model_from_bytes(&model_to_bytes(&zero)).unwrap();
    let tape = Tape::new();
    let (p, _) = reloaded.forward(&tape, &tiny_article()).unwrap();
    assert_eq!(p.item(), 0.5);
}

#[test]
fn save_load_via_files() {
    let dir = std::env::temp_dir().join(format!("threehan-ckpt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.bin");
    let config = small_config(Architecture::Han, 23);
    let model = Model::new(&config, 17).unwrap();
    threehan::model::save_model(&model, &path).unwrap();
    let reloaded = load_model(&path).unwrap();
    assert_eq!(model_to_bytes(&model), model_to_bytes(&reloaded));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn han_checkpoints_have_no_headline_level() {
    let c3 = small_config(Architecture::ThreeHan, 24);
    let ch = small_config(Architecture::Han, 24);
    let names = |m: &Model| -> Vec<String> { m.params().into_iter().map(|(n, _)| n).collect() };
    let three = names(&Model::new(&c3, 11).unwrap());
    let han = names(&Model::new(&ch, 11).unwrap());
    assert!(three.iter().any(|n| n.starts_with("head_")));
    assert!(!han.iter().any(|n| n.starts_with("head_")));
    assert_ne!(three, han);
}

#[test]
fn zeroed_headline_level_still_yields_valid_probability() {
    let config = small_config(Architecture::ThreeHan, 25);
    let model = Model::new(&config, 30).unwrap();
    for (name, t) in model.params() {
        if name.starts_with("head_") {
            t.set_values(&vec![0.0; t.numel()]).unwrap();
        }
    }
    let article = EncodedArticle {
        headline_ids: vec![2, 3, 0, 0, 0, 0],
        sentence_ids: vec![vec![4, 5, 6, 0, 0, 0, 0, 0], vec![0; 8], vec![0; 8], vec![0; 8]],
        headline_len: 2,
        sentence_lens: vec![3],
        n_sentences: 1,
        label: Label::Genuine,
    };
    let tape = Tape::new();
    let (p, trace) = model.forward(&tape, &article).unwrap();
    assert!(p.item() > 0.0 && p.item() < 1.0);
    // zero level-3 parameters force uniform headline attention
    let hw = trace.unwrap().headline_weights;
    for w in &hw {
        assert!((w - 1.0 / hw.len() as f64).abs() <= 1e-12);
    }
}

#[test]
fn composition_aliases_build_identical_models() {
    let (arch, comp) = parse_architecture("3han-ave").unwrap();
    assert_eq!(arch, Architecture::ThreeHan);
    assert_eq!(comp, Some(Composition::Average));
    let mut via_alias = small_config(Architecture::ThreeHan, 26);
    via_alias.composition = comp.unwrap();
    let mut explicit = small_config(Architecture::ThreeHan, 26);
    explicit.composition = Composition::Average;
    let a = Model::new(&via_alias, 15).unwrap();
    let b = Model::new(&explicit, 15).unwrap();
    assert_eq!(model_to_bytes(&a), model_to_bytes(&b));
}

#[test]
fn flat_baselines_agree_on_single_token_articles() {
    let mut config = small_config(Architecture::GruFlat, 27);
    let article = EncodedArticle {
        headline_ids: vec![3, 0, 0, 0, 0, 0],
        sentence_ids: vec![vec![0; 8], vec![0; 8], vec![0; 8], vec![0; 8]],
        headline_len: 1,
        sentence_lens: vec![],
        n_sentences: 0,
        label: Label::Fake,
    };
    let gru = Model::new(&config, 9).unwrap();
    config.architecture = Architecture::GruAveFlat;
    let gru_ave = Model::new(&config, 9).unwrap();
    let tape = Tape::new();
    // same seed, same parameters; a single annotation averages to itself
    let (p1, _) = gru.forward(&tape, &article).unwrap();
    let (p2, _) = gru_ave.forward(&tape, &article).unwrap();
    assert_eq!(p1.item().to_bits(), p2.item().to_bits());
}

#[test]
fn glove_ave_single_word_feature_is_the_embedding() {
    let config = small_config(Architecture::GloveAve, 28);
    let model = Model::new(&config, 9).unwrap();
    let article = EncodedArticle {
        headline_ids: vec![4, 0, 0, 0, 0, 0],
        sentence_ids: vec![vec![0; 8]; 4],
        headline_len: 1,
        sentence_lens: vec![],
        n_sentences: 0,
        label: Label::Fake,
    };
    let tape = Tape::new();
    let (p, _) = model.forward(&tape, &article).unwrap();
    let Variant::GloveAve(g) = &model.variant else { panic!() };
    let row = model.embedding().lookup(&tape, 4).unwrap();
    let expect = g.classifier.apply(&tape, &row).unwrap();
    assert_eq!(p.item().to_bits(), expect.item().to_bits());
}

#[test]
fn pretrain_transfer_is_bit_exact() {
    let spec = SynthSpec {
        n_per_class: 12,
        class_token_prob: 0.8,
        ..SynthSpec::default()
    };
    let config = small_config(Architecture::ThreeHan, 31);
    let (articles, vocab) = encoded_corpus(&spec, &config, 14);
    let (pre, _history) = pretrain_headline(&articles, &articles, &config, vocab.size()).unwrap();

    let model = Model::new(&config, vocab.size()).unwrap();
    model.init_from_pretrained(&pre).unwrap();
    let Variant::ThreeHan(m) = &model.variant else { panic!() };
    assert_eq!(m.embedding.weights.to_vec(), pre.embedding.weights.to_vec());
    for (a, b) in m.word_fwd.params("x").iter().zip(pre.word_fwd.params("x").iter()) {
        assert_eq!(a.1.to_vec(), b.1.to_vec());
    }
    for (a, b) in m.word_bwd.params("x").iter().zip(pre.word_bwd.params("x").iter()) {
        assert_eq!(a.1.to_vec(), b.1.to_vec());
    }
    let att = m.word_att.as_ref().unwrap();
    assert_eq!(att.w.to_vec(), pre.word_att.w.to_vec());
    assert_eq!(att.b.to_vec(), pre.word_att.b.to_vec());
    assert_eq!(att.u.to_vec(), pre.word_att.u.to_vec());
}

#[test]
fn zero_lr_pretraining_equals_initialization() {
    let spec = SynthSpec {
        n_per_class: 8,
        ..SynthSpec::default()
    };
    let mut config = small_config(Architecture::ThreeHan, 32);
    config.learning_rate = 0.0;
    let (articles, vocab) = encoded_corpus(&spec, &config, 15);
    let (pre, _) = pretrain_headline(&articles, &articles, &config, vocab.size()).unwrap();
    // the auxiliary model shares the fresh model's draw order, so lr=0
    // pre-training returns exactly the cold-start level-1 weights
    let cold = Model::new(&config, vocab.size()).unwrap();
    let Variant::ThreeHan(m) = &cold.variant else { panic!() };
    assert_eq!(pre.embedding.weights.to_vec(), m.embedding.weights.to_vec());
    for (a, b) in pre.word_fwd.params("x").iter().zip(m.word_fwd.params("x").iter()) {
        assert_eq!(a.1.to_vec(), b.1.to_vec());
    }
    assert_eq!(pre.word_att.u.to_vec(), m.word_att.as_ref().unwrap().u.to_vec());
}

#[test]
fn pretrained_checkpoint_round_trips() {
    let spec = SynthSpec {
        n_per_class: 8,
        class_token_prob: 0.5,
        ..SynthSpec::default()
    };
    let config = small_config(Architecture::ThreeHan, 33);
    let (articles, vocab) = encoded_corpus(&spec, &config, 16);
    let (pre, _) = pretrain_headline(&articles, &articles, &config, vocab.size()).unwrap();
    let dir = std::env::temp_dir().join(format!("threehan-pre-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("level1.bin");
    threehan::model::save_pretrained(&pre, &config, vocab.size(), &path).unwrap();
    let (back, config2, vocab2) = threehan::model::load_pretrained(&path).unwrap();
    assert_eq!(config2, config);
    assert_eq!(vocab2, vocab.size());
    assert_eq!(back.embedding.weights.to_vec(), pre.embedding.weights.to_vec());
    assert_eq!(back.word_att.w.to_vec(), pre.word_att.w.to_vec());
    // a full-model loader must refuse it
    assert!(load_model(&path).is_err());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn split_plus_train_smoke() {
    let spec = SynthSpec {
        n_per_class: 30,
        class_token_prob: 1.0,
        ..SynthSpec::default()
    };
    let config = small_config(Architecture::ThreeHan, 34);
    let (articles, vocab) = encoded_corpus(&spec, &config, 17);
    let (train_set, val_set, test_set) =
        split_dataset(&articles, |a| a.label, (0.5, 0.2, 0.3), 7).unwrap();
    assert_eq!(train_set.len() + val_set.len() + test_set.len(), 60);
    let model = Model::new(&config, vocab.size()).unwrap();
    let history = train(&model, &train_set, &val_set).unwrap();
    assert_eq!(history.epochs.len(), config.epochs);
    let acc = evaluate(&model, &test_set).unwrap();
    assert!(acc >= 0.0 && acc <= 1.0);
}
