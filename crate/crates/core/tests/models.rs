use std::sync::Arc;

use otut_core::desk::{generate, DeskConfig};
use otut_core::encoders::reference::{
    HashedContextualEncoder, HashedSentenceEncoder, HashedWordVectors, UnigramMaskFiller,
};
use otut_core::encoders::EncoderBundle;
use otut_core::models::{
    build_head, encode_samples, predict_many, train, Arch, Checkpoint, Encoded, HeadConfig, TrainConfig,
};
use otut_core::synthesis::{assemble_dataset, LabeledSample, SynthesisConfig};

fn toy_set(n: usize, seed: u64) -> (Vec<LabeledSample>, EncoderBundle) {
    let corpus = generate(&DeskConfig {
        pairs: 4 * n,
        seed,
        ..DeskConfig::default()
    });
    let sources: Vec<_> = corpus.pairs.iter().map(|p| p.source_tokens()).collect();
    let bundle = EncoderBundle::new(
        Arc::new(UnigramMaskFiller::from_sequences(&sources)),
        Arc::new(HashedWordVectors::new(64, 0)),
        Arc::new(HashedSentenceEncoder::new(64, 0, corpus.lexicon.clone())),
        Arc::new(HashedContextualEncoder::new(64, 0, 2, 512, corpus.lexicon.clone())),
    )
    .unwrap();
    let cfg = SynthesisConfig {
        num_samples: n,
        seed,
        ..SynthesisConfig::default()
    };
    let ds = assemble_dataset(corpus.pairs, &bundle, &cfg).unwrap();
    let mut all = ds.train;
    all.extend(ds.validation);
    (all, bundle)
}

#[test]
fn hybrid_overfits_toy_set() {
    let (samples, bundle) = toy_set(64, 11);
    assert_eq!(samples.len(), 64);
    let head = build_head(&HeadConfig::default(), 64, 1).unwrap();
    let cfg = TrainConfig {
        max_epochs: 200,
        patience: 10,
        ..TrainConfig::default()
    };
    let (head, hist) = train(head, &samples, &samples, &bundle, &cfg).unwrap();
    let best = hist.epochs.iter().map(|e| e.train_accuracy).fold(0.0, f64::max);
    assert!(best >= 0.95, "best train accuracy {best}");
    assert!(hist.epochs.len() <= 200);
    assert!(hist
        .epochs
        .windows(2)
        .all(|w| w[1].best_validation_loss <= w[0].best_validation_loss));
    let pairs: Vec<_> = samples.iter().map(|s| s.pair.clone()).collect();
    let preds = predict_many(&head, &pairs, &bundle);
    let hits = preds.iter().zip(&samples).filter(|(p, s)| p.as_ref().unwrap().label == s.label).count();
    assert!(hits as f64 / 64.0 >= 0.95, "{hits}/64");
}

#[test]
fn checkpoint_file_round_trip_predicts_identically() {
    let (samples, bundle) = toy_set(32, 12);
    let cfg = HeadConfig {
        arch: Arch::GruCnn,
        hidden_dim: 16,
        cnn_channels: 8,
        ..HeadConfig::default()
    };
    let head = build_head(&cfg, 64, 2).unwrap();
    let tc = TrainConfig {
        max_epochs: 3,
        ..TrainConfig::default()
    };
    let (head, _) = train(head, &samples, &samples, &bundle, &tc).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    Checkpoint::from_head(&head, &bundle.fingerprint()).unwrap().save(&path).unwrap();
    let restored = Checkpoint::load(&path).unwrap().into_head(&bundle.fingerprint()).unwrap();
    let enc: Vec<Encoded> = encode_samples(&samples, &bundle).unwrap();
    for (x, _) in &enc {
        assert_eq!(
            head.probabilities(x.view()).unwrap(),
            restored.probabilities(x.view()).unwrap()
        );
    }
    let other = HashedContextualEncoder::new(64, 1, 2, 512, Default::default());
    use otut_core::encoders::ContextualEncoder;
    assert!(Checkpoint::load(&path).unwrap().into_head(&other.fingerprint()).is_err());
}
