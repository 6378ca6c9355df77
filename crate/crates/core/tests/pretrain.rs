use ooc_core::corpus::{tokenize_document, Vocabulary};
use ooc_core::models::{pretrain_sentenc_lm, pretrain_sentenc_nmt, PretrainConfig, SentenceRepr};
use ooc_core::synthetic::copy_pairs;
use ooc_core::training::TrainConfig;

fn cfg(epochs: usize) -> PretrainConfig {
    PretrainConfig {
        embed_dim: 8,
        hidden_dim: 16,
        train: TrainConfig {
            epochs,
            batch_size: 8,
            lr: 0.01,
            clip: Some(5.0),
            seed: 3,
        },
    }
}

#[test]
fn sentence_language_model_loss_decreases() {
    let text = "the cat sat on the mat\nthe dog sat on the rug\na cat saw a dog\nthe dog saw the cat\n".repeat(4);
    let docs = vec![tokenize_document("d", &text).unwrap()];
    let vocab = Vocabulary::build(&docs, 100).unwrap();
    let out = pretrain_sentenc_lm(&docs, &vocab, &cfg(10)).unwrap();
    assert_eq!(out.epoch_losses.len(), 10);
    assert!(out.epoch_losses[9] < out.epoch_losses[0], "{:?}", out.epoch_losses);
    assert_eq!(out.encoder.tag, SentenceRepr::LmCr);
}

#[test]
fn translation_encoder_learns_the_copy_task() {
    let words = ["red", "green", "blue", "cyan", "pink", "gray"];
    let pairs = copy_pairs(60, &words, 4, 9).unwrap();
    let vocab = Vocabulary::build_from_sentences(pairs.iter().map(|(s, _)| s), 100).unwrap();
    let out = pretrain_sentenc_nmt(&pairs, &vocab, &vocab, &cfg(30)).unwrap();
    let bound = 0.5 * (vocab.len() as f64).ln();
    let last = *out.epoch_losses.last().unwrap();
    assert!(last < bound, "final loss {last} vs {bound}: {:?}", out.epoch_losses);
    assert_eq!(out.encoder.tag, SentenceRepr::NmtCr);
    assert!(pretrain_sentenc_nmt(&[], &vocab, &vocab, &cfg(1)).is_err());
}
