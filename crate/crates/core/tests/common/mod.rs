#![allow(dead_code)]

use ooc_core::corpus::{tokenize_document, Document, Vocabulary};
use ooc_core::models::{Model, ModelConfig, SentenceEncoder, SentenceRepr, Topology};
use ooc_core::seed;

/// 46 distinct words, so the vocabulary has exactly 50 entries.
pub fn words() -> Vec<String> {
    (0..46).map(|i| format!("w{i:02}")).collect()
}

/// Small documents over [`words`] with sentences of varying length.
pub fn tiny_docs() -> Vec<Document> {
    let w = words();
    (0..3)
        .map(|d| {
            let mut text = String::new();
            for s in 0..4 {
                let n = 1 + (d + 2 * s) % 4;
                let line: Vec<&str> = (0..n).map(|k| w[(7 * d + 5 * s + 3 * k) % w.len()].as_str()).collect();
                text.push_str(&line.join(" "));
                text.push('\n');
            }
            tokenize_document(&format!("d{d}"), &text).unwrap()
        })
        .collect()
}

pub fn tiny_vocab() -> Vocabulary {
    let text = words().join(" ");
    let doc = tokenize_document("all", &text).unwrap();
    let v = Vocabulary::build(&[doc], 50).unwrap();
    assert_eq!(v.len(), 50);
    v
}

pub fn tiny_config(topology: Topology, seed: u64) -> ModelConfig {
    let mut c = ModelConfig::new(topology, 50);
    c.embed_dim = 8;
    c.hidden_dim = 16;
    c.context_window = 3;
    c.seed = seed;
    if topology.is_contextual() {
        c.sentence_repr = SentenceRepr::LmCr;
    }
    c
}

pub fn tiny_encoder(seed: u64) -> SentenceEncoder {
    let mut rng = seed::stream(seed, &["test-encoder"]);
    SentenceEncoder::new(SentenceRepr::LmCr, 50, 8, 16, &mut rng)
}

pub fn tiny_model(topology: Topology, seed: u64) -> Model {
    let enc = tiny_encoder(seed);
    Model::new(
        tiny_config(topology, seed),
        tiny_vocab(),
        topology.is_contextual().then_some(&enc),
    )
    .unwrap()
}
