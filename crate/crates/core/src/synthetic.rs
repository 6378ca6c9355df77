//! Small generated corpora for tests, demos and the desk-scale trend
//! experiment.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{tokenize, tokenize_document, Document, Sentence};
use crate::error::Result;
use crate::seed;

/// Settings of the two-topic corpus.
///
/// Every document belongs to one topic and mentions each of that topic's
/// nouns exactly `noun_counts[k]` times, in sentences of the form
/// `<noun> <verb> <adverb>`. Nothing inside a sentence reveals the topic;
/// only the nouns of the surrounding sentences do. Topic `a` and topic `b`
/// nouns at the same position have equal corpus counts and `a` sorts first,
/// so frequency ranks alternate between the topics and a closest-rank
/// replacement always swaps a noun into the other topic.
#[derive(Clone, Debug, PartialEq)]
pub struct TopicCorpusConfig {
    pub documents: usize,
    pub noun_counts: Vec<usize>,
    pub seed: u64,
}

impl Default for TopicCorpusConfig {
    fn default() -> Self {
        Self {
            documents: 200,
            noun_counts: vec![12, 10, 8, 6, 4],
            seed: 0,
        }
    }
}

/// Paired noun inventories; pair `k` has equal frequency and the first
/// member sorts lower.
pub const TOPIC_NOUNS: [[&str; 2]; 5] = [
    ["apple", "atom"],
    ["bread", "bridge"],
    ["carrot", "circuit"],
    ["dough", "drill"],
    ["garlic", "gear"],
];

const ADVERBS: [&str; 4] = ["quickly", "slowly", "rarely", "gladly"];
const VERBS: [&str; 4] = ["moved", "held", "saw", "took"];

fn doc_rng(seed: u64, kind: &str, id: &str) -> ChaCha8Rng {
    seed::stream(seed, &["synthetic", kind, id])
}

/// Topic of document `i`: documents alternate between the two topics.
pub fn topic_of(i: usize) -> usize {
    i % 2
}

/// Pre-tagged text (`surface/TAG`) for every document, with ids
/// `doc-000`, `doc-001`, ….
pub fn topic_corpus_texts(cfg: &TopicCorpusConfig) -> Vec<(String, String)> {
    let nouns = cfg.noun_counts.len().min(TOPIC_NOUNS.len());
    (0..cfg.documents)
        .map(|i| {
            let id = format!("doc-{i:03}");
            let mut rng = doc_rng(cfg.seed, "topic", &id);
            let topic = topic_of(i);
            let mut mentions: Vec<&str> = (0..nouns)
                .flat_map(|k| std::iter::repeat_n(TOPIC_NOUNS[k][topic], cfg.noun_counts[k]))
                .collect();
            mentions.shuffle(&mut rng);
            let mut text = String::new();
            for noun in mentions {
                let adv = ADVERBS.choose(&mut rng).expect("nonempty");
                let verb = VERBS.choose(&mut rng).expect("nonempty");
                text.push_str(&format!("{noun}/NN {verb}/VBD {adv}/RB\n"));
            }
            (id, text)
        })
        .collect()
}

pub fn topic_corpus(cfg: &TopicCorpusConfig) -> Result<Vec<Document>> {
    topic_corpus_texts(cfg)
        .iter()
        .map(|(id, text)| tokenize_document(id, text))
        .collect()
}

const SINGULAR: [&str; 12] = [
    "planet", "rocket", "telescope", "ocean", "robot", "doctor", "teacher", "computer", "river", "forest", "machine",
    "engine",
];
const DETS: [&str; 4] = ["the", "a", "this", "every"];
const FIXTURE_VERBS: [&str; 10] = [
    "saw", "found", "built", "liked", "moved", "helped", "showed", "kept", "left", "used",
];
const CLOSERS: [&str; 4] = ["today", "again", "there", "together"];

fn plural(noun: &str) -> String {
    format!("{noun}s")
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Raw English-like text (untagged) with singular, plural and capitalized
/// nouns. Each document draws its nouns from a small subset of the
/// inventory, so most nouns repeat within a document.
pub fn fixture_texts(documents: usize, sentences: usize, seed: u64) -> Vec<(String, String)> {
    (0..documents)
        .map(|i| {
            let id = format!("talk-{i:03}");
            let mut rng = doc_rng(seed, "fixture", &id);
            let mut pool: Vec<&str> = SINGULAR.to_vec();
            pool.shuffle(&mut rng);
            pool.truncate(5);
            let noun = |rng: &mut ChaCha8Rng| -> String {
                let n = pool.choose(rng).expect("nonempty");
                if rng.gen_bool(0.3) {
                    plural(n)
                } else {
                    n.to_string()
                }
            };
            let mut text = String::new();
            for _ in 0..sentences {
                let verb = FIXTURE_VERBS.choose(&mut rng).expect("nonempty");
                let line = match rng.gen_range(0..3) {
                    0 => {
                        let (d1, d2) = (DETS.choose(&mut rng).unwrap(), DETS.choose(&mut rng).unwrap());
                        let (n1, n2) = (noun(&mut rng), noun(&mut rng));
                        format!("{} {n1} {verb} {d2} {n2} .", capitalize(d1))
                    }
                    1 => {
                        let n1 = noun(&mut rng);
                        let n2 = noun(&mut rng);
                        let closer = CLOSERS.choose(&mut rng).unwrap();
                        format!("{} {verb} the {n2} {closer} .", capitalize(&n1))
                    }
                    _ => {
                        let n1 = noun(&mut rng);
                        let n2 = noun(&mut rng);
                        format!("We {verb} the {n1} with the {n2} , okay ?")
                    }
                };
                text.push_str(&line);
                text.push('\n');
            }
            (id, text)
        })
        .collect()
}

/// Copy-task translation pairs (target equals source) over a small word
/// list.
pub fn copy_pairs(count: usize, words: &[&str], max_len: usize, seed: u64) -> Result<Vec<(Sentence, Sentence)>> {
    let mut rng = seed::stream(seed, &["synthetic", "copy"]);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(1..=max_len.max(1));
            let line: Vec<&str> = (0..n).map(|_| *words.choose(&mut rng).expect("nonempty word list")).collect();
            let mut s = tokenize(&line.join(" "))?.sentences.remove(0);
            s.index = i;
            Ok((s.clone(), s))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{pos_tag, Pos, Vocabulary};

    #[test]
    fn topic_nouns_alternate_in_rank() {
        let docs = topic_corpus(&TopicCorpusConfig {
            documents: 20,
            ..Default::default()
        })
        .unwrap();
        assert!(docs.iter().all(|d| d.sentences.len() == 40 && d.pretagged));
        let v = Vocabulary::build(&docs, 1000).unwrap();
        let ranked: Vec<&str> = (1..=v.max_rank())
            .filter_map(|r| v.id_at_rank(r))
            .filter(|&id| v.is_noun(id))
            .map(|id| v.word(id))
            .collect();
        let expected: Vec<&str> = TOPIC_NOUNS.iter().flatten().copied().collect();
        assert_eq!(ranked, expected);
        assert!(expected.iter().all(|n| !n.ends_with('s')));
    }

    #[test]
    fn fixture_text_tags_nouns() {
        let texts = fixture_texts(2, 12, 3);
        let mut d = tokenize_document(&texts[0].0, &texts[0].1).unwrap();
        pos_tag(&mut d);
        let nouns: Vec<&str> = d
            .tokens()
            .filter(|t| t.pos == Pos::Noun)
            .map(|t| t.lower.as_str())
            .collect();
        assert!(nouns.len() >= 24, "{nouns:?}");
        assert!(nouns.iter().all(|n| SINGULAR.iter().any(|s| n.starts_with(s))), "{nouns:?}");
        assert_eq!(texts, fixture_texts(2, 12, 3));
    }

    #[test]
    fn copy_pairs_are_identical() {
        let p = copy_pairs(5, &["x", "y", "z"], 4, 1).unwrap();
        assert_eq!(p.len(), 5);
        assert!(p.iter().all(|(s, t)| s == t && !s.is_empty()));
    }
}
