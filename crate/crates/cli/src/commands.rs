use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use log::warn;

use ooc_core::corpus::{
    apply_labels, corrupt_corpus, filter_dataset, ingest_parallel, pos_tag, read_corpus_dir, replay as replay_manifest,
    split_corpus, write_corpus_dir, CorruptionConfig, CorruptionManifest, Document, FilterConfig, Vocabulary,
};
use ooc_core::evaluation::{evaluate, Thresholds};
use ooc_core::models::{pretrain_sentenc_lm, pretrain_sentenc_nmt, Model, ModelConfig, PretrainConfig, SentenceRepr};
use ooc_core::synthetic::{fixture_texts, topic_corpus_texts, TopicCorpusConfig};
use ooc_core::training::{train as train_model, Checkpoint, TrainConfig};
use ooc_core::Error;

use crate::config::{config_error, ConfigError, Resolver};
use crate::{CorruptArgs, EvalArgs, PretrainArgs, ReplayArgs, SynthArgs, TrainArgs, TrainingFlags, VocabArgs};

const MANIFEST: &str = "manifest.tsv";
const RESOLVED: &str = "resolved.config";

/// 1 for usage and configuration errors, 3 for numeric failures, 2 for
/// everything data-related.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 1;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Config(_) => 1,
                Error::Numeric(_) => 3,
                _ => 2,
            };
        }
    }
    2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Lm,
    Nmt,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lm" => Ok(Mode::Lm),
            "nmt" => Ok(Mode::Nmt),
            _ => Err(format!("unknown mode {s:?}, expected lm or nmt")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Lm => "lm",
            Mode::Nmt => "nmt",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    Topic,
    Fixture,
}

impl FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "topic" => Ok(SynthKind::Topic),
            "fixture" => Ok(SynthKind::Fixture),
            _ => Err(format!("unknown corpus kind {s:?}, expected topic or fixture")),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthKind::Topic => "topic",
            SynthKind::Fixture => "fixture",
        })
    }
}

/// `dir/name.ext` → `dir/name.ext.suffix`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn warn_unused(r: &Resolver) {
    for k in r.unused() {
        warn!("config key {k} is not used by this command");
    }
}

/// Reads and tags a directory of documents, marking manifest replacements
/// as out of context.
fn load_docs(dir: &Path, manifest: Option<&CorruptionManifest>) -> Result<Vec<Document>> {
    let mut docs = read_corpus_dir(dir)?;
    if docs.is_empty() {
        return Err(Error::format("corpus", format!("no *.txt documents in {}", dir.display())).into());
    }
    docs.iter_mut().for_each(pos_tag);
    if let Some(m) = manifest {
        apply_labels(&mut docs, m)?;
    }
    Ok(docs)
}

fn read_vocab(path: &Path) -> Result<Vocabulary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(Vocabulary::from_text(&text)?)
}

fn vocab_or_build(r: &mut Resolver, flag: Option<PathBuf>, size: Option<usize>, docs: &[Document]) -> Result<Vocabulary> {
    let path = r.optional_path("vocab", flag)?;
    let size = r.get("vocab_size", size, 30000)?;
    match path {
        Some(p) => read_vocab(&p),
        None => Ok(Vocabulary::build(docs, size)?),
    }
}

struct Hyper {
    train: TrainConfig,
    embed_dim: usize,
    hidden_dim: usize,
}

fn hyper(r: &mut Resolver, f: TrainingFlags, seed: u64) -> Result<Hyper> {
    let epochs = r.get("epochs", f.epochs, 10)?;
    let batch_size = r.get("batch_size", f.batch_size, 32)?;
    let lr = r.get("lr", f.lr, 0.001)?;
    let clip = r.get("clip", f.clip, 5.0)?;
    let embed_dim = r.get("embed_dim", f.embed_dim, 256)?;
    let hidden_dim = r.get("hidden_dim", f.hidden_dim, 512)?;
    if batch_size == 0 || !(lr > 0.0) {
        return Err(config_error("batch_size and lr must be positive"));
    }
    Ok(Hyper {
        train: TrainConfig {
            epochs,
            batch_size,
            lr,
            clip: (clip > 0.0).then_some(clip),
            seed,
        },
        embed_dim,
        hidden_dim,
    })
}

pub fn corrupt(a: CorruptArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let corpus = r.path("corpus", a.corpus)?;
    let out = r.path("out", a.out)?;
    let seed = r.get("seed", a.common.seed, 0)?;
    let cfg = CorruptionConfig {
        rate: r.get("rate", a.rate, 10)?,
        window: r.get("k", a.k, 50)?,
        min_lemma_freq: r.get("min_lemma_freq", a.min_lemma_freq, 2)?,
    };
    let vocab_size = r.get("vocab_size", a.vocab_size, 30000)?;
    let filter = FilterConfig {
        max_sentence_len: r.get("max_sentence_len", a.max_sentence_len, 50)?,
        min_sentences: r.get("min_sentences", a.min_sentences, 11)?,
    };
    warn_unused(&r);

    let docs = load_docs(&corpus, None)?;
    let (clean, report) = filter_dataset(docs, &filter);
    if report.documents_dropped > 0 || report.sentences_dropped > 0 {
        warn!(
            "filter dropped {} sentences and {} documents",
            report.sentences_dropped, report.documents_dropped
        );
    }
    if clean.is_empty() {
        return Err(Error::format("corpus", "every document was filtered out").into());
    }
    let vocab = Vocabulary::build(&clean, vocab_size)?;
    let (corrupted, manifest) = corrupt_corpus(&clean, &vocab, &cfg, seed)?;
    let splits = split_corpus(corrupted, seed)?;

    create_dir(&out)?;
    write_corpus_dir(&out.join("clean"), &clean)?;
    write_corpus_dir(&out.join("train"), &splits.train)?;
    write_corpus_dir(&out.join("dev"), &splits.dev)?;
    write_corpus_dir(&out.join("test"), &splits.test)?;
    manifest.write(&out.join(MANIFEST))?;
    r.write("corrupt", &out.join(RESOLVED))?;
    println!(
        "{} documents, {} replacements; train/dev/test = {}/{}/{}",
        clean.len(),
        manifest.records.len(),
        splits.train.len(),
        splits.dev.len(),
        splits.test.len()
    );
    Ok(())
}

pub fn vocab(a: VocabArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let train = r.path("train", a.train)?;
    let size = r.get("size", a.size, 30000)?;
    let out = r.path("out", a.out)?;
    warn_unused(&r);
    let docs = load_docs(&train, None)?;
    let vocab = Vocabulary::build(&docs, size)?;
    write(&out, &vocab.to_text())?;
    r.write("vocab", &sibling(&out, ".resolved.config"))?;
    println!("{} entries, fingerprint {}", vocab.len(), vocab.fingerprint());
    Ok(())
}

pub fn pretrain(a: PretrainArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let mode: Mode = r.require("mode", a.mode)?;
    let train = r.path("train", a.train)?;
    let seed = r.get("seed", a.common.seed, 0)?;
    let h = hyper(&mut r, a.training, seed)?;
    let source = r.optional_path("source", a.source)?;
    let target = r.optional_path("target", a.target)?;
    let docs = load_docs(&train, None)?;
    let vocab = vocab_or_build(&mut r, a.vocab, a.vocab_size, &docs)?;
    let out = r.path("out", a.out)?;
    warn_unused(&r);

    let pc = PretrainConfig {
        embed_dim: h.embed_dim,
        hidden_dim: h.hidden_dim,
        train: h.train,
    };
    let pretrained = match mode {
        Mode::Lm => {
            if source.is_some() || target.is_some() {
                return Err(config_error("--source/--target only apply to --mode nmt"));
            }
            pretrain_sentenc_lm(&docs, &vocab, &pc)?
        }
        Mode::Nmt => {
            let (pairs, target_vocab) = match (source, target) {
                (Some(s), Some(t)) => {
                    let pairs = ingest_parallel(&s, &t)?;
                    let tv = Vocabulary::build_from_sentences(pairs.iter().map(|(_, t)| t), vocab.len())?;
                    (pairs, tv)
                }
                (None, None) => {
                    // Copy pairs: the translation target is the sentence itself.
                    let pairs = docs
                        .iter()
                        .flat_map(|d| d.sentences.iter().map(|s| (s.clone(), s.clone())))
                        .collect();
                    (pairs, vocab.clone())
                }
                _ => return Err(config_error("--source and --target must be given together")),
            };
            pretrain_sentenc_nmt(&pairs, &vocab, &target_vocab, &pc)?
        }
    };
    let ckpt = Checkpoint::from_encoder(
        &pretrained.encoder,
        &vocab,
        vec![
            ("embed_dim".into(), pc.embed_dim.to_string()),
            ("hidden_dim".into(), pc.hidden_dim.to_string()),
        ],
    );
    ckpt.save(&out)?;
    let mut log = String::from("epoch\ttrain_loss\n");
    for (e, l) in pretrained.epoch_losses.iter().enumerate() {
        log.push_str(&format!("{e}\t{l}\n"));
    }
    write(&sibling(&out, ".log.tsv"), &log)?;
    r.write("pretrain", &sibling(&out, ".resolved.config"))?;
    println!(
        "{} encoder, final loss {:.4}",
        pretrained.encoder.tag,
        pretrained.epoch_losses.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn read_manifest(path: &Path) -> Result<CorruptionManifest> {
    Ok(CorruptionManifest::read(path)?)
}

pub fn train(a: TrainArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let topology = r.require("topology", a.topology)?;
    let splits = r.path("splits", a.splits)?;
    let sentenc = r.optional_path("sentenc", a.sentenc)?;
    let seed = r.get("seed", a.common.seed, 0)?;
    let h = hyper(&mut r, a.training, seed)?;
    let context_window = r.get("context_window", a.context_window, 10)?;
    let max_sentence_len = r.get("max_sentence_len", a.max_sentence_len, 50)?;
    let finetune = r.get("finetune_encoder", a.finetune_encoder, false)?;

    match (topology.is_contextual(), &sentenc) {
        (true, None) => return Err(config_error(format!("topology {topology} needs --sentenc"))),
        (false, Some(_)) => return Err(config_error(format!("topology {topology} takes no --sentenc"))),
        _ => {}
    }
    let manifest_path = splits.join(MANIFEST);
    let manifest = if manifest_path.exists() {
        Some(read_manifest(&manifest_path)?)
    } else if !topology.is_lm() {
        return Err(config_error(format!(
            "{topology} needs gold labels: {} not found",
            manifest_path.display()
        )));
    } else {
        None
    };
    let train_docs = load_docs(&splits.join("train"), manifest.as_ref())?;
    let dev_docs = load_docs(&splits.join("dev"), manifest.as_ref())?;
    let vocab = vocab_or_build(&mut r, a.vocab, a.vocab_size, &train_docs)?;
    let out = r.path("out", a.out)?;
    warn_unused(&r);

    let encoder = match &sentenc {
        Some(p) => Some(Checkpoint::load(p, Some(&vocab.fingerprint()))?.to_encoder()?),
        None => None,
    };
    let mut mc = ModelConfig::new(topology, vocab.len());
    mc.embed_dim = h.embed_dim;
    mc.hidden_dim = h.hidden_dim;
    mc.context_window = context_window;
    mc.max_sentence_len = max_sentence_len;
    mc.seed = seed;
    mc.finetune_encoder = finetune;
    mc.sentence_repr = encoder.as_ref().map_or(SentenceRepr::None, |e| e.tag);
    let model = Model::new(mc, vocab, encoder.as_ref())?;
    let outcome = train_model(model, &train_docs, &dev_docs, &h.train)?;

    outcome.best.save(&out)?;
    outcome.last.save(&sibling(&out, ".last"))?;
    write(&sibling(&out, ".log.tsv"), &outcome.log_tsv())?;
    r.write("train", &sibling(&out, ".resolved.config"))?;
    outcome.check()?;
    if let Some(m) = outcome.metrics.get(outcome.best_epoch) {
        println!("best epoch {}: dev {:.6}", outcome.best_epoch, m.dev_metric);
    }
    Ok(())
}

fn parse_thresholds(s: &str) -> Result<Thresholds> {
    if s == "all" {
        return Ok(Thresholds::All);
    }
    s.split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map(Thresholds::List)
        .map_err(|e| config_error(format!("thresholds {s:?}: {e}")))
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let model_path = r.path("model", a.model)?;
    let dev = r.path("dev", a.dev)?;
    let test = r.path("test", a.test)?;
    let default_manifest = dev.parent().map(|p| p.join(MANIFEST));
    let manifest = r.optional_path("manifest", a.manifest.or(default_manifest))?;
    let vocab = r.optional_path("vocab", a.vocab)?;
    let thresholds = parse_thresholds(&r.get("thresholds", a.thresholds, "all".to_string())?)?;
    let out = r.path("out", a.out)?;
    warn_unused(&r);

    let manifest = match manifest {
        Some(p) if p.exists() => read_manifest(&p)?,
        _ => return Err(config_error("evaluation needs gold labels: pass --manifest")),
    };
    let expected = vocab.as_deref().map(read_vocab).transpose()?.map(|v| v.fingerprint());
    let model = Checkpoint::load(&model_path, expected.as_deref())?.to_model()?;
    let dev_docs = load_docs(&dev, Some(&manifest))?;
    let test_docs = load_docs(&test, Some(&manifest))?;
    let report = evaluate(&model, &dev_docs, &test_docs, &thresholds)?;

    create_dir(&out)?;
    write(&out.join("report.tsv"), &report.to_tsv())?;
    write(&out.join("sweep.tsv"), &report.dev_curve.to_tsv())?;
    write(&out.join("operating_point.tsv"), &report.operating_point_tsv())?;
    r.write("eval", &out.join(RESOLVED))?;
    println!("{}\n{}", ooc_core::evaluation::Report::header(), report.row());
    Ok(())
}

pub fn replay(a: ReplayArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let manifest = r.path("manifest", a.manifest)?;
    let clean = r.path("clean", a.clean)?;
    let out = r.path("out", a.out)?;
    warn_unused(&r);
    let manifest = read_manifest(&manifest)?;
    let docs = read_corpus_dir(&clean)?;
    let replayed = replay_manifest(&manifest, &docs)?;
    write_corpus_dir(&out, &replayed)?;
    r.write("replay", &out.join(RESOLVED))?;
    println!("{} documents, {} replacements", replayed.len(), manifest.records.len());
    Ok(())
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let mut r = Resolver::new(a.common.config.as_deref())?;
    let kind: SynthKind = r.get("kind", a.kind, SynthKind::Topic)?;
    let documents = r.get("documents", a.documents, 200)?;
    let sentences = r.get("sentences", a.sentences, 20)?;
    let seed = r.get("seed", a.common.seed, 0)?;
    let out = r.path("out", a.out)?;
    warn_unused(&r);
    let texts = match kind {
        SynthKind::Topic => topic_corpus_texts(&TopicCorpusConfig {
            documents,
            seed,
            ..Default::default()
        }),
        SynthKind::Fixture => fixture_texts(documents, sentences, seed),
    };
    create_dir(&out)?;
    for (id, text) in &texts {
        write(&out.join(format!("{id}.txt")), text)?;
    }
    r.write("synth", &out.join(RESOLVED))?;
    println!("{} documents", texts.len());
    Ok(())
}
