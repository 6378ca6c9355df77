//! End-to-end acceptance checks, one pass/fail line per criterion.
//!
//! Runs without the libtest harness so every line is printed; exits non-zero
//! if any criterion fails. The trend criterion trains 20 models and takes
//! about ten minutes.

mod common;
#[path = "../../core/tests/common/mod.rs"]
mod fixtures;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use common::{ok, snapshot};
use fixtures::{tiny_docs, tiny_model};
use ooc_core::corpus::{
    corrupt_corpus, is_plural, lemma, pos_tag, replay, select_candidates, tokenize_document, Capitalization,
    CorruptionConfig, CorruptionManifest, Label, Pos, Vocabulary,
};
use ooc_core::evaluation::{score, score_zero_context, sweep, Thresholds, TokenScore};
use ooc_core::gradcheck::grad_check_params;
use ooc_core::models::{Instance, Model, ModelConfig, Topology};
use ooc_core::nn::{BahdanauAttention, Embedding, Linear, LstmCell, LstmState};
use ooc_core::synthetic::fixture_texts;
use ooc_core::training::{adam_step, AdamState, Checkpoint};
use ooc_core::trend::{run_trend, TrendConfig};
use ooc_core::{seed, Binding, Graph, ParamStore, Tensor};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let (h, tol) = (1e-5, 1e-4);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut record = |name: &str, r: ooc_core::gradcheck::GradCheckReport| {
        worst = worst.max(r.max_rel_error);
        if !r.passed() {
            failures.push(format!("{name} {:.2e}", r.max_rel_error));
        }
    };
    let mut rng = seed::stream(1, &["acceptance", "grad"]);

    let mut s = ParamStore::new();
    let lin = Linear::new(&mut s, "lin", 8, 5, &mut rng);
    let x = Tensor::from_fn(&[3, 8], |i| ((i * 7) % 11) as f64 / 11.0 - 0.4);
    let r = grad_check_params(&s, |g, b| {
        let xv = g.leaf(&x);
        let y = lin.forward(g, b, xv)?;
        let t = g.tanh(y);
        Ok(g.sum(t))
    }, h, tol).map_err(|e| e.to_string())?;
    record("linear", r);

    let mut s = ParamStore::new();
    let emb = Embedding::new(&mut s, "emb", 50, 8, &mut rng);
    let r = grad_check_params(&s, |g, b| {
        let y = emb.forward(g, b, &[1, 9, 1, 49])?;
        let t = g.tanh(y);
        let sq = g.mul(t, t)?;
        Ok(g.sum(sq))
    }, h, tol).map_err(|e| e.to_string())?;
    record("embedding", r);

    let mut s = ParamStore::new();
    let cell = LstmCell::new(&mut s, "lstm", 8, 16, &mut rng);
    let xs: Vec<Tensor> = (0..3)
        .map(|k| Tensor::from_fn(&[2, 8], |i| (((i + 3 * k) * 13) % 17) as f64 / 17.0 - 0.5))
        .collect();
    let r = grad_check_params(&s, |g, b| {
        let mut st = LstmState::zeros(g, 2, 16);
        for (k, x) in xs.iter().enumerate() {
            let xv = g.leaf(x);
            st = if k == 0 { cell.step_masked(g, b, xv, &st, &[0.0, 1.0])? } else { cell.step(g, b, xv, &st)? };
        }
        let hc = g.add(st.h, st.c)?;
        let sq = g.mul(hc, hc)?;
        Ok(g.sum(sq))
    }, h, tol).map_err(|e| e.to_string())?;
    record("lstm", r);

    let mut s = ParamStore::new();
    let attn = BahdanauAttention::new(&mut s, "attn", 16, 16, 16, &mut rng);
    let mem = Tensor::from_fn(&[4, 16], |i| ((i * 11) % 23) as f64 / 23.0 - 0.5);
    let q = Tensor::from_fn(&[16], |i| ((i * 5) % 7) as f64 / 7.0 - 0.5);
    let r = grad_check_params(&s, |g, b| {
        let m = g.leaf(&mem);
        let qv = g.leaf(&q);
        let (ctx, _) = attn.attend(g, b, m, qv)?;
        let sq = g.mul(ctx, ctx)?;
        Ok(g.sum(sq))
    }, h, tol).map_err(|e| e.to_string())?;
    record("attention", r);

    let docs = tiny_docs();
    let batch = [Instance { doc: 0, sentence: 1 }, Instance { doc: 1, sentence: 3 }, Instance { doc: 2, sentence: 2 }];
    for topology in Topology::ALL {
        let mut model = tiny_model(topology, 2);
        let mut prng = seed::stream(2, &["acceptance", "perturb"]);
        for (_, t) in model.params.tensors_mut() {
            for v in t.data_mut() {
                *v += prng.gen_range(-0.05..0.05);
            }
        }
        let prepared = model.prepare(&docs);
        let r = grad_check_params(&model.params, |g, b| Ok(model.batch_loss(g, b, &prepared, None, &batch)?.0), h, tol)
            .map_err(|e| e.to_string())?;
        record(topology.as_str(), r);
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!("max rel error {worst:.2e} in {:.1}s {}", elapsed.as_secs_f64(), failures.join(", ")),
    )
}

fn analytic_perplexity(dir: &Path) -> Outcome {
    ok(dir, &["synth", "--kind", "fixture", "--documents", "10", "--sentences", "12", "--seed", "2", "--out", "raw"]);
    ok(dir, &["corrupt", "--corpus", "raw", "--out", "c", "--rate", "2", "--seed", "2"]);
    ok(dir, &["vocab", "--train", "c/train", "--out", "vocab.txt"]);
    let vocab = Vocabulary::from_text(&fs::read_to_string(dir.join("vocab.txt")).unwrap()).unwrap();
    let mut config = ModelConfig::new(Topology::BaselineLm, vocab.len());
    config.embed_dim = 8;
    config.hidden_dim = 16;
    let mut model = Model::new(config, vocab.clone(), None).map_err(|e| e.to_string())?;
    model.zero_head();
    Checkpoint::from_model(&model, None, 0).save(&dir.join("uniform.ckpt")).map_err(|e| e.to_string())?;
    ok(dir, &["eval", "--model", "uniform.ckpt", "--dev", "c/dev", "--test", "c/test", "--vocab", "vocab.txt", "--out", "ev"]);
    let report = fs::read_to_string(dir.join("ev/report.tsv")).unwrap();
    let ppl: f64 = report.lines().nth(1).unwrap().split('\t').nth(1).unwrap().parse().unwrap();
    let v = vocab.len() as f64;
    check((ppl / v - 1.0).abs() < 1e-6, format!("perplexity {ppl} vs |V| = {v}"))
}

fn token_scores(values: &[f64], labels: &[bool]) -> Vec<TokenScore> {
    values
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (&s, &l))| TokenScore {
            doc_id: format!("d{:04}", i / 40),
            sentence_index: (i % 40) / 8,
            token_index: i % 8,
            score: s,
            label: if l { Label::OutOfContext } else { Label::Valid },
        })
        .collect()
}

fn sweep_oracle() -> Outcome {
    let mut rng = seed::stream(3, &["acceptance", "sweep"]);
    let mut cases = vec![token_scores(&[0.9, 0.1, 0.8], &[true, false, false])];
    for _ in 0..10 {
        let n = rng.gen_range(1..=2000);
        let values: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..40u8)) / 3.0).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.15)).collect();
        labels[n - 1] = true;
        cases.push(token_scores(&values, &labels));
    }
    for (k, s) in cases.iter().enumerate() {
        let curve = sweep(s, &Thresholds::All).map_err(|e| e.to_string())?;
        // Recount each threshold from a fresh sort.
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].score.partial_cmp(&s[a].score).unwrap().then(a.cmp(&b)));
        let pos = s.iter().filter(|x| x.label == Label::OutOfContext).count();
        let mut best = (0, -1.0);
        for t in 1..=s.len() {
            let tp = order[..t].iter().filter(|&&i| s[i].label == Label::OutOfContext).count();
            let (p, r) = (tp as f64 / t as f64, tp as f64 / pos as f64);
            let f = if tp == 0 { 0.0 } else { 2.0 * p * r / (p + r) };
            if f > best.1 {
                best = (t, f);
            }
            let got = curve.points[t - 1];
            if (got.threshold, got.precision, got.recall, got.f_score) != (t, p, r, f) {
                return Err(format!("case {k} t {t}: {got:?} vs ({p}, {r}, {f})"));
            }
        }
        if curve.operating_point().threshold != best.0 {
            return Err(format!("case {k}: chose {} vs {}", curve.operating_point().threshold, best.0));
        }
    }
    let worked = sweep(&cases[0], &Thresholds::All).unwrap().operating_point();
    check(
        worked.threshold == 1 && worked.f_score == 1.0,
        format!("{} datasets match the recount; worked example t=1 F=1", cases.len()),
    )
}

fn corruption_invariants() -> Outcome {
    let clean: Vec<_> = fixture_texts(50, 20, 11)
        .iter()
        .map(|(id, text)| {
            let mut d = tokenize_document(id, text).unwrap();
            pos_tag(&mut d);
            d
        })
        .collect();
    let vocab = Vocabulary::build(&clean, 30000).unwrap();
    let cfg = CorruptionConfig::default();
    let (corrupted, manifest) = corrupt_corpus(&clean, &vocab, &cfg, 9).map_err(|e| e.to_string())?;
    let mut eligible = 0;
    for doc in &clean {
        let n = manifest.records_for(&doc.id).count();
        if select_candidates(doc, &vocab, cfg.min_lemma_freq).len() >= cfg.rate {
            eligible += 1;
            if n != cfg.rate {
                return Err(format!("{}: {n} replacements", doc.id));
            }
        }
    }
    let doc_index = |id: &str| clean.iter().position(|d| d.id == id).unwrap();
    for r in &manifest.records {
        let t = &clean[doc_index(&r.doc_id)].sentences[r.sentence_index].tokens[r.token_index];
        let lower = r.replacement.to_lowercase();
        let good = t.pos == Pos::Noun
            && vocab.contains(&t.lower)
            && vocab.contains(&lower)
            && lemma(&lower) != lemma(&t.lower)
            && is_plural(&lower) == is_plural(&t.lower)
            && Capitalization::of(&r.replacement) == Capitalization::of(&t.surface);
        if !good {
            return Err(format!("bad record {r:?}"));
        }
    }
    let parsed = CorruptionManifest::from_text(&manifest.to_text()).map_err(|e| e.to_string())?;
    let replayed = replay(&parsed, &clean).map_err(|e| e.to_string())?;
    check(
        replayed == corrupted && eligible > 0,
        format!(
            "{eligible}/50 eligible documents with {} replacements each, {} records valid, replay exact",
            cfg.rate,
            manifest.records.len()
        ),
    )
}

fn zero_context() -> Outcome {
    let docs = tiny_docs();
    let mut worst = 0;
    for (b, c) in [(Topology::BaselineLm, Topology::ContextLm), (Topology::BaselineBinclass, Topology::ContextBinclass)] {
        let baseline = tiny_model(b, 4);
        let mut context = tiny_model(c, 5);
        context.copy_shared_from(&baseline);
        let x = score(&baseline, &docs).map_err(|e| e.to_string())?;
        let y = score_zero_context(&context, &docs).map_err(|e| e.to_string())?;
        let same = x.len() == y.len() && x.iter().zip(&y).all(|(p, q)| p.score.to_bits() == q.score.to_bits());
        if !same {
            return Err(format!("{c} differs from {b}"));
        }
        worst += x.len();
    }
    Ok(format!("{worst} token scores bit-identical"))
}

fn trend() -> Outcome {
    let start = Instant::now();
    let cfg = TrendConfig::default();
    let (mut lm, mut clf) = (0, 0);
    let mut lines = Vec::new();
    for seed in 0..5 {
        let r = run_trend(seed, &cfg).map_err(|e| e.to_string())?;
        lm += usize::from(r.lm_improves());
        clf += usize::from(r.binclass_improves());
        println!("    {}", r.summary());
        lines.push(r);
    }
    let elapsed = start.elapsed();
    check(
        lm >= 4 && clf >= 4 && elapsed < Duration::from_secs(30 * 60) && cfg.train.epochs <= 30,
        format!(
            "context-lm better in {lm}/5, context-binclass better in {clf}/5, {} epochs, {:.0}s",
            cfg.train.epochs,
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism(root: &Path) -> Outcome {
    let tiny = ["--embed-dim", "8", "--hidden-dim", "16", "--batch-size", "8", "--lr", "0.01", "--seed", "3"];
    let pipeline = |dir: &Path| {
        ok(dir, &["synth", "--kind", "fixture", "--documents", "10", "--sentences", "12", "--seed", "4", "--out", "raw"]);
        ok(dir, &["corrupt", "--corpus", "raw", "--out", "c", "--rate", "2", "--seed", "4"]);
        ok(dir, &["vocab", "--train", "c/train", "--out", "vocab.txt"]);
        let mut args = vec!["pretrain", "--mode", "lm", "--train", "c/train", "--vocab", "vocab.txt", "--epochs", "1", "--out", "enc.ckpt"];
        args.extend(tiny);
        ok(dir, &args);
        for (topology, out) in [("baseline-binclass", "b.ckpt"), ("context-lm", "m.ckpt")] {
            let mut args = vec!["train", "--topology", topology, "--splits", "c", "--vocab", "vocab.txt", "--epochs", "2", "--out", out];
            if topology == "context-lm" {
                args.extend(["--sentenc", "enc.ckpt"]);
            }
            args.extend(tiny);
            ok(dir, &args);
        }
        ok(dir, &["eval", "--model", "m.ckpt", "--dev", "c/dev", "--test", "c/test", "--out", "ev"]);
        ok(dir, &["eval", "--model", "b.ckpt", "--dev", "c/dev", "--test", "c/test", "--out", "evb"]);
    };
    let (a, b) = (root.join("a"), root.join("b"));
    for d in [&a, &b] {
        fs::create_dir_all(d).unwrap();
        pipeline(d);
    }
    let (sa, sb) = (snapshot(&a), snapshot(&b));
    let differing: Vec<_> = sa.keys().filter(|k| sa.get(*k) != sb.get(*k)).map(|k| k.display().to_string()).collect();
    check(
        sa.len() == sb.len() && differing.is_empty(),
        format!("{} artifacts compared; differing: [{}]", sa.len(), differing.join(", ")),
    )
}

fn adam_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut first = 0.0f64;
    for (x0, alpha) in [(1.5f64, 0.1f64), (-0.7, 0.001), (3.0, 0.5)] {
        let mut store = ParamStore::new();
        let id = store.add("x", Tensor::vector(vec![x0]));
        let mut state = AdamState::new(&store, alpha);
        let (mut x, mut m, mut v) = (x0, 0.0f64, 0.0f64);
        for t in 1..=5 {
            let mut g = Graph::new();
            let mut b = Binding::new(&store);
            let xv = b.var(&mut g, id);
            let sq = g.mul(xv, xv).unwrap();
            let loss = g.sum(sq);
            g.backward(loss).unwrap();
            let bound = b.finish();
            store.zero_grad();
            store.accumulate(&g, &bound);
            adam_step(&mut store, &mut state, &[true]).map_err(|e| e.to_string())?;

            let grad = 2.0 * x;
            m = 0.9 * m + 0.1 * grad;
            v = 0.999 * v + 0.001 * grad * grad;
            let step = alpha * (m / (1.0 - 0.9f64.powi(t))) / ((v / (1.0 - 0.999f64.powi(t))).sqrt() + 1e-8);
            if t == 1 {
                first = first.max(((store.get(id).data()[0] - x0).abs() - alpha).abs());
            }
            x -= step;
            worst = worst.max((store.get(id).data()[0] - x).abs());
        }
    }
    check(
        worst < 1e-12 && first < 1e-6,
        format!("max trajectory error {worst:.1e}, first-step |Δ|-α {first:.1e}"),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let sub = |name: &str| {
        let p = dir.path().join(name);
        fs::create_dir_all(&p).unwrap();
        p
    };
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("gradient suite", Box::new(gradient_suite)),
        ("analytic perplexity through eval", Box::new(|| analytic_perplexity(&sub("ppl")))),
        ("sweep oracle", Box::new(sweep_oracle)),
        ("corruption invariants", Box::new(corruption_invariants)),
        ("zero-context equivalence", Box::new(zero_context)),
        ("trend at desk scale", Box::new(trend)),
        ("determinism of corrupt, train and eval", Box::new(|| determinism(&sub("det")))),
        ("Adam oracle", Box::new(adam_oracle)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        match std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)) {
            Ok(Ok(detail)) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Ok(Err(detail)) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: panicked", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
