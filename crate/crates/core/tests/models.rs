mod common;

use std::time::Instant;

use rand::Rng;

use common::*;
use ooc_core::evaluation::{score, score_zero_context};
use ooc_core::gradcheck::{grad_check, grad_check_params};
use ooc_core::models::{binclass_forward, encode_context, lm_forward, Instance, Model, Topology};
use ooc_core::nn::{BahdanauAttention, Embedding, Linear, LstmCell, LstmState};
use ooc_core::training::{apply_gradients, AdamState};
use ooc_core::{seed, Binding, Graph, ParamStore, Tensor};

const H: f64 = 1e-5;
const TOL: f64 = 1e-4;

fn batch() -> Vec<Instance> {
    vec![
        Instance { doc: 0, sentence: 0 },
        Instance { doc: 1, sentence: 3 },
        Instance { doc: 2, sentence: 2 },
    ]
}

#[test]
fn gradient_suite_passes_for_every_layer_and_topology() {
    let start = Instant::now();
    let mut rng = seed::stream(3, &["grad"]);

    // Linear
    let mut s = ParamStore::new();
    let lin = Linear::new(&mut s, "lin", 8, 5, &mut rng);
    let x = Tensor::from_fn(&[3, 8], |i| ((i * 7) % 11) as f64 / 11.0 - 0.4);
    let r = grad_check_params(
        &s,
        |g, b| {
            let xv = g.leaf(&x);
            let y = lin.forward(g, b, xv)?;
            let t = g.tanh(y);
            Ok(g.sum(t))
        },
        H,
        TOL,
    )
    .unwrap();
    assert!(r.passed(), "linear {r:?}");

    // Embedding
    let mut s = ParamStore::new();
    let emb = Embedding::new(&mut s, "emb", 50, 8, &mut rng);
    let r = grad_check_params(
        &s,
        |g, b| {
            let y = emb.forward(g, b, &[3, 7, 3, 49])?;
            let t = g.tanh(y);
            let sq = g.mul(t, t)?;
            Ok(g.sum(sq))
        },
        H,
        TOL,
    )
    .unwrap();
    assert!(r.passed(), "embedding {r:?}");

    // LSTM, plain and masked, over several steps
    let mut s = ParamStore::new();
    let cell = LstmCell::new(&mut s, "lstm", 8, 16, &mut rng);
    let xs: Vec<Tensor> = (0..3)
        .map(|k| Tensor::from_fn(&[2, 8], |i| (((i + k * 5) * 13) % 17) as f64 / 17.0 - 0.5))
        .collect();
    let r = grad_check_params(
        &s,
        |g, b| {
            let mut st = LstmState::zeros(g, 2, 16);
            for (k, x) in xs.iter().enumerate() {
                let xv = g.leaf(x);
                st = if k == 0 {
                    cell.step_masked(g, b, xv, &st, &[0.0, 1.0])?
                } else {
                    cell.step(g, b, xv, &st)?
                };
            }
            let both = g.add(st.h, st.c)?;
            let sq = g.mul(both, both)?;
            Ok(g.sum(sq))
        },
        H,
        TOL,
    )
    .unwrap();
    assert!(r.passed(), "lstm {r:?}");

    // Attention, single query and batched with a masked slot
    let mut s = ParamStore::new();
    let attn = BahdanauAttention::new(&mut s, "attn", 16, 16, 16, &mut rng);
    let mem = Tensor::from_fn(&[4, 16], |i| ((i * 11) % 23) as f64 / 23.0 - 0.5);
    let query = Tensor::from_fn(&[16], |i| ((i * 5) % 7) as f64 / 7.0 - 0.5);
    let r = grad_check_params(
        &s,
        |g, b| {
            let m = g.leaf(&mem);
            let q = g.leaf(&query);
            let (ctx, _) = attn.attend(g, b, m, q)?;
            let sq = g.mul(ctx, ctx)?;
            Ok(g.sum(sq))
        },
        H,
        TOL,
    )
    .unwrap();
    assert!(r.passed(), "attention {r:?}");
    let r = grad_check(
        |g, q| {
            let slots: Vec<_> = (0..3)
                .map(|k| g.leaf(&Tensor::from_fn(&[2, 16], |i| ((i * (k + 3)) % 19) as f64 / 19.0 - 0.5)))
                .collect();
            let mut b = Binding::new(&s);
            let mem = attn.prepare(g, &mut b, slots, vec![true, false, true, true, true, true])?;
            let (ctx, _) = attn.attend_batched(g, &mut b, &mem, q)?;
            let sq = g.mul(ctx, ctx)?;
            Ok(g.sum(sq))
        },
        &Tensor::from_fn(&[2, 16], |i| ((i * 3) % 10) as f64 / 10.0 - 0.5),
        H,
        TOL,
    )
    .unwrap();
    assert!(r.passed(), "batched attention {r:?}");

    // Every topology, end to end, including the in-graph sentence encoder
    let docs = tiny_docs();
    for topology in Topology::ALL {
        let mut model = tiny_model(topology, 5);
        // Perturb the zero-initialized pieces so every gradient is exercised.
        perturb(&mut model);
        let prepared = model.prepare(&docs);
        let r = grad_check_params(
            &model.params,
            |g, b| Ok(model.batch_loss(g, b, &prepared, None, &batch())?.0),
            H,
            TOL,
        )
        .unwrap();
        assert!(r.passed(), "{topology}: {r:?}");
        assert_eq!(r.checked, model.params.numel());
    }
    assert!(start.elapsed().as_secs() < 60, "suite took {:?}", start.elapsed());
}

fn perturb(model: &mut Model) {
    let mut rng = seed::stream(9, &["perturb"]);
    for (_, t) in model.params.tensors_mut() {
        for v in t.data_mut() {
            *v += rng.gen_range(-0.05..0.05);
        }
    }
}

#[test]
fn zero_context_matches_baseline_bit_for_bit() {
    let docs = tiny_docs();
    let baseline = tiny_model(Topology::BaselineLm, 1);
    let mut context = tiny_model(Topology::ContextLm, 2);
    let copied = context.copy_shared_from(&baseline);
    assert_eq!(copied, baseline.params.len());
    let a = score(&baseline, &docs).unwrap();
    let b = score_zero_context(&context, &docs).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.score.to_bits(), y.score.to_bits());
    }
    // With real context the scores differ.
    let c = score(&context, &docs).unwrap();
    assert!(a.iter().zip(&c).any(|(x, y)| x.score != y.score));
}

#[test]
fn context_window_covers_preceding_sentences() {
    let docs = tiny_docs();
    let model = tiny_model(Topology::ContextLm, 4);
    let prepared = model.prepare(&docs);
    let p = model.config.context_window;
    for j in 0..prepared[1].sentences.len() {
        let c = encode_context(&model, &prepared[1], j).unwrap();
        assert_eq!(c.window, j.saturating_sub(p)..j);
        assert_eq!(c.states.len(), c.window.len());
        assert_eq!(c.c.numel(), model.config.hidden_dim);
        if j == 0 {
            assert!(c.c.data().iter().all(|&v| v == 0.0));
        } else {
            assert_eq!(c.states.last().unwrap().as_slice(), c.c.data());
        }
    }
    // Later sentences never influence the context of earlier ones.
    let mut edited = prepared[1].clone();
    edited.sentences[3] = vec![10, 11];
    assert_eq!(
        encode_context(&model, &prepared[1], 2).unwrap(),
        encode_context(&model, &edited, 2).unwrap()
    );
    assert!(encode_context(&model, &prepared[1], 9).is_err());
}

#[test]
fn language_model_distributions_sum_to_one() {
    let docs = tiny_docs();
    for topology in [Topology::BaselineLm, Topology::ContextLm, Topology::ContextAttnLm] {
        let model = tiny_model(topology, 6);
        let prepared = model.prepare(&docs);
        let ids = &prepared[2].sentences[3];
        let ctx = model.context_for(&prepared[2], 3).unwrap();
        let out = lm_forward(&model, ids, &ctx).unwrap();
        assert_eq!(out.distributions.len(), ids.len() + 1);
        for d in &out.distributions {
            assert_eq!(d.len(), 50);
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!((out.total_nll - out.token_nll.iter().sum::<f64>()).abs() < 1e-12);
        let scored = model.score_batch(&prepared, None, &[Instance { doc: 2, sentence: 3 }], false).unwrap();
        for (a, b) in scored[0].iter().zip(&out.token_nll) {
            assert!((a - b).abs() < 1e-12);
        }
        if topology == Topology::ContextAttnLm {
            for w in &out.attention {
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
    let clf = tiny_model(Topology::ContextBinclass, 6);
    let prepared = clf.prepare(&docs);
    let ctx = clf.context_for(&prepared[0], 2).unwrap();
    let p = binclass_forward(&clf, &prepared[0].sentences[2], &ctx).unwrap();
    assert_eq!(p.len(), prepared[0].sentences[2].len());
    assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
}

#[test]
fn every_topology_fits_a_fixed_batch() {
    let docs = tiny_docs();
    for topology in Topology::ALL {
        let mut model = tiny_model(topology, 7);
        let prepared = model.prepare(&docs);
        let cache = model.sentence_cache(&prepared).unwrap();
        let trainable = model.trainable();
        let mut adam = AdamState::new(&model.params, 0.01);
        let loss_of = |m: &Model| {
            let mut g = Graph::new();
            let mut b = Binding::new(&m.params);
            let (l, _) = m.batch_loss(&mut g, &mut b, &prepared, cache.as_ref(), &batch()).unwrap();
            g.value(l).item()
        };
        let first = loss_of(&model);
        for _ in 0..50 {
            let mut g = Graph::new();
            let mut b = Binding::new(&model.params);
            let (l, _) = model.batch_loss(&mut g, &mut b, &prepared, cache.as_ref(), &batch()).unwrap();
            g.backward(l).unwrap();
            let bound = b.finish();
            apply_gradients(&mut model.params, &trainable, &mut adam, None, &g, &bound).unwrap();
        }
        let last = loss_of(&model);
        assert!(last < 0.5 * first, "{topology}: {first} -> {last}");
    }
}

#[test]
fn frozen_encoder_is_untouched_by_training() {
    let docs = tiny_docs();
    let mut model = tiny_model(Topology::ContextLm, 8);
    let values = |m: &Model| -> Vec<Vec<f64>> {
        m.sentence_encoder().unwrap().params.iter().map(|(_, t)| t.data().to_vec()).collect()
    };
    let before = values(&model);
    let prepared = model.prepare(&docs);
    let trainable = model.trainable();
    let mut adam = AdamState::new(&model.params, 0.01);
    for _ in 0..3 {
        let mut g = Graph::new();
        let mut b = Binding::new(&model.params);
        let (l, _) = model.batch_loss(&mut g, &mut b, &prepared, None, &batch()).unwrap();
        g.backward(l).unwrap();
        let bound = b.finish();
        apply_gradients(&mut model.params, &trainable, &mut adam, None, &g, &bound).unwrap();
    }
    assert_eq!(values(&model), before);
}
