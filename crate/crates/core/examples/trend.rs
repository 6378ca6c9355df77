//! Desk-scale trend experiment on the two-topic corpus: contextual versus
//! sentence-level models.
//!
//! cargo run --release -p ooc-core --example trend -- [seed,seed,...] [batch_size]

use std::time::Instant;

use ooc_core::trend::{run_trend, TrendConfig};

fn main() -> ooc_core::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seeds: Vec<u64> = args
        .get(1)
        .map_or_else(|| (0..5).collect(), |s| s.split(',').map(|x| x.parse().unwrap()).collect());
    let mut cfg = TrendConfig::default();
    if let Some(b) = args.get(2) {
        cfg.train.batch_size = b.parse().unwrap();
    }
    let start = Instant::now();
    let (mut lm, mut clf) = (0, 0);
    for &seed in &seeds {
        let r = run_trend(seed, &cfg)?;
        lm += usize::from(r.lm_improves());
        clf += usize::from(r.binclass_improves());
        println!("{}  [{:.1}s]", r.summary(), start.elapsed().as_secs_f64());
    }
    println!(
        "context-lm better in {lm}/{n}, context-binclass better in {clf}/{n}",
        n = seeds.len()
    );
    Ok(())
}
