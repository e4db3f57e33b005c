//! Runs the train/test pipeline on the two synthetic generators and prints
//! what comes out significant.
//!
//! ```text
//! cargo run --release --example synthetic -- [seed] [length] [sim_length]
//! ```

use std::time::Instant;

use episig::datagen::{gen_correlated, gen_uniform};
use episig::episodes::{Alphabet, SymbolSequence};
use episig::miner::MinerConfig;
use episig::pipeline::{analyze, name_results, split_sequence, Adjustment, AnalysisConfig, Report};
use episig::sigtest::ZForm;

fn run(name: &str, seq: &SymbolSequence, cfg: &AnalysisConfig) -> Report {
    let alphabet = Alphabet::numbered(10);
    let (train, test) = split_sequence(seq, 0.5).unwrap();
    let t = Instant::now();
    let mut rep = analyze(&train, &test, 10, None, None, cfg).unwrap();
    name_results(&mut rep, &alphabet);
    println!(
        "{name}: {} candidates, {} tested, |S| = {}, |co| = {}, {:.1?}",
        rep.candidates.len(),
        rep.tested(),
        rep.sizes.simple,
        rep.sizes.co,
        t.elapsed()
    );
    println!("  one-sided significant: {}", rep.significant_one().len());
    println!("  two-sided significant: {}", rep.significant_two().len());
    for r in rep.results.iter().filter(|r| r.q_one.is_some_and(|q| q <= cfg.alpha)).take(10) {
        println!("    {:<14} n_w = {:>6}  avg = {:.3}  m = {:.3}  z = {:.2}", r.episode, r.n_windows, r.avg_len.unwrap(), r.m.unwrap(), r.z.unwrap());
    }
    rep
}

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let seed = args.first().copied().unwrap_or(1);
    let length = args.get(1).copied().unwrap_or(200_000) as usize;
    let sim_length = args.get(2).copied().unwrap_or(200_000) as usize;

    let cfg = AnalysisConfig {
        miner: MinerConfig::new(4000, 40),
        sim_length,
        seed,
        alpha: 0.05,
        adjust: Adjustment::Bh,
        z_form: ZForm::Ratio,
    };
    run("gen-ind", &gen_uniform(10, length, seed), &cfg);
    run("gen-co", &gen_correlated(length, seed), &cfg);
}
