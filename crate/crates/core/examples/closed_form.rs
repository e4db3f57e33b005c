// Minimal-window length distribution of a -> b when p(a) = 1/2 and
// p(b) = p(c) = 1/4, compared against (1/8)(1/4)^(k-2).
use episig::automata::MachineSet;
use episig::episodes::{Episode, EpisodeFamily};
use episig::probmodel::{moments, rational, ProbabilityEngine, SymbolModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = SymbolModel::new(vec![rational(1, 2), rational(1, 4), rational(1, 4)])?;
    let ab = Episode::serial(&[0, 1]);
    let family = EpisodeFamily::closure([ab.clone()])?;
    let engine = ProbabilityEngine::new(MachineSet::build(&family)?, &model, 12)?;
    let dist = engine.distribution(family.position(&ab).unwrap())?;

    for (i, p) in dist.joint.iter().enumerate() {
        let k = i as i64 + 1;
        let closed = if k < 2 { rational(0, 1) } else { rational(1, 8 * 4i64.pow(k as u32 - 2)) };
        println!("k = {k:>2}  joint = {p:<14} closed form = {closed:<14} {}", if *p == closed { "ok" } else { "MISMATCH" });
    }
    println!("mass = {}", dist.mass);
    println!("mean length = {:.6} (untruncated 7/3)", moments(&dist).to_f64().m);
    Ok(())
}
