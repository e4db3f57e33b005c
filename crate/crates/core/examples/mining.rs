// Level-wise mining on a correlated digit sequence: digit i tends to be
// followed closely by i + 5.
use episig::datagen::gen_correlated;
use episig::episodes::Alphabet;
use episig::miner::{mine, MinerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq = gen_correlated(20_000, 7);
    let al = Alphabet::numbered(10);
    let mut cfg = MinerConfig::new(600, 15);
    cfg.max_nodes = 3;
    let res = mine(&seq, &cfg)?;
    println!("{} frequent episodes, closure has {} members", res.candidates.len(), res.family.len());
    for c in res.candidates.iter().filter(|c| c.episode.node_count() > 1) {
        println!("{:>6}  {}", c.count, c.episode.describe(&al));
    }
    Ok(())
}
