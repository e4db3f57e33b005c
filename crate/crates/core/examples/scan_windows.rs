// Minimal windows of a few episodes in one pass, then the greedy
// non-overlapping subset used for counting.
use episig::episodes::{Alphabet, Episode, EpisodeFamily, SymbolSequence};
use episig::winscan::{greedy_nonoverlap, scan, stats};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut al = Alphabet::from_tokens(["a", "b", "c"]);
    let seq = SymbolSequence::from_chars("accbabacbabbca", &mut al);
    let episodes = [Episode::serial(&[0, 1]), Episode::parallel(&[0, 1]), Episode::serial(&[0, 2, 1])];
    let family = EpisodeFamily::closure(episodes.iter().cloned())?;
    let res = scan(seq.as_slice(), &family, 10)?;

    for ep in &episodes {
        let ws = res.of(family.position(ep).unwrap());
        let spans: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
        let greedy = greedy_nonoverlap(ws)?;
        let st = stats(ws);
        println!("{:<12} windows {}", ep.describe(&al), spans.join(" "));
        println!("{:<12} mean length {:.3}, {} non-overlapping", "", st.mean.unwrap_or(f64::NAN), greedy.len());
    }
    Ok(())
}
