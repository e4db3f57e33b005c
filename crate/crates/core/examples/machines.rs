// Builds the episode machine, its simple machine and the co-coverage machine
// for the family generated by [a b a | b -> a] and (a, a), and prints them.
use episig::automata::{CoState, MachineSet};
use episig::episodes::{Alphabet, Episode, EpisodeFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let al = Alphabet::from_tokens(["a", "b"]);
    let top = Episode::new(vec![0, 1, 0], vec![(1, 2)])?;
    let family = EpisodeFamily::closure([top, Episode::parallel(&[0, 0])])?;
    let m = MachineSet::build(&family)?;
    let name = |v: usize| family.get(v).describe(&al);

    println!("episode machine, {} states", m.episode.state_count());
    print!("{}", m.episode.machine().dump(|&v| name(v), Some(&al)));

    println!("\nsimple machine, {} states", m.simple.state_count());
    print!(
        "{}",
        m.simple.machine().dump(
            |s| format!("{{{}}}", s.0.iter().map(|&v| name(v)).collect::<Vec<_>>().join(", ")),
            Some(&al)
        )
    );

    let finals = m.co.machine().payloads().iter().filter(|s| matches!(s, CoState::Final(_))).count();
    println!("\nco-coverage machine: {} states, {} final", m.co.state_count(), finals);
    Ok(())
}
