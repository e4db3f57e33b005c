//! Level-wise discovery of serial and parallel episodes whose number of
//! greedy non-overlapping minimal windows exceeds a threshold.
//!
//! The count is antimonotone under node deletion (a minimal window of an
//! episode contains a minimal window of every episode it implies), so a
//! candidate is only generated when all its one-node-smaller sub-episodes
//! survived the previous level.

use std::collections::{BTreeMap, BTreeSet};

use crate::episodes::{Episode, EpisodeFamily, SymbolId, SymbolSequence};
use crate::error::{Error, Result};
use crate::winscan::{greedy_count, Scanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EpisodeClass {
    Parallel,
    Serial,
}

impl std::str::FromStr for EpisodeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel" => Ok(EpisodeClass::Parallel),
            "serial" => Ok(EpisodeClass::Serial),
            other => Err(Error::Config(format!("unknown episode class '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinerConfig {
    /// Keep an episode iff its non-overlapping count is strictly greater.
    pub min_windows: usize,
    pub max_window: usize,
    pub classes: BTreeSet<EpisodeClass>,
    pub max_nodes: usize,
}

impl MinerConfig {
    pub fn new(min_windows: usize, max_window: usize) -> Self {
        Self {
            min_windows,
            max_window,
            classes: BTreeSet::from([EpisodeClass::Parallel, EpisodeClass::Serial]),
            max_nodes: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_windows < 1 || self.max_window < 1 || self.max_nodes < 1 {
            return Err(Error::Config(
                "min windows, max window and max nodes must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A mined candidate together with its non-overlapping window count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub episode: Episode,
    pub class: Option<EpisodeClass>,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct MiningResult {
    /// Frequent episodes, level by level, singletons first.
    pub candidates: Vec<Candidate>,
    /// Closure of the candidates under sink removal.
    pub family: EpisodeFamily,
}

/// Key identifying a class member: sorted labels for parallel, the chain for serial.
type Pattern = Vec<SymbolId>;

fn to_episode(class: EpisodeClass, p: &Pattern) -> Episode {
    match class {
        EpisodeClass::Parallel => Episode::parallel(p),
        EpisodeClass::Serial => Episode::serial(p),
    }
}

/// Apriori join of level-`k` patterns into level-`k + 1` candidates, pruned
/// so every one-node deletion is frequent.
pub fn generate_level(frequent: &BTreeSet<Pattern>, class: EpisodeClass) -> BTreeSet<Pattern> {
    let mut out = BTreeSet::new();
    match class {
        EpisodeClass::Parallel => {
            let mut by_prefix: BTreeMap<&[SymbolId], Vec<SymbolId>> = BTreeMap::new();
            for p in frequent {
                let (last, prefix) = p.split_last().expect("nonempty pattern");
                by_prefix.entry(prefix).or_default().push(*last);
            }
            for (prefix, lasts) in by_prefix {
                for (i, &x) in lasts.iter().enumerate() {
                    for &y in &lasts[i..] {
                        let mut c = prefix.to_vec();
                        c.push(x.min(y));
                        c.push(x.max(y));
                        out.insert(c);
                    }
                }
            }
        }
        EpisodeClass::Serial => {
            let mut by_prefix: BTreeMap<&[SymbolId], Vec<SymbolId>> = BTreeMap::new();
            for p in frequent {
                by_prefix.entry(&p[..p.len() - 1]).or_default().push(p[p.len() - 1]);
            }
            for x in frequent {
                if let Some(lasts) = by_prefix.get(&x[1..]) {
                    for &y in lasts {
                        let mut c = x.clone();
                        c.push(y);
                        out.insert(c);
                    }
                }
            }
        }
    }
    out.retain(|c| {
        (0..c.len()).all(|i| {
            let mut sub = c.clone();
            sub.remove(i);
            frequent.contains(&sub)
        })
    });
    out
}

/// Counts greedy non-overlapping minimal windows (length ≤ `max_window`)
/// for each episode, scanning all of them in one pass.
pub fn nonoverlap_counts(seq: &SymbolSequence, episodes: &[Episode], max_window: usize) -> Result<Vec<usize>> {
    let family = EpisodeFamily::closure(episodes.iter().cloned())?;
    let scanner = Scanner::new(&family)?;
    let res = scanner.scan(seq.as_slice(), max_window);
    episodes
        .iter()
        .map(|ep| {
            let idx = family.position(ep).expect("episode is in its own closure");
            greedy_count(res.of(idx))
        })
        .collect()
}

pub fn mine(seq: &SymbolSequence, cfg: &MinerConfig) -> Result<MiningResult> {
    cfg.validate()?;
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let symbols: BTreeSet<SymbolId> = seq.as_slice().iter().copied().collect();
    let singles: Vec<Episode> = symbols.iter().map(|&a| Episode::parallel(&[a])).collect();
    let counts = nonoverlap_counts(seq, &singles, cfg.max_window)?;

    let mut candidates = Vec::new();
    let mut frequent_single = BTreeSet::new();
    for (&a, (ep, count)) in symbols.iter().zip(singles.into_iter().zip(counts)) {
        if count > cfg.min_windows {
            frequent_single.insert(vec![a]);
            candidates.push(Candidate {
                episode: ep,
                class: None,
                count,
            });
        }
    }

    let mut levels: BTreeMap<EpisodeClass, BTreeSet<Pattern>> = cfg
        .classes
        .iter()
        .map(|&c| (c, frequent_single.clone()))
        .collect();
    for _size in 2..=cfg.max_nodes {
        let mut batch: Vec<(EpisodeClass, Pattern)> = Vec::new();
        for (&class, frequent) in &levels {
            batch.extend(generate_level(frequent, class).into_iter().map(|p| (class, p)));
        }
        if batch.is_empty() {
            break;
        }
        let episodes: Vec<Episode> = batch.iter().map(|(c, p)| to_episode(*c, p)).collect();
        let counts = nonoverlap_counts(seq, &episodes, cfg.max_window)?;
        for f in levels.values_mut() {
            f.clear();
        }
        for (((class, pattern), episode), count) in batch.into_iter().zip(episodes).zip(counts) {
            if count > cfg.min_windows {
                levels.get_mut(&class).expect("class present").insert(pattern);
                candidates.push(Candidate {
                    episode,
                    class: Some(class),
                    count,
                });
            }
        }
    }

    let family = EpisodeFamily::closure(candidates.iter().map(|c| c.episode.clone()))?;
    Ok(MiningResult { candidates, family })
}
