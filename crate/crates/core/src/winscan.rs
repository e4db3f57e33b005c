//! One-pass discovery of the minimal windows of every episode in a family.
//!
//! For each episode `X` the scanner keeps `ind(X)`, the start of the latest
//! minimal window of `X` seen so far (0 if none). At position `i` the empty
//! episode gets `ind = i`, then every edge `(X, Y)` of the episode machine
//! labeled `s_i` is relaxed: if `ind(X) > ind(Y)` the window `[ind(X), i]`
//! is a new minimal window of `Y`. Targets are visited from the largest
//! episode down so that every parent still holds its value from position
//! `i - 1` when it is read.

use std::collections::BTreeMap;

use crate::episodes::{EpisodeFamily, SymbolId, WindowSpan};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Relax {
    target: usize,
    parents: Vec<usize>,
}

/// Edge schedule of a family, reusable across sequences.
#[derive(Debug, Clone)]
pub struct Scanner {
    by_label: Vec<Vec<Relax>>,
    family_len: usize,
    empty: usize,
}

impl Scanner {
    pub fn new(family: &EpisodeFamily) -> Result<Self> {
        let mut grouped: BTreeMap<SymbolId, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
        for (y, ep) in family.iter().enumerate() {
            for sink in ep.sinks() {
                let sub = ep.remove_sink(sink)?;
                let x = family.position(&sub).ok_or_else(|| {
                    Error::NotDownwardClosed(format!("{} lacks a sub-episode", family.key(y)))
                })?;
                let parents = grouped.entry(ep.label(sink)).or_default().entry(y).or_default();
                if !parents.contains(&x) {
                    parents.push(x);
                }
            }
        }
        let max_label = grouped.keys().next_back().map_or(0, |&a| a as usize + 1);
        let mut by_label = vec![Vec::new(); max_label];
        for (a, targets) in grouped {
            let mut list: Vec<Relax> = targets
                .into_iter()
                .map(|(target, parents)| Relax { target, parents })
                .collect();
            list.sort_by_key(|r| (std::cmp::Reverse(family.get(r.target).node_count()), r.target));
            by_label[a as usize] = list;
        }
        Ok(Self {
            by_label,
            family_len: family.len(),
            empty: family.empty_index(),
        })
    }

    /// Streams every minimal window of length at most `max_len` to `report`
    /// as `(episode index, window)`, in order of window end.
    pub fn scan_with(&self, seq: &[SymbolId], max_len: usize, mut report: impl FnMut(usize, WindowSpan)) {
        let mut ind = vec![0usize; self.family_len];
        for (pos, &a) in seq.iter().enumerate() {
            let i = pos + 1;
            ind[self.empty] = i;
            let Some(list) = self.by_label.get(a as usize) else {
                continue;
            };
            for r in list {
                let best = r.parents.iter().map(|&x| ind[x]).max().unwrap_or(0);
                if best > ind[r.target] {
                    ind[r.target] = best;
                    // ind is updated even for windows past the cap
                    if i - best < max_len {
                        report(r.target, WindowSpan::new(best, i));
                    }
                }
            }
        }
    }

    pub fn scan(&self, seq: &[SymbolId], max_len: usize) -> ScanResult {
        let mut windows = vec![Vec::new(); self.family_len];
        self.scan_with(seq, max_len, |ep, w| windows[ep].push(w));
        ScanResult { windows }
    }
}

/// Minimal windows of every family member, ordered by position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanResult {
    pub windows: Vec<Vec<WindowSpan>>,
}

impl ScanResult {
    pub fn of(&self, episode: usize) -> &[WindowSpan] {
        &self.windows[episode]
    }
}

/// Minimal windows of length at most `max_len` for every member of `family`.
pub fn scan(seq: &[SymbolId], family: &EpisodeFamily, max_len: usize) -> Result<ScanResult> {
    Ok(Scanner::new(family)?.scan(seq, max_len))
}

fn check_ordered(windows: &[WindowSpan]) -> Result<()> {
    if windows
        .windows(2)
        .any(|w| w[0].start >= w[1].start || w[0].end >= w[1].end)
    {
        return Err(Error::UnorderedWindows);
    }
    Ok(())
}

/// Keeps the first window, drops everything overlapping it, and repeats.
/// Input must be strictly increasing in both start and end, which is the
/// case for the minimal windows of one episode.
pub fn greedy_nonoverlap(windows: &[WindowSpan]) -> Result<Vec<WindowSpan>> {
    check_ordered(windows)?;
    let mut out: Vec<WindowSpan> = Vec::new();
    for w in windows {
        if out.last().is_none_or(|last| w.start > last.end) {
            out.push(*w);
        }
    }
    Ok(out)
}

/// Size of [`greedy_nonoverlap`] without allocating.
pub fn greedy_count(windows: &[WindowSpan]) -> Result<usize> {
    check_ordered(windows)?;
    let mut count = 0;
    let mut last_end = 0;
    for w in windows {
        if w.start > last_end {
            count += 1;
            last_end = w.end;
        }
    }
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub count: usize,
    pub sum: usize,
    /// `None` when there are no windows.
    pub mean: Option<f64>,
}

pub fn stats(windows: &[WindowSpan]) -> WindowStats {
    let count = windows.len();
    let sum = windows.iter().map(WindowSpan::len).sum();
    WindowStats {
        count,
        sum,
        mean: (count > 0).then(|| sum as f64 / count as f64),
    }
}
