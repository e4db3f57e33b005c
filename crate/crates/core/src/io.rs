//! Text formats: episodes, models, distributions, windows and results.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::episodes::{Alphabet, Episode, SymbolId, WindowSpan};
use crate::error::{Error, Result};
use crate::probmodel::{Rational, SymbolModel, WindowDistribution};
use crate::sigtest::EpisodeTestResult;

/// An episode read from or written to the episode text format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeRecord {
    pub id: String,
    pub episode: Episode,
    pub count: Option<usize>,
}

/// Parses `episode <id>` / `node <k> <label>` / `edge <i> <j>` / `end`
/// blocks. Node indices are arbitrary distinct integers; `#` starts a
/// comment, and a `# count <n>` line inside a block is kept as the count.
pub fn parse_episodes(text: &str, alphabet: &mut Alphabet) -> Result<Vec<EpisodeRecord>> {
    struct Open {
        id: String,
        nodes: HashMap<i64, usize>,
        labels: Vec<SymbolId>,
        edges: Vec<(usize, usize)>,
        count: Option<usize>,
        line: usize,
    }
    let mut out = Vec::new();
    let mut cur: Option<Open> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if let (Some("count"), Some(v), Some(open)) = (words.next(), words.next(), cur.as_mut()) {
                open.count = Some(v.parse().map_err(|_| Error::parse(line, "bad count"))?);
            }
            continue;
        }
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        match words.as_slice() {
            [] => {}
            ["episode", id] => {
                if cur.is_some() {
                    return Err(Error::parse(line, "episode block not closed"));
                }
                cur = Some(Open {
                    id: id.to_string(),
                    nodes: HashMap::new(),
                    labels: Vec::new(),
                    edges: Vec::new(),
                    count: None,
                    line,
                });
            }
            ["node", k, label] => {
                let open = cur.as_mut().ok_or_else(|| Error::parse(line, "node outside episode"))?;
                let k: i64 = k.parse().map_err(|_| Error::parse(line, "bad node index"))?;
                if open.nodes.insert(k, open.labels.len()).is_some() {
                    return Err(Error::parse(line, format!("duplicate node {k}")));
                }
                open.labels.push(alphabet.intern(label));
            }
            ["edge", i, j] => {
                let open = cur.as_mut().ok_or_else(|| Error::parse(line, "edge outside episode"))?;
                let node = |s: &str| -> Result<usize> {
                    let k: i64 = s.parse().map_err(|_| Error::parse(line, "bad node index"))?;
                    open.nodes
                        .get(&k)
                        .copied()
                        .ok_or_else(|| Error::parse(line, format!("unknown node {k}")))
                };
                let e = (node(i)?, node(j)?);
                open.edges.push(e);
            }
            ["end"] => {
                let open = cur.take().ok_or_else(|| Error::parse(line, "end outside episode"))?;
                let episode = Episode::new(open.labels, open.edges)
                    .map_err(|e| Error::parse(open.line, e.to_string()))?;
                out.push(EpisodeRecord {
                    id: open.id,
                    episode,
                    count: open.count,
                });
            }
            _ => return Err(Error::parse(line, format!("unrecognized line '{trimmed}'"))),
        }
    }
    if let Some(open) = cur {
        return Err(Error::parse(open.line, "episode block not closed"));
    }
    Ok(out)
}

/// Writes episodes with 1-based node indices.
pub fn write_episodes(records: &[EpisodeRecord], alphabet: &Alphabet) -> String {
    let mut s = String::new();
    for r in records {
        writeln!(s, "episode {}", r.id).unwrap();
        if let Some(c) = r.count {
            writeln!(s, "# count {c}").unwrap();
        }
        for (k, &a) in r.episode.labels().iter().enumerate() {
            writeln!(s, "node {} {}", k + 1, alphabet.token(a)).unwrap();
        }
        for &(i, j) in r.episode.edges() {
            writeln!(s, "edge {} {}", i + 1, j + 1).unwrap();
        }
        s.push_str("end\n");
    }
    s
}

/// Reads `symbol<TAB>numerator<TAB>denominator` lines.
pub fn parse_model_entries(text: &str) -> Result<Vec<(String, Rational)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        let [sym, num, den] = cols.as_slice() else {
            return Err(Error::parse(line, "expected symbol, numerator, denominator"));
        };
        let num: BigInt = num.parse().map_err(|_| Error::parse(line, "bad numerator"))?;
        let den: BigInt = den.parse().map_err(|_| Error::parse(line, "bad denominator"))?;
        if den.is_zero() || den.is_negative() || num.is_negative() {
            return Err(Error::parse(line, "probability must be a nonnegative fraction"));
        }
        out.push((sym.to_string(), Rational::new(num, den)));
    }
    Ok(out)
}

/// Builds a model over the whole `alphabet`, interning model symbols first.
/// Symbols absent from the entries get probability zero; the sum must be
/// exactly one.
pub fn model_from_entries(entries: &[(String, Rational)], alphabet: &mut Alphabet) -> Result<SymbolModel> {
    for (sym, _) in entries {
        alphabet.intern(sym);
    }
    let mut probs = vec![Rational::zero(); alphabet.len()];
    for (sym, p) in entries {
        let a = alphabet.id(sym).expect("interned") as usize;
        if !probs[a].is_zero() {
            return Err(Error::InvalidModel(format!("symbol '{sym}' listed twice")));
        }
        probs[a] = p.clone();
    }
    SymbolModel::new(probs)
}

pub fn write_model(model: &SymbolModel, alphabet: &Alphabet) -> String {
    let mut s = String::new();
    for (a, p) in model.probs().iter().enumerate() {
        writeln!(s, "{}\t{}\t{}", alphabet.token(a as SymbolId), p.numer(), p.denom()).unwrap();
    }
    s
}

/// Widens a model to a grown alphabet; new symbols get probability zero.
pub fn extend_model(model: &SymbolModel, alphabet_len: usize) -> Result<SymbolModel> {
    let mut probs = model.probs().to_vec();
    probs.resize(alphabet_len.max(probs.len()), Rational::zero());
    SymbolModel::new(probs)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub const DISTRIBUTION_HEADER: &str = "episode_id\tk\trational\tdecimal";

/// One line per `(episode, k)` with the normalized probability.
pub fn write_distributions(rows: &[(usize, &WindowDistribution)]) -> String {
    let mut s = String::from(DISTRIBUTION_HEADER);
    s.push('\n');
    for (id, dist) in rows {
        for (i, p) in dist.normalized.iter().enumerate() {
            writeln!(s, "{id}\t{}\t{p}\t{}", i + 1, fmt_g(rational_to_f64(p))).unwrap();
        }
    }
    s
}

pub fn write_windows(rows: &[(usize, &[WindowSpan])]) -> String {
    let mut s = String::from("episode_id\tstart\tend\n");
    for (id, ws) in rows {
        for w in ws.iter() {
            writeln!(s, "{id}\t{}\t{}", w.start, w.end).unwrap();
        }
    }
    s
}

pub const RESULTS_HEADER: &str =
    "id\tepisode\tn_windows\tsum_len\tavg_len\tm\tsigma\tz\tp_one\tp_two\tq_one\tq_two\tstatus";

pub fn write_results(results: &[EpisodeTestResult]) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), fmt_g);
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in results {
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.id + 1,
            r.episode,
            r.n_windows,
            r.sum_len,
            opt(r.avg_len),
            opt(r.m),
            opt(r.sigma),
            opt(r.z),
            opt(r.p_one),
            opt(r.p_two),
            opt(r.q_one),
            opt(r.q_two),
            r.status
        )
        .unwrap();
    }
    s
}

/// Formats like C's `%.6g`: six significant digits, trailing zeros removed,
/// exponent notation below `1e-4` and from `1e6`.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
