//! Episodes, symbol sequences and the reference (brute force) semantics of
//! coverage and minimal windows.
//!
//! Sequence positions exposed through [`WindowSpan`] are 1-based: the span
//! `[i, j]` covers `s[i..=j]` in the usual mathematical notation.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Dense identifier of a symbol in an [`Alphabet`].
pub type SymbolId = u32;

/// Largest episode (in nodes) that [`Episode::canonical_key`] accepts.
pub const CANONICAL_NODE_CAP: usize = 8;

/// Bidirectional mapping between text tokens and dense symbol ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alphabet {
    tokens: Vec<String>,
    index: HashMap<String, SymbolId>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Alphabet whose ids are `0..n` with tokens `"0"`, `"1"`, ...
    pub fn numbered(n: usize) -> Self {
        let mut a = Self::new();
        for i in 0..n {
            a.intern(&i.to_string());
        }
        a
    }

    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = &'a str>) -> Self {
        let mut a = Self::new();
        for t in tokens {
            a.intern(t);
        }
        a
    }

    /// Returns the id of `token`, adding it if it is new.
    pub fn intern(&mut self, token: &str) -> SymbolId {
        assert!(!token.is_empty(), "symbol tokens must be nonempty");
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len() as SymbolId;
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn id(&self, token: &str) -> Option<SymbolId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: SymbolId) -> &str {
        &self.tokens[id as usize]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// An ordered list of symbol ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SymbolSequence {
    items: Vec<SymbolId>,
}

impl SymbolSequence {
    pub fn new(items: Vec<SymbolId>) -> Self {
        Self { items }
    }

    /// Tokenizes on ASCII whitespace, interning every token into `alphabet`.
    pub fn parse(text: &str, alphabet: &mut Alphabet) -> Self {
        let items = text
            .split_ascii_whitespace()
            .map(|t| alphabet.intern(t))
            .collect();
        Self { items }
    }

    /// Builds a sequence from single-character symbols, e.g. `"accbabacb"`.
    pub fn from_chars(text: &str, alphabet: &mut Alphabet) -> Self {
        let mut buf = [0u8; 4];
        let items = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| alphabet.intern(c.encode_utf8(&mut buf)))
            .collect();
        Self { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Symbol at 1-based position `i`.
    pub fn at(&self, i: usize) -> SymbolId {
        assert!(i >= 1 && i <= self.items.len(), "position {i} out of range");
        self.items[i - 1]
    }

    /// The sub-window `s[i, j]` (1-based, inclusive).
    pub fn window(&self, i: usize, j: usize) -> &[SymbolId] {
        assert!(1 <= i && i <= j + 1 && j <= self.items.len());
        &self.items[i - 1..j]
    }

    pub fn as_slice(&self) -> &[SymbolId] {
        &self.items
    }

    pub fn split_at(&self, at: usize) -> (SymbolSequence, SymbolSequence) {
        let (a, b) = self.items.split_at(at);
        (Self::new(a.to_vec()), Self::new(b.to_vec()))
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = String::with_capacity(self.items.len() * 2);
        for (n, &id) in self.items.iter().enumerate() {
            if n > 0 {
                out.push(if n % 40 == 0 { '\n' } else { ' ' });
            }
            out.push_str(alphabet.token(id));
        }
        out.push('\n');
        out
    }
}

impl From<Vec<SymbolId>> for SymbolSequence {
    fn from(items: Vec<SymbolId>) -> Self {
        Self::new(items)
    }
}

/// Closed 1-based interval `[start, end]` of sequence positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WindowSpan {
    pub start: usize,
    pub end: usize,
}

// a window always holds at least one position
#[allow(clippy::len_without_is_empty)]
impl WindowSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(1 <= start && start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn overlaps(&self, other: &WindowSpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for WindowSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// A labeled acyclic directed graph. Nodes are `0..n`, node `i` carries
/// `labels[i]`, and an edge `(u, v)` requires `u` to occur before `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Episode {
    labels: Vec<SymbolId>,
    edges: Vec<(usize, usize)>,
}

impl Episode {
    pub fn new(labels: Vec<SymbolId>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = labels.len();
        let mut seen = BTreeSet::new();
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidEpisode(format!(
                    "edge ({u}, {v}) refers to a missing node"
                )));
            }
            if u == v {
                return Err(Error::InvalidEpisode(format!("self-loop on node {u}")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidEpisode(format!("duplicate edge ({u}, {v})")));
            }
        }
        let ep = Self {
            labels,
            edges: seen.into_iter().collect(),
        };
        if ep.topological_order().len() != n {
            return Err(Error::InvalidEpisode("graph has a cycle".into()));
        }
        Ok(ep)
    }

    pub fn empty() -> Self {
        Self {
            labels: Vec::new(),
            edges: Vec::new(),
        }
    }

    /// Parallel episode: no ordering constraints between the nodes.
    pub fn parallel(labels: &[SymbolId]) -> Self {
        Self {
            labels: labels.to_vec(),
            edges: Vec::new(),
        }
    }

    /// Serial episode `labels[0] -> labels[1] -> ...`.
    pub fn serial(labels: &[SymbolId]) -> Self {
        let edges = (1..labels.len()).map(|i| (i - 1, i)).collect();
        Self {
            labels: labels.to_vec(),
            edges,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[SymbolId] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> SymbolId {
        self.labels[node]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_parallel(&self) -> bool {
        self.edges.is_empty()
    }

    /// Labels in chain order if this episode is a serial chain.
    pub fn serial_labels(&self) -> Option<Vec<SymbolId>> {
        let n = self.labels.len();
        if n <= 1 {
            return Some(self.labels.clone());
        }
        if self.edges.len() != n - 1 {
            return None;
        }
        let mut next = vec![None; n];
        let mut indeg = vec![0usize; n];
        for &(u, v) in &self.edges {
            if next[u].is_some() {
                return None;
            }
            next[u] = Some(v);
            indeg[v] += 1;
        }
        let start = (0..n).find(|&v| indeg[v] == 0)?;
        let mut out = Vec::with_capacity(n);
        let mut cur = Some(start);
        while let Some(v) = cur {
            out.push(self.labels[v]);
            cur = next[v];
        }
        (out.len() == n).then_some(out)
    }

    pub fn is_serial(&self) -> bool {
        self.serial_labels().is_some()
    }

    /// Direct predecessors of every node.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.labels.len()];
        for &(u, v) in &self.edges {
            preds[v].push(u);
        }
        preds
    }

    /// Nodes in a topological order. Shorter than `node_count` iff cyclic.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.labels.len();
        let mut indeg = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            indeg[v] += 1;
            succ[u].push(v);
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &succ[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        order
    }

    /// Nodes with no outgoing edges.
    pub fn sinks(&self) -> Vec<usize> {
        let mut has_out = vec![false; self.labels.len()];
        for &(u, _) in &self.edges {
            has_out[u] = true;
        }
        (0..self.labels.len()).filter(|&v| !has_out[v]).collect()
    }

    /// Removes a sink node and its incident edges; later nodes shift down by one.
    pub fn remove_sink(&self, v: usize) -> Result<Episode> {
        if v >= self.labels.len() || self.edges.iter().any(|&(u, _)| u == v) {
            return Err(Error::NotASink(v));
        }
        Ok(self.remove_node(v))
    }

    /// Removes any node. Ordering implied through the node is not kept, which
    /// is exact for chains only when the caller reconnects neighbours; see
    /// [`Episode::delete_node_closed`].
    fn remove_node(&self, v: usize) -> Episode {
        let mut labels = self.labels.clone();
        labels.remove(v);
        let shift = |x: usize| if x > v { x - 1 } else { x };
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| a != v && b != v)
            .map(|&(a, b)| (shift(a), shift(b)))
            .collect();
        Episode { labels, edges }
    }

    /// Deletes node `v` while keeping every ordering that passed through it
    /// (predecessors of `v` get connected to its successors). The result is
    /// covered by every sequence that covers `self`.
    pub fn delete_node_closed(&self, v: usize) -> Episode {
        let mut edges: BTreeSet<(usize, usize)> = self.edges.iter().copied().collect();
        let preds: Vec<usize> = self.edges.iter().filter(|e| e.1 == v).map(|e| e.0).collect();
        let succs: Vec<usize> = self.edges.iter().filter(|e| e.0 == v).map(|e| e.1).collect();
        for &p in &preds {
            for &s in &succs {
                edges.insert((p, s));
            }
        }
        let tmp = Episode {
            labels: self.labels.clone(),
            edges: edges.into_iter().collect(),
        };
        tmp.remove_node(v)
    }

    /// Key that is equal for two episodes iff they are isomorphic as labeled
    /// DAGs. Computed by trying every permutation inside groups of equally
    /// labeled nodes and keeping the smallest edge list.
    pub fn canonical_key(&self) -> Result<String> {
        self.canonical_key_capped(CANONICAL_NODE_CAP)
    }

    pub fn canonical_key_capped(&self, cap: usize) -> Result<String> {
        let n = self.labels.len();
        if n > cap {
            return Err(Error::TooManyNodes { nodes: n, cap });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| self.labels[v]);
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && self.labels[order[j]] == self.labels[order[i]] {
                j += 1;
            }
            groups.push((i, j));
            i = j;
        }

        let mut best: Option<Vec<(usize, usize)>> = None;
        let mut perm = order.clone();
        let mut new_index = vec![0usize; n];
        permute_groups(&mut perm, &groups, 0, &mut |p| {
            for (pos, &node) in p.iter().enumerate() {
                new_index[node] = pos;
            }
            let mut e: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(u, v)| (new_index[u], new_index[v]))
                .collect();
            e.sort_unstable();
            if best.as_ref().is_none_or(|b| e < *b) {
                best = Some(e);
            }
        });

        let mut key = String::new();
        for (pos, &node) in order.iter().enumerate() {
            if pos > 0 {
                key.push('.');
            }
            key.push_str(&self.labels[node].to_string());
        }
        key.push('|');
        for (pos, (u, v)) in best.unwrap_or_default().into_iter().enumerate() {
            if pos > 0 {
                key.push(',');
            }
            key.push_str(&format!("{u}>{v}"));
        }
        Ok(key)
    }

    /// Human readable form: `(a, b)` for parallel, `a -> b` for serial,
    /// otherwise `[a b a | 1>2]`.
    pub fn describe(&self, alphabet: &Alphabet) -> String {
        let tok = |id: SymbolId| alphabet.token(id).to_string();
        if self.labels.is_empty() {
            return "()".to_string();
        }
        if self.edges.is_empty() {
            let parts: Vec<String> = self.labels.iter().map(|&l| tok(l)).collect();
            return format!("({})", parts.join(", "));
        }
        if let Some(chain) = self.serial_labels() {
            let parts: Vec<String> = chain.into_iter().map(tok).collect();
            return parts.join(" -> ");
        }
        let nodes: Vec<String> = self.labels.iter().map(|&l| tok(l)).collect();
        let edges: Vec<String> = self.edges.iter().map(|(u, v)| format!("{u}>{v}")).collect();
        format!("[{} | {}]", nodes.join(" "), edges.join(" "))
    }
}

fn permute_groups(
    perm: &mut Vec<usize>,
    groups: &[(usize, usize)],
    g: usize,
    visit: &mut dyn FnMut(&[usize]),
) {
    if g == groups.len() {
        visit(perm);
        return;
    }
    let (lo, hi) = groups[g];
    permute_range(perm, hi, lo, groups, g, visit);
}

fn permute_range(
    perm: &mut Vec<usize>,
    hi: usize,
    at: usize,
    groups: &[(usize, usize)],
    g: usize,
    visit: &mut dyn FnMut(&[usize]),
) {
    if at + 1 >= hi {
        permute_groups(perm, groups, g + 1, visit);
        return;
    }
    for i in at..hi {
        perm.swap(at, i);
        permute_range(perm, hi, at + 1, groups, g, visit);
        perm.swap(at, i);
    }
}

/// A set of episodes closed under sink removal, deduplicated by canonical key.
/// Always contains the empty episode.
#[derive(Debug, Clone)]
pub struct EpisodeFamily {
    episodes: Vec<Episode>,
    keys: Vec<String>,
    index: HashMap<String, usize>,
}

impl EpisodeFamily {
    /// Smallest downward closed family containing `seeds`.
    pub fn closure<I>(seeds: I) -> Result<Self>
    where
        I: IntoIterator<Item = Episode>,
    {
        let mut fam = Self {
            episodes: Vec::new(),
            keys: Vec::new(),
            index: HashMap::new(),
        };
        let mut queue: VecDeque<Episode> = VecDeque::new();
        queue.push_back(Episode::empty());
        queue.extend(seeds);
        while let Some(ep) = queue.pop_front() {
            if fam.insert(ep.clone())?.1 {
                for v in ep.sinks() {
                    queue.push_back(ep.remove_sink(v)?);
                }
            }
        }
        Ok(fam)
    }

    /// Builds a family from an explicit list, failing if it is not downward
    /// closed (the empty episode is added if missing).
    pub fn from_closed(episodes: Vec<Episode>) -> Result<Self> {
        let mut fam = Self {
            episodes: Vec::new(),
            keys: Vec::new(),
            index: HashMap::new(),
        };
        fam.insert(Episode::empty())?;
        for ep in episodes {
            fam.insert(ep)?;
        }
        for (i, ep) in fam.episodes.iter().enumerate() {
            for v in ep.sinks() {
                let key = ep.remove_sink(v)?.canonical_key()?;
                if !fam.index.contains_key(&key) {
                    return Err(Error::NotDownwardClosed(format!(
                        "member {i} ({}) is missing the sub-episode {key}",
                        fam.keys[i]
                    )));
                }
            }
        }
        Ok(fam)
    }

    fn insert(&mut self, ep: Episode) -> Result<(usize, bool)> {
        let key = ep.canonical_key()?;
        if let Some(&i) = self.index.get(&key) {
            return Ok((i, false));
        }
        let i = self.episodes.len();
        self.index.insert(key.clone(), i);
        self.keys.push(key);
        self.episodes.push(ep);
        Ok((i, true))
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    /// A family always holds the empty episode, so this is never true.
    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn get(&self, i: usize) -> &Episode {
        &self.episodes[i]
    }

    pub fn key(&self, i: usize) -> &str {
        &self.keys[i]
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn position_of_key(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn position(&self, ep: &Episode) -> Option<usize> {
        ep.canonical_key().ok().and_then(|k| self.position_of_key(&k))
    }

    pub fn empty_index(&self) -> usize {
        self.index["|"]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Episode> {
        self.episodes.iter()
    }

    /// Canonical keys, sorted; convenient for comparing families.
    pub fn sorted_keys(&self) -> Vec<String> {
        let mut k = self.keys.clone();
        k.sort();
        k
    }
}

/// True iff there is an injective, label-preserving map from the nodes of
/// `ep` into positions of `seq` that respects every edge.
pub fn covers(seq: &[SymbolId], ep: &Episode) -> bool {
    if ep.is_empty() {
        return true;
    }
    if seq.len() < ep.node_count() {
        return false;
    }
    let order = ep.topological_order();
    let preds = ep.predecessors();
    let mut pos = vec![usize::MAX; ep.node_count()];
    let mut used = vec![false; seq.len()];
    assign(seq, ep, &order, &preds, 0, &mut pos, &mut used)
}

fn assign(
    seq: &[SymbolId],
    ep: &Episode,
    order: &[usize],
    preds: &[Vec<usize>],
    depth: usize,
    pos: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    let lo = preds[v].iter().map(|&u| pos[u] + 1).max().unwrap_or(0);
    for p in lo..seq.len() {
        if !used[p] && seq[p] == ep.label(v) {
            used[p] = true;
            pos[v] = p;
            if assign(seq, ep, order, preds, depth + 1, pos, used) {
                return true;
            }
            used[p] = false;
        }
    }
    false
}

/// All minimal windows of `ep` in `seq` with length at most `max_len`,
/// found by checking every sub-window directly.
pub fn brute_minimal_windows(seq: &[SymbolId], ep: &Episode, max_len: usize) -> Vec<WindowSpan> {
    let mut out = Vec::new();
    if ep.is_empty() {
        return out;
    }
    let n = seq.len();
    for i in 0..n {
        for j in i..n.min(i + max_len) {
            if is_minimal_window(&seq[i..=j], ep) {
                out.push(WindowSpan::new(i + 1, j + 1));
                break;
            }
        }
    }
    out
}

/// True iff `w` covers `ep` but neither `w[1..]` nor `w[..len-1]` does.
pub fn is_minimal_window(w: &[SymbolId], ep: &Episode) -> bool {
    if w.is_empty() || !covers(w, ep) {
        return false;
    }
    !covers(&w[1..], ep) && !covers(&w[..w.len() - 1], ep)
}
