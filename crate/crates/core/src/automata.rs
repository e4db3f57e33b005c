//! State machines compiled from an episode family.
//!
//! Three machines are built on top of each other:
//!
//! * the episode machine: one state per episode, an edge labeled `a` from
//!   `G - n` to `G` for every sink `n` of `G` labeled `a`;
//! * the simple machine: a determinization of the reversed episode machine
//!   whose states are antichains of episode states, so that every state has
//!   at most one incoming edge per label;
//! * the co-machine: pairs of simple states `(V1, V2)` covered by `s` iff `s`
//!   covers `V1` and `s[2, L]` covers `V2`, plus one final state per episode
//!   that is covered iff both `s[1, L-1]` and `s[2, L]` cover the episode.
//!
//! A sequence covers a state if some subsequence of it drives the machine
//! from the initial state to that state. [`LabeledMachine::interpret`] is the
//! direct implementation of that definition and is used as a test oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::episodes::{Alphabet, EpisodeFamily, SymbolId};
use crate::error::{Error, Result};

/// Which symbols an edge accepts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EdgeGuard {
    Label(SymbolId),
    Set(BTreeSet<SymbolId>),
    /// Every symbol outside the set.
    Complement(BTreeSet<SymbolId>),
    Any,
}

impl EdgeGuard {
    pub fn matches(&self, a: SymbolId) -> bool {
        match self {
            EdgeGuard::Label(l) => *l == a,
            EdgeGuard::Set(s) => s.contains(&a),
            EdgeGuard::Complement(s) => !s.contains(&a),
            EdgeGuard::Any => true,
        }
    }

    /// Conservative disjointness test that needs no alphabet: two
    /// complements or anything against `Any` are treated as overlapping.
    pub fn disjoint(&self, other: &EdgeGuard) -> bool {
        use EdgeGuard::*;
        match (self, other) {
            (Any, _) | (_, Any) => false,
            (Label(a), Label(b)) => a != b,
            (Label(a), Set(s)) | (Set(s), Label(a)) => !s.contains(a),
            (Label(a), Complement(s)) | (Complement(s), Label(a)) => s.contains(a),
            (Set(x), Set(y)) => x.is_disjoint(y),
            (Set(x), Complement(y)) | (Complement(y), Set(x)) => x.is_subset(y),
            (Complement(_), Complement(_)) => false,
        }
    }

    pub fn describe(&self, alphabet: Option<&Alphabet>) -> String {
        let tok = |a: &SymbolId| match alphabet {
            Some(al) => al.token(*a).to_string(),
            None => a.to_string(),
        };
        let set = |s: &BTreeSet<SymbolId>| s.iter().map(tok).collect::<Vec<_>>().join(",");
        match self {
            EdgeGuard::Label(a) => tok(a),
            EdgeGuard::Set(s) => format!("{{{}}}", set(s)),
            EdgeGuard::Complement(s) => format!("-{{{}}}", set(s)),
            EdgeGuard::Any => "*".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineEdge {
    pub src: usize,
    pub dst: usize,
    pub guard: EdgeGuard,
}

/// A DAG state machine with guarded edges and a payload per state.
#[derive(Debug, Clone)]
pub struct LabeledMachine<P> {
    payloads: Vec<P>,
    initial: usize,
    edges: Vec<MachineEdge>,
    incoming: Vec<Vec<usize>>,
}

impl<P> LabeledMachine<P> {
    fn new(initial_payload: P) -> Self {
        Self {
            payloads: vec![initial_payload],
            initial: 0,
            edges: Vec::new(),
            incoming: vec![Vec::new()],
        }
    }

    fn add_state(&mut self, payload: P) -> usize {
        self.payloads.push(payload);
        self.incoming.push(Vec::new());
        self.payloads.len() - 1
    }

    fn add_edge(&mut self, src: usize, dst: usize, guard: EdgeGuard) {
        self.incoming[dst].push(self.edges.len());
        self.edges.push(MachineEdge { src, dst, guard });
    }

    pub fn state_count(&self) -> usize {
        self.payloads.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn payload(&self, state: usize) -> &P {
        &self.payloads[state]
    }

    pub fn payloads(&self) -> &[P] {
        &self.payloads
    }

    pub fn edges(&self) -> &[MachineEdge] {
        &self.edges
    }

    pub fn incoming(&self, state: usize) -> impl Iterator<Item = &MachineEdge> {
        self.incoming[state].iter().map(move |&e| &self.edges[e])
    }

    /// States in topological order, or `None` if the machine has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.payloads.len();
        let mut indeg: Vec<usize> = self.incoming.iter().map(Vec::len).collect();
        let mut out_edges = vec![Vec::new(); n];
        for e in &self.edges {
            out_edges[e.src].push(e.dst);
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &out_edges[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Fails unless the incoming guards of every state are pairwise disjoint.
    pub fn check_simple(&self) -> Result<()> {
        for (v, inc) in self.incoming.iter().enumerate() {
            for (i, &e) in inc.iter().enumerate() {
                for &f in &inc[i + 1..] {
                    if !self.edges[e].guard.disjoint(&self.edges[f].guard) {
                        return Err(Error::NotSimple(v));
                    }
                }
            }
        }
        Ok(())
    }

    /// Reference interpreter: the set of states covered by `seq`, i.e.
    /// reachable by feeding some subsequence of `seq` from the initial state.
    pub fn interpret(&self, seq: &[SymbolId]) -> Vec<bool> {
        let mut covered = vec![false; self.payloads.len()];
        covered[self.initial] = true;
        for &a in seq {
            let before = covered.clone();
            for e in &self.edges {
                if before[e.src] && e.guard.matches(a) {
                    covered[e.dst] = true;
                }
            }
        }
        covered
    }

    pub fn interpret_covers(&self, state: usize, seq: &[SymbolId]) -> bool {
        self.interpret(seq)[state]
    }

    /// Plain-text adjacency listing, one `state` line per state followed by
    /// its incoming edges.
    pub fn dump(&self, describe: impl Fn(&P) -> String, alphabet: Option<&Alphabet>) -> String {
        let mut out = String::new();
        for (v, p) in self.payloads.iter().enumerate() {
            let tag = if v == self.initial { " initial" } else { "" };
            let _ = writeln!(out, "state {v}{tag} {}", describe(p));
            for e in self.incoming(v) {
                let _ = writeln!(out, "  edge {} -> {} {}", e.src, e.dst, e.guard.describe(alphabet));
            }
        }
        out
    }
}

/// Fixed-size bit set over state ids.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(n: usize) -> Self {
        Self {
            words: vec![0; n.div_ceil(64)],
        }
    }
    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }
    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }
    fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }
}

/// The episode machine. State `i` is episode `i` of the family it was built
/// from; the initial state is the empty episode.
#[derive(Debug, Clone)]
pub struct EpisodeMachine {
    machine: LabeledMachine<usize>,
    parents: Vec<BTreeMap<SymbolId, Vec<usize>>>,
    ancestors: Vec<BitSet>,
}

impl EpisodeMachine {
    /// Builds the machine, failing if the family is not downward closed.
    pub fn build(family: &EpisodeFamily) -> Result<Self> {
        let n = family.len();
        let root = family.empty_index();
        let mut machine = LabeledMachine {
            payloads: (0..n).collect(),
            initial: root,
            edges: Vec::new(),
            incoming: vec![Vec::new(); n],
        };
        let mut parents: Vec<BTreeMap<SymbolId, Vec<usize>>> = vec![BTreeMap::new(); n];
        for (y, ep) in family.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for sink in ep.sinks() {
                let sub = ep.remove_sink(sink)?;
                let x = family.position(&sub).ok_or_else(|| {
                    Error::NotDownwardClosed(format!(
                        "{} lacks the sub-episode {}",
                        family.key(y),
                        sub.canonical_key().unwrap_or_default()
                    ))
                })?;
                let a = ep.label(sink);
                if seen.insert((x, a)) {
                    machine.add_edge(x, y, EdgeGuard::Label(a));
                    parents[y].entry(a).or_default().push(x);
                }
            }
        }

        // Every sink removal drops one node, so ordering by size is topological.
        let mut by_size: Vec<usize> = (0..n).collect();
        by_size.sort_by_key(|&v| family.get(v).node_count());
        let mut ancestors = vec![BitSet::new(n); n];
        for &v in &by_size {
            let mut acc = BitSet::new(n);
            for ps in parents[v].values() {
                for &w in ps {
                    acc.union_with(&ancestors[w]);
                    acc.insert(w);
                }
            }
            ancestors[v] = acc;
        }
        Ok(Self {
            machine,
            parents,
            ancestors,
        })
    }

    pub fn machine(&self) -> &LabeledMachine<usize> {
        &self.machine
    }

    pub fn state_count(&self) -> usize {
        self.machine.state_count()
    }

    pub fn initial(&self) -> usize {
        self.machine.initial
    }

    /// Parents of `v` through an edge labeled `a`.
    pub fn parents_by(&self, v: usize, a: SymbolId) -> &[usize] {
        self.parents[v].get(&a).map_or(&[], Vec::as_slice)
    }

    /// Labels of the incoming edges of `v`.
    pub fn incoming_labels(&self, v: usize) -> impl Iterator<Item = SymbolId> + '_ {
        self.parents[v].keys().copied()
    }

    /// True iff `u` is a strict ancestor of `v`.
    pub fn is_ancestor(&self, u: usize, v: usize) -> bool {
        self.ancestors[v].contains(u)
    }

    /// `min(sub(V; a) ∪ V)`: the `a`-parents of the members of `V` together
    /// with `V` itself, keeping only states that have no ancestor in the set.
    pub fn parent_set(&self, states: &SimpleState, a: SymbolId) -> SimpleState {
        let mut set: BTreeSet<usize> = states.0.iter().copied().collect();
        for &v in &states.0 {
            set.extend(self.parents_by(v, a).iter().copied());
        }
        let all: Vec<usize> = set.into_iter().collect();
        let kept = all
            .iter()
            .copied()
            .filter(|&v| !all.iter().any(|&u| u != v && self.is_ancestor(u, v)))
            .collect();
        SimpleState(kept)
    }

    /// `inc(V)`: labels of the edges entering any member of `V`.
    pub fn inc(&self, states: &SimpleState) -> BTreeSet<SymbolId> {
        states
            .0
            .iter()
            .flat_map(|&v| self.incoming_labels(v))
            .collect()
    }
}

/// A state of the simple machine: a sorted antichain of episode-machine states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleState(pub Vec<usize>);

impl SimpleState {
    pub fn singleton(v: usize) -> Self {
        SimpleState(vec![v])
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }
}

/// Determinized machine over antichains of episode states.
#[derive(Debug, Clone)]
pub struct SimpleMachine {
    machine: LabeledMachine<SimpleState>,
    index: HashMap<SimpleState, usize>,
    of_episode: Vec<usize>,
    parent_by_label: Vec<BTreeMap<SymbolId, usize>>,
}

impl SimpleMachine {
    /// Determinizes an episode machine. States are the closures of the
    /// singletons `{v}` under `parent_set`.
    pub fn build(em: &EpisodeMachine) -> Self {
        let root = SimpleState::singleton(em.initial());
        let mut sm = SimpleMachine {
            machine: LabeledMachine::new(root.clone()),
            index: HashMap::from([(root, 0)]),
            of_episode: vec![usize::MAX; em.state_count()],
            parent_by_label: vec![BTreeMap::new()],
        };
        let mut queue = VecDeque::new();
        for v in 0..em.state_count() {
            let (id, fresh) = sm.intern(SimpleState::singleton(v));
            sm.of_episode[v] = id;
            if fresh || v == em.initial() {
                queue.push_back(id);
            }
        }
        while let Some(id) = queue.pop_front() {
            let state = sm.machine.payloads[id].clone();
            for a in em.inc(&state) {
                let parent = em.parent_set(&state, a);
                let (pid, fresh) = sm.intern(parent);
                if fresh {
                    queue.push_back(pid);
                }
                sm.machine.add_edge(pid, id, EdgeGuard::Label(a));
                sm.parent_by_label[id].insert(a, pid);
            }
        }
        sm
    }

    fn intern(&mut self, state: SimpleState) -> (usize, bool) {
        if let Some(&id) = self.index.get(&state) {
            return (id, false);
        }
        let id = self.machine.add_state(state.clone());
        self.parent_by_label.push(BTreeMap::new());
        self.index.insert(state, id);
        (id, true)
    }

    pub fn machine(&self) -> &LabeledMachine<SimpleState> {
        &self.machine
    }

    pub fn state_count(&self) -> usize {
        self.machine.state_count()
    }

    pub fn initial(&self) -> usize {
        self.machine.initial
    }

    /// The simple state `{v}` for episode-machine state `v`.
    pub fn state_of_episode(&self, v: usize) -> usize {
        self.of_episode[v]
    }

    pub fn find(&self, state: &SimpleState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Source of the `a`-edge into `id`, or `id` itself when `a ∉ inc`.
    pub fn parent(&self, id: usize, a: SymbolId) -> usize {
        self.parent_by_label[id].get(&a).copied().unwrap_or(id)
    }

    pub fn inc(&self, id: usize) -> impl Iterator<Item = SymbolId> + '_ {
        self.parent_by_label[id].keys().copied()
    }
}

/// Payload of a co-machine state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CoState {
    /// The initial state, identified with `{i}` of the simple machine.
    Initial,
    /// `(V1, V2)` as simple-machine state ids.
    Pair(usize, usize),
    /// Final state of an episode-machine state.
    Final(usize),
}

#[derive(Debug, Clone)]
pub struct CoMachine {
    machine: LabeledMachine<CoState>,
    pairs: HashMap<(usize, usize), usize>,
    finals: Vec<Option<usize>>,
}

impl CoMachine {
    pub fn build(em: &EpisodeMachine, sm: &SimpleMachine) -> Self {
        let root = sm.initial();
        let mut cm = CoMachine {
            machine: LabeledMachine::new(CoState::Initial),
            pairs: HashMap::new(),
            finals: vec![None; em.state_count()],
        };
        let mut queue = VecDeque::new();
        let (root_pair, _) = cm.intern_pair(root, root);
        cm.machine.add_edge(0, root_pair, EdgeGuard::Any);

        let mut seeds = Vec::new();
        for v in 0..em.state_count() {
            if v == em.initial() {
                continue;
            }
            let sv = sm.state_of_episode(v);
            for a in sm.inc(sv) {
                seeds.push((sv, sm.parent(sv, a)));
            }
            seeds.push((sv, sv));
        }
        for (v1, v2) in seeds {
            let (id, fresh) = cm.intern_pair(v1, v2);
            if fresh {
                queue.push_back(id);
            }
        }

        while let Some(id) = queue.pop_front() {
            let CoState::Pair(v1, v2) = *cm.machine.payload(id) else {
                unreachable!()
            };
            let labels: BTreeSet<SymbolId> = sm.inc(v1).chain(sm.inc(v2)).collect();
            for a in labels {
                let (w1, w2) = (sm.parent(v1, a), sm.parent(v2, a));
                let src = if (w1, w2) == (root, root) {
                    if v2 == root {
                        0
                    } else {
                        root_pair
                    }
                } else {
                    let (pid, fresh) = cm.intern_pair(w1, w2);
                    if fresh {
                        queue.push_back(pid);
                    }
                    pid
                };
                cm.machine.add_edge(src, id, EdgeGuard::Label(a));
            }
        }

        for v in 0..em.state_count() {
            if v == em.initial() {
                continue;
            }
            let sv = sm.state_of_episode(v);
            let fid = cm.machine.add_state(CoState::Final(v));
            cm.finals[v] = Some(fid);
            let inc: BTreeSet<SymbolId> = sm.inc(sv).collect();
            for &a in &inc {
                let src = cm.pairs[&(sv, sm.parent(sv, a))];
                cm.machine.add_edge(src, fid, EdgeGuard::Label(a));
            }
            let src = cm.pairs[&(sv, sv)];
            cm.machine.add_edge(src, fid, EdgeGuard::Complement(inc));
        }
        cm
    }

    fn intern_pair(&mut self, v1: usize, v2: usize) -> (usize, bool) {
        if let Some(&id) = self.pairs.get(&(v1, v2)) {
            return (id, false);
        }
        let id = self.machine.add_state(CoState::Pair(v1, v2));
        self.pairs.insert((v1, v2), id);
        (id, true)
    }

    pub fn machine(&self) -> &LabeledMachine<CoState> {
        &self.machine
    }

    pub fn state_count(&self) -> usize {
        self.machine.state_count()
    }

    pub fn pair(&self, v1: usize, v2: usize) -> Option<usize> {
        self.pairs.get(&(v1, v2)).copied()
    }

    /// Final state for episode-machine state `v` (none for the initial state).
    pub fn final_of(&self, v: usize) -> Option<usize> {
        self.finals[v]
    }
}

/// All three machines for one family.
#[derive(Debug, Clone)]
pub struct MachineSet {
    pub episode: EpisodeMachine,
    pub simple: SimpleMachine,
    pub co: CoMachine,
}

impl MachineSet {
    pub fn build(family: &EpisodeFamily) -> Result<Self> {
        let episode = EpisodeMachine::build(family)?;
        let simple = SimpleMachine::build(&episode);
        let co = CoMachine::build(&episode, &simple);
        Ok(Self {
            episode,
            simple,
            co,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episodes::{covers, Episode};

    const A: SymbolId = 0;
    const B: SymbolId = 1;

    fn fig1() -> EpisodeFamily {
        let top = Episode::new(vec![A, B, A], vec![(1, 2)]).unwrap();
        EpisodeFamily::closure([top, Episode::parallel(&[A, A])]).unwrap()
    }

    fn simple_of(fam: &EpisodeFamily, sm: &SimpleMachine, eps: &[Episode]) -> usize {
        let mut ids: Vec<usize> = eps.iter().map(|e| fam.position(e).unwrap()).collect();
        ids.sort();
        sm.find(&SimpleState(ids)).expect("state present")
    }

    #[test]
    fn fig1_episode_machine() {
        let fam = fig1();
        let em = EpisodeMachine::build(&fam).unwrap();
        assert_eq!(em.state_count(), 7);
        let top = fam
            .position(&Episode::new(vec![A, B, A], vec![(1, 2)]).unwrap())
            .unwrap();
        let mut pa: Vec<usize> = em.parents_by(top, A).to_vec();
        pa.sort();
        let mut want = vec![
            fam.position(&Episode::serial(&[B, A])).unwrap(),
            fam.position(&Episode::parallel(&[A, B])).unwrap(),
        ];
        want.sort();
        assert_eq!(pa, want);
        assert!(em.machine().check_simple().is_err());
    }

    #[test]
    fn tiny_machines() {
        let fam = EpisodeFamily::closure([Episode::parallel(&[A])]).unwrap();
        let em = EpisodeMachine::build(&fam).unwrap();
        assert_eq!((em.state_count(), em.machine().edge_count()), (2, 1));

        let fam = EpisodeFamily::closure([Episode::serial(&[A, B])]).unwrap();
        let em = EpisodeMachine::build(&fam).unwrap();
        assert_eq!((em.state_count(), em.machine().edge_count()), (3, 2));
        let sm = SimpleMachine::build(&em);
        assert_eq!(sm.state_count(), 3);
    }

    #[test]
    fn not_closed_family_rejected() {
        let fam = fig1();
        // drop (b) from the family by rebuilding from a partial list
        let partial: Vec<Episode> = fam
            .iter()
            .filter(|e| **e != Episode::parallel(&[B]))
            .cloned()
            .collect();
        assert!(EpisodeFamily::from_closed(partial).is_err());
    }

    #[test]
    fn fig2_parent_sets_and_size() {
        let fam = fig1();
        let em = EpisodeMachine::build(&fam).unwrap();
        let sm = SimpleMachine::build(&em);
        assert_eq!(sm.state_count(), 9);
        sm.machine().check_simple().unwrap();

        let pos = |e: Episode| fam.position(&e).unwrap();
        let top = pos(Episode::new(vec![A, B, A], vec![(1, 2)]).unwrap());
        let v2 = pos(Episode::serial(&[B, A]));
        let v3 = pos(Episode::parallel(&[A, B]));
        let v4 = pos(Episode::parallel(&[A]));
        let mut want = vec![v2, v3];
        want.sort();
        assert_eq!(em.parent_set(&SimpleState::singleton(top), A).0, want);
        let mut want2 = vec![v2, v4];
        want2.sort();
        assert_eq!(em.parent_set(&SimpleState(want.clone()), B).0, want2);
        // label not in inc: unchanged
        let s = SimpleState::singleton(v4);
        assert_eq!(em.parent_set(&s, B), s);

        simple_of(&fam, &sm, &[Episode::serial(&[B, A]), Episode::parallel(&[A, B])]);
        simple_of(&fam, &sm, &[Episode::serial(&[B, A]), Episode::parallel(&[A])]);
    }

    #[test]
    fn episode_machine_matches_coverage() {
        let fam = fig1();
        let em = EpisodeMachine::build(&fam).unwrap();
        let sm = SimpleMachine::build(&em);
        for len in 0..=5u32 {
            for code in 0..3u32.pow(len) {
                let seq: Vec<SymbolId> = (0..len).map(|i| code / 3u32.pow(i) % 3).collect();
                let m = em.machine().interpret(&seq);
                let s = sm.machine().interpret(&seq);
                for (v, ep) in fam.iter().enumerate() {
                    assert_eq!(m[v], covers(&seq, ep));
                    assert_eq!(s[sm.state_of_episode(v)], m[v]);
                }
                for (id, st) in sm.machine().payloads().iter().enumerate() {
                    assert_eq!(s[id], st.0.iter().any(|&v| m[v]), "union semantics");
                }
            }
        }
    }

    #[test]
    fn co_machine_semantics_fig1() {
        let fam = fig1();
        let ms = MachineSet::build(&fam).unwrap();
        ms.co.machine().check_simple().unwrap();
        assert!(ms.co.machine().topological_order().is_some());
        let root = ms.simple.initial();
        let rp = ms.co.pair(root, root).unwrap();
        for len in 0..=6u32 {
            for code in 0..3u32.pow(len) {
                let seq: Vec<SymbolId> = (0..len).map(|i| code / 3u32.pow(i) % 3).collect();
                let co = ms.co.machine().interpret(&seq);
                let s_full = ms.simple.machine().interpret(&seq);
                let tail: &[SymbolId] = if seq.is_empty() { &[] } else { &seq[1..] };
                let s_tail = ms.simple.machine().interpret(tail);
                assert_eq!(co[rp], !seq.is_empty());
                for (id, st) in ms.co.machine().payloads().iter().enumerate() {
                    match *st {
                        // the pair semantics are stated for nonempty sequences
                        CoState::Pair(v1, v2) if !seq.is_empty() => {
                            assert_eq!(co[id], s_full[v1] && s_tail[v2], "pair {v1},{v2} on {seq:?}")
                        }
                        CoState::Pair(..) => assert!(!co[id]),
                        CoState::Final(v) => {
                            let ep = fam.get(v);
                            let want = !seq.is_empty()
                                && covers(&seq[..seq.len() - 1], ep)
                                && covers(&seq[1..], ep);
                            assert_eq!(co[id], want, "final {v} on {seq:?}");
                        }
                        CoState::Initial => assert!(co[id]),
                    }
                }
            }
        }
    }

    #[test]
    fn fig3_fragment_has_complement_edge() {
        let fam = fig1();
        let ms = MachineSet::build(&fam).unwrap();
        let ba = fam.position(&Episode::serial(&[B, A])).unwrap();
        let b = fam.position(&Episode::parallel(&[B])).unwrap();
        for v in [ba, b] {
            let f = ms.co.final_of(v).unwrap();
            let guards: Vec<&EdgeGuard> = ms.co.machine().incoming(f).map(|e| &e.guard).collect();
            assert_eq!(guards.len(), 2);
            assert!(guards.iter().any(|g| matches!(g, EdgeGuard::Complement(_))));
        }
        let fb = ms.co.final_of(ba).unwrap();
        assert!(ms
            .co
            .machine()
            .incoming(fb)
            .any(|e| e.guard == EdgeGuard::Complement(BTreeSet::from([A]))));
    }

    #[test]
    fn guards() {
        let any = EdgeGuard::Any;
        let not_a = EdgeGuard::Complement(BTreeSet::from([A]));
        assert!(any.matches(7) && not_a.matches(B) && !not_a.matches(A));
        assert!(EdgeGuard::Label(A).disjoint(&not_a));
        assert!(!EdgeGuard::Label(B).disjoint(&not_a));
        assert!(EdgeGuard::Set(BTreeSet::from([B])).disjoint(&EdgeGuard::Label(A)));
        assert!(!any.disjoint(&EdgeGuard::Label(A)));
    }

    #[test]
    fn dump_lists_states_and_edges() {
        let fam = EpisodeFamily::closure([Episode::serial(&[A, B])]).unwrap();
        let em = EpisodeMachine::build(&fam).unwrap();
        let al = Alphabet::from_tokens(["a", "b"]);
        let text = em
            .machine()
            .dump(|&v| fam.get(v).describe(&al), Some(&al));
        assert!(text.contains("state 0 initial ()"));
        assert!(text.contains("edge 2 -> 1 b"));
    }
}
