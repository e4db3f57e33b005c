//! Exact probabilities of coverage and minimal windows under the
//! independence model.
//!
//! All model probabilities are brought to a common denominator `D`, so a
//! coverage probability for sequences of length `k` is stored as an integer
//! numerator over `D^k`. Every value is exact; conversion to `f64` happens
//! only in [`Moments::to_f64`].

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::automata::{EdgeGuard, LabeledMachine, MachineSet};
use crate::episodes::{SymbolId, SymbolSequence};
use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Probability of every symbol; ids index the vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolModel {
    probs: Vec<Rational>,
    denom: BigInt,
    scaled: Vec<BigInt>,
}

impl SymbolModel {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidModel("no symbols".into()));
        }
        let mut sum = Rational::zero();
        for (i, p) in probs.iter().enumerate() {
            if p.is_negative() || *p > Rational::one() {
                return Err(Error::InvalidModel(format!("probability of symbol {i} is {p}")));
            }
            sum += p;
        }
        if !sum.is_one() {
            return Err(Error::InvalidModel(format!("probabilities sum to {sum}, not 1")));
        }
        let denom = probs
            .iter()
            .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
        let scaled = probs
            .iter()
            .map(|p| p.numer() * (&denom / p.denom()))
            .collect();
        Ok(Self {
            probs,
            denom,
            scaled,
        })
    }

    /// `p(a) = count(a) / L` over `alphabet_size` symbols; symbols that never
    /// occur get probability zero.
    pub fn estimate(train: &SymbolSequence, alphabet_size: usize) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut counts = vec![0i64; alphabet_size];
        for &a in train.as_slice() {
            counts[a as usize] += 1;
        }
        let len = train.len() as i64;
        Self::new(counts.into_iter().map(|c| rational(c, len)).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(vec![rational(1, n as i64); n]).expect("uniform model is valid")
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, a: SymbolId) -> &Rational {
        &self.probs[a as usize]
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    /// Common denominator of all probabilities.
    pub fn denominator(&self) -> &BigInt {
        &self.denom
    }

    /// `p(a) * denominator()`.
    pub fn scaled(&self, a: SymbolId) -> &BigInt {
        &self.scaled[a as usize]
    }

    /// Probabilities as `f64`, for sampling and diagnostics.
    pub fn probs_f64(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.to_f64().unwrap_or(0.0)).collect()
    }

    fn guard_scaled(&self, guard: &EdgeGuard) -> BigInt {
        let in_alpha = |a: &&SymbolId| (**a as usize) < self.probs.len();
        match guard {
            EdgeGuard::Label(a) => self.scaled(*a).clone(),
            EdgeGuard::Set(s) => s.iter().filter(in_alpha).map(|&a| self.scaled(a)).sum(),
            EdgeGuard::Complement(s) => {
                let inside: BigInt = s.iter().filter(in_alpha).map(|&a| self.scaled(a)).sum();
                &self.denom - inside
            }
            EdgeGuard::Any => self.denom.clone(),
        }
    }
}

/// Total probability of the symbols a guard accepts.
pub fn guard_mass(model: &SymbolModel, guard: &EdgeGuard) -> Rational {
    Rational::new(model.guard_scaled(guard), model.denom.clone())
}

/// `P(cover(k; v))` for every state `v` and `k = 0..=K`, stored as numerators
/// over `D^k`.
#[derive(Debug, Clone)]
pub struct CoverTable {
    denom: BigInt,
    max_len: usize,
    nums: Vec<Vec<BigInt>>,
}

impl CoverTable {
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn state_count(&self) -> usize {
        self.nums.len()
    }

    /// Numerator of `P(cover(k; state))` over `D^k`.
    pub fn numerator(&self, state: usize, k: usize) -> &BigInt {
        &self.nums[state][k]
    }

    pub fn prob(&self, state: usize, k: usize) -> Rational {
        Rational::new(self.nums[state][k].clone(), self.denom.pow(k as u32))
    }
}

/// Coverage probabilities of a simple, monotonic machine:
///
/// `P(cover(k; v)) = P(cover(k-1; v)) + Σ_{e=(w,v)} mass(e) (P(cover(k-1; w)) - P(cover(k-1; v)))`
///
/// with the initial state covered with probability one at every length.
pub fn cover_table<P>(machine: &LabeledMachine<P>, model: &SymbolModel, max_len: usize) -> Result<CoverTable> {
    machine.check_simple()?;
    let n = machine.state_count();
    let denom = model.denom.clone();
    let masses: Vec<BigInt> = machine
        .edges()
        .iter()
        .map(|e| model.guard_scaled(&e.guard))
        .collect();
    let mut incoming: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, e) in machine.edges().iter().enumerate() {
        incoming[e.dst].push((e.src, i));
    }

    let mut nums = vec![Vec::with_capacity(max_len + 1); n];
    for (v, row) in nums.iter_mut().enumerate() {
        row.push(if v == machine.initial() {
            BigInt::one()
        } else {
            BigInt::zero()
        });
    }
    let mut dk = BigInt::one();
    for k in 1..=max_len {
        dk *= &denom;
        for v in 0..n {
            let val = if v == machine.initial() {
                dk.clone()
            } else {
                let prev = &nums[v][k - 1];
                let mut acc = prev * &denom;
                for &(w, e) in &incoming[v] {
                    acc += &masses[e] * (&nums[w][k - 1] - prev);
                }
                acc
            };
            nums[v].push(val);
        }
    }
    Ok(CoverTable {
        denom,
        max_len,
        nums,
    })
}

/// Numerators of `P(mw ∧ |s| = k)` for `k = 1..=K`; entry `k - 1` is over `D^k`.
fn joint_numerators(
    simple: &CoverTable,
    co: &CoverTable,
    simple_state: usize,
    final_state: Option<usize>,
    state_label: usize,
) -> Result<Vec<BigInt>> {
    let d = &simple.denom;
    let mut out = Vec::with_capacity(simple.max_len);
    for k in 1..=simple.max_len {
        let mut x = simple.numerator(simple_state, k) - BigInt::from(2) * d * simple.numerator(simple_state, k - 1);
        if let Some(f) = final_state {
            x += co.numerator(f, k);
        }
        if x.is_negative() {
            return Err(Error::NegativeJoint {
                state: state_label,
                k,
            });
        }
        out.push(x);
    }
    Ok(out)
}

/// Minimal-window probabilities of one episode-machine state from the cover
/// tables of the simple machine and the co-machine:
///
/// `P(mw, k) = P(cover(k; G)) - 2 P(cover(k-1; G)) + P(cover(k-1 and shifted; G))`.
///
/// Entry `k - 1` of the result is the probability for length `k`.
pub fn minwin_joint(
    machines: &MachineSet,
    simple: &CoverTable,
    co: &CoverTable,
    episode_state: usize,
) -> Result<Vec<Rational>> {
    let s = machines.simple.state_of_episode(episode_state);
    let f = machines.co.final_of(episode_state);
    let nums = joint_numerators(simple, co, s, f, episode_state)?;
    let d = &simple.denom;
    let mut dk = BigInt::one();
    Ok(nums
        .into_iter()
        .map(|x| {
            dk *= d;
            Rational::new(x, dk.clone())
        })
        .collect())
}

/// Tables computed by [`minwin_joint_direct`], indexed `[state][k]` for
/// `k = 0..=K`.
#[derive(Debug, Clone)]
pub struct DirectTables {
    /// `P(s covers v)` for `|s| = k`.
    pub cover: Vec<Vec<Rational>>,
    /// `P(s is a minimal window of v)` for `|s| = k`.
    pub mw: Vec<Vec<Rational>>,
    /// `P(some prefix of s is a minimal window of v)`: the running sum of `mw`.
    pub n: Vec<Vec<Rational>>,
}

/// Minimal-window probabilities computed without the simple machine, the
/// co-machine or the inclusion-exclusion identity.
///
/// A random sequence is grown one symbol at a time while tracking the exact
/// distribution of the pair (states covered by `s`, states covered by
/// `s[2, L]`). Both sets evolve deterministically with the appended symbol,
/// so the pair is a finite Markov chain, and `s` is a minimal window of `v`
/// iff `v` is covered by `s` but by neither `s[1, L-1]` nor `s[2, L]`.
/// Works for any machine, simple or not.
pub fn minwin_joint_direct<P>(machine: &LabeledMachine<P>, model: &SymbolModel, max_len: usize) -> DirectTables {
    let n = machine.state_count();
    let words = n.div_ceil(64);
    let d = model.denom.clone();
    let symbols: Vec<SymbolId> = (0..model.len() as SymbolId)
        .filter(|&a| !model.scaled(a).is_zero())
        .collect();

    let contains = |set: &[u64], v: usize| set[v / 64] >> (v % 64) & 1 == 1;
    let step = |set: &[u64], a: SymbolId| {
        let mut out = set.to_vec();
        for e in machine.edges() {
            if contains(set, e.src) && e.guard.matches(a) {
                out[e.dst / 64] |= 1 << (e.dst % 64);
            }
        }
        out
    };
    let mut root = vec![0u64; words];
    root[machine.initial() / 64] |= 1 << (machine.initial() % 64);

    let zero_row = || vec![BigInt::zero(); max_len + 1];
    let mut cover = vec![zero_row(); n];
    let mut mw = vec![zero_row(); n];
    cover[machine.initial()][0] = BigInt::one();

    let mut dist: HashMap<(Vec<u64>, Vec<u64>), BigInt> = HashMap::new();
    dist.insert((root.clone(), root.clone()), BigInt::one());
    for len in 0..max_len {
        let mut next: HashMap<(Vec<u64>, Vec<u64>), BigInt> = HashMap::new();
        for ((full, tail), w) in &dist {
            for &a in &symbols {
                let wa = w * model.scaled(a);
                let full2 = step(full, a);
                let tail2 = if len == 0 { root.clone() } else { step(tail, a) };
                for v in 0..n {
                    if contains(&full2, v) {
                        cover[v][len + 1] += &wa;
                        if !contains(full, v) && !contains(&tail2, v) {
                            mw[v][len + 1] += &wa;
                        }
                    }
                }
                *next.entry((full2, tail2)).or_default() += wa;
            }
        }
        dist = next;
    }

    let to_rat = |rows: Vec<Vec<BigInt>>| -> Vec<Vec<Rational>> {
        rows.into_iter()
            .map(|row| {
                let mut dk = BigInt::one();
                row.into_iter()
                    .enumerate()
                    .map(|(k, x)| {
                        if k > 0 {
                            dk *= &d;
                        }
                        Rational::new(x, dk.clone())
                    })
                    .collect()
            })
            .collect()
    };
    let cover = to_rat(cover);
    let mw = to_rat(mw);
    let n_tab = mw
        .iter()
        .map(|row| {
            let mut acc = Rational::zero();
            row.iter()
                .map(|x| {
                    acc += x;
                    acc.clone()
                })
                .collect()
        })
        .collect();
    DirectTables {
        cover,
        mw,
        n: n_tab,
    }
}

/// Minimal-window length distribution truncated at `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDistribution {
    /// `P(mw ∧ length k)`, entry `k - 1`.
    pub joint: Vec<Rational>,
    /// `Σ_k joint(k)`.
    pub mass: Rational,
    /// `joint(k) / mass`.
    pub normalized: Vec<Rational>,
}

impl WindowDistribution {
    pub fn max_len(&self) -> usize {
        self.joint.len()
    }

    /// Number of lengths with nonzero probability.
    pub fn support_size(&self) -> usize {
        self.joint.iter().filter(|x| !x.is_zero()).count()
    }

    pub fn normalized_f64(&self) -> Vec<f64> {
        self.normalized.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect()
    }
}

pub fn normalize(joint: Vec<Rational>) -> Result<WindowDistribution> {
    let mass: Rational = joint.iter().sum();
    if mass.is_zero() {
        return Err(Error::Unreachable);
    }
    let normalized = joint.iter().map(|x| x / &mass).collect();
    Ok(WindowDistribution {
        joint,
        mass,
        normalized,
    })
}

/// Exact moments of the per-position window indicators: `p = E[X]`,
/// `q = E[Y]`, `m = q / p` and `E[Y^2]`, where `X_i` marks a minimal window
/// starting at `i` and `Y_i` is its length (zero when there is none).
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub p: Rational,
    pub q: Rational,
    pub m: Rational,
    pub ey2: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentsF64 {
    pub p: f64,
    pub q: f64,
    pub m: f64,
    pub ey2: f64,
}

impl Moments {
    pub fn to_f64(&self) -> MomentsF64 {
        let f = |x: &Rational| x.to_f64().unwrap_or(f64::NAN);
        MomentsF64 {
            p: f(&self.p),
            q: f(&self.q),
            m: f(&self.m),
            ey2: f(&self.ey2),
        }
    }
}

pub fn moments(dist: &WindowDistribution) -> Moments {
    let mut q = Rational::zero();
    let mut ey2 = Rational::zero();
    for (i, x) in dist.joint.iter().enumerate() {
        let k = BigInt::from(i + 1);
        q += x * Rational::from(k.clone());
        ey2 += x * Rational::from(&k * &k);
    }
    let m = &q / &dist.mass;
    Moments {
        p: dist.mass.clone(),
        q,
        m,
        ey2,
    }
}

/// Machines and cover tables for one family and model: everything needed
/// to read off the window distribution of any member.
#[derive(Debug, Clone)]
pub struct ProbabilityEngine {
    pub machines: MachineSet,
    pub simple_table: CoverTable,
    pub co_table: CoverTable,
}

impl ProbabilityEngine {
    pub fn new(machines: MachineSet, model: &SymbolModel, max_len: usize) -> Result<Self> {
        let simple_table = cover_table(machines.simple.machine(), model, max_len)?;
        let co_table = cover_table(machines.co.machine(), model, max_len)?;
        Ok(Self {
            machines,
            simple_table,
            co_table,
        })
    }

    pub fn joint(&self, episode_state: usize) -> Result<Vec<Rational>> {
        minwin_joint(&self.machines, &self.simple_table, &self.co_table, episode_state)
    }

    pub fn distribution(&self, episode_state: usize) -> Result<WindowDistribution> {
        normalize(self.joint(episode_state)?)
    }
}
