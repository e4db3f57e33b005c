//! Z-test on the average minimal-window length.
//!
//! Let `X_i = 1` when a minimal window (length ≤ K) starts at position `i`
//! and `Y_i` be its length (0 otherwise). The observed average length is
//! `ΣY / ΣX`. Pairs `(X_i, Y_i)` more than `K - 1` positions apart are
//! independent, so the ratio is asymptotically normal with mean
//! `m = q / p` and, by the delta method with gradient `(1/p, -m/p)`,
//! variance `σ² = (C_YY - 2m C_XY + m² C_XX) / p²`.
//!
//! The lag-0 parts of `C` are exact (from the window distribution); the
//! lag `1..K-1` parts are estimated from one long simulated sequence.

use std::collections::VecDeque;

use statrs::function::erf::erfc;

use crate::datagen::sample_model;
use crate::episodes::EpisodeFamily;
use crate::error::{Error, Result};
use crate::probmodel::{moments, MomentsF64, ProbabilityEngine, SymbolModel, WindowDistribution};
use crate::winscan::{Scanner, WindowStats};

/// Covariance components of the limit of `√L (mean X, mean Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagCovariances {
    pub c_yy: f64,
    pub c_xx: f64,
    pub c_xy: f64,
    /// Exact lag-0 terms `E[Y²] - q²`, `p - p²`, `q - pq`.
    pub lag0_yy: f64,
    pub lag0_xx: f64,
    pub lag0_xy: f64,
}

impl LagCovariances {
    /// Only the exact lag-0 terms; the lag sums are zero.
    pub fn lag0(mom: &MomentsF64) -> Self {
        let yy = mom.ey2 - mom.q * mom.q;
        let xx = mom.p - mom.p * mom.p;
        let xy = mom.q - mom.p * mom.q;
        Self {
            c_yy: yy,
            c_xx: xx,
            c_xy: xy,
            lag0_yy: yy,
            lag0_xx: xx,
            lag0_xy: xy,
        }
    }
}

/// Per-lag product sums for one episode, `j = 1..K-1`.
#[derive(Debug, Clone)]
struct LagSums {
    xx: Vec<f64>,
    yy: Vec<f64>,
    xy: Vec<f64>,
    yx: Vec<f64>,
    recent: VecDeque<(usize, usize)>,
}

impl LagSums {
    fn new(max_len: usize) -> Self {
        Self {
            xx: vec![0.0; max_len],
            yy: vec![0.0; max_len],
            xy: vec![0.0; max_len],
            yx: vec![0.0; max_len],
            recent: VecDeque::new(),
        }
    }

    /// Adds a window starting at `start` with length `len`. Windows arrive in
    /// increasing start order.
    fn push(&mut self, start: usize, len: usize, max_len: usize) {
        while self.recent.front().is_some_and(|&(s, _)| start - s >= max_len) {
            self.recent.pop_front();
        }
        let y = len as f64;
        for &(s, l) in &self.recent {
            let j = start - s;
            let y0 = l as f64;
            self.xx[j] += 1.0;
            self.yy[j] += y0 * y;
            self.xy[j] += y; // X at the earlier position, Y at the later one
            self.yx[j] += y0;
        }
        self.recent.push_back((start, len));
    }

    fn finish(&self, mom: &MomentsF64, seq_len: usize, max_len: usize) -> LagCovariances {
        let base = LagCovariances::lag0(mom);
        let (p, q) = (mom.p, mom.q);
        let (mut syy, mut sxx, mut sxy) = (0.0, 0.0, 0.0);
        for j in 1..max_len.min(seq_len) {
            let n = (seq_len - j) as f64;
            sxx += self.xx[j] / n - p * p;
            syy += self.yy[j] / n - q * q;
            sxy += self.xy[j] / n - p * q + self.yx[j] / n - p * q;
        }
        LagCovariances {
            c_yy: base.lag0_yy + 2.0 * syy,
            c_xx: base.lag0_xx + 2.0 * sxx,
            c_xy: base.lag0_xy + sxy,
            ..base
        }
    }
}

/// Estimates the covariance components for the given family members from
/// one sequence of `sim_length` symbols sampled from `model`.
pub fn simulate_lag_terms(
    model: &SymbolModel,
    family: &EpisodeFamily,
    targets: &[(usize, MomentsF64)],
    max_len: usize,
    sim_length: usize,
    seed: u64,
) -> Result<Vec<LagCovariances>> {
    if sim_length < 10 * max_len {
        return Err(Error::Config(format!(
            "simulation length {sim_length} is shorter than 10 x K = {}",
            10 * max_len
        )));
    }
    let seq = sample_model(model, sim_length, seed);
    let scanner = Scanner::new(family)?;
    let mut slot = vec![usize::MAX; family.len()];
    for (i, &(ep, _)) in targets.iter().enumerate() {
        slot[ep] = i;
    }
    let mut sums: Vec<LagSums> = targets.iter().map(|_| LagSums::new(max_len)).collect();
    scanner.scan_with(seq.as_slice(), max_len, |ep, w| {
        let s = slot[ep];
        if s != usize::MAX {
            sums[s].push(w.start, w.len(), max_len);
        }
    });
    Ok(sums
        .iter()
        .zip(targets)
        .map(|(s, (_, mom))| s.finish(mom, sim_length, max_len))
        .collect())
}

/// `σ² = (C_YY - 2m C_XY + m² C_XX) / p²`.
pub fn sigma2(mom: &MomentsF64, c: &LagCovariances) -> f64 {
    let m = mom.m;
    (c.c_yy - 2.0 * m * c.c_xy + m * m * c.c_xx) / (mom.p * mom.p)
}

/// How observed windows are turned into a Z score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZForm {
    /// `√L (W / n - m) / σ`, the delta-method ratio statistic.
    #[default]
    Ratio,
    /// `(W - L m) / (√L σ)`, kept for comparison only.
    Literal,
}

pub fn z_statistic(obs: &WindowStats, m: f64, sigma: f64, test_len: usize, form: ZForm) -> Option<f64> {
    if obs.count == 0 || sigma.is_nan() || sigma <= 0.0 {
        return None;
    }
    let l = test_len as f64;
    Some(match form {
        ZForm::Ratio => l.sqrt() * (obs.sum as f64 / obs.count as f64 - m) / sigma,
        ZForm::Literal => (obs.sum as f64 - l * m) / (l.sqrt() * sigma),
    })
}

/// Standard normal CDF, `Φ(x) = erfc(-x / √2) / 2`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sided (lower tail, short windows) and two-sided P-values.
pub fn p_values(z: f64) -> (f64, f64) {
    let one = std_normal_cdf(z);
    let two = (2.0 * std_normal_cdf(-z.abs())).min(1.0);
    (one, two)
}

/// Benjamini–Hochberg step-up adjustment, returned in input order.
pub fn bh_adjust(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut adj = vec![0.0; m];
    let mut running = 1.0f64;
    for rank in (0..m).rev() {
        let i = order[rank];
        running = running.min(p[i] * m as f64 / (rank + 1) as f64);
        // p * m / m can round below p
        adj[i] = running.max(p[i]).min(1.0);
    }
    adj
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestStatus {
    Tested,
    SkippedFewWindows,
    SkippedZeroVariance,
    SkippedUnreachable,
}

impl TestStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestStatus::Tested => "tested",
            TestStatus::SkippedFewWindows => "skipped-few-windows",
            TestStatus::SkippedZeroVariance => "skipped-zero-variance",
            TestStatus::SkippedUnreachable => "skipped-unreachable",
        }
    }
}

impl std::fmt::Display for TestStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Null-model quantities of one episode, computed before looking at test data.
#[derive(Debug, Clone)]
pub struct EpisodeNull {
    /// Index in the family the engine was built for.
    pub state: usize,
    pub distribution: Option<WindowDistribution>,
    pub moments: Option<MomentsF64>,
    pub covariances: Option<LagCovariances>,
    pub sigma: Option<f64>,
    /// Set when the episode can never be tested.
    pub skip: Option<TestStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullConfig {
    pub max_len: usize,
    pub sim_length: usize,
    pub seed: u64,
}

/// Window distributions, moments and σ for `states` (family indices).
pub fn prepare_nulls(
    engine: &ProbabilityEngine,
    family: &EpisodeFamily,
    model: &SymbolModel,
    states: &[usize],
    cfg: &NullConfig,
) -> Result<Vec<EpisodeNull>> {
    let mut nulls = Vec::with_capacity(states.len());
    for &state in states {
        let mut null = EpisodeNull {
            state,
            distribution: None,
            moments: None,
            covariances: None,
            sigma: None,
            skip: None,
        };
        match engine.distribution(state) {
            Ok(dist) => {
                null.moments = Some(moments(&dist).to_f64());
                // a single possible length means the average is known exactly
                if dist.support_size() <= 1 {
                    null.skip = Some(TestStatus::SkippedZeroVariance);
                }
                null.distribution = Some(dist);
            }
            Err(Error::Unreachable) => {
                log::warn!("episode {} is unreachable under the model", family.key(state));
                null.skip = Some(TestStatus::SkippedUnreachable);
            }
            Err(e) => return Err(e),
        }
        nulls.push(null);
    }

    let targets: Vec<(usize, MomentsF64)> = nulls
        .iter()
        .filter(|n| n.skip.is_none())
        .map(|n| (n.state, n.moments.expect("reachable")))
        .collect();
    if targets.is_empty() {
        return Ok(nulls);
    }
    let covs = simulate_lag_terms(model, family, &targets, cfg.max_len, cfg.sim_length, cfg.seed)?;
    let mut it = covs.into_iter();
    for null in nulls.iter_mut().filter(|n| n.skip.is_none()) {
        let c = it.next().expect("one covariance per target");
        let mom = null.moments.expect("reachable");
        let s2 = sigma2(&mom, &c);
        let scale = (c.c_yy.abs() + mom.m * mom.m * c.c_xx.abs()) / (mom.p * mom.p);
        null.covariances = Some(c);
        if !s2.is_finite() || s2 <= 1e-12 * scale {
            null.sigma = Some(0.0);
            null.skip = Some(TestStatus::SkippedZeroVariance);
        } else {
            null.sigma = Some(s2.sqrt());
        }
    }
    Ok(nulls)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTestResult {
    /// Zero-based position among the tested episodes; files print it one-based.
    pub id: usize,
    pub episode: String,
    pub n_windows: usize,
    pub sum_len: usize,
    pub avg_len: Option<f64>,
    pub m: Option<f64>,
    pub sigma: Option<f64>,
    pub z: Option<f64>,
    pub p_one: Option<f64>,
    pub p_two: Option<f64>,
    pub q_one: Option<f64>,
    pub q_two: Option<f64>,
    pub status: TestStatus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestConfig {
    pub min_windows: usize,
    pub z_form: ZForm,
    pub adjust: bool,
}

/// Scores observed windows against prepared nulls and applies BH to the
/// one- and two-sided families separately.
pub fn evaluate(
    nulls: &[EpisodeNull],
    observed: &[WindowStats],
    names: &[String],
    test_len: usize,
    cfg: &TestConfig,
) -> Vec<EpisodeTestResult> {
    let mut results: Vec<EpisodeTestResult> = nulls
        .iter()
        .zip(observed)
        .zip(names)
        .enumerate()
        .map(|(id, ((null, obs), name))| {
            let mut r = EpisodeTestResult {
                id,
                episode: name.clone(),
                n_windows: obs.count,
                sum_len: obs.sum,
                avg_len: obs.mean,
                m: null.moments.map(|m| m.m),
                sigma: null.sigma,
                z: None,
                p_one: None,
                p_two: None,
                q_one: None,
                q_two: None,
                status: TestStatus::Tested,
            };
            if let Some(s) = null.skip {
                r.status = s;
            } else if obs.count <= cfg.min_windows {
                r.status = TestStatus::SkippedFewWindows;
            } else {
                let z = z_statistic(obs, r.m.expect("reachable"), r.sigma.expect("simulated"), test_len, cfg.z_form);
                match z {
                    Some(z) => {
                        let (one, two) = p_values(z);
                        r.z = Some(z);
                        r.p_one = Some(one);
                        r.p_two = Some(two);
                    }
                    None => r.status = TestStatus::SkippedZeroVariance,
                }
            }
            r
        })
        .collect();

    let tested: Vec<usize> = (0..results.len())
        .filter(|&i| results[i].status == TestStatus::Tested)
        .collect();
    let ones: Vec<f64> = tested.iter().map(|&i| results[i].p_one.unwrap()).collect();
    let twos: Vec<f64> = tested.iter().map(|&i| results[i].p_two.unwrap()).collect();
    let (q1, q2) = if cfg.adjust {
        (bh_adjust(&ones), bh_adjust(&twos))
    } else {
        (ones, twos)
    };
    for (k, &i) in tested.iter().enumerate() {
        results[i].q_one = Some(q1[k]);
        results[i].q_two = Some(q2[k]);
    }
    results
}
