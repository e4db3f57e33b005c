//! Train/test pipeline: estimate a model and mine candidates on the first
//! part of a sequence, then test the candidates' average minimal-window
//! length on the second part.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::automata::MachineSet;
use crate::episodes::{Alphabet, Episode, EpisodeFamily, SymbolSequence, WindowSpan};
use crate::error::{Error, Result};
use crate::io::{self, EpisodeRecord};
use crate::miner::{mine, EpisodeClass, MinerConfig};
use crate::probmodel::{ProbabilityEngine, SymbolModel, WindowDistribution};
use crate::sigtest::{evaluate, prepare_nulls, EpisodeTestResult, NullConfig, TestConfig, TestStatus, ZForm};
use crate::winscan::{self, Scanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Adjustment {
    #[default]
    Bh,
    None,
}

impl std::str::FromStr for Adjustment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bh" => Ok(Adjustment::Bh),
            "none" => Ok(Adjustment::None),
            other => Err(Error::Config(format!("unknown adjustment '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    /// Test these episodes instead of mining.
    pub episodes: Option<PathBuf>,
    pub split: f64,
    pub min_windows: usize,
    pub max_window: usize,
    pub classes: BTreeSet<EpisodeClass>,
    pub max_nodes: usize,
    pub sim_length: usize,
    pub seed: u64,
    pub alpha: f64,
    pub adjust: Adjustment,
    pub out: PathBuf,
    pub z_form: ZForm,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>, min_windows: usize, max_window: usize) -> Self {
        Self {
            input: input.into(),
            episodes: None,
            split: 0.5,
            min_windows,
            max_window,
            classes: BTreeSet::from([EpisodeClass::Parallel, EpisodeClass::Serial]),
            max_nodes: 4,
            sim_length: 1_000_000,
            seed: 1,
            alpha: 0.05,
            adjust: Adjustment::Bh,
            out: out.into(),
            z_form: ZForm::Ratio,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::Config(format!("split {} is not in (0, 1)", self.split)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} is not in (0, 1)", self.alpha)));
        }
        self.miner().validate()
    }

    pub fn miner(&self) -> MinerConfig {
        MinerConfig {
            min_windows: self.min_windows,
            max_window: self.max_window,
            classes: self.classes.clone(),
            max_nodes: self.max_nodes,
        }
    }
}

/// State counts of the machines built for the candidate family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MachineSizes {
    pub family: usize,
    pub episode: usize,
    pub simple: usize,
    pub co: usize,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub train_len: usize,
    pub test_len: usize,
    pub model: SymbolModel,
    pub candidates: Vec<EpisodeRecord>,
    pub results: Vec<EpisodeTestResult>,
    /// Window distribution per candidate, `None` when unreachable.
    pub distributions: Vec<Option<WindowDistribution>>,
    /// Minimal windows (length ≤ K) of each candidate in the test part.
    pub windows: Vec<Vec<WindowSpan>>,
    pub sizes: MachineSizes,
    pub alpha: f64,
}

impl Report {
    /// Tested candidates whose adjusted one-sided P-value is at most alpha.
    pub fn significant_one(&self) -> Vec<usize> {
        self.significant(|r| r.q_one)
    }

    pub fn significant_two(&self) -> Vec<usize> {
        self.significant(|r| r.q_two)
    }

    fn significant(&self, q: impl Fn(&EpisodeTestResult) -> Option<f64>) -> Vec<usize> {
        self.results
            .iter()
            .filter(|r| q(r).is_some_and(|q| q <= self.alpha))
            .map(|r| r.id)
            .collect()
    }

    pub fn tested(&self) -> usize {
        self.results.iter().filter(|r| r.status == TestStatus::Tested).count()
    }
}

/// Settings for [`analyze`] that do not concern files.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub miner: MinerConfig,
    pub sim_length: usize,
    pub seed: u64,
    pub alpha: f64,
    pub adjust: Adjustment,
    pub z_form: ZForm,
}

impl From<&PipelineConfig> for AnalysisConfig {
    fn from(c: &PipelineConfig) -> Self {
        Self {
            miner: c.miner(),
            sim_length: c.sim_length,
            seed: c.seed,
            alpha: c.alpha,
            adjust: c.adjust,
            z_form: c.z_form,
        }
    }
}

/// Splits at `floor(split * L)`; both parts must be nonempty.
pub fn split_sequence(seq: &SymbolSequence, split: f64) -> Result<(SymbolSequence, SymbolSequence)> {
    let at = (split * seq.len() as f64).floor() as usize;
    if at == 0 || at >= seq.len() {
        return Err(Error::Config(format!(
            "split {split} of a length-{} sequence leaves an empty part",
            seq.len()
        )));
    }
    Ok(seq.split_at(at))
}

/// Estimates the model on `train` unless one is given, mines candidates on
/// `train` unless `episodes` is given, and tests them on `test`.
pub fn analyze(
    train: &SymbolSequence,
    test: &SymbolSequence,
    alphabet_size: usize,
    model: Option<SymbolModel>,
    episodes: Option<Vec<EpisodeRecord>>,
    cfg: &AnalysisConfig,
) -> Result<Report> {
    cfg.miner.validate()?;
    if test.is_empty() {
        return Err(Error::EmptySequence);
    }
    let k = cfg.miner.max_window;
    let model = match model {
        Some(m) => io::extend_model(&m, alphabet_size)?,
        None => SymbolModel::estimate(train, alphabet_size)?,
    };
    let candidates = match episodes {
        Some(recs) => recs,
        None => mine(train, &cfg.miner)?
            .candidates
            .into_iter()
            .enumerate()
            .map(|(i, c)| EpisodeRecord {
                id: (i + 1).to_string(),
                episode: c.episode,
                count: Some(c.count),
            })
            .collect(),
    };
    for r in &candidates {
        if r.episode.labels().iter().any(|&a| a as usize >= model.len()) {
            return Err(Error::InvalidModel(format!("episode {} uses a symbol outside the model", r.id)));
        }
    }
    log::info!("{} candidates", candidates.len());

    let family = EpisodeFamily::closure(candidates.iter().map(|r| r.episode.clone()))?;
    let states: Vec<usize> = candidates
        .iter()
        .map(|r| family.position(&r.episode).expect("candidate is in its closure"))
        .collect();
    let machines = MachineSet::build(&family)?;
    let sizes = MachineSizes {
        family: family.len(),
        episode: machines.episode.state_count(),
        simple: machines.simple.state_count(),
        co: machines.co.state_count(),
    };
    log::info!(
        "machines: |M| = {}, |S| = {}, |co| = {}",
        sizes.episode,
        sizes.simple,
        sizes.co
    );
    let engine = ProbabilityEngine::new(machines, &model, k)?;
    let null_cfg = NullConfig {
        max_len: k,
        sim_length: cfg.sim_length,
        seed: cfg.seed,
    };
    let nulls = prepare_nulls(&engine, &family, &model, &states, &null_cfg)?;

    let scan = Scanner::new(&family)?.scan(test.as_slice(), k);
    let windows: Vec<Vec<WindowSpan>> = states.iter().map(|&s| scan.of(s).to_vec()).collect();
    let observed: Vec<_> = windows.iter().map(|w| winscan::stats(w)).collect();
    let names: Vec<String> = candidates.iter().map(|r| r.id.clone()).collect();
    let test_cfg = TestConfig {
        min_windows: cfg.miner.min_windows,
        z_form: cfg.z_form,
        adjust: cfg.adjust == Adjustment::Bh,
    };
    let results = evaluate(&nulls, &observed, &names, test.len(), &test_cfg);
    let distributions = nulls.into_iter().map(|n| n.distribution).collect();
    Ok(Report {
        train_len: train.len(),
        test_len: test.len(),
        model,
        candidates,
        results,
        distributions,
        windows,
        sizes,
        alpha: cfg.alpha,
    })
}

/// Reads the input, runs [`analyze`] and writes the report files into
/// `cfg.out`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Report> {
    cfg.validate()?;
    let text = fs::read_to_string(&cfg.input)?;
    let mut alphabet = Alphabet::new();
    let seq = SymbolSequence::parse(&text, &mut alphabet);
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let episodes = match &cfg.episodes {
        Some(path) => Some(io::parse_episodes(&fs::read_to_string(path)?, &mut alphabet)?),
        None => None,
    };
    let (train, test) = split_sequence(&seq, cfg.split)?;
    let mut report = analyze(&train, &test, alphabet.len(), None, episodes, &cfg.into())?;
    name_results(&mut report, &alphabet);
    write_report(&report, &alphabet, &cfg.out)?;
    Ok(report)
}

/// Replaces candidate ids in the results with readable episode names.
pub fn name_results(report: &mut Report, alphabet: &Alphabet) {
    for (r, c) in report.results.iter_mut().zip(&report.candidates) {
        r.episode = c.episode.describe(alphabet);
    }
}

pub fn write_report(report: &Report, alphabet: &Alphabet, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("results.tsv"), io::write_results(&report.results))?;
    let dists: Vec<(usize, &WindowDistribution)> = report
        .distributions
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.as_ref().map(|d| (report.results[i].id + 1, d)))
        .collect();
    fs::write(out.join("distributions.tsv"), io::write_distributions(&dists))?;
    fs::write(out.join("summary.tsv"), summary(report))?;
    fs::write(out.join("model.tsv"), io::write_model(&report.model, alphabet))?;
    fs::write(out.join("candidates.txt"), io::write_episodes(&report.candidates, alphabet))?;
    fs::write(out.join("plot.tsv"), emit_plot_data(&report.results, &report.windows, &report.distributions))?;
    Ok(())
}

pub fn summary(report: &Report) -> String {
    let mut s = String::new();
    let rows = [
        ("train_length", report.train_len),
        ("test_length", report.test_len),
        ("candidates", report.candidates.len()),
        ("tested", report.tested()),
        ("significant_one", report.significant_one().len()),
        ("significant_two", report.significant_two().len()),
        ("family_states", report.sizes.family),
        ("episode_machine_states", report.sizes.episode),
        ("simple_machine_states", report.sizes.simple),
        ("co_machine_states", report.sizes.co),
    ];
    for (k, v) in rows {
        writeln!(s, "{k}\t{v}").unwrap();
    }
    s
}

pub const PLOT_HEADER: &str = "episode_id\tk\tobserved\tmodel_prob\texpected";

/// Observed window-length histogram next to the model distribution, one row
/// per `(episode, k)`. `expected` is `n_w * p(k)`.
pub fn emit_plot_data(
    results: &[EpisodeTestResult],
    windows: &[Vec<WindowSpan>],
    distributions: &[Option<WindowDistribution>],
) -> String {
    let mut s = String::from(PLOT_HEADER);
    s.push('\n');
    for ((r, ws), dist) in results.iter().zip(windows).zip(distributions) {
        let model = dist.as_ref().map(|d| d.normalized_f64());
        let max_len = model
            .as_ref()
            .map(Vec::len)
            .unwrap_or(0)
            .max(ws.iter().map(WindowSpan::len).max().unwrap_or(0));
        let mut hist = vec![0usize; max_len + 1];
        for w in ws {
            hist[w.len()] += 1;
        }
        for (k, observed) in hist.iter().enumerate().skip(1) {
            let (p, e) = match &model {
                Some(m) => {
                    let p = m.get(k - 1).copied().unwrap_or(0.0);
                    (io::fmt_g(p), io::fmt_g(p * ws.len() as f64))
                }
                None => ("NA".into(), "NA".into()),
            };
            writeln!(s, "{}\t{k}\t{observed}\t{p}\t{e}", r.id + 1).unwrap();
        }
    }
    s
}

/// Candidates in the order they were given, as episode records.
pub fn records(episodes: &[Episode]) -> Vec<EpisodeRecord> {
    episodes
        .iter()
        .enumerate()
        .map(|(i, e)| EpisodeRecord {
            id: (i + 1).to_string(),
            episode: e.clone(),
            count: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::gen_uniform;
    use crate::probmodel::rational;

    fn cfg(n: usize, k: usize) -> AnalysisConfig {
        AnalysisConfig {
            miner: MinerConfig::new(n, k),
            sim_length: 20_000,
            seed: 3,
            alpha: 0.05,
            adjust: Adjustment::Bh,
            z_form: ZForm::Ratio,
        }
    }

    #[test]
    fn config_checks() {
        let mut c = PipelineConfig::new("in", "out", 5, 10);
        assert!(c.validate().is_ok());
        c.split = 1.0;
        assert_eq!(c.validate().unwrap_err().exit_code(), 1);
        c.split = 0.5;
        c.alpha = 0.0;
        assert!(c.validate().is_err());
        assert!("holm".parse::<Adjustment>().is_err());
    }

    #[test]
    fn split_floor() {
        let s = SymbolSequence::new(vec![0, 1, 2, 3, 4]);
        let (a, b) = split_sequence(&s, 0.5).unwrap();
        assert_eq!((a.len(), b.len()), (2, 3));
        assert!(split_sequence(&SymbolSequence::new(vec![0]), 0.5).is_err());
    }

    #[test]
    fn every_candidate_reported_once() {
        let seq = gen_uniform(3, 4000, 9);
        let (train, test) = split_sequence(&seq, 0.5).unwrap();
        let rep = analyze(&train, &test, 3, None, None, &cfg(60, 6)).unwrap();
        assert_eq!(rep.results.len(), rep.candidates.len());
        for (i, r) in rep.results.iter().enumerate() {
            assert_eq!(r.episode, rep.candidates[i].id);
            if rep.candidates[i].episode.node_count() == 1 {
                assert_eq!(r.status, TestStatus::SkippedZeroVariance);
            }
        }
        let again = analyze(&train, &test, 3, None, None, &cfg(60, 6)).unwrap();
        assert_eq!(io::write_results(&again.results), io::write_results(&rep.results));
    }

    #[test]
    fn plot_rows_match_distribution() {
        let model = SymbolModel::new(vec![rational(1, 2), rational(1, 4), rational(1, 4)]).unwrap();
        let test = crate::datagen::sample_model(&model, 3000, 4);
        let eps = records(&[Episode::serial(&[0, 1])]);
        let rep = analyze(&test, &test, 3, Some(model), Some(eps), &cfg(5, 12)).unwrap();
        let plot = emit_plot_data(&rep.results, &rep.windows, &rep.distributions);
        let rows: Vec<Vec<&str>> = plot.lines().skip(1).map(|l| l.split('\t').collect()).collect();
        assert_eq!(rows.len(), 12);
        let observed: usize = rows.iter().map(|r| r[2].parse::<usize>().unwrap()).sum();
        assert_eq!(observed, rep.results[0].n_windows);
        assert_eq!(rows[0][3], "0");
        // (3/4)(1/4)^(k-2) over the truncated mass
        let z: f64 = (2..=12).map(|k| 0.75 * 0.25f64.powi(k - 2)).sum();
        for (i, r) in rows.iter().enumerate().skip(1) {
            let want = 0.75 * 0.25f64.powi(i as i32 - 1) / z;
            let got: f64 = r[3].parse().unwrap();
            assert!((got - want).abs() <= 1e-5 * want, "{i}: {got} vs {want}");
        }
        assert_eq!(emit_plot_data(&[], &[], &[]), format!("{PLOT_HEADER}\n"));
    }
}
