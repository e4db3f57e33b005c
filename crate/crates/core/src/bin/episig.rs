use std::collections::BTreeSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use episig::automata::MachineSet;
use episig::datagen::{gen_correlated, gen_uniform, sample_model};
use episig::episodes::{Alphabet, EpisodeFamily, SymbolSequence};
use episig::error::{Error, Result};
use episig::io::{self, EpisodeRecord};
use episig::miner::{mine, EpisodeClass, MinerConfig};
use episig::pipeline::{self, analyze, name_results, split_sequence, AnalysisConfig, PipelineConfig};
use episig::probmodel::{ProbabilityEngine, SymbolModel};
use episig::sigtest::ZForm;
use episig::winscan;

#[derive(Parser)]
#[command(name = "episig", version, about = "Significance of episodes by minimal-window length")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sequence.
    Gen(GenArgs),
    /// Mine frequent serial and parallel episodes.
    Mine(MineArgs),
    /// Estimate a symbol model, optionally with window distributions.
    Model(ModelArgs),
    /// List minimal windows of episodes.
    Scan(ScanArgs),
    /// Test given episodes against a model.
    Test(TestArgs),
    /// Full pipeline: split, mine, model, test, report.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Uniform,
    Correlated,
    Model,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    generator: Generator,
    #[arg(long)]
    length: usize,
    #[arg(long, default_value_t = 10)]
    alphabet_size: usize,
    /// Model file for the `model` generator.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MiningArgs {
    #[arg(long)]
    min_windows: usize,
    #[arg(long)]
    max_window: usize,
    /// Comma-separated: parallel, serial.
    #[arg(long, default_value = "parallel,serial")]
    classes: String,
    #[arg(long, default_value_t = 4)]
    max_nodes: usize,
}

#[derive(Args)]
struct MineArgs {
    sequence: PathBuf,
    #[command(flatten)]
    mining: MiningArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    sequence: PathBuf,
    /// Estimate from this leading fraction only.
    #[arg(long)]
    split: Option<f64>,
    /// Also write window distributions of these episodes.
    #[arg(long, requires = "max_window")]
    episodes: Option<PathBuf>,
    #[arg(long)]
    max_window: Option<usize>,
    /// Output directory for model.tsv and distributions.tsv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    sequence: PathBuf,
    #[arg(long)]
    episodes: PathBuf,
    #[arg(long)]
    max_window: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatArgs {
    #[arg(long, default_value_t = 1_000_000)]
    sim_length: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "bh")]
    adjust: String,
    /// Use (W - L m) / (sqrt(L) sigma) instead of the ratio statistic.
    #[arg(long)]
    literal_z: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    sequence: PathBuf,
    #[arg(long)]
    episodes: PathBuf,
    /// Test the whole sequence against this model instead of splitting.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    split: f64,
    #[arg(long)]
    min_windows: usize,
    #[arg(long)]
    max_window: usize,
    #[command(flatten)]
    stat: StatArgs,
}

#[derive(Args)]
struct RunArgs {
    sequence: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    split: f64,
    #[command(flatten)]
    mining: MiningArgs,
    #[command(flatten)]
    stat: StatArgs,
}

fn parse_classes(s: &str) -> Result<BTreeSet<EpisodeClass>> {
    s.split(',').map(|c| c.trim().parse()).collect()
}

fn read_sequence(path: &Path, alphabet: &mut Alphabet) -> Result<SymbolSequence> {
    let seq = SymbolSequence::parse(&fs::read_to_string(path)?, alphabet);
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(seq)
}

fn read_model(path: &Path, alphabet: &mut Alphabet) -> Result<SymbolModel> {
    io::model_from_entries(&io::parse_model_entries(&fs::read_to_string(path)?)?, alphabet)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => Ok(r?),
        },
    }
}

impl MiningArgs {
    fn config(&self) -> Result<MinerConfig> {
        let cfg = MinerConfig {
            min_windows: self.min_windows,
            max_window: self.max_window,
            classes: parse_classes(&self.classes)?,
            max_nodes: self.max_nodes,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl StatArgs {
    fn analysis(&self, miner: MinerConfig) -> Result<AnalysisConfig> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} is not in (0, 1)", self.alpha)));
        }
        Ok(AnalysisConfig {
            miner,
            sim_length: self.sim_length,
            seed: self.seed,
            alpha: self.alpha,
            adjust: self.adjust.parse()?,
            z_form: if self.literal_z { ZForm::Literal } else { ZForm::Ratio },
        })
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let (seq, alphabet) = match a.generator {
        Generator::Uniform => {
            if a.alphabet_size == 0 {
                return Err(Error::Config("alphabet size must be at least 1".into()));
            }
            (gen_uniform(a.alphabet_size, a.length, a.seed), Alphabet::numbered(a.alphabet_size))
        }
        Generator::Correlated => (gen_correlated(a.length, a.seed), Alphabet::numbered(10)),
        Generator::Model => {
            let path = a.model.ok_or_else(|| Error::Config("--model is required".into()))?;
            let mut alphabet = Alphabet::new();
            let model = read_model(&path, &mut alphabet)?;
            (sample_model(&model, a.length, a.seed), alphabet)
        }
    };
    emit(a.out.as_deref(), &seq.to_text(&alphabet))
}

fn mine_cmd(a: MineArgs) -> Result<()> {
    let cfg = a.mining.config()?;
    let mut alphabet = Alphabet::new();
    let seq = read_sequence(&a.sequence, &mut alphabet)?;
    let res = mine(&seq, &cfg)?;
    let recs: Vec<EpisodeRecord> = res
        .candidates
        .into_iter()
        .enumerate()
        .map(|(i, c)| EpisodeRecord {
            id: (i + 1).to_string(),
            episode: c.episode,
            count: Some(c.count),
        })
        .collect();
    emit(a.out.as_deref(), &io::write_episodes(&recs, &alphabet))
}

fn model_cmd(a: ModelArgs) -> Result<()> {
    let mut alphabet = Alphabet::new();
    let seq = read_sequence(&a.sequence, &mut alphabet)?;
    let episodes = match &a.episodes {
        Some(p) => io::parse_episodes(&fs::read_to_string(p)?, &mut alphabet)?,
        None => Vec::new(),
    };
    let train = match a.split {
        Some(f) => split_sequence(&seq, f)?.0,
        None => seq,
    };
    let model = SymbolModel::estimate(&train, alphabet.len())?;
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("model.tsv"), io::write_model(&model, &alphabet))?;
    if let Some(k) = a.max_window.filter(|_| !episodes.is_empty()) {
        if k == 0 {
            return Err(Error::Config("max window must be at least 1".into()));
        }
        let family = EpisodeFamily::closure(episodes.iter().map(|r| r.episode.clone()))?;
        let engine = ProbabilityEngine::new(MachineSet::build(&family)?, &model, k)?;
        let mut dists = Vec::new();
        for (i, r) in episodes.iter().enumerate() {
            match engine.distribution(family.position(&r.episode).expect("in closure")) {
                Ok(d) => dists.push((i + 1, d)),
                Err(Error::Unreachable) => log::warn!("episode {} is unreachable", r.id),
                Err(e) => return Err(e),
            }
        }
        let rows: Vec<_> = dists.iter().map(|(i, d)| (*i, d)).collect();
        fs::write(a.out.join("distributions.tsv"), io::write_distributions(&rows))?;
    }
    Ok(())
}

fn scan_cmd(a: ScanArgs) -> Result<()> {
    if a.max_window == 0 {
        return Err(Error::Config("max window must be at least 1".into()));
    }
    let mut alphabet = Alphabet::new();
    let episodes = io::parse_episodes(&fs::read_to_string(&a.episodes)?, &mut alphabet)?;
    let seq = read_sequence(&a.sequence, &mut alphabet)?;
    let family = EpisodeFamily::closure(episodes.iter().map(|r| r.episode.clone()))?;
    let res = winscan::scan(seq.as_slice(), &family, a.max_window)?;
    let rows: Vec<(usize, &[_])> = episodes
        .iter()
        .enumerate()
        .map(|(i, r)| (i + 1, res.of(family.position(&r.episode).expect("in closure"))))
        .collect();
    emit(a.out.as_deref(), &io::write_windows(&rows))
}

fn test_cmd(a: TestArgs) -> Result<()> {
    let miner = MinerConfig::new(a.min_windows, a.max_window);
    miner.validate()?;
    let cfg = a.stat.analysis(miner)?;
    let mut alphabet = Alphabet::new();
    let model = match &a.model {
        Some(p) => Some(read_model(p, &mut alphabet)?),
        None => None,
    };
    let episodes = io::parse_episodes(&fs::read_to_string(&a.episodes)?, &mut alphabet)?;
    let seq = read_sequence(&a.sequence, &mut alphabet)?;
    let (train, test) = match model {
        Some(_) => (seq.clone(), seq),
        None => split_sequence(&seq, a.split)?,
    };
    let mut report = analyze(&train, &test, alphabet.len(), model, Some(episodes), &cfg)?;
    name_results(&mut report, &alphabet);
    pipeline::write_report(&report, &alphabet, &a.stat.out)
}

fn run_cmd(a: RunArgs) -> Result<()> {
    let mut cfg = PipelineConfig::new(&a.sequence, &a.stat.out, a.mining.min_windows, a.mining.max_window);
    cfg.split = a.split;
    cfg.classes = parse_classes(&a.mining.classes)?;
    cfg.max_nodes = a.mining.max_nodes;
    let stat = a.stat.analysis(cfg.miner())?;
    cfg.sim_length = stat.sim_length;
    cfg.seed = stat.seed;
    cfg.alpha = stat.alpha;
    cfg.adjust = stat.adjust;
    cfg.z_form = stat.z_form;
    let report = pipeline::run_pipeline(&cfg)?;
    eprintln!(
        "{} candidates, {} tested, {} significant (one-sided), {} significant (two-sided)",
        report.candidates.len(),
        report.tested(),
        report.significant_one().len(),
        report.significant_two().len()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let res = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Mine(a) => mine_cmd(a),
        Command::Model(a) => model_cmd(a),
        Command::Scan(a) => scan_cmd(a),
        Command::Test(a) => test_cmd(a),
        Command::Run(a) => run_cmd(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
