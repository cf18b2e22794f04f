use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use p300_core::lm::{normalize_text, LayeredLm};
use p300_core::sim::{load_subjects, run_batch, write_results, CvMode, SimConfig};
use p300_core::swlda::{
    read_raw_subject, score_ascv, score_wscv, write_scored_subject, ScoredSubject, StepwiseConfig,
};
use p300_core::synthetic::gaussian_subject;
use p300_core::wordpred::Transport;

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser)]
#[command(name = "p300sim", version, about = "P300 speller typing simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every subject typing the passage under each scheme.
    Run(RunArgs),
    /// Cross-validate SWLDA on raw subject files and write pre-scored files.
    Score(ScoreArgs),
    /// Write synthetic pre-scored subjects with Gaussian scores.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// One scheme or a comma-separated list.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    cv: Option<String>,
    #[arg(long)]
    subjects: Option<PathBuf>,
    #[arg(long)]
    passage: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Provider command line, split on whitespace.
    #[arg(long, conflicts_with = "suggester_tcp")]
    suggester_cmd: Option<String>,
    #[arg(long)]
    suggester_tcp: Option<String>,
    /// Results CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-selection logs.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// Directory of raw subject files.
    #[arg(long)]
    raw: PathBuf,
    #[arg(long, default_value = "wscv")]
    cv: String,
    /// Output root; files go to `<out>/<cv>/<subject>.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    subjects: usize,
    /// Attended minus non-attended mean, in units of the common sd.
    #[arg(long, default_value_t = 1.5)]
    d_prime: f64,
    #[arg(long, default_value_t = 30)]
    chars: u32,
    #[arg(long, default_value_t = 10)]
    scans: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// An error with the exit code it maps to.
struct Failure(u8, anyhow::Error);

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure(EXIT_CONFIG, e.into())
}

fn data_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure(EXIT_DATA, e.into())
}

fn build_config(args: &RunArgs) -> Result<SimConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => SimConfig::from_file(p).map_err(config_err)?,
        None => SimConfig::default(),
    };
    let here = Path::new("");
    let mut set = |k: &str, v: &str| cfg.set(k, v, here).map_err(config_err);
    if let Some(s) = &args.scheme {
        set("scheme", s)?;
    }
    if let Some(s) = &args.cv {
        set("cv", s)?;
    }
    if let Some(s) = args.seed {
        set("seed", &s.to_string())?;
    }
    let path_override = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if let Some(p) = v {
            *slot = Some(p.clone());
        }
    };
    path_override(&mut cfg.subjects_path, &args.subjects);
    path_override(&mut cfg.passage_path, &args.passage);
    path_override(&mut cfg.corpus_path, &args.corpus);
    path_override(&mut cfg.out_path, &args.out);
    path_override(&mut cfg.trace_dir, &args.trace);
    if let Some(cmd) = &args.suggester_cmd {
        let argv: Vec<String> = cmd.split_whitespace().map(String::from).collect();
        if argv.is_empty() {
            return Err(config_err(anyhow!("empty --suggester-cmd")));
        }
        cfg.suggester = Some(Transport::Process(argv));
    }
    if let Some(addr) = &args.suggester_tcp {
        cfg.suggester = Some(Transport::Tcp(addr.clone()));
    }
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, Failure> {
    p.as_deref()
        .ok_or_else(|| config_err(anyhow!("no {what} given (config key or --{what})")))
}

fn run(args: RunArgs) -> Result<u8, Failure> {
    let cfg = build_config(&args)?;
    let corpus_path = required(&cfg.corpus_path, "corpus")?;
    let passage_path = required(&cfg.passage_path, "passage")?;
    let subjects_path = required(&cfg.subjects_path, "subjects")?;

    let corpus = fs::read_to_string(corpus_path)
        .with_context(|| format!("reading corpus {}", corpus_path.display()))
        .map_err(data_err)?;
    let lm = LayeredLm::from_raw_text(&corpus, cfg.discounts)
        .with_context(|| format!("building language model from {}", corpus_path.display()))
        .map_err(data_err)?;
    let passage = fs::read_to_string(passage_path)
        .with_context(|| format!("reading passage {}", passage_path.display()))
        .map_err(data_err)?;
    let passage = normalize_text(&passage);
    if passage.is_empty() {
        return Err(data_err(anyhow!("passage {} has no letters", passage_path.display())));
    }
    let subjects = load_subjects(subjects_path, cfg.cv_mode)
        .with_context(|| format!("loading subjects from {}", subjects_path.display()))
        .map_err(data_err)?;
    log::info!(
        "{} subjects x {} schemes, passage of {} characters",
        subjects.len(),
        cfg.schemes.len(),
        passage.len()
    );

    let rows = run_batch(&cfg, &lm, &passage, &subjects);
    let write = |w: &mut dyn Write| write_results(w, &cfg, &rows);
    match &cfg.out_path {
        Some(p) => {
            let mut f = fs::File::create(p)
                .with_context(|| format!("creating {}", p.display()))
                .map_err(data_err)?;
            write(&mut f).map_err(data_err)?;
        }
        None => write(&mut io::stdout().lock()).map_err(data_err)?,
    }
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        log::error!("{failed} of {} runs failed", rows.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

fn score(args: ScoreArgs) -> Result<u8, Failure> {
    let cv: CvMode = args.cv.parse().map_err(config_err)?;
    let mut files: Vec<PathBuf> = fs::read_dir(&args.raw)
        .with_context(|| format!("listing {}", args.raw.display()))
        .map_err(data_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(data_err(anyhow!("no raw subject files in {}", args.raw.display())));
    }
    let raw = files
        .iter()
        .map(|p| read_raw_subject(p).with_context(|| format!("reading {}", p.display())))
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(data_err)?;
    let swlda = StepwiseConfig::default();
    let scored: Vec<ScoredSubject> = match cv {
        CvMode::Wscv => raw
            .iter()
            .map(|s| {
                score_wscv(&s.epochs, &swlda).map(|epochs| ScoredSubject {
                    id: s.id.clone(),
                    epochs,
                })
            })
            .collect::<Result<_, _>>(),
        CvMode::Ascv => score_ascv(&raw, &swlda),
    }
    .map_err(data_err)?;
    let dir = args.out.join(cv.name());
    fs::create_dir_all(&dir).map_err(data_err)?;
    for s in &scored {
        write_scored_subject(&dir.join(format!("{}.csv", s.id)), s).map_err(data_err)?;
    }
    log::info!("wrote {} scored subjects to {}", scored.len(), dir.display());
    Ok(0)
}

fn synth(args: SynthArgs) -> Result<u8, Failure> {
    if args.subjects == 0 || args.chars == 0 || args.scans == 0 {
        return Err(config_err(anyhow!("subjects, chars and scans must be positive")));
    }
    fs::create_dir_all(&args.out).map_err(data_err)?;
    for i in 0..args.subjects {
        let id = format!("synth{i:02}");
        let s = gaussian_subject(&id, args.d_prime, args.chars, args.scans, args.seed ^ i as u64);
        write_scored_subject(&args.out.join(format!("{id}.csv")), &s).map_err(data_err)?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Score(a) => score(a),
        Command::Synth(a) => synth(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
