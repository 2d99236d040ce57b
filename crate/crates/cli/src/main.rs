//! `smartmcb`: analyze SMART data, run power and sample-size studies, and
//! simulate trials.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use smart_mcb::config::{load_eta, PowerConfig};
use smart_mcb::posterior::{write_subjects, CountsFile, Reference, TrialData};
use smart_mcb::power::simulate_subjects;
use smart_mcb::report::{analyze, power_study, to_json, PowerReport};
use smart_mcb::SmartDesign;

#[derive(Debug, Parser)]
#[command(name = "smartmcb", version, about = "Set-of-best analysis and sizing for two-stage SMARTs")]
struct Cli {
    /// Worker threads; outputs do not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Posterior draws and the set of best EDTRs for observed trial data.
    Analyze(AnalyzeArgs),
    /// Power curve over a grid of total sample sizes.
    Power(StudyArgs),
    /// Smallest grid sample size reaching the target power.
    Samplesize(StudyArgs),
    /// Subject-level data from a known truth.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Built-in design kind (design1, general) or a design JSON file.
    #[arg(long)]
    design: String,
    /// Subject-level CSV with columns a1,s,a2,y.
    #[arg(long, conflicts_with = "counts", required_unless_present = "counts")]
    data: Option<PathBuf>,
    /// Aggregated counts JSON, as embedded in analysis reports.
    #[arg(long)]
    counts: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Posterior draws M.
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// `auto` (highest posterior mean) or an EDTR id.
    #[arg(long, default_value = "auto")]
    reference: Reference,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct StudyArgs {
    /// Power configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to csv for `power` and json for `samplesize`.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    design: String,
    /// Truth parameters: a preset name or an eta JSON file.
    #[arg(long)]
    eta: String,
    /// Total number of subjects.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: Output,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Power(args) => cmd_study(args, "power", Format::Csv),
        Command::Samplesize(args) => cmd_study(args, "samplesize", Format::Json),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

/// The given seed, or a fresh one from system entropy, announced on stderr.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let seed = rand::random();
        eprintln!("seed: {seed}");
        seed
    })
}

fn open_output(out: &Output) -> Result<Box<dyn Write>> {
    Ok(match &out.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open_input(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn load_design(reference: &str) -> Result<SmartDesign> {
    SmartDesign::from_reference(reference).with_context(|| format!("loading design `{reference}`"))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let design = load_design(&args.design)?;
    let data = match (&args.data, &args.counts) {
        (Some(path), _) => TrialData::from_csv(&design, open_input(path)?)
            .with_context(|| format!("reading {}", path.display()))?,
        (None, Some(path)) => {
            let file: CountsFile = serde_json::from_reader(open_input(path)?)
                .with_context(|| format!("parsing {}", path.display()))?;
            TrialData::from_counts_file(&design, &file)?
        }
        (None, None) => bail!("one of --data or --counts is required"),
    };
    let seed = resolve_seed(args.seed);
    info!("analyzing {} subjects with {} draws", data.total_subjects(), args.draws);
    let report = analyze(&design, &data, args.alpha, args.draws, seed, args.reference)?;
    for w in &report.warnings {
        warn!("{w}");
    }
    let mut out = open_output(&args.out)?;
    match args.format {
        Format::Json => out.write_all(to_json(&report)?.as_bytes())?,
        Format::Csv => report.write_csv(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn cmd_study(args: StudyArgs, command: &'static str, default_format: Format) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = PowerConfig::from_json(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    let spec = config.into_spec(|| resolve_seed(None))?;
    info!(
        "{} grid points x {} datasets x {} draws",
        spec.grid.len(),
        spec.datasets_per_n,
        spec.draws_per_dataset
    );
    let report = power_study(&spec, command)?;
    summarize(&report);
    let mut out = open_output(&args.out)?;
    match args.format.unwrap_or(default_format) {
        Format::Json => out.write_all(to_json(&report)?.as_bytes())?,
        Format::Csv => report.write_csv(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn summarize(report: &PowerReport) {
    let inferior: Vec<String> = report.inferior_set.iter().map(ToString::to_string).collect();
    eprintln!(
        "best EDTR {}; inferior set {{{}}}; target power {:.2}",
        report.best,
        inferior.join(", "),
        report.target_power
    );
    match report.recommended_n {
        Some(n) => eprintln!("recommended n: {n}"),
        None => eprintln!("target power not reached on the grid"),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let design = load_design(&args.design)?;
    let eta = load_eta(&args.eta, Some(&design)).with_context(|| format!("loading eta `{}`", args.eta))?;
    let seed = resolve_seed(args.seed);
    let subjects = simulate_subjects(&eta, args.n, seed)?;
    let mut out = open_output(&args.out)?;
    write_subjects(&mut out, &subjects)?;
    out.flush()?;
    Ok(())
}
