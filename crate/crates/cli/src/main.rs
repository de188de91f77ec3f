//! `modulus-est` command line.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on usage or input errors.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use modulus_est::bench::{self, BenchConfig, BenchDistribution, EstimatorKind};
use modulus_est::distributions::default_families;
use modulus_est::fast_estimator::estimate_values;
use modulus_est::plot::{render_svg, Statistic};
use modulus_est::samples::read_values;
use modulus_est::tournament::{shuffle_draws, tournament_report, TournamentConfig};
use modulus_est::verify::{self, VerifyReport};
use modulus_est::DensityModel;

#[derive(Parser)]
#[command(
    name = "modulus-est",
    version,
    about = "Location estimation for symmetric log-concave mixtures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parameter-free location estimate of a sample file.
    Estimate(EstimateArgs),
    /// Known-shape tournament estimate.
    Tournament(TournamentArgs),
    /// Draw a seeded sample file from a model.
    Sample(SampleArgs),
    /// Monte-Carlo error benchmark, written as CSV plus a summary JSON.
    Bench(BenchArgs),
    /// Run a self-check suite and print its JSON report.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Render a benchmark CSV as a log-log SVG chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Sample file, one value per line; `-` reads stdin.
    #[arg(long, short)]
    input: String,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
    /// Compute in single precision.
    #[arg(long)]
    f32: bool,
}

#[derive(Args)]
struct TournamentArgs {
    /// Model as inline JSON, a JSON file, or a default family name.
    #[arg(long, short)]
    model: String,
    /// Sample file; `-` reads stdin.
    #[arg(long, short)]
    input: String,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    c_test: f64,
    /// Keep only candidates near the mode quantile.
    #[arg(long)]
    prune: bool,
    #[arg(long, default_value_t = 4.0)]
    prune_window_mult: f64,
    /// Seed of the shuffle applied to the input before splitting it.
    #[arg(long, default_value_t = 0)]
    shuffle_seed: u64,
    /// Use the file order as draw order instead of shuffling.
    #[arg(long)]
    keep_order: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SampleArgs {
    /// Model as inline JSON, a JSON file, or a default family name.
    #[arg(long, short)]
    model: String,
    #[arg(long, short)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shift added to every draw.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    shift: f64,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    estimator: Option<String>,
    /// Comma-separated default family names.
    #[arg(long, value_delimiter = ',')]
    distributions: Option<Vec<String>>,
    /// Comma-separated ascending sample sizes.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Record wall-clock runtimes (makes the CSV non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Hellinger engine checks.
    Hellinger {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Sweep-line bounds against exhaustive enumeration.
    Sweepline {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Hard-instance constructions.
    Lowerbound {
        #[arg(long, default_value_t = 0.125)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Tournament pieces and candidate coverage.
    Tournament {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StatArg {
    Mean,
    Median,
}

#[derive(Args)]
struct PlotArgs {
    /// Benchmark CSV.
    #[arg(long, short)]
    input: PathBuf,
    /// SVG destination.
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = StatArg::Mean)]
    stat: StatArg,
}

fn open_input(path: &str) -> Result<Box<dyn BufRead>> {
    if path == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let f = fs::File::open(path).with_context(|| format!("cannot open {path}"))?;
        Ok(Box::new(BufReader::new(f)))
    }
}

fn read_input(path: &str) -> Result<Vec<f64>> {
    let (values, _) = read_values(open_input(path)?).with_context(|| format!("reading {path}"))?;
    if values.is_empty() {
        bail!("{path} holds no samples");
    }
    Ok(values)
}

fn parse_model(arg: &str) -> Result<DensityModel> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).context("parsing inline model JSON");
    }
    if let Some((_, m)) = default_families().into_iter().find(|(n, _)| n == arg) {
        return Ok(m);
    }
    let path = Path::new(arg);
    if path.exists() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        return serde_json::from_str(&text).with_context(|| format!("parsing model JSON in {arg}"));
    }
    let names: Vec<String> = default_families().into_iter().map(|(n, _)| n).collect();
    bail!(
        "'{arg}' is not model JSON, a file or a family name ({})",
        names.join(", ")
    )
}

fn run_estimate(a: EstimateArgs) -> Result<ExitCode> {
    let values = read_input(&a.input)?;
    let mut out = io::stdout().lock();
    if a.f32 {
        let r = estimate_values(values.into_iter().map(|v| v as f32).collect())?;
        if a.json {
            writeln!(out, "{}", serde_json::to_string_pretty(&r.to_json())?)?;
        } else {
            writeln!(out, "{}", r.mu_hat)?;
        }
    } else {
        let r = estimate_values(values)?;
        if a.json {
            writeln!(out, "{}", serde_json::to_string_pretty(&r.to_json())?)?;
        } else {
            writeln!(out, "{}", r.mu_hat)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_tournament(a: TournamentArgs) -> Result<ExitCode> {
    let model = parse_model(&a.model)?;
    let mut draws = read_input(&a.input)?;
    if !a.keep_order {
        shuffle_draws(&mut draws, a.shuffle_seed);
    }
    let cfg = TournamentConfig {
        c_test: a.c_test,
        delta: a.delta,
        prune_candidates: a.prune,
        prune_window_mult: a.prune_window_mult,
    };
    cfg.validate()?;
    if !cfg.sample_size_adequate(draws.len()) {
        eprintln!(
            "warning: n = {} is below the recommended sqrt(n) >= 6 ln(2/delta)",
            draws.len()
        );
    }
    let r = tournament_report(&model, &draws, &cfg)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&r)?);
    } else {
        println!("{}", r.mu_hat);
    }
    Ok(ExitCode::SUCCESS)
}

fn run_sample(a: SampleArgs) -> Result<ExitCode> {
    let model = parse_model(&a.model)?.shift(a.shift);
    let set = model.sample(a.n, a.seed)?;
    match a.output {
        Some(path) => {
            let f = fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
            set.write_text(io::BufWriter::new(f))?;
        }
        None => set.write_text(io::stdout().lock())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn run_bench(a: BenchArgs) -> Result<ExitCode> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<BenchConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => BenchConfig::default(),
    };
    if let Some(e) = &a.estimator {
        cfg.estimator = e.parse::<EstimatorKind>()?;
    }
    if let Some(names) = a.distributions {
        cfg.distributions = names.iter().map(|n| BenchDistribution::named(n)).collect();
    }
    if let Some(g) = a.n_grid {
        cfg.n_grid = g;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.base_seed {
        cfg.base_seed = s;
    }
    if a.output.is_some() {
        cfg.output_path = a.output;
    }
    cfg.timing |= a.timing;
    cfg.validate()?;
    let outcome = bench::run_bench(&cfg)?;
    if cfg.output_path.is_none() {
        print!("{}", bench::to_csv(&outcome.rows));
    }
    for c in &outcome.summary {
        eprintln!(
            "{} n={} {}: mean {:.3e}, median {:.3e}",
            c.distribution, c.n, c.estimator, c.mean_error, c.median_error
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn report_exit(r: VerifyReport) -> Result<ExitCode> {
    println!("{}", serde_json::to_string_pretty(&r)?);
    for c in r.failed_checks() {
        eprintln!(
            "FAILED {}: measured {} against limit {} ({})",
            c.name, c.measured, c.limit, c.detail
        );
    }
    Ok(if r.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_verify(v: VerifyCommand) -> Result<ExitCode> {
    let report = match v {
        VerifyCommand::Hellinger { seed } => verify::verify_hellinger(seed)?,
        VerifyCommand::Sweepline { cases, seed } => verify::verify_sweepline(cases, seed)?,
        VerifyCommand::Lowerbound { eps, seed } => verify::verify_lowerbound(eps, seed)?,
        VerifyCommand::Tournament { seed } => verify::verify_tournament(seed)?,
    };
    report_exit(report)
}

fn run_plot(a: PlotArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let rows = bench::parse_csv(&text)?;
    let stat = match a.stat {
        StatArg::Mean => Statistic::Mean,
        StatArg::Median => Statistic::Median,
    };
    let svg = render_svg(&rows, stat)?;
    fs::write(&a.output, svg).with_context(|| format!("writing {}", a.output.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // --help and --version land here too, with exit code 0
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => run_estimate(a),
        Command::Tournament(a) => run_tournament(a),
        Command::Sample(a) => run_sample(a),
        Command::Bench(a) => run_bench(a),
        Command::Verify(v) => run_verify(v),
        Command::Plot(a) => run_plot(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
