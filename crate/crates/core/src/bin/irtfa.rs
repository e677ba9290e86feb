use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use irtfa::commands::{self, Direction, FitCommand, ScoreKind, SimulateCommand};
use irtfa::equivalence::CheckKind;
use irtfa::io::Dichotomize;
use irtfa::sampler::{Scan, DEFAULT_BURNIN, DEFAULT_CHAINS, DEFAULT_SAMPLES};
use irtfa::{Link, ModelSpec, Rescale};

#[derive(Parser)]
#[command(name = "irtfa", version, about = "Four-parameter FA/IRT models for binary item data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RescaleArg {
    ToNormal,
    ToLogistic,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and write items, persons, traces and a manifest.
    #[command(group(ArgGroup::new("rule").args(["dichotomize_threshold", "zero_categories"])))]
    Fit {
        data: PathBuf,
        #[arg(long, default_value = "4pl")]
        model: ModelSpec,
        #[arg(long, default_value_t = DEFAULT_CHAINS)]
        chains: usize,
        #[arg(long, default_value_t = DEFAULT_BURNIN)]
        burnin: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        thin: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dichotomize_threshold: Option<f64>,
        /// Comma-separated categories scored 0.
        #[arg(long)]
        zero_categories: Option<String>,
        /// Comma-separated subset of ngni,ng,ni.
        #[arg(long, default_value = "ngni")]
        scores: String,
        #[arg(long)]
        pattern_average: bool,
        /// Write traces in the compact binary format.
        #[arg(long)]
        binary_traces: bool,
        #[arg(long, default_value = "collapsed")]
        scan: Scan,
    },
    /// Simulate responses from an item table.
    Simulate {
        #[arg(long)]
        items: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "logistic")]
        link: Link,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert item parameters between FA and IRT forms; CSV on stdout.
    Transform {
        items: PathBuf,
        #[arg(long)]
        direction: Direction,
        #[arg(long = "rescale-1.7", value_enum)]
        rescale: Option<RescaleArg>,
    },
    /// Check the FA/IRT equivalences on fuzzed parameters; JSON lines on stdout.
    Verify {
        #[arg(long, default_value = "conditional,marginal,lemma-a1,lemma-a2,lemma-a3")]
        checks: String,
        #[arg(long, default_value_t = 100)]
        fuzz: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Convergence diagnostics for a saved trace file.
    Diagnose {
        traces: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two item estimate tables.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> irtfa::Result<bool> {
    match command {
        Command::Fit {
            data,
            model,
            chains,
            burnin,
            samples,
            thin,
            seed,
            out,
            dichotomize_threshold,
            zero_categories,
            scores,
            pattern_average,
            binary_traces,
            scan,
        } => {
            let mut cmd = FitCommand::new(data, out);
            cmd.config = commands::sampler_config(model, chains, burnin, samples, thin, seed, scan)?;
            cmd.dichotomize = match (dichotomize_threshold, zero_categories) {
                (Some(t), _) => Some(Dichotomize::Threshold(t)),
                (None, Some(list)) => Some(Dichotomize::ZeroCategories(
                    list.split(',').map(|s| s.trim().to_string()).collect(),
                )),
                (None, None) => None,
            };
            cmd.scores = commands::parse_list::<ScoreKind>(&scores)?;
            cmd.pattern_average = pattern_average;
            cmd.binary_traces = binary_traces;
            let outcome = commands::run_fit(&cmd)?;
            let flagged = &outcome.result.diagnostics.flagged;
            eprintln!(
                "fit {} persons x {} items, max rhat {:.3}, {} flagged",
                outcome.result.theta.len(),
                outcome.result.n_items(),
                outcome.result.diagnostics.max_rhat().unwrap_or(f64::NAN),
                flagged.len()
            );
            Ok(true)
        }
        Command::Simulate { items, n, link, seed, out } => {
            commands::run_simulate(&SimulateCommand { items, n, link, seed, out })?;
            Ok(true)
        }
        Command::Transform { items, direction, rescale } => {
            let rescale = rescale.map(|r| match r {
                RescaleArg::ToNormal => Rescale::LogisticToNormal,
                RescaleArg::ToLogistic => Rescale::NormalToLogistic,
            });
            print!("{}", commands::run_transform(&items, direction, rescale)?);
            Ok(true)
        }
        Command::Verify { checks, fuzz, seed } => {
            let checks = commands::parse_list::<CheckKind>(&checks)?;
            let reports = commands::run_verify(&checks, fuzz, seed)?;
            for r in &reports {
                println!("{}", serde_json::to_string(r)?);
            }
            Ok(reports.iter().all(|r| r.passed))
        }
        Command::Diagnose { traces, out } => {
            let report = commands::run_diagnose(&traces, &out)?;
            eprintln!("{} parameters, {} flagged", report.parameters.len(), report.flagged.len());
            Ok(true)
        }
        Command::Compare { a, b, out } => {
            let cmp = commands::run_compare(&a, &b, &out)?;
            for (param, mse) in &cmp.mse {
                println!("mse {param} {mse:.6}");
            }
            Ok(true)
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("error: usage: {}", one_line(first.trim_start_matches("error:")));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), one_line(&e.to_string()));
            ExitCode::from(1)
        }
    }
}
