//! `mfcs`: run feedback-loop conformal experiments and weight checks.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfcs_core::report::{write_failures, write_records, write_summary, RunManifest};
use mfcs_core::sim::{
    aggregate, run_seeds_with, verify_weights, ExperimentConfig, ExperimentContext, Mode,
    SeedRange,
};
use mfcs_core::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "mfcs", version, about = "Conformal prediction under feedback-loop data collection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the design experiment described by a config file.
    Design(RunArgs),
    /// Run the active-learning experiment described by a config file.
    ActiveLearning(RunArgs),
    /// Compare brute-force, exact and depth-d weights on random instances.
    VerifyWeights(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, env = "MFCS_WORKERS")]
    parallelism: Option<usize>,
    /// Override the config's seed range, as START..END.
    #[arg(long)]
    seeds: Option<SeedRange>,
    /// Use the bounded query proposal.
    #[arg(long)]
    bounded: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    t: usize,
    /// Depths to time, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    d: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Parameter(_) | Error::Io(_) | Error::Complexity { .. } => {
            EXIT_USAGE
        }
        _ => EXIT_FAILURE,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}

fn load_config(args: &RunArgs, mode: Mode) -> Result<ExperimentConfig, Error> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        Error::Io(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let mut cfg = ExperimentConfig::from_toml_str(&text)?;
    if cfg.experiment.mode != mode {
        return Err(Error::Config {
            field: "experiment.mode".into(),
            message: format!("this subcommand expects mode {mode:?}"),
        });
    }
    if let Some(seeds) = args.seeds {
        cfg.experiment.seeds = seeds;
    }
    if args.bounded {
        cfg.experiment.bounded = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn run(args: RunArgs, mode: Mode) -> ExitCode {
    let started = now();
    let cfg = match load_config(&args, mode) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let threads = args
        .parallelism
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let seeds = cfg.experiment.seeds;
    let hash = cfg.hash();
    let ctx = match ExperimentContext::new(cfg) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Err(e) = fs::create_dir_all(&args.out) {
        return fail(&Error::Io(format!("cannot create {}: {e}", args.out.display())));
    }
    let output = match run_seeds_with(&ctx, seeds, threads, |seed, ok| {
        eprintln!("seed {seed} {}", if ok { "ok" } else { "failed" });
    }) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };

    let mut outputs = vec!["records.csv".to_string(), "summary.csv".to_string()];
    let written = (|| -> Result<(), Error> {
        write_records(create(&args.out.join("records.csv"))?, &output.records)?;
        write_summary(
            create(&args.out.join("summary.csv"))?,
            &aggregate(&output.records),
        )?;
        if !output.failures.is_empty() {
            outputs.push("errors.csv".into());
            write_failures(create(&args.out.join("errors.csv"))?, &output.failures)?;
        }
        outputs.push("manifest.json".into());
        let manifest = RunManifest {
            config_hash: hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: seeds.to_string(),
            started,
            finished: now(),
            outputs: outputs.clone(),
            failed_seeds: output.failures.iter().map(|f| f.seed).collect(),
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(args.out.join("manifest.json"), json + "\n")?;
        Ok(())
    })();
    if let Err(e) = written {
        return fail(&e);
    }
    for f in &output.failures {
        eprintln!("error: seed {}: {}", f.seed, f.error);
    }
    if output.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    }
}

fn verify(args: VerifyArgs) -> ExitCode {
    const TOLERANCE: f64 = 1e-9;
    let report = match verify_weights(args.n, args.t, &args.d, args.trials, args.seed) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    println!(
        "n={} t={} trials={} max|brute-exact|={:.3e} max|d{}-exact|={:.3e}",
        args.n, args.t, report.trials, report.brute_vs_exact, args.t, report.dstep_vs_exact
    );
    println!("d,calls,expected_calls,wall_ms,max_deviation_from_exact");
    for row in &report.depths {
        println!(
            "{},{},{},{:.3},{:.3e}",
            row.d, row.evaluator_calls, row.expected_calls, row.wall_ms, row.max_deviation
        );
    }
    if report.passed(TOLERANCE) {
        println!("PASS");
        ExitCode::SUCCESS
    } else {
        println!("FAIL: deviation above {TOLERANCE:e}");
        ExitCode::from(EXIT_FAILURE)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Design(a) => run(a, Mode::Design),
        Command::ActiveLearning(a) => run(a, Mode::ActiveLearning),
        Command::VerifyWeights(a) => verify(a),
    }
}
