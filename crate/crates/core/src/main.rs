use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nondet_optics::experiment::{Experiment, ExperimentConfig, EVAL_FILE};
use nondet_optics::interferometer::MeshParams;
use nondet_optics::Error;

#[derive(Parser)]
#[command(
    version,
    about = "Train interferometers for nondeterministic state preparation under biased detectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML). Defaults reproduce the CZ resource-state run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for bootstrap starts and sweep rows.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Find ideal-detector angles for the configured gate.
    Bootstrap {
        #[command(flatten)]
        common: Common,
    },
    /// Train from an angle file under the configured detector.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        angles: PathBuf,
    },
    /// Train once per S* in the sweep list, all from the same start.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Start angles; bootstraps when omitted.
        #[arg(long)]
        angles: Option<PathBuf>,
    },
    /// Evaluate loss, fidelity and success at the given angles.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        angles: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::BootstrapFailed { .. } => 2,
        Error::MalformedFile { .. } => 3,
        _ => 1,
    }
}

fn prepare(common: &Common) -> Result<(Experiment, PathBuf), Error> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.apply_seed(seed);
    }
    let out = match &common.out {
        Some(dir) => dir.clone(),
        None => config.base_dir.join(&config.output_dir),
    };
    std::fs::create_dir_all(&out)?;
    Ok((config.build()?, out))
}

fn bootstrap(exp: &Experiment, out: &Path) -> Result<MeshParams, Error> {
    match exp.run_bootstrap(out) {
        Ok((params, report)) => {
            println!(
                "bootstrap ok: F = {:.12}, S = {:.9} (attempt {})",
                report.fidelity,
                report.success,
                report.attempt.unwrap_or_default()
            );
            Ok(params)
        }
        Err(e) => {
            if let Error::BootstrapFailed {
                fidelity, success, ..
            } = &e
            {
                println!("bootstrap failed: best F = {fidelity:.12}, S = {success:.9}");
            }
            Err(e)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Bootstrap { common } => {
            let (exp, out) = prepare(&common)?;
            bootstrap(&exp, &out)?;
        }
        Command::Train { common, angles } => {
            let (exp, out) = prepare(&common)?;
            let initial = exp.load_angles(&angles)?;
            let outcome = exp.run_train(initial, &out)?;
            println!("{}", outcome.summary.line());
        }
        Command::Sweep { common, angles } => {
            let (exp, out) = prepare(&common)?;
            if exp.config.sweep.s_star.is_empty() {
                return Err(Error::Config("sweep.s_star is empty".into()));
            }
            let initial = match angles {
                Some(path) => exp.load_angles(&path)?,
                None => bootstrap(&exp, &out)?,
            };
            let result = exp.run_sweep(&initial, &out)?;
            let report = result.report();
            println!(
                "baseline: F = {:.9}, S = {:.9}",
                report.baseline_fidelity, report.baseline_success
            );
            for row in result.completed() {
                println!(
                    "S* = {:.5}: F = {:.9}, S = {:.9}",
                    row.s_star, row.final_fidelity, row.final_success
                );
            }
            if !report.near_unit_fidelity_reached {
                println!(
                    "note: highest fidelity {:.6} (at S* = {:.5}) is below {}",
                    report.max_fidelity,
                    report.max_fidelity_s_star,
                    report.near_unit_fidelity_target
                );
            }
            if report.failed_rows > 0 {
                eprintln!("{} sweep row(s) failed; see the CSV", report.failed_rows);
            }
        }
        Command::Eval { common, angles } => {
            let (exp, out) = prepare(&common)?;
            let params = exp.load_angles(&angles)?;
            let report = exp.evaluate(&params, &exp.config.hyper)?;
            let json = serde_json::json!({
                "loss": report.loss,
                "fidelity": report.fidelity,
                "success": report.success,
            });
            let text = serde_json::to_string_pretty(&json).expect("json value serializes");
            nondet_optics::experiment::write_atomic(&out.join(EVAL_FILE), &(text.clone() + "\n"))?;
            println!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
