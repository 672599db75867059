use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wpa_cli::{run, CliError, Experiment, ExperimentConfig, RunContext, RunManifest};

/// Weighted polynomial approximation experiments.
///
/// Parameters are given as `key=value`; a JSON config file (`--config`)
/// overrides them. Artifacts and a run manifest go to `--out-dir`.
#[derive(Parser)]
#[command(name = "wpa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Parameters as key=value
    params: Vec<String>,
    /// JSON config file; wins over key=value parameters
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "wpa-out")]
    out_dir: PathBuf,
    /// Skip the SVG figure
    #[arg(long)]
    no_svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted equilibrium measure on a discretized compact
    Equilibrium(RunArgs),
    /// Weighted Leja (Fekete) sequence and its norms
    Leja(RunArgs),
    /// Level set of the segment example's level function
    Levelset(RunArgs),
    /// Interpolation error decay and its geometric rate
    Rate(RunArgs),
    /// Taylor-section deficits against their asymptotics
    SzegoDeficit(RunArgs),
    /// Extremal norms of the weighted sections on the right loop
    SzegoNorms(RunArgs),
    /// Zeros of the Taylor section with the right loop
    SzegoZeros(RunArgs),
    /// Weighted polynomials approximating z^k
    Monomial(RunArgs),
    /// Polynomial-hull separation certificate
    HullCertify(RunArgs),
    /// Perturbed-ball residual checks
    HullBall(RunArgs),
    /// Re-run the configuration recorded in a manifest
    Rerun {
        manifest: PathBuf,
        #[arg(long, default_value = "wpa-out")]
        out_dir: PathBuf,
        #[arg(long)]
        no_svg: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            eprintln!("{}", CliError::Usage(e.to_string().trim().to_string()).record(None));
            return ExitCode::from(2);
        }
    };
    let (experiment, resolved) = prepare(cli.command);
    let outcome = resolved.and_then(|(cfg, ctx)| run(&cfg, &ctx));
    match outcome {
        Ok(m) => {
            println!("{}", serde_json::json!({ "status": "ok", "experiment": m.config.experiment, "outputs": m.outputs, "summary": m.summary }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record(experiment));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn prepare(cmd: Command) -> (Option<Experiment>, Result<(ExperimentConfig, RunContext), CliError>) {
    let (experiment, args) = match cmd {
        Command::Rerun { manifest, out_dir, no_svg } => {
            let resolved = RunManifest::read(&manifest).map(|m| {
                let mut ctx = RunContext::new(out_dir);
                ctx.svg = !no_svg;
                (m.config, ctx)
            });
            return (resolved.as_ref().ok().map(|(c, _)| c.experiment), resolved);
        }
        Command::Equilibrium(a) => (Experiment::Equilibrium, a),
        Command::Leja(a) => (Experiment::Leja, a),
        Command::Levelset(a) => (Experiment::Levelset, a),
        Command::Rate(a) => (Experiment::Rate, a),
        Command::SzegoDeficit(a) => (Experiment::SzegoDeficit, a),
        Command::SzegoNorms(a) => (Experiment::SzegoNorms, a),
        Command::SzegoZeros(a) => (Experiment::SzegoZeros, a),
        Command::Monomial(a) => (Experiment::Monomial, a),
        Command::HullCertify(a) => (Experiment::HullCertify, a),
        Command::HullBall(a) => (Experiment::HullBall, a),
    };
    let resolved = ExperimentConfig::resolve(experiment, &args.params, args.config.as_deref()).map(|cfg| {
        let mut ctx = RunContext::new(args.out_dir);
        ctx.svg = !args.no_svg;
        (cfg, ctx)
    });
    (Some(experiment), resolved)
}
