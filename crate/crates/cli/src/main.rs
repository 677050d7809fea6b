use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nung_cli::commands::{cmd_beam, cmd_decohere, cmd_omega, cmd_slc};
use nung_cli::config::RunConfig;
use nung_cli::CliError;

/// Gravity-mediated signalling through a superposed ball: phase
/// frequencies, decoherence and beam-deflection simulations.
#[derive(Parser, Debug)]
#[command(name = "nung", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Phase frequencies of the two sites and the beat-cycle count.
    Omega,
    /// Physical-state coherence over time and its transit average.
    Decohere,
    /// Trace one beam batch past the ball.
    Beam,
    /// Run both signalling protocols and report the channel capacity.
    Slc,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Omega => "omega",
            Command::Decohere => "decohere",
            Command::Beam => "beam",
            Command::Slc => "slc",
        }
    }
}

/// Flags override the config file, which overrides the defaults.
#[derive(Args, Debug)]
struct Overrides {
    /// `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// json, csv or both.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Ball mass (kg).
    #[arg(long, global = true)]
    mass: Option<f64>,
    /// Ball radius (m).
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Half the site separation (m).
    #[arg(long, global = true)]
    dx: Option<f64>,
    /// Beam speed (m/s).
    #[arg(long, global = true)]
    speed: Option<f64>,
    /// Multiplier on Newton's constant.
    #[arg(long, global = true, allow_negative_numbers = true)]
    g_scale: Option<f64>,
    /// Beam particles per batch.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Beat frequency override (rad/s).
    #[arg(long, global = true, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Averaging window (s).
    #[arg(long, global = true)]
    transit_time: Option<f64>,
    /// Born weight of the `+` site.
    #[arg(long, global = true)]
    p_plus: Option<f64>,
    /// unmeasured, collapsed-plus, collapsed-minus or decohered.
    #[arg(long, global = true)]
    regime: Option<String>,
    /// Reflect the experiment through x = 0.
    #[arg(long, global = true)]
    mirrored: bool,
    /// Extra `key=value` assignment; may repeat.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn build_config(opts: &Overrides, command: Command) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &opts.config {
        cfg.apply_file(path)?;
    }
    let mut put = |key: &str, value: Option<String>| match value {
        Some(v) => cfg.set(key, &v),
        None => Ok(()),
    };
    put("seed", opts.seed.map(|v| v.to_string()))?;
    put("out", opts.out.as_ref().map(|p| p.display().to_string()))?;
    put("format", opts.format.clone())?;
    put("mass", opts.mass.map(|v| format!("{v:?}")))?;
    put("radius", opts.radius.map(|v| format!("{v:?}")))?;
    put("dx", opts.dx.map(|v| format!("{v:?}")))?;
    put("speed", opts.speed.map(|v| format!("{v:?}")))?;
    put("g_scale", opts.g_scale.map(|v| format!("{v:?}")))?;
    put("n", opts.n.map(|v| v.to_string()))?;
    put("omega_beat", opts.omega.map(|v| format!("{v:?}")))?;
    put("transit_time", opts.transit_time.map(|v| format!("{v:?}")))?;
    put("p_plus", opts.p_plus.map(|v| format!("{v:?}")))?;
    put("regime", opts.regime.clone())?;
    if opts.mirrored {
        put("mirrored", Some("true".into()))?;
    }
    for kv in &opts.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.resolve(command.name())
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = build_config(&cli.opts, cli.command)?;
    match cli.command {
        Command::Omega => cmd_omega(&cfg),
        Command::Decohere => cmd_decohere(&cfg),
        Command::Beam => cmd_beam(&cfg),
        Command::Slc => cmd_slc(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
