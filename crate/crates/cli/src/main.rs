use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gqcrb_cli::{
    cmd_list_scenarios, cmd_oracle_check, cmd_qfi, cmd_sweep, emit, CliError, CommandName, Format, OracleKnobs,
    Outcome, RunConfig,
};
use gqcrb_core::sweep::Preset;
use gqcrb_fock::compare::Tolerance;

/// Quantum Fisher information and Cramér–Rao bounds for Gaussian states.
#[derive(Parser)]
#[command(name = "gqcrb", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fisher matrices, bounds and attainability matrix of one scenario point (JSON).
    Qfi {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate a parameter sweep or a figure preset.
    Sweep {
        config: Option<PathBuf>,
        /// fig1, fig2a, fig2b, fig3a or fig3b
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Compare the engine against the truncated Fock-space oracle.
    OracleCheck {
        config: PathBuf,
        /// Fock levels per mode.
        #[arg(long, default_value_t = gqcrb_cli::DEFAULT_ORACLE_CUTOFF)]
        cutoff: usize,
        #[arg(long, default_value_t = Tolerance::default().atol)]
        atol: f64,
        #[arg(long, default_value_t = Tolerance::default().rtol)]
        rtol: f64,
        /// Largest population allowed to leak out of the truncated space.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scenario names, their parameters, and the presets.
    ListScenarios,
    /// Run whatever the config's `command` field names.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn with_overrides(mut config: RunConfig, out: Option<PathBuf>, format: Option<Format>) -> RunConfig {
    if out.is_some() {
        config.output = out;
    }
    if format.is_some() {
        config.format = format;
    }
    config
}

fn dispatch(config: &RunConfig, command: CommandName) -> Result<Outcome, CliError> {
    match command {
        CommandName::Qfi => cmd_qfi(config),
        CommandName::Sweep => cmd_sweep(config),
        CommandName::OracleCheck => cmd_oracle_check(config, OracleKnobs::default()),
        CommandName::ListScenarios => Ok(cmd_list_scenarios()),
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let (config, outcome) = match cli.command {
        Cmd::Qfi { config, out } => {
            let config = with_overrides(RunConfig::load(&config)?, out, None);
            let outcome = cmd_qfi(&config)?;
            (config, outcome)
        }
        Cmd::Sweep { config, preset, out, format } => {
            let mut base = match config {
                Some(path) => RunConfig::load(&path)?,
                None => RunConfig::default(),
            };
            if let Some(name) = preset {
                if base.preset.is_some() || base.scenario.is_some() {
                    return Err(CliError::Config("--preset given together with a config that sets its own".into()));
                }
                base.preset = Some(Preset::parse(&name).map_err(|e| CliError::Config(e.to_string()))?);
            }
            let config = with_overrides(base, out, format);
            let outcome = cmd_sweep(&config)?;
            (config, outcome)
        }
        Cmd::OracleCheck { config, cutoff, atol, rtol, budget, out } => {
            let config = with_overrides(RunConfig::load(&config)?, out, None);
            let knobs = OracleKnobs { cutoff, budget, tolerance: Tolerance { atol, rtol } };
            let outcome = cmd_oracle_check(&config, knobs)?;
            (config, outcome)
        }
        Cmd::ListScenarios => (RunConfig::default(), cmd_list_scenarios()),
        Cmd::Run { config, out, format } => {
            let config = with_overrides(RunConfig::load(&config)?, out, format);
            let command = config.command.ok_or_else(|| CliError::Config("'run' needs a 'command' field".into()))?;
            let outcome = dispatch(&config, command)?;
            (config, outcome)
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    emit(&outcome.body, config.output.as_deref())?;
    Ok(outcome)
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
        Ok(outcome) => ExitCode::from(outcome.exit_code as u8),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
