//! Library side of the `gqcrb` executable: run configurations and the
//! subcommand implementations, kept out of `main` so they can be tested
//! in-process.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gqcrb_core::logderiv::analyze;
use gqcrb_core::scenarios::{ScenarioConfig, ScenarioName};
use gqcrb_core::sweep::{format_sig9, preset_table, run_sweep, FlavorChoice, Preset, SweepSpec, Table};
use gqcrb_fock::compare::{compare_family, Comparison, Tolerance};
use gqcrb_fock::{FockOptions, OracleError};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_ORACLE_CUTOFF: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Qfi,
    Sweep,
    OracleCheck,
    ListScenarios,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Qfi => "qfi",
            CommandName::Sweep => "sweep",
            CommandName::OracleCheck => "oracle-check",
            CommandName::ListScenarios => "list-scenarios",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Contents of a run configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub flavor: FlavorChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    /// Parses the JSON text. Parameter values are checked later, by [`RunConfig::validate`].
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Read { path: path.to_path_buf(), source: e })?;
        RunConfig::from_json(&text)
    }

    /// Checks that the sections `command` needs are present and their values are valid.
    ///
    /// Missing or conflicting sections are configuration errors; out-of-range values
    /// are domain errors.
    pub fn validate(&self, command: CommandName) -> Result<(), CliError> {
        if let Some(declared) = self.command {
            if declared != command {
                return Err(CliError::Config(format!(
                    "config declares command '{}' but '{}' was invoked",
                    declared.as_str(),
                    command.as_str()
                )));
            }
        }
        match command {
            CommandName::ListScenarios => Ok(()),
            CommandName::Qfi | CommandName::OracleCheck => {
                if self.format == Some(Format::Csv) && command == CommandName::Qfi {
                    return Err(CliError::Config("qfi writes JSON only".into()));
                }
                self.scenario()?.validate()?;
                Ok(())
            }
            CommandName::Sweep => {
                match (self.preset, &self.scenario, &self.sweep) {
                    (Some(_), None, None) => {}
                    (Some(_), _, _) => {
                        return Err(CliError::Config("a preset cannot be combined with scenario or sweep".into()))
                    }
                    (None, Some(scenario), Some(sweep)) => {
                        scenario.validate()?;
                        sweep.validate(scenario.name)?;
                    }
                    (None, _, _) => {
                        return Err(CliError::Config("sweep needs either a preset or both scenario and sweep".into()))
                    }
                }
                Ok(())
            }
        }
    }

    fn scenario(&self) -> Result<&ScenarioConfig, CliError> {
        self.scenario.as_ref().ok_or_else(|| CliError::Config("missing 'scenario' section".into()))
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("malformed config: {0}")]
    Config(String),

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error("no sweep point could be computed")]
    NoPoints,

    #[error(transparent)]
    Engine(#[from] gqcrb_core::Error),

    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "unreadable-config",
            CliError::Config(_) => "malformed-config",
            CliError::Write { .. } => "write-failed",
            CliError::NoPoints => "no-points-computed",
            CliError::Engine(e) => e.kind(),
            CliError::Oracle(e) => e.kind(),
        }
    }

    /// 1 for configuration problems, 2 for everything that fails after the config was read.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Config(_) => 1,
            _ => 2,
        }
    }
}

/// What a command produced: the main payload and any warnings for the diagnostic stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(body: String) -> Outcome {
        Outcome { body, warnings: Vec::new(), exit_code: 0 }
    }
}

/// Serialized `QfiReport` of the configured scenario at its configured point.
pub fn cmd_qfi(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate(CommandName::Qfi)?;
    let (family, theta) = config.scenario()?.family()?;
    let report = analyze(&family, &theta)?;
    let body = serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
    Ok(Outcome::ok(body + "\n"))
}

/// Sweep table in the requested format, with failed points as empty cells.
pub fn cmd_sweep(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate(CommandName::Sweep)?;
    let table = match config.preset {
        Some(preset) => preset_table(preset),
        None => run_sweep(config.scenario()?, config.sweep.as_ref().expect("validated"), config.flavor)?,
    };
    if table.computed_rows() == 0 {
        return Err(CliError::NoPoints);
    }
    let body = match config.format.unwrap_or_default() {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json() + "\n",
    };
    Ok(Outcome { body, warnings: sweep_warnings(&table), exit_code: 0 })
}

fn sweep_warnings(table: &Table) -> Vec<String> {
    let mut out = table.warnings.clone();
    let incomplete = table.rows.len() - table.complete_rows();
    if incomplete > 0 {
        out.push(format!("{incomplete} of {} rows have empty cells", table.rows.len()));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleKnobs {
    pub cutoff: usize,
    pub budget: Option<f64>,
    pub tolerance: Tolerance,
}

impl Default for OracleKnobs {
    fn default() -> Self {
        OracleKnobs { cutoff: DEFAULT_ORACLE_CUTOFF, budget: None, tolerance: Tolerance::default() }
    }
}

/// Engine against the Fock oracle, one line per matrix entry.
///
/// Exits 0 when every entry is within tolerance and 1 otherwise.
pub fn cmd_oracle_check(config: &RunConfig, knobs: OracleKnobs) -> Result<Outcome, CliError> {
    config.validate(CommandName::OracleCheck)?;
    let (family, theta) = config.scenario()?.family()?;
    let mut options = FockOptions::new(knobs.cutoff);
    if let Some(budget) = knobs.budget {
        options = options.with_budget(budget);
    }
    let sld = config.flavor != FlavorChoice::Rld;
    let rld = config.flavor != FlavorChoice::Sld;
    let comparison = compare_family(&family, &theta, options, sld, rld, knobs.tolerance)?;
    let body = oracle_table(&comparison, knobs);
    Ok(Outcome { body, warnings: Vec::new(), exit_code: if comparison.all_within() { 0 } else { 1 } })
}

fn complex_cell(z: C64) -> String {
    if z.im == 0.0 {
        format_sig9(z.re)
    } else {
        format!("{}{:+}i", format_sig9(z.re), format_sig9(z.im).parse::<f64>().unwrap_or(z.im))
    }
}

fn oracle_table(comparison: &Comparison, knobs: OracleKnobs) -> String {
    let mut out = String::from("entry\tengine\toracle\tabs_gap\trel_gap\tstatus\n");
    for e in &comparison.entries {
        let _ = writeln!(
            out,
            "{}[{},{}]\t{}\t{}\t{}\t{}\t{}",
            e.which.as_str(),
            e.row,
            e.col,
            complex_cell(e.engine),
            complex_cell(e.oracle),
            format_sig9(e.abs_gap),
            format_sig9(e.rel_gap),
            if e.within { "ok" } else { "FAIL" }
        );
    }
    let _ = writeln!(
        out,
        "{}: cutoff {}, atol {}, rtol {}, max abs gap {}",
        if comparison.all_within() { "pass" } else { "fail" },
        knobs.cutoff,
        knobs.tolerance.atol,
        knobs.tolerance.rtol,
        format_sig9(comparison.max_abs_gap())
    );
    out
}

/// Scenario names with their estimated and accepted parameters, then the presets.
pub fn cmd_list_scenarios() -> Outcome {
    let mut out = String::new();
    for name in ScenarioName::ALL {
        let probes: Vec<String> = name
            .allowed_probes()
            .iter()
            .map(|p| serde_json::to_value(p).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
            .collect();
        let _ = writeln!(out, "{}", name.as_str());
        let _ = writeln!(out, "  estimates:  {}", name.estimated().join(", "));
        let _ = writeln!(out, "  parameters: {}", name.parameter_keys().join(", "));
        let _ = writeln!(out, "  probes:     {}", probes.join(", "));
    }
    out.push_str("presets\n");
    for preset in Preset::ALL {
        let _ = writeln!(out, "  {:<6} {}", preset.as_str(), preset.description());
    }
    Outcome::ok(out)
}

/// Writes `body` to `path`, or to stdout when there is no path.
pub fn emit(body: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Write { path: p.to_path_buf(), source: e }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Write { path: PathBuf::from("<stdout>"), source: e })
        }
    }
}
