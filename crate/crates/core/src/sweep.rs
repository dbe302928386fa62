//! Parameter sweeps and the figure-data presets.
//!
//! Points are evaluated on the rayon pool and collected in grid order, so the
//! output does not depend on scheduling. A failing point leaves empty cells and
//! a warning; it does not abort the sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logderiv::{analyze, QfiReport};
use crate::scenarios::{
    displacement_bounds_closed, phase_measurement_variance, Insertion, Probe, ScenarioConfig, ScenarioName,
};

/// Which Fisher flavor(s) a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlavorChoice {
    Sld,
    Rld,
    #[default]
    Both,
}

/// A uniform grid over one scenario parameter, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn validate(&self, scenario: ScenarioName) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Domain(format!("a sweep needs at least 2 steps, got {}", self.steps)));
        }
        if !(self.from.is_finite() && self.to.is_finite() && self.from < self.to) {
            return Err(Error::Domain(format!("sweep range must satisfy from < to, got [{}, {}]", self.from, self.to)));
        }
        if !scenario.parameter_keys().contains(&self.param.as_str()) {
            return Err(Error::Domain(format!(
                "'{}' is not a parameter of {}; accepted: {}",
                self.param,
                scenario.as_str(),
                scenario.parameter_keys().join(", ")
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        grid(self.from, self.to, self.steps)
    }
}

fn grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    let last = (steps - 1) as f64;
    (0..steps).map(|i| if i + 1 == steps { to } else { from + (to - from) * i as f64 / last }).collect()
}

fn stepped(from: f64, to: f64, step: f64) -> Vec<f64> {
    grid(from, to, ((to - from) / step).round() as usize + 1)
}

/// Named parameter sets of the published figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig1, Preset::Fig2a, Preset::Fig2b, Preset::Fig3a, Preset::Fig3b];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
        }
    }

    pub fn parse(name: &str) -> Result<Preset> {
        Preset::ALL.into_iter().find(|p| p.as_str() == name).ok_or_else(|| {
            Error::Domain(format!("unknown preset '{name}'; expected fig1, fig2a, fig2b, fig3a or fig3b"))
        })
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Fig1 => "phase sensitivity vs r; N=0.2, eps1=0.8, eps2=0.8/1.0",
            Preset::Fig2a => "displacement bounds vs r; eps1=0.9, eps2=1.0, nu_t=0.2, N=0",
            Preset::Fig2b => "displacement bounds vs r; eps1=eps2=0.9, nu_t=0.2, N=0",
            Preset::Fig3a => "damping/temperature bounds vs r; N=0.9, xi=0.5, lambda=0, nu_t=0",
            Preset::Fig3b => "squeeze/phase max(B_R, B_S) vs probe energy; s=1, phi=0, nu_t=0.1",
        }
    }
}

/// Sweep output: one row per grid point, `None` where the point failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub warnings: Vec<String>,
}

impl Table {
    /// Number of rows with every cell filled.
    pub fn complete_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.iter().all(Option::is_some)).count()
    }

    /// Number of rows with at least one computed value besides the abscissa.
    pub fn computed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.iter().skip(1).any(Option::is_some)).count()
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.map(format_sig9).unwrap_or_default()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialization cannot fail")
    }
}

/// Formats with 9 significant digits, fixed notation for moderate exponents.
pub fn format_sig9(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

struct Cell {
    values: Vec<Option<f64>>,
    warnings: Vec<String>,
}

impl Cell {
    fn new(width: usize) -> Cell {
        Cell { values: vec![None; width], warnings: Vec::new() }
    }

    fn put(&mut self, k: usize, label: &str, value: Result<f64>) {
        match value {
            Ok(v) => self.values[k] = Some(v),
            Err(e) => self.warnings.push(format!("{label}: {}: {e}", e.kind())),
        }
    }
}

fn run_rows<F>(columns: Vec<String>, abscissa: &[f64], eval: F) -> Table
where
    F: Fn(f64, &mut Cell) + Sync,
{
    let width = columns.len();
    let cells: Vec<Cell> = abscissa
        .par_iter()
        .map(|&x| {
            let mut cell = Cell::new(width);
            eval(x, &mut cell);
            cell
        })
        .collect();
    let mut rows = Vec::with_capacity(cells.len());
    let mut warnings = Vec::new();
    for cell in cells {
        rows.push(cell.values);
        warnings.extend(cell.warnings);
    }
    Table { columns, rows, warnings }
}

fn report(cfg: &ScenarioConfig) -> Result<QfiReport> {
    let (family, theta) = cfg.family()?;
    analyze(&family, &theta)
}

fn rld_bound(report: &QfiReport) -> Result<f64> {
    match (report.b_r, &report.rld_error) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e.clone()),
        (None, None) => Err(Error::InternalConsistency("RLD bound missing without a recorded cause".into())),
    }
}

fn rld_trace(report: &QfiReport) -> Result<f64> {
    match (&report.f_rld, &report.rld_error) {
        (Some(f), _) => Ok(f.trace().re),
        (None, Some(e)) => Err(e.clone()),
        (None, None) => Err(Error::InternalConsistency("RLD matrix missing without a recorded cause".into())),
    }
}

/// Sweeps one parameter of `base` and tabulates Fisher traces and bounds.
///
/// Phase scenarios add the measurement sensitivity `dphi2` at the configured phase;
/// displacement scenarios add the homodyne bound `B_M`.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec, flavor: FlavorChoice) -> Result<Table> {
    base.validate()?;
    spec.validate(base.name)?;
    let mut columns = vec![spec.param.clone()];
    let want_sld = flavor != FlavorChoice::Rld;
    let want_rld = flavor != FlavorChoice::Sld;
    if want_sld {
        columns.push("F_sld_trace".into());
    }
    if want_rld {
        columns.push("F_rld_trace".into());
    }
    if want_sld {
        columns.push("B_S".into());
    }
    if want_rld {
        columns.push("B_R".into());
    }
    match base.name {
        ScenarioName::PhaseTmsv => columns.push("dphi2".into()),
        ScenarioName::DisplacementPair => columns.push("B_M".into()),
        _ => {}
    }
    let names = columns.clone();
    let slot = |name: &str| names.iter().position(|c| c == name);

    Ok(run_rows(columns.clone(), &spec.points(), |x, cell| {
        cell.values[0] = Some(x);
        let cfg = base.clone().with(&spec.param, x);
        let label = format!("{}={}", spec.param, format_sig9(x));
        match report(&cfg) {
            Ok(rep) => {
                if let Some(k) = slot("F_sld_trace") {
                    cell.put(k, &label, Ok(rep.f_sld.trace()));
                }
                if let Some(k) = slot("B_S") {
                    cell.put(k, &label, Ok(rep.b_s));
                }
                if let Some(k) = slot("F_rld_trace") {
                    cell.put(k, &label, rld_trace(&rep));
                }
                if let Some(k) = slot("B_R") {
                    cell.put(k, &label, rld_bound(&rep));
                }
            }
            Err(e) => cell.warnings.push(format!("{label}: {}: {e}", e.kind())),
        }
        if let Some(k) = slot("dphi2") {
            let phi = cfg.parameters.get("phi").copied().unwrap_or(0.0);
            cell.put(k, &format!("{label} dphi2"), phase_measurement_variance(&cfg, phi));
        }
        if let Some(k) = slot("B_M") {
            cell.put(k, &format!("{label} B_M"), displacement_bounds_closed(&cfg).map(|b| b.b_m));
        }
    }))
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Evaluates a figure preset on its fixed grid.
pub fn preset_table(preset: Preset) -> Table {
    match preset {
        Preset::Fig1 => {
            let phase = |insertion: Insertion, eps2: f64, r: f64| {
                ScenarioConfig::new(ScenarioName::PhaseTmsv)
                    .with_insertion(insertion)
                    .with("r", r)
                    .with("N", 0.2)
                    .with("eps1", 0.8)
                    .with("eps2", eps2)
            };
            let columns = cols(&["r", "dphi2_before", "dphi2_after_e2_08", "dphi2_after_e2_10"]);
            run_rows(columns, &stepped(0.05, 1.5, 0.05), |r, cell| {
                cell.values[0] = Some(r);
                let label = format!("r={}", format_sig9(r));
                let curves = [(Insertion::BeforeBs, 0.8), (Insertion::AfterBs, 0.8), (Insertion::AfterBs, 1.0)];
                for (k, (insertion, eps2)) in curves.into_iter().enumerate() {
                    cell.put(k + 1, &label, phase_measurement_variance(&phase(insertion, eps2, r), 0.0));
                }
            })
        }
        Preset::Fig2a | Preset::Fig2b => {
            let eps2 = if preset == Preset::Fig2a { 1.0 } else { 0.9 };
            run_rows(cols(&["r", "B_R", "B_S", "B_M"]), &stepped(0.0, 1.2, 0.02), |r, cell| {
                cell.values[0] = Some(r);
                let cfg = ScenarioConfig::new(ScenarioName::DisplacementPair)
                    .with("r", r)
                    .with("nu_t", 0.2)
                    .with("N", 0.0)
                    .with("eps1", 0.9)
                    .with("eps2", eps2);
                let label = format!("r={}", format_sig9(r));
                match report(&cfg) {
                    Ok(rep) => {
                        cell.put(1, &label, rld_bound(&rep));
                        cell.put(2, &label, Ok(rep.b_s));
                    }
                    Err(e) => cell.warnings.push(format!("{label}: {}: {e}", e.kind())),
                }
                cell.put(3, &label, displacement_bounds_closed(&cfg).map(|b| b.b_m));
            })
        }
        Preset::Fig3a => {
            let columns = cols(&["r", "B_S_single", "B_R_single", "B_S_tmsv", "B_R_tmsv"]);
            run_rows(columns, &stepped(0.0, 1.5, 0.05), |r, cell| {
                cell.values[0] = Some(r);
                for (k, probe) in [(1, Probe::Single), (3, Probe::Tmsv)] {
                    let cfg = ScenarioConfig::new(ScenarioName::DampingTemperature)
                        .with_probe(probe)
                        .with("r", r)
                        .with("N", 0.9)
                        .with("xi", 0.5)
                        .with("nu_t", 0.0)
                        .with("lambda_re", 0.0);
                    let label = format!("r={} {probe:?}", format_sig9(r));
                    match report(&cfg) {
                        Ok(rep) => {
                            cell.put(k, &label, Ok(rep.b_s));
                            cell.put(k + 1, &label, rld_bound(&rep));
                        }
                        Err(e) => cell.warnings.push(format!("{label}: {}: {e}", e.kind())),
                    }
                }
            })
        }
        Preset::Fig3b => {
            let columns = cols(&["n", "r", "B_coherent", "B_squeezed", "B_thermal", "B_tmst"]);
            let nu = 0.1;
            let mut table = run_rows(columns, &stepped(0.0, 1.5, 0.05), |r, cell| {
                let n = (nu + 0.5) * (2.0 * r).cosh() - 0.5;
                cell.values[0] = Some(n);
                cell.values[1] = Some(r);
                let base = || ScenarioConfig::new(ScenarioName::SqueezePhase).with("s", 1.0).with("phi", 0.0);
                let probes = [
                    ("coherent", base().with("nu_t", nu).with("lambda_re", (n - nu).max(0.0).sqrt())),
                    ("squeezed", base().with("nu_t", nu).with("r", r)),
                    ("thermal", base().with("nu_t", n)),
                    ("tmst", base().with_probe(Probe::TwoModeSqueezedThermal).with("nu_t", nu).with("r", r)),
                ];
                for (k, (name, cfg)) in probes.into_iter().enumerate() {
                    let label = format!("n={} {name}", format_sig9(n));
                    cell.put(k + 2, &label, report(&cfg).map(|rep| max_bound(&rep)));
                }
            });
            table.warnings.dedup();
            table
        }
    }
}

/// `max(B_R, B_S)`, falling back to `B_S` where the RLD bound is undefined.
pub fn max_bound(report: &QfiReport) -> f64 {
    report.b_r.map_or(report.b_s, |b| b.max(report.b_s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(13.154116406), "13.1541164");
        assert_eq!(format_sig9(0.7), "0.7");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(-2.5e-7), "-2.5e-7");
        assert_eq!(format_sig9(123456789012.0), "1.23456789e11");
        assert_eq!(format_sig9(0.1 + 0.2), "0.3");
        assert_eq!(format_sig9(0.0), "0");
    }

    #[test]
    fn grid_hits_endpoints_exactly() {
        let g = stepped(0.05, 1.5, 0.05);
        assert_eq!(g.len(), 30);
        assert_eq!(g[0], 0.05);
        assert_eq!(*g.last().unwrap(), 1.5);
        assert_eq!(stepped(0.0, 1.2, 0.02).len(), 61);
    }

    #[test]
    fn minimal_sweep_has_two_rows() {
        let cfg = ScenarioConfig::new(ScenarioName::DisplacementPair).with("nu_t", 0.2);
        let spec = SweepSpec { param: "r".into(), from: 0.0, to: 0.5, steps: 2 };
        let table = run_sweep(&cfg, &spec, FlavorChoice::Both).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.columns, ["r", "F_sld_trace", "F_rld_trace", "B_S", "B_R", "B_M"]);
        assert!((table.rows[0][3].unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn sweep_spec_rejects_bad_ranges() {
        let spec = |param: &str, from, to, steps| SweepSpec { param: param.into(), from, to, steps };
        for bad in
            [spec("r", 0.0, 1.0, 1), spec("r", 1.0, 0.5, 5), spec("bogus", 0.0, 1.0, 3), spec("r", f64::NAN, 1.0, 3)]
        {
            assert_eq!(bad.validate(ScenarioName::PhaseTmsv).unwrap_err().kind(), "domain-error");
        }
    }
}
