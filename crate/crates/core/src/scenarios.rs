//! The four estimation problems as ready-made families, with their reference closed forms.
//!
//! Closed forms are written out independently of the engine so they can serve as a
//! regression target. Displacement amplitudes entering the squeeze/phase closed forms
//! are taken to be real.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::channels::{Param, ParameterizedFamily, Recipe, Stage};
use crate::error::{Error, Result};
use crate::gaussian::QuadraticObservable;
use crate::linalg::{CMat, CVec, RMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    PhaseTmsv,
    DisplacementPair,
    DampingTemperature,
    SqueezePhase,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 4] = [
        ScenarioName::PhaseTmsv,
        ScenarioName::DisplacementPair,
        ScenarioName::DampingTemperature,
        ScenarioName::SqueezePhase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::PhaseTmsv => "phase-tmsv",
            ScenarioName::DisplacementPair => "displacement-pair",
            ScenarioName::DampingTemperature => "damping-temperature",
            ScenarioName::SqueezePhase => "squeeze-phase",
        }
    }

    /// Names of the estimated parameters, in family order.
    pub fn estimated(self) -> &'static [&'static str] {
        match self {
            ScenarioName::PhaseTmsv => &["phi"],
            ScenarioName::DisplacementPair => &["lambda_re", "lambda_im"],
            ScenarioName::DampingTemperature => &["gamma", "N"],
            ScenarioName::SqueezePhase => &["s", "phi"],
        }
    }

    /// Accepted keys of the `parameters` map.
    pub fn parameter_keys(self) -> &'static [&'static str] {
        match self {
            ScenarioName::PhaseTmsv => &["r", "phi", "eps1", "eps2", "N"],
            ScenarioName::DisplacementPair => &["r", "nu_t", "eps1", "eps2", "N", "lambda_re", "lambda_im"],
            ScenarioName::DampingTemperature => &["r", "nu_t", "xi", "gamma", "N", "lambda_re", "lambda_im"],
            ScenarioName::SqueezePhase => &["r", "nu_t", "lambda_re", "lambda_im", "s", "phi"],
        }
    }

    pub fn allowed_probes(self) -> &'static [Probe] {
        match self {
            ScenarioName::PhaseTmsv => &[Probe::Tmsv],
            ScenarioName::DisplacementPair => &[Probe::TwoModeSqueezedThermal, Probe::Tmsv],
            ScenarioName::DampingTemperature | ScenarioName::SqueezePhase => {
                &[Probe::Single, Probe::Tmsv, Probe::TwoModeSqueezedThermal]
            }
        }
    }

    fn default_probe(self) -> Probe {
        match self {
            ScenarioName::PhaseTmsv | ScenarioName::DampingTemperature => Probe::Tmsv,
            ScenarioName::DisplacementPair => Probe::TwoModeSqueezedThermal,
            ScenarioName::SqueezePhase => Probe::Single,
        }
    }
}

/// Where the phase shift sits relative to the splitter that disentangles the TMSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Insertion {
    BeforeBs,
    AfterBs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Probe {
    /// Displaced squeezed thermal state of one mode.
    Single,
    /// Two-mode squeezed vacuum.
    Tmsv,
    /// Two-mode squeezer applied to a product of thermal states.
    TwoModeSqueezedThermal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: ScenarioName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insertion: Option<Insertion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<Probe>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

impl ScenarioConfig {
    pub fn new(name: ScenarioName) -> Self {
        ScenarioConfig { name, insertion: None, probe: None, parameters: BTreeMap::new() }
    }

    /// Parses and validates a JSON scenario object.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn with_probe(mut self, probe: Probe) -> Self {
        self.probe = Some(probe);
        self
    }

    pub fn with_insertion(mut self, insertion: Insertion) -> Self {
        self.insertion = Some(insertion);
        self
    }

    pub fn probe(&self) -> Probe {
        self.probe.unwrap_or_else(|| self.name.default_probe())
    }

    pub fn insertion(&self) -> Insertion {
        self.insertion.unwrap_or(Insertion::AfterBs)
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.parameters.get(key).copied().unwrap_or(default)
    }

    pub fn validate(&self) -> Result<()> {
        let keys = self.name.parameter_keys();
        for (k, v) in &self.parameters {
            if !keys.contains(&k.as_str()) {
                return Err(Error::Domain(format!(
                    "unknown parameter '{k}' for {}; accepted: {}",
                    self.name.as_str(),
                    keys.join(", ")
                )));
            }
            if !v.is_finite() {
                return Err(Error::Domain(format!("parameter '{k}' must be finite")));
            }
        }
        if self.insertion.is_some() && self.name != ScenarioName::PhaseTmsv {
            return Err(Error::Domain("insertion applies to phase-tmsv only".into()));
        }
        if !self.name.allowed_probes().contains(&self.probe()) {
            return Err(Error::Domain(format!("probe {:?} is not available for {}", self.probe(), self.name.as_str())));
        }
        for k in ["eps1", "eps2"] {
            let e = self.get(k, 1.0);
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Domain(format!("{k} must lie in [0, 1], got {e}")));
            }
        }
        for k in ["nu_t", "N", "xi", "gamma"] {
            let v = self.get(k, 0.0);
            if v < 0.0 {
                return Err(Error::Domain(format!("{k} must be non-negative, got {v}")));
            }
        }
        if self.probe() == Probe::Tmsv && self.get("nu_t", 0.0) != 0.0 {
            return Err(Error::Domain(
                "the tmsv probe has no thermal occupation; use two-mode-squeezed-thermal".into(),
            ));
        }
        if self.name == ScenarioName::DampingTemperature {
            match (self.parameters.get("xi"), self.parameters.get("gamma")) {
                (Some(_), Some(_)) => return Err(Error::Domain("give either xi or gamma, not both".into())),
                (None, None) => return Err(Error::Domain("damping-temperature needs xi or gamma".into())),
                _ => {}
            }
        }
        Ok(())
    }

    fn damping_rate(&self) -> f64 {
        match self.parameters.get("gamma") {
            Some(&g) => g,
            None => self.get("xi", 0.0).ln_1p(),
        }
    }

    fn xi(&self) -> f64 {
        match self.parameters.get("xi") {
            Some(&x) => x,
            None => self.get("gamma", 0.0).exp_m1(),
        }
    }

    /// Family and the parameter point at which it is analysed.
    pub fn family(&self) -> Result<(ParameterizedFamily, Vec<f64>)> {
        self.validate()?;
        let r = self.get("r", 0.0);
        let nu = self.get("nu_t", 0.0);
        let n_bath = self.get("N", 0.0);
        let (eps1, eps2) = (self.get("eps1", 1.0), self.get("eps2", 1.0));
        let (lre, lim) = (self.get("lambda_re", 0.0), self.get("lambda_im", 0.0));
        let two_mode = |nu: f64| (vec![nu, nu], vec![Stage::TwoModeSqueeze { modes: (0, 1), r: r.into() }]);
        let single = || {
            (
                vec![nu],
                vec![
                    Stage::Squeeze { mode: 0, s: r.into(), phi: 0.0.into() },
                    Stage::Displace { mode: 0, re: lre.into(), im: lim.into() },
                ],
            )
        };

        let (recipe, theta) = match self.name {
            ScenarioName::PhaseTmsv => {
                let (thermal, mut stages) = two_mode(0.0);
                if self.insertion() == Insertion::BeforeBs {
                    stages.push(Stage::BeamSplitter { modes: (0, 1), angle: FRAC_PI_4.into() });
                }
                stages.push(Stage::PhaseShift { mode: 0, angle: Param::Theta(0) });
                stages.push(Stage::Loss { mode: 0, transmissivity: eps1.into(), bath: n_bath.into() });
                stages.push(Stage::Loss { mode: 1, transmissivity: eps2.into(), bath: n_bath.into() });
                (Recipe::new(thermal, stages), vec![self.get("phi", 0.0)])
            }
            ScenarioName::DisplacementPair => {
                let (thermal, mut stages) = two_mode(nu);
                stages.push(Stage::Loss { mode: 0, transmissivity: eps1.into(), bath: n_bath.into() });
                stages.push(Stage::Loss { mode: 1, transmissivity: eps2.into(), bath: n_bath.into() });
                stages.push(Stage::Displace { mode: 0, re: Param::Theta(0), im: Param::Theta(1) });
                (Recipe::new(thermal, stages), vec![lre, lim])
            }
            ScenarioName::DampingTemperature => {
                let (thermal, mut stages) = if self.probe() == Probe::Single { single() } else { two_mode(nu) };
                stages.push(Stage::Damping { mode: 0, gamma: Param::Theta(0), bath: Param::Theta(1) });
                (Recipe::new(thermal, stages), vec![self.damping_rate(), n_bath])
            }
            ScenarioName::SqueezePhase => {
                let (thermal, mut stages) = if self.probe() == Probe::Single { single() } else { two_mode(nu) };
                stages.push(Stage::Squeeze { mode: 0, s: Param::Theta(0), phi: Param::Theta(1) });
                (Recipe::new(thermal, stages), vec![self.get("s", 0.0), self.get("phi", 0.0)])
            }
        };
        Ok((ParameterizedFamily::new(recipe, theta.len())?, theta))
    }

    /// Mean excitation of the probe mode before the estimated process.
    pub fn probe_energy(&self) -> f64 {
        let r = self.get("r", 0.0);
        let nu = self.get("nu_t", 0.0);
        let lam2 = self.get("lambda_re", 0.0).powi(2) + self.get("lambda_im", 0.0).powi(2);
        (nu + 0.5) * (2.0 * r).cosh() - 0.5 + if self.probe() == Probe::Single { lam2 } else { 0.0 }
    }
}

/// Squeezing `r` that gives a squeezed thermal mode of occupation `nu` the mean excitation `energy`.
pub fn squeezing_for_energy(energy: f64, nu: f64) -> Result<f64> {
    let c = (energy + 0.5) / (nu + 0.5);
    if c.is_nan() || c < 1.0 {
        return Err(Error::Domain(format!("energy {energy} is below the thermal occupation {nu}")));
    }
    Ok(0.5 * c.acosh())
}

fn require(cfg: &ScenarioConfig, name: ScenarioName) -> Result<()> {
    cfg.validate()?;
    if cfg.name != name {
        return Err(Error::Domain(format!("expected a {} scenario, got {}", name.as_str(), cfg.name.as_str())));
    }
    Ok(())
}

/// Printed SLD QFI for the phase scenario.
pub fn phase_qfi_closed(cfg: &ScenarioConfig) -> Result<f64> {
    require(cfg, ScenarioName::PhaseTmsv)?;
    let r = cfg.get("r", 0.0);
    let n = cfg.get("N", 0.0);
    let (e1, e2) = (cfg.get("eps1", 1.0), cfg.get("eps2", 1.0));
    let d = |e: f64| e * (2.0 * r).cosh() + (1.0 - e) * (2.0 * n + 1.0);
    Ok(match cfg.insertion() {
        Insertion::AfterBs => {
            let b = -(e1 * e2).sqrt() * (2.0 * r).sinh();
            2.0 * b * b / (1.0 + d(e1) * d(e2) - b * b)
        }
        Insertion::BeforeBs => {
            let b1 = -e1 * (2.0 * r).sinh();
            let d1 = d(e1);
            4.0 * b1 * b1 / (1.0 + d1 * d1 - b1 * b1)
        }
    })
}

/// Printed phase sensitivity `delta^2 phi` of the quadratic measurement, as a function of `phi`.
pub fn phase_variance_closed(cfg: &ScenarioConfig, phi: f64) -> Result<f64> {
    require(cfg, ScenarioName::PhaseTmsv)?;
    let r = cfg.get("r", 0.0);
    let n = cfg.get("N", 0.0);
    let (e1, e2) = (cfg.get("eps1", 1.0), cfg.get("eps2", 1.0));
    let d = |e: f64| e * (2.0 * r).cosh() + (1.0 - e) * (2.0 * n + 1.0);
    Ok(match cfg.insertion() {
        Insertion::AfterBs => {
            let b = -(e1 * e2).sqrt() * (2.0 * r).sinh();
            (1.0 + d(e1) * d(e2) + b * b * (1.0 - 2.0 * (2.0 * phi).cos())) / (2.0 * b * b * phi.cos().powi(2))
        }
        Insertion::BeforeBs => {
            let b1 = -e1 * (2.0 * r).sinh();
            let d1 = d(e1);
            (1.0 + d1 * d1 + b1 * b1 * (1.0 - 3.0 * (4.0 * phi).cos()) / 2.0)
                / (4.0 * b1 * b1 * (2.0 * phi).cos().powi(2))
        }
    })
}

/// The quadratic observable read out in the phase scenario.
///
/// With the shift after the splitter the readout is the two-mode operator
/// `i(a1^dag a2^dag - a1 a2)/2`; before it, the single-mode `i(a1^dag^2 - a1^2)/2`.
pub fn phase_observable(insertion: Insertion) -> Result<QuadraticObservable> {
    let mut m = CMat::zeros(4, 4);
    let half_i = C64::new(0.0, 0.5);
    match insertion {
        Insertion::AfterBs => {
            m[(1, 3)] = half_i;
            m[(0, 2)] = -half_i;
        }
        Insertion::BeforeBs => {
            m[(1, 1)] = half_i;
            m[(0, 0)] = -half_i;
        }
    }
    QuadraticObservable::from_ordered(m, CVec::zeros(4), 0.0)
}

/// Step of the central difference used for `d<M>/dphi`.
pub const SLOPE_STEP: f64 = 1e-5;

/// `delta^2 phi = Var(M) / |d<M>/dphi|^2` evaluated with the engine's Gaussian moments.
pub fn phase_measurement_variance(cfg: &ScenarioConfig, phi: f64) -> Result<f64> {
    require(cfg, ScenarioName::PhaseTmsv)?;
    let (family, _) = cfg.family()?;
    let obs = phase_observable(cfg.insertion())?;
    let state = family.state_at(&[phi])?;
    let up = family.state_at(&[phi + SLOPE_STEP])?.expectation(&obs)?;
    let down = family.state_at(&[phi - SLOPE_STEP])?.expectation(&obs)?;
    let slope = (up - down) / (2.0 * SLOPE_STEP);
    if slope.abs() < 1e-12 {
        return Err(Error::DivergingSensitivity { slope: slope.abs() });
    }
    Ok(state.variance(&obs)? / (slope * slope))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementBounds {
    pub b_r: f64,
    pub b_s: f64,
    /// Sum of the two quadrature-measurement variances.
    pub b_m: f64,
}

pub fn displacement_bounds_closed(cfg: &ScenarioConfig) -> Result<DisplacementBounds> {
    require(cfg, ScenarioName::DisplacementPair)?;
    let r = cfg.get("r", 0.0);
    let nu = cfg.get("nu_t", 0.0);
    let n = cfg.get("N", 0.0);
    let (e1, e2) = (cfg.get("eps1", 1.0), cfg.get("eps2", 1.0));
    let y = 2.0 * nu + 1.0;
    let d = |e: f64| e * y * (2.0 * r).cosh() + (1.0 - e) * (2.0 * n + 1.0);
    let (d1, d2) = (d(e1), d(e2));
    let b = -(e1 * e2).sqrt() * y * (2.0 * r).sinh();
    let gap = 1.0 - d2 * d2;
    if gap == 0.0 {
        return Err(Error::ClosedFormUndefined("d2 = 1 makes the RLD bound expression singular".into()));
    }
    Ok(DisplacementBounds {
        b_r: d1 / 2.0 + d2 * b * b / (2.0 * gap) + (0.5 + b * b / (2.0 * gap)).abs(),
        b_s: d1 / 2.0 - b * b / (2.0 * d2),
        b_m: (d1 + d2) / 2.0 - b,
    })
}

/// Closed-form Fisher matrices in `(first, second)` parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFisher {
    pub rld: CMat,
    pub sld: RMat,
}

/// Damping/temperature matrices for the TMSV probe, in `(gamma, N)` order.
pub fn damping_qfi_closed(cfg: &ScenarioConfig) -> Result<ClosedFisher> {
    require(cfg, ScenarioName::DampingTemperature)?;
    if cfg.probe() != Probe::Tmsv {
        return Err(Error::ClosedFormUndefined("closed forms exist for the tmsv probe only".into()));
    }
    let xi = cfg.xi();
    let nb = cfg.get("N", 0.0);
    let big_y = nb * (nb + 1.0);
    if big_y == 0.0 || xi == 0.0 {
        return Err(Error::ClosedFormUndefined("needs N > 0 and xi > 0".into()));
    }
    let n = cfg.get("r", 0.0).sinh().powi(2);
    let y = 2.0 * nb + 1.0;
    let t = y * (2.0 * n + 1.0) + 1.0;

    let r_gg = 1.0 / (xi * xi) + (xi * t + 2.0) / (8.0 * big_y * xi * xi);
    let r_nn = 1.0 / big_y;
    let r_gn = y / (2.0 * big_y * xi);
    let s_gg = (2.0 * xi * n * (n + 1.0) + t - 2.0) / (xi * (xi * t + 2.0));
    let s_nn = xi * t / (big_y * (xi * t + 2.0));
    let s_gn = 2.0 * (2.0 * n + 1.0) / (xi * t + 2.0);

    let re = |x: f64| C64::new(x, 0.0);
    Ok(ClosedFisher {
        rld: CMat::from_row_slice(2, 2, &[re(r_gg), re(r_gn), re(r_gn), re(r_nn)]),
        sld: RMat::from_row_slice(2, 2, &[s_gg, s_gn, s_gn, s_nn]),
    })
}

/// Squeeze/phase matrices for the single-mode probe at `phi = 0`, in `(s, phi)` order.
pub fn squeeze_phase_qfi_closed(cfg: &ScenarioConfig) -> Result<ClosedFisher> {
    require(cfg, ScenarioName::SqueezePhase)?;
    if cfg.probe() != Probe::Single {
        return Err(Error::ClosedFormUndefined("closed forms exist for the single-mode probe only".into()));
    }
    let nu = cfg.get("nu_t", 0.0);
    let big_y = nu * (nu + 1.0);
    if big_y == 0.0 {
        return Err(Error::ClosedFormUndefined("RLD expressions need nu_t > 0".into()));
    }
    let y = 2.0 * nu + 1.0;
    let r = cfg.get("r", 0.0);
    let s = cfg.get("s", 0.0);
    let lam2 = cfg.get("lambda_re", 0.0).powi(2) + cfg.get("lambda_im", 0.0).powi(2);

    let r_pp = y * y * (2.0 * big_y + 1.0) / (2.0 * big_y * big_y) * (2.0 * s).sinh().powi(2)
        + 4.0 * y / big_y * lam2 * (-2.0 * r - 2.0 * s).exp() * s.sinh().powi(2);
    let r_ss = y * y * (2.0 * big_y + 1.0) / (2.0 * big_y * big_y) + y / big_y * lam2 * (2.0 * r).exp();
    let r_sp = C64::new(
        0.0,
        y.powi(3) / (2.0 * big_y * big_y) * (2.0 * s).sinh() + 2.0 / big_y * lam2 * (-s).exp() * s.sinh(),
    );
    let s_pp = 2.0 * y * y / (2.0 * big_y + 1.0) * (2.0 * s).sinh().powi(2)
        + 16.0 / y * lam2 * (-2.0 * r - 2.0 * s).exp() * s.sinh().powi(2);
    let s_ss = 2.0 * y * y / (2.0 * big_y + 1.0) + 4.0 / y * lam2 * (2.0 * r).exp();

    let re = |x: f64| C64::new(x, 0.0);
    Ok(ClosedFisher {
        rld: CMat::from_row_slice(2, 2, &[re(r_ss), r_sp, r_sp.conj(), re(r_pp)]),
        sld: RMat::from_row_slice(2, 2, &[s_ss, 0.0, 0.0, s_pp]),
    })
}
