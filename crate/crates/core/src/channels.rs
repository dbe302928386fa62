//! Gaussian channels in `(S, noise, shift)` form and differentiable state families.
//!
//! A map acts in the Heisenberg picture as `a -> S a + bath`, so on moments
//! `lambda -> S lambda + shift` and `Sigma -> S Sigma S^T + noise`.

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::linalg::{max_abs, symmetrize, x_conj, CMat, CVec, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearBosonicMap {
    scale: CMat,
    noise: CMat,
    shift: CVec,
}

fn check_mode(n_modes: usize, mode: usize) -> Result<()> {
    if mode >= n_modes {
        return Err(Error::Domain(format!("mode {mode} out of range for {n_modes} modes")));
    }
    Ok(())
}

fn check_pair(n_modes: usize, (m1, m2): (usize, usize)) -> Result<()> {
    check_mode(n_modes, m1)?;
    check_mode(n_modes, m2)?;
    if m1 == m2 {
        return Err(Error::Domain(format!("two-mode operation needs distinct modes, got {m1} twice")));
    }
    Ok(())
}

fn check_finite(what: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {v}")))
    }
}

fn check_loss(transmissivity: f64, bath: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::Domain(format!("transmissivity must lie in [0, 1], got {transmissivity}")));
    }
    if !(bath.is_finite() && bath >= 0.0) {
        return Err(Error::Domain(format!("bath occupation must be non-negative, got {bath}")));
    }
    Ok(())
}

fn check_damping(gamma: f64, bath: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Domain(format!("damping rate must be non-negative, got {gamma}")));
    }
    check_loss(0.0, bath)
}

fn sigma_x_block(n_modes: usize, mode: usize, v: f64) -> CMat {
    let mut m = CMat::zeros(2 * n_modes, 2 * n_modes);
    m[(2 * mode, 2 * mode + 1)] = C64::new(v, 0.0);
    m[(2 * mode + 1, 2 * mode)] = C64::new(v, 0.0);
    m
}

// Entries of the phase-shift, squeeze, two-mode squeeze and splitter matrices.
// Shared by the maps and their parameter derivatives.

fn phase_entries(angle: f64, deriv: bool) -> [C64; 2] {
    let e = C64::from_polar(1.0, angle);
    if deriv {
        [C64::i() * e, -C64::i() * e.conj()]
    } else {
        [e, e.conj()]
    }
}

#[derive(Clone, Copy, PartialEq)]
enum SqueezeSlot {
    Value,
    Strength,
    Angle,
}

/// 2x2 block acting on `(a, a^dag)`: `a -> cosh(s) a - e^{2i phi} sinh(s) a^dag`.
fn squeeze_block(s: f64, phi: f64, slot: SqueezeSlot) -> [[C64; 2]; 2] {
    let e = C64::from_polar(1.0, 2.0 * phi);
    let (ch, sh) = (s.cosh(), s.sinh());
    let r = |x: f64| C64::new(x, 0.0);
    match slot {
        SqueezeSlot::Value => [[r(ch), -e * sh], [-e.conj() * sh, r(ch)]],
        SqueezeSlot::Strength => [[r(sh), -e * ch], [-e.conj() * ch, r(sh)]],
        SqueezeSlot::Angle => [[r(0.0), -C64::i() * 2.0 * e * sh], [C64::i() * 2.0 * e.conj() * sh, r(0.0)]],
    }
}

fn two_mode_squeeze_matrix(n_modes: usize, (m1, m2): (usize, usize), r: f64, deriv: bool) -> CMat {
    let (diag, off) = if deriv { (r.sinh(), -r.cosh()) } else { (r.cosh(), -r.sinh()) };
    let mut s = if deriv { CMat::zeros(2 * n_modes, 2 * n_modes) } else { CMat::identity(2 * n_modes, 2 * n_modes) };
    let (a1, c1, a2, c2) = (2 * m1, 2 * m1 + 1, 2 * m2, 2 * m2 + 1);
    for k in [a1, c1, a2, c2] {
        s[(k, k)] = C64::new(diag, 0.0);
    }
    for (i, j) in [(a1, c2), (c1, a2), (a2, c1), (c2, a1)] {
        s[(i, j)] = C64::new(off, 0.0);
    }
    s
}

fn splitter_matrix(n_modes: usize, (m1, m2): (usize, usize), angle: f64, deriv: bool) -> CMat {
    let (c, s) = if deriv { (-angle.sin(), angle.cos()) } else { (angle.cos(), angle.sin()) };
    let mut out = if deriv { CMat::zeros(2 * n_modes, 2 * n_modes) } else { CMat::identity(2 * n_modes, 2 * n_modes) };
    for slot in 0..2 {
        let (i, j) = (2 * m1 + slot, 2 * m2 + slot);
        out[(i, i)] = C64::new(c, 0.0);
        out[(i, j)] = C64::new(s, 0.0);
        out[(j, i)] = C64::new(-s, 0.0);
        out[(j, j)] = C64::new(c, 0.0);
    }
    out
}

impl LinearBosonicMap {
    /// General constructor; `noise` is symmetrized.
    pub fn new(scale: CMat, noise: CMat, shift: CVec) -> Result<Self> {
        let (n_out, n_in) = scale.shape();
        if n_out % 2 != 0 || n_in % 2 != 0 || n_out == 0 || n_in == 0 {
            return Err(Error::Dimension(format!("scale matrix {n_out}x{n_in} does not act on whole modes")));
        }
        if noise.shape() != (n_out, n_out) || shift.len() != n_out {
            return Err(Error::Dimension("noise and shift must match the output dimension".into()));
        }
        Ok(LinearBosonicMap { scale, noise: symmetrize(&noise), shift })
    }

    pub fn identity(n_modes: usize) -> Self {
        let d = 2 * n_modes;
        LinearBosonicMap { scale: CMat::identity(d, d), noise: CMat::zeros(d, d), shift: CVec::zeros(d) }
    }

    /// `a_k -> e^{i angle} a_k`.
    pub fn phase_shift(n_modes: usize, mode: usize, angle: f64) -> Result<Self> {
        check_mode(n_modes, mode)?;
        check_finite("phase", angle)?;
        let mut m = Self::identity(n_modes);
        let [p, q] = phase_entries(angle, false);
        m.scale[(2 * mode, 2 * mode)] = p;
        m.scale[(2 * mode + 1, 2 * mode + 1)] = q;
        Ok(m)
    }

    /// Displacement `D(lambda0) = exp(lambda0 a^dag - conj(lambda0) a)` on one mode.
    pub fn displace(n_modes: usize, mode: usize, lambda0: C64) -> Result<Self> {
        check_mode(n_modes, mode)?;
        check_finite("displacement", lambda0.re)?;
        check_finite("displacement", lambda0.im)?;
        let mut m = Self::identity(n_modes);
        m.shift[2 * mode] = lambda0;
        m.shift[2 * mode + 1] = lambda0.conj();
        Ok(m)
    }

    /// Single-mode squeezer with complex parameter `s e^{2 i phi}`.
    pub fn squeeze(n_modes: usize, mode: usize, s: f64, phi: f64) -> Result<Self> {
        check_mode(n_modes, mode)?;
        check_finite("squeezing", s)?;
        check_finite("squeezing angle", phi)?;
        let mut m = Self::identity(n_modes);
        let b = squeeze_block(s, phi, SqueezeSlot::Value);
        for (i, row) in b.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.scale[(2 * mode + i, 2 * mode + j)] = *v;
            }
        }
        Ok(m)
    }

    /// Two-mode squeezer `a1 -> cosh(r) a1 - sinh(r) a2^dag` and symmetrically for `a2`.
    pub fn two_mode_squeeze(n_modes: usize, modes: (usize, usize), r: f64) -> Result<Self> {
        check_pair(n_modes, modes)?;
        check_finite("squeezing", r)?;
        let mut m = Self::identity(n_modes);
        m.scale = two_mode_squeeze_matrix(n_modes, modes, r, false);
        Ok(m)
    }

    /// Beam splitter `a1 -> cos(t) a1 + sin(t) a2`, `a2 -> -sin(t) a1 + cos(t) a2`; `t = pi/4` is 50:50.
    pub fn beam_splitter(n_modes: usize, modes: (usize, usize), angle: f64) -> Result<Self> {
        check_pair(n_modes, modes)?;
        check_finite("splitter angle", angle)?;
        let mut m = Self::identity(n_modes);
        m.scale = splitter_matrix(n_modes, modes, angle, false);
        Ok(m)
    }

    /// Mixing with a thermal bath of occupation `bath` at transmissivity `transmissivity`.
    pub fn loss(n_modes: usize, mode: usize, transmissivity: f64, bath: f64) -> Result<Self> {
        check_mode(n_modes, mode)?;
        check_loss(transmissivity, bath)?;
        let mut m = Self::identity(n_modes);
        let t = C64::new(transmissivity.sqrt(), 0.0);
        m.scale[(2 * mode, 2 * mode)] = t;
        m.scale[(2 * mode + 1, 2 * mode + 1)] = t;
        m.noise = sigma_x_block(n_modes, mode, (1.0 - transmissivity) * (2.0 * bath + 1.0) / 2.0);
        Ok(m)
    }

    /// Amplitude damping over a fixed time: loss with transmissivity `e^{-gamma}`.
    pub fn damping(n_modes: usize, mode: usize, gamma: f64, bath: f64) -> Result<Self> {
        check_damping(gamma, bath)?;
        Self::loss(n_modes, mode, (-gamma).exp(), bath)
    }

    pub fn scale(&self) -> &CMat {
        &self.scale
    }

    pub fn noise(&self) -> &CMat {
        &self.noise
    }

    pub fn shift(&self) -> &CVec {
        &self.shift
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &LinearBosonicMap) -> Result<LinearBosonicMap> {
        if self.scale.ncols() != first.scale.nrows() {
            return Err(Error::Dimension("composed maps have mismatched dimensions".into()));
        }
        Ok(LinearBosonicMap {
            scale: &self.scale * &first.scale,
            noise: &self.scale * &first.noise * self.scale.transpose() + &self.noise,
            shift: &self.scale * &first.shift + &self.shift,
        })
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        if self.scale.ncols() != state.dim() {
            return Err(Error::Dimension(format!(
                "map acts on {} slots, state has {}",
                self.scale.ncols(),
                state.dim()
            )));
        }
        let (lambda, sigma) = self.push(state.lambda(), state.sigma());
        GaussianState::new_normalized(lambda, sigma).map_err(|e| Error::InternalConsistency(e.to_string()))
    }

    fn push(&self, lambda: &CVec, sigma: &CMat) -> (CVec, CMat) {
        let s = &self.scale;
        (s * lambda + &self.shift, s * sigma * s.transpose() + &self.noise)
    }
}

/// A stage parameter: either fixed or the `k`-th entry of the family's parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Fixed(f64),
    Theta(usize),
}

impl Param {
    pub fn value(self, theta: &[f64]) -> f64 {
        match self {
            Param::Fixed(v) => v,
            Param::Theta(k) => theta[k],
        }
    }

    pub fn index(self) -> Option<usize> {
        match self {
            Param::Fixed(_) => None,
            Param::Theta(k) => Some(k),
        }
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Fixed(v)
    }
}

/// One primitive of a state-preparation recipe. Also consumed by the Fock-space oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stage {
    PhaseShift { mode: usize, angle: Param },
    Displace { mode: usize, re: Param, im: Param },
    Squeeze { mode: usize, s: Param, phi: Param },
    TwoModeSqueeze { modes: (usize, usize), r: Param },
    BeamSplitter { modes: (usize, usize), angle: Param },
    Loss { mode: usize, transmissivity: Param, bath: Param },
    Damping { mode: usize, gamma: Param, bath: Param },
}

impl Stage {
    pub fn params(&self) -> Vec<Param> {
        match *self {
            Stage::PhaseShift { angle, .. } => vec![angle],
            Stage::Displace { re, im, .. } => vec![re, im],
            Stage::Squeeze { s, phi, .. } => vec![s, phi],
            Stage::TwoModeSqueeze { r, .. } => vec![r],
            Stage::BeamSplitter { angle, .. } => vec![angle],
            Stage::Loss { transmissivity, bath, .. } => vec![transmissivity, bath],
            Stage::Damping { gamma, bath, .. } => vec![gamma, bath],
        }
    }

    pub fn modes(&self) -> Vec<usize> {
        match *self {
            Stage::PhaseShift { mode, .. }
            | Stage::Displace { mode, .. }
            | Stage::Squeeze { mode, .. }
            | Stage::Loss { mode, .. }
            | Stage::Damping { mode, .. } => vec![mode],
            Stage::TwoModeSqueeze { modes, .. } | Stage::BeamSplitter { modes, .. } => {
                vec![modes.0, modes.1]
            }
        }
    }

    /// The map at parameter vector `theta`.
    pub fn map(&self, n_modes: usize, theta: &[f64]) -> Result<LinearBosonicMap> {
        let v = |p: Param| p.value(theta);
        match *self {
            Stage::PhaseShift { mode, angle } => LinearBosonicMap::phase_shift(n_modes, mode, v(angle)),
            Stage::Displace { mode, re, im } => LinearBosonicMap::displace(n_modes, mode, C64::new(v(re), v(im))),
            Stage::Squeeze { mode, s, phi } => LinearBosonicMap::squeeze(n_modes, mode, v(s), v(phi)),
            Stage::TwoModeSqueeze { modes, r } => LinearBosonicMap::two_mode_squeeze(n_modes, modes, v(r)),
            Stage::BeamSplitter { modes, angle } => LinearBosonicMap::beam_splitter(n_modes, modes, v(angle)),
            Stage::Loss { mode, transmissivity, bath } => {
                LinearBosonicMap::loss(n_modes, mode, v(transmissivity), v(bath))
            }
            Stage::Damping { mode, gamma, bath } => LinearBosonicMap::damping(n_modes, mode, v(gamma), v(bath)),
        }
    }

    /// Derivative of `(scale, noise, shift)` with respect to the stage's `slot`-th parameter.
    fn map_derivative(&self, n_modes: usize, theta: &[f64], slot: usize) -> Result<LinearBosonicMap> {
        let d = 2 * n_modes;
        let v = |p: Param| p.value(theta);
        let mut out = LinearBosonicMap { scale: CMat::zeros(d, d), noise: CMat::zeros(d, d), shift: CVec::zeros(d) };
        match (*self, slot) {
            (Stage::PhaseShift { mode, angle }, 0) => {
                let [p, q] = phase_entries(v(angle), true);
                out.scale[(2 * mode, 2 * mode)] = p;
                out.scale[(2 * mode + 1, 2 * mode + 1)] = q;
            }
            (Stage::Displace { mode, .. }, 0) => {
                out.shift[2 * mode] = C64::new(1.0, 0.0);
                out.shift[2 * mode + 1] = C64::new(1.0, 0.0);
            }
            (Stage::Displace { mode, .. }, 1) => {
                out.shift[2 * mode] = C64::i();
                out.shift[2 * mode + 1] = -C64::i();
            }
            (Stage::Squeeze { mode, s, phi }, k) => {
                let which = if k == 0 { SqueezeSlot::Strength } else { SqueezeSlot::Angle };
                let b = squeeze_block(v(s), v(phi), which);
                for (i, row) in b.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        out.scale[(2 * mode + i, 2 * mode + j)] = *x;
                    }
                }
            }
            (Stage::TwoModeSqueeze { modes, r }, 0) => out.scale = two_mode_squeeze_matrix(n_modes, modes, v(r), true),
            (Stage::BeamSplitter { modes, angle }, 0) => out.scale = splitter_matrix(n_modes, modes, v(angle), true),
            (Stage::Loss { mode, transmissivity, bath }, k) => {
                let (t, n) = (v(transmissivity), v(bath));
                if k == 0 {
                    if t <= 0.0 {
                        return Err(Error::Domain("transmissivity derivative undefined at zero transmission".into()));
                    }
                    let ds = C64::new(0.5 / t.sqrt(), 0.0);
                    out.scale[(2 * mode, 2 * mode)] = ds;
                    out.scale[(2 * mode + 1, 2 * mode + 1)] = ds;
                    out.noise = sigma_x_block(n_modes, mode, -(2.0 * n + 1.0) / 2.0);
                } else {
                    out.noise = sigma_x_block(n_modes, mode, 1.0 - t);
                }
            }
            (Stage::Damping { mode, gamma, bath }, k) => {
                let (g, n) = (v(gamma), v(bath));
                let e = (-g).exp();
                if k == 0 {
                    let ds = C64::new(-0.5 * (-g / 2.0).exp(), 0.0);
                    out.scale[(2 * mode, 2 * mode)] = ds;
                    out.scale[(2 * mode + 1, 2 * mode + 1)] = ds;
                    out.noise = sigma_x_block(n_modes, mode, e * (2.0 * n + 1.0) / 2.0);
                } else {
                    out.noise = sigma_x_block(n_modes, mode, 1.0 - e);
                }
            }
            _ => unreachable!("stage parameter slot out of range"),
        }
        Ok(out)
    }
}

/// State preparation: a product of thermal states followed by a sequence of stages.
#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub n_modes: usize,
    pub thermal: Vec<f64>,
    pub stages: Vec<Stage>,
}

impl Recipe {
    pub fn new(thermal: Vec<f64>, stages: Vec<Stage>) -> Self {
        Recipe { n_modes: thermal.len(), thermal, stages }
    }

    /// Largest parameter index referenced plus one.
    pub fn theta_len(&self) -> usize {
        self.stages.iter().flat_map(|s| s.params()).filter_map(Param::index).map(|k| k + 1).max().unwrap_or(0)
    }

    /// Checks mode indices and that every parameter index is below `dim_theta`.
    pub fn validate(&self, dim_theta: usize) -> Result<()> {
        if self.n_modes == 0 || self.thermal.len() != self.n_modes {
            return Err(Error::Dimension("recipe needs one thermal occupation per mode".into()));
        }
        for stage in &self.stages {
            for m in stage.modes() {
                check_mode(self.n_modes, m)?;
            }
            if let Some(k) = stage.params().into_iter().filter_map(Param::index).find(|&k| k >= dim_theta) {
                return Err(Error::Domain(format!("stage refers to parameter {k} of a {dim_theta}-parameter family")));
            }
        }
        Ok(())
    }

    pub fn state_at(&self, theta: &[f64]) -> Result<GaussianState> {
        let mut state = GaussianState::thermal(&self.thermal)?;
        for stage in &self.stages {
            state = stage.map(self.n_modes, theta)?.apply(&state)?;
        }
        Ok(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    /// Central differences; `None` uses `h = max(1e-6, 1e-6 |theta_k|)`.
    FiniteDifference {
        step: Option<f64>,
    },
}

/// A state family together with its parameter derivatives at one point.
#[derive(Debug, Clone)]
pub struct FamilyPoint {
    pub state: GaussianState,
    pub d_lambda: Vec<CVec>,
    pub d_sigma: Vec<CMat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterizedFamily {
    recipe: Recipe,
    dim_theta: usize,
    mode: DerivativeMode,
}

impl ParameterizedFamily {
    pub fn new(recipe: Recipe, dim_theta: usize) -> Result<Self> {
        if dim_theta == 0 {
            return Err(Error::Domain("a family needs at least one parameter".into()));
        }
        recipe.validate(dim_theta)?;
        Ok(ParameterizedFamily { recipe, dim_theta, mode: DerivativeMode::Analytic })
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn recipe(&self) -> &Recipe {
        &self.recipe
    }

    pub fn dim_theta(&self) -> usize {
        self.dim_theta
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.mode
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim_theta {
            return Err(Error::Dimension(format!("expected {} parameters, got {}", self.dim_theta, theta.len())));
        }
        if let Some(v) = theta.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("parameter value {v} is not finite")));
        }
        Ok(())
    }

    pub fn state_at(&self, theta: &[f64]) -> Result<GaussianState> {
        self.check_theta(theta)?;
        self.recipe.state_at(theta)
    }

    /// `(d lambda / d theta_k, d Sigma / d theta_k)` at `theta`.
    pub fn derivative(&self, theta: &[f64], k: usize) -> Result<(CVec, CMat)> {
        if k >= self.dim_theta {
            return Err(Error::Domain(format!("parameter index {k} out of range")));
        }
        let mut point = self.point(theta)?;
        Ok((point.d_lambda.swap_remove(k), point.d_sigma.swap_remove(k)))
    }

    /// State and all parameter derivatives at `theta`.
    pub fn point(&self, theta: &[f64]) -> Result<FamilyPoint> {
        self.check_theta(theta)?;
        match self.mode {
            DerivativeMode::Analytic => self.analytic_point(theta),
            DerivativeMode::FiniteDifference { step } => self.finite_difference_point(theta, step),
        }
    }

    fn analytic_point(&self, theta: &[f64]) -> Result<FamilyPoint> {
        let n = self.recipe.n_modes;
        let d = 2 * n;
        let start = GaussianState::thermal(&self.recipe.thermal)?;
        let mut lambda = start.lambda().clone();
        let mut sigma = start.sigma().clone();
        let mut d_lambda = vec![CVec::zeros(d); self.dim_theta];
        let mut d_sigma = vec![CMat::zeros(d, d); self.dim_theta];

        for stage in &self.recipe.stages {
            let map = stage.map(n, theta)?;
            let s = map.scale();
            let st = s.transpose();
            for k in 0..self.dim_theta {
                d_lambda[k] = s * &d_lambda[k];
                d_sigma[k] = s * &d_sigma[k] * &st;
            }
            for (slot, p) in stage.params().into_iter().enumerate() {
                let Some(k) = p.index() else { continue };
                let dm = stage.map_derivative(n, theta, slot)?;
                let ds = dm.scale();
                d_lambda[k] += ds * &lambda + dm.shift();
                let cross = ds * &sigma * &st;
                d_sigma[k] += &cross + cross.transpose() + dm.noise();
            }
            (lambda, sigma) = map.push(&lambda, &sigma);
        }

        let state =
            GaussianState::new_normalized(lambda, sigma).map_err(|e| Error::InternalConsistency(e.to_string()))?;
        let x = x_conj(n);
        let d_lambda = d_lambda.into_iter().map(|v| (&v + &x * v.conjugate()).scale(0.5)).collect();
        let d_sigma = d_sigma
            .into_iter()
            .map(|m| {
                let m = symmetrize(&m);
                (&m + &x * m.conjugate() * &x).scale(0.5)
            })
            .collect();
        Ok(FamilyPoint { state, d_lambda, d_sigma })
    }

    fn finite_difference_point(&self, theta: &[f64], step: Option<f64>) -> Result<FamilyPoint> {
        let state = self.recipe.state_at(theta)?;
        let mut d_lambda = Vec::with_capacity(self.dim_theta);
        let mut d_sigma = Vec::with_capacity(self.dim_theta);
        for k in 0..self.dim_theta {
            let h = step.unwrap_or_else(|| 1e-6f64.max(1e-6 * theta[k].abs()));
            let mut tp = theta.to_vec();
            let mut tm = theta.to_vec();
            tp[k] += h;
            tm[k] -= h;
            let sp = self.recipe.state_at(&tp)?;
            let sm = self.recipe.state_at(&tm)?;
            d_lambda.push((sp.lambda() - sm.lambda()).unscale(2.0 * h));
            d_sigma.push(symmetrize(&(sp.sigma() - sm.sigma()).unscale(2.0 * h)));
        }
        Ok(FamilyPoint { state, d_lambda, d_sigma })
    }
}

/// Largest entrywise deviation between two maps, for tests and diagnostics.
pub fn map_distance(a: &LinearBosonicMap, b: &LinearBosonicMap) -> f64 {
    let shift = (a.shift() - b.shift()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    max_abs(&(a.scale() - b.scale())).max(max_abs(&(a.noise() - b.noise()))).max(shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::omega;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn phase_rotates_coherent_amplitude() {
        let alpha = c(0.7, -0.3);
        let out = LinearBosonicMap::phase_shift(1, 0, 0.9)
            .unwrap()
            .apply(&GaussianState::coherent(&[alpha]).unwrap())
            .unwrap();
        let want = alpha * C64::from_polar(1.0, 0.9);
        assert_abs_diff_eq!((out.lambda()[0] - want).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn two_mode_squeezer_makes_tmsv() {
        let out = LinearBosonicMap::two_mode_squeeze(2, (0, 1), 0.8)
            .unwrap()
            .apply(&GaussianState::vacuum(2).unwrap())
            .unwrap();
        assert!(max_abs(&(out.sigma() - GaussianState::tmsv(0.8).unwrap().sigma())) < 1e-13);
    }

    #[test]
    fn balanced_splitter_disentangles_tmsv() {
        let r = 0.6;
        let out = LinearBosonicMap::beam_splitter(2, (0, 1), FRAC_PI_4)
            .unwrap()
            .apply(&GaussianState::tmsv(r).unwrap())
            .unwrap();
        let s = out.sigma();
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert_abs_diff_eq!(s[(i, j)].norm(), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(s[(0, 0)].re, -0.5 * (2.0 * r).sinh(), epsilon = 1e-14);
        assert_abs_diff_eq!(s[(0, 1)].re, 0.5 * (2.0 * r).cosh(), epsilon = 1e-14);
    }

    #[test]
    fn loss_examples() {
        assert!(map_distance(&LinearBosonicMap::loss(1, 0, 1.0, 0.3).unwrap(), &LinearBosonicMap::identity(1)) == 0.0);
        let sq = GaussianState::squeezed_thermal_single(c(1.0, 2.0), 0.7, 0.1).unwrap();
        let out = LinearBosonicMap::loss(1, 0, 0.0, 0.4).unwrap().apply(&sq).unwrap();
        assert!(max_abs(&(out.sigma() - GaussianState::thermal(&[0.4]).unwrap().sigma())) < 1e-15);
        assert_abs_diff_eq!(out.lambda().norm(), 0.0);

        let tm = GaussianState::tmsv(1.0).unwrap();
        let out = LinearBosonicMap::loss(2, 0, 0.8, 0.2).unwrap().apply(&tm).unwrap();
        assert_abs_diff_eq!(2.0 * out.sigma()[(0, 1)].re, 3.289757, epsilon = 1e-6);
        assert_abs_diff_eq!(2.0 * out.sigma()[(0, 2)].re, -0.8f64.sqrt() * 2f64.sinh(), epsilon = 1e-14);
    }

    #[test]
    fn loss_rejects_out_of_range() {
        assert!(matches!(LinearBosonicMap::loss(1, 0, 1.1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(LinearBosonicMap::loss(1, 0, 0.5, -1.0), Err(Error::Domain(_))));
        assert!(matches!(LinearBosonicMap::phase_shift(1, 1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(LinearBosonicMap::damping(1, 0, -0.1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn unitary_maps_are_symplectic() {
        let n = 2;
        let maps = [
            LinearBosonicMap::phase_shift(n, 1, 0.4).unwrap(),
            LinearBosonicMap::squeeze(n, 0, 0.7, 0.3).unwrap(),
            LinearBosonicMap::two_mode_squeeze(n, (1, 0), 0.5).unwrap(),
            LinearBosonicMap::beam_splitter(n, (0, 1), 0.3).unwrap(),
        ];
        for m in maps {
            let s = m.scale();
            assert!(max_abs(&(s * omega(n) * s.transpose() - omega(n))) < 1e-12);
            assert!(max_abs(&(x_conj(n) * s * x_conj(n) - s.conjugate())) < 1e-12);
        }
    }

    #[test]
    fn damping_pipeline_matches_entry_formulas() {
        let (r, g, nb): (f64, f64, f64) = (0.7, 0.4, 0.9);
        let e = (-g).exp();
        let out = LinearBosonicMap::damping(2, 0, g, nb).unwrap().apply(&GaussianState::tmsv(r).unwrap()).unwrap();
        let s = out.sigma();
        assert_abs_diff_eq!(2.0 * s[(0, 1)].re, e * (2.0 * r).cosh() + (1.0 - e) * (2.0 * nb + 1.0), epsilon = 1e-13);
        assert_abs_diff_eq!(2.0 * s[(0, 2)].re, -(-g / 2.0).exp() * (2.0 * r).sinh(), epsilon = 1e-13);
        assert_abs_diff_eq!(2.0 * s[(2, 3)].re, (2.0 * r).cosh(), epsilon = 1e-13);
    }

    #[test]
    fn analytic_phase_derivative() {
        let alpha = c(0.6, 0.2);
        let phi = 0.3;
        let fam = ParameterizedFamily::new(
            Recipe::new(
                vec![0.0],
                vec![
                    Stage::Displace { mode: 0, re: alpha.re.into(), im: alpha.im.into() },
                    Stage::PhaseShift { mode: 0, angle: Param::Theta(0) },
                ],
            ),
            1,
        )
        .unwrap();
        let (dl, ds) = fam.derivative(&[phi], 0).unwrap();
        let want = C64::i() * alpha * C64::from_polar(1.0, phi);
        assert_abs_diff_eq!((dl[0] - want).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((dl[1] - want.conj()).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(max_abs(&ds), 0.0);
    }

    #[test]
    fn displacement_family_has_constant_covariance() {
        let fam = ParameterizedFamily::new(
            Recipe::new(
                vec![0.2, 0.2],
                vec![
                    Stage::TwoModeSqueeze { modes: (0, 1), r: 0.4.into() },
                    Stage::Displace { mode: 0, re: Param::Theta(0), im: Param::Theta(1) },
                ],
            ),
            2,
        )
        .unwrap();
        let p = fam.point(&[0.1, -0.2]).unwrap();
        assert_eq!(max_abs(&p.d_sigma[0]), 0.0);
        assert_eq!(max_abs(&p.d_sigma[1]), 0.0);
    }

    #[test]
    fn rejects_bad_recipes() {
        let bad_mode = Recipe::new(vec![0.0], vec![Stage::PhaseShift { mode: 1, angle: Param::Theta(0) }]);
        assert!(matches!(ParameterizedFamily::new(bad_mode, 1), Err(Error::Domain(_))));
        let bad_theta = Recipe::new(vec![0.0], vec![Stage::PhaseShift { mode: 0, angle: Param::Theta(2) }]);
        assert!(matches!(ParameterizedFamily::new(bad_theta, 1), Err(Error::Domain(_))));
        let loss =
            Recipe::new(vec![0.1], vec![Stage::Loss { mode: 0, transmissivity: Param::Theta(0), bath: 0.0.into() }]);
        let fam = ParameterizedFamily::new(loss, 1).unwrap();
        assert!(matches!(fam.point(&[1.5]), Err(Error::Domain(_))));
        assert!(matches!(fam.point(&[0.0]), Err(Error::Domain(_))));
    }
}
