//! Gaussian states in the interleaved ladder ordering and quadratic observables.
//!
//! A state is described by its mean `lambda^mu = <a^mu>` and symmetrized covariance
//! `sigma^{mu nu} = <{a~^mu, a~^nu}>/2` with `a~ = a - lambda`. Units are hbar-free
//! with `[q, p] = i`, so the vacuum quadrature variance is 1/2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    max_abs, omega, omega_real, quad_transform, symmetrize, to_complex, x_conj, CMat, CVec, RMat, C64,
};

/// Absolute tolerance for the symmetry and conjugation identities, scaled by the largest entry.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Smallest eigenvalue allowed for the uncertainty matrix `sigma_q + (i/2) Omega`.
pub const PHYSICALITY_TOL: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateWire", into = "StateWire")]
pub struct GaussianState {
    n_modes: usize,
    lambda: CVec,
    sigma: CMat,
}

fn scale_of(sigma: &CMat, lambda: &CVec) -> f64 {
    let lam = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
    1.0f64.max(max_abs(sigma)).max(lam)
}

fn check_nonneg(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite and non-negative, got {v}")))
    }
}

impl GaussianState {
    /// Validated constructor; fails if any state invariant is violated.
    pub fn new(lambda: CVec, sigma: CMat) -> Result<Self> {
        let dim = lambda.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::Dimension(format!("mean vector length {dim} is not a positive even number")));
        }
        if sigma.shape() != (dim, dim) {
            return Err(Error::Dimension(format!(
                "covariance is {}x{}, expected {dim}x{dim}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if lambda.iter().chain(sigma.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("state contains non-finite entries".into()));
        }
        let state = GaussianState { n_modes: dim / 2, lambda, sigma };
        state.validate()?;
        Ok(state)
    }

    /// Projects `lambda` and `sigma` onto the symmetric, conjugation-consistent subspace
    /// before validating. Used for channel outputs that carry roundoff.
    pub fn new_normalized(lambda: CVec, sigma: CMat) -> Result<Self> {
        let dim = lambda.len();
        if dim == 0 || !dim.is_multiple_of(2) || sigma.shape() != (dim, dim) {
            return Self::new(lambda, sigma);
        }
        let x = x_conj(dim / 2);
        let sym = symmetrize(&sigma);
        let sigma = (&sym + &x * sym.conjugate() * &x).scale(0.5);
        let lambda = (&lambda + &x * lambda.conjugate()).scale(0.5);
        Self::new(lambda, sigma)
    }

    pub fn vacuum(n_modes: usize) -> Result<Self> {
        Self::thermal(&vec![0.0; n_modes])
    }

    /// Product of thermal states with the given mean occupations.
    pub fn thermal(occupations: &[f64]) -> Result<Self> {
        if occupations.is_empty() {
            return Err(Error::Dimension("at least one mode is required".into()));
        }
        let dim = 2 * occupations.len();
        let mut sigma = CMat::zeros(dim, dim);
        for (k, &nu) in occupations.iter().enumerate() {
            check_nonneg("thermal occupation", nu)?;
            let v = C64::new(nu + 0.5, 0.0);
            sigma[(2 * k, 2 * k + 1)] = v;
            sigma[(2 * k + 1, 2 * k)] = v;
        }
        Self::new(CVec::zeros(dim), sigma)
    }

    /// Product of coherent states with amplitudes `alphas`.
    pub fn coherent(alphas: &[C64]) -> Result<Self> {
        let vac = Self::vacuum(alphas.len())?;
        let lambda = CVec::from_iterator(alphas.len() * 2, alphas.iter().flat_map(|a| [*a, a.conj()]));
        Self::new(lambda, vac.sigma)
    }

    /// Two-mode squeezed vacuum with squeezing `r`.
    pub fn tmsv(r: f64) -> Result<Self> {
        Self::two_mode_squeezed_thermal(r, 0.0)
    }

    /// Two-mode squeezed thermal state; thermal occupation `nu` in each mode before squeezing.
    pub fn two_mode_squeezed_thermal(r: f64, nu: f64) -> Result<Self> {
        check_nonneg("thermal occupation", nu)?;
        if !r.is_finite() {
            return Err(Error::Domain(format!("squeezing must be finite, got {r}")));
        }
        let y = 2.0 * nu + 1.0;
        let c = C64::new(0.5 * y * (2.0 * r).cosh(), 0.0);
        let s = C64::new(-0.5 * y * (2.0 * r).sinh(), 0.0);
        let mut sigma = CMat::zeros(4, 4);
        for (i, j, v) in [(0, 1, c), (2, 3, c), (0, 2, s), (1, 3, s)] {
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
        Self::new(CVec::zeros(4), sigma)
    }

    /// Displaced squeezed thermal state `D(lambda0) S(r) rho_thermal S^dag D^dag` of one mode.
    pub fn squeezed_thermal_single(lambda0: C64, r: f64, nu: f64) -> Result<Self> {
        check_nonneg("thermal occupation", nu)?;
        if !r.is_finite() {
            return Err(Error::Domain(format!("squeezing must be finite, got {r}")));
        }
        let y = 2.0 * nu + 1.0;
        let c = C64::new(0.5 * y * (2.0 * r).cosh(), 0.0);
        let s = C64::new(-0.5 * y * (2.0 * r).sinh(), 0.0);
        let sigma = CMat::from_row_slice(2, 2, &[s, c, c, s]);
        Self::new(CVec::from_vec(vec![lambda0, lambda0.conj()]), sigma)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn lambda(&self) -> &CVec {
        &self.lambda
    }

    pub fn sigma(&self) -> &CMat {
        &self.sigma
    }

    /// `Sigma + Omega/2`, the matrix of centered second moments `<a~^mu a~^nu>`.
    pub fn sigma_plus(&self) -> CMat {
        &self.sigma + omega(self.n_modes).scale(0.5)
    }

    /// `Sigma - Omega/2`, equal to the transpose of `sigma_plus`.
    pub fn sigma_minus(&self) -> CMat {
        &self.sigma - omega(self.n_modes).scale(0.5)
    }

    /// Real covariance in `(q1, p1, q2, p2, …)` ordering.
    pub fn quadrature_covariance(&self) -> RMat {
        let h = quad_transform(self.n_modes);
        (&h * &self.sigma * h.transpose()).map(|z| z.re)
    }

    /// Characteristic function `exp(Sigma^{mu nu} z_mu z_nu / 2 - lambda^mu z_mu)` with `z_mu = Omega_{mu nu} z^nu`.
    ///
    /// Physical arguments obey `conj(z) = X z`; other arguments are accepted and evaluated
    /// by the same analytic formula.
    pub fn char_fn(&self, z: &CVec) -> Result<C64> {
        if z.len() != self.dim() {
            return Err(Error::Dimension(format!("argument length {} for a {}-slot state", z.len(), self.dim())));
        }
        let zl = omega(self.n_modes) * z;
        let quad = (zl.transpose() * &self.sigma * &zl)[(0, 0)];
        let lin = (self.lambda.transpose() * &zl)[(0, 0)];
        Ok((quad * 0.5 - lin).exp())
    }

    /// `<M>` by the Gaussian moment formula.
    pub fn expectation(&self, obs: &QuadraticObservable) -> Result<f64> {
        self.check_observable(obs)?;
        let m = &obs.quad;
        let second = self.sigma_plus() + &self.lambda * self.lambda.transpose();
        let v = m.component_mul(&second).sum()
            + (obs.lin.transpose() * &self.lambda)[(0, 0)]
            + C64::new(obs.const_term, 0.0);
        real_part("expectation", v, self.moment_scale(obs))
    }

    /// `<M^2> - <M>^2` from the Wick factorization of centered fourth moments.
    pub fn variance(&self, obs: &QuadraticObservable) -> Result<f64> {
        self.check_observable(obs)?;
        let m = &obs.quad;
        let sp = self.sigma_plus();
        let sm = self.sigma_minus();
        let k = (m * &self.lambda).scale(2.0) + &obs.lin;
        let quad = (m * &sp * m * &sm).trace() * 2.0;
        let lin = (k.transpose() * &self.sigma * &k)[(0, 0)];
        let v = real_part("variance", quad + lin, self.moment_scale(obs).powi(2))?;
        Ok(v.max(0.0))
    }

    fn moment_scale(&self, obs: &QuadraticObservable) -> f64 {
        let s = scale_of(&self.sigma, &self.lambda);
        let o = 1.0f64.max(max_abs(&obs.quad)).max(obs.lin.iter().map(|z| z.norm()).fold(0.0, f64::max));
        s * s * o
    }

    fn check_observable(&self, obs: &QuadraticObservable) -> Result<()> {
        if obs.lin.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "observable acts on {} slots, state has {}",
                obs.lin.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Parses `{n_modes, lambda, sigma}` and validates the result.
    ///
    /// Unlike plain `serde_json::from_str`, validation failures keep their own error kind.
    pub fn from_json(text: &str) -> Result<Self> {
        GaussianState::try_from(serde_json::from_str::<StateWire>(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serialization cannot fail")
    }

    /// Re-checks symmetry, conjugation consistency and physicality.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_modes;
        let x = x_conj(n);
        let tol = IDENTITY_TOL * scale_of(&self.sigma, &self.lambda);

        let asym = max_abs(&(&self.sigma - self.sigma.transpose()));
        if asym > tol {
            return Err(Error::InvalidState { what: "covariance symmetry", deviation: asym });
        }
        let conj = max_abs(&(&x * &self.sigma * &x - self.sigma.conjugate()));
        if conj > tol {
            return Err(Error::InvalidState { what: "covariance conjugation structure", deviation: conj });
        }
        let lam = (&x * &self.lambda - self.lambda.conjugate()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if lam > tol {
            return Err(Error::InvalidState { what: "mean conjugation structure", deviation: lam });
        }

        let h = quad_transform(n);
        let sq = &h * &self.sigma * h.transpose();
        let imag = sq.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag > tol {
            return Err(Error::InvalidState { what: "real quadrature covariance", deviation: imag });
        }
        let uncertainty = sq.map(|z| C64::new(z.re, 0.0)) + to_complex(&omega_real(n)).scale(0.5) * C64::i();
        let min_eig = uncertainty.symmetric_eigenvalues().min();
        if min_eig < PHYSICALITY_TOL * scale_of(&self.sigma, &self.lambda) {
            return Err(Error::Unphysical { min_eigenvalue: min_eig });
        }
        Ok(())
    }
}

fn real_part(what: &str, v: C64, scale: f64) -> Result<f64> {
    if v.im.abs() > 1e-10 * scale.max(1.0) {
        return Err(Error::NumericalFailure(format!("{what} has imaginary part {:.3e}", v.im)));
    }
    Ok(v.re)
}

/// Hermitian observable `M = m_{mu nu} a^mu a^nu + l_mu a^mu + c` with symmetric `m`
/// (so the quadratic part is symmetrically ordered).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObservable {
    quad: CMat,
    lin: CVec,
    const_term: f64,
}

impl QuadraticObservable {
    /// Takes a symmetrically ordered quadratic part; `quad` is symmetrized first.
    pub fn new(quad: CMat, lin: CVec, const_term: f64) -> Result<Self> {
        let dim = lin.len();
        if dim == 0 || !dim.is_multiple_of(2) || quad.shape() != (dim, dim) {
            return Err(Error::Dimension(format!(
                "quadratic part {}x{} does not match linear part of length {dim}",
                quad.nrows(),
                quad.ncols()
            )));
        }
        let quad = symmetrize(&quad);
        let x = x_conj(dim / 2);
        let scale = 1.0f64.max(max_abs(&quad)).max(lin.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let dq = max_abs(&(&x * &quad * &x - quad.conjugate()));
        let dl = (&x * &lin - lin.conjugate()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dq.max(dl) > IDENTITY_TOL * scale {
            return Err(Error::Domain(format!("observable is not Hermitian (deviation {:.3e})", dq.max(dl))));
        }
        if !const_term.is_finite() {
            return Err(Error::Domain("observable constant must be finite".into()));
        }
        Ok(QuadraticObservable { quad, lin, const_term })
    }

    /// Takes `sum m_{mu nu} a^mu a^nu` in the written operator order; the commutator
    /// constant from symmetrizing is absorbed into the scalar term.
    pub fn from_ordered(quad: CMat, lin: CVec, const_term: f64) -> Result<Self> {
        let dim = lin.len();
        if dim == 0 || !dim.is_multiple_of(2) || quad.shape() != (dim, dim) {
            return Self::new(quad, lin, const_term);
        }
        let shift = quad.component_mul(&omega(dim / 2)).sum() * 0.5;
        if shift.im.abs() > IDENTITY_TOL * 1.0f64.max(max_abs(&quad)) {
            return Err(Error::Domain(format!("observable ordering constant {shift} is not real")));
        }
        Self::new(quad, lin, const_term + shift.re)
    }

    /// `a_k^dag a_k`.
    pub fn number(n_modes: usize, mode: usize) -> Result<Self> {
        check_mode(n_modes, mode)?;
        let mut m = CMat::zeros(2 * n_modes, 2 * n_modes);
        m[(2 * mode + 1, 2 * mode)] = C64::new(1.0, 0.0);
        Self::from_ordered(m, CVec::zeros(2 * n_modes), 0.0)
    }

    /// Rotated quadrature `(a e^{-i angle} + a^dag e^{i angle}) / sqrt(2)`; angle 0 gives `q`.
    pub fn quadrature(n_modes: usize, mode: usize, angle: f64) -> Result<Self> {
        check_mode(n_modes, mode)?;
        let mut l = CVec::zeros(2 * n_modes);
        let f = std::f64::consts::FRAC_1_SQRT_2;
        l[2 * mode] = C64::from_polar(f, -angle);
        l[2 * mode + 1] = C64::from_polar(f, angle);
        Self::new(CMat::zeros(2 * n_modes, 2 * n_modes), l, 0.0)
    }

    pub fn quad(&self) -> &CMat {
        &self.quad
    }

    pub fn lin(&self) -> &CVec {
        &self.lin
    }

    pub fn const_term(&self) -> f64 {
        self.const_term
    }
}

fn check_mode(n_modes: usize, mode: usize) -> Result<()> {
    if mode >= n_modes {
        return Err(Error::Domain(format!("mode {mode} out of range for {n_modes} modes")));
    }
    Ok(())
}

/// JSON shape: `{n_modes, lambda: [[re, im], …], sigma: [[[re, im], …], …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateWire {
    pub n_modes: usize,
    pub lambda: Vec<[f64; 2]>,
    pub sigma: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<StateWire> for GaussianState {
    type Error = Error;

    fn try_from(w: StateWire) -> Result<Self> {
        let dim = w.n_modes.checked_mul(2).ok_or_else(|| Error::Parse("n_modes too large".into()))?;
        if w.n_modes == 0 || w.lambda.len() != dim || w.sigma.len() != dim || w.sigma.iter().any(|r| r.len() != dim) {
            return Err(Error::Parse(format!("state arrays do not match n_modes = {}", w.n_modes)));
        }
        let lambda = CVec::from_iterator(dim, w.lambda.iter().map(|p| C64::new(p[0], p[1])));
        let sigma = CMat::from_fn(dim, dim, |i, j| C64::new(w.sigma[i][j][0], w.sigma[i][j][1]));
        GaussianState::new(lambda, sigma)
    }
}

impl From<GaussianState> for StateWire {
    fn from(s: GaussianState) -> Self {
        let dim = s.dim();
        StateWire {
            n_modes: s.n_modes,
            lambda: s.lambda.iter().map(|z| [z.re, z.im]).collect(),
            sigma: (0..dim).map(|i| (0..dim).map(|j| [s.sigma[(i, j)].re, s.sigma[(i, j)].im]).collect()).collect(),
        }
    }
}
