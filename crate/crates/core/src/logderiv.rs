//! Right and symmetric logarithmic derivatives of Gaussian families, the Fisher
//! matrices built from them, the two Cramér–Rao bounds and the attainability check.
//!
//! Both derivatives take the centered form `L = A_{mu nu}(a~^mu a~^nu - Sigma^{mu nu}) + B_mu a~^mu`.
//! For the RLD, `Sigma_- A Sigma_+ = dSigma / 2` and `Sigma_- B = d lambda`.
//! For the SLD, `Sigma A Sigma - Omega A Omega / 4 = dSigma / 2` and `Sigma B = d lambda`.
//! Fisher entries are `F_ij = dSigma_j : A_i + d lambda_j . B_i`.
//! Bounds are per single measurement.

use serde::Serialize;

use crate::channels::{FamilyPoint, ParameterizedFamily};
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::linalg::{
    matrix_abs_trace, max_abs, omega, solve_least_squares, solve_rld_quadratic, solve_stein, CMat, CVec, RMat, C64,
    DEFAULT_RLD_CONDITION_CAP, DEFAULT_STEIN_TOL,
};

/// Fisher matrices whose condition number exceeds this are reported as unidentifiable.
pub const FISHER_CONDITION_CAP: f64 = 1e12;
/// Allowed relative deviation from Hermitian (RLD) or real symmetric (SLD) structure.
pub const FISHER_SYMMETRY_TOL: f64 = 1e-9;
/// Sign relating the stored contraction to `Tr[rho [L_i, L_j]]`, fixed against the Fock oracle.
pub const ATTAINABILITY_SIGN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Rld,
    Sld,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogDerivativeCoefficients {
    pub flavor: Flavor,
    /// Symmetric quadratic coefficient matrix.
    pub quad: CMat,
    /// Linear coefficient vector.
    pub lin: CVec,
}

fn check_tangent(state: &GaussianState, d_lambda: &CVec, d_sigma: &CMat) -> Result<()> {
    let d = state.dim();
    if d_lambda.len() != d || d_sigma.shape() != (d, d) {
        return Err(Error::Dimension(format!("derivatives do not match a {d}-slot state")));
    }
    Ok(())
}

pub fn rld_coefficients(state: &GaussianState, d_lambda: &CVec, d_sigma: &CMat) -> Result<LogDerivativeCoefficients> {
    check_tangent(state, d_lambda, d_sigma)?;
    let sm = state.sigma_minus();
    let sp = state.sigma_plus();
    let quad = solve_rld_quadratic(&sm, &sp, &d_sigma.scale(0.5), DEFAULT_RLD_CONDITION_CAP)?;
    let lin = sm.clone().lu().solve(d_lambda).ok_or(Error::RldUndefined { condition: f64::INFINITY })?;
    Ok(LogDerivativeCoefficients { flavor: Flavor::Rld, quad, lin })
}

pub fn sld_coefficients(state: &GaussianState, d_lambda: &CVec, d_sigma: &CMat) -> Result<LogDerivativeCoefficients> {
    check_tangent(state, d_lambda, d_sigma)?;
    let n = state.n_modes();
    let quad = solve_stein(state.sigma(), &omega(n), &d_sigma.scale(0.5), DEFAULT_STEIN_TOL)?;
    let lin = solve_least_squares(state.sigma(), d_lambda, DEFAULT_STEIN_TOL)?;
    Ok(LogDerivativeCoefficients { flavor: Flavor::Sld, quad, lin })
}

fn coefficients(flavor: Flavor, point: &FamilyPoint) -> Result<Vec<LogDerivativeCoefficients>> {
    point
        .d_lambda
        .iter()
        .zip(&point.d_sigma)
        .map(|(dl, ds)| match flavor {
            Flavor::Rld => rld_coefficients(&point.state, dl, ds),
            Flavor::Sld => sld_coefficients(&point.state, dl, ds),
        })
        .collect()
}

/// `F_ij = dSigma_j : A_i + d lambda_j . B_i`, then projected onto Hermitian matrices.
pub fn fisher_from_coefficients(
    coeffs: &[LogDerivativeCoefficients],
    d_lambda: &[CVec],
    d_sigma: &[CMat],
) -> Result<CMat> {
    let d = coeffs.len();
    if d_lambda.len() != d || d_sigma.len() != d {
        return Err(Error::Dimension("one coefficient set per parameter is required".into()));
    }
    let raw = CMat::from_fn(d, d, |i, j| {
        d_sigma[j].component_mul(&coeffs[i].quad).sum() + (d_lambda[j].transpose() * &coeffs[i].lin)[(0, 0)]
    });
    let herm = (&raw + raw.adjoint()).scale(0.5);
    let dev = max_abs(&(&raw - &herm));
    if dev > FISHER_SYMMETRY_TOL * 1.0f64.max(max_abs(&herm)) {
        return Err(Error::NumericalFailure(format!("Fisher matrix deviates from Hermitian by {dev:.3e}")));
    }
    Ok(herm)
}

fn real_symmetric(f: &CMat) -> Result<RMat> {
    let imag = f.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > FISHER_SYMMETRY_TOL * 1.0f64.max(max_abs(f)) {
        return Err(Error::NumericalFailure(format!("SLD Fisher matrix has imaginary part {imag:.3e}")));
    }
    Ok(f.map(|z| z.re))
}

/// Fisher matrix of the requested flavor; SLD results are real with zero imaginary part.
pub fn qfi_matrix(family: &ParameterizedFamily, theta: &[f64], flavor: Flavor) -> Result<CMat> {
    let point = family.point(theta)?;
    let coeffs = coefficients(flavor, &point)?;
    let f = fisher_from_coefficients(&coeffs, &point.d_lambda, &point.d_sigma)?;
    match flavor {
        Flavor::Rld => Ok(f),
        Flavor::Sld => Ok(real_symmetric(&f)?.map(|x| C64::new(x, 0.0))),
    }
}

fn weight_or_identity(weight: Option<&RMat>, d: usize) -> Result<RMat> {
    match weight {
        Some(g) if g.shape() != (d, d) => Err(Error::Dimension(format!("weight matrix must be {d}x{d}"))),
        Some(g) => Ok(g.clone()),
        None => Ok(RMat::identity(d, d)),
    }
}

/// Inverse of a Hermitian Fisher matrix, or the direction along which it is singular.
fn invert_fisher(f: &CMat) -> Result<CMat> {
    let d = f.nrows();
    if d == 0 || !f.is_square() {
        return Err(Error::Dimension("Fisher matrix must be square and non-empty".into()));
    }
    let eig = f.clone().symmetric_eigen();
    let (imin, &lmin) =
        eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).expect("non-empty");
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if lmax.is_nan() || lmax <= 0.0 || lmin.abs() < lmax / FISHER_CONDITION_CAP {
        let v = eig.eigenvectors.column(imin).into_owned();
        let pivot = v.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).copied().unwrap_or(C64::new(1.0, 0.0));
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
        return Err(Error::Unidentifiable { direction: v.iter().map(|z| (z * phase).re).collect() });
    }
    f.clone().try_inverse().ok_or_else(|| Error::NumericalFailure("Fisher matrix inversion failed".into()))
}

/// `Tr[G F^{-1}]` for the real symmetric SLD Fisher matrix.
pub fn bound_sld(f_sld: &RMat, weight: Option<&RMat>) -> Result<f64> {
    let g = weight_or_identity(weight, f_sld.nrows())?;
    let inv = invert_fisher(&f_sld.map(|x| C64::new(x, 0.0)))?;
    Ok((g * inv.map(|z| z.re)).trace())
}

/// `Tr[G Re(F^{-1})] + Tr|G Im(F^{-1})|` for the Hermitian RLD Fisher matrix.
pub fn bound_rld(f_rld: &CMat, weight: Option<&RMat>) -> Result<f64> {
    let g = weight_or_identity(weight, f_rld.nrows())?;
    let inv = invert_fisher(f_rld)?;
    let re = inv.map(|z| z.re);
    let im = inv.map(|z| z.im);
    let gi = (&g * im).map(|x| C64::new(x, 0.0));
    Ok((&g * re).trace() + matrix_abs_trace(&gi)?)
}

/// `T_ij = 4 Tr[Sigma A_i Omega A_j] + B_i^T Omega B_j`, equal to `Tr[rho [L_i, L_j]]` for SLD coefficients.
pub fn attainability_matrix(state: &GaussianState, sld: &[LogDerivativeCoefficients]) -> Result<CMat> {
    let dim = state.dim();
    if sld.iter().any(|c| c.flavor != Flavor::Sld || c.quad.shape() != (dim, dim) || c.lin.len() != dim) {
        return Err(Error::Domain("attainability needs SLD coefficients matching the state".into()));
    }
    let w = omega(state.n_modes());
    let sigma = state.sigma();
    let d = sld.len();
    let t = CMat::from_fn(d, d, |i, j| {
        let quad = (sigma * &sld[i].quad * &w * &sld[j].quad).trace() * 4.0;
        let lin = (sld[i].lin.transpose() * &w * &sld[j].lin)[(0, 0)];
        (quad + lin) * ATTAINABILITY_SIGN
    });
    Ok((&t - t.transpose()).scale(0.5))
}

/// Everything computed at one parameter point.
#[derive(Debug, Clone)]
pub struct QfiReport {
    pub d: usize,
    pub f_rld: Option<CMat>,
    pub f_sld: RMat,
    pub b_r: Option<f64>,
    pub b_s: f64,
    pub t_attain: CMat,
    pub rld_defined: bool,
    /// Why the RLD quantities are missing, if they are.
    pub rld_error: Option<Error>,
}

/// Both flavors, both bounds and the attainability matrix at `theta`.
///
/// RLD failures (pure states, singular RLD Fisher matrix) are recorded in the report;
/// SLD failures are returned as errors.
pub fn analyze(family: &ParameterizedFamily, theta: &[f64]) -> Result<QfiReport> {
    analyze_point(&family.point(theta)?)
}

pub fn analyze_point(point: &FamilyPoint) -> Result<QfiReport> {
    let d = point.d_lambda.len();
    let sld = coefficients(Flavor::Sld, point)?;
    let f_sld = real_symmetric(&fisher_from_coefficients(&sld, &point.d_lambda, &point.d_sigma)?)?;
    let b_s = bound_sld(&f_sld, None)?;
    let t_attain = attainability_matrix(&point.state, &sld)?;

    let rld =
        coefficients(Flavor::Rld, point).and_then(|c| fisher_from_coefficients(&c, &point.d_lambda, &point.d_sigma));
    let (f_rld, b_r, rld_error) = match rld {
        Ok(f) => match bound_rld(&f, None) {
            Ok(b) => (Some(f), Some(b), None),
            Err(e) => (Some(f), None, Some(e)),
        },
        Err(e) => (None, None, Some(e)),
    };
    Ok(QfiReport { d, rld_defined: f_rld.is_some(), f_rld, f_sld, b_r, b_s, t_attain, rld_error })
}

#[derive(Serialize)]
struct ReportWire {
    d: usize,
    #[serde(rename = "F_rld")]
    f_rld: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(rename = "F_sld")]
    f_sld: Vec<Vec<f64>>,
    #[serde(rename = "B_R")]
    b_r: Option<f64>,
    #[serde(rename = "B_S")]
    b_s: f64,
    #[serde(rename = "T_attain")]
    t_attain: Vec<Vec<[f64; 2]>>,
    rld_defined: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    rld_error: Option<&'static str>,
}

fn complex_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

impl Serialize for QfiReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportWire {
            d: self.d,
            f_rld: self.f_rld.as_ref().map(complex_rows),
            f_sld: (0..self.d).map(|i| (0..self.d).map(|j| self.f_sld[(i, j)]).collect()).collect(),
            b_r: self.b_r,
            b_s: self.b_s,
            t_attain: complex_rows(&self.t_attain),
            rld_defined: self.rld_defined,
            rld_error: self.rld_error.as_ref().map(Error::kind),
        }
        .serialize(s)
    }
}
