//! Logarithmic derivatives and Fisher matrices from their defining equations.

use gqcrb_core::channels::Recipe;
use gqcrb_core::linalg::matrix_abs_trace;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::dense::{conjugate_by, frobenius, hermitian_eigen, mul, CMat, Eigen};
use crate::error::{OracleError, Result};
use crate::state::{build_state, FockDensityMatrix, FockOptions};

/// Central-difference step for `d rho / d theta`.
pub const DERIVATIVE_STEP: f64 = 1e-4;
/// Parameter shift for the fidelity estimate.
pub const FIDELITY_STEP: f64 = 1e-3;
/// Eigenvalues of `rho` at or below this are treated as outside its support.
pub const SUPPORT_FLOOR: f64 = 1e-10;
/// Largest relative part of `d rho` outside the support for which the RLD still exists.
pub const RLD_RESIDUAL_TOL: f64 = 1e-4;

/// `rho(theta)` and its central-difference derivatives along every parameter.
pub fn state_derivatives(
    recipe: &Recipe,
    theta: &[f64],
    options: FockOptions,
) -> Result<(FockDensityMatrix, Vec<CMat>)> {
    let state = build_state(recipe, theta, options)?;
    let derivatives = (0..theta.len())
        .map(|k| {
            let shifted = |sign: f64| {
                let mut t = theta.to_vec();
                t[k] += sign * DERIVATIVE_STEP;
                build_state(recipe, &t, options)
            };
            let (plus, minus) = (shifted(1.0)?, shifted(-1.0)?);
            Ok((plus.rho() - minus.rho()).scale(0.5 / DERIVATIVE_STEP))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((state, derivatives))
}

#[derive(Debug, Clone)]
pub struct SldOracle {
    pub state: FockDensityMatrix,
    pub derivatives: Vec<CMat>,
    /// Symmetric logarithmic derivatives in the number basis.
    pub operators: Vec<CMat>,
    pub fisher: DMatrix<f64>,
}

/// Both Fisher matrices from one set of state derivatives.
#[derive(Debug, Clone)]
pub struct OracleFisher {
    pub sld: SldOracle,
    pub rld: Result<CMat>,
}

struct Spectral {
    p: nalgebra::DVector<f64>,
    v: CMat,
    /// Derivatives in the eigenbasis of `rho`.
    rotated: Vec<CMat>,
}

impl Spectral {
    fn new(state: &FockDensityMatrix, derivatives: &[CMat]) -> Self {
        let Eigen { values: p, vectors: v } = hermitian_eigen(state.rho());
        let rotated = derivatives.iter().map(|d| conjugate_by(&v, d)).collect();
        Spectral { p, v, rotated }
    }

    /// `(L_k)_{mn} = 2 (d_k rho)_{mn} / (p_m + p_n)` and `F_ij = Re Tr[rho L_i L_j]`.
    fn sld(&self) -> (Vec<CMat>, DMatrix<f64>) {
        let n = self.p.len();
        let weight = DMatrix::from_fn(n, n, |m, k| {
            let s = self.p[m] + self.p[k];
            if s > SUPPORT_FLOOR {
                2.0 / s
            } else {
                0.0
            }
        });
        let d = self.rotated.len();
        let fisher = DMatrix::from_fn(d, d, |i, j| {
            let pairs = self.rotated[i].iter().zip(self.rotated[j].iter()).zip(weight.iter());
            pairs.map(|((a, b), w)| w * (a * b.conj()).re).sum::<f64>()
        });
        let operators = self
            .rotated
            .iter()
            .map(|r| {
                let l = r.zip_map(&weight, |a, w| a * w);
                conjugate_by(&self.v.adjoint(), &l)
            })
            .collect();
        (operators, (&fisher + fisher.transpose()).scale(0.5))
    }

    /// `F_ij = Tr[rho L_i L_j^dag]` with `L_k = rho^+ d_k rho`.
    fn rld(&self) -> Result<CMat> {
        let p = &self.p;
        let outside: Vec<usize> = (0..p.len()).filter(|&m| p[m] <= SUPPORT_FLOOR).collect();
        for r in &self.rotated {
            let total = frobenius(r);
            let off = outside.iter().map(|&m| r.row(m).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>().sqrt();
            if total > 0.0 && off / total > RLD_RESIDUAL_TOL {
                return Err(OracleError::RldUndefined { residual: off / total });
            }
        }
        let d = self.rotated.len();
        let f = CMat::from_fn(d, d, |i, j| {
            let (a, b) = (&self.rotated[i], &self.rotated[j]);
            (0..p.len())
                .filter(|&m| p[m] > SUPPORT_FLOOR)
                .map(|m| a.row(m).iter().zip(b.row(m).iter()).map(|(x, y)| x * y.conj()).sum::<C64>() / p[m])
                .sum()
        });
        Ok((&f + f.adjoint()).scale(0.5))
    }
}

/// SLD and RLD Fisher matrices of the family at `theta`.
pub fn oracle_fisher(recipe: &Recipe, theta: &[f64], options: FockOptions) -> Result<OracleFisher> {
    let (state, derivatives) = state_derivatives(recipe, theta, options)?;
    let spectral = Spectral::new(&state, &derivatives);
    let (operators, fisher) = spectral.sld();
    let rld = spectral.rld();
    Ok(OracleFisher { sld: SldOracle { state, derivatives, operators, fisher }, rld })
}

pub fn sld_oracle(recipe: &Recipe, theta: &[f64], options: FockOptions) -> Result<SldOracle> {
    let (state, derivatives) = state_derivatives(recipe, theta, options)?;
    let (operators, fisher) = Spectral::new(&state, &derivatives).sld();
    Ok(SldOracle { state, derivatives, operators, fisher })
}

pub fn sld_qfi_oracle(recipe: &Recipe, theta: &[f64], options: FockOptions) -> Result<DMatrix<f64>> {
    Ok(sld_oracle(recipe, theta, options)?.fisher)
}

/// Fails with [`OracleError::RldUndefined`] when `d rho` has weight outside the support of `rho`.
pub fn rld_qfi_oracle(recipe: &Recipe, theta: &[f64], options: FockOptions) -> Result<CMat> {
    let (state, derivatives) = state_derivatives(recipe, theta, options)?;
    Spectral::new(&state, &derivatives).rld()
}

fn sqrt_psd(rho: &CMat) -> CMat {
    let Eigen { values, vectors } = hermitian_eigen(rho);
    let s = CMat::from_diagonal(&values.map(|p| C64::new(p.max(0.0).sqrt(), 0.0)));
    mul(&mul(&vectors, &s), &vectors.adjoint())
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2` of the trace-normalized states,
/// evaluated as the squared trace norm of `sqrt(rho1) sqrt(rho2)`.
pub fn fidelity(a: &FockDensityMatrix, b: &FockDensityMatrix) -> Result<f64> {
    if a.rho().shape() != b.rho().shape() {
        return Err(OracleError::Dimension("states live on different spaces".into()));
    }
    let product = mul(&sqrt_psd(&a.rho().unscale(a.trace())), &sqrt_psd(&b.rho().unscale(b.trace())));
    let norm = matrix_abs_trace(&product).map_err(|e| OracleError::NumericalFailure(e.to_string()))?;
    if !norm.is_finite() {
        return Err(OracleError::NumericalFailure("fidelity is not finite".into()));
    }
    Ok(norm * norm)
}

/// `8 (1 - sqrt F(rho_theta, rho_{theta + h e_k})) / h^2`.
pub fn fidelity_qfi_oracle(recipe: &Recipe, theta: &[f64], k: usize, options: FockOptions) -> Result<f64> {
    if k >= theta.len() {
        return Err(OracleError::Domain(format!("parameter {k} of {}", theta.len())));
    }
    let here = build_state(recipe, theta, options)?;
    let mut shifted = theta.to_vec();
    shifted[k] += FIDELITY_STEP;
    let there = build_state(recipe, &shifted, options)?;
    let f = fidelity(&here, &there)?;
    Ok(8.0 * (1.0 - f.min(1.0).sqrt()) / (FIDELITY_STEP * FIDELITY_STEP))
}

/// `Tr[rho (L_i L_j - L_j L_i)]`.
pub fn commutator_trace_oracle(state: &FockDensityMatrix, li: &CMat, lj: &CMat) -> Result<C64> {
    if li.shape() != state.rho().shape() || lj.shape() != state.rho().shape() {
        return Err(OracleError::Dimension("operators and state sizes differ".into()));
    }
    state.expectation(&(mul(li, lj) - mul(lj, li)))
}
