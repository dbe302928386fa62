//! Operators assembled from ladder matrices: quadratic observables, displacement-type
//! exponentials and log-derivative operators written in the engine's coefficient form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::dense::{frobenius, mul, CMat};
use crate::error::{OracleError, Result};
use crate::ops::{ladder, operator, Basis, Monomial};
use crate::state::FockDensityMatrix;

/// Levels added before forming products, so that truncation only affects the dropped edge.
const PRODUCT_PAD: usize = 4;
/// Levels added before exponentiating a linear generator.
const EXP_PAD: usize = 30;

/// Ladder operators in slot order `a_1, a_1^dag, a_2, a_2^dag, ...`.
pub fn ladder_set(basis: Basis) -> Vec<CMat> {
    (0..basis.n_modes).flat_map(|m| [ladder(basis, m, false), ladder(basis, m, true)]).collect()
}

/// Restricts an operator on `from` to the box of `to_dim` levels per mode.
pub fn truncate(op: &CMat, from: Basis, to_dim: usize) -> CMat {
    let to = Basis::new(from.n_modes, to_dim);
    let idx: Vec<usize> = (0..to.size()).map(|i| from.index(&to.occupations(i))).collect();
    CMat::from_fn(idx.len(), idx.len(), |a, b| op[(idx[a], idx[b])])
}

fn check_slots(n_modes: usize, quad: &CMat, lin: &DVector<C64>) -> Result<()> {
    let d = 2 * n_modes;
    if quad.shape() != (d, d) || lin.len() != d {
        return Err(OracleError::Dimension(format!("coefficients do not match {n_modes} modes")));
    }
    Ok(())
}

fn slot(mu: usize) -> (usize, bool) {
    (mu / 2, mu % 2 == 1)
}

/// `sum quad_{mu nu} (a^mu - shift^mu)(a^nu - shift^nu) + sum lin_mu (a^mu - shift^mu) + constant`,
/// on a basis of `dim` levels per mode.
fn polynomial(basis: Basis, quad: &CMat, lin: &DVector<C64>, shift: &DVector<C64>, constant: C64) -> CMat {
    let d = lin.len();
    let mut terms = vec![Monomial::new(constant, &[])];
    for mu in 0..d {
        let mut linear = lin[mu];
        terms[0].coeff -= lin[mu] * shift[mu];
        for nu in 0..d {
            let q = quad[(mu, nu)];
            terms.push(Monomial::new(q, &[slot(mu), slot(nu)]));
            terms[0].coeff += q * shift[mu] * shift[nu];
            linear -= q * shift[nu] + quad[(nu, mu)] * shift[nu];
        }
        terms.push(Monomial::new(linear, &[slot(mu)]));
    }
    terms.retain(|t| t.coeff != C64::new(0.0, 0.0));
    operator(basis, &terms)
}

/// `M = quad_{mu nu} a^mu a^nu + lin_mu a^mu + constant` in written order.
pub fn quadratic_operator(
    n_modes: usize,
    cutoff: usize,
    quad: &CMat,
    lin: &DVector<C64>,
    constant: f64,
) -> Result<CMat> {
    check_slots(n_modes, quad, lin)?;
    let big = Basis::new(n_modes, cutoff + PRODUCT_PAD);
    let m = polynomial(big, quad, lin, &DVector::zeros(2 * n_modes), C64::new(constant, 0.0));
    Ok(truncate(&m, big, cutoff))
}

/// `<M>` and `<M^2> - <M>^2` for the quadratic observable given by its coefficients.
pub fn moments(state: &FockDensityMatrix, quad: &CMat, lin: &DVector<C64>, constant: f64) -> Result<(f64, f64)> {
    let n = state.n_modes();
    check_slots(n, quad, lin)?;
    let big = Basis::new(n, state.cutoff() + 2 * PRODUCT_PAD);
    let m = polynomial(big, quad, lin, &DVector::zeros(2 * n), C64::new(constant, 0.0));
    let m2 = mul(&m, &m);
    let mean = state.expectation(&truncate(&m, big, state.cutoff()))?.re;
    let second = state.expectation(&truncate(&m2, big, state.cutoff()))?.re;
    Ok((mean, second - mean * mean))
}

/// `Tr[rho exp(-(Omega z)^T a)]`, the characteristic function in the engine's convention.
pub fn characteristic(state: &FockDensityMatrix, z: &DVector<C64>) -> Result<C64> {
    let n = state.n_modes();
    if z.len() != 2 * n {
        return Err(OracleError::Dimension(format!("argument of length {} for {n} modes", z.len())));
    }
    let single = Basis::new(1, state.cutoff() + EXP_PAD);
    let (a, ad) = (ladder(single, 0, false), ladder(single, 0, true));
    let mut op = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for k in 0..n {
        // (Omega z)_{2k} = z_{2k+1}, (Omega z)_{2k+1} = -z_{2k}
        let g = (&a * z[2 * k + 1] - &ad * z[2 * k]) * C64::new(-1.0, 0.0);
        let u = truncate(&g.exp(), single, state.cutoff());
        op = op.kronecker(&u);
    }
    state.expectation(&op)
}

/// The operator `A_{mu nu}((a - lambda)^mu (a - lambda)^nu - Sigma^{mu nu}) + B_mu (a - lambda)^mu`.
pub fn log_derivative_operator(
    n_modes: usize,
    cutoff: usize,
    quad: &CMat,
    lin: &DVector<C64>,
    mean: &DVector<C64>,
    covariance: &CMat,
) -> Result<CMat> {
    check_slots(n_modes, quad, lin)?;
    if mean.len() != 2 * n_modes || covariance.shape() != quad.shape() {
        return Err(OracleError::Dimension("state moments do not match the coefficients".into()));
    }
    let offset = -quad.component_mul(covariance).sum();
    let big = Basis::new(n_modes, cutoff + PRODUCT_PAD);
    Ok(truncate(&polynomial(big, quad, lin, mean, offset), big, cutoff))
}

/// `||d rho - (rho L + L rho)/2||_F / ||d rho||_F`.
pub fn sld_residual(state: &FockDensityMatrix, d_rho: &CMat, l: &CMat) -> f64 {
    let rho = state.rho();
    let sym = (mul(rho, l) + mul(l, rho)).scale(0.5);
    frobenius(&(d_rho - sym)) / frobenius(d_rho)
}

/// `||d rho - rho L||_F / ||d rho||_F`.
pub fn rld_residual(state: &FockDensityMatrix, d_rho: &CMat, l: &CMat) -> f64 {
    frobenius(&(d_rho - mul(state.rho(), l))) / frobenius(d_rho)
}
