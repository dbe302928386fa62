//! Index conventions, structural matrices and the structured solvers the
//! rest of the engine relies on.
//!
//! Mode operators are arranged in interleaved order
//! `(a_1, a_1^dag, a_2, a_2^dag, ...)`: slot `2k` holds the annihilation
//! operator of mode `k` and slot `2k + 1` its creation operator. Quadrature
//! ordering `(q_1, p_1, ...)` with `[q, p] = i` only appears through
//! [`quad_transform`].
//!
//! Matrix equations over index pairs are vectorized **row-major**: the pair
//! `(mu, nu)` of a `m x m` matrix maps to the flat index `mu * m + nu`. Under
//! this stacking `vec(S A T) = (S kron T^T) vec(A)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;

/// Default condition-number cap above which `Sigma_-` is treated as singular.
pub const DEFAULT_RLD_CONDITION_CAP: f64 = 1e12;
/// Default relative residual accepted from the Stein solve.
pub const DEFAULT_STEIN_TOL: f64 = 1e-8;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Structural constants for a fixed number of bosonic modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeConventions {
    n_modes: usize,
}

impl ModeConventions {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Domain("number of modes must be at least 1".into()));
        }
        Ok(Self { n_modes })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Length of the operator vector, `2 n`.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn omega(&self) -> CMat {
        omega(self.n_modes)
    }

    pub fn x_conj(&self) -> CMat {
        x_conj(self.n_modes)
    }

    pub fn quad_transform(&self) -> CMat {
        quad_transform(self.n_modes)
    }

    /// Slot of the annihilation operator of `mode`.
    pub fn annihilation_slot(&self, mode: usize) -> usize {
        2 * mode
    }

    /// Slot of the creation operator of `mode`.
    pub fn creation_slot(&self, mode: usize) -> usize {
        2 * mode + 1
    }
}

fn block_diagonal(n: usize, block: [[C64; 2]; 2]) -> CMat {
    let mut m = CMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        for (i, row) in block.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[(2 * k + i, 2 * k + j)] = *v;
            }
        }
    }
    m
}

/// Commutator form `[a^mu, a^nu] = Omega^{mu nu}`: a direct sum of `[[0, 1], [-1, 0]]`.
pub fn omega(n: usize) -> CMat {
    block_diagonal(n, [[ZERO, ONE], [-ONE, ZERO]])
}

/// Conjugation swap `a^{mu dag} = X^{mu nu} a^nu`: a direct sum of `[[0, 1], [1, 0]]`.
pub fn x_conj(n: usize) -> CMat {
    block_diagonal(n, [[ZERO, ONE], [ONE, ZERO]])
}

/// Unitary mapping `(a, a^dag)` to `(q, p)`: a direct sum of `[[1, 1], [-i, i]] / sqrt 2`.
pub fn quad_transform(n: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    block_diagonal(n, [[C64::new(s, 0.0), C64::new(s, 0.0)], [C64::new(0.0, -s), C64::new(0.0, s)]])
}

/// Real symplectic form in quadrature ordering.
pub fn omega_real(n: usize) -> RMat {
    omega(n).map(|z| z.re)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn symmetrize(a: &CMat) -> CMat {
    (a + a.transpose()).scale(0.5)
}

pub fn to_complex(a: &RMat) -> CMat {
    a.map(|x| C64::new(x, 0.0))
}

/// Thin singular value decomposition `A = U diag(s) V^dag` by one-sided Jacobi rotations.
///
/// nalgebra's bidiagonalization SVD returns factorizations with recomposition errors
/// up to 1e-3 on small matrices with repeated or zero singular values and reports no
/// failure; the Jacobi sweep is accurate to working precision on the sizes used here.
struct Svd {
    /// Columns `sigma_j u_j`.
    scaled_u: CMat,
    v: CMat,
    values: DVector<f64>,
}

const JACOBI_MAX_SWEEPS: usize = 80;

fn jacobi_svd(a: &CMat) -> Result<Svd> {
    let transpose = a.nrows() < a.ncols();
    let mut w = if transpose { a.adjoint() } else { a.clone() };
    let n = w.ncols();
    let mut v = CMat::identity(n, n);
    // columns at roundoff level cannot be made orthogonal to the rest to relative precision
    let negligible = (f64::EPSILON * w.norm()).powi(2);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for i in 0..m.nrows() {
                        let xp = m[(i, p)];
                        let xq = m[(i, q)] * phase.conj();
                        m[(i, p)] = xp * c - xq * s;
                        m[(i, q)] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            let values = DVector::from_iterator(n, w.column_iter().map(|col| col.norm()));
            return Ok(if transpose {
                // A^dag = W V^dag  =>  A = V W^dag; swap the roles of the factors.
                let scaled_u = CMat::from_columns(&(0..n).map(|j| v.column(j).scale(values[j])).collect::<Vec<_>>());
                let v_new = CMat::from_columns(
                    &(0..n)
                        .map(
                            |j| if values[j] > 0.0 { w.column(j).unscale(values[j]) } else { w.column(j).into_owned() },
                        )
                        .collect::<Vec<_>>(),
                );
                Svd { scaled_u, v: v_new, values }
            } else {
                Svd { scaled_u: w, v, values }
            });
        }
    }
    Err(Error::NumericalFailure("Jacobi singular value decomposition did not converge".into()))
}

fn singular_values(a: &CMat) -> Result<DVector<f64>> {
    if a.is_empty() {
        return Ok(DVector::zeros(0));
    }
    Ok(jacobi_svd(a)?.values)
}

/// Trace norm `Tr sqrt(A A^dag)`, i.e. the sum of singular values.
pub fn matrix_abs_trace(a: &CMat) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("abs-trace needs a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(singular_values(a)?.sum())
}

/// Ratio of the largest to the smallest singular value (infinite when singular).
pub fn condition_number(a: &CMat) -> Result<f64> {
    let sv = singular_values(a)?;
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

/// Moore-Penrose inverse with singular-value cutoff `max(rows, cols) * eps * sigma_max`.
pub fn pseudo_inverse(a: &CMat) -> Result<CMat> {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return Ok(CMat::zeros(c, r));
    }
    let svd = jacobi_svd(a)?;
    let cutoff = (r.max(c) as f64) * f64::EPSILON * svd.values.max();
    let mut pinv = CMat::zeros(c, r);
    for (j, &sigma) in svd.values.iter().enumerate() {
        if sigma > cutoff {
            // v_j u_j^dag / sigma_j with u_j = scaled_u_j / sigma_j
            pinv += svd.v.column(j) * svd.scaled_u.column(j).adjoint().unscale(sigma * sigma);
        }
    }
    Ok(pinv)
}

/// Solve `A x = b` by pseudo-inverse, rejecting solutions whose relative
/// residual exceeds `tol`.
pub fn solve_least_squares(a: &CMat, b: &CVec, tol: f64) -> Result<CVec> {
    if a.nrows() != b.len() {
        return Err(Error::Dimension(format!("system matrix has {} rows, right-hand side has {}", a.nrows(), b.len())));
    }
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(CVec::zeros(a.ncols()));
    }
    let pinv = pseudo_inverse(a)?;
    let mut x = &pinv * b;
    x += &pinv * (b - a * &x);
    let residual = (a * &x - b).norm() / b_norm;
    if residual > tol {
        return Err(Error::InconsistentSystem { residual });
    }
    Ok(x)
}

/// Solve the Stein-type equation `S A S - W A W / 4 = R` for symmetric `A`.
///
/// This is the contraction `(S kron S + W kron W / 4) A = R` over index pairs.
/// The vectorized operator `S kron S^T - (W kron W^T) / 4` is inverted through
/// its pseudo-inverse, so singular operators (pure states) return the
/// minimum-norm solution; any solution whose relative residual exceeds `tol`
/// is rejected as [`Error::InconsistentSystem`].
pub fn solve_stein(s: &CMat, w: &CMat, r: &CMat, tol: f64) -> Result<CMat> {
    let m = s.nrows();
    for (name, x) in [("S", s), ("W", w), ("R", r)] {
        if x.shape() != (m, m) {
            return Err(Error::Dimension(format!(
                "Stein operand {name} is {}x{}, expected {m}x{m}",
                x.nrows(),
                x.ncols()
            )));
        }
    }
    let r_norm = frobenius(r);
    if r_norm == 0.0 {
        return Ok(CMat::zeros(m, m));
    }
    let op = s.kronecker(&s.transpose()) - w.kronecker(&w.transpose()).scale(0.25);
    let rhs = CVec::from_iterator(m * m, r.row_iter().flat_map(|row| row.iter().copied().collect::<Vec<_>>()));
    let pinv = pseudo_inverse(&op)?;
    let mut x = &pinv * &rhs;
    // iterative refinement; strongly squeezed states make the operator ill-conditioned
    for _ in 0..2 {
        x += &pinv * (&rhs - &op * &x);
    }
    let a = symmetrize(&CMat::from_row_slice(m, m, x.as_slice()));
    let residual = frobenius(&(s * &a * s - (w * &a * w).scale(0.25) - r)) / r_norm;
    if residual > tol {
        return Err(Error::InconsistentSystem { residual });
    }
    Ok(a)
}

/// Solve the RLD quadratic equation `Sm A Sm^T = R` in closed form,
/// `A = Sm^{-1} R Sp^{-1}` with `Sp = Sm^T`.
///
/// Fails with [`Error::RldUndefined`] when `Sm` is singular or its condition
/// number exceeds `condition_cap`.
pub fn solve_rld_quadratic(sm: &CMat, sp: &CMat, r: &CMat, condition_cap: f64) -> Result<CMat> {
    let m = sm.nrows();
    if sm.shape() != (m, m) || sp.shape() != (m, m) || r.shape() != (m, m) {
        return Err(Error::Dimension("RLD operands must share one square shape".into()));
    }
    let condition = condition_number(sm)?;
    if !condition.is_finite() || condition > condition_cap {
        return Err(Error::RldUndefined { condition });
    }
    let sm_lu = sm.clone().lu();
    let left = sm_lu.solve(r).ok_or(Error::RldUndefined { condition: f64::INFINITY })?;
    // A Sp = left  <=>  Sp^T A^T = left^T
    let a_t = sp.transpose().lu().solve(&left.transpose()).ok_or(Error::RldUndefined { condition: f64::INFINITY })?;
    let a = a_t.transpose();
    let scale = max_abs(&a).max(f64::MIN_POSITIVE);
    let asym = max_abs(&(&a - a.transpose())) / scale;
    if asym > 1e-10 {
        return Err(Error::NumericalFailure(format!(
            "RLD quadratic coefficients not symmetric (relative asymmetry {asym:.3e})"
        )));
    }
    Ok(symmetrize(&a))
}
