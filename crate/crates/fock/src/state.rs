//! Density matrices in a truncated number basis, built stage by stage from a recipe.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use gqcrb_core::channels::{Recipe, Stage};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::dense::{frobenius, hermitian_eigen, CMat};
use crate::error::{OracleError, Result};
use crate::ops::{exp_restricted, Basis, Monomial, SparseRows};

pub const DEFAULT_TRUNCATION_BUDGET: f64 = 1e-6;
pub const MIN_CUTOFF: usize = 8;
pub const MAX_MODES: usize = 2;
/// Largest total dimension `cutoff^n_modes` the oracle accepts.
pub const MAX_DIMENSION: usize = 1600;
/// Extra levels per mode carried during evolution and dropped at the end.
const WORKING_PAD: usize = 10;
/// Thermal ancilla occupations are kept while their cumulative tail exceeds this.
const ANCILLA_TAIL: f64 = 1e-17;
const HERMITIAN_TOL: f64 = 1e-10;
const EIGENVALUE_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockOptions {
    /// Levels per mode of the returned density matrix.
    pub cutoff: usize,
    /// Largest population allowed outside the returned box.
    pub budget: f64,
}

impl FockOptions {
    pub fn new(cutoff: usize) -> Self {
        FockOptions { cutoff, budget: DEFAULT_TRUNCATION_BUDGET }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    n_modes: usize,
    cutoff: usize,
    rho: CMat,
}

impl FockDensityMatrix {
    pub fn new(n_modes: usize, cutoff: usize, rho: CMat) -> Result<Self> {
        let size = Basis::new(n_modes, cutoff).size();
        if rho.shape() != (size, size) {
            return Err(OracleError::Dimension(format!(
                "{}x{} matrix for {n_modes} modes at cutoff {cutoff}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(FockDensityMatrix { n_modes, cutoff, rho })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn basis(&self) -> Basis {
        Basis::new(self.n_modes, self.cutoff)
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho
        frobenius(&self.rho).powi(2)
    }

    /// Checks Hermiticity, the trace window `[1 - budget, 1]` and the eigenvalue floor.
    pub fn validate(&self, budget: f64) -> Result<()> {
        let asym = frobenius(&(&self.rho - self.rho.adjoint()));
        if asym > HERMITIAN_TOL {
            return Err(OracleError::NumericalFailure(format!("density matrix not Hermitian ({asym:.3e})")));
        }
        let trace = self.trace();
        if trace > 1.0 + HERMITIAN_TOL || trace < 1.0 - budget {
            return Err(OracleError::IncreaseCutoff { deficit: 1.0 - trace, budget, cutoff: self.cutoff });
        }
        let min = hermitian_eigen(&self.rho).values.min();
        if min < EIGENVALUE_FLOOR {
            return Err(OracleError::NumericalFailure(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// State of one mode after tracing out the other.
    pub fn reduced(&self, keep: usize) -> Result<FockDensityMatrix> {
        if keep >= self.n_modes {
            return Err(OracleError::Domain(format!("mode {keep} of a {}-mode state", self.n_modes)));
        }
        let basis = self.basis();
        let d = self.cutoff;
        let mut out = CMat::zeros(d, d);
        for i in 0..basis.size() {
            let oi = basis.occupations(i);
            for j in 0..basis.size() {
                let oj = basis.occupations(j);
                let traced_equal = (0..self.n_modes).filter(|&m| m != keep).all(|m| oi[m] == oj[m]);
                if traced_equal {
                    out[(oi[keep], oj[keep])] += self.rho[(i, j)];
                }
            }
        }
        FockDensityMatrix::new(1, d, out)
    }

    /// `Tr[rho X]`.
    pub fn expectation(&self, op: &CMat) -> Result<C64> {
        if op.shape() != self.rho.shape() {
            return Err(OracleError::Dimension("operator and state sizes differ".into()));
        }
        Ok(self.rho.iter().zip(op.transpose().iter()).map(|(r, o)| r * o).sum())
    }
}

pub fn check_scope(n_modes: usize, cutoff: usize) -> Result<()> {
    if n_modes == 0 || n_modes > MAX_MODES {
        return Err(OracleError::OutOfScope(format!("{n_modes} modes (at most {MAX_MODES})")));
    }
    if cutoff < MIN_CUTOFF {
        return Err(OracleError::Domain(format!("cutoff {cutoff} below {MIN_CUTOFF}")));
    }
    if Basis::new(n_modes, cutoff).size() > MAX_DIMENSION {
        return Err(OracleError::OutOfScope(format!(
            "cutoff {cutoff} for {n_modes} modes exceeds {MAX_DIMENSION} basis states"
        )));
    }
    Ok(())
}

/// The state prepared by `recipe` at `theta`.
pub fn build_state(recipe: &Recipe, theta: &[f64], options: FockOptions) -> Result<FockDensityMatrix> {
    let mut last = None;
    evolve(recipe, theta, options, |state| last = Some(state))?;
    last.ok_or_else(|| OracleError::NumericalFailure("no state produced".into()))
}

/// The initial state and the state after every stage.
pub fn build_trajectory(recipe: &Recipe, theta: &[f64], options: FockOptions) -> Result<Vec<FockDensityMatrix>> {
    let mut states = Vec::new();
    evolve(recipe, theta, options, |state| states.push(state))?;
    Ok(states)
}

fn evolve(
    recipe: &Recipe,
    theta: &[f64],
    options: FockOptions,
    mut visit: impl FnMut(FockDensityMatrix),
) -> Result<()> {
    let n = recipe.n_modes;
    check_scope(n, options.cutoff)?;
    if !(options.budget > 0.0 && options.budget < 1.0) {
        return Err(OracleError::Domain(format!("truncation budget {} outside (0, 1)", options.budget)));
    }
    recipe.validate(theta.len())?;
    let work = Basis::new(n, options.cutoff + WORKING_PAD);
    let mut rho = thermal(work, &recipe.thermal)?;
    visit(project(&rho, work, options)?);
    let mut loss_cache = HashMap::new();
    for stage in &recipe.stages {
        rho = apply_stage(stage, &rho, work, theta, &mut loss_cache)?;
        visit(project(&rho, work, options)?);
    }
    Ok(())
}

fn thermal(work: Basis, occupations: &[f64]) -> Result<CMat> {
    if let Some(nu) = occupations.iter().find(|nu| !(nu.is_finite() && **nu >= 0.0)) {
        return Err(OracleError::Domain(format!("thermal occupation {nu}")));
    }
    let weights: Vec<Vec<f64>> = occupations.iter().map(|&nu| geometric(nu, work.dim)).collect();
    let diag =
        (0..work.size()).map(|i| C64::new(work.occupations(i).iter().zip(&weights).map(|(&k, w)| w[k]).product(), 0.0));
    Ok(CMat::from_diagonal(&nalgebra::DVector::from_iterator(work.size(), diag)))
}

/// Bose-Einstein weights `nu^k / (nu + 1)^(k + 1)` for `k < len`.
fn geometric(nu: f64, len: usize) -> Vec<f64> {
    let q = nu / (nu + 1.0);
    (0..len).map(|k| q.powi(k as i32) / (nu + 1.0)).collect()
}

/// Drops the padding, failing if more than the budget of population lies outside the box.
fn project(rho: &CMat, work: Basis, options: FockOptions) -> Result<FockDensityMatrix> {
    let target = Basis::new(work.n_modes, options.cutoff);
    let keep: Vec<usize> = (0..target.size()).map(|i| work.index(&target.occupations(i))).collect();
    let out = CMat::from_fn(keep.len(), keep.len(), |a, b| rho[(keep[a], keep[b])]);
    let state = FockDensityMatrix::new(work.n_modes, options.cutoff, out)?;
    let deficit = 1.0 - state.trace();
    if deficit > options.budget {
        return Err(OracleError::IncreaseCutoff { deficit, budget: options.budget, cutoff: options.cutoff });
    }
    Ok(state)
}

type LossKey = (usize, u64, u64);

fn apply_stage(
    stage: &Stage,
    rho: &CMat,
    work: Basis,
    theta: &[f64],
    loss_cache: &mut HashMap<LossKey, LossTable>,
) -> Result<CMat> {
    let v = |p: gqcrb_core::channels::Param| p.value(theta);
    let one = |c: C64, f: &[(usize, bool)]| Monomial::new(c, f);
    let terms = match *stage {
        Stage::PhaseShift { mode, angle } => {
            let angle = v(angle);
            let phases: Vec<C64> =
                (0..work.size()).map(|i| C64::from_polar(1.0, angle * work.occupations(i)[mode] as f64)).collect();
            return Ok(CMat::from_fn(work.size(), work.size(), |i, j| phases[i] * rho[(i, j)] * phases[j].conj()));
        }
        Stage::Displace { mode, re, im } => {
            let alpha = C64::new(v(re), v(im));
            vec![one(alpha, &[(mode, true)]), one(-alpha.conj(), &[(mode, false)])]
        }
        Stage::Squeeze { mode, s, phi } => {
            let zeta = C64::from_polar(v(s), 2.0 * v(phi));
            vec![
                one(zeta.conj() * 0.5, &[(mode, false), (mode, false)]),
                one(-zeta * 0.5, &[(mode, true), (mode, true)]),
            ]
        }
        Stage::TwoModeSqueeze { modes: (i, j), r } => {
            let r = C64::new(v(r), 0.0);
            vec![one(r, &[(i, false), (j, false)]), one(-r, &[(i, true), (j, true)])]
        }
        Stage::BeamSplitter { modes: (i, j), angle } => {
            let t = C64::new(v(angle), 0.0);
            vec![one(t, &[(i, true), (j, false)]), one(-t, &[(i, false), (j, true)])]
        }
        Stage::Loss { mode, transmissivity, bath } => {
            return apply_loss(rho, work, mode, v(transmissivity), v(bath), loss_cache);
        }
        Stage::Damping { mode, gamma, bath } => {
            let gamma = v(gamma);
            if !(gamma.is_finite() && gamma >= 0.0) {
                return Err(OracleError::Domain(format!("damping rate {gamma}")));
            }
            return apply_loss(rho, work, mode, (-gamma).exp(), v(bath), loss_cache);
        }
    };
    let extended = Basis::new(work.n_modes, 2 * work.dim);
    let u: SparseRows = exp_restricted(extended, work.dim, &terms);
    Ok(u.sandwich(rho))
}

/// Single-mode loss as a map on matrix elements: `(m', n') -> [(m, n, weight)]`, with `m - n = m' - n'`.
struct LossTable {
    dim: usize,
    entries: Vec<Vec<(usize, usize, f64)>>,
}

/// Mixes the mode with a thermal ancilla on a beam splitter of transmissivity `eps`
/// and traces the ancilla out.
fn loss_table(dim: usize, eps: f64, bath: f64) -> Result<LossTable> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(OracleError::Domain(format!("transmissivity {eps} outside [0, 1]")));
    }
    if !(bath.is_finite() && bath >= 0.0) {
        return Err(OracleError::Domain(format!("bath occupation {bath}")));
    }
    let ancilla_levels = if bath == 0.0 {
        1
    } else {
        let q = bath / (bath + 1.0);
        (ANCILLA_TAIL.ln() / q.ln()).ceil() as usize + 1
    };
    let p = geometric(bath, ancilla_levels);
    let angle = eps.sqrt().acos();

    // U_T acts on |m, T - m>; the generator is angle (a^dag b - a b^dag).
    let blocks: Vec<DMatrix<f64>> = (0..dim + ancilla_levels)
        .map(|total| {
            let mut g = DMatrix::zeros(total + 1, total + 1);
            for m in 0..total {
                let w = angle * (((m + 1) * (total - m)) as f64).sqrt();
                g[(m + 1, m)] = w;
                g[(m, m + 1)] = -w;
            }
            g.exp()
        })
        .collect();

    let mut entries = vec![Vec::new(); dim * dim];
    for mp in 0..dim {
        for np in 0..dim {
            let mut acc: HashMap<usize, f64> = HashMap::new();
            for (k, &pk) in p.iter().enumerate() {
                let (u, w) = (&blocks[mp + k], &blocks[np + k]);
                // the ancilla ends with j quanta on both sides: m = mp + k - j, n = np + k - j
                for j in 0..=(mp + k).min(np + k) {
                    let (m, n) = (mp + k - j, np + k - j);
                    if m < dim && n < dim {
                        *acc.entry(m).or_default() += pk * u[(m, mp)] * w[(n, np)];
                    }
                }
            }
            let mut list: Vec<(usize, usize, f64)> =
                acc.into_iter().filter(|&(_, c)| c != 0.0).map(|(m, c)| (m, m + np - mp, c)).collect();
            list.sort_by_key(|e| e.0);
            entries[mp * dim + np] = list;
        }
    }
    Ok(LossTable { dim, entries })
}

fn apply_loss(
    rho: &CMat,
    work: Basis,
    mode: usize,
    eps: f64,
    bath: f64,
    cache: &mut HashMap<LossKey, LossTable>,
) -> Result<CMat> {
    let key = (work.dim, eps.to_bits(), bath.to_bits());
    let table = match cache.entry(key) {
        Entry::Occupied(e) => e.into_mut(),
        Entry::Vacant(e) => e.insert(loss_table(work.dim, eps, bath)?),
    };
    let d = table.dim;
    let stride = d.pow((work.n_modes - 1 - mode) as u32);
    let rests: Vec<usize> = (0..work.size()).filter(|&i| work.occupations(i)[mode] == 0).collect();
    let mut out = CMat::zeros(work.size(), work.size());
    for &r in &rests {
        for &c in &rests {
            for mp in 0..d {
                for np in 0..d {
                    let x = rho[(r + mp * stride, c + np * stride)];
                    if x == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for &(m, n, w) in &table.entries[mp * d + np] {
                        out[(r + m * stride, c + n * stride)] += x * w;
                    }
                }
            }
        }
    }
    Ok(out)
}
