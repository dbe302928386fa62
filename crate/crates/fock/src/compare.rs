//! Entry-by-entry comparison of the Gaussian engine against the oracle, and the
//! seeded suite of mixed-state families used for it.

use std::f64::consts::PI;

use gqcrb_core::channels::{Param, ParameterizedFamily, Recipe, Stage};
use gqcrb_core::logderiv::{qfi_matrix, Flavor};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::qfi::{oracle_fisher, sld_oracle};
use crate::state::FockOptions;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { atol: 1e-3, rtol: 1e-2 }
    }
}

impl Tolerance {
    pub fn allows(&self, engine: C64, oracle: C64) -> bool {
        (engine - oracle).norm() <= self.atol.max(self.rtol * engine.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Sld,
    Rld,
}

impl Which {
    pub fn as_str(self) -> &'static str {
        match self {
            Which::Sld => "sld",
            Which::Rld => "rld",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryGap {
    pub which: Which,
    pub row: usize,
    pub col: usize,
    pub engine: C64,
    pub oracle: C64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub entries: Vec<EntryGap>,
}

impl Comparison {
    pub fn all_within(&self) -> bool {
        self.entries.iter().all(|e| e.within)
    }

    pub fn max_abs_gap(&self) -> f64 {
        self.entries.iter().map(|e| e.abs_gap).fold(0.0, f64::max)
    }

    pub fn max_abs_gap_of(&self, which: Which) -> f64 {
        self.entries.iter().filter(|e| e.which == which).map(|e| e.abs_gap).fold(0.0, f64::max)
    }
}

fn gaps(which: Which, engine: &DMatrix<C64>, oracle: &DMatrix<C64>, tol: Tolerance) -> Vec<EntryGap> {
    let mut out = Vec::new();
    for row in 0..engine.nrows() {
        for col in 0..engine.ncols() {
            let (e, o) = (engine[(row, col)], oracle[(row, col)]);
            let abs_gap = (e - o).norm();
            let rel_gap = if e.norm() > 0.0 { abs_gap / e.norm() } else { f64::INFINITY };
            out.push(EntryGap { which, row, col, engine: e, oracle: o, abs_gap, rel_gap, within: tol.allows(e, o) });
        }
    }
    out
}

fn complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Engine and oracle Fisher matrices side by side.
///
/// Requesting the RLD of a state whose RLD does not exist in the truncated space fails
/// with [`crate::OracleError::RldUndefined`].
pub fn compare_family(
    family: &ParameterizedFamily,
    theta: &[f64],
    options: FockOptions,
    sld: bool,
    rld: bool,
    tol: Tolerance,
) -> Result<Comparison> {
    let engine_sld = || qfi_matrix(family, theta, Flavor::Sld);
    let mut entries = Vec::new();
    if rld {
        let oracle = oracle_fisher(family.recipe(), theta, options)?;
        let oracle_rld = oracle.rld?;
        let engine_rld = qfi_matrix(family, theta, Flavor::Rld)?;
        if sld {
            entries.extend(gaps(Which::Sld, &engine_sld()?, &complex(&oracle.sld.fisher), tol));
        }
        entries.extend(gaps(Which::Rld, &engine_rld, &oracle_rld, tol));
    } else if sld {
        let oracle = sld_oracle(family.recipe(), theta, options)?;
        entries.extend(gaps(Which::Sld, &engine_sld()?, &complex(&oracle.fisher), tol));
    }
    Ok(Comparison { entries })
}

#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub label: String,
    pub family: ParameterizedFamily,
    pub theta: Vec<f64>,
}

fn fixed(v: f64) -> Param {
    Param::Fixed(v)
}

/// Seeded mixed-state families: one or two modes, thermal occupations in `[0.1, 0.5]`,
/// squeezing up to 0.8, loss with transmissivity in `[0.6, 1]`, and one estimated
/// process (phase, displacement, squeeze/phase or damping/temperature).
pub fn mixed_suite(seed: u64, single_mode: usize, two_mode: usize) -> Vec<SuiteCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for k in 0..single_mode + two_mode {
        let two = k >= single_mode;
        let n_modes = if two { 2 } else { 1 };
        let thermal: Vec<f64> = (0..n_modes).map(|_| rng.gen_range(0.1..0.5)).collect();
        let r: f64 = rng.gen_range(-0.8..0.8);
        let mut stages = Vec::new();
        if two {
            stages.push(Stage::TwoModeSqueeze { modes: (0, 1), r: fixed(r) });
        } else {
            stages.push(Stage::Squeeze {
                mode: 0,
                s: fixed(r.abs()),
                phi: fixed(if r < 0.0 { PI / 2.0 } else { 0.0 }),
            });
            let (re, im) = (rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            stages.push(Stage::Displace { mode: 0, re: fixed(re), im: fixed(im) });
        }
        let losses: Vec<Stage> = (0..n_modes)
            .map(|mode| Stage::Loss {
                mode,
                transmissivity: fixed(rng.gen_range(0.6..1.0)),
                bath: fixed(rng.gen_range(0.0..0.5)),
            })
            .collect();
        let kinds = if two { 3 } else { 4 };
        let (label, theta) = match rng.gen_range(0..kinds) {
            0 => {
                stages.push(Stage::PhaseShift { mode: 0, angle: Param::Theta(0) });
                stages.extend(losses);
                ("phase", vec![rng.gen_range(0.0..PI)])
            }
            1 => {
                stages.extend(losses);
                stages.push(Stage::Displace { mode: 0, re: Param::Theta(0), im: Param::Theta(1) });
                ("displacement", vec![rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)])
            }
            2 => {
                stages.extend(losses);
                stages.push(Stage::Damping { mode: 0, gamma: Param::Theta(0), bath: Param::Theta(1) });
                ("damping", vec![rng.gen_range(0.1..0.5), rng.gen_range(0.1..0.5)])
            }
            _ => {
                stages.extend(losses);
                stages.push(Stage::Squeeze { mode: 0, s: Param::Theta(0), phi: Param::Theta(1) });
                ("squeeze-phase", vec![rng.gen_range(0.05..0.2), rng.gen_range(0.0..PI)])
            }
        };
        let recipe = Recipe::new(thermal, stages);
        let family = ParameterizedFamily::new(recipe, theta.len()).expect("suite recipes are valid");
        cases.push(SuiteCase { label: format!("{}-mode {label} #{k}", n_modes), family, theta });
    }
    cases
}
