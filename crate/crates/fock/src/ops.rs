//! Number-basis bookkeeping, ladder operators and exponentials of quadratic generators.

use num_complex::Complex64 as C64;

use crate::dense::{components, CMat};

/// Product number basis with `dim` levels per mode; mode 0 is the most significant digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    pub n_modes: usize,
    pub dim: usize,
}

impl Basis {
    pub fn new(n_modes: usize, dim: usize) -> Self {
        Basis { n_modes, dim }
    }

    pub fn size(&self) -> usize {
        self.dim.pow(self.n_modes as u32)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.n_modes];
        for slot in occ.iter_mut().rev() {
            *slot = index % self.dim;
            index /= self.dim;
        }
        occ
    }

    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter().fold(0, |acc, &n| acc * self.dim + n)
    }
}

/// A product of ladder operators `(mode, is_creation)` in written order, times a coefficient.
#[derive(Debug, Clone)]
pub struct Monomial {
    pub coeff: C64,
    pub factors: Vec<(usize, bool)>,
}

impl Monomial {
    pub fn new(coeff: C64, factors: &[(usize, bool)]) -> Self {
        Monomial { coeff, factors: factors.to_vec() }
    }

    /// Image of a basis state, or `None` if it vanishes or leaves the basis.
    fn act(&self, occ: &[usize], dim: usize) -> Option<(Vec<usize>, C64)> {
        let mut occ = occ.to_vec();
        let mut amp = 1.0;
        for &(mode, creation) in self.factors.iter().rev() {
            let n = occ[mode];
            if creation {
                if n + 1 >= dim {
                    return None;
                }
                amp *= ((n + 1) as f64).sqrt();
                occ[mode] = n + 1;
            } else {
                if n == 0 {
                    return None;
                }
                amp *= (n as f64).sqrt();
                occ[mode] = n - 1;
            }
        }
        Some((occ, self.coeff * amp))
    }
}

/// Dense matrix of a sum of monomials on `basis`.
pub fn operator(basis: Basis, terms: &[Monomial]) -> CMat {
    let mut m = CMat::zeros(basis.size(), basis.size());
    for j in 0..basis.size() {
        let occ = basis.occupations(j);
        for term in terms {
            if let Some((target, amp)) = term.act(&occ, basis.dim) {
                m[(basis.index(&target), j)] += amp;
            }
        }
    }
    m
}

/// Annihilation (`creation == false`) or creation operator on one mode.
pub fn ladder(basis: Basis, mode: usize, creation: bool) -> CMat {
    operator(basis, &[Monomial::new(C64::new(1.0, 0.0), &[(mode, creation)])])
}

/// Rows of an operator restricted to a box, each row as `(column, value)` pairs.
#[derive(Debug, Clone)]
pub struct SparseRows {
    pub rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    /// `U X`.
    pub fn apply_left(&self, x: &CMat) -> CMat {
        let (n, m) = (self.rows.len(), x.ncols());
        let mut out = CMat::zeros(n, m);
        for j in 0..m {
            let src = x.column(j);
            let src = src.as_slice();
            for (i, row) in self.rows.iter().enumerate() {
                out[(i, j)] = row.iter().map(|&(c, u)| u * src[c]).sum();
            }
        }
        out
    }

    /// `U X U^dag`.
    pub fn sandwich(&self, x: &CMat) -> CMat {
        self.apply_left(&self.apply_left(x).adjoint()).adjoint()
    }
}

/// `exp(G)` for the anti-Hermitian generator `G = sum terms`, computed on `extended`
/// and restricted to the box of `box_dim` levels per mode.
///
/// The generator splits into blocks of states it connects; each block is exponentiated densely.
pub fn exp_restricted(extended: Basis, box_dim: usize, terms: &[Monomial]) -> SparseRows {
    let boxed = Basis::new(extended.n_modes, box_dim);
    let in_box = |occ: &[usize]| occ.iter().all(|&n| n < box_dim);

    let mut entries = Vec::new();
    for j in 0..extended.size() {
        let occ = extended.occupations(j);
        for term in terms {
            if let Some((target, amp)) = term.act(&occ, extended.dim) {
                entries.push((extended.index(&target), j, amp));
            }
        }
    }
    let blocks = components(extended.size(), entries.iter().map(|&(i, j, _)| (i, j)));
    let mut block_of = vec![(0, 0); extended.size()];
    for (b, block) in blocks.iter().enumerate() {
        for (k, &i) in block.iter().enumerate() {
            block_of[i] = (b, k);
        }
    }
    let mut generators: Vec<CMat> = blocks.iter().map(|b| CMat::zeros(b.len(), b.len())).collect();
    for &(i, j, amp) in &entries {
        let ((b, ki), (_, kj)) = (block_of[i], block_of[j]);
        generators[b][(ki, kj)] += amp;
    }

    let mut rows = vec![Vec::new(); boxed.size()];
    for (block, g) in blocks.iter().zip(generators) {
        let occs: Vec<Vec<usize>> = block.iter().map(|&i| extended.occupations(i)).collect();
        let inside: Vec<(usize, usize)> =
            occs.iter().enumerate().filter(|(_, o)| in_box(o)).map(|(a, o)| (a, boxed.index(o))).collect();
        if inside.is_empty() {
            continue;
        }
        let u = exp_anti_hermitian(&g);
        for &(a, row_index) in &inside {
            let row = &mut rows[row_index];
            for &(b, col_index) in &inside {
                if u[(a, b)] != C64::new(0.0, 0.0) {
                    row.push((col_index, u[(a, b)]));
                }
            }
        }
    }
    SparseRows { rows }
}

/// `exp(G)` for anti-Hermitian `G`, through the eigendecomposition of the Hermitian `-i G`.
fn exp_anti_hermitian(g: &CMat) -> CMat {
    if g.nrows() == 1 {
        return g.map(|z| z.exp());
    }
    let h = g.map(|z| C64::new(z.im, -z.re));
    let eig = ((&h + h.adjoint()) * C64::new(0.5, 0.0)).symmetric_eigen();
    let phases = eig.eigenvalues.map(|l| C64::from_polar(1.0, l));
    let scaled = CMat::from_fn(g.nrows(), g.ncols(), |i, k| eig.eigenvectors[(i, k)] * phases[k]);
    scaled * eig.eigenvectors.adjoint()
}
