//! Dense helpers: a blocked Hermitian eigensolver and a fast complex product.

use matrixmultiply::CGemmOption;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use petgraph::unionfind::UnionFind;

pub type CMat = DMatrix<C64>;

/// Products above this many multiply-adds go through `zgemm`.
const GEMM_THRESHOLD: usize = 32 * 32 * 32;

pub fn mul(a: &CMat, b: &CMat) -> CMat {
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    assert_eq!(k, b.nrows(), "inner dimensions differ");
    if m * k * n < GEMM_THRESHOLD {
        return a * b;
    }
    let mut c = CMat::zeros(m, n);
    // SAFETY: nalgebra stores Complex64 as two contiguous f64 in column-major order, which
    // matches [f64; 2] elements with row stride 1 and column stride nrows.
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// `U^dag X U`.
pub fn conjugate_by(u: &CMat, x: &CMat) -> CMat {
    mul(&u.adjoint(), &mul(x, u))
}

/// Groups indices connected through the given pairs.
pub fn components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::<usize>::new(n);
    for (i, j) in edges {
        uf.union(i, j);
    }
    let labels = uf.into_labeling();
    let mut slot = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &root) in labels.iter().enumerate() {
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

pub struct Eigen {
    pub values: DVector<f64>,
    pub vectors: CMat,
}

/// Eigendecomposition of a Hermitian matrix, split along its exact sparsity pattern.
pub fn hermitian_eigen(m: &CMat) -> Eigen {
    let n = m.nrows();
    let edges = (0..n).flat_map(|j| (0..j).filter(move |&i| m[(i, j)] != C64::new(0.0, 0.0)).map(move |i| (i, j)));
    let mut values = DVector::zeros(n);
    let mut vectors = CMat::zeros(n, n);
    let mut col = 0;
    for block in components(n, edges) {
        let sub = CMat::from_fn(block.len(), block.len(), |a, b| m[(block[a], block[b])]);
        let sub = (&sub + sub.adjoint()).scale(0.5);
        let eig = sub.symmetric_eigen();
        for k in 0..block.len() {
            values[col] = eig.eigenvalues[k];
            for (a, &i) in block.iter().enumerate() {
                vectors[(i, col)] = eig.eigenvectors[(a, k)];
            }
            col += 1;
        }
    }
    Eigen { values, vectors }
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
