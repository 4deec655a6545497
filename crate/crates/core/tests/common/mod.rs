//! Independent oracles shared by the integration tests. These rebuild the
//! objects from raw kernel values with plain nalgebra instead of going
//! through the library's own helpers.
#![allow(dead_code)]

use kernel_dilation::linalg::CMat;
use kernel_dilation::stinespring::{matrix_units, CPMapSpec};
use kernel_dilation::{AlgebraShape, OperatorKernel};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn zeros(r: usize, c: usize) -> CMat {
    DMatrix::from_element(r, c, Complex64::new(0.0, 0.0))
}

/// Per-component Gram matrix with block `(x, y)` equal to `k(x, y)_i`.
pub fn gram(k: &OperatorKernel, i: usize) -> CMat {
    let b = k.rank() * k.shape().dim(i);
    let n = k.points();
    let mut g = zeros(n * b, n * b);
    for x in 0..n {
        for y in 0..n {
            g.view_mut((x * b, y * b), (b, b)).copy_from(k.get(x, y).component(i));
        }
    }
    g
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn frob(m: &CMat) -> f64 {
    m.norm()
}

pub fn spectral(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let g = m.adjoint() * m;
    eigenvalues(&g)[0].max(0.0).sqrt()
}

/// Choi matrix of the `(c, i)` block: `sum_{j,k} E_jk (x) phi(E^c_jk)_i`,
/// assembled from the map's values on matrix units.
pub fn choi(phi: &CPMapSpec, c: usize, i: usize) -> CMat {
    let b = phi.domain().dim(c);
    let n = phi.rank() * phi.codomain().dim(i);
    let mut out = zeros(b * n, b * n);
    for (c2, j, k) in matrix_units(phi.domain()) {
        if c2 == c {
            out.view_mut((j * n, k * n), (n, n)).copy_from(phi.value(c, j, k).component(i));
        }
    }
    out
}

pub fn numerical_rank(m: &CMat, rel: f64) -> usize {
    let ev = eigenvalues(m);
    let top = ev.first().copied().unwrap_or(0.0).max(0.0);
    ev.iter().filter(|&&v| top > 0.0 && v > rel * top).count()
}

/// Shapes used by the sweeps.
pub fn shapes() -> Vec<AlgebraShape> {
    [vec![1], vec![2], vec![3], vec![1, 1], vec![2, 1], vec![3, 2], vec![2, 2]]
        .into_iter()
        .map(|d| AlgebraShape::new(d).unwrap())
        .collect()
}

/// Rescales a kernel so its Gram block has unit spectral norm.
pub fn normalise(k: &OperatorKernel) -> OperatorKernel {
    let top = (0..k.shape().num_components()).map(|i| spectral(&gram(k, i))).fold(0.0, f64::max);
    if top > 0.0 { k.scale(Complex64::new(1.0 / top, 0.0)) } else { k.clone() }
}
