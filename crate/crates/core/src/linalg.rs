//! Dense complex matrix helpers shared by every module.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Empty matrices
//! (0 rows or 0 columns) are legal everywhere and have norm zero.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
type CVec = nalgebra::DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest singular value, from the top eigenvalue of the smaller Gram
/// matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let g = if m.nrows() <= m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    eig_range(&g).1.max(0.0).sqrt()
}

/// Singular triplets `(s, u, v)` with `m v = s u`, from the eigenpairs of the
/// Hermitian dilation `[[0, m], [m^*, 0]]` with positive eigenvalue.
///
/// nalgebra's complex SVD loses accuracy on clustered singular values, while
/// its Hermitian eigensolver does not; the dilation also avoids squaring the
/// condition number.
fn singular_triplets(m: &CMat) -> Vec<(f64, CVec, CVec)> {
    let (r, c) = m.shape();
    let mut big = zeros(r + c, r + c);
    big.view_mut((0, r), (r, c)).copy_from(m);
    big.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    let eig = big.symmetric_eigen();
    let mut out: Vec<(f64, CVec, CVec)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .map(|(k, &s)| {
            let col = eig.eigenvectors.column(k);
            let scale = std::f64::consts::SQRT_2;
            (s, col.rows(0, r).into_owned() * Complex64::from(scale), col.rows(r, c).into_owned() * Complex64::from(scale))
        })
        .collect();
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out.truncate(r.min(c));
    out
}

/// Singular values in descending order (only the nonzero-rank part,
/// `min(rows, cols)` of them at most).
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = singular_triplets(m).into_iter().map(|t| t.0).collect();
    s.resize(m.nrows().min(m.ncols()), 0.0);
    s
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm of `m - m*`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    spectral_norm(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of the Hermitian part of `m`.
///
/// Eigenvalues come back in descending order. Each eigenvector is rotated so
/// that its first entry of modulus above `1e-10` is real and positive, which
/// makes the factorisation reproducible for simple spectra.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        if let Some(pivot) = col.iter().find(|z| z.norm() > 1e-10).copied() {
            let phase = pivot.conj() / pivot.norm();
            col *= phase;
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Extreme eigenvalues `(min, max)` of the Hermitian part.
pub fn eig_range(m: &CMat) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let ev = hermitian_part(m).symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Hermitian within `tol (1 + |m|)` and minimal eigenvalue at least
/// `-tol (1 + |m|)`.
pub fn is_psd(m: &CMat, tol: f64) -> bool {
    let scale = 1.0 + spectral_norm(m);
    if hermitian_defect(m) > tol * scale {
        return false;
    }
    eig_range(m).0 >= -tol * scale
}

/// Moore-Penrose pseudo-inverse; singular values below `1e-12 * s_max` are
/// treated as zero.
pub fn pinv(m: &CMat) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return zeros(m.ncols(), m.nrows());
    }
    let triplets = singular_triplets(m);
    let cut = triplets.first().map_or(0.0, |t| t.0) * 1e-12;
    let mut out = zeros(m.ncols(), m.nrows());
    for (s, u, v) in triplets.iter().filter(|t| t.0 > cut) {
        out += (v * u.adjoint()).scale(1.0 / s);
    }
    out
}

/// Numerical rank: singular values above `tol * s_max`.
pub fn rank(m: &CMat, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let mut m = zeros(rows, cols);
    for z in m.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
    }
    m
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    hermitian_part(&random_complex(rng, n, n))
}

/// Haar-ish random unitary from the QR factorisation of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    if n == 0 {
        return zeros(0, 0);
    }
    let qr = random_complex(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// Copy of the `rows x cols` block starting at `(r0, c0)`.
pub fn block(m: &CMat, r0: usize, c0: usize, rows: usize, cols: usize) -> CMat {
    m.view((r0, c0), (rows, cols)).into_owned()
}

pub fn set_block(m: &mut CMat, r0: usize, c0: usize, b: &CMat) {
    m.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pinv_survives_clustered_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = random_unitary(&mut rng, 6);
        let v = random_unitary(&mut rng, 10);
        let mut d = zeros(6, 10);
        for (k, s) in [1.51, 1.04, 1.04, 0.535, 0.449, 0.449].into_iter().enumerate() {
            d[(k, k)] = s.into();
        }
        let m = &u * d * v.adjoint();
        let p = pinv(&m);
        assert!(frobenius(&(&m * &p - identity(6))) < 1e-12);
        assert!(frobenius(&(&m * &p * &m - &m)) < 1e-12);
        let sv = singular_values(&m);
        assert!((sv[1] - 1.04).abs() < 1e-12 && (sv[5] - 0.449).abs() < 1e-12);
        assert!((spectral_norm(&m) - 1.51).abs() < 1e-12);
    }

    #[test]
    fn eigen_is_sorted_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 6);
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            6,
            vals.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let rec = &vecs * d * vecs.adjoint();
        assert!(frobenius(&(rec - h)) < 1e-12);
        for j in 0..6 {
            let first = vecs.column(j).iter().find(|z| z.norm() > 1e-10).copied().unwrap();
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn pinv_of_wide_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_complex(&mut rng, 3, 7);
        let p = pinv(&f);
        assert!(frobenius(&(&f * &p - identity(3))) < 1e-12);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(&mut rng, 5);
        assert!(frobenius(&(u.adjoint() * &u - identity(5))) < 1e-12);
    }

    #[test]
    fn empty_matrices_are_harmless() {
        let e = zeros(0, 3);
        assert_eq!(spectral_norm(&e), 0.0);
        assert_eq!(rank(&e, 1e-10), 0);
        assert_eq!(pinv(&e).shape(), (3, 0));
    }
}
