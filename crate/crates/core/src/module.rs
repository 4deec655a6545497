//! Free Hilbert modules `H = A^m` over a multi-matrix algebra.
//!
//! Storage is flattened per component: a vector keeps, for component `i`,
//! the `(m n_i) x n_i` matrix obtained by stacking its `m` entries, and an
//! operator keeps the `(m n_i) x (m n_i)` block matrix of its `m x m` matrix
//! over `A`. The gramian is `[h, g]_i = h_i^* g_i`, conjugate-linear in the
//! first slot.

use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{AlgebraElement, AlgebraShape, Seminorm};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleVector {
    shape: AlgebraShape,
    rank: usize,
    comps: Vec<CMat>,
}

impl ModuleVector {
    pub fn new(shape: AlgebraShape, rank: usize, comps: Vec<CMat>) -> Result<Self> {
        check_layout(&shape, &comps, |n| (rank * n, n))?;
        Ok(Self { shape, rank, comps })
    }

    pub fn zero(shape: &AlgebraShape, rank: usize) -> Self {
        let comps = shape.dims().iter().map(|&n| linalg::zeros(rank * n, n)).collect();
        Self { shape: shape.clone(), rank, comps }
    }

    /// The column with the unit of `A` in slot `k` and zeros elsewhere.
    pub fn standard(shape: &AlgebraShape, rank: usize, k: usize) -> Self {
        assert!(k < rank);
        let mut v = Self::zero(shape, rank);
        for (i, c) in v.comps.iter_mut().enumerate() {
            let n = shape.dim(i);
            linalg::set_block(c, k * n, 0, &linalg::identity(n));
        }
        v
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape, rank: usize) -> Self {
        let comps = shape
            .dims()
            .iter()
            .map(|&n| linalg::random_complex(rng, rank * n, n))
            .collect();
        Self { shape: shape.clone(), rank, comps }
    }

    pub fn from_entries(shape: &AlgebraShape, entries: &[AlgebraElement]) -> Result<Self> {
        let rank = entries.len();
        let mut v = Self::zero(shape, rank);
        for (k, e) in entries.iter().enumerate() {
            if e.shape() != shape {
                return Err(Error::shape("module entry has the wrong algebra shape"));
            }
            for (i, c) in v.comps.iter_mut().enumerate() {
                linalg::set_block(c, k * shape.dim(i), 0, e.component(i));
            }
        }
        Ok(v)
    }

    pub fn entries(&self) -> Vec<AlgebraElement> {
        (0..self.rank)
            .map(|k| {
                let comps = self
                    .comps
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let n = self.shape.dim(i);
                        linalg::block(c, k * n, 0, n, n)
                    })
                    .collect();
                AlgebraElement::new(self.shape.clone(), comps).expect("layout")
            })
            .collect()
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn components(&self) -> &[CMat] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &CMat {
        &self.comps[i]
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape || self.rank != other.rank {
            return Err(Error::shape(format!(
                "module vectors over {:?}^{} and {:?}^{}",
                self.shape.dims(),
                self.rank,
                other.shape.dims(),
                other.rank
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect();
        Ok(Self { shape: self.shape.clone(), rank: self.rank, comps })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect();
        Ok(Self { shape: self.shape.clone(), rank: self.rank, comps })
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let comps = self.comps.iter().map(|a| a * z).collect();
        Self { shape: self.shape.clone(), rank: self.rank, comps }
    }

    /// Right module action `h a`.
    pub fn right_mul(&self, a: &AlgebraElement) -> Result<Self> {
        if a.shape() != &self.shape {
            return Err(Error::shape("right multiplication by an element of another algebra"));
        }
        let comps = self.comps.iter().zip(a.components()).map(|(h, x)| h * x).collect();
        Ok(Self { shape: self.shape.clone(), rank: self.rank, comps })
    }
}

fn check_layout(
    shape: &AlgebraShape,
    comps: &[CMat],
    expected: impl Fn(usize) -> (usize, usize),
) -> Result<()> {
    if comps.len() != shape.num_components() {
        return Err(Error::shape(format!(
            "{} components given for shape {:?}",
            comps.len(),
            shape.dims()
        )));
    }
    for (i, c) in comps.iter().enumerate() {
        let want = expected(shape.dim(i));
        if c.shape() != want {
            return Err(Error::shape(format!("component {i} is {:?}, expected {want:?}", c.shape())));
        }
    }
    Ok(())
}

/// `[h, g] = sum_k h_k^* g_k`.
pub fn gramian(h: &ModuleVector, g: &ModuleVector) -> Result<AlgebraElement> {
    h.compatible(g)?;
    let comps = h.comps.iter().zip(&g.comps).map(|(a, b)| a.adjoint() * b).collect();
    AlgebraElement::new(h.shape.clone(), comps)
}

/// `p~(h) = p([h, h])^{1/2}`.
pub fn vector_seminorm(h: &ModuleVector, p: &Seminorm) -> f64 {
    p.check(&h.shape);
    // |h_i^* h_i| = |h_i|^2
    p.max_over(|i| linalg::spectral_norm(&h.comps[i]))
}

/// An element of `M_m(A)`, acting on `A^m` by left block multiplication.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointableOp {
    shape: AlgebraShape,
    rank: usize,
    comps: Vec<CMat>,
}

impl AdjointableOp {
    pub fn new(shape: AlgebraShape, rank: usize, comps: Vec<CMat>) -> Result<Self> {
        check_layout(&shape, &comps, |n| (rank * n, rank * n))?;
        Ok(Self { shape, rank, comps })
    }

    pub fn zero(shape: &AlgebraShape, rank: usize) -> Self {
        let comps = shape.dims().iter().map(|&n| linalg::zeros(rank * n, rank * n)).collect();
        Self { shape: shape.clone(), rank, comps }
    }

    pub fn identity(shape: &AlgebraShape, rank: usize) -> Self {
        Self::scalar(shape, rank, linalg::ONE)
    }

    pub fn scalar(shape: &AlgebraShape, rank: usize, z: Complex64) -> Self {
        let comps = shape.dims().iter().map(|&n| linalg::identity(rank * n) * z).collect();
        Self { shape: shape.clone(), rank, comps }
    }

    /// A scalar `rank x rank` matrix `s` acting as `s (x) 1_A`.
    pub fn from_scalar_matrix(shape: &AlgebraShape, s: &CMat) -> Self {
        assert_eq!(s.nrows(), s.ncols());
        let comps = shape.dims().iter().map(|&n| linalg::kron(s, &linalg::identity(n))).collect();
        Self { shape: shape.clone(), rank: s.nrows(), comps }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape, rank: usize) -> Self {
        let comps = shape
            .dims()
            .iter()
            .map(|&n| linalg::random_complex(rng, rank * n, rank * n))
            .collect();
        Self { shape: shape.clone(), rank, comps }
    }

    /// `S^* S` for a random `S`.
    pub fn random_positive<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape, rank: usize) -> Self {
        let s = Self::random(rng, shape, rank);
        s.adjoint().compose(&s).expect("same layout")
    }

    /// Build from an `m x m` array of algebra elements.
    pub fn from_entries(shape: &AlgebraShape, entries: &[Vec<AlgebraElement>]) -> Result<Self> {
        let rank = entries.len();
        if entries.iter().any(|row| row.len() != rank) {
            return Err(Error::shape("operator entry array is not square"));
        }
        let mut t = Self::zero(shape, rank);
        for (k, row) in entries.iter().enumerate() {
            for (l, e) in row.iter().enumerate() {
                if e.shape() != shape {
                    return Err(Error::shape("operator entry has the wrong algebra shape"));
                }
                for (i, c) in t.comps.iter_mut().enumerate() {
                    let n = shape.dim(i);
                    linalg::set_block(c, k * n, l * n, e.component(i));
                }
            }
        }
        Ok(t)
    }

    pub fn entries(&self) -> Vec<Vec<AlgebraElement>> {
        (0..self.rank)
            .map(|k| {
                (0..self.rank)
                    .map(|l| {
                        let comps = self
                            .comps
                            .iter()
                            .enumerate()
                            .map(|(i, c)| {
                                let n = self.shape.dim(i);
                                linalg::block(c, k * n, l * n, n, n)
                            })
                            .collect();
                        AlgebraElement::new(self.shape.clone(), comps).expect("layout")
                    })
                    .collect()
            })
            .collect()
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn components(&self) -> &[CMat] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &CMat {
        &self.comps[i]
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape || self.rank != other.rank {
            return Err(Error::shape(format!(
                "operators on {:?}^{} and {:?}^{}",
                self.shape.dims(),
                self.rank,
                other.shape.dims(),
                other.rank
            )));
        }
        Ok(())
    }

    pub fn apply(&self, h: &ModuleVector) -> Result<ModuleVector> {
        if self.shape != h.shape || self.rank != h.rank {
            return Err(Error::shape("operator and vector live on different modules"));
        }
        let comps = self.comps.iter().zip(&h.comps).map(|(t, v)| t * v).collect();
        Ok(ModuleVector { shape: self.shape.clone(), rank: self.rank, comps })
    }

    pub fn adjoint(&self) -> Self {
        let comps = self.comps.iter().map(|t| t.adjoint()).collect();
        Self { shape: self.shape.clone(), rank: self.rank, comps }
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a * b).collect();
        Ok(Self { shape: self.shape.clone(), rank: self.rank, comps })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect();
        Ok(Self { shape: self.shape.clone(), rank: self.rank, comps })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect();
        Ok(Self { shape: self.shape.clone(), rank: self.rank, comps })
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let comps = self.comps.iter().map(|a| a * z).collect();
        Self { shape: self.shape.clone(), rank: self.rank, comps }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity(&self.shape, self.rank);
        for _ in 0..n {
            out = out.compose(self).expect("same layout");
        }
        out
    }

    /// `p_bar(T) = |T_p|`, the largest component block norm over the support.
    pub fn seminorm(&self, p: &Seminorm) -> f64 {
        p.check(&self.shape);
        p.max_over(|i| linalg::spectral_norm(&self.comps[i]))
    }

    /// Every component block Hermitian and positive semidefinite within `tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.comps.iter().all(|t| linalg::is_psd(t, tol))
    }

    /// The induced operator `T_p` on `H_p = A_p^m`.
    pub fn quotient(&self, p: &Seminorm) -> Self {
        let shape = self.shape.restrict(p);
        let comps = p.support().iter().map(|&i| self.comps[i].clone()).collect();
        Self { shape, rank: self.rank, comps }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.compatible(other)?;
        Ok(self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| linalg::frobenius(&(a - b)))
            .fold(0.0, f64::max))
    }
}

/// An adjointable map `A^m -> A^r`, stored per component as an
/// `(r n_i) x (m n_i)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleMap {
    shape: AlgebraShape,
    target_rank: usize,
    source_rank: usize,
    comps: Vec<CMat>,
}

impl ModuleMap {
    pub fn new(shape: AlgebraShape, target_rank: usize, source_rank: usize, comps: Vec<CMat>) -> Result<Self> {
        check_layout(&shape, &comps, |n| (target_rank * n, source_rank * n))?;
        Ok(Self { shape, target_rank, source_rank, comps })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape, target_rank: usize, source_rank: usize) -> Self {
        let comps = shape
            .dims()
            .iter()
            .map(|&n| linalg::random_complex(rng, target_rank * n, source_rank * n))
            .collect();
        Self { shape: shape.clone(), target_rank, source_rank, comps }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn source_rank(&self) -> usize {
        self.source_rank
    }

    pub fn components(&self) -> &[CMat] {
        &self.comps
    }

    /// `t * self` for an operator `t` on the target module.
    pub fn then(&self, t: &AdjointableOp) -> Result<Self> {
        if t.shape != self.shape || t.rank != self.target_rank {
            return Err(Error::shape("operator does not act on the target of the map"));
        }
        let comps = t.comps.iter().zip(&self.comps).map(|(a, v)| a * v).collect();
        Ok(Self { comps, ..self.clone() })
    }

    /// `self^* other`, an operator on the common source module.
    pub fn adjoint_times(&self, other: &Self) -> Result<AdjointableOp> {
        if self.shape != other.shape
            || self.target_rank != other.target_rank
            || self.source_rank != other.source_rank
        {
            return Err(Error::shape("module maps with different layouts"));
        }
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.adjoint() * b).collect();
        AdjointableOp::new(self.shape.clone(), self.source_rank, comps)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| linalg::frobenius(&(a - b)))
            .fold(0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.comps.iter().map(linalg::frobenius).fold(0.0, f64::max)
    }
}

pub fn op_apply(t: &AdjointableOp, h: &ModuleVector) -> Result<ModuleVector> {
    t.apply(h)
}

pub fn op_adjoint(t: &AdjointableOp) -> AdjointableOp {
    t.adjoint()
}

pub fn op_seminorm(t: &AdjointableOp, p: &Seminorm) -> f64 {
    t.seminorm(p)
}

pub fn op_is_positive(t: &AdjointableOp, tol: f64) -> bool {
    t.is_positive(tol)
}

pub fn quotient_op(t: &AdjointableOp, p: &Seminorm) -> AdjointableOp {
    t.quotient(p)
}

/// The matrix seminorm `p_n([a_ij])` on `M_n(A)`: the C*-norm of the matrix
/// after projecting every entry to `A_p`.
pub fn matrix_seminorm(entries: &[Vec<AlgebraElement>], p: &Seminorm) -> Result<f64> {
    let first = entries
        .first()
        .and_then(|r| r.first())
        .ok_or_else(|| Error::shape("empty operator matrix"))?;
    let projected: Vec<Vec<AlgebraElement>> = entries
        .iter()
        .map(|row| row.iter().map(|a| a.quotient_project(p)).collect())
        .collect();
    let shape = first.shape().restrict(p);
    let op = AdjointableOp::from_entries(&shape, &projected)?;
    Ok(op.components().iter().map(linalg::spectral_norm).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gramian_of_standard_columns() {
        let s = shape(&[2, 3]);
        let e = ModuleVector::standard(&s, 1, 0);
        assert_eq!(gramian(&e, &e).unwrap(), AlgebraElement::identity(&s));
        let e1 = ModuleVector::standard(&s, 2, 0);
        let e2 = ModuleVector::standard(&s, 2, 1);
        assert_eq!(gramian(&e1, &e2).unwrap(), AlgebraElement::zero(&s));
    }

    #[test]
    fn gramian_axioms() {
        let s = shape(&[2, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let h = ModuleVector::random(&mut rng, &s, 3);
            let g = ModuleVector::random(&mut rng, &s, 3);
            let f = ModuleVector::random(&mut rng, &s, 3);
            let a = AlgebraElement::random(&mut rng, &s);
            let z = c(0.3, -1.2);
            assert!(gramian(&h, &h).unwrap().is_positive(1e-10));
            let hg = gramian(&h, &g).unwrap();
            assert!(hg.max_abs_diff(&gramian(&g, &h).unwrap().involution()).unwrap() < 1e-12);
            let lin = gramian(&h, &g.add(&f.scale(z)).unwrap()).unwrap();
            let expect = hg.add(&gramian(&h, &f).unwrap().scale(z)).unwrap();
            assert!(lin.max_abs_diff(&expect).unwrap() < 1e-12);
            let module = gramian(&h, &g.right_mul(&a).unwrap()).unwrap();
            assert!(module.max_abs_diff(&hg.multiply(&a).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn polarisation_identity() {
        let s = shape(&[2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let powers = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for _ in 0..30 {
            let x = ModuleVector::random(&mut rng, &s, 2);
            let y = ModuleVector::random(&mut rng, &s, 2);
            // The gramian is conjugate-linear in its first slot, so weights
            // i^k recover 4[y, x] and weights i^-k recover 4[x, y].
            let mut fwd = AlgebraElement::zero(&s);
            let mut back = AlgebraElement::zero(&s);
            for ik in powers {
                let v = x.add(&y.scale(ik)).unwrap();
                let vv = gramian(&v, &v).unwrap();
                fwd = fwd.add(&vv.scale(ik)).unwrap();
                back = back.add(&vv.scale(ik.conj())).unwrap();
            }
            let four = c(4.0, 0.0);
            assert!(fwd.max_abs_diff(&gramian(&y, &x).unwrap().scale(four)).unwrap() <= 1e-10);
            assert!(back.max_abs_diff(&gramian(&x, &y).unwrap().scale(four)).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn vector_seminorm_examples() {
        let s = shape(&[2, 3]);
        let p = Seminorm::full(&s);
        assert_eq!(vector_seminorm(&ModuleVector::zero(&s, 2), &p), 0.0);
        assert!((vector_seminorm(&ModuleVector::standard(&s, 2, 1), &p) - 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let h = ModuleVector::random(&mut rng, &s, 2);
            let g = ModuleVector::random(&mut rng, &s, 2);
            for q in Seminorm::all(&s) {
                let lhs = vector_seminorm(&h.add(&g).unwrap(), &q);
                assert!(lhs <= vector_seminorm(&h, &q) + vector_seminorm(&g, &q) + 1e-10);
                let direct = q.eval(&gramian(&h, &h).unwrap()).sqrt();
                assert!((direct - vector_seminorm(&h, &q)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn adjoint_identity() {
        let s = shape(&[2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let id = AdjointableOp::identity(&s, 3);
        let h = ModuleVector::random(&mut rng, &s, 3);
        assert_eq!(op_apply(&id, &h).unwrap(), h);
        for _ in 0..50 {
            let t = AdjointableOp::random(&mut rng, &s, 3);
            let h = ModuleVector::random(&mut rng, &s, 3);
            let g = ModuleVector::random(&mut rng, &s, 3);
            let lhs = gramian(&t.apply(&h).unwrap(), &g).unwrap();
            let rhs = gramian(&h, &op_adjoint(&t).apply(&g).unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn diagonal_operator_acts_blockwise() {
        let s = shape(&[2]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = AlgebraElement::random(&mut rng, &s);
        let b = AlgebraElement::random(&mut rng, &s);
        let z = AlgebraElement::zero(&s);
        let t = AdjointableOp::from_entries(&s, &[vec![a.clone(), z.clone()], vec![z, b.clone()]]).unwrap();
        let h = ModuleVector::random(&mut rng, &s, 2);
        let th = t.apply(&h).unwrap().entries();
        let he = h.entries();
        assert!(th[0].max_abs_diff(&a.multiply(&he[0]).unwrap()).unwrap() < 1e-14);
        assert!(th[1].max_abs_diff(&b.multiply(&he[1]).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn op_seminorm_examples() {
        let s = shape(&[1, 2]);
        let p = Seminorm::full(&s);
        assert!((op_seminorm(&AdjointableOp::identity(&s, 2), &p) - 1.0).abs() < 1e-14);
        let two = AdjointableOp::scalar(&s, 2, c(2.0, 0.0));
        assert!((op_seminorm(&two, &p) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn op_seminorm_is_the_tight_bound() {
        let s = shape(&[2, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = AdjointableOp::random(&mut rng, &s, 2);
        for p in Seminorm::all(&s) {
            let bound = op_seminorm(&t, &p);
            let mut best: f64 = 0.0;
            for _ in 0..10_000 {
                let h = ModuleVector::random(&mut rng, &s, 2);
                let nh = vector_seminorm(&h, &p);
                let ratio = vector_seminorm(&t.apply(&h).unwrap(), &p) / nh;
                assert!(ratio <= bound * (1.0 + 1e-8));
                best = best.max(ratio);
            }
            assert!(best >= 0.5 * bound, "sampled ratio {best} far from bound {bound}");
        }
    }

    #[test]
    fn positivity_of_operators() {
        let s = shape(&[2]);
        assert!(op_is_positive(&AdjointableOp::identity(&s, 2), 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pos = AdjointableOp::random_positive(&mut rng, &s, 2);
        assert!(op_is_positive(&pos, 1e-10));
        let one = AlgebraElement::identity(&s);
        let z = AlgebraElement::zero(&s);
        let flip = AdjointableOp::from_entries(&s, &[vec![one.clone(), z.clone()], vec![z, one.scale(c(-1.0, 0.0))]])
            .unwrap();
        assert!(!op_is_positive(&flip, 1e-10));
    }

    #[test]
    fn positive_operators_have_positive_forms() {
        let s = shape(&[2, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let t = AdjointableOp::random_positive(&mut rng, &s, 2);
            for _ in 0..20 {
                let h = ModuleVector::random(&mut rng, &s, 2);
                assert!(gramian(&t.apply(&h).unwrap(), &h).unwrap().is_positive(1e-10));
            }
        }
    }

    #[test]
    fn quotient_operators() {
        let s = shape(&[2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sop = AdjointableOp::random(&mut rng, &s, 2);
        let top = AdjointableOp::random(&mut rng, &s, 2);
        assert_eq!(quotient_op(&top, &Seminorm::full(&s)), top);
        let p = Seminorm::singleton(1);
        assert_eq!(
            quotient_op(&AdjointableOp::identity(&s, 2), &p),
            AdjointableOp::identity(&s.restrict(&p), 2)
        );
        for p in Seminorm::all(&s) {
            let st = sop.compose(&top).unwrap().quotient(&p);
            let stp = sop.quotient(&p).compose(&top.quotient(&p)).unwrap();
            assert_eq!(st.max_abs_diff(&stp).unwrap(), 0.0);
            assert_eq!(top.adjoint().quotient(&p), top.quotient(&p).adjoint());
        }
    }

    #[test]
    fn entries_round_trip_and_matrix_seminorm() {
        let s = shape(&[2, 1, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let t = AdjointableOp::random(&mut rng, &s, 3);
        let back = AdjointableOp::from_entries(&s, &t.entries()).unwrap();
        assert_eq!(back, t);
        let h = ModuleVector::random(&mut rng, &s, 3);
        assert_eq!(ModuleVector::from_entries(&s, &h.entries()).unwrap(), h);
        for p in Seminorm::all(&s) {
            let ms = matrix_seminorm(&t.entries(), &p).unwrap();
            assert!((ms - op_seminorm(&t, &p)).abs() <= 1e-12 * (1.0 + ms));
        }
    }

    #[test]
    fn order_inequality_for_pairs() {
        // [h,k] + [k,h] <= [h,h] + [k,k]
        let s = shape(&[2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let h = ModuleVector::random(&mut rng, &s, 2);
            let k = ModuleVector::random(&mut rng, &s, 2);
            let lhs = gramian(&h, &k).unwrap().add(&gramian(&k, &h).unwrap()).unwrap();
            let rhs = gramian(&h, &h).unwrap().add(&gramian(&k, &k).unwrap()).unwrap();
            assert!(lhs.leq(&rhs, 1e-10).unwrap());
        }
    }

    #[test]
    fn mismatched_modules_are_rejected() {
        let s = shape(&[2]);
        let h = ModuleVector::zero(&s, 2);
        let g = ModuleVector::zero(&s, 3);
        assert!(matches!(gramian(&h, &g), Err(Error::ShapeMismatch(_))));
        let t = AdjointableOp::identity(&s, 3);
        assert!(matches!(t.apply(&h), Err(Error::ShapeMismatch(_))));
    }
}
