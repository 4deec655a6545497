//! Finite products of full matrix algebras, `A = M_{n_1} x ... x M_{n_s}`.
//!
//! The product carries one C*-seminorm per nonempty subset `J` of component
//! indices, `p_J(a) = max_{i in J} |a_i|`. The singletons generate the family
//! and `p_J v p_J' = p_{J u J'}`, so the family is directed. The quotient by
//! `ker p_J` is the sub-product over `J`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AlgebraShape {
    dims: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Dimension("algebra shape needs at least one component".into()));
        }
        if dims.contains(&0) {
            return Err(Error::Dimension(format!("zero-sized component in {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_components(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, i: usize) -> usize {
        self.dims[i]
    }

    /// Complex dimension of the algebra, `sum n_i^2`.
    pub fn algebra_dim(&self) -> usize {
        self.dims.iter().map(|n| n * n).sum()
    }

    /// Sub-shape kept by the quotient with respect to `p`.
    pub fn restrict(&self, p: &Seminorm) -> AlgebraShape {
        p.check(self);
        AlgebraShape { dims: p.support().iter().map(|&i| self.dims[i]).collect() }
    }
}

impl TryFrom<Vec<usize>> for AlgebraShape {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AlgebraShape> for Vec<usize> {
    fn from(s: AlgebraShape) -> Self {
        s.dims
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    comps: Vec<CMat>,
}

impl AlgebraElement {
    pub fn new(shape: AlgebraShape, comps: Vec<CMat>) -> Result<Self> {
        if comps.len() != shape.num_components() {
            return Err(Error::shape(format!(
                "{} components given for shape {:?}",
                comps.len(),
                shape.dims()
            )));
        }
        for (i, c) in comps.iter().enumerate() {
            let n = shape.dim(i);
            if c.shape() != (n, n) {
                return Err(Error::shape(format!(
                    "component {i} is {:?}, expected {n}x{n}",
                    c.shape()
                )));
            }
        }
        Ok(Self { shape, comps })
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        let comps = shape.dims().iter().map(|&n| linalg::zeros(n, n)).collect();
        Self { shape: shape.clone(), comps }
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        Self::scalar(shape, linalg::ONE)
    }

    pub fn scalar(shape: &AlgebraShape, z: Complex64) -> Self {
        let comps = shape.dims().iter().map(|&n| linalg::identity(n) * z).collect();
        Self { shape: shape.clone(), comps }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape) -> Self {
        let comps = shape.dims().iter().map(|&n| linalg::random_complex(rng, n, n)).collect();
        Self { shape: shape.clone(), comps }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn components(&self) -> &[CMat] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &CMat {
        &self.comps[i]
    }

    pub fn into_components(self) -> Vec<CMat> {
        self.comps
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::shape(format!(
                "{:?} vs {:?}",
                self.shape.dims(),
                other.shape.dims()
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Self> {
        self.same_shape(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect();
        Ok(Self { shape: self.shape.clone(), comps })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let comps = self.comps.iter().map(|a| a * z).collect();
        Self { shape: self.shape.clone(), comps }
    }

    /// Componentwise product `(ab)_i = a_i b_i`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Componentwise conjugate transpose.
    pub fn involution(&self) -> Self {
        let comps = self.comps.iter().map(|a| a.adjoint()).collect();
        Self { shape: self.shape.clone(), comps }
    }

    /// Membership in the positive cone: every component Hermitian within
    /// `tol (1 + |a_i|)` with smallest eigenvalue at least `-tol (1 + |a_i|)`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.comps.iter().all(|a| linalg::is_psd(a, tol))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.comps
            .iter()
            .all(|a| linalg::hermitian_defect(a) <= tol * (1.0 + linalg::spectral_norm(a)))
    }

    /// `self <= other` in the order induced by the positive cone.
    pub fn leq(&self, other: &Self, tol: f64) -> Result<bool> {
        Ok(other.sub(self)?.is_positive(tol))
    }

    /// Image in the quotient `A / ker p`, realised as the sub-tuple over the
    /// support of `p`.
    pub fn quotient_project(&self, p: &Seminorm) -> AlgebraElement {
        let shape = self.shape.restrict(p);
        let comps = p.support().iter().map(|&i| self.comps[i].clone()).collect();
        Self { shape, comps }
    }

    /// `|a|_inf`, the supremum of all seminorms; finite for every element.
    pub fn bounded_norm(&self) -> f64 {
        self.comps.iter().map(linalg::spectral_norm).fold(0.0, f64::max)
    }

    /// Largest componentwise Frobenius distance.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| linalg::frobenius(&(a - b)))
            .fold(0.0, f64::max))
    }
}

/// `p_J(a) = max_{i in J} |a_i|` for a nonempty support `J`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Seminorm {
    support: Vec<usize>,
}

impl Seminorm {
    pub fn new(support: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut support: Vec<usize> = support.into_iter().collect();
        support.sort_unstable();
        support.dedup();
        if support.is_empty() {
            return Err(Error::Dimension("seminorm support must be nonempty".into()));
        }
        Ok(Self { support })
    }

    /// Support checked against a shape.
    pub fn for_shape(shape: &AlgebraShape, support: impl IntoIterator<Item = usize>) -> Result<Self> {
        let p = Self::new(support)?;
        if let Some(&bad) = p.support.iter().find(|&&i| i >= shape.num_components()) {
            return Err(Error::Dimension(format!(
                "seminorm index {bad} out of range for shape {:?}",
                shape.dims()
            )));
        }
        Ok(p)
    }

    pub fn full(shape: &AlgebraShape) -> Self {
        Self { support: (0..shape.num_components()).collect() }
    }

    pub fn singleton(i: usize) -> Self {
        Self { support: vec![i] }
    }

    /// Every seminorm of the family for `shape`, one per nonempty subset.
    pub fn all(shape: &AlgebraShape) -> Vec<Self> {
        let s = shape.num_components();
        (1u64..(1 << s))
            .map(|mask| Self { support: (0..s).filter(|i| mask & (1 << i) != 0).collect() })
            .collect()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn contains(&self, i: usize) -> bool {
        self.support.binary_search(&i).is_ok()
    }

    /// Pointwise maximum `max(p_J, p_J')`, which is `p_{J u J'}`.
    pub fn join(&self, other: &Self) -> Self {
        Self::new(self.support.iter().chain(&other.support).copied()).expect("nonempty")
    }

    pub(crate) fn check(&self, shape: &AlgebraShape) {
        assert!(
            self.support.iter().all(|&i| i < shape.num_components()),
            "seminorm support {:?} out of range for shape {:?}",
            self.support,
            shape.dims()
        );
    }

    /// Maximum of `f(i)` over the support; zero-based component indices.
    pub(crate) fn max_over(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.support.iter().map(|&i| f(i)).fold(0.0, f64::max)
    }

    /// # Panics
    /// If the support names a component the element does not have.
    pub fn eval(&self, a: &AlgebraElement) -> f64 {
        self.check(a.shape());
        self.max_over(|i| linalg::spectral_norm(a.component(i)))
    }
}

impl TryFrom<Vec<usize>> for Seminorm {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Seminorm> for Vec<usize> {
    fn from(p: Seminorm) -> Self {
        p.support
    }
}

/// A shape together with its designated unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitization {
    pub shape: AlgebraShape,
    pub unit: AlgebraElement,
}

/// Every multi-matrix algebra is already unital, so this only attaches the
/// identity as the designated unit.
pub fn unitize(shape: &AlgebraShape) -> Unitization {
    Unitization { shape: shape.clone(), unit: AlgebraElement::identity(shape) }
}
