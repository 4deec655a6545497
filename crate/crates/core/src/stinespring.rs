//! Completely positive maps `phi: B -> L(A^m)` and their minimal Stinespring
//! dilations `phi(b) = W^* pi(b) W`.
//!
//! `B` is a multi-matrix algebra. A map is stored by its values on the matrix
//! units `E^c_jk` of every component `c`, ordered by `(c, j, k)`. Its kernel
//! lives on `X = S u {1}`, the matrix units followed by the unit.

use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{AlgebraElement, AlgebraShape, Seminorm};
use crate::error::{Error, Result};
use crate::kernel::{is_positive_semidefinite, OperatorKernel};
use crate::linalg::{self, CMat};
use crate::linearisation::{kolmogorov, kolmogorov_pivoted_cholesky, Linearisation, Representation};
use crate::module::{vector_seminorm, AdjointableOp, ModuleVector};
use crate::semigroup::StarSemigroup;

/// Index of `E^c_jk` in the canonical spanning set.
fn unit_index(shape: &AlgebraShape, c: usize, j: usize, k: usize) -> usize {
    let offset: usize = shape.dims()[..c].iter().map(|n| n * n).sum();
    offset + j * shape.dim(c) + k
}

/// `(c, j, k)` for every matrix unit, in canonical order.
pub fn matrix_units(shape: &AlgebraShape) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(shape.algebra_dim());
    for (c, &n) in shape.dims().iter().enumerate() {
        for j in 0..n {
            for k in 0..n {
                out.push((c, j, k));
            }
        }
    }
    out
}

fn unit_element(shape: &AlgebraShape, c: usize, j: usize, k: usize) -> AlgebraElement {
    let mut comps: Vec<CMat> = shape.dims().iter().map(|&n| linalg::zeros(n, n)).collect();
    comps[c][(j, k)] = linalg::ONE;
    AlgebraElement::new(shape.clone(), comps).expect("layout")
}

/// The *-semigroup of matrix units of `shape`, then the unit, then zero.
pub fn matrix_unit_semigroup(shape: &AlgebraShape) -> StarSemigroup {
    let units = matrix_units(shape);
    let s = units.len();
    let (one, zero) = (s, s + 1);
    let mut mult = vec![vec![zero; s + 2]; s + 2];
    let mut star = vec![0; s + 2];
    for (a, &(c, j, k)) in units.iter().enumerate() {
        star[a] = unit_index(shape, c, k, j);
        for (b, &(c2, l, m)) in units.iter().enumerate() {
            if c == c2 && k == l {
                mult[a][b] = unit_index(shape, c, j, m);
            }
        }
        mult[a][one] = a;
        mult[one][a] = a;
    }
    mult[one][one] = one;
    star[one] = one;
    star[zero] = zero;
    StarSemigroup::new(mult, star, Some(one)).expect("matrix units form a *-semigroup")
}

#[derive(Clone, Debug, PartialEq)]
pub struct CPMapSpec {
    domain: AlgebraShape,
    codomain: AlgebraShape,
    rank: usize,
    values: Vec<AdjointableOp>,
}

impl CPMapSpec {
    /// `values[unit_index(c, j, k)] = phi(E^c_jk)`.
    pub fn new(domain: AlgebraShape, codomain: AlgebraShape, rank: usize, values: Vec<AdjointableOp>) -> Result<Self> {
        if values.len() != domain.algebra_dim() {
            return Err(Error::Dimension(format!(
                "{} values for a domain of dimension {}",
                values.len(),
                domain.algebra_dim()
            )));
        }
        if values.iter().any(|v| v.shape() != &codomain || v.rank() != rank) {
            return Err(Error::shape("map values act on different modules"));
        }
        Ok(Self { domain, codomain, rank, values })
    }

    pub fn from_fn(
        domain: &AlgebraShape,
        codomain: &AlgebraShape,
        rank: usize,
        f: impl Fn(&AlgebraElement) -> AdjointableOp,
    ) -> Result<Self> {
        let values = matrix_units(domain).into_iter().map(|(c, j, k)| f(&unit_element(domain, c, j, k))).collect();
        Self::new(domain.clone(), codomain.clone(), rank, values)
    }

    /// `b -> b` acting on `B^1`.
    pub fn identity(shape: &AlgebraShape) -> Self {
        Self::from_fn(shape, shape, 1, |b| AdjointableOp::new(shape.clone(), 1, b.components().to_vec()).expect("layout"))
            .expect("layout")
    }

    /// `b -> sum_l A_l^* iota(b) A_l` with `iota(b)` the block diagonal of the
    /// components of `b`. Each `A_l` holds one `(sum b_c) x (m n_i)` matrix
    /// per codomain component.
    pub fn kraus(domain: &AlgebraShape, codomain: &AlgebraShape, rank: usize, ops: &[Vec<CMat>]) -> Result<Self> {
        let total: usize = domain.dims().iter().sum();
        for a in ops {
            if a.len() != codomain.num_components()
                || a.iter().enumerate().any(|(i, m)| m.shape() != (total, rank * codomain.dim(i)))
            {
                return Err(Error::shape("Kraus operator has the wrong layout"));
            }
        }
        Self::from_fn(domain, codomain, rank, |b| {
            let big = block_diagonal(b);
            let comps = (0..codomain.num_components())
                .map(|i| {
                    let n = rank * codomain.dim(i);
                    ops.iter().fold(linalg::zeros(n, n), |acc, a| acc + a[i].adjoint() * &big * &a[i])
                })
                .collect();
            AdjointableOp::new(codomain.clone(), rank, comps).expect("layout")
        })
    }

    /// Random map with `count` Kraus operators.
    pub fn random_kraus<R: Rng + ?Sized>(
        rng: &mut R,
        domain: &AlgebraShape,
        codomain: &AlgebraShape,
        rank: usize,
        count: usize,
    ) -> Self {
        let total: usize = domain.dims().iter().sum();
        let ops: Vec<Vec<CMat>> = (0..count)
            .map(|_| {
                codomain
                    .dims()
                    .iter()
                    .map(|&n| linalg::random_complex(rng, total, rank * n).scale(1.0 / (total as f64).sqrt()))
                    .collect()
            })
            .collect();
        Self::kraus(domain, codomain, rank, &ops).expect("layout")
    }

    /// `b -> b^T` on a single matrix block.
    pub fn transpose(n: usize) -> Self {
        let s = AlgebraShape::new(vec![n]).expect("n > 0");
        Self::from_fn(&s, &s, 1, |b| AdjointableOp::new(s.clone(), 1, vec![b.component(0).transpose()]).expect("layout"))
            .expect("layout")
    }

    /// `b -> tr(b) / n * I_n` on `M_n`.
    pub fn depolarizing(n: usize) -> Self {
        let s = AlgebraShape::new(vec![n]).expect("n > 0");
        Self::from_fn(&s, &s, 1, |b| AdjointableOp::scalar(&s, 1, b.component(0).trace() / n as f64)).expect("layout")
    }

    pub fn domain(&self) -> &AlgebraShape {
        &self.domain
    }

    pub fn codomain(&self) -> &AlgebraShape {
        &self.codomain
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn values(&self) -> &[AdjointableOp] {
        &self.values
    }

    pub fn value(&self, c: usize, j: usize, k: usize) -> &AdjointableOp {
        &self.values[unit_index(&self.domain, c, j, k)]
    }

    /// `phi(b)` by linear extension.
    pub fn apply(&self, b: &AlgebraElement) -> Result<AdjointableOp> {
        if b.shape() != &self.domain {
            return Err(Error::shape("element outside the domain"));
        }
        let mut acc = AdjointableOp::zero(&self.codomain, self.rank);
        for (idx, (c, j, k)) in matrix_units(&self.domain).into_iter().enumerate() {
            let z = b.component(c)[(j, k)];
            if z != linalg::ZERO {
                acc = acc.add(&self.values[idx].scale(z))?;
            }
        }
        Ok(acc)
    }

    pub fn unit_image(&self) -> AdjointableOp {
        self.apply(&AlgebraElement::identity(&self.domain)).expect("layout")
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self { values: self.values.iter().map(|v| v.scale(z)).collect(), ..self.clone() }
    }
}

fn block_diagonal(b: &AlgebraElement) -> CMat {
    let total: usize = b.shape().dims().iter().sum();
    let mut out = linalg::zeros(total, total);
    let mut at = 0;
    for comp in b.components() {
        linalg::set_block(&mut out, at, at, comp);
        at += comp.nrows();
    }
    out
}

/// `k(a, b) = phi(a^* b)` on `X = S u {1}`.
pub fn kernel_of_map(phi: &CPMapSpec) -> OperatorKernel {
    let units = matrix_units(&phi.domain);
    let s = units.len();
    let zero = AdjointableOp::zero(&phi.codomain, phi.rank);
    let one = phi.unit_image();
    OperatorKernel::from_fn(&phi.codomain, phi.rank, s + 1, |a, b| match (a < s, b < s) {
        (true, true) => {
            // (E^c_jk)^* E^c'_lm = E^c_kj E^c'_lm = [c = c', j = l] E^c_km
            let (c, j, k) = units[a];
            let (c2, l, m) = units[b];
            if c == c2 && j == l { phi.value(c, k, m).clone() } else { zero.clone() }
        }
        (true, false) => {
            let (c, j, k) = units[a];
            phi.value(c, k, j).clone()
        }
        (false, true) => phi.values[b].clone(),
        (false, false) => one.clone(),
    })
    .expect("layout")
}

pub fn is_completely_positive(phi: &CPMapSpec, tol: f64) -> bool {
    is_positive_semidefinite(&kernel_of_map(phi), tol)
}

/// `sum_jk E_jk (x) phi(E^c_jk)_i`, of size `b_c m n_i`.
pub fn choi_matrix(phi: &CPMapSpec, c: usize, i: usize) -> CMat {
    let n = phi.domain.dim(c);
    let w = phi.rank * phi.codomain.dim(i);
    let mut out = linalg::zeros(n * w, n * w);
    for j in 0..n {
        for k in 0..n {
            linalg::set_block(&mut out, j * w, k * w, phi.value(c, j, k).component(i));
        }
    }
    out
}

/// Numerical rank of every Choi matrix, indexed `[c][i]`.
pub fn choi_ranks(phi: &CPMapSpec, tol: f64) -> Vec<Vec<usize>> {
    (0..phi.domain.num_components())
        .map(|c| (0..phi.codomain.num_components()).map(|i| linalg::rank(&choi_matrix(phi, c, i), tol)).collect())
        .collect()
}

#[derive(Clone, Debug)]
pub struct Dilation {
    pub linearisation: Linearisation,
    /// `pi` on the matrix-unit semigroup: matrix units, unit, zero.
    pub representation: Representation,
    /// `W = V(1)`, one `d_i x (m n_i)` block per codomain component.
    pub w: Vec<CMat>,
    /// Largest `|F M(b) (I - F^+ F)| / |F|`; zero when `pi` is well defined.
    pub consistency_residual: f64,
    pub domain: AlgebraShape,
}

impl Dilation {
    pub fn dims(&self) -> Vec<usize> {
        self.linearisation.dims()
    }

    /// `pi(b)` by linear extension over the matrix units.
    pub fn pi(&self, b: &AlgebraElement) -> Vec<CMat> {
        let dims = self.dims();
        let mut acc: Vec<CMat> = dims.iter().map(|&d| linalg::zeros(d, d)).collect();
        for (idx, (c, j, k)) in matrix_units(&self.domain).into_iter().enumerate() {
            let z = b.component(c)[(j, k)];
            if z != linalg::ZERO {
                for (a, p) in acc.iter_mut().zip(self.representation.get(idx)) {
                    *a += p * z;
                }
            }
        }
        acc
    }

    /// `W^* pi(b) W`.
    pub fn compress(&self, b: &AlgebraElement) -> Vec<CMat> {
        self.pi(b).iter().zip(&self.w).map(|(p, w)| w.adjoint() * p * w).collect()
    }

    /// `max |phi(b) - W^* pi(b) W|_F` over the given elements.
    pub fn dilation_residual(&self, phi: &CPMapSpec, elements: &[AlgebraElement]) -> Result<f64> {
        let mut worst = 0.0f64;
        for b in elements {
            let lhs = phi.apply(b)?;
            for (l, r) in lhs.components().iter().zip(self.compress(b)) {
                worst = worst.max(linalg::frobenius(&(l - r)));
            }
        }
        Ok(worst)
    }

    /// Residual on the spanning set and the unit.
    pub fn basis_residual(&self, phi: &CPMapSpec) -> Result<f64> {
        let mut elements: Vec<AlgebraElement> =
            matrix_units(&self.domain).into_iter().map(|(c, j, k)| unit_element(&self.domain, c, j, k)).collect();
        elements.push(AlgebraElement::identity(&self.domain));
        self.dilation_residual(phi, &elements)
    }

    /// `max_i |W_i^* W_i - phi(1)_i|_F`.
    pub fn w_residual(&self, phi: &CPMapSpec) -> f64 {
        let one = phi.unit_image();
        self.w
            .iter()
            .zip(one.components())
            .map(|(w, u)| linalg::frobenius(&(w.adjoint() * w - u)))
            .fold(0.0, f64::max)
    }

    /// `max_i |pi(1)_i - I|`.
    pub fn unital_residual(&self) -> f64 {
        let one = self.representation.get(matrix_units(&self.domain).len());
        one.iter().map(|p| linalg::spectral_norm(&(p - linalg::identity(p.nrows())))).fold(0.0, f64::max)
    }

    /// Rank of `[pi(E) W]_E` per component; equal to `d_i` exactly when
    /// `pi(B) W H` spans `K`.
    pub fn cyclic_ranks(&self, tol: f64) -> Vec<usize> {
        let s = matrix_units(&self.domain).len();
        self.w
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let d = w.nrows();
                let cols = w.ncols();
                let mut m = linalg::zeros(d, s * cols);
                for e in 0..s {
                    linalg::set_block(&mut m, 0, e * cols, &(&self.representation.get(e)[i] * w));
                }
                linalg::rank(&m, tol)
            })
            .collect()
    }

    /// Multiplicity of domain component `c` in codomain component `i`,
    /// `rank pi(E^c_11)_i`.
    pub fn multiplicities(&self, tol: f64) -> Vec<Vec<usize>> {
        (0..self.domain.num_components())
            .map(|c| {
                let idx = unit_index(&self.domain, c, 0, 0);
                self.representation.get(idx).iter().map(|p| linalg::rank(p, tol)).collect()
            })
            .collect()
    }
}

/// Minimal Stinespring dilation from the Kolmogorov factorisation of the
/// map's kernel: `W = V(1)` and `pi(b) = F M(b) F^+` with `M(b)` the
/// relocation of columns by left multiplication.
pub fn stinespring_dilate(phi: &CPMapSpec, tol: f64) -> Result<Dilation> {
    dilate_with(phi, kolmogorov(&kernel_of_map(phi), tol).map_err(|e| not_cp(phi, e, tol))?)
}

/// Same construction on the pivoted-Cholesky factorisation.
pub fn stinespring_dilate_cholesky(phi: &CPMapSpec, tol: f64) -> Result<Dilation> {
    dilate_with(phi, kolmogorov_pivoted_cholesky(&kernel_of_map(phi), tol).map_err(|e| not_cp(phi, e, tol))?)
}

fn not_cp(phi: &CPMapSpec, e: Error, tol: f64) -> Error {
    if !matches!(e, Error::NotPsd { .. }) {
        return e;
    }
    for c in 0..phi.domain.num_components() {
        for i in 0..phi.codomain.num_components() {
            if !linalg::is_psd(&choi_matrix(phi, c, i), tol) {
                return Error::NotCompletelyPositive { domain: c, codomain: i };
            }
        }
    }
    match e {
        Error::NotPsd { component, .. } => Error::NotCompletelyPositive { domain: 0, codomain: component },
        other => other,
    }
}

fn dilate_with(phi: &CPMapSpec, lin: Linearisation) -> Result<Dilation> {
    let units = matrix_units(&phi.domain);
    let s = units.len();
    let one = s;
    let mut ops: Vec<Vec<CMat>> = Vec::with_capacity(s + 2);
    let mut consistency = 0.0f64;
    let pinvs: Vec<CMat> = lin.factors().iter().map(linalg::pinv).collect();
    // pi on the matrix units; column block x of F M(E) is V(E x).
    for &(c, j, k) in &units {
        let mut row = Vec::with_capacity(lin.factors().len());
        for (i, f) in lin.factors().iter().enumerate() {
            let w = phi.rank * phi.codomain.dim(i);
            let mut moved = linalg::zeros(f.nrows(), f.ncols());
            for (x, &(c2, l, m)) in units.iter().enumerate() {
                if c2 == c && l == k {
                    let target = unit_index(&phi.domain, c, j, m);
                    linalg::set_block(&mut moved, 0, x * w, &linalg::block(f, 0, target * w, f.nrows(), w));
                }
            }
            let target = unit_index(&phi.domain, c, j, k);
            linalg::set_block(&mut moved, 0, one * w, &linalg::block(f, 0, target * w, f.nrows(), w));
            let proj = linalg::identity(f.ncols()) - &pinvs[i] * f;
            let norm = linalg::spectral_norm(f);
            if norm > 0.0 {
                consistency = consistency.max(linalg::spectral_norm(&(&moved * proj)) / norm);
            }
            row.push(moved * &pinvs[i]);
        }
        ops.push(row);
    }
    let dims = lin.dims();
    ops.push(lin.factors().iter().zip(&pinvs).map(|(f, p)| f * p).collect());
    ops.push(dims.iter().map(|&d| linalg::zeros(d, d)).collect());
    let w = lin.v_of(one);
    Ok(Dilation {
        linearisation: lin,
        representation: Representation::new(ops),
        w,
        consistency_residual: consistency,
        domain: phi.domain.clone(),
    })
}

/// A finite increasing net of positive contractions ending at the unit.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproximateUnitNet {
    elements: Vec<AlgebraElement>,
}

impl ApproximateUnitNet {
    pub fn new(elements: Vec<AlgebraElement>, tol: f64) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::MalformedNet("empty net".into()))?;
        let shape = first.shape().clone();
        for (j, e) in elements.iter().enumerate() {
            if e.shape() != &shape {
                return Err(Error::MalformedNet(format!("element {} has another shape", j + 1)));
            }
            if !e.is_positive(tol) {
                return Err(Error::MalformedNet(format!("element {} is not positive", j + 1)));
            }
            if e.bounded_norm() > 1.0 + tol {
                return Err(Error::MalformedNet(format!("element {} has norm above 1", j + 1)));
            }
        }
        for j in 1..elements.len() {
            if !elements[j - 1].leq(&elements[j], tol)? {
                return Err(Error::MalformedNet(format!("elements {} and {} are not increasing", j, j + 1)));
            }
        }
        let last = elements.last().expect("nonempty");
        if last.max_abs_diff(&AlgebraElement::identity(&shape))? > tol {
            return Err(Error::MalformedNet("net does not reach the unit".into()));
        }
        Ok(Self { elements })
    }

    /// `e_j = t_j 1` for the given scalars.
    pub fn scalar_staircase(shape: &AlgebraShape, steps: &[f64], tol: f64) -> Result<Self> {
        Self::new(steps.iter().map(|&t| AlgebraElement::scalar(shape, Complex64::from(t))).collect(), tol)
    }

    pub fn elements(&self) -> &[AlgebraElement] {
        &self.elements
    }

    /// `max(p(x - x e_j), p(x - e_j x))` per element, for the sample `x`.
    pub fn unit_defects(&self, x: &AlgebraElement, p: &Seminorm) -> Result<Vec<f64>> {
        self.elements
            .iter()
            .map(|e| Ok(p.eval(&x.sub(&x.multiply(e)?)?).max(p.eval(&x.sub(&e.multiply(x)?)?))))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrictnessReport {
    /// Per consecutive pair `(e_j, e_{j+1})`, the largest of
    /// `p~((phi(e_{j+1}) - phi(e_j)) h)` and the adjoint-side analogue.
    pub gaps: Vec<f64>,
    /// First 1-based index from which every later gap is below the
    /// tolerance.
    pub tail_index: usize,
    pub note: &'static str,
}

pub const STRICTNESS_NOTE: &str = "strictness: trivially satisfied";

pub fn strictness_check(
    phi: &CPMapSpec,
    net: &ApproximateUnitNet,
    p: &Seminorm,
    samples: &[ModuleVector],
    tol: f64,
) -> Result<StrictnessReport> {
    if net.elements[0].shape() != &phi.domain {
        return Err(Error::MalformedNet("net lives in another algebra".into()));
    }
    let images: Vec<AdjointableOp> = net.elements.iter().map(|e| phi.apply(e)).collect::<Result<_>>()?;
    let mut gaps = Vec::with_capacity(images.len().saturating_sub(1));
    for pair in images.windows(2) {
        let diff = pair[1].sub(&pair[0])?;
        let adj = diff.adjoint();
        let mut g = 0.0f64;
        for h in samples {
            g = g.max(vector_seminorm(&diff.apply(h)?, p)).max(vector_seminorm(&adj.apply(h)?, p));
        }
        gaps.push(g);
    }
    let tail = gaps.iter().rposition(|&g| g > tol).map_or(1, |j| j + 2);
    Ok(StrictnessReport { gaps, tail_index: tail, note: STRICTNESS_NOTE })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityConstants {
    /// Domain seminorm: full support.
    pub r: Seminorm,
    pub d_p: f64,
    /// `true` when `d_p` is the exact norm of `phi_p`, which holds for
    /// completely positive maps (`|phi_p| = |phi_p(1)|`). Otherwise `d_p` is
    /// an upper bound.
    pub exact: bool,
}

/// `d_p` with `p_bar(phi(x)) <= d_p r(x)`.
///
/// For a completely positive map the norm of `phi_p` is attained at the unit.
/// Otherwise the bound `|phi_p(x)| <= |Phi_p|_2 |x|_F <= |Phi_p|_2
/// sqrt(sum b_c) |x|` is used, with `Phi_p` the matrix of `phi_p` between the
/// Frobenius-normed canonical bases.
pub fn continuity_constants(phi: &CPMapSpec, p: &Seminorm, tol: f64) -> ContinuityConstants {
    let r = Seminorm::full(&phi.domain);
    if is_completely_positive(phi, tol) {
        return ContinuityConstants { r, d_p: phi.unit_image().seminorm(p), exact: true };
    }
    let rows: usize = p.support().iter().map(|&i| (phi.rank * phi.codomain.dim(i)).pow(2)).sum();
    let mut m = linalg::zeros(rows, phi.values.len());
    for (col, v) in phi.values.iter().enumerate() {
        let mut at = 0;
        for &i in p.support() {
            for z in v.component(i).iter() {
                m[(at, col)] = *z;
                at += 1;
            }
        }
    }
    let total: usize = phi.domain.dims().iter().sum();
    ContinuityConstants { r, d_p: linalg::spectral_norm(&m) * (total as f64).sqrt(), exact: false }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuotientRepresentation {
    pub representation: Representation,
    /// Norm of `pi_p`, `max_{i in J} |pi(1)_i|`.
    pub d_p: f64,
    pub multiplicative_residual: f64,
    pub adjoint_residual: f64,
}

/// Restriction of a dilation's representation to the components of `p`.
pub fn representation_quotient(dilation: &Dilation, p: &Seminorm) -> Result<QuotientRepresentation> {
    let sg = matrix_unit_semigroup(&dilation.domain);
    let rep = dilation.representation.restrict(p);
    let report = crate::linearisation::verify_star_rep(&rep, &sg, f64::INFINITY)?;
    let one = matrix_units(&dilation.domain).len();
    let d_p = rep.get(one).iter().map(linalg::spectral_norm).fold(0.0, f64::max);
    Ok(QuotientRepresentation {
        representation: rep,
        d_p,
        multiplicative_residual: report.multiplicative_residual,
        adjoint_residual: report.adjoint_residual,
    })
}
