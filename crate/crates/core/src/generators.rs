//! Seeded test-data families: random psd kernels of prescribed rank,
//! Kac-Murdock-Szego and circulant kernels, and invariant kernels built from
//! random *-representations of small semigroups.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::AlgebraShape;
use crate::error::{Error, Result};
use crate::kernel::{make_invariant_kernel, OperatorKernel};
use crate::linalg::{self, CMat};
use crate::module::{AdjointableOp, ModuleMap, ModuleVector};
use crate::semigroup::{Action, StarSemigroup};

/// Kernel `F_i^* F_i` for explicit factors with `points * rank * n_i`
/// columns.
pub fn kernel_from_factors(shape: &AlgebraShape, rank: usize, points: usize, factors: &[CMat]) -> Result<OperatorKernel> {
    if factors.len() != shape.num_components() {
        return Err(Error::shape("one factor per component is required"));
    }
    let grams: Vec<CMat> = factors.iter().map(|f| f.adjoint() * f).collect();
    OperatorKernel::from_fn(shape, rank, points, |x, y| {
        let comps = grams
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let b = rank * shape.dim(i);
                linalg::block(g, x * b, y * b, b, b)
            })
            .collect();
        AdjointableOp::new(shape.clone(), rank, comps).expect("layout")
    })
}

/// Random psd kernel whose Gram block has rank `ranks[i]` in component `i`
/// (capped at the block size).
pub fn random_psd<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &AlgebraShape,
    rank: usize,
    points: usize,
    ranks: &[usize],
) -> Result<OperatorKernel> {
    if ranks.len() != shape.num_components() {
        return Err(Error::Dimension("one target rank per component is required".into()));
    }
    let factors: Vec<CMat> = ranks
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let cols = points * rank * shape.dim(i);
            linalg::random_complex(rng, d.min(cols), cols)
        })
        .collect();
    kernel_from_factors(shape, rank, points, &factors)
}

/// Hermitian kernel with independent Gaussian entries; almost surely
/// indefinite.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape, rank: usize, points: usize) -> OperatorKernel {
    let grams: Vec<CMat> =
        shape.dims().iter().map(|&n| linalg::random_hermitian(rng, points * rank * n)).collect();
    OperatorKernel::from_fn(shape, rank, points, |x, y| {
        let comps = grams
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let b = rank * shape.dim(i);
                linalg::block(g, x * b, y * b, b, b)
            })
            .collect();
        AdjointableOp::new(shape.clone(), rank, comps).expect("layout")
    })
    .expect("layout")
}

/// `k(i, j) = a^{|i - j|}` times the identity of `A^m`.
pub fn kms(shape: &AlgebraShape, rank: usize, points: usize, a: f64) -> OperatorKernel {
    OperatorKernel::from_fn(shape, rank, points, |x, y| {
        let e = (x as i32 - y as i32).abs();
        AdjointableOp::scalar(shape, rank, Complex64::from(a.powi(e)))
    })
    .expect("layout")
}

/// Translation-invariant kernel `k(s, t) = f(t - s)` on `Z_q` with
/// `f(t) = sum_j w^{jt} P_j`, `w = exp(2 pi i / q)` and random positive
/// `P_j`.
pub fn circulant<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape, rank: usize, q: usize) -> OperatorKernel {
    let weights: Vec<AdjointableOp> = (0..q).map(|_| AdjointableOp::random_positive(rng, shape, rank)).collect();
    let symbol: Vec<AdjointableOp> = (0..q)
        .map(|t| {
            weights.iter().enumerate().fold(AdjointableOp::zero(shape, rank), |acc, (j, p)| {
                let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (j * t % q) as f64 / q as f64);
                acc.add(&p.scale(w)).expect("layout")
            })
        })
        .collect();
    OperatorKernel::from_fn(shape, rank, q, |s, t| symbol[(t + q - s) % q].clone()).expect("layout")
}

/// Scalar circulant `k(s, t) = f((t - s) mod q)` from explicit values.
pub fn scalar_circulant(f: &[f64]) -> OperatorKernel {
    let q = f.len();
    let s = AlgebraShape::new(vec![1]).expect("shape");
    OperatorKernel::from_fn(&s, 1, q, |a, b| AdjointableOp::scalar(&s, 1, Complex64::from(f[(b + q - a) % q])))
        .expect("layout")
}

/// Permutation matrix of left multiplication by `g` in a group.
fn regular_matrix(sg: &StarSemigroup, g: usize) -> CMat {
    let n = sg.order();
    let mut m = linalg::zeros(n, n);
    for h in 0..n {
        m[(sg.mul(g, h), h)] = linalg::ONE;
    }
    m
}

/// Every `{0, 1}`-valued *-character with `chi(unit) = 1`, by exhaustive
/// search; only sensible for small orders.
pub fn characters(sg: &StarSemigroup) -> Vec<Vec<u8>> {
    let g = sg.order();
    assert!(g <= 16, "exhaustive character search is limited to order 16");
    (0u32..(1 << g))
        .map(|mask| (0..g).map(|a| ((mask >> a) & 1) as u8).collect::<Vec<u8>>())
        .filter(|chi| {
            sg.unit().is_none_or(|e| chi[e] == 1)
                && (0..g).all(|a| chi[sg.star(a)] == chi[a])
                && (0..g).all(|a| (0..g).all(|b| chi[sg.mul(a, b)] == chi[a] * chi[b]))
        })
        .collect()
}

/// Scalar matrices `rho(xi)` forming a *-representation of `sg` on `C^r`.
///
/// Groups with inverse star get the regular representation, `M_2` matrix
/// units get `E_jk (x) I (+) 0`, everything else a random direct sum of
/// `{0, 1}`-valued characters. The result is conjugated by a random unitary.
pub fn random_scalar_representation<R: Rng + ?Sized>(rng: &mut R, sg: &StarSemigroup) -> Vec<CMat> {
    let raw: Vec<CMat> = if sg.is_group_with_inverse_star() {
        (0..sg.order()).map(|g| regular_matrix(sg, g)).collect()
    } else if *sg == StarSemigroup::matrix_units2() {
        let t = rng.random_range(1..=2usize);
        let extra = rng.random_range(0..=1usize);
        let r = 2 * t + extra;
        let mut out = vec![linalg::zeros(r, r); 6];
        out[0] = linalg::identity(r);
        for j in 0..2 {
            for k in 0..2 {
                let mut e = linalg::zeros(2, 2);
                e[(j, k)] = linalg::ONE;
                let mut m = linalg::zeros(r, r);
                linalg::set_block(&mut m, 0, 0, &linalg::kron(&e, &linalg::identity(t)));
                out[2 + 2 * j + k] = m;
            }
        }
        out
    } else {
        let mut chars = characters(sg);
        chars.shuffle(rng);
        let r = rng.random_range(2..=4usize).max(chars.len().min(4));
        let picked: Vec<&Vec<u8>> = (0..r).map(|j| &chars[j % chars.len()]).collect();
        (0..sg.order())
            .map(|a| {
                let diag: Vec<Complex64> = picked.iter().map(|chi| Complex64::from(chi[a] as f64)).collect();
                CMat::from_diagonal(&nalgebra::DVector::from_vec(diag))
            })
            .collect()
    };
    let r = raw[0].nrows();
    let u = linalg::random_unitary(rng, r);
    raw.iter().map(|m| &u * m * u.adjoint()).collect()
}

/// Data behind an invariant kernel, kept so tests can compare against it.
#[derive(Clone, Debug)]
pub struct InvariantFixture {
    pub semigroup: StarSemigroup,
    pub action: Action,
    pub rho: Vec<AdjointableOp>,
    pub kernel: OperatorKernel,
}

/// Invariant psd kernel on the left-regular action of a monoid, from a
/// random *-representation and a random `V(unit)`.
pub fn invariant_from_rep<R: Rng + ?Sized>(
    rng: &mut R,
    sg: &StarSemigroup,
    shape: &AlgebraShape,
    rank: usize,
    tol: f64,
) -> Result<InvariantFixture> {
    let unit = sg.unit().ok_or_else(|| Error::Dimension("the regular construction needs a unit".into()))?;
    let scalars = random_scalar_representation(rng, sg);
    let r = scalars[0].nrows();
    let rho: Vec<AdjointableOp> = scalars.iter().map(|m| AdjointableOp::from_scalar_matrix(shape, m)).collect();
    let action = Action::left_regular(sg);
    let seed = ModuleMap::random(rng, shape, r, rank);
    let kernel = make_invariant_kernel(sg, &action, &rho, &[(unit, seed)], tol)?;
    Ok(InvariantFixture { semigroup: sg.clone(), action, rho, kernel })
}

/// Semigroups of order at most 6 used by the representation sweeps.
pub fn small_semigroups() -> Vec<(&'static str, StarSemigroup)> {
    vec![
        ("trivial", StarSemigroup::trivial()),
        ("cyclic2", StarSemigroup::cyclic(2)),
        ("cyclic3", StarSemigroup::cyclic(3)),
        ("cyclic4", StarSemigroup::cyclic(4)),
        ("cyclic5", StarSemigroup::cyclic(5)),
        ("klein", StarSemigroup::klein()),
        ("symmetric3", StarSemigroup::symmetric3()),
        ("semilattice2", StarSemigroup::two_element_semilattice()),
        ("union_semilattice", StarSemigroup::union_semilattice()),
        ("saturating_shift3", StarSemigroup::saturating_shift(3)),
        ("saturating_shift5", StarSemigroup::saturating_shift(5)),
        ("matrix_units2", StarSemigroup::matrix_units2()),
    ]
}

/// Random points (with repetition) and vectors for a quadratic form with at
/// most `max_terms` terms.
pub fn random_support<R: Rng + ?Sized>(
    rng: &mut R,
    k: &OperatorKernel,
    max_terms: usize,
) -> (Vec<usize>, Vec<ModuleVector>) {
    let n = rng.random_range(1..=max_terms);
    let points = (0..n).map(|_| rng.random_range(0..k.points())).collect();
    let hs = (0..n).map(|_| ModuleVector::random(rng, k.shape(), k.rank())).collect();
    (points, hs)
}
