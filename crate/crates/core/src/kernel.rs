//! Operator-valued kernels on finite point sets.
//!
//! A kernel `k: X x X -> M_m(A)` is stored as an `N x N` array of operators.
//! Its Gram block is, per algebra component `i`, the Hermitian matrix of size
//! `N m n_i` whose `(x, y)` block is component `i` of `k(x, y)`. Positive
//! semidefiniteness of the kernel is positivity of every Gram block.

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, AlgebraShape, Seminorm};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::module::{gramian, AdjointableOp, ModuleMap, ModuleVector};
use crate::semigroup::{validate_action, Action, StarSemigroup};

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorKernel {
    shape: AlgebraShape,
    rank: usize,
    points: usize,
    values: Vec<AdjointableOp>,
}

impl OperatorKernel {
    /// `values` is row-major: entry `x * points + y` is `k(x, y)`.
    pub fn new(shape: AlgebraShape, rank: usize, points: usize, values: Vec<AdjointableOp>) -> Result<Self> {
        if points == 0 {
            return Err(Error::Dimension("kernel needs at least one point".into()));
        }
        if values.len() != points * points {
            return Err(Error::shape(format!("{} kernel values for {points} points", values.len())));
        }
        if values.iter().any(|v| v.shape() != &shape || v.rank() != rank) {
            return Err(Error::shape("kernel values act on different modules"));
        }
        Ok(Self { shape, rank, points, values })
    }

    pub fn from_fn(
        shape: &AlgebraShape,
        rank: usize,
        points: usize,
        mut f: impl FnMut(usize, usize) -> AdjointableOp,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(points * points);
        for x in 0..points {
            for y in 0..points {
                values.push(f(x, y));
            }
        }
        Self::new(shape.clone(), rank, points, values)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn get(&self, x: usize, y: usize) -> &AdjointableOp {
        &self.values[x * self.points + y]
    }

    pub fn values(&self) -> &[AdjointableOp] {
        &self.values
    }

    pub fn set(&mut self, x: usize, y: usize, value: AdjointableOp) -> Result<()> {
        if value.shape() != &self.shape || value.rank() != self.rank {
            return Err(Error::shape("replacement value acts on another module"));
        }
        self.values[x * self.points + y] = value;
        Ok(())
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self { values: self.values.iter().map(|v| v.scale(z)).collect(), ..self.clone() }
    }

    /// Largest Frobenius norm of a kernel value.
    pub fn max_value_norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.components().iter().map(linalg::frobenius))
            .fold(0.0, f64::max)
    }

    /// `max_{x,y} |k(x,y)^* - k(y,x)|_F`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.points {
            for y in 0..self.points {
                let d = self.get(x, y).adjoint().max_abs_diff(self.get(y, x)).expect("same module");
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol * (1.0 + self.max_value_norm())
    }
}

/// A finitely supported function `X -> H`, one module vector per point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFunction {
    values: Vec<ModuleVector>,
}

impl PointFunction {
    pub fn new(values: Vec<ModuleVector>) -> Result<Self> {
        let first = values.first().ok_or_else(|| Error::Dimension("empty point function".into()))?;
        if values.iter().any(|v| v.shape() != first.shape() || v.rank() != first.rank()) {
            return Err(Error::shape("point function values live in different modules"));
        }
        Ok(Self { values })
    }

    pub fn zero(shape: &AlgebraShape, rank: usize, points: usize) -> Self {
        Self { values: vec![ModuleVector::zero(shape, rank); points] }
    }

    /// `h` at `x`, zero elsewhere.
    pub fn delta(points: usize, x: usize, h: &ModuleVector) -> Self {
        let mut f = Self::zero(h.shape(), h.rank(), points);
        f.values[x] = h.clone();
        f
    }

    pub fn values(&self) -> &[ModuleVector] {
        &self.values
    }

    pub fn at(&self, x: usize) -> &ModuleVector {
        &self.values[x]
    }

    pub fn points(&self) -> usize {
        self.values.len()
    }

    /// Component `i` stacked over the points, `(N m n_i) x n_i`.
    pub fn stacked(&self, i: usize) -> CMat {
        let blocks: Vec<&CMat> = self.values.iter().map(|v| v.component(i)).collect();
        let rows = blocks[0].nrows();
        let cols = blocks[0].ncols();
        let mut out = linalg::zeros(rows * blocks.len(), cols);
        for (x, b) in blocks.iter().enumerate() {
            linalg::set_block(&mut out, x * rows, 0, b);
        }
        out
    }

    pub fn from_stacked(shape: &AlgebraShape, rank: usize, comps: &[CMat]) -> Result<Self> {
        let points = comps.first().map(|c| c.nrows() / (rank * shape.dim(0))).unwrap_or(0);
        let mut values = Vec::with_capacity(points);
        for x in 0..points {
            let parts = comps
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let rows = rank * shape.dim(i);
                    linalg::block(c, x * rows, 0, rows, shape.dim(i))
                })
                .collect();
            values.push(ModuleVector::new(shape.clone(), rank, parts)?);
        }
        Self::new(values)
    }
}

/// Per component, the `(N m n_i)`-square matrix with `(x, y)` block `k(x, y)_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramBlock {
    comps: Vec<CMat>,
}

impl GramBlock {
    pub fn components(&self) -> &[CMat] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &CMat {
        &self.comps[i]
    }

    /// The pairing `[g, h]_k = sum_{x,y} [k(y,x) g(x), h(y)]`, i.e.
    /// `g^* G^* h` per component.
    pub fn form(&self, g: &PointFunction, h: &PointFunction) -> Result<AlgebraElement> {
        let shape = g.at(0).shape().clone();
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(i, gram)| g.stacked(i).adjoint() * gram.adjoint() * h.stacked(i))
            .collect();
        AlgebraElement::new(shape, comps)
    }

    pub fn spectral_norm(&self) -> f64 {
        self.comps.iter().map(linalg::spectral_norm).fold(0.0, f64::max)
    }
}

pub fn gram_block(k: &OperatorKernel) -> GramBlock {
    let comps = (0..k.shape.num_components())
        .map(|i| {
            let b = k.rank * k.shape.dim(i);
            let mut g = linalg::zeros(k.points * b, k.points * b);
            for x in 0..k.points {
                for y in 0..k.points {
                    linalg::set_block(&mut g, x * b, y * b, k.get(x, y).component(i));
                }
            }
            g
        })
        .collect();
    GramBlock { comps }
}

/// `sum_{i,j} [k(x_i, x_j) h_j, h_i]` for points `x_i` and vectors `h_i`.
pub fn quadratic_form(k: &OperatorKernel, points: &[usize], hs: &[ModuleVector]) -> Result<AlgebraElement> {
    if points.len() != hs.len() {
        return Err(Error::shape("one vector per point is required"));
    }
    let mut acc = AlgebraElement::zero(&k.shape);
    for (i, &xi) in points.iter().enumerate() {
        for (j, &xj) in points.iter().enumerate() {
            let term = gramian(&k.get(xi, xj).apply(&hs[j])?, &hs[i])?;
            acc = acc.add(&term)?;
        }
    }
    Ok(acc)
}

/// Smallest Gram eigenvalue per component, with the largest one.
pub fn gram_spectrum_extremes(k: &OperatorKernel) -> Vec<(f64, f64)> {
    gram_block(k).comps.iter().map(linalg::eig_range).collect()
}

/// Every Gram component Hermitian and positive semidefinite within
/// `tol (1 + lambda_max)`.
pub fn is_positive_semidefinite(k: &OperatorKernel, tol: f64) -> bool {
    gram_block(k).comps.iter().all(|g| linalg::is_psd(g, tol))
}

pub(crate) fn require_psd(k: &OperatorKernel, tol: f64) -> Result<()> {
    for (i, g) in gram_block(k).comps.iter().enumerate() {
        if !linalg::is_psd(g, tol) {
            return Err(Error::NotPsd { component: i, eigenvalue: linalg::eig_range(g).0 });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceCheck {
    pub passed: bool,
    /// Largest `|k(y, xi.x) - k(xi*.y, x)|_F / (1 + max |k|_F)`.
    pub max_residual: f64,
    /// First `(xi, x, y)` whose residual exceeds the tolerance.
    pub violation: Option<(usize, usize, usize)>,
    /// Number of `(xi, x, y)` triples where both sides were defined.
    pub checked: usize,
}

/// Exhaustive scan of `k(y, xi.x) = k(xi*.y, x)` over all triples where both
/// sides are defined.
pub fn is_invariant(k: &OperatorKernel, sg: &StarSemigroup, act: &Action, tol: f64) -> Result<InvarianceCheck> {
    validate_action(sg, act)?;
    if act.points() != k.points {
        return Err(Error::Dimension(format!(
            "action on {} points, kernel on {}",
            act.points(),
            k.points
        )));
    }
    let scale = 1.0 + k.max_value_norm();
    let mut out = InvarianceCheck { passed: true, max_residual: 0.0, violation: None, checked: 0 };
    for xi in 0..sg.order() {
        let xs = sg.star(xi);
        for x in 0..k.points {
            let Some(xix) = act.apply(xi, x) else { continue };
            for y in 0..k.points {
                let Some(xsy) = act.apply(xs, y) else { continue };
                let r = k.get(y, xix).max_abs_diff(k.get(xsy, x))? / scale;
                out.checked += 1;
                out.max_residual = out.max_residual.max(r);
                if r > tol && out.violation.is_none() {
                    out.passed = false;
                    out.violation = Some((xi, x, y));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoPositiveReport {
    pub hermitian_residual: f64,
    /// Points with `k(x, x) = 0`.
    pub degenerate: Vec<usize>,
    pub regular: Vec<usize>,
    /// Largest `|k(x, y)|_F` with `x` degenerate.
    pub degenerate_row_residual: f64,
}

/// Structure forced by 2-positivity: Hermitian symmetry and the split of
/// `X` into points with vanishing diagonal, whose rows vanish, and the rest.
pub fn two_positive_structure(k: &OperatorKernel, tol: f64) -> Result<TwoPositiveReport> {
    let n = k.points;
    for x in 0..n {
        for y in x..n {
            for i in 0..k.shape.num_components() {
                let b = k.rank * k.shape.dim(i);
                let size = if x == y { b } else { 2 * b };
                let mut m = linalg::zeros(size, size);
                linalg::set_block(&mut m, 0, 0, k.get(x, x).component(i));
                if x != y {
                    linalg::set_block(&mut m, 0, b, k.get(x, y).component(i));
                    linalg::set_block(&mut m, b, 0, k.get(y, x).component(i));
                    linalg::set_block(&mut m, b, b, k.get(y, y).component(i));
                }
                if !linalg::is_psd(&m, tol) {
                    return Err(Error::NotTwoPositive { x, y });
                }
            }
        }
    }
    let scale = 1.0 + k.max_value_norm();
    let (degenerate, regular): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&x| k.get(x, x).components().iter().all(|c| linalg::frobenius(c) <= tol * scale));
    let mut row = 0.0f64;
    for &x in &degenerate {
        for y in 0..n {
            for v in [k.get(x, y), k.get(y, x)] {
                row = row.max(v.components().iter().map(linalg::frobenius).fold(0.0, f64::max));
            }
        }
    }
    Ok(TwoPositiveReport { hermitian_residual: k.hermitian_residual(), degenerate, regular, degenerate_row_residual: row })
}

/// Constant `C` with `p([Th, h]) <= C p([h, h])` for a positive `T`; this is
/// `p_bar(T)`, the growth constant of the powers of `T`.
pub fn krld_constant(t: &AdjointableOp, p: &Seminorm, tol: f64) -> Result<f64> {
    if !t.is_positive(tol) {
        return Err(Error::NotPositive);
    }
    Ok(t.seminorm(p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MtopWitness {
    pub d_p: f64,
    /// Largest relative excess of `p~(T^n h)` over `D_p^n p~(h)`; zero or
    /// rounding noise when the inequality holds.
    pub max_residual: f64,
}

/// Checks `p~(T^n h) <= D_p^n p~(h)` for `n = 1..=n_max` on the samples.
pub fn mtop_witness(t: &AdjointableOp, p: &Seminorm, n_max: u32, samples: &[ModuleVector]) -> Result<MtopWitness> {
    use crate::module::vector_seminorm;
    let d_p = t.seminorm(p);
    let mut worst = 0.0f64;
    for h in samples {
        let base = vector_seminorm(h, p);
        let mut v = h.clone();
        for n in 1..=n_max {
            v = t.apply(&v)?;
            let lhs = vector_seminorm(&v, p);
            let rhs = d_p.powi(n as i32) * base;
            let excess = if rhs > 0.0 { (lhs - rhs) / rhs } else { lhs };
            worst = worst.max(excess);
        }
    }
    Ok(MtopWitness { d_p, max_residual: worst })
}

/// Largest `p([Th,h]) - p([Th,Th])^{1/2} p([h,h])^{1/2}` over the samples.
pub fn pos_schwarz_check(t: &AdjointableOp, p: &Seminorm, samples: &[ModuleVector], tol: f64) -> Result<f64> {
    if !t.is_positive(tol) {
        return Err(Error::NotPositive);
    }
    let mut worst = f64::NEG_INFINITY;
    for h in samples {
        let th = t.apply(h)?;
        let lhs = p.eval(&gramian(&th, h)?);
        let rhs = (p.eval(&gramian(&th, &th)?) * p.eval(&gramian(h, h)?)).sqrt();
        worst = worst.max(lhs - rhs);
    }
    Ok(worst)
}

/// `u = sum_i k(x, y_i) h_i`.
fn section_sum(k: &OperatorKernel, x: usize, ys: &[usize], hs: &[ModuleVector]) -> Result<ModuleVector> {
    if ys.len() != hs.len() {
        return Err(Error::shape("one vector per point is required"));
    }
    let mut u = ModuleVector::zero(&k.shape, k.rank);
    for (&y, h) in ys.iter().zip(hs) {
        u = u.add(&k.get(x, y).apply(h)?)?;
    }
    Ok(u)
}

/// Both sides of the kernel Schwarz inequality, `(lhs, rhs)` with
/// `lhs = p(sum [k(x,y_i)h_i, k(x,y_j)h_j])` and
/// `rhs = p(sum [k(x,x)k(x,y_i)h_i, k(x,y_j)h_j])^{1/2} p(sum [k(y_i,y_j)h_j, h_i])^{1/2}`.
pub fn kernel_schwarz_sides(
    k: &OperatorKernel,
    x: usize,
    ys: &[usize],
    hs: &[ModuleVector],
    p: &Seminorm,
) -> Result<(f64, f64)> {
    let u = section_sum(k, x, ys, hs)?;
    let lhs = p.eval(&gramian(&u, &u)?);
    let first = p.eval(&gramian(&k.get(x, x).apply(&u)?, &u)?);
    let second = p.eval(&quadratic_form(k, ys, hs)?);
    Ok((lhs, (first * second).sqrt()))
}

pub fn kernel_schwarz_check(
    k: &OperatorKernel,
    x: usize,
    ys: &[usize],
    hs: &[ModuleVector],
    p: &Seminorm,
    tol: f64,
) -> Result<bool> {
    require_psd(k, tol)?;
    let (lhs, rhs) = kernel_schwarz_sides(k, x, ys, hs, p)?;
    Ok(lhs <= rhs + 1e-10 * (1.0 + rhs))
}

/// The tight evaluation constant `c_p(x) = p_bar(k(x, x))`.
pub fn b2_constant(k: &OperatorKernel, x: usize, p: &Seminorm, tol: f64) -> Result<f64> {
    require_psd(k, tol)?;
    Ok(k.get(x, x).seminorm(p))
}

/// `(p(sum [k(x,y_i)h_i, k(x,y_j)h_j]), p(sum [k(y_j,y_i)h_i, h_j]))`, the two
/// sides of the evaluation bound without the constant.
pub fn b2_sides(
    k: &OperatorKernel,
    x: usize,
    ys: &[usize],
    hs: &[ModuleVector],
    p: &Seminorm,
) -> Result<(f64, f64)> {
    let u = section_sum(k, x, ys, hs)?;
    Ok((p.eval(&gramian(&u, &u)?), p.eval(&quadratic_form(k, ys, hs)?)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    pub c: f64,
    pub c_x: f64,
    pub c_y: f64,
    /// Largest `p([k(y,x)h, k(y,x)h]) - C p([h,h])` over the samples.
    pub max_violation: f64,
}

/// `p([k(y,x)h, k(y,x)h]) <= C_x C_y p([h,h])` for a 2-positive kernel.
pub fn propagation_check(
    k: &OperatorKernel,
    x: usize,
    y: usize,
    p: &Seminorm,
    samples: &[ModuleVector],
    tol: f64,
) -> Result<Propagation> {
    two_positive_structure(k, tol)?;
    propagation_unchecked(k, x, y, p, samples, tol)
}

/// [`propagation_check`] without repeating the 2-positivity scan.
pub(crate) fn propagation_unchecked(
    k: &OperatorKernel,
    x: usize,
    y: usize,
    p: &Seminorm,
    samples: &[ModuleVector],
    tol: f64,
) -> Result<Propagation> {
    let c_x = krld_constant(k.get(x, x), p, tol)?;
    let c_y = krld_constant(k.get(y, y), p, tol)?;
    let c = c_x * c_y;
    let kyx = k.get(y, x);
    let mut worst = f64::NEG_INFINITY;
    for h in samples {
        let v = kyx.apply(h)?;
        worst = worst.max(p.eval(&gramian(&v, &v)?) - c * p.eval(&gramian(h, h)?));
    }
    Ok(Propagation { c, c_x, c_y, max_violation: worst })
}

/// Largest multiplicativity and adjoint residual of operators indexed by a
/// semigroup, with the offending pair.
pub(crate) fn star_rep_defect(sg: &StarSemigroup, rho: &[AdjointableOp]) -> Result<(f64, usize, usize)> {
    let mut worst = (0.0, 0, 0);
    for a in 0..sg.order() {
        let adj = rho[sg.star(a)].max_abs_diff(&rho[a].adjoint())?;
        if adj > worst.0 {
            worst = (adj, a, a);
        }
        for b in 0..sg.order() {
            let m = rho[sg.mul(a, b)].max_abs_diff(&rho[a].compose(&rho[b])?)?;
            if m > worst.0 {
                worst = (m, a, b);
            }
        }
    }
    Ok(worst)
}

/// Invariant kernel `k(x, y) = V(x)^* V(y)` from a *-representation `rho` of
/// the semigroup on some `A^r` and seed values of `V`, propagated along the
/// action by `V(xi.x) = rho(xi) V(x)`.
pub fn make_invariant_kernel(
    sg: &StarSemigroup,
    act: &Action,
    rho: &[AdjointableOp],
    seeds: &[(usize, ModuleMap)],
    tol: f64,
) -> Result<OperatorKernel> {
    validate_action(sg, act)?;
    if rho.len() != sg.order() {
        return Err(Error::Dimension(format!("{} representation operators for order {}", rho.len(), sg.order())));
    }
    let first = seeds.first().ok_or_else(|| Error::Dimension("at least one seed is required".into()))?;
    let shape = first.1.shape().clone();
    let r = first.1.target_rank();
    let m = first.1.source_rank();
    if rho.iter().any(|t| t.shape() != &shape || t.rank() != r) {
        return Err(Error::shape("representation does not act on the target of the seeds"));
    }
    let rho_scale = 1.0 + rho.iter().map(|t| t.components().iter().map(linalg::frobenius).fold(0.0, f64::max)).fold(0.0, f64::max);
    let (defect, a, b) = star_rep_defect(sg, rho)?;
    if defect > tol * rho_scale {
        return Err(Error::NotRepresentation { xi: a, eta: b, residual: defect });
    }

    let n = act.points();
    let mut v: Vec<Option<ModuleMap>> = vec![None; n];
    let mut queue = VecDeque::new();
    for (x, seed) in seeds {
        if *x >= n {
            return Err(Error::Dimension(format!("seed point {x} out of range")));
        }
        if seed.shape() != &shape || seed.target_rank() != r || seed.source_rank() != m {
            return Err(Error::shape("seeds with different layouts"));
        }
        v[*x] = Some(seed.clone());
        queue.push_back(*x);
    }
    while let Some(x) = queue.pop_front() {
        let vx = v[x].clone().expect("queued points are assigned");
        for xi in 0..sg.order() {
            let Some(y) = act.apply(xi, x) else { continue };
            let candidate = vx.then(&rho[xi])?;
            match &v[y] {
                Some(existing) => {
                    if existing.max_abs_diff(&candidate) > tol * (1.0 + existing.max_norm()) {
                        return Err(Error::InconsistentOrbit { point: y });
                    }
                }
                None => {
                    v[y] = Some(candidate);
                    queue.push_back(y);
                }
            }
        }
    }
    let v: Vec<ModuleMap> = v
        .into_iter()
        .enumerate()
        .map(|(x, vx)| vx.ok_or(Error::UncoveredPoint { point: x }))
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(n * n);
    for vx in &v {
        for vy in &v {
            values.push(vx.adjoint_times(vy)?);
        }
    }
    OperatorKernel::new(shape, m, n, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d.to_vec()).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_kernel(rows: &[&[f64]]) -> OperatorKernel {
        let s = shape(&[1]);
        OperatorKernel::from_fn(&s, 1, rows.len(), |x, y| AdjointableOp::scalar(&s, 1, c(rows[x][y]))).unwrap()
    }

    #[test]
    fn gram_block_examples() {
        let s = shape(&[2]);
        let k = OperatorKernel::from_fn(&s, 1, 1, |_, _| AdjointableOp::identity(&s, 1)).unwrap();
        assert_eq!(gram_block(&k).component(0), &linalg::identity(2));

        let k = OperatorKernel::from_fn(&s, 1, 3, |_, _| AdjointableOp::identity(&s, 1)).unwrap();
        let ones = CMat::from_element(3, 3, c(1.0));
        assert_eq!(gram_block(&k).component(0), &linalg::kron(&ones, &linalg::identity(2)));
    }

    #[test]
    fn psd_examples() {
        let s = shape(&[2, 1]);
        let id = OperatorKernel::from_fn(&s, 2, 3, |_, _| AdjointableOp::identity(&s, 2)).unwrap();
        assert!(is_positive_semidefinite(&id, 1e-10));
        let bad = scalar_kernel(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(!is_positive_semidefinite(&bad, 1e-10));
        assert!(matches!(require_psd(&bad, 1e-10), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn trivial_semigroup_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = shape(&[2]);
        let k = OperatorKernel::from_fn(&s, 1, 3, |_, _| AdjointableOp::random(&mut rng, &s, 1)).unwrap();
        let sg = StarSemigroup::trivial();
        let act = Action::trivial(&sg, 3);
        assert!(is_invariant(&k, &sg, &act, 1e-12).unwrap().passed);
    }

    #[test]
    fn two_positive_examples() {
        let pd = scalar_kernel(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let rep = two_positive_structure(&pd, 1e-10).unwrap();
        assert!(rep.degenerate.is_empty());
        assert_eq!(rep.regular, vec![0, 1]);

        let bad = scalar_kernel(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(two_positive_structure(&bad, 1e-10), Err(Error::NotTwoPositive { x: 0, y: 1 })));
    }

    #[test]
    fn krld_examples() {
        let s = shape(&[1]);
        let p = Seminorm::full(&s);
        assert_eq!(krld_constant(&AdjointableOp::identity(&s, 2), &p, 1e-12).unwrap(), 1.0);
        let d = AdjointableOp::new(
            s.clone(),
            2,
            vec![CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0), c(1.0)]))],
        )
        .unwrap();
        assert!((krld_constant(&d, &p, 1e-12).unwrap() - 3.0).abs() < 1e-12);
        let neg = AdjointableOp::scalar(&s, 1, c(-1.0));
        assert!(matches!(krld_constant(&neg, &p, 1e-12), Err(Error::NotPositive)));
    }

    #[test]
    fn mtop_examples() {
        let s = shape(&[1]);
        let p = Seminorm::full(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<_> = (0..20).map(|_| ModuleVector::random(&mut rng, &s, 2)).collect();
        let mut nil = linalg::zeros(2, 2);
        nil[(0, 1)] = c(1.0);
        let nil = AdjointableOp::new(s.clone(), 2, vec![nil]).unwrap();
        assert_eq!(nil.pow(2), AdjointableOp::zero(&s, 2));
        let w = mtop_witness(&nil, &p, 6, &samples).unwrap();
        assert!(w.max_residual <= 1e-12);

        let two = AdjointableOp::scalar(&s, 2, c(2.0));
        let w = mtop_witness(&two, &p, 6, &samples).unwrap();
        assert_eq!(w.d_p, 2.0);
        assert!(w.max_residual.abs() <= 1e-12);
    }

    #[test]
    fn scalar_schwarz_and_b2() {
        let k = scalar_kernel(&[&[2.5]]);
        let s = shape(&[1]);
        let p = Seminorm::full(&s);
        let h = ModuleVector::new(s.clone(), 1, vec![CMat::from_element(1, 1, Complex64::new(0.7, -0.2))]).unwrap();
        let (lhs, rhs) = kernel_schwarz_sides(&k, 0, &[0], std::slice::from_ref(&h), &p).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        assert!((b2_constant(&k, 0, &p, 1e-12).unwrap() - 2.5).abs() < 1e-14);
        let zero = ModuleVector::zero(&s, 1);
        let (lhs, rhs) = kernel_schwarz_sides(&k, 0, &[0], &[zero], &p).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
    }

    #[test]
    fn propagation_examples() {
        let s = shape(&[2]);
        let p = Seminorm::full(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let samples: Vec<_> = (0..50).map(|_| ModuleVector::random(&mut rng, &s, 1)).collect();
        let id = OperatorKernel::from_fn(&s, 1, 2, |_, _| AdjointableOp::identity(&s, 1)).unwrap();
        let pr = propagation_check(&id, 0, 1, &p, &samples, 1e-10).unwrap();
        assert!((pr.c - 1.0).abs() < 1e-14);
        assert!(pr.max_violation.abs() <= 1e-12 * 10.0);

        let diag = OperatorKernel::from_fn(&s, 1, 2, |x, y| {
            if x == y { AdjointableOp::scalar(&s, 1, c(2.0)) } else { AdjointableOp::zero(&s, 1) }
        })
        .unwrap();
        let pr = propagation_check(&diag, 0, 1, &p, &samples, 1e-10).unwrap();
        assert!(pr.max_violation <= 0.0);
    }

    #[test]
    fn invariant_kernel_from_trivial_rep() {
        let s = shape(&[2]);
        let sg = StarSemigroup::cyclic(3);
        let act = Action::trivial(&sg, 3);
        let rho = vec![AdjointableOp::identity(&s, 2); 3];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v0 = ModuleMap::random(&mut rng, &s, 2, 1);
        let seeds: Vec<_> = (0..3).map(|x| (x, v0.clone())).collect();
        let k = make_invariant_kernel(&sg, &act, &rho, &seeds, 1e-10).unwrap();
        let k00 = k.get(0, 0).clone();
        assert!(k.values().iter().all(|v| v.max_abs_diff(&k00).unwrap() < 1e-14));
        assert!(is_positive_semidefinite(&k, 1e-10));
    }

    #[test]
    fn conflicting_seed_is_rejected() {
        let s = shape(&[1]);
        let sg = StarSemigroup::cyclic(3);
        let act = Action::left_regular(&sg);
        let rho = vec![AdjointableOp::identity(&s, 1); 3];
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let seeds = vec![(0, ModuleMap::random(&mut rng, &s, 1, 1)), (1, ModuleMap::random(&mut rng, &s, 1, 1))];
        assert!(matches!(
            make_invariant_kernel(&sg, &act, &rho, &seeds, 1e-10),
            Err(Error::InconsistentOrbit { .. })
        ));
    }

    #[test]
    fn uncovered_point_is_rejected() {
        let s = shape(&[1]);
        let sg = StarSemigroup::trivial();
        let act = Action::trivial(&sg, 2);
        let rho = vec![AdjointableOp::identity(&s, 1)];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let seeds = vec![(0, ModuleMap::random(&mut rng, &s, 1, 1))];
        assert!(matches!(
            make_invariant_kernel(&sg, &act, &rho, &seeds, 1e-10),
            Err(Error::UncoveredPoint { point: 1 })
        ));
    }
}
