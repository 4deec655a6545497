//! Minimal Kolmogorov linearisations `k(y, x) = V(y)^* V(x)`.
//!
//! Per algebra component the Gram block `G_i` is factored as `G_i = F_i^* F_i`
//! with `F_i` of full row rank `d_i`. The module `K` is then realised per
//! component as `d_i x n_i` matrices with gramian `u^* v`, and `V(x)` is the
//! column block of `F_i` belonging to the point `x`.

use crate::algebra::{AlgebraElement, AlgebraShape, Seminorm};
use crate::error::{Error, Result};
use crate::kernel::{gram_block, is_invariant, require_psd, OperatorKernel, PointFunction};
use crate::linalg::{self, CMat};
use crate::module::{gramian, ModuleVector};
use crate::semigroup::{validate_action, Action, StarSemigroup};

#[derive(Clone, Debug, PartialEq)]
pub struct Linearisation {
    shape: AlgebraShape,
    rank: usize,
    points: usize,
    tol: f64,
    factors: Vec<CMat>,
}

impl Linearisation {
    /// Wraps precomputed factors; each must have `points * rank * n_i`
    /// columns.
    pub fn from_factors(shape: AlgebraShape, rank: usize, points: usize, tol: f64, factors: Vec<CMat>) -> Result<Self> {
        if factors.len() != shape.num_components() {
            return Err(Error::shape(format!("{} factors for {} components", factors.len(), shape.num_components())));
        }
        for (i, f) in factors.iter().enumerate() {
            let cols = points * rank * shape.dim(i);
            if f.ncols() != cols {
                return Err(Error::shape(format!("factor {i} has {} columns, expected {cols}", f.ncols())));
            }
        }
        Ok(Self { shape, rank, points, tol, factors })
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

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn factors(&self) -> &[CMat] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &CMat {
        &self.factors[i]
    }

    /// `d_i` per component.
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.nrows()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.nrows()).sum()
    }

    fn block_width(&self, i: usize) -> usize {
        self.rank * self.shape.dim(i)
    }

    /// `V(x)`, one `d_i x (m n_i)` block per component.
    pub fn v_of(&self, x: usize) -> Vec<CMat> {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let b = self.block_width(i);
                linalg::block(f, 0, x * b, f.nrows(), b)
            })
            .collect()
    }

    /// `V(x) h`.
    pub fn apply_v(&self, x: usize, h: &ModuleVector) -> Result<KVector> {
        if h.shape() != &self.shape || h.rank() != self.rank {
            return Err(Error::shape("vector does not live in the source module"));
        }
        let comps = self.v_of(x).iter().zip(h.components()).map(|(v, hc)| v * hc).collect();
        Ok(KVector { comps })
    }

    /// `V(x)^* u`.
    pub fn apply_v_adjoint(&self, x: usize, u: &KVector) -> Result<ModuleVector> {
        self.check_k(u)?;
        let comps = self.v_of(x).iter().zip(&u.comps).map(|(v, uc)| v.adjoint() * uc).collect();
        ModuleVector::new(self.shape.clone(), self.rank, comps)
    }

    fn check_k(&self, u: &KVector) -> Result<()> {
        let ok = u.comps.len() == self.factors.len()
            && u.comps.iter().enumerate().all(|(i, c)| c.shape() == (self.factors[i].nrows(), self.shape.dim(i)));
        if ok { Ok(()) } else { Err(Error::shape("vector does not live in the linearisation space")) }
    }

    /// The kernel `V(y)^* V(x)` rebuilt from the factors.
    pub fn reconstruct(&self) -> OperatorKernel {
        let vs: Vec<Vec<CMat>> = (0..self.points).map(|x| self.v_of(x)).collect();
        OperatorKernel::from_fn(&self.shape, self.rank, self.points, |x, y| {
            let comps = vs[x].iter().zip(&vs[y]).map(|(a, b)| a.adjoint() * b).collect();
            crate::module::AdjointableOp::new(self.shape.clone(), self.rank, comps).expect("consistent layout")
        })
        .expect("consistent layout")
    }

    /// `max_{x,y,i} |V(y)^* V(x) - k(y, x)|_F`.
    pub fn reconstruction_residual(&self, k: &OperatorKernel) -> Result<f64> {
        self.check_kernel(k)?;
        let rebuilt = self.reconstruct();
        let mut worst = 0.0f64;
        for x in 0..self.points {
            for y in 0..self.points {
                worst = worst.max(rebuilt.get(y, x).max_abs_diff(k.get(y, x))?);
            }
        }
        Ok(worst)
    }

    /// Smallest singular value of each factor relative to its largest; zero
    /// would mean the rows are dependent and the linearisation not minimal.
    pub fn row_independence(&self) -> Vec<f64> {
        self.factors
            .iter()
            .map(|f| {
                if f.nrows() == 0 {
                    return 1.0;
                }
                let sv = linalg::singular_values(f);
                let hi = sv.iter().copied().fold(0.0, f64::max);
                let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
                if hi > 0.0 { lo / hi } else { 0.0 }
            })
            .collect()
    }

    pub(crate) fn check_kernel(&self, k: &OperatorKernel) -> Result<()> {
        if k.shape() != &self.shape || k.rank() != self.rank || k.points() != self.points {
            return Err(Error::shape("kernel and linearisation disagree on layout"));
        }
        Ok(())
    }
}

/// An element of `K`: per component a `d_i x n_i` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct KVector {
    comps: Vec<CMat>,
}

impl KVector {
    pub fn new(comps: Vec<CMat>) -> Self {
        Self { comps }
    }

    pub fn components(&self) -> &[CMat] {
        &self.comps
    }

    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, lin: &Linearisation) -> Self {
        let comps = lin
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| linalg::random_complex(rng, f.nrows(), lin.shape.dim(i)))
            .collect();
        Self { comps }
    }

    /// `[u, v] = u^* v` per component.
    pub fn gramian(&self, other: &Self, shape: &AlgebraShape) -> Result<AlgebraElement> {
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.adjoint() * b).collect();
        AlgebraElement::new(shape.clone(), comps)
    }
}

/// Factors `G_i` by its Hermitian eigendecomposition. Eigenvalues below
/// `tol * lambda_max` are cut; a negative eigenvalue below
/// `-tol (1 + lambda_max)` is an error.
pub fn kolmogorov(k: &OperatorKernel, tol: f64) -> Result<Linearisation> {
    require_psd(k, tol)?;
    let factors = gram_block(k)
        .components()
        .iter()
        .map(|g| {
            let (vals, vecs) = linalg::hermitian_eigen(g);
            let lmax = vals.first().copied().unwrap_or(0.0);
            let keep: Vec<usize> = (0..vals.len()).filter(|&j| lmax > 0.0 && vals[j] >= tol * lmax).collect();
            let mut f = linalg::zeros(keep.len(), g.ncols());
            for (r, &j) in keep.iter().enumerate() {
                let row = vecs.column(j).adjoint() * num_complex::Complex64::from(vals[j].sqrt());
                f.set_row(r, &row);
            }
            f
        })
        .collect();
    Linearisation::from_factors(k.shape().clone(), k.rank(), k.points(), tol, factors)
}

/// Second factorisation route: complete-pivoting Cholesky, stopped once the
/// largest remaining diagonal falls below `tol` times the largest diagonal.
pub fn kolmogorov_pivoted_cholesky(k: &OperatorKernel, tol: f64) -> Result<Linearisation> {
    require_psd(k, tol)?;
    let factors = gram_block(k).components().iter().map(|g| pivoted_cholesky(g, tol)).collect();
    Linearisation::from_factors(k.shape().clone(), k.rank(), k.points(), tol, factors)
}

/// Rows `r` of the returned `F` satisfy `F^* F ~ G`.
fn pivoted_cholesky(g: &CMat, tol: f64) -> CMat {
    let n = g.nrows();
    let mut a = linalg::hermitian_part(g);
    let max_diag = (0..n).map(|j| a[(j, j)].re).fold(0.0, f64::max);
    let mut rows: Vec<Vec<num_complex::Complex64>> = Vec::new();
    let mut done = vec![false; n];
    while let Some(p) = (0..n).filter(|&j| !done[j]).max_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re)) {
        let piv = a[(p, p)].re;
        if max_diag <= 0.0 || piv <= tol * max_diag {
            break;
        }
        let s = piv.sqrt();
        // Row of F: column p of the current Schur complement scaled by 1/s.
        let row: Vec<_> = (0..n).map(|j| if done[j] { linalg::ZERO } else { a[(p, j)] / s }).collect();
        for i in 0..n {
            if done[i] {
                continue;
            }
            for j in 0..n {
                if !done[j] {
                    a[(i, j)] -= row[i].conj() * row[j];
                }
            }
        }
        done[p] = true;
        rows.push(row);
    }
    let mut f = linalg::zeros(rows.len(), n);
    for (r, row) in rows.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            f[(r, j)] = *z;
        }
    }
    f
}

/// `pi(xi)` per semigroup element and component, each `d_i x d_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    ops: Vec<Vec<CMat>>,
}

impl Representation {
    pub fn new(ops: Vec<Vec<CMat>>) -> Self {
        Self { ops }
    }

    pub fn order(&self) -> usize {
        self.ops.len()
    }

    pub fn get(&self, xi: usize) -> &[CMat] {
        &self.ops[xi]
    }

    pub fn ops(&self) -> &[Vec<CMat>] {
        &self.ops
    }

    pub fn num_components(&self) -> usize {
        self.ops.first().map_or(0, Vec::len)
    }

    /// Largest spectral norm of `pi(xi)_i` over `i` in the support of `p`.
    pub fn norm(&self, xi: usize, p: &Seminorm) -> f64 {
        p.max_over(|i| linalg::spectral_norm(&self.ops[xi][i]))
    }

    /// Restriction to the components in the support of `p`.
    pub fn restrict(&self, p: &Seminorm) -> Self {
        let ops = self.ops.iter().map(|row| p.support().iter().map(|&i| row[i].clone()).collect()).collect();
        Self { ops }
    }
}

fn max_spectral(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| linalg::spectral_norm(&(x - y))).fold(0.0, f64::max)
}

/// Column relocation: column block `x` of the result is column block
/// `xi . x` of `f`.
fn relocate(f: &CMat, act: &Action, xi: usize, width: usize) -> CMat {
    let mut out = linalg::zeros(f.nrows(), f.ncols());
    for x in 0..act.points() {
        let y = act.apply(xi, x).expect("total element");
        let src = linalg::block(f, 0, y * width, f.nrows(), width);
        linalg::set_block(&mut out, 0, x * width, &src);
    }
    out
}

/// `pi(xi) = F T(xi) F^+`, defined because the kernel is invariant.
///
/// The map is well defined on `K` only if `F T(xi)` vanishes on `ker F`; the
/// residual `|F T(xi) (I - F^+ F)|` must stay below `tol |F|`, and `pi(xi*)`
/// must agree with `pi(xi)^*`. Either failure means the kernel is not
/// invariant, and the offending triple is located on the reconstructed
/// kernel.
pub fn induce_representation(lin: &Linearisation, sg: &StarSemigroup, act: &Action, tol: f64) -> Result<Representation> {
    validate_action(sg, act)?;
    if act.points() != lin.points {
        return Err(Error::Dimension(format!("action on {} points, linearisation on {}", act.points(), lin.points)));
    }
    if let Some(xi) = (0..sg.order()).find(|&xi| !act.is_total_for(xi)) {
        return Err(Error::PartialAction { xi });
    }
    let pinvs: Vec<CMat> = lin.factors.iter().map(linalg::pinv).collect();
    let mut ops = Vec::with_capacity(sg.order());
    let mut worst = 0.0f64;
    for xi in 0..sg.order() {
        let mut row = Vec::with_capacity(lin.factors.len());
        for (i, f) in lin.factors.iter().enumerate() {
            let ft = relocate(f, act, xi, lin.block_width(i));
            let proj = linalg::identity(f.ncols()) - &pinvs[i] * f;
            let consistency = linalg::spectral_norm(&(&ft * proj));
            worst = worst.max(consistency / linalg::spectral_norm(f).max(f64::MIN_POSITIVE));
            row.push(ft * &pinvs[i]);
        }
        ops.push(row);
    }
    let scale = ops.iter().flatten().map(linalg::spectral_norm).fold(1.0, f64::max);
    for xi in 0..sg.order() {
        let adj: Vec<CMat> = ops[xi].iter().map(|m| m.adjoint()).collect();
        worst = worst.max(max_spectral(&ops[sg.star(xi)], &adj) / scale);
    }
    if worst > tol {
        let scan = is_invariant(&lin.reconstruct(), sg, act, tol)?;
        return Err(Error::NonInvariantKernel { triple: scan.violation, residual: worst });
    }
    Ok(Representation { ops })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarRepReport {
    pub multiplicative_residual: f64,
    pub adjoint_residual: f64,
    /// Pair `(xi, eta)` with the largest multiplicativity residual.
    pub worst_pair: (usize, usize),
    /// Element with the largest adjoint residual.
    pub worst_adjoint: usize,
    pub passed: bool,
}

/// `max |pi(xi eta) - pi(xi) pi(eta)|` and `max |pi(xi*) - pi(xi)^*|`.
pub fn verify_star_rep(rep: &Representation, sg: &StarSemigroup, tol: f64) -> Result<StarRepReport> {
    if rep.order() != sg.order() {
        return Err(Error::Dimension(format!("representation of order {} for semigroup of order {}", rep.order(), sg.order())));
    }
    let mut out = StarRepReport {
        multiplicative_residual: 0.0,
        adjoint_residual: 0.0,
        worst_pair: (0, 0),
        worst_adjoint: 0,
        passed: true,
    };
    for xi in 0..sg.order() {
        for eta in 0..sg.order() {
            let prod: Vec<CMat> = rep.ops[xi].iter().zip(&rep.ops[eta]).map(|(a, b)| a * b).collect();
            let r = max_spectral(&rep.ops[sg.mul(xi, eta)], &prod);
            if r > out.multiplicative_residual {
                out.multiplicative_residual = r;
                out.worst_pair = (xi, eta);
            }
        }
        let adj: Vec<CMat> = rep.ops[xi].iter().map(|m| m.adjoint()).collect();
        let r = max_spectral(&rep.ops[sg.star(xi)], &adj);
        if r > out.adjoint_residual {
            out.adjoint_residual = r;
            out.worst_adjoint = xi;
        }
    }
    out.passed = out.multiplicative_residual <= tol && out.adjoint_residual <= tol;
    Ok(out)
}

/// `max_{xi,x} |pi(xi) V(x) - V(xi . x)|_F / max(1, |F|)` over elements
/// that act totally.
pub fn intertwining_residual(lin: &Linearisation, rep: &Representation, act: &Action) -> f64 {
    let scale = lin.factors.iter().map(linalg::spectral_norm).fold(1.0, f64::max);
    let mut worst = 0.0f64;
    for xi in 0..rep.order() {
        for x in 0..lin.points {
            let Some(y) = act.apply(xi, x) else { continue };
            let vx = lin.v_of(x);
            let vy = lin.v_of(y);
            for i in 0..vx.len() {
                worst = worst.max(linalg::frobenius(&(&rep.ops[xi][i] * &vx[i] - &vy[i])));
            }
        }
    }
    worst / scale
}

/// The tight (b1) constant `c_p(xi) = (max_{i in J} |pi(xi)_i|)^2`.
pub fn b1_constant_exact(rep: &Representation, xi: usize, p: &Seminorm) -> f64 {
    rep.norm(xi, p).powi(2)
}

/// Both sides of the shifted Gram inequality without the constant:
/// `(p(sum [k(xi.x_i, xi.x_j) h_j, h_i]), p(sum [k(x_i, x_j) h_j, h_i]))`.
pub fn b1_sides(
    k: &OperatorKernel,
    act: &Action,
    xi: usize,
    points: &[usize],
    hs: &[ModuleVector],
    p: &Seminorm,
) -> Result<(f64, f64)> {
    let moved: Vec<usize> = points
        .iter()
        .map(|&x| act.apply(xi, x).ok_or(Error::PartialAction { xi }))
        .collect::<Result<_>>()?;
    let lhs = crate::kernel::quadratic_form(k, &moved, hs)?;
    let rhs = crate::kernel::quadratic_form(k, points, hs)?;
    Ok((p.eval(&lhs), p.eval(&rhs)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equivalence {
    /// `U_i = F'_i F_i^+`.
    pub unitary: Vec<CMat>,
    pub isometry_residual: f64,
    pub coisometry_residual: f64,
    pub intertwining_residual: f64,
    pub representation_residual: Option<f64>,
}

/// The unitary `U` with `U V(x) = V'(x)`, and `U pi(xi) = pi'(xi) U` when
/// both representations are supplied.
pub fn unitary_equivalence(
    a: &Linearisation,
    b: &Linearisation,
    reps: Option<(&Representation, &Representation)>,
    tol: f64,
) -> Result<Equivalence> {
    if a.shape != b.shape || a.rank != b.rank || a.points != b.points {
        return Err(Error::NotEquivalent("linearisations of kernels with different layouts".into()));
    }
    if a.dims() != b.dims() {
        return Err(Error::NotEquivalent(format!("dimensions {:?} vs {:?}", a.dims(), b.dims())));
    }
    let unitary: Vec<CMat> = a.factors.iter().zip(&b.factors).map(|(fa, fb)| fb * linalg::pinv(fa)).collect();
    let mut out = Equivalence {
        isometry_residual: 0.0,
        coisometry_residual: 0.0,
        intertwining_residual: 0.0,
        representation_residual: None,
        unitary,
    };
    for (i, u) in out.unitary.iter().enumerate() {
        let d = u.nrows();
        out.isometry_residual = out.isometry_residual.max(linalg::spectral_norm(&(u.adjoint() * u - linalg::identity(d))));
        out.coisometry_residual = out.coisometry_residual.max(linalg::spectral_norm(&(u * u.adjoint() - linalg::identity(d))));
        let fb = &b.factors[i];
        let r = linalg::spectral_norm(&(u * &a.factors[i] - fb)) / linalg::spectral_norm(fb).max(1.0);
        out.intertwining_residual = out.intertwining_residual.max(r);
    }
    if let Some((ra, rb)) = reps {
        let mut worst = 0.0f64;
        for xi in 0..ra.order().min(rb.order()) {
            for (i, u) in out.unitary.iter().enumerate() {
                worst = worst.max(linalg::spectral_norm(&(u * &ra.ops[xi][i] - &rb.ops[xi][i] * u)));
            }
        }
        out.representation_residual = Some(worst);
    }
    let worst = out
        .isometry_residual
        .max(out.coisometry_residual)
        .max(out.intertwining_residual)
        .max(out.representation_residual.unwrap_or(0.0));
    if worst > tol {
        return Err(Error::NotEquivalent(format!("residual {worst:e} exceeds {tol:e}")));
    }
    Ok(out)
}

/// The space `R = {V(.)^* f : f in K}` of `H`-valued functions on `X`.
///
/// An element is stored as a [`PointFunction`]; its stacked component `i`
/// equals `F_i^* f_i`. The inner product is transported from `K`.
#[derive(Clone, Debug)]
pub struct ReproducingSpace {
    lin: Linearisation,
    kernel: OperatorKernel,
    pinvs: Vec<CMat>,
}

impl ReproducingSpace {
    pub fn new(lin: &Linearisation, k: &OperatorKernel) -> Result<Self> {
        lin.check_kernel(k)?;
        let pinvs = lin.factors.iter().map(linalg::pinv).collect();
        Ok(Self { lin: lin.clone(), kernel: k.clone(), pinvs })
    }

    /// `x -> V(x)^* f`.
    pub fn element(&self, f: &KVector) -> Result<PointFunction> {
        self.lin.check_k(f)?;
        let comps: Vec<CMat> = self.lin.factors.iter().zip(&f.comps).map(|(fa, c)| fa.adjoint() * c).collect();
        PointFunction::from_stacked(&self.lin.shape, self.lin.rank, &comps)
    }

    /// The unique `f in K` with `V(.)^* f = g`, or the least-squares one if
    /// `g` is outside `R`.
    pub fn coefficients(&self, g: &PointFunction) -> KVector {
        let comps = self.pinvs.iter().enumerate().map(|(i, p)| p.adjoint() * g.stacked(i)).collect();
        KVector { comps }
    }

    /// `k_x h = k(., x) h`.
    pub fn kernel_section(&self, x: usize, h: &ModuleVector) -> Result<PointFunction> {
        let values = (0..self.lin.points).map(|y| self.kernel.get(y, x).apply(h)).collect::<Result<_>>()?;
        PointFunction::new(values)
    }

    /// `[f, g]_R = [f~, g~]_K` with `f~`, `g~` the coefficient vectors.
    pub fn inner(&self, f: &PointFunction, g: &PointFunction) -> Result<AlgebraElement> {
        self.coefficients(f).gramian(&self.coefficients(g), &self.lin.shape)
    }

    /// Distance of `g` from `R`, `max_i |(I - F_i^* F_i^{+*}) g_i|_F`.
    pub fn range_residual(&self, g: &PointFunction) -> f64 {
        self.lin
            .factors
            .iter()
            .zip(&self.pinvs)
            .enumerate()
            .map(|(i, (f, p))| {
                let gi = g.stacked(i);
                linalg::frobenius(&(&gi - f.adjoint() * (p.adjoint() * &gi)))
            })
            .fold(0.0, f64::max)
    }

    /// `|[f(x), h]_H - [f, k_x h]_R|`.
    pub fn reproducing_residual(&self, f: &PointFunction, x: usize, h: &ModuleVector) -> Result<f64> {
        let lhs = gramian(f.at(x), h)?;
        let rhs = self.inner(f, &self.kernel_section(x, h)?)?;
        lhs.max_abs_diff(&rhs)
    }

    /// `max_i |F_i^* V(x)_i - G_i[:, x]|_F`: the evaluation adjoint
    /// `E_x^* h = V(.)^* V(x) h` agrees with `k_x h` for every `h`.
    pub fn evaluation_adjoint_residual(&self, x: usize) -> f64 {
        let gram = gram_block(&self.kernel);
        self.lin
            .v_of(x)
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let f = &self.lin.factors[i];
                let g = gram.component(i);
                let b = self.lin.block_width(i);
                linalg::frobenius(&(f.adjoint() * v - linalg::block(g, 0, x * b, g.nrows(), b)))
            })
            .fold(0.0, f64::max)
    }

    /// `rho(xi) = F^* pi(xi) F^{+*}` applied to a function.
    pub fn shift(&self, rep: &Representation, xi: usize, g: &PointFunction) -> Result<PointFunction> {
        let coeff = self.coefficients(g);
        let moved = KVector { comps: rep.ops[xi].iter().zip(&coeff.comps).map(|(p, c)| p * c).collect() };
        self.element(&moved)
    }

    /// `max |rho(xi) k_x h - k_{xi.x} h|` over total `xi`, all `x` and the
    /// given vectors.
    pub fn rho_intertwining_residual(&self, rep: &Representation, act: &Action, hs: &[ModuleVector]) -> Result<f64> {
        let mut worst = 0.0f64;
        for xi in 0..rep.order() {
            for x in 0..self.lin.points {
                let Some(y) = act.apply(xi, x) else { continue };
                for h in hs {
                    let lhs = self.shift(rep, xi, &self.kernel_section(x, h)?)?;
                    let rhs = self.kernel_section(y, h)?;
                    for (a, b) in lhs.values().iter().zip(rhs.values()) {
                        worst = worst.max(a.sub(b)?.components().iter().map(linalg::frobenius).fold(0.0, f64::max));
                    }
                }
            }
        }
        Ok(worst)
    }

    pub fn linearisation(&self) -> &Linearisation {
        &self.lin
    }

    pub fn kernel(&self) -> &OperatorKernel {
        &self.kernel
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::AdjointableOp;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_kernel(rows: &[Vec<f64>]) -> OperatorKernel {
        let s = AlgebraShape::new(vec![1]).unwrap();
        OperatorKernel::from_fn(&s, 1, rows.len(), |x, y| AdjointableOp::scalar(&s, 1, c(rows[x][y]))).unwrap()
    }

    #[test]
    fn square_root_of_scalar() {
        let k = scalar_kernel(&[vec![4.0]]);
        let lin = kolmogorov(&k, 1e-10).unwrap();
        assert_eq!(lin.dims(), vec![1]);
        assert!((lin.v_of(0)[0][(0, 0)] - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn all_ones_has_rank_one() {
        let k = scalar_kernel(&vec![vec![1.0; 3]; 3]);
        let lin = kolmogorov(&k, 1e-10).unwrap();
        assert_eq!(lin.dims(), vec![1]);
        for x in 0..3 {
            assert!((lin.v_of(x)[0][(0, 0)] - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn kms_is_nonsingular() {
        let a: f64 = 0.5;
        let n = 5;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a.powi((i as i32 - j as i32).abs())).collect()).collect();
        let k = scalar_kernel(&rows);
        // det = (1 - a^2)^(n-1)
        let det = (1.0 - a * a).powi(n as i32 - 1);
        assert!(det > 0.0);
        let lin = kolmogorov(&k, 1e-10).unwrap();
        assert_eq!(lin.dims(), vec![n]);
        assert!(lin.reconstruction_residual(&k).unwrap() < 1e-12);
    }

    #[test]
    fn not_psd_is_rejected() {
        let k = scalar_kernel(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(kolmogorov(&k, 1e-10), Err(Error::NotPsd { .. })));
        assert!(matches!(kolmogorov_pivoted_cholesky(&k, 1e-10), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn zero_kernel_is_degenerate() {
        let k = scalar_kernel(&[vec![0.0; 2], vec![0.0; 2]]);
        let lin = kolmogorov(&k, 1e-10).unwrap();
        assert_eq!(lin.dims(), vec![0]);
        let sg = StarSemigroup::cyclic(2);
        let act = Action::left_regular(&sg);
        let rep = induce_representation(&lin, &sg, &act, 1e-8).unwrap();
        assert!(verify_star_rep(&rep, &sg, 1e-8).unwrap().passed);
    }

    #[test]
    fn two_routes_are_equivalent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let v: Vec<_> = (0..4).map(|_| crate::module::ModuleMap::random(&mut rng, &s, 1, 2)).collect();
        let k = OperatorKernel::from_fn(&s, 2, 4, |x, y| v[x].adjoint_times(&v[y]).unwrap()).unwrap();
        let a = kolmogorov(&k, 1e-10).unwrap();
        let b = kolmogorov_pivoted_cholesky(&k, 1e-10).unwrap();
        assert_eq!(a.dims(), b.dims());
        assert_eq!(a.dims(), vec![2, 1]);
        let eq = unitary_equivalence(&a, &b, None, 1e-8).unwrap();
        assert!(eq.isometry_residual < 1e-8);
        let self_eq = unitary_equivalence(&a, &a, None, 1e-8).unwrap();
        for u in &self_eq.unitary {
            assert!(linalg::spectral_norm(&(u - linalg::identity(u.nrows()))) < 1e-8);
        }
        let doubled = kolmogorov(&k.scale(c(2.0)), 1e-10).unwrap();
        assert!(matches!(unitary_equivalence(&a, &doubled, None, 1e-8), Err(Error::NotEquivalent(_))));
    }

    #[test]
    fn circulant_gives_unitary_shift() {
        let q = 5;
        let f = [3.0, 1.0, 0.5, 0.5, 1.0];
        let rows: Vec<Vec<f64>> = (0..q).map(|m| (0..q).map(|n| f[(n + q - m) % q]).collect()).collect();
        let k = scalar_kernel(&rows);
        let sg = StarSemigroup::cyclic(q);
        let act = Action::left_regular(&sg);
        assert!(is_invariant(&k, &sg, &act, 1e-12).unwrap().passed);
        let lin = kolmogorov(&k, 1e-10).unwrap();
        let rep = induce_representation(&lin, &sg, &act, 1e-8).unwrap();
        let u = &rep.get(1)[0];
        assert!(linalg::spectral_norm(&(u.adjoint() * u - linalg::identity(u.nrows()))) < 1e-8);
        assert!(intertwining_residual(&lin, &rep, &act) < 1e-8);
        let p = Seminorm::full(k.shape());
        assert!((b1_constant_exact(&rep, 1, &p) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn trivial_semigroup_constant_is_one() {
        let k = scalar_kernel(&[vec![2.0]]);
        let sg = StarSemigroup::trivial();
        let rep = induce_representation(&kolmogorov(&k, 1e-10).unwrap(), &sg, &Action::left_regular(&sg), 1e-8).unwrap();
        assert!((b1_constant_exact(&rep, 0, &Seminorm::full(k.shape())) - 1.0).abs() < 1e-12);
    }

    // pi(xi) is a partial isometry for every element of a finite
    // *-semigroup (pi(xi)^*pi(xi) is a projection once some power is
    // idempotent), so the constants are 0 or 1 even on the shift monoid.
    #[test]
    fn shift_monoid_constants_bound_the_ratios() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sg = StarSemigroup::saturating_shift(4);
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let fx = crate::generators::invariant_from_rep(&mut rng, &sg, &shape, 1, 1e-10).unwrap();
        let lin = kolmogorov(&fx.kernel, 1e-10).unwrap();
        let rep = induce_representation(&lin, &sg, &fx.action, 1e-8).unwrap();
        let p = Seminorm::full(&shape);
        for xi in 0..sg.order() {
            let c = b1_constant_exact(&rep, xi, &p);
            assert!(c.abs() < 1e-8 || (c - 1.0).abs() < 1e-8, "xi = {xi}: {c}");
            for _ in 0..200 {
                let (pts, hs) = crate::generators::random_support(&mut rng, &fx.kernel, 4);
                let (lhs, rhs) = b1_sides(&fx.kernel, &fx.action, xi, &pts, &hs, &p).unwrap();
                assert!(lhs <= (c + 1e-8) * rhs + 1e-12);
            }
        }
    }

    #[test]
    fn perturbed_kernel_is_not_invariant() {
        let q = 4;
        let f = [3.0, 1.0, 0.5, 1.0];
        let mut rows: Vec<Vec<f64>> = (0..q).map(|m| (0..q).map(|n| f[(n + q - m) % q]).collect()).collect();
        rows[0][1] += 0.3;
        rows[1][0] += 0.3;
        let k = scalar_kernel(&rows);
        let sg = StarSemigroup::cyclic(q);
        let act = Action::left_regular(&sg);
        let lin = kolmogorov(&k, 1e-10).unwrap();
        match induce_representation(&lin, &sg, &act, 1e-8) {
            Err(Error::NonInvariantKernel { triple: Some(_), .. }) => {}
            other => panic!("expected NonInvariantKernel, got {other:?}"),
        }
    }

    #[test]
    fn partial_action_is_an_error() {
        let (sg, act) = Action::integer_window(3);
        let rows: Vec<Vec<f64>> = (0..3i32).map(|i| (0..3i32).map(|j| 0.5f64.powi((i - j).abs())).collect()).collect();
        let k = scalar_kernel(&rows);
        assert!(is_invariant(&k, &sg, &act, 1e-12).unwrap().passed);
        let lin = kolmogorov(&k, 1e-10).unwrap();
        assert!(matches!(induce_representation(&lin, &sg, &act, 1e-8), Err(Error::PartialAction { .. })));
    }

    #[test]
    fn corrupted_representation_is_reported() {
        let sg = StarSemigroup::cyclic(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = linalg::random_unitary(&mut rng, 2);
        let root = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![root, root * root]));
        let u = &w * d * w.adjoint();
        let ops = vec![vec![linalg::identity(2)], vec![u.clone()], vec![&u * &u]];
        let rep = Representation::new(ops.clone());
        assert!(verify_star_rep(&rep, &sg, 1e-8).unwrap().passed);
        let mut bad = ops;
        bad[2][0][(0, 0)] += c(0.1);
        let report = verify_star_rep(&Representation::new(bad), &sg, 1e-8).unwrap();
        assert!(!report.passed);
        assert!(report.worst_pair.0 == 2 || report.worst_pair.1 == 2 || sg.mul(report.worst_pair.0, report.worst_pair.1) == 2);
    }

    #[test]
    fn reproducing_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let v: Vec<_> = (0..3).map(|_| crate::module::ModuleMap::random(&mut rng, &s, 2, 1)).collect();
        let k = OperatorKernel::from_fn(&s, 1, 3, |x, y| v[x].adjoint_times(&v[y]).unwrap()).unwrap();
        let lin = kolmogorov(&k, 1e-10).unwrap();
        let rk = ReproducingSpace::new(&lin, &k).unwrap();
        for _ in 0..20 {
            let f = rk.element(&KVector::random(&mut rng, &lin)).unwrap();
            let h = ModuleVector::random(&mut rng, &s, 1);
            for x in 0..3 {
                assert!(rk.reproducing_residual(&f, x, &h).unwrap() < 1e-10);
                assert!(rk.range_residual(&rk.kernel_section(x, &h).unwrap()) < 1e-10);
            }
        }
        for x in 0..3 {
            assert!(rk.evaluation_adjoint_residual(x) < 1e-10);
        }
    }

    #[test]
    fn all_ones_space_is_constants() {
        let k = scalar_kernel(&vec![vec![1.0; 3]; 3]);
        let lin = kolmogorov(&k, 1e-10).unwrap();
        let rk = ReproducingSpace::new(&lin, &k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = rk.element(&KVector::random(&mut rng, &lin)).unwrap();
        let v0 = f.at(0).component(0)[(0, 0)];
        assert!(f.values().iter().all(|v| (v.component(0)[(0, 0)] - v0).norm() < 1e-12));
    }
}
