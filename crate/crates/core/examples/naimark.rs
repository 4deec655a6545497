//! Induced *-representations: a circulant kernel on Z_q, the KMS kernel on a
//! window of Z, and a non-invariant kernel that is refused.
use kernel_dilation::generators::{circulant, kms};
use kernel_dilation::kernel::is_invariant;
use kernel_dilation::linalg;
use kernel_dilation::linearisation::{b1_constant_exact, induce_representation, kolmogorov, verify_star_rep};
use kernel_dilation::{Action, AdjointableOp, AlgebraShape, Seminorm, StarSemigroup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kernel_dilation::Result<()> {
    let scalar = AlgebraShape::new(vec![1])?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let q = 6;
    let sg = StarSemigroup::cyclic(q);
    let act = Action::left_regular(&sg);
    let k = circulant(&mut rng, &scalar, 1, q);
    let lin = kolmogorov(&k, 1e-10)?;
    let rep = induce_representation(&lin, &sg, &act, 1e-8)?;
    let report = verify_star_rep(&rep, &sg, 1e-8)?;
    let u = &rep.get(1)[0];
    let defect = linalg::spectral_norm(&(u.adjoint() * u - linalg::identity(u.nrows())));
    println!("Z_{q}: d = {}, *-rep residuals {:.1e}/{:.1e}", lin.total_dim(), report.multiplicative_residual, report.adjoint_residual);
    println!("pi(1) unitary defect {defect:.1e}, b1 constant {:.6}", b1_constant_exact(&rep, 1, &Seminorm::full(&scalar)));

    let (z, window) = Action::integer_window(6);
    let kw = kms(&scalar, 1, 6, 0.5);
    println!("KMS window: invariant {}, d = {}", is_invariant(&kw, &z, &window, 1e-10)?.passed, kolmogorov(&kw, 1e-10)?.total_dim());
    match induce_representation(&kolmogorov(&kw, 1e-10)?, &z, &window, 1e-8) {
        Ok(_) => println!("window representation built"),
        Err(e) => println!("window shift: {e}"),
    }

    // Adding a psd bump on {0, 1} keeps positivity but breaks invariance.
    let mut bad = k.clone();
    let bump = AdjointableOp::scalar(&scalar, 1, 0.1.into());
    for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let v = bad.get(x, y).add(&bump)?;
        bad.set(x, y, v)?;
    }
    match induce_representation(&kolmogorov(&bad, 1e-10)?, &sg, &act, 1e-8) {
        Ok(_) => println!("perturbed kernel unexpectedly induced a representation"),
        Err(e) => println!("perturbed: [{}] {e}", e.kind()),
    }
    Ok(())
}
