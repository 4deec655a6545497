//! Positivity, invariance and the inequality constants of a kernel.
use kernel_dilation::generators::{invariant_from_rep, random_hermitian, random_support};
use kernel_dilation::kernel::{self, b2_constant, b2_sides, is_invariant, krld_constant};
use kernel_dilation::{AlgebraShape, Seminorm, StarSemigroup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kernel_dilation::Result<()> {
    let shape = AlgebraShape::new(vec![2, 1])?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sg = StarSemigroup::symmetric3();
    let fx = invariant_from_rep(&mut rng, &sg, &shape, 2, 1e-10)?;
    let k = &fx.kernel;

    println!("psd: {}", kernel::is_positive_semidefinite(k, 1e-10));
    let inv = is_invariant(k, &sg, &fx.action, 1e-10)?;
    println!("invariant: {} (max residual {:.1e} over {} triples)", inv.passed, inv.max_residual, inv.checked);

    let p = Seminorm::full(&shape);
    for x in 0..k.points() {
        let c = b2_constant(k, x, &p, 1e-10)?;
        let mut worst = 0.0f64;
        for _ in 0..500 {
            let (ys, hs) = random_support(&mut rng, k, 4);
            let (lhs, rhs) = b2_sides(k, x, &ys, &hs, &p)?;
            if rhs > 0.0 {
                worst = worst.max(lhs / rhs);
            }
        }
        let kc = krld_constant(k.get(x, x), &p, 1e-10)?;
        println!("x = {x}: c_p(x) = {c:.4}, sampled ratio {worst:.4}, krld constant {kc:.4}");
    }

    // An indefinite Hermitian kernel is caught by the block test.
    let h = random_hermitian(&mut rng, &shape, 1, 3);
    let ext = kernel::gram_spectrum_extremes(&h);
    println!("random Hermitian kernel: psd {}, spectra {ext:?}", kernel::is_positive_semidefinite(&h, 1e-10));
    Ok(())
}
