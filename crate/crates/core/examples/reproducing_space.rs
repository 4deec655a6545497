//! The reproducing kernel module of a psd kernel: point functions F* f.
use kernel_dilation::generators::invariant_from_rep;
use kernel_dilation::linearisation::{induce_representation, kolmogorov, KVector, ReproducingSpace};
use kernel_dilation::{gramian, AlgebraShape, ModuleVector, StarSemigroup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kernel_dilation::Result<()> {
    let shape = AlgebraShape::new(vec![2])?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sg = StarSemigroup::klein();
    let fx = invariant_from_rep(&mut rng, &sg, &shape, 1, 1e-10)?;
    let lin = kolmogorov(&fx.kernel, 1e-10)?;
    let rk = ReproducingSpace::new(&lin, &fx.kernel)?;

    let f = rk.element(&KVector::random(&mut rng, &lin))?;
    let h = ModuleVector::random(&mut rng, &shape, 1);
    for x in 0..fx.kernel.points() {
        println!(
            "x = {x}: reproducing residual {:.1e}, E_x* = k_x residual {:.1e}",
            rk.reproducing_residual(&f, x, &h)?,
            rk.evaluation_adjoint_residual(x)
        );
    }

    // <k_x h, k_y g> = [k(x, y) g, h]
    let (kx, ky) = (rk.kernel_section(0, &h)?, rk.kernel_section(2, &h)?);
    let inner = rk.inner(&ky, &kx)?;
    let direct = gramian(&h, &fx.kernel.get(0, 2).apply(&h)?)?;
    println!("section inner product defect {:.1e}", inner.max_abs_diff(&direct)?);

    let rep = induce_representation(&lin, &sg, &fx.action, 1e-8)?;
    println!("shift intertwining residual {:.1e}", rk.rho_intertwining_residual(&rep, &fx.action, &[h])?);
    Ok(())
}
