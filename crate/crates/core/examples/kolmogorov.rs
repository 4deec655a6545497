//! Minimal Kolmogorov linearisation k(x, y) = V(x)* V(y) by two routes.
use kernel_dilation::generators::random_psd;
use kernel_dilation::linearisation::{kolmogorov, kolmogorov_pivoted_cholesky, unitary_equivalence};
use kernel_dilation::AlgebraShape;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kernel_dilation::Result<()> {
    let shape = AlgebraShape::new(vec![3, 2])?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = random_psd(&mut rng, &shape, 2, 5, &[4, 3])?;

    let lin = kolmogorov(&k, 1e-10)?;
    println!("dims {:?}, reconstruction residual {:.1e}", lin.dims(), lin.reconstruction_residual(&k)?);
    println!("row independence (smallest over largest singular value) {:?}", lin.row_independence());

    let chol = kolmogorov_pivoted_cholesky(&k, 1e-10)?;
    println!("cholesky dims {:?}, residual {:.1e}", chol.dims(), chol.reconstruction_residual(&k)?);

    let eq = unitary_equivalence(&lin, &chol, None, 1e-8)?;
    println!(
        "U V(x) = V'(x): isometry {:.1e}, coisometry {:.1e}, intertwining {:.1e}",
        eq.isometry_residual, eq.coisometry_residual, eq.intertwining_residual
    );

    // Doubling the kernel breaks equivalence.
    let doubled = kolmogorov(&k.scale(2.0.into()), 1e-10)?;
    match unitary_equivalence(&lin, &doubled, None, 1e-8) {
        Ok(_) => println!("unexpectedly equivalent"),
        Err(e) => println!("k vs 2k: {e}"),
    }
    Ok(())
}
