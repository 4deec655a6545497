//! Saving kernels and linearisations as canonical JSON and checking them
//! after reload.
use kernel_dilation::generators::random_psd;
use kernel_dilation::io::{kernel_hash, load_kernel, load_linearisation, save_kernel, save_linearisation};
use kernel_dilation::linearisation::kolmogorov;
use kernel_dilation::AlgebraShape;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kernel_dilation::Result<()> {
    let dir = std::env::temp_dir().join(format!("kernel-dilation-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let shape = AlgebraShape::new(vec![2, 2])?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let k = random_psd(&mut rng, &shape, 1, 4, &[3, 2])?;
    let lin = kolmogorov(&k, 1e-10)?;

    let (kp, lp) = (dir.join("kernel.json"), dir.join("lin.json"));
    save_kernel(&kp, &k)?;
    save_linearisation(&lp, &lin, Some(&k))?;

    let k2 = load_kernel(&kp)?;
    let (lin2, hash) = load_linearisation(&lp)?;
    println!("kernel hash {}", kernel_hash(&k2));
    println!("recorded    {}", hash.unwrap_or_default());
    println!("residual before {:e}, after {:e}", lin.reconstruction_residual(&k)?, lin2.reconstruction_residual(&k2)?);
    println!("files in {}; try `dilate verify {} {}`", dir.display(), lp.display(), kp.display());
    Ok(())
}
