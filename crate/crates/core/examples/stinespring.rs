//! Stinespring dilation phi(b) = W* pi(b) W of completely positive maps.
use kernel_dilation::stinespring::{choi_ranks, is_completely_positive, stinespring_dilate, CPMapSpec};
use kernel_dilation::{AlgebraElement, AlgebraShape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kernel_dilation::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let domain = AlgebraShape::new(vec![2, 3])?;
    let codomain = AlgebraShape::new(vec![2])?;
    let phi = CPMapSpec::random_kraus(&mut rng, &domain, &codomain, 2, 3);
    let dil = stinespring_dilate(&phi, 1e-10)?;
    let samples: Vec<AlgebraElement> = (0..20).map(|_| AlgebraElement::random(&mut rng, &domain)).collect();
    println!("K dims {:?}", dil.dims());
    println!("phi(b) - W* pi(b) W: {:.1e}", dil.dilation_residual(&phi, &samples)?);
    println!("W* W - phi(1): {:.1e}", dil.w_residual(&phi));
    println!("multiplicities {:?} = Choi ranks {:?}", dil.multiplicities(1e-8), choi_ranks(&phi, 1e-10));

    for (name, map) in [("identity", CPMapSpec::identity(&codomain)), ("depolarizing", CPMapSpec::depolarizing(2))] {
        let d = stinespring_dilate(&map, 1e-10)?;
        println!("{name}: d = {:?}, pi unital defect {:.1e}", d.dims(), d.unital_residual());
    }

    let t = CPMapSpec::transpose(2);
    println!("transpose completely positive: {}", is_completely_positive(&t, 1e-10));
    if let Err(e) = stinespring_dilate(&t, 1e-10) {
        println!("transpose: [{}] {e}", e.kind());
    }
    Ok(())
}
