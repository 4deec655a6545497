//! Continuity constants of a CP map per seminorm, and the approximate-unit
//! strictness check.
use kernel_dilation::stinespring::{
    continuity_constants, representation_quotient, stinespring_dilate, strictness_check, ApproximateUnitNet, CPMapSpec,
};
use kernel_dilation::{AlgebraShape, ModuleVector, Seminorm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kernel_dilation::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let domain = AlgebraShape::new(vec![2])?;
    let codomain = AlgebraShape::new(vec![2, 1])?;
    let phi = CPMapSpec::random_kraus(&mut rng, &domain, &codomain, 1, 2);
    let dil = stinespring_dilate(&phi, 1e-10)?;

    for p in Seminorm::all(&codomain) {
        let cc = continuity_constants(&phi, &p, 1e-10);
        let q = representation_quotient(&dil, &p)?;
        println!("p = {:?}: d_p = {:.4} (exact {}), quotient pi d_p = {:.4}", p.support(), cc.d_p, cc.exact, q.d_p);
    }
    let t = CPMapSpec::transpose(2);
    let cc = continuity_constants(&t, &Seminorm::full(t.codomain()), 1e-10);
    println!("transpose: bound {:.4} (exact {})", cc.d_p, cc.exact);

    let net = ApproximateUnitNet::scalar_staircase(&domain, &[0.5, 0.75, 1.0, 1.0], 1e-12)?;
    let hs: Vec<ModuleVector> = (0..10).map(|_| ModuleVector::random(&mut rng, &codomain, 1)).collect();
    let r = strictness_check(&phi, &net, &Seminorm::full(&codomain), &hs, 1e-12)?;
    println!("gaps {:?}, tail index {} ({})", r.gaps, r.tail_index, r.note);
    Ok(())
}
