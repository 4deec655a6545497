//! Products of matrix algebras and the block-supported C*-seminorms on them.
use kernel_dilation::{AlgebraElement, AlgebraShape, Seminorm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kernel_dilation::Result<()> {
    let shape = AlgebraShape::new(vec![2, 3])?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = AlgebraElement::random(&mut rng, &shape);
    let b = AlgebraElement::random(&mut rng, &shape);
    let ab = a.multiply(&b)?;

    for p in Seminorm::all(&shape) {
        let lhs = p.eval(&ab);
        let rhs = p.eval(&a) * p.eval(&b);
        let cstar = p.eval(&a.involution().multiply(&a)?) - p.eval(&a).powi(2);
        println!("support {:?}: p(ab) = {lhs:.4} <= p(a)p(b) = {rhs:.4}, C* defect {cstar:.1e}", p.support());
    }

    // a*a is positive, so 0 <= a*a in the product order.
    let aa = a.involution().multiply(&a)?;
    println!("a*a positive: {}", aa.is_positive(1e-12));
    println!("0 <= a*a: {}", AlgebraElement::zero(&shape).leq(&aa, 1e-12)?);

    // The quotient by ker p keeps only the selected blocks.
    let p = Seminorm::for_shape(&shape, [1])?;
    let q = a.quotient_project(&p);
    println!("quotient shape {:?}, norm {:.4} = p(a) {:.4}", q.shape().dims(), q.bounded_norm(), p.eval(&a));
    Ok(())
}
