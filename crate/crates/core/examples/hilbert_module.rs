//! The free module A^m, its algebra-valued gramian and adjointable operators.
use kernel_dilation::module::vector_seminorm;
use kernel_dilation::{gramian, AdjointableOp, AlgebraElement, AlgebraShape, ModuleVector, Seminorm};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kernel_dilation::Result<()> {
    let shape = AlgebraShape::new(vec![2, 1])?;
    let m = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = ModuleVector::random(&mut rng, &shape, m);
    let g = ModuleVector::random(&mut rng, &shape, m);
    let a = AlgebraElement::random(&mut rng, &shape);

    // [h, g a] = [h, g] a
    let lhs = gramian(&h, &g.right_mul(&a)?)?;
    let rhs = gramian(&h, &g)?.multiply(&a)?;
    println!("right linearity defect {:.1e}", lhs.max_abs_diff(&rhs)?);

    // Schwarz: p([h,g]) <= p([h,h])^1/2 p([g,g])^1/2
    let p = Seminorm::full(&shape);
    let l = p.eval(&gramian(&h, &g)?);
    let r = vector_seminorm(&h, &p) * vector_seminorm(&g, &p);
    println!("schwarz {l:.4} <= {r:.4}");

    // [T h, g] = [h, T* g]
    let t = AdjointableOp::random(&mut rng, &shape, m);
    let left = gramian(&t.apply(&h)?, &g)?;
    let right = gramian(&h, &t.adjoint().apply(&g)?)?;
    println!("adjoint defect {:.1e}", left.max_abs_diff(&right)?);

    let s = AdjointableOp::random_positive(&mut rng, &shape, m);
    println!("T*T + S positive: {}", t.adjoint().compose(&t)?.add(&s)?.is_positive(1e-10));
    println!("|2i T| = {:.4} = 2|T| = {:.4}", t.scale(Complex64::new(0.0, 2.0)).seminorm(&p), 2.0 * t.seminorm(&p));
    Ok(())
}
