//! Finite *-semigroups from tables, validation, and their actions.
use kernel_dilation::generators::small_semigroups;
use kernel_dilation::semigroup::validate_action;
use kernel_dilation::{Action, StarSemigroup};

fn main() -> kernel_dilation::Result<()> {
    for (name, sg) in small_semigroups() {
        println!(
            "{name:<18} order {} unit {:?} group-with-inverse-star {}",
            sg.order(),
            sg.unit(),
            sg.is_group_with_inverse_star()
        );
    }

    // Well-formed tables still have to pass the axioms.
    let bad = StarSemigroup::new(vec![vec![0, 1], vec![1, 1]], vec![1, 0], Some(0))?;
    match bad.validate() {
        Ok(()) => println!("valid"),
        Err(v) => println!("rejected: {v}"),
    }

    // Integer window: Z_12 shifts acting partially on {0..5}.
    let (z, window) = Action::integer_window(6);
    validate_action(&z, &window)?;
    let shift = 1;
    let moved: Vec<Option<usize>> = (0..6).map(|x| window.apply(shift, x)).collect();
    println!("shift by 1 on the window: {moved:?}");
    println!("total elements: {:?}", (0..z.order()).filter(|&xi| window.is_total_for(xi)).collect::<Vec<_>>());
    Ok(())
}
