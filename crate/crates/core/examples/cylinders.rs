//! Cylinders of a generation and the cover sum at the dimension.

use hausmeter::ifs::word_count;
use hausmeter::{build_system, cover_sum, enumerate_generation, solve_moran, FamilySpec};

fn main() -> hausmeter::Result<()> {
    let sys = build_system(&FamilySpec::luroth(), 3)?;
    let h = solve_moran(&sys)?.h.mid();
    for c in enumerate_generation(&sys, 2)? {
        println!("{:?}  [{:.6}, {:.6}]  |F|^h = {:.6}", c.word.letters(), c.left, c.right, c.length.powf(h));
    }
    for l in 1..=6 {
        println!("l = {l}: {:>4} cylinders, sum |F|^h = {:.15}", word_count(3, l), cover_sum(&sys, h, l)?);
    }
    Ok(())
}
