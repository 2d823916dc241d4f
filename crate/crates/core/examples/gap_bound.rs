//! How fast h_n approaches 1: the gap bound and (1 - h_n) ln n.

use hausmeter::{c1_diagnostic, dim_gap_bound, solve_moran, build_system, FamilySpec, Method};

fn main() -> hausmeter::Result<()> {
    let spec = FamilySpec::luroth();
    for n in [5, 10, 20, 40] {
        let h = solve_moran(&build_system(&spec, n)?)?.h;
        let g = dim_gap_bound(&spec, n, h.lo)?;
        println!("n = {n:>2}  1 - h = {:.6}  bound = {:.6}", 1.0 - h.mid(), g.bound);
    }
    let report = c1_diagnostic(&spec, &[8, 16, 32, 64], Method::Moran)?;
    for row in &report.rows {
        println!("n = {:>2}  (1 - h) ln n <= {:.6}", row.n, row.product.hi);
    }
    println!("decreasing: {}", report.monotone_decreasing_trend);
    Ok(())
}
