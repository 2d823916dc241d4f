//! Brackets on the Hausdorff measure of J_n as n grows.

use hausmeter::{build_system, hausdorff_estimate, solve_moran, FamilySpec};

fn main() -> hausmeter::Result<()> {
    for spec in [FamilySpec::geometric(0.5), FamilySpec::luroth()] {
        println!("{spec}");
        for n in [2, 4, 8, 16] {
            let sys = build_system(&spec, n)?;
            let h = solve_moran(&sys)?.h;
            let est = hausdorff_estimate(&sys, h, 4)?;
            let (s, t) = est.witness_interval.unwrap();
            println!(
                "  n = {n:>2}  H in [{:.6}, {:.6}]  witness [{s:.6}, {t:.6}]",
                est.h_lower, est.h_upper
            );
        }
    }
    Ok(())
}
