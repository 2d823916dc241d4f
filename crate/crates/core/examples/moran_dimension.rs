//! Dimension of truncated linear systems from the Moran equation.

use hausmeter::{build_system, solve_moran, FamilySpec};

fn main() -> hausmeter::Result<()> {
    let families = [FamilySpec::geometric(0.5), FamilySpec::luroth(), FamilySpec::power(2.0)];
    for spec in &families {
        println!("{spec}");
        for n in [2, 4, 8, 16, 32, 64] {
            let r = solve_moran(&build_system(spec, n)?)?;
            println!("  n = {n:>2}  h in [{:.12}, {:.12}]  ({} bisections)", r.h.lo, r.h.hi, r.iterations);
        }
    }
    // n = 2 with q = 1/2 gives log2 of the golden ratio.
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    println!("log2(golden ratio) = {:.12}", golden.log2());
    Ok(())
}
