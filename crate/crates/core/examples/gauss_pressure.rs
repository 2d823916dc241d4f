//! Bounded-digit continued fractions: dimension from the transfer operator.

use hausmeter::{build_system, solve_pressure, FamilySpec};

fn main() -> hausmeter::Result<()> {
    let spec = FamilySpec::gauss();
    let limit = 6.0 / std::f64::consts::PI.powi(2);
    for n in [2, 4, 8, 16] {
        let r = solve_pressure(&build_system(&spec, n)?, 8)?;
        let h = r.h.mid();
        println!(
            "n = {n:>2}  h in [{:.8}, {:.8}]  n(1-h) = {:.5}  (limit {limit:.5})",
            r.h.lo,
            r.h.hi,
            n as f64 * (1.0 - h)
        );
    }
    Ok(())
}
