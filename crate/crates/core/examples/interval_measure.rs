//! Conformal measure and density of intervals.

use hausmeter::{build_system, density, interval_measure, solve_moran, FamilySpec, MeasureQuery};

fn main() -> hausmeter::Result<()> {
    let sys = build_system(&FamilySpec::geometric(0.5), 2)?;
    let h = solve_moran(&sys)?.h;
    for (s, t) in [(0.0, 0.5), (0.25, 1.0), (2.0 / 7.0, 6.0 / 7.0), (0.1, 0.3)] {
        let q = MeasureQuery::new(&sys, h, s, t, 1e-12);
        let m = interval_measure(&q)?;
        let d = density(&q)?;
        println!(
            "[{s:.4}, {t:.4}]  m = {:.10} (±{:.1e})  density = {:.10}  {:?}",
            m.mid(),
            m.width() / 2.0,
            d.density.mid(),
            d.family
        );
    }
    Ok(())
}
