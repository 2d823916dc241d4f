//! Checking the hypotheses on the maps for several families.

use hausmeter::conditions::{random_growth_samples, DEFAULT_SEED};
use hausmeter::{
    build_system, check_c2, check_c2_strong, check_g4_g5_g6, distortion, distortion_growth_check, FamilySpec,
};

fn main() -> hausmeter::Result<()> {
    for spec in [FamilySpec::geometric(0.3), FamilySpec::power(1.5)] {
        let c2 = check_c2(&spec, 1000)?;
        let strong = check_c2_strong(&spec, 1000)?;
        println!("{spec}: c2 {} ({:?}), c2strong {}", c2.verdict, c2.witness.value, strong.verdict);
    }
    for spec in [FamilySpec::gauss(), FamilySpec::gauss2()] {
        for r in check_g4_g5_g6(&spec, 400, 200)? {
            println!("{spec}: {} {}  {}", r.id, r.verdict, r.witness.note);
        }
    }
    let gauss = build_system(&FamilySpec::gauss(), 8)?;
    for k in 1..=4 {
        let kappa = distortion(&gauss, k, None)?;
        println!("kappa(g_{k}) = {:.6}", kappa.mid());
    }
    let sys = build_system(&FamilySpec::gauss2(), 16)?;
    let cal = random_growth_samples(&sys, 500, 5, DEFAULT_SEED);
    let test = random_growth_samples(&sys, 500, 5, DEFAULT_SEED + 1);
    let g = distortion_growth_check(&sys, &cal, &test)?;
    println!("growth check: {} (D = {:.4}, analytic {:.4})", g.verdict, g.d_calibrated, g.d_analytic);
    Ok(())
}
