mod common;

use common::*;
use hausmeter::conditions::check_c2;
use hausmeter::{build_system, enumerate_generation, interval_measure, solve_moran, apply_word, MeasureQuery, Word};
use proptest::prelude::*;

const CASES: u32 = 1000;

#[test]
fn jensen_bound() {
    prop_jensen(CASES).unwrap();
}

#[test]
fn distortion_bracketing() {
    prop_distortion_bracketing(CASES).unwrap();
}

#[test]
fn subadditivity() {
    prop_subadditivity(CASES).unwrap();
}

#[test]
fn scale_invariance() {
    prop_scale_invariance(CASES).unwrap();
}

#[test]
fn generation_refinement() {
    prop_generation_refinement(CASES).unwrap();
}

#[test]
fn additivity_of_adjacent_intervals() {
    for fam in Fam::all() {
        let n = 4;
        let sys = build_system(&fam.spec(), n).unwrap();
        let h = solve_moran(&sys).unwrap().h;
        let hull = sys.hull();
        let strat = (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64);
        runner(100)
            .run(&strat, |(x, y, z)| {
                let mut p = [x, y, z].map(|u| hull.lo + u * hull.width());
                p.sort_by(f64::total_cmp);
                prop_assume!(p[1] > p[0] && p[2] > p[1]);
                let m = |s, t| interval_measure(&MeasureQuery::new(&sys, h, s, t, 1e-12)).unwrap();
                let (a, b, ab) = (m(p[0], p[1]), m(p[1], p[2]), m(p[0], p[2]));
                // Both sides enclose the same number. Independent enclosures need
                // not nest, so the check is that they intersect and are tight.
                let sum = a + b;
                prop_assert!(sum.overlaps(&ab), "{fam:?}: {ab:?} vs {sum:?}");
                prop_assert!(ab.width() <= 1e-11 && sum.width() <= 2e-11, "{fam:?} {p:?}: {ab:?} {a:?} {b:?}");
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn orientation_alternates_with_word_length() {
    for fam in [Fam::Geo(0.5), Fam::Luroth, Fam::Pow(2.0)] {
        let sys = build_system(&fam.spec(), 3).unwrap();
        for l in 1..=5 {
            for c in enumerate_generation(&sys, l).unwrap() {
                let (at0, at1) = (apply_word(&sys, &c.word, 0.0).unwrap(), apply_word(&sys, &c.word, 1.0).unwrap());
                if l % 2 == 1 {
                    assert!(at0 > at1, "{:?}", c.word);
                } else {
                    assert!(at0 < at1, "{:?}", c.word);
                }
                assert!((c.left - at0.min(at1)).abs() <= 1e-15 && (c.right - at0.max(at1)).abs() <= 1e-15);
            }
        }
    }
    let w = Word::new([]);
    let sys = build_system(&Fam::Luroth.spec(), 2).unwrap();
    assert_eq!(apply_word(&sys, &w, 0.3).unwrap(), 0.3);
}

#[test]
fn endpoint_ratio_bound() {
    for fam in [Fam::Geo(0.3), Fam::Geo(0.5), Fam::Geo(0.7), Fam::Luroth] {
        let c2 = check_c2(&fam.spec(), 100).unwrap().witness.value.unwrap();
        let n = 3;
        let sys = build_system(&fam.spec(), n).unwrap();
        let alpha = sys.gaps().iter().copied().fold(0.0, f64::max);
        for l in 1..=8 {
            let bound = 1.0 + c2 * alpha.powi(l as i32 - 1);
            for c in enumerate_generation(&sys, l).unwrap() {
                let ratio = c.right / c.left;
                assert!(ratio <= bound * (1.0 + 1e-12), "{fam:?} l={l} {:?}: {ratio} > {bound}", c.word);
            }
        }
    }
}
