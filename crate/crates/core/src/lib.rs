//! Hausdorff dimension and Hausdorff measure of limit sets of truncated
//! Lüroth-type iterated function systems, with interval enclosures.
//!
//! ```
//! use hausmeter::{build_system, solve_moran, FamilySpec};
//!
//! let sys = build_system(&FamilySpec::geometric(0.5), 2).unwrap();
//! let h = solve_moran(&sys).unwrap().h;
//! let golden = (1.0 + 5f64.sqrt()) / 2.0;
//! assert!((h.mid() - golden.log2()).abs() < 1e-10);
//! ```

pub mod cli;
pub mod conditions;
pub mod dimension;
pub mod enclosure;
pub mod error;
pub mod families;
pub mod ifs;
pub mod measure;

pub use conditions::{
    check_c2, check_c2_strong, check_g4_g5_g6, distortion, distortion_growth_check, ConditionId, ConditionReport,
    Verdict,
};
pub use dimension::{
    c1_diagnostic, dim_gap_bound, solve_moran, solve_pressure, word_pressure, DimensionResult, GapBound, Method,
};
pub use enclosure::Enclosure;
pub use error::{Error, Result};
pub use families::{analytic_c2, build_system, FamilySpec};
pub use ifs::{apply_word, enumerate_generation, word_derivative_bounds, Cylinder, SequenceB, TruncatedSystem, Word};
pub use measure::{
    cover_sum, cylinder_measure, density, hausdorff_estimate, interval_measure, sup_density, weak_star_diagnostic,
    DensityReport, HausdorffEstimate, MeasureQuery,
};
