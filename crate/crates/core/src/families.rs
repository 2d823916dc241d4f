//! Built-in families and the JSON-declared table family.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{MapKind, SequenceB, TruncatedSystem};

/// Declarative description of a family, as read from JSON.
///
/// `{"family": "geometric", "q": 0.5}`, `{"family": "power", "alpha": 1.0}`,
/// `{"family": "luroth"}`, `{"family": "gauss"}`, `{"family": "gauss2"}`,
/// `{"family": "table", "b": [1.0, 0.5, 0.25]}`. Every variant also accepts an
/// optional `"name"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilySpec {
    Geometric {
        q: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Power {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Luroth {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Gauss {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    /// Second iterate of the Gauss system.
    #[serde(rename = "gauss2")]
    GaussSquared {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Table {
        b: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

impl FamilySpec {
    pub fn geometric(q: f64) -> Self {
        FamilySpec::Geometric { q, name: None }
    }

    pub fn power(alpha: f64) -> Self {
        FamilySpec::Power { alpha, name: None }
    }

    pub fn luroth() -> Self {
        FamilySpec::Luroth { name: None }
    }

    pub fn gauss() -> Self {
        FamilySpec::Gauss { name: None }
    }

    pub fn gauss2() -> Self {
        FamilySpec::GaussSquared { name: None }
    }

    pub fn table(b: Vec<f64>) -> Self {
        FamilySpec::Table { b, name: None }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("family spec: {e}")))
    }

    /// Compact JSON with a fixed key order, suitable for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("family spec serializes")
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, FamilySpec::Gauss { .. } | FamilySpec::GaussSquared { .. })
    }

    /// Short tag of the variant (`"geometric"`, `"gauss2"`, ...).
    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilySpec::Geometric { .. } => "geometric",
            FamilySpec::Power { .. } => "power",
            FamilySpec::Luroth { .. } => "luroth",
            FamilySpec::Gauss { .. } => "gauss",
            FamilySpec::GaussSquared { .. } => "gauss2",
            FamilySpec::Table { .. } => "table",
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            FamilySpec::Geometric { name, .. }
            | FamilySpec::Power { name, .. }
            | FamilySpec::Luroth { name }
            | FamilySpec::Gauss { name }
            | FamilySpec::GaussSquared { name }
            | FamilySpec::Table { name, .. } => name.as_deref(),
        }
    }

    /// The boundary sequence after validation. Gauss-type families report the
    /// sequence `1/(k+1)` of the first-iterate system.
    pub fn sequence(&self) -> Result<SequenceB> {
        match self {
            FamilySpec::Geometric { q, .. } => {
                if !(q.is_finite() && *q > 0.0 && *q < 1.0) {
                    return Err(Error::InvalidParameter(format!("q must lie in (0,1), got {q}")));
                }
                Ok(SequenceB::Geometric { q: *q })
            }
            FamilySpec::Power { alpha, .. } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
                }
                Ok(SequenceB::Power { alpha: *alpha })
            }
            FamilySpec::Luroth { .. } | FamilySpec::Gauss { .. } | FamilySpec::GaussSquared { .. } => {
                Ok(SequenceB::Power { alpha: 1.0 })
            }
            FamilySpec::Table { b, .. } => {
                if b.len() < 2 {
                    return Err(Error::InvalidParameter("table needs at least two values".into()));
                }
                if b[0] != 1.0 {
                    return Err(Error::InvalidParameter(format!("table must start at 1.0, got {}", b[0])));
                }
                if let Some(i) = (1..b.len()).find(|&i| !(b[i] < b[i - 1] && b[i] > 0.0 && b[i].is_finite())) {
                    return Err(Error::InvalidParameter(format!(
                        "table must be strictly decreasing and positive (index {i})"
                    )));
                }
                Ok(SequenceB::Table(Arc::from(b.as_slice())))
            }
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = self.name() {
            return f.write_str(name);
        }
        match self {
            FamilySpec::Geometric { q, .. } => write!(f, "geometric(q={q})"),
            FamilySpec::Power { alpha, .. } => write!(f, "power(alpha={alpha})"),
            FamilySpec::Table { b, .. } => write!(f, "table({} values)", b.len()),
            other => f.write_str(other.kind_name()),
        }
    }
}

/// Builds `S_n`. For `gauss2`, `n` counts pairs and must be a perfect square
/// `m²`; the maps are all `g_j ∘ g_k` with `j, k ≤ m`.
pub fn build_system(spec: &FamilySpec, n: usize) -> Result<TruncatedSystem> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be ≥ 1".into()));
    }
    let seq = spec.sequence()?;
    if let Some(last) = seq.last_index() {
        if n > last {
            return Err(Error::NTooLarge { n, available: last });
        }
    }
    let sys = match spec {
        FamilySpec::Gauss { .. } => TruncatedSystem::from_sequence(seq, n, MapKind::Gauss),
        FamilySpec::GaussSquared { .. } => {
            let m = (n as f64).sqrt().round() as usize;
            if m * m != n {
                return Err(Error::InvalidParameter(format!(
                    "gauss2 counts pairs (j,k) with j,k ≤ m, so n must be a perfect square; got {n}"
                )));
            }
            TruncatedSystem::gauss_squared(m)
        }
        _ => TruncatedSystem::from_sequence(seq, n, MapKind::Affine),
    };
    if let Some(k) = sys.gaps().iter().position(|&a| !(a > 0.0 && a < 1.0)) {
        return Err(Error::InvalidParameter(format!("gap a_{} = {} is not in (0,1)", k + 1, sys.gap(k + 1))));
    }
    Ok(sys)
}

/// Exact `sup_{k≥0} (b_k − b_{k+1})/b_{k+1}` for the closed-form linear families.
pub fn analytic_c2(spec: &FamilySpec) -> Result<f64> {
    spec.sequence()?;
    match spec {
        FamilySpec::Geometric { q, .. } => Ok((1.0 - q) / q),
        FamilySpec::Power { alpha, .. } => Ok(2f64.powf(*alpha) - 1.0),
        FamilySpec::Luroth { .. } => Ok(1.0),
        other => Err(Error::Unavailable(other.kind_name().into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_gaps() {
        let sys = build_system(&FamilySpec::geometric(0.5), 3).unwrap();
        assert_eq!(sys.gaps(), &[0.5, 0.25, 0.125]);
        assert!(sys.is_linear());
    }

    #[test]
    fn luroth_gaps() {
        let sys = build_system(&FamilySpec::luroth(), 2).unwrap();
        assert!((sys.gap(1) - 0.5).abs() < 1e-16);
        assert!((sys.gap(2) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn non_monotone_table_is_rejected() {
        let err = build_system(&FamilySpec::table(vec![1.0, 0.4, 0.7]), 2).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn table_length_limits_n() {
        let spec = FamilySpec::table(vec![1.0, 0.5, 0.25]);
        assert!(build_system(&spec, 2).is_ok());
        assert_eq!(build_system(&spec, 3).unwrap_err(), Error::NTooLarge { n: 3, available: 2 });
    }

    #[test]
    fn bad_parameters() {
        for spec in [FamilySpec::geometric(1.0), FamilySpec::geometric(0.0), FamilySpec::power(0.0)] {
            assert!(matches!(build_system(&spec, 2), Err(Error::InvalidParameter(_))));
        }
        assert!(matches!(build_system(&FamilySpec::gauss2(), 5), Err(Error::InvalidParameter(_))));
        assert!(matches!(build_system(&FamilySpec::luroth(), 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn linear_flags() {
        assert!(!build_system(&FamilySpec::gauss(), 4).unwrap().is_linear());
        assert!(!build_system(&FamilySpec::gauss2(), 4).unwrap().is_linear());
        assert!(build_system(&FamilySpec::power(2.0), 4).unwrap().is_linear());
    }

    #[test]
    fn json_schema() {
        assert_eq!(FamilySpec::from_json(r#"{"family":"geometric","q":0.5}"#).unwrap(), FamilySpec::geometric(0.5));
        assert_eq!(FamilySpec::from_json(r#"{"family":"gauss2"}"#).unwrap(), FamilySpec::gauss2());
        assert_eq!(
            FamilySpec::from_json(r#"{"family":"table","b":[1.0,0.5,0.25],"name":"halves"}"#).unwrap(),
            FamilySpec::Table { b: vec![1.0, 0.5, 0.25], name: Some("halves".into()) }
        );
        assert!(FamilySpec::from_json(r#"{"family":"luroth","q":0.5}"#).is_err());
        assert!(FamilySpec::from_json(r#"{"family":"cantor"}"#).is_err());
        let spec = FamilySpec::power(1.5);
        assert_eq!(FamilySpec::from_json(&spec.canonical_json()).unwrap(), spec);
    }

    #[test]
    fn analytic_c2_values() {
        assert_eq!(analytic_c2(&FamilySpec::geometric(0.5)).unwrap(), 1.0);
        assert_eq!(analytic_c2(&FamilySpec::luroth()).unwrap(), 1.0);
        assert_eq!(analytic_c2(&FamilySpec::power(2.0)).unwrap(), 3.0);
        assert!(matches!(analytic_c2(&FamilySpec::gauss()), Err(Error::Unavailable(_))));
        assert!(matches!(analytic_c2(&FamilySpec::table(vec![1.0, 0.5])), Err(Error::Unavailable(_))));
    }

    #[test]
    fn partial_sums_close_the_unit_interval() {
        for spec in [
            FamilySpec::geometric(0.3),
            FamilySpec::geometric(0.5),
            FamilySpec::geometric(0.9),
            FamilySpec::power(0.5),
            FamilySpec::power(2.0),
            FamilySpec::luroth(),
            FamilySpec::gauss(),
        ] {
            for n in [1, 2, 7, 32, 64] {
                let sys = build_system(&spec, n).unwrap();
                let s: f64 = sys.gaps().iter().sum::<f64>() + sys.b(n);
                assert!((s - 1.0).abs() < 1e-12, "{spec} n={n}: {s}");
            }
        }
    }

    #[test]
    fn gauss2_contracts_by_a_quarter() {
        let sys = build_system(&FamilySpec::gauss2(), 64).unwrap();
        for k in 1..=64 {
            for i in 0..=1000 {
                let x = i as f64 / 1000.0;
                assert!(sys.deriv(k, x).abs() <= 0.25 + 1e-16);
            }
        }
    }
}
