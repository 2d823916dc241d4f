//! Checks of the hypotheses: (C1), (C2), the strong ratio condition, and the
//! nonlinear conditions on `g''/g'`, the distortion `κ(g_k)` and `|g_k'|`.
//!
//! A supremum or limit over infinitely many maps is only reported as holding
//! when a closed form covers the tail; scans alone give `Inconclusive`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dimension::{c1_diagnostic, Method};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::families::{analytic_c2, build_system, FamilySpec};
use crate::ifs::{MapKind, TruncatedSystem, Word};

/// Default seed for sampled checks.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionId {
    C1,
    C2,
    C2strong,
    G4,
    G5,
    G6,
}

impl ConditionId {
    pub const ALL: [ConditionId; 6] = [
        ConditionId::C1,
        ConditionId::C2,
        ConditionId::C2strong,
        ConditionId::G4,
        ConditionId::G5,
        ConditionId::G6,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::C1 => "c1",
            ConditionId::C2 => "c2",
            ConditionId::C2strong => "c2strong",
            ConditionId::G4 => "g4",
            ConditionId::G5 => "g5",
            ConditionId::G6 => "g6",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for ConditionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConditionId::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown condition id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Numeric evidence behind a verdict.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Witness {
    /// The supremum, constant or limit the verdict rests on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// Largest value seen in the scan.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scanned: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trend: Vec<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub id: ConditionId,
    pub verdict: Verdict,
    pub witness: Witness,
    pub scan_range: usize,
}

/// Largest index `< K` the family can be scanned at.
/// Stops early where `b_k` leaves the normal floating-point range.
fn scan_len(spec: &FamilySpec, k: usize) -> Result<usize> {
    let seq = spec.sequence()?;
    let k = match seq.last_index() {
        Some(last) => k.min(last),
        None => k,
    };
    Ok((1..=k).find(|&i| seq.value(i).unwrap() < 1e-300).map_or(k, |i| i - 1).max(1))
}

/// `(C2)`: `sup_{k≥0} (b_k − b_{k+1})/b_{k+1} < ∞`.
pub fn check_c2(spec: &FamilySpec, k_max: usize) -> Result<ConditionReport> {
    let seq = spec.sequence()?;
    let k_max = scan_len(spec, k_max.max(1))?;
    let (mut scanned, mut arg) = (f64::NEG_INFINITY, 0);
    for k in 0..k_max {
        let r = seq.gap(k + 1).unwrap() / seq.value(k + 1).unwrap();
        if r > scanned {
            scanned = r;
            arg = k;
        }
    }
    let closed = match spec {
        FamilySpec::Gauss { .. } | FamilySpec::GaussSquared { .. } => Some(1.0),
        _ => analytic_c2(spec).ok(),
    };
    let (verdict, value, note) = match closed {
        Some(v) if scanned <= v + 1e-9 => (
            Verdict::Holds,
            Some(v),
            match spec {
                FamilySpec::GaussSquared { .. } => "closed form for b_k = 1/(k+1) of the first-iterate system".to_string(),
                _ => "closed-form supremum".to_string(),
            },
        ),
        Some(v) => (Verdict::Inconclusive, Some(v), format!("scan exceeds the closed form {v}")),
        None => (Verdict::Inconclusive, Some(scanned), "finite table: no tail rule".to_string()),
    };
    Ok(ConditionReport {
        id: ConditionId::C2,
        verdict,
        witness: Witness {
            value,
            scanned: Some(scanned),
            index: Some(arg),
            note,
            ..Witness::default()
        },
        scan_range: k_max,
    })
}

/// Strong ratio condition, in lim-sup form: `lim_n sup_{k≥n} b_k/b_{k+1} = 1`.
pub fn check_c2_strong(spec: &FamilySpec, k_max: usize) -> Result<ConditionReport> {
    let seq = spec.sequence()?;
    let k_max = scan_len(spec, k_max.max(2))?;
    let ratios: Vec<f64> = (0..k_max).map(|k| seq.value(k).unwrap() / seq.value(k + 1).unwrap()).collect();
    let last = *ratios.last().unwrap();
    let trend: Vec<f64> = sample_points(k_max).into_iter().map(|k| ratios[k]).collect();
    let (verdict, value, note) = match spec {
        FamilySpec::Geometric { q, .. } => (Verdict::Fails, 1.0 / q, "constant ratio 1/q".to_string()),
        FamilySpec::Table { .. } => (Verdict::Inconclusive, last, "finite table: no tail rule".to_string()),
        _ => (Verdict::Holds, 1.0, "((k+2)/(k+1))^alpha decreases to 1".to_string()),
    };
    Ok(ConditionReport {
        id: ConditionId::C2strong,
        verdict,
        witness: Witness {
            value: Some(value),
            scanned: Some(last),
            index: Some(k_max - 1),
            trend,
            note,
            ..Witness::default()
        },
        scan_range: k_max,
    })
}

fn sample_points(len: usize) -> Vec<usize> {
    let mut v: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 10)).take_while(|&k| k <= len).map(|k| k - 1).collect();
    if v.last() != Some(&(len - 1)) {
        v.push(len - 1);
    }
    v
}

/// `(C1)`: `(1 − h_n) ln n → 0`. The linear closed-form families are
/// covered by the gap bound; other families report the trend only.
pub fn check_c1(spec: &FamilySpec, n_list: &[usize], method: Method) -> Result<ConditionReport> {
    let report = c1_diagnostic(spec, n_list, method)?;
    let trend: Vec<f64> = report.rows.iter().map(|r| r.product.hi).collect();
    let analytic = matches!(spec, FamilySpec::Geometric { .. } | FamilySpec::Power { .. } | FamilySpec::Luroth { .. });
    let verdict = if analytic && report.monotone_decreasing_trend {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    let note = if analytic {
        "gap bound gives (1-h_n) ln n → 0 for this family".to_string()
    } else {
        "trend only; no closed form for the tail".to_string()
    };
    Ok(ConditionReport {
        id: ConditionId::C1,
        verdict,
        witness: Witness {
            value: trend.last().copied(),
            index: n_list.last().copied(),
            trend,
            note,
            ..Witness::default()
        },
        scan_range: *n_list.last().unwrap(),
    })
}

/// `κ(g_k) = sup|g_k'| / inf|g_k'|` over `sub` (default `[0,1]`).
pub fn distortion(sys: &TruncatedSystem, k: usize, sub: Option<Enclosure>) -> Result<Enclosure> {
    if !(1..=sys.n()).contains(&k) {
        return Err(Error::IndexOutOfRange { index: k, n: sys.n() });
    }
    let sub = sub.unwrap_or(Enclosure::UNIT);
    if !(sub.lo >= 0.0 && sub.hi <= 1.0) {
        return Err(Error::InvalidInterval(sub.lo, sub.hi));
    }
    if sys.is_linear() {
        return Ok(Enclosure::ONE);
    }
    let grid: Vec<f64> = (0..=100).map(|i| sub.lo + sub.width() * i as f64 / 100.0).collect();
    let signs: Vec<f64> = grid.iter().map(|&x| sys.deriv2(k, x).signum()).collect();
    if signs.iter().all(|&s| s == signs[0]) {
        // |g'| is monotone, so its extremes sit at the endpoints.
        let (a, b) = (sys.deriv_range(k, Enclosure::point(sub.lo)), sys.deriv_range(k, Enclosure::point(sub.hi)));
        let (hi, lo) = if a.mid() >= b.mid() { (a, b) } else { (b, a) };
        return Ok(hi / lo);
    }
    Ok(refined_distortion(sys, k, sub))
}

/// Dyadic refinement until the derivative range of each cell is narrower
/// than `1e-6` or the depth reaches 20.
fn refined_distortion(sys: &TruncatedSystem, k: usize, sub: Enclosure) -> Enclosure {
    let (mut sup_lo, mut sup_hi) = (0.0f64, 0.0f64);
    let (mut inf_lo, mut inf_hi) = (f64::INFINITY, f64::INFINITY);
    let mut stack = vec![(sub, 0usize)];
    while let Some((cell, depth)) = stack.pop() {
        let d = sys.deriv_range(k, cell);
        if d.width() > 1e-6 && depth < 20 {
            let m = cell.mid();
            stack.push((Enclosure::new(cell.lo, m), depth + 1));
            stack.push((Enclosure::new(m, cell.hi), depth + 1));
            continue;
        }
        let (a, b) = (sys.deriv_range(k, Enclosure::point(cell.lo)), sys.deriv_range(k, Enclosure::point(cell.hi)));
        sup_lo = sup_lo.max(a.lo.max(b.lo));
        sup_hi = sup_hi.max(d.hi);
        inf_lo = inf_lo.min(d.lo);
        inf_hi = inf_hi.min(a.hi.min(b.hi));
    }
    Enclosure::new(sup_lo / inf_hi, sup_hi / inf_lo)
}

/// Conditions (4), (5) and (6) for the built-in nonlinear families, scanning
/// `k_max` maps on a grid of `grid` points each.
pub fn check_g4_g5_g6(spec: &FamilySpec, k_max: usize, grid: usize) -> Result<[ConditionReport; 3]> {
    if spec.is_linear() {
        return Err(Error::NotNonlinear);
    }
    let grid = grid.max(100);
    let n = match spec {
        FamilySpec::GaussSquared { .. } => {
            let m = (k_max.max(1) as f64).sqrt().ceil() as usize;
            m * m
        }
        _ => k_max.max(1),
    };
    let sys = build_system(spec, n)?;
    let xs: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();

    // Scans: sup |g''/g'|, κ(g_k), sup |g'| with the arg-max.
    let (mut g4, mut g4_at) = (0.0f64, (1, 0.0));
    let (mut g6, mut g6_at) = (0.0f64, (1, 0.0));
    let mut kappa = Vec::with_capacity(n);
    for k in 1..=n {
        for &x in &xs {
            let (d1, d2) = (sys.deriv(k, x), sys.deriv2(k, x));
            if (d2 / d1).abs() > g4 {
                g4 = (d2 / d1).abs();
                g4_at = (k, x);
            }
            if d1.abs() > g6 {
                g6 = d1.abs();
                g6_at = (k, x);
            }
        }
        kappa.push(distortion(&sys, k, None)?.mid());
    }
    let report = |id, verdict, witness| ConditionReport {
        id,
        verdict,
        witness,
        scan_range: n,
    };
    let g4_report = report(
        ConditionId::G4,
        if g4 <= 2.0 { Verdict::Holds } else { Verdict::Inconclusive },
        Witness {
            value: Some(2.0),
            scanned: Some(g4),
            index: Some(g4_at.0),
            point: Some(g4_at.1),
            note: match sys.kind() {
                MapKind::Gauss => "|g''/g'| = 2/(k+x), supremum 2 at k=1, x=0".into(),
                _ => "|g''/g'| = 2j/(j(k+x)+1) < 2/k, supremum 2 as j → ∞".into(),
            },
            ..Witness::default()
        },
    );
    let trend: Vec<f64> = sample_points(n).into_iter().map(|i| kappa[i]).collect();
    let g5_report = match sys.kind() {
        MapKind::Gauss => report(
            ConditionId::G5,
            Verdict::Holds,
            Witness {
                value: Some(1.0),
                scanned: kappa.last().copied(),
                index: Some(n),
                trend,
                note: "κ(g_k) = ((k+1)/k)^2 → 1".into(),
                ..Witness::default()
            },
        ),
        _ => {
            // Pairs (j, 1) have κ = ((2j+1)/(j+1))^2, which tends to 4.
            let (i, worst) = kappa
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, &v)| (i + 1, v))
                .unwrap();
            report(
                ConditionId::G5,
                Verdict::Fails,
                Witness {
                    value: Some(4.0),
                    scanned: Some(worst),
                    index: Some(i),
                    trend,
                    note: "κ(g_(j,1)) = ((2j+1)/(j+1))^2 → 4 along infinitely many maps".into(),
                    ..Witness::default()
                },
            )
        }
    };
    let g6_report = match sys.kind() {
        MapKind::Gauss => report(
            ConditionId::G6,
            Verdict::Fails,
            Witness {
                value: Some(1.0),
                scanned: Some(g6),
                index: Some(g6_at.0),
                point: Some(g6_at.1),
                note: "|g_1'(0)| = 1".into(),
                ..Witness::default()
            },
        ),
        _ => report(
            ConditionId::G6,
            if g6 <= 0.25 { Verdict::Holds } else { Verdict::Inconclusive },
            Witness {
                value: Some(0.25),
                scanned: Some(g6),
                index: Some(g6_at.0),
                point: Some(g6_at.1),
                note: "|g_(j,k)'| = 1/(j(k+x)+1)^2 ≤ 1/4, attained at j=k=1, x=0".into(),
                ..Witness::default()
            },
        ),
    };
    Ok([g4_report, g5_report, g6_report])
}

/// One `(ω, x, y)` test point for the growth inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub word: Word,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthOutcome {
    pub sample: GrowthSample,
    /// `|g_ω'(x) / g_ω'(y)|`
    pub lhs: f64,
    /// `1 + c/(1−α)|x−y| + D|x−y|²`
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub c: f64,
    pub alpha: f64,
    /// Largest quadratic coefficient observed on the calibration set.
    pub d_calibrated: f64,
    /// `e^U − 1 − U` with `U = c/(1−α)`, valid for `|x−y| ≤ 1`.
    pub d_analytic: f64,
    pub verdict: Verdict,
    pub outcomes: Vec<GrowthOutcome>,
}

/// `(c, α)` for which the system satisfies conditions (4) and (6), if any.
fn growth_constants(sys: &TruncatedSystem) -> Option<(f64, f64)> {
    match sys.kind() {
        MapKind::Affine => Some((0.0, sys.gaps().iter().copied().fold(0.0, f64::max))),
        MapKind::GaussSquared { .. } => Some((2.0, 0.25)),
        MapKind::Gauss => None,
    }
}

fn word_deriv(sys: &TruncatedSystem, w: &Word, x: f64) -> f64 {
    let mut y = x;
    let mut d = 1.0;
    for &k in w.letters().iter().rev() {
        d *= sys.deriv(k, y).abs();
        y = sys.eval(k, y);
    }
    d
}

/// Checks `|g_ω'(x)/g_ω'(y)| ≤ 1 + c/(1−α)|x−y| + D|x−y|²`, with `D`
/// fitted on `calibration` and tested on `samples`.
pub fn distortion_growth_check(
    sys: &TruncatedSystem,
    calibration: &[GrowthSample],
    samples: &[GrowthSample],
) -> Result<GrowthReport> {
    for s in calibration.iter().chain(samples) {
        s.word.validate(sys)?;
        if !((0.0..=1.0).contains(&s.x) && (0.0..=1.0).contains(&s.y)) {
            return Err(Error::InvalidInterval(s.x, s.y));
        }
    }
    let Some((c, alpha)) = growth_constants(sys) else {
        return Ok(GrowthReport {
            c: f64::NAN,
            alpha: f64::NAN,
            d_calibrated: f64::NAN,
            d_analytic: f64::NAN,
            verdict: Verdict::Inconclusive,
            outcomes: Vec::new(),
        });
    };
    let u = c / (1.0 - alpha);
    let ratio = |s: &GrowthSample| word_deriv(sys, &s.word, s.x) / word_deriv(sys, &s.word, s.y);
    let d_calibrated = calibration
        .iter()
        .filter(|s| s.x != s.y)
        .map(|s| {
            let d = (s.x - s.y).abs();
            (ratio(s) - 1.0 - u * d) / (d * d)
        })
        .fold(0.0, f64::max);
    let outcomes: Vec<GrowthOutcome> = samples
        .iter()
        .map(|s| {
            let d = (s.x - s.y).abs();
            let lhs = ratio(s);
            let rhs = 1.0 + u * d + d_calibrated * d * d;
            GrowthOutcome {
                sample: s.clone(),
                lhs,
                rhs,
                pass: lhs <= rhs * (1.0 + 1e-12),
            }
        })
        .collect();
    let verdict = if outcomes.iter().all(|o| o.pass) { Verdict::Holds } else { Verdict::Fails };
    Ok(GrowthReport {
        c,
        alpha,
        d_calibrated,
        d_analytic: u.exp() - 1.0 - u,
        verdict,
        outcomes,
    })
}

/// Random words of length `1..=max_len` with random points, from `seed`.
pub fn random_growth_samples(sys: &TruncatedSystem, count: usize, max_len: usize, seed: u64) -> Vec<GrowthSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len.max(1));
            let word = Word((0..len).map(|_| rng.gen_range(1..=sys.n())).collect());
            GrowthSample {
                word,
                x: rng.gen(),
                y: rng.gen(),
            }
        })
        .collect()
}
