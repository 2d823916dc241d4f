//! Hausdorff dimension `h_n` of the limit set `J_n`.
//!
//! Linear systems solve the Moran equation `Σ a_k^h = 1`. Nonlinear systems
//! bracket the zero of the pressure function with Collatz–Wielandt bounds for
//! the transfer operator `L_t f(x) = Σ_k |g_k'(x)|^t f(g_k x)`: a positive test
//! function `f` with `L_t f ≥ λ f` proves `e^{P(t)} ≥ λ`, and `L_t f ≤ Λ f`
//! proves `e^{P(t)} ≤ Λ`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::families::{build_system, FamilySpec};
use crate::ifs::{enumerate_generation_with_budget, word_derivative_bounds_on, TruncatedSystem, DEFAULT_ENUMERATION_BUDGET};

/// Cells in the transfer-operator grid.
pub const GRID_CELLS: usize = 4096;

/// Relative allowance for floating-point error in the operator bounds.
const OPERATOR_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Method {
    Moran,
    Pressure { depth: usize },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Moran => f.write_str("moran"),
            Method::Pressure { depth } => write!(f, "pressure(L={depth})"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// `moran`, `pressure` (depth 8) or `pressure:L`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "moran" => Ok(Method::Moran),
            None if s == "pressure" => Ok(Method::Pressure { depth: 8 }),
            Some(("pressure", d)) => d
                .parse()
                .map(|depth| Method::Pressure { depth })
                .map_err(|_| Error::InvalidParameter(format!("bad depth in method {s:?}"))),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionResult {
    pub h: Enclosure,
    pub method: Method,
    /// The solved equation evaluated at the midpoint of `h`.
    pub residual: f64,
    pub iterations: usize,
}

impl DimensionResult {
    fn degenerate(method: Method) -> Self {
        DimensionResult {
            h: Enclosure::ZERO,
            method,
            residual: 0.0,
            iterations: 0,
        }
    }
}

/// Certified bracket of the crossing point of a decreasing function, given as
/// two predicates: `below(t)` proves `t < root`, `above(t)` proves `t > root`.
fn bracket_root(below: impl Fn(f64) -> bool, above: impl Fn(f64) -> bool, iterations: &mut usize) -> Enclosure {
    let mut side = |pred: &dyn Fn(f64) -> bool, mut good: f64, mut bad: f64| {
        // Runs until the two ends are adjacent floats; the enclosure width
        // is then set by where the predicates stop deciding.
        loop {
            let mid = 0.5 * (good + bad);
            if mid == good || mid == bad {
                break;
            }
            *iterations += 1;
            if pred(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let lo = side(&below, 0.0, 1.0);
    let hi = if above(1.0) { side(&above, 1.0, lo) } else { 1.0 };
    Enclosure::new(lo, hi.max(lo))
}

fn power_sum(bases: &[f64], t: f64) -> Enclosure {
    bases.iter().map(|&a| Enclosure::point(a).powf(t)).sum()
}

/// Root of `Σ a_k^h = 1` by bisection in enclosure arithmetic.
pub fn solve_moran(sys: &TruncatedSystem) -> Result<DimensionResult> {
    if !sys.is_linear() {
        return Err(Error::NotLinear);
    }
    if sys.n() == 1 {
        return Ok(DimensionResult::degenerate(Method::Moran));
    }
    let a = sys.gaps();
    let mut iterations = 0;
    let h = bracket_root(|t| power_sum(a, t).lo > 1.0, |t| power_sum(a, t).hi < 1.0, &mut iterations);
    let residual = a.iter().map(|x| x.powf(h.mid())).sum::<f64>() - 1.0;
    Ok(DimensionResult {
        h,
        method: Method::Moran,
        residual,
        iterations,
    })
}

/// Dimension bracket from depth-`L` cylinder derivative bounds: the root of
/// `Σ_{|ω|=L} (inf|g_ω'|)^t = 1` bounds `h` from below and the root of the
/// same sum over `sup|g_ω'|` from above. Bounds are taken over the hull of
/// `J_n`, which every map sends into itself.
pub fn word_pressure(sys: &TruncatedSystem, depth: usize, budget: u128) -> Result<DimensionResult> {
    let method = Method::Pressure { depth };
    if sys.n() == 1 {
        return Ok(DimensionResult::degenerate(method));
    }
    let hull = sys.hull();
    let words: Vec<_> = enumerate_generation_with_budget(sys, depth, budget)?.map(|c| c.word).collect();
    let bounds: Vec<Enclosure> = words
        .par_iter()
        .map(|w| word_derivative_bounds_on(sys, w, hull).expect("generated words are valid"))
        .collect();
    let inf: Vec<f64> = bounds.iter().map(|d| d.lo).collect();
    let sup: Vec<f64> = bounds.iter().map(|d| d.hi).collect();
    let mut iterations = 0;
    let h = bracket_root(|t| power_sum(&inf, t).lo > 1.0, |t| power_sum(&sup, t).hi < 1.0, &mut iterations);
    let mid: Vec<f64> = bounds.iter().map(|d| d.mid()).collect();
    let residual = mid.iter().map(|x| x.powf(h.mid())).sum::<f64>() - 1.0;
    Ok(DimensionResult {
        h,
        method,
        residual,
        iterations,
    })
}

/// Dimension enclosure for any system. Linear systems reduce to the Moran
/// equation, which every depth reproduces exactly. Nonlinear systems use the
/// transfer-operator bracket; `depth` is the number of power iterations that
/// shape the test function, and the result is the intersection of the
/// brackets from iterations `1..=depth`, so deeper runs nest inside
/// shallower ones.
pub fn solve_pressure(sys: &TruncatedSystem, depth: usize) -> Result<DimensionResult> {
    if depth < 1 {
        return Err(Error::InvalidDepth(depth));
    }
    let method = Method::Pressure { depth };
    if sys.n() == 1 {
        return Ok(DimensionResult::degenerate(method));
    }
    if sys.is_linear() {
        return Ok(DimensionResult {
            method,
            ..solve_moran(sys)?
        });
    }
    let op = Transfer::new(sys, GRID_CELLS);
    let (center, mut iterations) = op.discrete_root();
    let mut f = vec![1.0; op.nodes.len()];
    let mut h = Enclosure::UNIT;
    for _ in 0..depth {
        f = op.apply(&f, &op.weights(center));
        let m = f.iter().copied().fold(0.0, f64::max);
        f.iter_mut().for_each(|v| *v /= m);
        let b = op.certify(&f, center, &mut iterations);
        h = h.intersect(&b).unwrap_or(b);
    }
    let (lambda, _) = op.eigen(h.mid(), vec![1.0; op.nodes.len()]);
    Ok(DimensionResult {
        h,
        method,
        residual: lambda - 1.0,
        iterations,
    })
}

/// Dispatches on `method`.
pub fn solve(sys: &TruncatedSystem, method: Method) -> Result<DimensionResult> {
    match method {
        Method::Moran => solve_moran(sys),
        Method::Pressure { depth } => solve_pressure(sys, depth),
    }
}

/// Discretized transfer operator on a uniform grid over the hull of `J_n`.
struct Transfer<'a> {
    sys: &'a TruncatedSystem,
    nodes: Vec<f64>,
    /// Per node and map: cell and fraction of `g_k(x_i)`, and `ln|g_k'(x_i)|`.
    point_pos: Vec<(usize, f64)>,
    point_logd: Vec<f64>,
    /// Per cell and map: range of `|g_k'|` over the cell, and the image of the
    /// cell clipped to the hull.
    cell_deriv: Vec<Enclosure>,
    cell_image: Vec<Enclosure>,
}

impl<'a> Transfer<'a> {
    fn new(sys: &'a TruncatedSystem, cells: usize) -> Self {
        let hull = sys.hull();
        let n = sys.n();
        let nodes: Vec<f64> = (0..=cells)
            .map(|i| {
                if i == cells {
                    hull.hi
                } else {
                    hull.lo + hull.width() * (i as f64 / cells as f64)
                }
            })
            .collect();
        let mut op = Transfer {
            sys,
            nodes,
            point_pos: Vec::with_capacity((cells + 1) * n),
            point_logd: Vec::with_capacity((cells + 1) * n),
            cell_deriv: Vec::with_capacity(cells * n),
            cell_image: Vec::with_capacity(cells * n),
        };
        for i in 0..=cells {
            let x = op.nodes[i];
            for k in 1..=n {
                let y = sys.eval(k, x).clamp(hull.lo, hull.hi);
                op.point_pos.push(op.locate(y));
                op.point_logd.push(sys.deriv(k, x).abs().ln());
            }
        }
        for i in 0..cells {
            let cell = Enclosure::new(op.nodes[i], op.nodes[i + 1]);
            for k in 1..=n {
                op.cell_deriv.push(sys.deriv_range(k, cell));
                let img = sys.image_of(k, cell);
                op.cell_image.push(img.intersect(&hull).unwrap_or_else(|| img.clamp(hull.lo, hull.hi)));
            }
        }
        op
    }

    fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    fn locate(&self, y: f64) -> (usize, f64) {
        let (lo, hi) = (self.nodes[0], self.nodes[self.cells()]);
        let c = self.cells();
        let i = (((y - lo) / (hi - lo)) * c as f64).floor().clamp(0.0, (c - 1) as f64) as usize;
        let frac = ((y - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i])).clamp(0.0, 1.0);
        (i, frac)
    }

    fn interp(f: &[f64], (i, frac): (usize, f64)) -> f64 {
        f[i] + (f[i + 1] - f[i]) * frac
    }

    fn weights(&self, t: f64) -> Vec<f64> {
        self.point_logd.iter().map(|l| (t * l).exp()).collect()
    }

    fn apply(&self, f: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.sys.n();
        (0..self.nodes.len())
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|k| w[i * n + k] * Self::interp(f, self.point_pos[i * n + k]))
                    .sum()
            })
            .collect()
    }

    /// Leading eigenvalue of the discretized operator at `t` by power iteration.
    fn eigen(&self, t: f64, mut f: Vec<f64>) -> (f64, Vec<f64>) {
        let w = self.weights(t);
        let mut lambda = 0.0;
        for _ in 0..2000 {
            let g = self.apply(&f, &w);
            let next = g.iter().sum::<f64>() / f.iter().sum::<f64>();
            let m = g.iter().copied().fold(0.0, f64::max);
            f = g.into_iter().map(|v| v / m).collect();
            let done = (next - lambda).abs() <= 1e-15 * next;
            lambda = next;
            if done {
                break;
            }
        }
        (lambda, f)
    }

    /// Zero of `ln λ(t)` for the discretized operator (Illinois false position).
    fn discrete_root(&self) -> (f64, usize) {
        let mut f = vec![1.0; self.nodes.len()];
        let mut eval = |t: f64| {
            let (l, g) = self.eigen(t, std::mem::take(&mut f));
            f = g;
            l.ln()
        };
        let (mut a, mut b) = (0.0, 1.0);
        let (mut fa, mut fb) = (eval(a), eval(b));
        let mut side = 0i8;
        let mut iterations = 0;
        while (b - a) > 1e-14 && iterations < 100 {
            iterations += 1;
            let c = (a * fb - b * fa) / (fb - fa);
            let fc = eval(c);
            if fc == 0.0 {
                return (c, iterations);
            }
            if fc > 0.0 {
                a = c;
                fa = fc;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            } else {
                b = c;
                fb = fc;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            }
            if fa.abs() < 1e-15 || fb.abs() < 1e-15 {
                break;
            }
        }
        let c = if fa.abs() < fb.abs() { a } else { b };
        (c, iterations)
    }

    fn range_on(&self, f: &[f64], y: Enclosure) -> (f64, f64) {
        let (i0, r0) = self.locate(y.lo);
        let (i1, r1) = self.locate(y.hi);
        let (a, b) = (Self::interp(f, (i0, r0)), Self::interp(f, (i1, r1)));
        let (mut lo, mut hi) = (a.min(b), a.max(b));
        for v in &f[i0 + 1..=i1] {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        (lo, hi)
    }

    /// Bounds `(λ_lo(t), λ_hi(t))` on `e^{P(t)}` from the test function `f`.
    fn bounds(&self, ranges: &[(f64, f64)], f: &[f64], t: f64, want_lower: bool) -> f64 {
        let n = self.sys.n();
        let per_cell = (0..self.cells()).into_par_iter().map(|j| {
            let (fl, fr) = (f[j], f[j + 1]);
            let s: f64 = (0..n)
                .map(|k| {
                    let d = self.cell_deriv[j * n + k];
                    let (lo, hi) = ranges[j * n + k];
                    if want_lower {
                        d.lo.powf(t) * lo
                    } else {
                        d.hi.powf(t) * hi
                    }
                })
                .sum();
            if want_lower {
                s / fl.max(fr)
            } else {
                s / fl.min(fr)
            }
        });
        if want_lower {
            per_cell.reduce(|| f64::INFINITY, f64::min) * (1.0 - OPERATOR_MARGIN)
        } else {
            per_cell.reduce(|| 0.0, f64::max) * (1.0 + OPERATOR_MARGIN)
        }
    }

    fn certify(&self, f: &[f64], center: f64, iterations: &mut usize) -> Enclosure {
        let ranges: Vec<(f64, f64)> = self.cell_image.par_iter().map(|&y| self.range_on(f, y)).collect();
        let below = |t: f64| t <= 0.0 || self.bounds(&ranges, f, t, true) > 1.0;
        let above = |t: f64| t >= 1.0 || self.bounds(&ranges, f, t, false) < 1.0;
        let lo = Self::expand(center, -1.0, &below, iterations).max(0.0);
        let hi = Self::expand(center, 1.0, &above, iterations).min(1.0);
        Enclosure::new(lo, hi)
    }

    /// Walks away from `center` with doubling steps until `ok` holds, then
    /// bisects back toward the center.
    fn expand(center: f64, dir: f64, ok: &dyn Fn(f64) -> bool, iterations: &mut usize) -> f64 {
        let mut inner = 0.0;
        let mut delta = 1e-10;
        loop {
            *iterations += 1;
            if ok(center + dir * delta) {
                break;
            }
            inner = delta;
            delta *= 2.0;
        }
        for _ in 0..8 {
            *iterations += 1;
            let mid = 0.5 * (inner + delta);
            if ok(center + dir * mid) {
                delta = mid;
            } else {
                inner = mid;
            }
        }
        center + dir * delta
    }
}

/// Upper bound on `1 − h_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBound {
    pub n: usize,
    pub t: f64,
    pub bound: f64,
    /// Upper bound on `Σ_{k>n} a_k^t`.
    pub numerator: f64,
    /// Lower bound on `Σ_k a_k ln(1/a_k)`.
    pub denominator: f64,
    pub tail_terms: usize,
    pub tail_remainder_bound: f64,
    /// Set when `t > h_n`, where the bound is not guaranteed.
    pub caveat: Option<String>,
}

/// Number of explicitly summed terms for power-family series.
pub const SERIES_TERMS: usize = 100_000;

const SERIES_MARGIN: f64 = 1e-9;

/// Smallest exponent for which the tail series converges.
pub fn t_min_valid(spec: &FamilySpec) -> Result<f64> {
    match spec {
        FamilySpec::Geometric { .. } => Ok(0.0),
        FamilySpec::Power { alpha, .. } => Ok(1.0 / (alpha + 1.0)),
        FamilySpec::Luroth { .. } => Ok(0.5),
        FamilySpec::Table { .. } => Err(Error::Unavailable("table".into())),
        FamilySpec::Gauss { .. } | FamilySpec::GaussSquared { .. } => Err(Error::NotLinear),
    }
}

/// `max(t_min_valid + 0.01, 0.9)`.
pub fn default_t(spec: &FamilySpec) -> Result<f64> {
    Ok((t_min_valid(spec)? + 0.01).max(0.9))
}

/// `(Σ_{k>n} a_k^t) / (Σ_k a_k ln(1/a_k))`, an upper bound on `1 − h_n`
/// whenever `t ≤ h_n`.
pub fn dim_gap_bound(spec: &FamilySpec, n: usize, t: f64) -> Result<GapBound> {
    if !(t.is_finite() && t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidT(t));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be ≥ 1".into()));
    }
    let seq = spec.sequence()?;
    let (numerator, denominator, tail_terms, tail_remainder_bound) = match spec {
        FamilySpec::Geometric { q, .. } => {
            let num = (t * (1.0 - q).ln() + t * n as f64 * q.ln()).exp() / -(t * q.ln()).exp_m1();
            let den = -(1.0 - q).ln() - q * q.ln() / (1.0 - q);
            (num, den, 0, 0.0)
        }
        FamilySpec::Power { alpha, .. } => power_series(&seq, *alpha, n, t)?,
        FamilySpec::Luroth { .. } => power_series(&seq, 1.0, n, t)?,
        FamilySpec::Table { .. } => return Err(Error::Unavailable("table".into())),
        FamilySpec::Gauss { .. } | FamilySpec::GaussSquared { .. } => return Err(Error::NotLinear),
    };
    let numerator = numerator * (1.0 + SERIES_MARGIN);
    let denominator = denominator * (1.0 - SERIES_MARGIN);
    let h = solve_moran(&build_system(spec, n)?)?.h;
    let caveat = (t > h.hi).then(|| format!("t = {t} exceeds h_n ≤ {}; the bound is not guaranteed", h.hi));
    Ok(GapBound {
        n,
        t,
        bound: numerator / denominator,
        numerator,
        denominator,
        tail_terms,
        tail_remainder_bound,
        caveat,
    })
}

fn power_series(seq: &crate::ifs::SequenceB, alpha: f64, n: usize, t: f64) -> Result<(f64, f64, usize, f64)> {
    let s = t * (alpha + 1.0);
    if s <= 1.0 {
        return Err(Error::SeriesDivergence(format!(
            "t(alpha+1) = {s} ≤ 1 for alpha = {alpha}, t = {t}"
        )));
    }
    let last = SERIES_TERMS.max(n);
    let partial: f64 = (n + 1..=last).map(|k| seq.gap(k).unwrap().powf(t)).sum();
    // a_k ≤ alpha k^{-alpha-1}, and Σ_{k>M} k^{-s} ≤ M^{1-s}/(s-1).
    let remainder = alpha.powf(t) * (last as f64).powf(1.0 - s) / (s - 1.0);
    let den: f64 = (1..=SERIES_TERMS)
        .map(|k| {
            let a = seq.gap(k).unwrap();
            -a * a.ln()
        })
        .sum();
    Ok((partial + remainder, den, last - n, remainder))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Row {
    pub n: usize,
    pub h: Enclosure,
    /// `(1 − h_n) ln n`
    pub product: Enclosure,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Report {
    pub rows: Vec<C1Row>,
    /// Upper ends of the products strictly decrease over the second half of
    /// the rows.
    pub monotone_decreasing_trend: bool,
}

pub fn c1_diagnostic(spec: &FamilySpec, n_list: &[usize], method: Method) -> Result<C1Report> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("n list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n list must be strictly ascending".into()));
    }
    let rows = n_list
        .iter()
        .map(|&n| {
            let sys = build_system(spec, n)?;
            let h = solve(&sys, method)?.h;
            let ln = (n as f64).ln();
            let product = Enclosure::new(((1.0 - h.hi) * ln).max(0.0), (1.0 - h.lo) * ln);
            Ok(C1Row {
                n,
                h,
                product,
                degenerate: n == 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = &rows[rows.len() / 2..];
    let monotone_decreasing_trend = tail.len() >= 2 && tail.windows(2).all(|w| w[1].product.hi < w[0].product.hi);
    Ok(C1Report {
        rows,
        monotone_decreasing_trend,
    })
}

/// Convenience: the Moran root for small tests and examples.
pub fn moran_dimension(spec: &FamilySpec, n: usize) -> Result<Enclosure> {
    Ok(solve_moran(&build_system(spec, n)?)?.h)
}

/// Budgeted default for [`word_pressure`].
pub fn word_pressure_default(sys: &TruncatedSystem, depth: usize) -> Result<DimensionResult> {
    word_pressure(sys, depth, DEFAULT_ENUMERATION_BUDGET)
}
