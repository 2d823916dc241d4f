//! The normalized measure `m_n` on `J_n`, interval measures, densities and
//! the Hausdorff measure estimate `H_{h_n}(J_n) = 1 / sup density`.
//!
//! For a linear system `m_n` is self-similar with first-level weights
//! `p_k = a_k^{h_n}`. For a nonlinear system it is the `h_n`-conformal
//! measure, `m(g_k(A)) = ∫_A |g_k'|^{h_n} dm`, and every mass is an enclosure
//! built from derivative ranges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::dimension::{solve, solve_moran, Method};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::families::{build_system, FamilySpec};
use crate::ifs::{enumerate_generation, word_count, word_derivative_bounds_on, TruncatedSystem, Word};

/// Recursion depth after which pending mass is bounded rather than resolved.
const MAX_RECURSION: usize = 400;

/// Default node budget for the density search.
pub const DEFAULT_NODE_BUDGET: usize = 500_000;

/// Local width beyond which a pulled-back endpoint is no longer resolved.
const WIDE_ENDPOINT: f64 = 1e-3;

/// Endpoint enclosures wider than this are split off and measured afresh.
const RESET_WIDTH: f64 = 1e-7;

/// Tolerance used when re-evaluating density witnesses.
const WITNESS_TOL: f64 = 1e-13;

/// Relative slack added to the floating-point upper bound of the search.
const SEARCH_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct MeasureQuery<'a> {
    pub sys: &'a TruncatedSystem,
    pub h: Enclosure,
    pub interval: (f64, f64),
    pub tolerance: f64,
}

impl<'a> MeasureQuery<'a> {
    pub fn new(sys: &'a TruncatedSystem, h: Enclosure, s: f64, t: f64, tolerance: f64) -> Self {
        MeasureQuery {
            sys,
            h,
            interval: (s, t),
            tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntervalFamily {
    /// `[0, r]`
    ZeroAnchored,
    /// `[b_{p+q}, b_p]`
    Grid { p: usize, q: usize },
    /// Endpoints taken from two cylinders of the search.
    CylinderAnchored,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub interval: (f64, f64),
    pub measure: Enclosure,
    pub density: Enclosure,
    pub family: IntervalFamily,
}

/// Precomputed first-level masses.
struct Model<'a> {
    sys: &'a TruncatedSystem,
    h: Enclosure,
    hull: Enclosure,
    /// Enclosure of `g_k(hull)`.
    images: Vec<Enclosure>,
    /// `m(g_k(J))`.
    first: Vec<Enclosure>,
}

impl<'a> Model<'a> {
    fn new(sys: &'a TruncatedSystem, h: Enclosure) -> Result<Self> {
        if !(h.lo >= 0.0 && h.hi <= 1.0) {
            return Err(Error::InvalidParameter(format!("dimension {h} outside [0,1]")));
        }
        let hull = sys.hull();
        // g_k(J) ⊂ J, so the images can be clipped to the hull.
        let images = (1..=sys.n())
            .map(|k| sys.image_of(k, hull).intersect(&hull).unwrap_or(hull))
            .collect();
        let first = (1..=sys.n())
            .map(|k| cylinder_measure(sys, h, &Word::new([k])))
            .collect::<Result<_>>()?;
        Ok(Model {
            sys,
            h,
            hull,
            images,
            first,
        })
    }

    /// Enclosure of `∫_{[s,t]} φ dm` for all `s ∈ s_enc`, `t ∈ t_enc`, where
    /// `φ` takes values in `factor` on the hull.
    fn rec(&self, s: Enclosure, t: Enclosure, factor: Enclosure, tol: f64, depth: usize) -> Enclosure {
        let x = self.hull;
        if t.hi < x.lo || s.lo > x.hi {
            return Enclosure::ZERO;
        }
        if s.hi <= x.lo && t.lo >= x.hi {
            return factor;
        }
        if self.sys.is_linear() && s.lo <= x.lo && s.hi > x.lo {
            let inner = self.rec(Enclosure::point(x.lo), t, factor, tol, depth);
            let cut = factor.hi * self.extreme_mass(s.hi - x.lo);
            return Enclosure::new((inner.lo - cut).max(0.0), inner.hi);
        }
        if self.sys.is_linear() && t.lo < x.hi && t.hi >= x.hi {
            let inner = self.rec(s, Enclosure::point(x.hi), factor, tol, depth);
            let cut = factor.hi * self.extreme_mass(x.hi - t.lo);
            return Enclosure::new((inner.lo - cut).max(0.0), inner.hi);
        }
        if factor.hi > tol && depth < MAX_RECURSION {
            // m([s,t]) over s ∈ [s.lo, s.hi] lies in m([s.hi,t]) + [0, m([s.lo,s.hi])];
            // both pieces restart from exact endpoints.
            if s.width() > RESET_WIDTH && s.hi < t.lo {
                let inner = self.rec(Enclosure::point(s.hi), t, factor, tol / 2.0, depth + 1);
                let piece = self.rec(Enclosure::point(s.lo), Enclosure::point(s.hi), factor, tol / 2.0, depth + 1);
                return inner + Enclosure::new(0.0, piece.hi);
            }
            if t.width() > RESET_WIDTH && s.hi < t.lo {
                let inner = self.rec(s, Enclosure::point(t.lo), factor, tol / 2.0, depth + 1);
                let piece = self.rec(Enclosure::point(t.lo), Enclosure::point(t.hi), factor, tol / 2.0, depth + 1);
                return inner + Enclosure::new(0.0, piece.hi);
            }
        }
        if factor.hi <= tol || depth >= MAX_RECURSION || s.width() > WIDE_ENDPOINT || t.width() > WIDE_ENDPOINT {
            return Enclosure::new(0.0, factor.hi);
        }
        let sys = self.sys;
        let mut total = Enclosure::ZERO;
        let mut partial = Vec::new();
        for k in 1..=sys.n() {
            let img = self.images[k - 1];
            if t.hi < img.lo || s.lo > img.hi {
                continue;
            }
            if s.hi <= img.lo && t.lo >= img.hi {
                total = total + factor * self.first[k - 1];
            } else {
                partial.push(k);
            }
        }
        let share = tol / partial.len().max(1) as f64;
        for k in partial {
            let (lo, hi) = sys.image(k);
            let img = self.images[k - 1];
            // An endpoint beyond the image pulls back to the matching end of
            // the hull, which is kept exact.
            let (below, above) = if sys.reverses() { (x.hi, x.lo) } else { (x.lo, x.hi) };
            let ps = if s.hi <= img.lo {
                Enclosure::point(below)
            } else {
                sys.preimage_of(k, s.clamp(lo, hi))
            };
            let pt = if t.lo >= img.hi {
                Enclosure::point(above)
            } else {
                sys.preimage_of(k, t.clamp(lo, hi))
            };
            let (ls, lt) = if sys.reverses() { (pt, ps) } else { (ps, pt) };
            let Some(region) = Enclosure::new(ls.lo, lt.hi).intersect(&x) else {
                continue;
            };
            let weight = if sys.is_linear() {
                self.first[k - 1]
            } else {
                sys.deriv_range(k, region).powe(self.h)
            };
            total = total + self.rec(ls, lt, factor * weight, share, depth + 1);
        }
        total
    }
}

impl Model<'_> {
    /// Upper bound on the mass of `[min J, min J + δ]` and of
    /// `[max J − δ, max J]` for linear systems. The cylinders of the words
    /// `n1n1…` and `1n1n…` end at the extremes of `J`, shrink by at least
    /// `min(a_1, a_n)` per letter, and have mass `(length/|hull|)^h`.
    fn extreme_mass(&self, delta: f64) -> f64 {
        let n = self.sys.n();
        let shrink = self.sys.gap(1).min(self.sys.gap(n));
        let ratio = delta / (shrink * self.hull.width() * (1.0 - 1e-12));
        let bound = Enclosure::point(ratio * (1.0 + 1e-12)).powe(Enclosure::point(self.h.lo)).hi;
        bound.min(1.0)
    }
}

fn check_h(h: Enclosure) -> Result<()> {
    if h.lo >= 0.0 && h.hi <= 1.0 && h.lo <= h.hi {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dimension {h} outside [0,1]")))
    }
}

/// `m_n(g_w(J_n))`.
///
/// Linear systems give `(Π a_{w_j})^h`. Nonlinear systems bound each
/// cylinder by `(inf|g_w'|)^h ≤ m ≤ (sup|g_w'|)^h` over the hull and then
/// tighten level by level using that sibling masses sum to the parent mass.
pub fn cylinder_measure(sys: &TruncatedSystem, h: Enclosure, w: &Word) -> Result<Enclosure> {
    w.validate(sys)?;
    check_h(h)?;
    if w.is_empty() {
        return Ok(Enclosure::ONE);
    }
    if sys.is_linear() {
        let prod = w
            .letters()
            .iter()
            .fold(Enclosure::ONE, |acc, &k| acc * Enclosure::point(sys.gap(k)));
        return Ok(prod.powe(h).clamp(0.0, 1.0));
    }
    let hull = sys.hull();
    let mut parent = Enclosure::ONE;
    let mut prefix = Vec::with_capacity(w.len());
    for &k in w.letters() {
        let direct: Vec<Enclosure> = (1..=sys.n())
            .map(|j| {
                let mut v = prefix.clone();
                v.push(j);
                word_derivative_bounds_on(sys, &Word(v), hull).map(|d| d.powe(h))
            })
            .collect::<Result<_>>()?;
        let others_lo: f64 = direct.iter().enumerate().filter(|(j, _)| j + 1 != k).map(|(_, d)| d.lo).sum();
        let others_hi: f64 = direct.iter().enumerate().filter(|(j, _)| j + 1 != k).map(|(_, d)| d.hi).sum();
        let rest = Enclosure::new(parent.lo - others_hi, parent.hi - others_lo);
        let rest = Enclosure::new(rest.lo - 4.0 * f64::EPSILON, rest.hi + 4.0 * f64::EPSILON);
        let own = direct[k - 1];
        parent = own.intersect(&rest).unwrap_or(own).clamp(0.0, parent.hi);
        prefix.push(k);
    }
    Ok(parent)
}

fn check_query(q: &MeasureQuery) -> Result<()> {
    let (s, t) = q.interval;
    if !(s.is_finite() && t.is_finite() && 0.0 <= s && s < t && t <= 1.0) {
        return Err(Error::InvalidInterval(s, t));
    }
    if !(q.tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", q.tolerance)));
    }
    check_h(q.h)
}

/// Enclosure of `m_n([s,t])` of width at most the tolerance plus rounding.
pub fn interval_measure(q: &MeasureQuery) -> Result<Enclosure> {
    check_query(q)?;
    let model = Model::new(q.sys, q.h)?;
    let (s, t) = q.interval;
    let m = model.rec(Enclosure::point(s), Enclosure::point(t), Enclosure::ONE, q.tolerance, 0);
    Ok(m.clamp(0.0, 1.0))
}

fn classify(sys: &TruncatedSystem, s: f64, t: f64) -> IntervalFamily {
    if s == 0.0 {
        return IntervalFamily::ZeroAnchored;
    }
    if sys.sequence().is_some() && matches!(sys.kind(), crate::ifs::MapKind::Affine | crate::ifs::MapKind::Gauss) {
        let n = sys.n();
        if let (Some(p), Some(r)) = ((0..=n).find(|&j| sys.b(j) == t), (0..=n).find(|&j| sys.b(j) == s)) {
            if r > p {
                return IntervalFamily::Grid { p, q: r - p };
            }
        }
    }
    IntervalFamily::General
}

/// `m_n([s,t]) / (t − s)^{h_n}` with outward rounding.
pub fn density(q: &MeasureQuery) -> Result<DensityReport> {
    let measure = interval_measure(q)?;
    let (s, t) = q.interval;
    let diam = (Enclosure::point(t) - Enclosure::point(s)).clamp(f64::MIN_POSITIVE, 1.0);
    let density = (measure / diam.powe(q.h)).clamp(0.0, f64::INFINITY);
    Ok(DensityReport {
        interval: (s, t),
        measure,
        density,
        family: classify(q.sys, s, t),
    })
}

/// Result of the density-supremum search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupDensity {
    /// Best interval found, re-evaluated with [`density`].
    pub best: DensityReport,
    /// Lower bound on the supremum (`best.density.lo`).
    pub lower: f64,
    /// Upper bound on the supremum; infinite when no certificate exists.
    pub upper: f64,
    pub nodes: usize,
    pub budget_exhausted: bool,
    /// Set for nonlinear systems, where the search is not certified.
    pub heuristic: bool,
}

/// An affine image `x ↦ c + s x` of the hull with its measure data.
#[derive(Debug, Clone, Copy)]
struct Piece {
    c: f64,
    s: f64,
    /// Mass to the left of the piece.
    left_mass: f64,
    mass: f64,
    depth: usize,
    /// Index into the search arena.
    id: u32,
}

struct Search<'a> {
    sys: &'a TruncatedSystem,
    h: f64,
    p: Vec<f64>,
    /// Mass of the cylinders with larger (left of `k`) and smaller index.
    left_of: Vec<f64>,
    right_of: Vec<f64>,
    xmin: f64,
    xmax: f64,
    /// `(parent id, letter)` for every piece created.
    arena: std::cell::RefCell<Vec<(u32, u16)>>,
}

impl<'a> Search<'a> {
    fn new(sys: &'a TruncatedSystem, h: f64) -> Self {
        let n = sys.n();
        let p: Vec<f64> = sys.gaps().iter().map(|a| a.powf(h)).collect();
        let left_of = (1..=n).map(|k| p[k..].iter().sum()).collect();
        let right_of = (1..=n).map(|k| p[..k - 1].iter().sum()).collect();
        let hull = sys.hull();
        Search {
            sys,
            h,
            p,
            left_of,
            right_of,
            xmin: hull.lo,
            xmax: hull.hi,
            arena: std::cell::RefCell::new(vec![(0, 0)]),
        }
    }

    fn word(&self, a: &Piece) -> Word {
        let arena = self.arena.borrow();
        let mut letters = Vec::with_capacity(a.depth);
        let mut id = a.id;
        while id != 0 {
            let (parent, k) = arena[id as usize];
            letters.push(k as usize);
            id = parent;
        }
        letters.reverse();
        Word(letters)
    }

    fn root() -> Piece {
        Piece {
            c: 0.0,
            s: 1.0,
            left_mass: 0.0,
            mass: 1.0,
            depth: 0,
            id: 0,
        }
    }

    fn child(&self, a: &Piece, k: usize) -> Piece {
        let extra = if a.s > 0.0 { self.left_of[k - 1] } else { self.right_of[k - 1] };
        let id = {
            let mut arena = self.arena.borrow_mut();
            arena.push((a.id, k as u16));
            (arena.len() - 1) as u32
        };
        Piece {
            id,
            c: a.c + a.s * self.sys.b(k - 1),
            s: -a.s * self.sys.gap(k),
            left_mass: a.left_mass + a.mass * extra,
            mass: a.mass * self.p[k - 1],
            depth: a.depth + 1,
        }
    }

    /// As [`Search::child`] without recording the word.
    fn plain_child(&self, a: &Piece, k: usize) -> Piece {
        let extra = if a.s > 0.0 { self.left_of[k - 1] } else { self.right_of[k - 1] };
        Piece {
            id: 0,
            c: a.c + a.s * self.sys.b(k - 1),
            s: -a.s * self.sys.gap(k),
            left_mass: a.left_mass + a.mass * extra,
            mass: a.mass * self.p[k - 1],
            depth: a.depth + 1,
        }
    }

    fn ends(&self, a: &Piece, lo: f64, hi: f64) -> (f64, f64) {
        let (u, v) = (a.c + a.s * lo, a.c + a.s * hi);
        (u.min(v), u.max(v))
    }

    fn hull_ends(&self, a: &Piece) -> (f64, f64) {
        self.ends(a, self.xmin, self.xmax)
    }

    fn dens(&self, mass: f64, s: f64, t: f64) -> f64 {
        if t > s {
            mass / (t - s).powf(self.h)
        } else {
            0.0
        }
    }

    /// Best of the four endpoint combinations and the pair's upper bound.
    fn pair(&self, a: &Piece, b: &Piece) -> ((f64, bool, bool), f64) {
        let (al, ar) = self.hull_ends(a);
        let (bl, br) = self.hull_ends(b);
        let fa = [(al, a.left_mass, false), (ar, a.left_mass + a.mass, true)];
        let fb = [(bl, b.left_mass, false), (br, b.left_mass + b.mass, true)];
        let mut best = (0.0, false, false);
        for &(s, ms, sa) in &fa {
            for &(t, mt, tb) in &fb {
                let d = self.dens(mt - ms, s, t);
                if d > best.0 {
                    best = (d, sa, tb);
                }
            }
        }
        let gap = bl - ar;
        let ub = if gap > 0.0 {
            (b.left_mass + b.mass - a.left_mass) / gap.powf(self.h)
        } else {
            f64::INFINITY
        };
        (best, ub)
    }
}

#[derive(Debug)]
struct Node {
    ub: f64,
    seq: usize,
    a: Piece,
    b: Piece,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        self.ub.total_cmp(&o.ub).then_with(|| o.seq.cmp(&self.seq))
    }
}

/// Largest `l ≤ depth` with `Σ_{i≤l} n^i ≤ cap`.
fn capped_depth(n: usize, depth: usize, cap: u128) -> usize {
    let mut total = 0u128;
    let mut l = 0;
    while l < depth {
        total = total.saturating_add(word_count(n, l + 1));
        if total > cap {
            break;
        }
        l += 1;
    }
    l.max(1)
}

/// Supremum of the density over closed intervals.
///
/// Linear systems: every interval meeting `J_n` in more than one first-level
/// cylinder is bracketed by a pair of hull images `A` (left) and `B` (right)
/// lying in different first-level cylinders, and intervals inside a single
/// cylinder reduce to these by self-similarity. The search is best-first over
/// such pairs, refining the larger member, with the bound
/// `m([A.left, B.right]) / (B.left − A.right)^h`. Zero-anchored intervals
/// `[0, r]` over cylinder endpoints and grid intervals `[b_{p+q}, b_p]` are
/// also scored.
pub fn sup_density(sys: &TruncatedSystem, h: Enclosure, depth: usize, budget: usize) -> Result<SupDensity> {
    if depth < 1 {
        return Err(Error::InvalidDepth(depth));
    }
    check_h(h)?;
    if sys.n() == 1 {
        return Err(Error::InvalidParameter("a single map has a one-point limit set".into()));
    }
    if !sys.is_linear() {
        return sup_density_nonlinear(sys, h, depth);
    }
    let search = Search::new(sys, h.mid());
    let n = sys.n();
    let mut best = (0.0, Witness::Plain(0.0, 1.0));
    let offer = |best: &mut (f64, Witness), d: f64, w: Witness| {
        if d > best.0 {
            *best = (d, w);
        }
    };

    // Grid intervals [b_{p+q}, b_p].
    for p in 0..n {
        let mut mass = 0.0;
        for q in 1..=n - p {
            mass += search.p[p + q - 1];
            let (s, t) = (sys.b(p + q), sys.b(p));
            offer(&mut best, search.dens(mass, s, t), Witness::Plain(s, t));
        }
    }

    // Zero-anchored intervals [0, r] over cylinder endpoints.
    let zdepth = capped_depth(n, depth, 200_000);
    let mut stack = vec![Search::root()];
    while let Some(a) = stack.pop() {
        if a.depth > 0 {
            let (l, r) = search.ends(&a, 0.0, 1.0);
            offer(&mut best, search.dens(a.left_mass, 0.0, l), Witness::Plain(0.0, l));
            offer(&mut best, search.dens(a.left_mass + a.mass, 0.0, r), Witness::Plain(0.0, r));
        }
        if a.depth < zdepth {
            stack.extend((1..=n).map(|k| search.plain_child(&a, k)));
        }
    }

    // Pairs of hull images.
    let root = Search::root();
    let first: Vec<Piece> = (1..=n).map(|k| search.child(&root, k)).collect();
    let mut heap = BinaryHeap::new();
    let mut created = 0usize;
    let mut push = |heap: &mut BinaryHeap<Node>, best: &mut (f64, Witness), a: Piece, b: Piece| {
        let ((d, a_right, b_right), ub) = search.pair(&a, &b);
        if d > best.0 {
            *best = (d, Witness::Pair { a, b, a_right, b_right });
        }
        if ub > best.0 {
            created += 1;
            heap.push(Node { ub, seq: created, a, b });
        }
    };
    for i in (1..=n).rev() {
        for j in 1..i {
            push(&mut heap, &mut best, first[i - 1], first[j - 1]);
        }
    }
    let mut nodes = 0;
    let mut leaf_ub: f64 = 0.0;
    let mut budget_exhausted = false;
    while let Some(node) = heap.pop() {
        if node.ub <= best.0 {
            heap.push(node);
            break;
        }
        if nodes * n >= budget {
            budget_exhausted = true;
            heap.push(node);
            break;
        }
        let (a, b) = (node.a, node.b);
        let split_a = match (a.depth < depth, b.depth < depth) {
            (false, false) => {
                leaf_ub = leaf_ub.max(node.ub);
                continue;
            }
            (true, false) => true,
            (false, true) => false,
            (true, true) => a.s.abs() >= b.s.abs(),
        };
        nodes += 1;
        for k in 1..=n {
            if split_a {
                push(&mut heap, &mut best, search.child(&a, k), b);
            } else {
                push(&mut heap, &mut best, a, search.child(&b, k));
            }
        }
    }
    let top = heap.peek().map_or(0.0, |n| n.ub);
    let upper = best.0.max(leaf_ub).max(top) * (1.0 + SEARCH_MARGIN);

    let report = match best.1 {
        Witness::Plain(s, t) => density(&MeasureQuery::new(sys, h, s, t, WITNESS_TOL))?,
        Witness::Pair { a, b, a_right, b_right } => {
            pair_density(sys, h, &search.word(&a), a_right, &search.word(&b), b_right)
        }
    };
    Ok(SupDensity {
        lower: report.density.lo,
        upper: upper.max(report.density.hi),
        best: report,
        nodes,
        budget_exhausted,
        heuristic: false,
    })
}

#[derive(Debug, Clone, Copy)]
enum Witness {
    Plain(f64, f64),
    Pair { a: Piece, b: Piece, a_right: bool, b_right: bool },
}

/// Density of the interval running from an end of the hull image `g_wa(X)` to
/// an end of `g_wb(X)`, with `g_wa(X)` to the left. Both ends are points of
/// `J_n`, so the mass follows from the words alone; the endpoints are carried
/// as enclosures of the exact points.
fn pair_density(sys: &TruncatedSystem, h: Enclosure, wa: &Word, a_right: bool, wb: &Word, b_right: bool) -> DensityReport {
    let n = sys.n();
    let p: Vec<Enclosure> = sys.gaps().iter().map(|&a| Enclosure::point(a).powe(h)).collect();
    let (a1, an) = (Enclosure::point(sys.gap(1)), Enclosure::point(sys.gap(n)));
    let min_j = Enclosure::point(sys.b(n)) / (1.0 - a1 * an);
    let max_j = 1.0 - a1 * min_j;
    let end = |w: &Word, right: bool| -> (Enclosure, Enclosure) {
        // Orientation flips with every letter; the left end of g_w(X) is
        // g_w(min J) for even length.
        let from = if (w.len() % 2 == 0) != right { min_j } else { max_j };
        let x = w.letters().iter().rev().fold(from, |y, &k| sys.image_of(k, y));
        let (mut left, mut mass, mut preserving) = (Enclosure::ZERO, Enclosure::ONE, true);
        for &k in w.letters() {
            let side: Enclosure = if preserving { p[k..].iter().copied().sum() } else { p[..k - 1].iter().copied().sum() };
            left = left + mass * side;
            mass = mass * p[k - 1];
            preserving = !preserving;
        }
        (x, if right { left + mass } else { left })
    };
    let (s, fs) = end(wa, a_right);
    let (t, ft) = end(wb, b_right);
    let measure = (ft - fs).clamp(0.0, 1.0);
    let diam = (t - s).clamp(f64::MIN_POSITIVE, 1.0);
    DensityReport {
        interval: (s.mid(), t.mid()),
        measure,
        density: (measure / diam.powe(h)).clamp(0.0, f64::INFINITY),
        family: IntervalFamily::CylinderAnchored,
    }
}

/// Candidate scan for nonlinear systems; no upper certificate.
fn sup_density_nonlinear(sys: &TruncatedSystem, h: Enclosure, depth: usize) -> Result<SupDensity> {
    let n = sys.n();
    let hull = sys.hull();
    let tol = 1e-9;
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    // First-level images sorted by position; spans of consecutive runs play
    // the role of grid intervals, and [0, r] runs over their endpoints.
    let mut imgs: Vec<(f64, f64)> = (1..=n).map(|k| sys.image(k)).collect();
    imgs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for i in 0..n {
        for j in i..n {
            candidates.push((imgs[i].0, imgs[j].1));
        }
        candidates.push((0.0, imgs[i].1));
    }
    // Hull images of shallow words, paired across first-level cylinders.
    let zdepth = capped_depth(n, depth.min(2), 64);
    let mut hulls: Vec<(usize, Enclosure)> = Vec::new();
    for l in 1..=zdepth {
        for c in enumerate_generation(sys, l)? {
            let img = c.word.letters().iter().rev().fold(hull, |y, &k| sys.image_of(k, y));
            hulls.push((c.word.letters()[0], img));
        }
    }
    for (i, a) in &hulls {
        for (j, b) in &hulls {
            if i != j && a.hi < b.lo {
                candidates.push((a.lo.max(0.0), b.hi.min(1.0)));
            }
        }
    }
    candidates.push((hull.lo.max(0.0), hull.hi.min(1.0)));
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    candidates.dedup();
    let reports: Vec<DensityReport> = candidates
        .iter()
        .filter(|(s, t)| s < t)
        .map(|&(s, t)| density(&MeasureQuery::new(sys, h, s, t, tol)))
        .collect::<Result<_>>()?;
    let best = reports
        .into_iter()
        .max_by(|a, b| a.density.mid().total_cmp(&b.density.mid()))
        .expect("at least the hull is a candidate");
    Ok(SupDensity {
        lower: best.density.lo,
        upper: f64::INFINITY,
        nodes: candidates.len(),
        best,
        budget_exhausted: false,
        heuristic: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffEstimate {
    pub n: usize,
    pub h: Enclosure,
    #[serde(rename = "H_lower")]
    pub h_lower: f64,
    #[serde(rename = "H_upper")]
    pub h_upper: f64,
    pub witness_interval: Option<(f64, f64)>,
    pub search_depth: usize,
    /// `Σ_{F ∈ F_l} |F|^h` at the deepest affordable generation (linear only).
    pub cover_sum: Option<f64>,
    /// `H_upper ≤ 1 + 1e-8` and the cover sum equals 1 within `1e-8`.
    pub cover_consistent: bool,
    pub heuristic: bool,
    pub degenerate: bool,
}

/// `H_{h_n}(J_n)` bracketed as `1/upper ≤ H ≤ 1/lower` from [`sup_density`].
pub fn hausdorff_estimate(sys: &TruncatedSystem, h: Enclosure, depth: usize) -> Result<HausdorffEstimate> {
    if sys.n() == 1 {
        return Ok(HausdorffEstimate {
            n: 1,
            h: Enclosure::ZERO,
            h_lower: 1.0,
            h_upper: 1.0,
            witness_interval: None,
            search_depth: 0,
            cover_sum: None,
            cover_consistent: true,
            heuristic: false,
            degenerate: true,
        });
    }
    let sd = sup_density(sys, h, depth, DEFAULT_NODE_BUDGET)?;
    let h_upper = if sd.lower > 0.0 { 1.0 / sd.lower } else { f64::INFINITY };
    let h_lower = if sd.upper.is_finite() { (1.0 / sd.upper).min(h_upper) } else { 0.0 };
    let (cover, cover_consistent) = if sys.is_linear() {
        let l = capped_depth(sys.n(), depth, 1_000_000);
        let cs = cover_sum(sys, h.mid(), l)?;
        (Some(cs), (cs - 1.0).abs() <= 1e-8 && h_upper <= 1.0 + 1e-8)
    } else {
        (None, false)
    };
    Ok(HausdorffEstimate {
        n: sys.n(),
        h,
        h_lower,
        h_upper,
        witness_interval: Some(sd.best.interval),
        search_depth: depth,
        cover_sum: cover,
        cover_consistent,
        heuristic: sd.heuristic,
        degenerate: false,
    })
}

/// `Σ_{F ∈ F_l^n} |F|^h` over the generation-`l` cylinders (compensated sum).
pub fn cover_sum(sys: &TruncatedSystem, h: f64, l: usize) -> Result<f64> {
    if !sys.is_linear() {
        return Err(Error::NotLinear);
    }
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for c in enumerate_generation(sys, l)? {
        let x = c.length.powf(h);
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    Ok(sum + comp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakStarRow {
    pub n: usize,
    pub x: f64,
    pub measure: Enclosure,
    /// Upper bound on `|m_n([0,x]) − x|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakStarReport {
    pub rows: Vec<WeakStarRow>,
    /// For every `x`, deviations never increase along the `n` list.
    pub converging: bool,
}

/// `m_n([0,x])` against Lebesgue measure for each `n` and `x`.
pub fn weak_star_diagnostic(spec: &FamilySpec, n_list: &[usize], x_list: &[f64]) -> Result<WeakStarReport> {
    if n_list.is_empty() || x_list.is_empty() {
        return Err(Error::InvalidParameter("empty n or x list".into()));
    }
    if let Some(&x) = x_list.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::InvalidInterval(0.0, x));
    }
    let mut rows = Vec::new();
    for &n in n_list {
        let sys = build_system(spec, n)?;
        let h = if sys.is_linear() {
            solve_moran(&sys)?.h
        } else {
            solve(&sys, Method::Pressure { depth: 8 })?.h
        };
        for &x in x_list {
            let measure = if n == 1 {
                // The limit set is the fixed point of g_1.
                let p = sys.hull().mid();
                Enclosure::point(if p <= x { 1.0 } else { 0.0 })
            } else {
                interval_measure(&MeasureQuery::new(&sys, h, 0.0, x, 1e-12))?
            };
            let deviation = (measure.lo - x).abs().max((measure.hi - x).abs());
            rows.push(WeakStarRow { n, x, measure, deviation });
        }
    }
    let converging = x_list.iter().all(|&x| {
        let devs: Vec<f64> = rows.iter().filter(|r| r.x == x).map(|r| r.deviation).collect();
        devs.windows(2).all(|w| w[1] <= w[0])
    });
    Ok(WeakStarReport { rows, converging })
}
