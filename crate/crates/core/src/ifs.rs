//! Truncated iterated function systems built from a decreasing sequence
//! `1 = b_0 > b_1 > b_2 > ... → 0`.
//!
//! Map `g_k` (1-based) sends `[0,1]` onto `[b_k, b_{k-1}]` and reverses
//! orientation. The second-iterate Gauss system is the one exception: its maps
//! are compositions of two decreasing maps and preserve orientation.

use std::sync::Arc;
use serde::{Deserialize, Serialize};

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};

/// Default cap on the number of cylinders a single enumeration may produce.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// The boundary sequence `b_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceB {
    /// `b_k = q^k`
    Geometric { q: f64 },
    /// `b_k = (k+1)^{-alpha}`
    Power { alpha: f64 },
    /// Explicit values starting at `b_0 = 1`; no tail rule.
    Table(Arc<[f64]>),
}

impl SequenceB {
    pub fn is_closed_form(&self) -> bool {
        !matches!(self, SequenceB::Table(_))
    }

    /// Largest index with a defined value, if the sequence is finite.
    pub fn last_index(&self) -> Option<usize> {
        match self {
            SequenceB::Table(t) => Some(t.len() - 1),
            _ => None,
        }
    }

    pub fn value(&self, k: usize) -> Option<f64> {
        match self {
            SequenceB::Geometric { q } => Some(q.powi(k as i32)),
            SequenceB::Power { alpha } => Some(((k + 1) as f64).powf(-alpha)),
            SequenceB::Table(t) => t.get(k).copied(),
        }
    }

    /// `a_k = b_{k-1} - b_k` for `k ≥ 1`, evaluated without cancellation for
    /// the closed forms.
    pub fn gap(&self, k: usize) -> Option<f64> {
        assert!(k >= 1, "gaps are indexed from 1");
        match self {
            SequenceB::Geometric { q } => Some(q.powi(k as i32 - 1) * (1.0 - q)),
            SequenceB::Power { alpha } => {
                let kf = k as f64;
                Some(kf.powf(-alpha) * -(-alpha * (1.0 / kf).ln_1p()).exp_m1())
            }
            SequenceB::Table(t) => Some(t.get(k - 1)? - t.get(k)?),
        }
    }
}

/// How the maps of a system are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// `g_k(x) = b_{k-1} - a_k x`
    Affine,
    /// `g_k(x) = 1/(k + x)`
    Gauss,
    /// `g_{(j,k)} = g_j ∘ g_k` of the Gauss system, pairs with `j, k ≤ base`
    /// flattened lexicographically.
    GaussSquared { base: usize },
}

/// The first-`n` system `S_n`.
#[derive(Debug, Clone)]
pub struct TruncatedSystem {
    n: usize,
    kind: MapKind,
    seq: Option<SequenceB>,
    b: Vec<f64>,
    gaps: Vec<f64>,
    hull: Enclosure,
}

impl TruncatedSystem {
    /// Builds a system from a boundary sequence. Callers validate the
    /// sequence; see `families::build_system`.
    pub(crate) fn from_sequence(seq: SequenceB, n: usize, kind: MapKind) -> Self {
        debug_assert!(matches!(kind, MapKind::Affine | MapKind::Gauss));
        let b: Vec<f64> = (0..=n).map(|k| seq.value(k).expect("sequence defined up to n")).collect();
        let gaps: Vec<f64> = (1..=n).map(|k| seq.gap(k).expect("gap defined up to n")).collect();
        let mut sys = Self {
            n,
            kind,
            seq: Some(seq),
            b,
            gaps,
            hull: Enclosure::UNIT,
        };
        sys.hull = sys.compute_hull();
        sys
    }

    pub(crate) fn gauss_squared(base: usize) -> Self {
        let n = base * base;
        let mut sys = Self {
            n,
            kind: MapKind::GaussSquared { base },
            seq: None,
            b: (0..=base).map(|k| 1.0 / (k + 1) as f64).collect(),
            gaps: Vec::new(),
            hull: Enclosure::UNIT,
        };
        sys.gaps = (1..=n)
            .map(|k| {
                let (lo, hi) = sys.image(k);
                hi - lo
            })
            .collect();
        sys.hull = sys.compute_hull();
        sys
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn is_linear(&self) -> bool {
        self.kind == MapKind::Affine
    }

    pub fn sequence(&self) -> Option<&SequenceB> {
        self.seq.as_ref()
    }

    /// `b_k` for `0 ≤ k ≤ n`. For the second-iterate Gauss system these are
    /// the boundaries of the underlying first-iterate system.
    pub fn b(&self, k: usize) -> f64 {
        self.b[k]
    }

    /// `a_k = |g_k([0,1])|` for `1 ≤ k ≤ n`.
    pub fn gap(&self, k: usize) -> f64 {
        self.gaps[k - 1]
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Enclosure of the convex hull of the limit set `J_n`.
    pub fn hull(&self) -> Enclosure {
        self.hull
    }

    /// The `(j, k)` pair behind a flattened second-iterate index.
    pub fn pair(&self, index: usize) -> Option<(usize, usize)> {
        match self.kind {
            MapKind::GaussSquared { base } => Some(((index - 1) / base + 1, (index - 1) % base + 1)),
            _ => None,
        }
    }

    pub fn check_letter(&self, k: usize) -> Result<()> {
        if (1..=self.n).contains(&k) {
            Ok(())
        } else {
            Err(Error::LetterOutOfRange { letter: k, n: self.n })
        }
    }

    pub fn eval(&self, k: usize, x: f64) -> f64 {
        match self.kind {
            MapKind::Affine => self.b[k - 1] - self.gaps[k - 1] * x,
            MapKind::Gauss => 1.0 / (k as f64 + x),
            MapKind::GaussSquared { .. } => {
                let (j, k) = self.pair(k).unwrap();
                1.0 / (j as f64 + 1.0 / (k as f64 + x))
            }
        }
    }

    /// Signed first derivative of `g_k`.
    pub fn deriv(&self, k: usize, x: f64) -> f64 {
        match self.kind {
            MapKind::Affine => -self.gaps[k - 1],
            MapKind::Gauss => -1.0 / ((k as f64 + x) * (k as f64 + x)),
            MapKind::GaussSquared { .. } => {
                let (j, k) = self.pair(k).unwrap();
                let d = j as f64 * (k as f64 + x) + 1.0;
                1.0 / (d * d)
            }
        }
    }

    pub fn deriv2(&self, k: usize, x: f64) -> f64 {
        match self.kind {
            MapKind::Affine => 0.0,
            MapKind::Gauss => 2.0 / (k as f64 + x).powi(3),
            MapKind::GaussSquared { .. } => {
                let (j, k) = self.pair(k).unwrap();
                let d = j as f64 * (k as f64 + x) + 1.0;
                -2.0 * j as f64 / d.powi(3)
            }
        }
    }

    /// `f_k = g_k^{-1}` on the image of `g_k`.
    pub fn inverse(&self, k: usize, y: f64) -> f64 {
        match self.kind {
            MapKind::Affine => (self.b[k - 1] - y) / self.gaps[k - 1],
            MapKind::Gauss => 1.0 / y - k as f64,
            MapKind::GaussSquared { .. } => {
                let (j, k) = self.pair(k).unwrap();
                y / (1.0 - j as f64 * y) - k as f64
            }
        }
    }

    /// `g_k([0,1])` as `(min, max)`.
    pub fn image(&self, k: usize) -> (f64, f64) {
        let (p, q) = (self.eval(k, 0.0), self.eval(k, 1.0));
        (p.min(q), p.max(q))
    }

    /// Whether `g_k` reverses orientation.
    pub fn reverses(&self) -> bool {
        !matches!(self.kind, MapKind::GaussSquared { .. })
    }

    /// Outer enclosure of `g_k(I)`. Each formula uses `x` once, so the
    /// natural interval extension is the exact range up to padding.
    pub fn image_of(&self, k: usize, x: Enclosure) -> Enclosure {
        match self.kind {
            MapKind::Affine => self.b[k - 1] - self.gaps[k - 1] * x,
            MapKind::Gauss => (k as f64 + x).recip(),
            MapKind::GaussSquared { .. } => {
                let (j, k) = self.pair(k).unwrap();
                (j as f64 + (k as f64 + x).recip()).recip()
            }
        }
    }

    /// Outer enclosure of `f_k(Y)` for `Y` inside `g_k([0,1])`.
    pub fn preimage_of(&self, k: usize, y: Enclosure) -> Enclosure {
        match self.kind {
            MapKind::Affine => (self.b[k - 1] - y) / self.gaps[k - 1],
            MapKind::Gauss => y.recip() - k as f64,
            MapKind::GaussSquared { .. } => {
                let (j, k) = self.pair(k).unwrap();
                (y.recip() - j as f64).recip() - k as f64
            }
        }
    }

    /// Range of `|g_k'|` over `x`.
    pub fn deriv_range(&self, k: usize, x: Enclosure) -> Enclosure {
        match self.kind {
            MapKind::Affine => Enclosure::point(self.gaps[k - 1]),
            MapKind::Gauss => (k as f64 + x).sqr().recip(),
            MapKind::GaussSquared { .. } => {
                let (j, k) = self.pair(k).unwrap();
                (j as f64 * (k as f64 + x) + 1.0).sqr().recip()
            }
        }
    }

    fn compute_hull(&self) -> Enclosure {
        let mut x = Enclosure::UNIT;
        for _ in 0..10_000 {
            let next = (1..=self.n)
                .map(|k| self.image_of(k, x))
                .reduce(|a, b| a.hull(&b))
                .expect("n ≥ 1");
            let next = next.intersect(&x).unwrap_or(next);
            let settled = (next.lo - x.lo).abs() <= 1e-16 && (next.hi - x.hi).abs() <= 1e-16;
            x = next;
            if settled {
                break;
            }
        }
        x
    }
}

/// A finite word `(i_1, ..., i_l)` over `{1..n}`; the empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(letters: impl Into<Vec<usize>>) -> Self {
        Word(letters.into())
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn validate(&self, sys: &TruncatedSystem) -> Result<()> {
        self.0.iter().try_for_each(|&k| sys.check_letter(k))
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

/// The image `g_ω([0,1])` of a word.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub word: Word,
    pub left: f64,
    pub right: f64,
    /// Diameter. For linear systems this is the product of the gaps rather
    /// than `right - left`, which loses relative accuracy on deep cylinders.
    pub length: f64,
    /// Enclosure of `inf` / `sup` of `|g_ω'|` over `[0,1]`.
    pub deriv: Enclosure,
}

impl Cylinder {
    pub fn interval(&self) -> Enclosure {
        Enclosure::new(self.left, self.right)
    }

    pub fn contains(&self, other: &Cylinder) -> bool {
        self.left <= other.left && other.right <= self.right
    }
}

/// `g_{w_1}(g_{w_2}(... g_{w_l}(x)))`.
pub fn apply_word(sys: &TruncatedSystem, w: &Word, x: f64) -> Result<f64> {
    w.validate(sys)?;
    Ok(w.letters().iter().rev().fold(x, |y, &k| sys.eval(k, y)))
}

/// Enclosure of `inf` and `sup` of `|g_w'|` on `[0,1]`.
///
/// Nonlinear systems propagate the image of `[0,1]` letter by letter from the
/// innermost map outwards and bound each factor on that image only.
pub fn word_derivative_bounds(sys: &TruncatedSystem, w: &Word) -> Result<Enclosure> {
    word_derivative_bounds_on(sys, w, Enclosure::UNIT)
}

/// As [`word_derivative_bounds`], restricted to `x ∈ domain`.
pub fn word_derivative_bounds_on(sys: &TruncatedSystem, w: &Word, domain: Enclosure) -> Result<Enclosure> {
    w.validate(sys)?;
    if sys.is_linear() {
        return Ok(Enclosure::point(linear_product(sys, w)));
    }
    // Per-letter products lose the correlation between factors; splitting
    // the domain recovers most of it.
    let pieces = if w.len() > 1 { DOMAIN_PIECES } else { 1 };
    let step = domain.width() / pieces as f64;
    let mut out: Option<Enclosure> = None;
    for i in 0..pieces {
        let lo = domain.lo + step * i as f64;
        let hi = if i + 1 == pieces { domain.hi } else { domain.lo + step * (i + 1) as f64 };
        let d = chain_bounds(sys, w, Enclosure::new(lo, hi));
        out = Some(out.map_or(d, |o| o.hull(&d)));
    }
    Ok(out.unwrap())
}

const DOMAIN_PIECES: usize = 64;

fn chain_bounds(sys: &TruncatedSystem, w: &Word, domain: Enclosure) -> Enclosure {
    let mut image = domain;
    let mut deriv = Enclosure::ONE;
    for &k in w.letters().iter().rev() {
        deriv = deriv * sys.deriv_range(k, image);
        image = sys.image_of(k, image);
    }
    deriv
}

fn linear_product(sys: &TruncatedSystem, w: &Word) -> f64 {
    w.letters().iter().map(|&k| sys.gap(k)).product()
}

fn cylinder_of(sys: &TruncatedSystem, w: Word) -> Cylinder {
    if sys.is_linear() {
        // g_ω(x) = c + s x, composed left to right.
        let (mut c, mut s) = (0.0, 1.0);
        for &k in w.letters() {
            c += s * sys.b(k - 1);
            s *= -sys.gap(k);
        }
        let (left, right) = if s < 0.0 { (c + s, c) } else { (c, c + s) };
        Cylinder {
            word: w,
            left,
            right,
            length: s.abs(),
            deriv: Enclosure::point(s.abs()),
        }
    } else {
        let p = w.letters().iter().rev().fold(0.0, |y, &k| sys.eval(k, y));
        let q = w.letters().iter().rev().fold(1.0, |y, &k| sys.eval(k, y));
        let deriv = word_derivative_bounds(sys, &w).expect("validated letters");
        Cylinder {
            word: w,
            left: p.min(q),
            right: p.max(q),
            length: (p - q).abs(),
            deriv,
        }
    }
}

/// The cylinder of a single word.
pub fn cylinder(sys: &TruncatedSystem, w: &Word) -> Result<Cylinder> {
    w.validate(sys)?;
    Ok(cylinder_of(sys, w.clone()))
}

/// Stream over the `n^l` cylinders of generation `l`, words in lexicographic
/// order.
#[derive(Debug)]
pub struct Generation<'a> {
    sys: &'a TruncatedSystem,
    next: Option<Vec<usize>>,
}

impl Iterator for Generation<'_> {
    type Item = Cylinder;

    fn next(&mut self) -> Option<Cylinder> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let n = self.sys.n();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if succ[i] < n {
                succ[i] += 1;
                self.next = Some(succ);
                break;
            }
            succ[i] = 1;
        }
        Some(cylinder_of(self.sys, Word(cur)))
    }
}

/// `n^l` as a saturating count.
pub fn word_count(n: usize, l: usize) -> u128 {
    (0..l).fold(1u128, |acc, _| acc.saturating_mul(n as u128))
}

pub fn enumerate_generation(sys: &TruncatedSystem, l: usize) -> Result<Generation<'_>> {
    enumerate_generation_with_budget(sys, l, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_generation_with_budget(sys: &TruncatedSystem, l: usize, budget: u128) -> Result<Generation<'_>> {
    if l < 1 {
        return Err(Error::InvalidDepth(l));
    }
    let requested = word_count(sys.n(), l);
    if requested > budget {
        return Err(Error::BudgetExceeded { requested, budget });
    }
    Ok(Generation {
        sys,
        next: Some(vec![1; l]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_system, FamilySpec};

    fn geo(n: usize) -> TruncatedSystem {
        build_system(&FamilySpec::geometric(0.5), n).unwrap()
    }

    #[test]
    fn first_generation_is_the_defining_intervals() {
        let sys = geo(2);
        let cyl: Vec<_> = enumerate_generation(&sys, 1).unwrap().collect();
        assert_eq!(cyl.len(), 2);
        assert_eq!((cyl[0].left, cyl[0].right, cyl[0].length), (0.5, 1.0, 0.5));
        assert_eq!((cyl[1].left, cyl[1].right, cyl[1].length), (0.25, 0.5, 0.25));
    }

    #[test]
    fn third_generation_lengths_are_products() {
        let sys = geo(2);
        let mut got: Vec<f64> = enumerate_generation(&sys, 3).unwrap().map(|c| c.length).collect();
        let mut want = Vec::new();
        for i in [0.5, 0.25] {
            for j in [0.5, 0.25] {
                for k in [0.5, 0.25] {
                    want.push(i * j * k);
                }
            }
        }
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        assert_eq!(got, want);
        assert!(got.iter().all(|&x| (1.0 / 64.0..=1.0 / 8.0).contains(&x)));
    }

    #[test]
    fn depth_zero_is_rejected() {
        assert_eq!(enumerate_generation(&geo(3), 0).unwrap_err(), Error::InvalidDepth(0));
    }

    #[test]
    fn budget_is_enforced() {
        let sys = geo(10);
        assert!(matches!(
            enumerate_generation_with_budget(&sys, 4, 1000),
            Err(Error::BudgetExceeded { requested: 10_000, budget: 1000 })
        ));
    }

    #[test]
    fn apply_word_examples() {
        let gauss = build_system(&FamilySpec::Gauss { name: None }, 3).unwrap();
        assert_eq!(apply_word(&gauss, &Word::new([1]), 0.0).unwrap(), 1.0);
        let sys = geo(2);
        assert_eq!(apply_word(&sys, &Word::new([2, 1]), 1.0).unwrap(), 0.375);
        assert_eq!(apply_word(&sys, &Word::empty(), 0.3).unwrap(), 0.3);
        assert_eq!(
            apply_word(&sys, &Word::new([3]), 0.3).unwrap_err(),
            Error::LetterOutOfRange { letter: 3, n: 2 }
        );
    }

    #[test]
    fn derivative_bound_examples() {
        let sys = geo(2);
        assert_eq!(word_derivative_bounds(&sys, &Word::new([1, 2])).unwrap(), Enclosure::point(0.125));
        let gauss = build_system(&FamilySpec::Gauss { name: None }, 2).unwrap();
        let d1 = word_derivative_bounds(&gauss, &Word::new([1])).unwrap();
        assert!(d1.contains(0.25) && d1.contains(1.0));
        assert!(d1.lo > 0.2499 && d1.hi < 1.0001);
        // |(g_1 ∘ g_1)'(x)| = 1/(2+x)^2 peaks at 1/4.
        let d11 = word_derivative_bounds(&gauss, &Word::new([1, 1])).unwrap();
        assert!(d11.contains(0.25) && d11.contains(1.0 / 9.0));
        assert!(d11.hi < 0.27 && d11.lo > 0.1);
    }

    #[test]
    fn hull_of_two_map_geometric_system() {
        // min J = b_n / (1 - a_1 a_n), max J = 1 - a_1 min J.
        let sys = geo(2);
        let lo = 0.25 / (1.0 - 0.5 * 0.25);
        let hi = 1.0 - 0.5 * lo;
        assert!(sys.hull().contains(lo) && sys.hull().contains(hi));
        assert!(sys.hull().width() - (hi - lo) < 1e-13);
    }

    #[test]
    fn gauss_squared_pairs_are_lexicographic() {
        let sys = build_system(&FamilySpec::GaussSquared { name: None }, 9).unwrap();
        assert_eq!(sys.pair(1), Some((1, 1)));
        assert_eq!(sys.pair(3), Some((1, 3)));
        assert_eq!(sys.pair(4), Some((2, 1)));
        assert_eq!(sys.pair(9), Some((3, 3)));
        let x = 0.37;
        let direct = 1.0 / (2.0 + 1.0 / (3.0 + x));
        assert!((sys.eval(6, x) - direct).abs() < 1e-15);
        assert!((sys.inverse(6, sys.eval(6, x)) - x).abs() < 1e-12);
    }
}
