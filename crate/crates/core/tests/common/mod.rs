//! Independent oracles and randomized property checks shared by the
//! integration tests and the acceptance gate.
#![allow(dead_code)]

use hausmeter::conditions::distortion;
use hausmeter::{
    build_system, cylinder_measure, density, enumerate_generation, interval_measure, solve_moran, Enclosure,
    FamilySpec, MeasureQuery, TruncatedSystem, Word,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestError, TestRng, TestRunner};

pub const SEED: [u8; 32] = *b"hausmeter-property-seed-00000001";

/// Linear families with the sequence written out by hand.
#[derive(Debug, Clone, Copy)]
pub enum Fam {
    Geo(f64),
    Pow(f64),
    Luroth,
}

impl Fam {
    pub fn spec(self) -> FamilySpec {
        match self {
            Fam::Geo(q) => FamilySpec::geometric(q),
            Fam::Pow(a) => FamilySpec::power(a),
            Fam::Luroth => FamilySpec::luroth(),
        }
    }

    pub fn b(self, k: usize) -> f64 {
        match self {
            Fam::Geo(q) => q.powi(k as i32),
            Fam::Pow(a) => 1.0 / ((k + 1) as f64).powf(a),
            Fam::Luroth => 1.0 / (k + 1) as f64,
        }
    }

    pub fn oracle(self, n: usize) -> Oracle {
        Oracle::new((0..=n).map(|k| self.b(k)).collect())
    }

    pub fn all() -> Vec<Fam> {
        vec![Fam::Geo(0.3), Fam::Geo(0.5), Fam::Geo(0.7), Fam::Pow(0.5), Fam::Pow(1.0), Fam::Pow(2.0), Fam::Luroth]
    }
}

pub fn fam_strategy() -> impl Strategy<Value = Fam> {
    prop_oneof![
        (0.2..0.8f64).prop_map(Fam::Geo),
        (0.5..3.0f64).prop_map(Fam::Pow),
        Just(Fam::Luroth),
    ]
}

/// Plain floating-point model of `g_k(x) = b_{k-1} - a_k x`.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
    pub h: f64,
}

impl Oracle {
    pub fn new(b: Vec<f64>) -> Self {
        let a: Vec<f64> = b.windows(2).map(|w| w[0] - w[1]).collect();
        let h = moran_root(&a);
        Oracle { b, a, h }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Bracket on `m([s,t])` from cylinders down to generation `gen`:
    /// masses of cylinders inside, plus those still straddling an endpoint.
    pub fn measure_bracket(&self, s: f64, t: f64, gen: usize) -> (f64, f64) {
        let (mut inside, mut straddle) = (0.0, 0.0);
        self.descend(0.0, 1.0, 1.0, 0, s, t, gen, &mut inside, &mut straddle);
        (inside, inside + straddle)
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(&self, c: f64, sl: f64, mass: f64, depth: usize, s: f64, t: f64, gen: usize, inside: &mut f64, straddle: &mut f64) {
        for k in 1..=self.n() {
            // φ∘g_k with φ(x) = c + sl x.
            let (c2, sl2) = (c + sl * self.b[k - 1], -sl * self.a[k - 1]);
            let (lo, hi) = if sl2 >= 0.0 { (c2, c2 + sl2) } else { (c2 + sl2, c2) };
            let m = mass * self.a[k - 1].powf(self.h);
            if hi <= s || lo >= t {
                continue;
            }
            if lo >= s && hi <= t {
                *inside += m;
            } else if depth + 1 == gen {
                *straddle += m;
            } else {
                self.descend(c2, sl2, m, depth + 1, s, t, gen, inside, straddle);
            }
        }
    }

    /// Endpoints of all cylinders of generation `1..=depth`, sorted, with
    /// the mass to the left of each.
    pub fn endpoints(&self, depth: usize) -> Vec<f64> {
        let mut pts = Vec::new();
        let mut frontier = vec![(0.0f64, 1.0f64)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &(c, sl) in &frontier {
                for k in 1..=self.n() {
                    let (c2, sl2) = (c + sl * self.b[k - 1], -sl * self.a[k - 1]);
                    pts.push(c2);
                    pts.push(c2 + sl2);
                    next.push((c2, sl2));
                }
            }
            frontier = next;
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        pts
    }

    /// Leaves of generation `gen` as `(left, right, mass)`, sorted.
    pub fn leaves(&self, gen: usize) -> Vec<(f64, f64, f64)> {
        let mut frontier = vec![(0.0f64, 1.0f64, 1.0f64)];
        for _ in 0..gen {
            let mut next = Vec::with_capacity(frontier.len() * self.n());
            for &(c, sl, m) in &frontier {
                for k in 1..=self.n() {
                    next.push((c + sl * self.b[k - 1], -sl * self.a[k - 1], m * self.a[k - 1].powf(self.h)));
                }
            }
            frontier = next;
        }
        let mut out: Vec<_> = frontier
            .into_iter()
            .map(|(c, sl, m)| if sl >= 0.0 { (c, c + sl, m) } else { (c + sl, c, m) })
            .collect();
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }

    /// Largest `m([x,y]) / (y-x)^h` over pairs of depth-`depth` endpoints,
    /// with masses summed from the generation-`depth` leaves.
    pub fn best_endpoint_pair(&self, depth: usize) -> (f64, f64, f64) {
        let leaves = self.leaves(depth);
        let mut best = (0.0, 0.0, 0.0);
        for i in 0..leaves.len() {
            let mut mass = 0.0;
            for leaf in &leaves[i..] {
                mass += leaf.2;
                let (x, y) = (leaves[i].0, leaf.1);
                let d = mass / (y - x).powf(self.h);
                if d > best.2 {
                    best = (x, y, d);
                }
            }
        }
        best
    }
}

/// Root of `Σ a_k^h = 1` by plain bisection.
pub fn moran_root(a: &[f64]) -> f64 {
    if a.len() == 1 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s: f64 = a.iter().map(|x| x.powf(mid)).sum();
        if s > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

fn report<T: std::fmt::Debug>(r: Result<(), TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn sys_h(f: Fam, n: usize) -> (TruncatedSystem, Enclosure) {
    let sys = build_system(&f.spec(), n).unwrap();
    let h = solve_moran(&sys).unwrap().h;
    (sys, h)
}

/// `Σ w_i^a ≤ k^{1-a}` for weights summing to 1, both random and taken from
/// first-level cylinder masses.
pub fn prop_jensen(cases: u32) -> Result<(), String> {
    let strat = (prop::collection::vec(0.001..1.0f64, 1..24), 0.01..0.99f64, fam_strategy(), 2usize..10);
    report(runner(cases).run(&strat, |(raw, a, fam, n)| {
        let total: f64 = raw.iter().sum();
        let k = raw.len() as f64;
        let lhs: f64 = raw.iter().map(|w| (w / total).powf(a)).sum();
        prop_assert!(lhs <= k.powf(1.0 - a) * (1.0 + 1e-12), "random weights: {lhs} > {}", k.powf(1.0 - a));

        let (sys, h) = sys_h(fam, n);
        let w: Vec<f64> = (1..=n).map(|j| cylinder_measure(&sys, h, &Word::new([j])).unwrap().mid()).collect();
        let lhs: f64 = w.iter().map(|x| x.powf(a)).sum();
        prop_assert!(lhs <= (n as f64).powf(1.0 - a) * (1.0 + 1e-12));
        Ok(())
    }))
}

/// `κ⁻¹ sup|g'| |I| ≤ |g(I)| ≤ κ inf|g'| |I|` for Gauss maps.
pub fn prop_distortion_bracketing(cases: u32) -> Result<(), String> {
    let sys = build_system(&FamilySpec::gauss(), 64).unwrap();
    let strat = (1usize..=64, 0.0..1.0f64, 0.0..1.0f64, any::<bool>());
    report(runner(cases).run(&strat, |(k, u, v, whole)| {
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        prop_assume!(v - u > 1e-9);
        let kf = k as f64;
        let image = 1.0 / (kf + u) - 1.0 / (kf + v);
        let (sup, inf) = (1.0 / (kf + u).powi(2), 1.0 / (kf + v).powi(2));
        let dom = if whole { None } else { Some(Enclosure::new(u, v)) };
        let kappa = distortion(&sys, k, dom).unwrap().hi;
        // On the whole domain the extremes of |g'| move to the endpoints 0, 1.
        let (sup, inf) = if whole { (1.0 / kf.powi(2), 1.0 / (kf + 1.0).powi(2)) } else { (sup, inf) };
        let len = v - u;
        prop_assert!(sup * len / kappa <= image * (1.0 + 1e-9), "k={k} [{u},{v}] lower");
        prop_assert!(image <= kappa * inf * len * (1.0 + 1e-9), "k={k} [{u},{v}] upper");
        Ok(())
    }))
}

/// `d(Δ_1 ∪ … ∪ Δ_N) ≤ N^{1-h} max d(Δ_j)` for adjacent intervals, `N ∈ {2,3}`.
pub fn prop_subadditivity(cases: u32) -> Result<(), String> {
    let strat = (fam_strategy(), 2usize..7, prop::collection::vec(0.0..1.0f64, 4), any::<bool>());
    report(runner(cases).run(&strat, |(fam, n, mut xs, three)| {
        let (sys, h) = sys_h(fam, n);
        let hull = sys.hull();
        xs.sort_by(f64::total_cmp);
        let pts: Vec<f64> = xs.iter().map(|x| hull.lo + x * hull.width()).collect();
        let pts = if three { &pts[..] } else { &pts[..3] };
        prop_assume!(pts.windows(2).all(|w| w[1] - w[0] > 1e-6));
        let d = |s: f64, t: f64| density(&MeasureQuery::new(&sys, h, s, t, 1e-12)).unwrap().density;
        let whole = d(pts[0], *pts.last().unwrap());
        let parts = pts.windows(2).map(|w| d(w[0], w[1]).hi).fold(0.0, f64::max);
        let nn = (pts.len() - 1) as f64;
        prop_assert!(whole.lo <= nn.powf(1.0 - h.lo) * parts * (1.0 + 1e-9), "{whole:?} vs {parts}");
        Ok(())
    }))
}

/// `d(A) = d(g_k(A))` for linear systems.
pub fn prop_scale_invariance(cases: u32) -> Result<(), String> {
    let strat = (fam_strategy(), 2usize..7, 0.0..1.0f64, 0.0..1.0f64, 0usize..64);
    report(runner(cases).run(&strat, |(fam, n, u, v, kk)| {
        let (s, t) = if u <= v { (u, v) } else { (v, u) };
        prop_assume!(t - s > 1e-3);
        let (sys, h) = sys_h(fam, n);
        let k = kk % n + 1;
        let (gs, gt) = (sys.eval(k, t), sys.eval(k, s));
        let d1 = density(&MeasureQuery::new(&sys, h, s, t, 1e-13)).unwrap().density;
        let tol = 1e-13 * (gt - gs).powf(h.hi);
        let d2 = density(&MeasureQuery::new(&sys, h, gs, gt, tol)).unwrap().density;
        let slack = 1e-9 + d1.width() + d2.width();
        prop_assert!((d1.mid() - d2.mid()).abs() <= slack, "{fam:?} n={n} k={k} [{s},{t}]: {d1:?} vs {d2:?}");
        Ok(())
    }))
}

/// Each cylinder of generation `l+1` lies in exactly one of generation `l`,
/// namely the one of its prefix.
pub fn prop_generation_refinement(cases: u32) -> Result<(), String> {
    let strat = (fam_strategy(), 2usize..5, 1usize..5);
    report(runner(cases).run(&strat, |(fam, n, l)| {
        let sys = build_system(&fam.spec(), n).unwrap();
        let parents: Vec<_> = enumerate_generation(&sys, l).unwrap().collect();
        for child in enumerate_generation(&sys, l + 1).unwrap() {
            let eps = 1e-15;
            let holders: Vec<_> = parents
                .iter()
                .filter(|p| p.left - eps <= child.left && child.right <= p.right + eps)
                .collect();
            prop_assert_eq!(holders.len(), 1, "{:?}", child.word);
            prop_assert_eq!(holders[0].word.letters(), &child.word.letters()[..l]);
        }
        Ok(())
    }))
}

/// The measure enclosure against the cylinder-accumulation bracket.
pub fn measure_matches_oracle(fam: Fam, n: usize, s: f64, t: f64, gen: usize) -> Result<(), String> {
    let (sys, h) = sys_h(fam, n);
    let m = interval_measure(&MeasureQuery::new(&sys, h, s, t, 1e-12)).map_err(|e| e.to_string())?;
    let (lo, hi) = fam.oracle(n).measure_bracket(s, t, gen);
    let slack = 1e-10;
    if m.lo >= lo - slack && m.hi <= hi + slack {
        Ok(())
    } else {
        Err(format!("{fam:?} n={n} [{s},{t}]: enclosure {m:?}, oracle [{lo}, {hi}]"))
    }
}
