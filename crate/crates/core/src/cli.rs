//! Command-line front end.
//!
//! Exit codes: 0 success (or all conditions hold), 1 a condition fails,
//! 2 invalid configuration, 3 enumeration budget exceeded, 4 inconclusive.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::conditions::{
    check_c1, check_c2, check_c2_strong, check_g4_g5_g6, distortion_growth_check, random_growth_samples,
    ConditionId, ConditionReport, Verdict,
};
use crate::dimension::{default_t, dim_gap_bound, t_min_valid, solve, DimensionResult, Method};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::families::{build_system, FamilySpec};
use crate::measure::{density, hausdorff_estimate, interval_measure, MeasureQuery};

/// Environment variable that overrides `--cache-dir`.
pub const CACHE_ENV: &str = "HAUSMETER_CACHE";

/// Header of the sweep CSV.
pub const SWEEP_HEADER: &str = "n,h_lo,h_hi,gap_bound,c1_product,H_lower,H_upper,witness_left,witness_right";

#[derive(Debug, Parser)]
#[command(name = "hausmeter", version, about = "Dimension and Hausdorff measure of truncated Lüroth-type systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Family spec as inline JSON, or `@path` to read it from a file.
    #[arg(long, value_name = "JSON|@FILE")]
    pub family: String,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Worker threads for inner computations (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory for cached dimension results.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Omit the `generated_at_unix` header.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dimension enclosure of J_n.
    Dim {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// `moran`, `pressure` or `pressure:L` (default: moran for linear families).
        #[arg(long)]
        method: Option<String>,
        /// Pressure depth, overriding the one in `--method`.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Convergence table over a range of n.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `a:b:step`, `a:b:xK` (multiply by K), `a:b` or a comma list.
        #[arg(long)]
        n_range: String,
        #[arg(long)]
        method: Option<String>,
        /// Depth of the density search.
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Exponent for the gap bound (default: the family's safe default).
        #[arg(long)]
        t: Option<f64>,
    },
    /// Check conditions c1, c2, c2strong, g4, g5, g6.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Condition ids (default: all that apply to the family).
        #[arg(value_delimiter = ',')]
        ids: Vec<String>,
        /// Number of maps scanned.
        #[arg(long = "K", default_value_t = 1000)]
        k: usize,
        /// n values for c1.
        #[arg(long, default_value = "8:64:x2")]
        n_range: String,
        #[arg(long)]
        method: Option<String>,
        /// Seed for the sampled growth check on nonlinear families.
        #[arg(long, default_value = "0xC0FFEE", value_parser = parse_seed)]
        seed: u64,
    },
    /// Conformal measure of an interval.
    Measure(IntervalArgs),
    /// Density m(I)/|I|^h of an interval.
    Density(IntervalArgs),
    /// Bracket on the Hausdorff measure of J_n.
    Hmeasure {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        method: Option<String>,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
pub struct IntervalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: usize,
    #[arg(long, num_args = 2, value_names = ["S", "T"], allow_negative_numbers = true)]
    pub interval: Vec<f64>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    }
    .map_err(|e| e.to_string())
}

/// Parses `a:b:step`, `a:b:xK`, `a:b` or `a,b,c` into an ascending list.
pub fn parse_n_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidParameter(format!("bad n-range {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let out = if s.contains(',') {
        let v = s.split(',').map(num).collect::<Result<Vec<_>>>()?;
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!("n-range {s:?} is not ascending")));
        }
        v
    } else {
        let parts: Vec<&str> = s.split(':').collect();
        let (a, b) = match parts.len() {
            1 => (num(parts[0])?, num(parts[0])?),
            2 | 3 => (num(parts[0])?, num(parts[1])?),
            _ => return Err(bad()),
        };
        let step = parts.get(2).copied().unwrap_or("1").trim();
        let mut v = Vec::new();
        let mut n = a;
        if let Some(f) = step.strip_prefix('x') {
            let f = num(f)?;
            if f < 2 || a == 0 {
                return Err(bad());
            }
            while n <= b {
                v.push(n);
                n *= f;
            }
        } else {
            let d = num(step)?;
            if d == 0 {
                return Err(bad());
            }
            while n <= b {
                v.push(n);
                n += d;
            }
        }
        v
    };
    if out.is_empty() {
        return Err(Error::InvalidParameter(format!("empty n-range {s:?}")));
    }
    Ok(out)
}

fn load_family(src: &str) -> Result<FamilySpec> {
    match src.strip_prefix('@') {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidParameter(format!("cannot read family file {path}: {e}")))?;
            FamilySpec::from_json(&text)
        }
        None => FamilySpec::from_json(src),
    }
}

fn resolve_method(spec: &FamilySpec, method: Option<&str>, depth: Option<usize>) -> Result<Method> {
    let m = match method {
        Some(s) => s.parse()?,
        None if spec.is_linear() => Method::Moran,
        None => Method::Pressure { depth: 8 },
    };
    Ok(match (m, depth) {
        (Method::Pressure { .. }, Some(depth)) => Method::Pressure { depth },
        (m, _) => m,
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } => 3,
        _ => 2,
    }
}

/// Content-addressed store of dimension results, one JSON file per key.
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(flag: Option<&Path>) -> Self {
        let dir = std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| flag.map(Path::to_path_buf));
        Cache { dir }
    }

    pub fn key(spec: &FamilySpec, n: usize, method: Method, tol: f64) -> String {
        let (kind, depth) = match method {
            Method::Moran => ("moran", 0),
            Method::Pressure { depth } => ("pressure", depth),
        };
        let text = format!("{}\n{n}\n{kind}\n{depth}\n{tol:e}", spec.canonical_json());
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn dimension(&self, spec: &FamilySpec, n: usize, method: Method, tol: f64) -> Result<DimensionResult> {
        let path = self.dir.as_ref().map(|d| d.join(format!("{}.json", Self::key(spec, n, method, tol))));
        if let Some(hit) = path
            .as_ref()
            .and_then(|p| std::fs::read_to_string(p).ok())
            .and_then(|s| serde_json::from_str(&s).ok())
        {
            return Ok(hit);
        }
        let res = solve(&build_system(spec, n)?, method)?;
        if let (Some(dir), Some(path)) = (&self.dir, &path) {
            // A failed write only costs a recomputation later.
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            let _ = std::fs::create_dir_all(dir)
                .and_then(|_| std::fs::write(&tmp, serde_json::to_string(&res).unwrap()))
                .and_then(|_| std::fs::rename(&tmp, path));
        }
        Ok(res)
    }
}

/// Rendered result of one command.
struct Report {
    json: Value,
    header: String,
    rows: Vec<Vec<String>>,
    human: String,
    code: i32,
}

fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn enc_json(e: Enclosure) -> Value {
    json!([e.lo, e.hi])
}

fn render(out: &mut dyn Write, common: &Common, r: Report) -> std::io::Result<()> {
    let stamp = (!common.no_timestamp).then(|| {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    });
    match common.format {
        Format::Json => {
            let mut v = r.json;
            if let (Some(t), Value::Object(m)) = (stamp, &mut v) {
                m.insert("generated_at_unix".into(), json!(t));
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap())
        }
        Format::Csv => {
            if let Some(t) = stamp {
                writeln!(out, "# generated_at_unix={t}")?;
            }
            writeln!(out, "{}", r.header)?;
            for row in r.rows {
                writeln!(out, "{}", row.join(","))?;
            }
            Ok(())
        }
        Format::Human => {
            if let Some(t) = stamp {
                writeln!(out, "# generated_at_unix={t}")?;
            }
            write!(out, "{}", r.human)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let common = match &cli.command {
        Command::Dim { common, .. }
        | Command::Sweep { common, .. }
        | Command::Verify { common, .. }
        | Command::Hmeasure { common, .. } => common,
        Command::Measure(a) | Command::Density(a) => &a.common,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(common.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let mut notes = Vec::new();
    let result = pool.install(|| dispatch(&cli.command, &mut notes));
    for note in notes {
        let _ = writeln!(err, "caveat: {note}");
    }
    match result {
        Ok(report) => {
            let code = report.code;
            if let Err(e) = render(out, common, report) {
                let _ = writeln!(err, "error: {e}");
                return 2;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command, notes: &mut Vec<String>) -> Result<Report> {
    match cmd {
        Command::Dim { common, n, method, depth, tol } => {
            let spec = load_family(&common.family)?;
            let method = resolve_method(&spec, method.as_deref(), *depth)?;
            cmd_dim(&spec, *n, method, *tol, &Cache::new(common.cache_dir.as_deref()))
        }
        Command::Sweep { common, n_range, method, depth, tol, t } => {
            let spec = load_family(&common.family)?;
            let method = resolve_method(&spec, method.as_deref(), None)?;
            let ns = parse_n_range(n_range)?;
            let cache = Cache::new(common.cache_dir.as_deref());
            cmd_sweep(&spec, &ns, method, *depth, *tol, *t, &cache, notes)
        }
        Command::Verify { common, ids, k, n_range, method, seed } => {
            let spec = load_family(&common.family)?;
            let ids = if ids.is_empty() {
                let all = ConditionId::ALL.to_vec();
                all.into_iter()
                    .filter(|c| !spec.is_linear() || !matches!(c, ConditionId::G4 | ConditionId::G5 | ConditionId::G6))
                    .collect()
            } else {
                ids.iter().map(|s| s.parse()).collect::<Result<Vec<ConditionId>>>()?
            };
            let method = resolve_method(&spec, method.as_deref(), None)?;
            cmd_verify(&spec, &ids, *k, &parse_n_range(n_range)?, method, *seed)
        }
        Command::Measure(a) | Command::Density(a) => {
            let spec = load_family(&a.common.family)?;
            let method = resolve_method(&spec, a.method.as_deref(), None)?;
            let cache = Cache::new(a.common.cache_dir.as_deref());
            let (s, t) = (a.interval[0], a.interval[1]);
            cmd_interval(&spec, a.n, s, t, method, a.tol, &cache, matches!(cmd, Command::Density(_)))
        }
        Command::Hmeasure { common, n, method, depth, tol } => {
            let spec = load_family(&common.family)?;
            let method = resolve_method(&spec, method.as_deref(), None)?;
            cmd_hmeasure(&spec, *n, method, *depth, *tol, &Cache::new(common.cache_dir.as_deref()), notes)
        }
    }
}

fn cmd_dim(spec: &FamilySpec, n: usize, method: Method, tol: f64, cache: &Cache) -> Result<Report> {
    let r = cache.dimension(spec, n, method, tol)?;
    Ok(Report {
        json: json!({
            "n": n,
            "method": method.to_string(),
            "h_lo": r.h.lo,
            "h_hi": r.h.hi,
            "residual": r.residual,
            "iterations": r.iterations,
        }),
        header: "n,method,h_lo,h_hi,residual".into(),
        rows: vec![vec![n.to_string(), method.to_string(), num(r.h.lo), num(r.h.hi), num(r.residual)]],
        human: format!(
            "family   {spec}\nn        {n}\nmethod   {method}\nh        [{}, {}]\nresidual {:e}\n",
            num(r.h.lo),
            num(r.h.hi),
            r.residual
        ),
        code: 0,
    })
}

struct SweepRow {
    n: usize,
    h: Enclosure,
    gap_bound: Option<f64>,
    c1_product: f64,
    h_lower: f64,
    h_upper: f64,
    witness: Option<(f64, f64)>,
    caveats: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    spec: &FamilySpec,
    ns: &[usize],
    method: Method,
    depth: usize,
    tol: f64,
    t: Option<f64>,
    cache: &Cache,
    notes: &mut Vec<String>,
) -> Result<Report> {
    let t_min = t_min_valid(spec).ok();
    let rows: Vec<SweepRow> = ns
        .par_iter()
        .map(|&n| {
            let h = cache.dimension(spec, n, method, tol)?.h;
            let mut caveats = Vec::new();
            // Without --t, use h_lo itself when the series converges there.
            let t = t.or_else(|| match t_min {
                Some(m) if h.lo > m + 0.01 => Some(h.lo),
                _ => default_t(spec).ok(),
            });
            let gap_bound = match t {
                Some(t) => match dim_gap_bound(spec, n, t) {
                    Ok(g) => {
                        caveats.extend(g.caveat.clone());
                        Some(g.bound)
                    }
                    Err(e) => {
                        caveats.push(format!("gap bound: {e}"));
                        None
                    }
                },
                _ => None,
            };
            let c1 = ((Enclosure::ONE - h) * Enclosure::point(n as f64).ln()).hi.max(0.0);
            let est = hausdorff_estimate(&build_system(spec, n)?, h, depth)?;
            if est.heuristic {
                caveats.push("H columns come from an uncertified search".into());
            }
            Ok(SweepRow {
                n,
                h,
                gap_bound,
                c1_product: c1,
                h_lower: est.h_lower,
                h_upper: est.h_upper,
                witness: est.witness_interval,
                caveats,
            })
        })
        .collect::<Result<_>>()?;
    for r in &rows {
        for c in &r.caveats {
            notes.push(format!("n={}: {c}", r.n));
        }
    }
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.h.lo),
                num(r.h.hi),
                opt_num(r.gap_bound),
                num(r.c1_product),
                num(r.h_lower),
                num(r.h_upper),
                opt_num(r.witness.map(|w| w.0)),
                opt_num(r.witness.map(|w| w.1)),
            ]
        })
        .collect();
    let mut human = format!("family {spec}, method {method}, search depth {depth}\n");
    human.push_str(&format!(
        "{:>5} {:>22} {:>12} {:>12} {:>12} {:>12}\n",
        "n", "h", "gap_bound", "c1_product", "H_lower", "H_upper"
    ));
    for r in &rows {
        human.push_str(&format!(
            "{:>5} {:>22} {:>12} {:>12.4e} {:>12.6} {:>12.6}\n",
            r.n,
            format!("{:.12}", r.h.mid()),
            r.gap_bound.map(|g| format!("{g:.4e}")).unwrap_or_else(|| "-".into()),
            r.c1_product,
            r.h_lower,
            r.h_upper
        ));
    }
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "h_lo": r.h.lo,
                "h_hi": r.h.hi,
                "gap_bound": r.gap_bound,
                "c1_product": r.c1_product,
                "H_lower": r.h_lower,
                "H_upper": r.h_upper,
                "witness_interval": r.witness.map(|w| [w.0, w.1]),
            })
        })
        .collect();
    Ok(Report {
        json: json!({ "family": spec, "method": method.to_string(), "depth": depth, "rows": json_rows }),
        header: SWEEP_HEADER.into(),
        rows: csv_rows,
        human,
        code: 0,
    })
}

fn cmd_verify(
    spec: &FamilySpec,
    ids: &[ConditionId],
    k: usize,
    n_list: &[usize],
    method: Method,
    seed: u64,
) -> Result<Report> {
    let nonlinear_ids = ids.iter().any(|c| matches!(c, ConditionId::G4 | ConditionId::G5 | ConditionId::G6));
    let g = if nonlinear_ids { Some(check_g4_g5_g6(spec, k, 200)?) } else { None };
    let mut reports: Vec<ConditionReport> = Vec::new();
    for id in ids {
        reports.push(match id {
            ConditionId::C1 => check_c1(spec, n_list, method)?,
            ConditionId::C2 => check_c2(spec, k)?,
            ConditionId::C2strong => check_c2_strong(spec, k)?,
            ConditionId::G4 => g.as_ref().unwrap()[0].clone(),
            ConditionId::G5 => g.as_ref().unwrap()[1].clone(),
            ConditionId::G6 => g.as_ref().unwrap()[2].clone(),
        });
    }
    let growth = if nonlinear_ids {
        let n = match spec {
            FamilySpec::GaussSquared { .. } => 64,
            _ => k.clamp(1, 64),
        };
        let sys = build_system(spec, n)?;
        let cal = random_growth_samples(&sys, 200, 4, seed);
        let test = random_growth_samples(&sys, 200, 4, seed.wrapping_add(1));
        let r = distortion_growth_check(&sys, &cal, &test)?;
        let finite = |x: f64| x.is_finite().then_some(x);
        Some(json!({
            "verdict": r.verdict,
            "c": finite(r.c),
            "alpha": finite(r.alpha),
            "d_calibrated": finite(r.d_calibrated),
            "d_analytic": finite(r.d_analytic),
            "samples": r.outcomes.len(),
            "failures": r.outcomes.iter().filter(|o| !o.pass).count(),
            "seed": seed,
        }))
    } else {
        None
    };
    let code = if reports.iter().any(|r| r.verdict == Verdict::Fails) {
        1
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        4
    } else {
        0
    };
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.id.to_string(),
                r.verdict.to_string(),
                opt_num(r.witness.value),
                opt_num(r.witness.scanned),
                r.witness.index.map(|i| i.to_string()).unwrap_or_default(),
                opt_num(r.witness.point),
                r.scan_range.to_string(),
            ]
        })
        .collect();
    let mut human = format!("family {spec}\n");
    for r in &reports {
        human.push_str(&format!("{:<9} {:<13} {}\n", r.id, r.verdict, r.witness.note));
    }
    let mut json = json!({ "family": spec, "reports": reports });
    if let Some(g) = growth {
        json["growth"] = g;
    }
    Ok(Report {
        json,
        header: "id,verdict,value,scanned,index,point,scan_range".into(),
        rows,
        human,
        code,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_interval(
    spec: &FamilySpec,
    n: usize,
    s: f64,
    t: f64,
    method: Method,
    tol: f64,
    cache: &Cache,
    want_density: bool,
) -> Result<Report> {
    let sys = build_system(spec, n)?;
    let h = cache.dimension(spec, n, method, tol)?.h;
    let q = MeasureQuery::new(&sys, h, s, t, tol);
    let base = json!({ "n": n, "h": enc_json(h), "interval": [s, t] });
    if want_density {
        let d = density(&q)?;
        let mut json = base;
        json["measure"] = enc_json(d.measure);
        json["density"] = enc_json(d.density);
        json["interval_family"] = serde_json::to_value(d.family).unwrap();
        Ok(Report {
            json,
            header: "n,s,t,measure_lo,measure_hi,density_lo,density_hi".into(),
            rows: vec![vec![
                n.to_string(),
                num(s),
                num(t),
                num(d.measure.lo),
                num(d.measure.hi),
                num(d.density.lo),
                num(d.density.hi),
            ]],
            human: format!(
                "interval [{s}, {t}]\nmeasure  [{}, {}]\ndensity  [{}, {}]\n",
                num(d.measure.lo),
                num(d.measure.hi),
                num(d.density.lo),
                num(d.density.hi)
            ),
            code: 0,
        })
    } else {
        let m = interval_measure(&q)?;
        let mut json = base;
        json["measure"] = enc_json(m);
        Ok(Report {
            json,
            header: "n,s,t,measure_lo,measure_hi".into(),
            rows: vec![vec![n.to_string(), num(s), num(t), num(m.lo), num(m.hi)]],
            human: format!("interval [{s}, {t}]\nmeasure  [{}, {}]\n", num(m.lo), num(m.hi)),
            code: 0,
        })
    }
}

fn cmd_hmeasure(
    spec: &FamilySpec,
    n: usize,
    method: Method,
    depth: usize,
    tol: f64,
    cache: &Cache,
    notes: &mut Vec<String>,
) -> Result<Report> {
    let sys = build_system(spec, n)?;
    let h = cache.dimension(spec, n, method, tol)?.h;
    let est = hausdorff_estimate(&sys, h, depth)?;
    if est.heuristic {
        notes.push("nonlinear family, the bracket comes from an uncertified search".into());
    }
    let w = est.witness_interval;
    Ok(Report {
        json: serde_json::to_value(&est).unwrap(),
        header: "n,h_lo,h_hi,H_lower,H_upper,witness_left,witness_right,cover_sum".into(),
        rows: vec![vec![
            n.to_string(),
            num(h.lo),
            num(h.hi),
            num(est.h_lower),
            num(est.h_upper),
            opt_num(w.map(|w| w.0)),
            opt_num(w.map(|w| w.1)),
            opt_num(est.cover_sum),
        ]],
        human: format!(
            "n         {n}\nh         [{}, {}]\nH         [{}, {}]\nwitness   {}\ncover_sum {}\n",
            num(h.lo),
            num(h.hi),
            num(est.h_lower),
            num(est.h_upper),
            w.map(|w| format!("[{}, {}]", w.0, w.1)).unwrap_or_else(|| "-".into()),
            est.cover_sum.map(num).unwrap_or_else(|| "-".into()),
        ),
        code: 0,
    })
}
