use std::path::Path;
use std::process::{Command, Output};

const GEO: &str = r#"{"family":"geometric","q":0.5}"#;
const HEADER: &str = "n,h_lo,h_hi,gap_bound,c1_product,H_lower,H_upper,witness_left,witness_right";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hausmeter"))
        .args(args)
        .env_remove("HAUSMETER_CACHE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json", "--no-timestamp"]);
    let o = run(&a);
    assert!(matches!(o.status.code(), Some(0 | 1 | 4)), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn sweep_rows(csv_text: &str) -> Vec<Vec<f64>> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>().join(","), HEADER);
    rdr.records()
        .map(|r| r.unwrap().iter().map(|f| if f.is_empty() { f64::NAN } else { f.parse().unwrap() }).collect())
        .collect()
}

#[test]
fn golden_sweeps() {
    let cases = [
        (GEO, "2:32:x2", "sweep_geometric.csv"),
        (r#"{"family":"luroth"}"#, "2:32:x2", "sweep_luroth.csv"),
        (r#"{"family":"power","alpha":2.0}"#, "2,5,10", "sweep_power.csv"),
    ];
    for (family, range, file) in cases {
        let o = run(&["sweep", "--family", family, "--n-range", range, "--format", "csv", "--no-timestamp"]);
        assert_eq!(o.status.code(), Some(0));
        let want = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(file)).unwrap();
        assert_eq!(stdout(&o), want, "{file}");
        let rows = sweep_rows(&want);
        assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
        assert!(rows.iter().all(|r| r[1] <= r[2] && r[5] <= r[6]));
    }
}

#[test]
fn sweep_trends() {
    let o = run(&["sweep", "--family", GEO, "--n-range", "2:32:x2", "--format", "csv", "--no-timestamp"]);
    let rows = sweep_rows(&stdout(&o));
    assert!(rows.windows(2).all(|w| w[0][6] < w[1][6]), "H_upper not increasing");
    let o = run(&["sweep", "--family", r#"{"family":"luroth"}"#, "--n-range", "2:32", "--format", "csv", "--no-timestamp", "--depth", "2"]);
    let rows = sweep_rows(&stdout(&o));
    assert_eq!(rows.len(), 31);
    assert!(rows.windows(2).all(|w| w[0][4] > w[1][4]), "c1_product not decreasing");
    assert!(rows.last().unwrap()[4] < 0.06);
}

#[test]
fn timestamp_header_and_determinism() {
    let args = ["sweep", "--family", GEO, "--n-range", "2:8:x2", "--format", "csv"];
    let a = stdout(&run(&args));
    assert!(a.starts_with("# generated_at_unix="));
    let strip = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
    let b = stdout(&run(&args));
    assert_eq!(strip(&a), strip(&b));
    let mut one = args.to_vec();
    one.extend(["--threads", "1", "--no-timestamp"]);
    let mut many = args.to_vec();
    many.extend(["--threads", "4", "--no-timestamp"]);
    assert_eq!(run(&one).stdout, run(&many).stdout);
    let v = json(&["verify", "--family", r#"{"family":"gauss2"}"#, "g4,g5,g6", "--seed", "42"]);
    assert_eq!(v, json(&["verify", "--family", r#"{"family":"gauss2"}"#, "g4,g5,g6", "--seed", "42"]));
}

#[test]
fn cache_hits_match_cold_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["sweep", "--family", GEO, "--n-range", "2:16:x2", "--format", "csv", "--no-timestamp", "--cache-dir", d];
    let cold = run(&args);
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 4);
    let warm = run(&args);
    assert_eq!(cold.stdout, warm.stdout);
    let plain = run(&args[..8]);
    assert_eq!(cold.stdout, plain.stdout);

    // The environment variable wins over the flag.
    let env_dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hausmeter"))
        .args(["dim", "--family", GEO, "--n", "3", "--cache-dir", d])
        .env("HAUSMETER_CACHE", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(env_dir.path()).unwrap().count(), 1);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 4);
}

#[test]
fn dim_examples() {
    let v = json(&["dim", "--family", GEO, "--n", "2"]);
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).log2();
    assert!(v["h_lo"].as_f64().unwrap() <= golden && golden <= v["h_hi"].as_f64().unwrap());
    assert_eq!(v["method"], "moran");
    let v = json(&["dim", "--family", r#"{"family":"gauss"}"#, "--n", "2", "--method", "pressure", "--depth", "8"]);
    let (lo, hi) = (v["h_lo"].as_f64().unwrap(), v["h_hi"].as_f64().unwrap());
    assert!(lo < 0.5313 && hi > 0.5312 && hi - lo < 1e-2, "[{lo}, {hi}]");
    let o = run(&["dim", "--family", GEO, "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n must be ≥ 1"));
    let o = run(&["dim", "--family", GEO, "--n", "2", "--format", "csv", "--no-timestamp"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("n,method,h_lo,h_hi,residual"));
}

#[test]
fn family_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fam.json");
    std::fs::write(&path, r#"{"family":"table","b":[1.0,0.5,0.2],"name":"short"}"#).unwrap();
    let arg = format!("@{}", path.display());
    let v = json(&["dim", "--family", &arg, "--n", "2"]);
    assert!(v["h_lo"].as_f64().unwrap() > 0.0);
    let o = run(&["dim", "--family", "@/nonexistent/file.json", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn measure_density_hmeasure() {
    let v = json(&["measure", "--family", GEO, "--n", "2", "--interval", "0", "0.5"]);
    let m = &v["measure"];
    let want = (3.0 - 5f64.sqrt()) / 2.0;
    assert!(m[0].as_f64().unwrap() <= want && want <= m[1].as_f64().unwrap());
    let v = json(&["density", "--family", GEO, "--n", "2", "--interval", "0.25", "1"]);
    assert!((v["density"][0].as_f64().unwrap() - 1.2211).abs() < 1e-4);
    assert_eq!(v["interval_family"]["kind"], "grid");
    let v = json(&["hmeasure", "--family", GEO, "--n", "2", "--depth", "6"]);
    let h = ((1.0 + 5f64.sqrt()) / 2.0).log2();
    let want = 1.75f64.powf(-h);
    assert!((v["H_upper"].as_f64().unwrap() - want).abs() < 1e-9);
    assert!((v["cover_sum"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let o = run(&["measure", "--family", GEO, "--n", "2", "--interval", "0.7", "0.2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["verify", "--family", r#"{"family":"gauss"}"#, "g6"]), Some(1));
    assert_eq!(code(&["verify", "--family", r#"{"family":"gauss"}"#, "g4,g5"]), Some(0));
    assert_eq!(code(&["verify", "--family", r#"{"family":"gauss2"}"#, "g4,g6"]), Some(0));
    // κ(g_(j,1)) → 4, so the distortion condition fails for the squared system.
    assert_eq!(code(&["verify", "--family", r#"{"family":"gauss2"}"#, "g4,g5,g6"]), Some(1));
    assert_eq!(code(&["verify", "--family", GEO, "c2"]), Some(0));
    assert_eq!(code(&["verify", "--family", GEO, "c2strong"]), Some(1));
    assert_eq!(code(&["verify", "--family", r#"{"family":"table","b":[1,0.5,0.05]}"#, "c2"]), Some(4));
    assert_eq!(code(&["verify", "--family", GEO, "c9"]), Some(2));
    assert_eq!(code(&["verify", "--family", GEO, "g4"]), Some(2));
    let v = json(&["verify", "--family", r#"{"family":"gauss"}"#, "g6"]);
    assert_eq!(v["reports"][0]["witness"]["index"], 1);
}

#[test]
fn invalid_configs_exit_2() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["sweep", "--family", GEO, "--n-range", "9:3"]), Some(2));
    assert_eq!(code(&["dim", "--family", "{not json", "--n", "2"]), Some(2));
    assert_eq!(code(&["dim", "--family", r#"{"family":"geometric","q":2}"#, "--n", "2"]), Some(2));
    assert_eq!(code(&["dim", "--family", GEO, "--n", "2", "--method", "newton"]), Some(2));
    assert_eq!(code(&["dim", "--n", "2"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn every_format_parses() {
    let o = run(&["hmeasure", "--family", GEO, "--n", "3", "--format", "csv", "--no-timestamp"]);
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap().len(), 8);
    assert_eq!(rdr.records().count(), 1);
    let o = run(&["sweep", "--family", GEO, "--n-range", "2:4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(v["generated_at_unix"].is_u64());
    let o = run(&["verify", "--family", GEO, "--format", "csv", "--no-timestamp"]);
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rdr.records().count(), 3);
}
