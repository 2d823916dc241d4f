//! Families as JSON, including a custom table.

use hausmeter::{build_system, solve_moran, FamilySpec};

fn main() -> hausmeter::Result<()> {
    let specs = [
        r#"{"family":"geometric","q":0.5}"#,
        r#"{"family":"power","alpha":2.0,"name":"squares"}"#,
        r#"{"family":"table","b":[1.0,0.6,0.3,0.1,0.05]}"#,
    ];
    for text in specs {
        let spec = FamilySpec::from_json(text)?;
        let sys = build_system(&spec, 3)?;
        println!("{}  ->  {spec}, h_3 = {:.10}", spec.canonical_json(), solve_moran(&sys)?.h.mid());
    }
    match FamilySpec::from_json(r#"{"family":"geometric","q":1.5}"#).and_then(|s| build_system(&s, 2)) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
