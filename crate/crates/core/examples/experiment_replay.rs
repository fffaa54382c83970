//! Runs a delta trajectory, then replays its manifest and compares the CSV
//! bodies byte for byte.

use sadic::experiments::{csv_bodies, manifest_path, replay, run_text, Overrides};

const CONFIG: &str = r#"{"experiment":"delta-trajectory","field":"Q(sqrt-2)","S":["inf"],"m":1,"n":1,
 "A":{"inf":{"re":"sqrt2","im":"1/3"}},"eps":0.5,
 "schedule":{"len":6,"arch_start":4,"arch_ratio":2}}"#;

fn main() -> sadic::Result<()> {
    let base = std::env::temp_dir().join("sadic-replay");
    let (a, b) = (base.join("first"), base.join("second"));
    let m1 = run_text(CONFIG, &a, &Overrides::default())?;
    let m2 = replay(&manifest_path(&a), &b)?;
    print!("{}", std::fs::read_to_string(a.join("trajectory.csv"))?);
    println!("run id {} / {}", m1.run_id, m2.run_id);
    println!("identical CSV bodies: {}", csv_bodies(&a, &m1)? == csv_bodies(&b, &m2)?);
    Ok(())
}
