//! Quantitative nondivergence for the Veronese curve over Q_S with
//! S = {inf, 2}: constants, the empirical left side and the bound.

use sadic::experiments::{run_text, Overrides};

const CONFIG: &str = r#"{"experiment":"nondiv-check","field":"Q","S":["inf",2],
 "ball":{"inf":{"interval":[0,1]},"2":{}},"map":{"veronese":2},
 "t":{"central":{"inf":64,"2":4}},"samples":2000,"seed":7}"#;

fn main() -> sadic::Result<()> {
    let dir = std::env::temp_dir().join("sadic-nondivergence-check");
    let m = run_text(CONFIG, &dir, &Overrides::default())?;
    println!("run {} -> {}", m.run_id, dir.display());
    print!("{}", std::fs::read_to_string(dir.join("constants.json"))?);
    print!("{}", std::fs::read_to_string(dir.join("report.csv"))?);
    Ok(())
}
