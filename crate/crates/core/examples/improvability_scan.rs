//! Horizon-truncated scans of epsilon-improvability along the central ray.

use sadic::dirichlet::{central_ray_schedule, scan_di};
use sadic::number_field::NumberField;
use sadic::s_adic::{LocalMatrix, LocalValue, SConfig, DEFAULT_CAP};

fn main() -> sadic::Result<()> {
    let cfg = SConfig::with_primes(NumberField::rationals(), &[])?;
    let schedule = central_ray_schedule(&cfg, 1, 1, 10, 2.0, 2.0)?;
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    for (name, a) in [("3/7", 3.0 / 7.0), ("sqrt2", 2f64.sqrt()), ("phi", golden)] {
        let a = vec![LocalMatrix::from_fn(1, 1, |_, _| LocalValue::Real(a))];
        for eps in [0.9, 0.5] {
            let rep = scan_di(&cfg, &a, &schedule, eps, 1.0, DEFAULT_CAP)?;
            let marks: String = rep
                .rows
                .iter()
                .map(|r| if r.witness.is_some() { '+' } else { '.' })
                .collect();
            println!("{name:>6} eps {eps}: {marks}  aggregate {}", rep.aggregate);
        }
    }
    Ok(())
}
