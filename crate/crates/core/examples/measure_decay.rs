//! Decay of sublevel measures of x^2 on [0,1] against sqrt(eps), and the
//! sup lower bounds rho_v for the Veronese curve.

use sadic::measures::{estimate_rho_v, sublevel_fraction, MapSpec, MeasureSpec, PlaceBall, SamplePoint};
use sadic::number_field::{places_over, NumberField};

fn main() -> sadic::Result<()> {
    let real = MeasureSpec::new(vec![PlaceBall::interval(0.0, 1.0)])?;
    let sq = |p: &SamplePoint| p[0][0].abs_f64().powi(2);
    println!("{:>8} {:>10} {:>10}", "eps", "measure", "sqrt(eps)");
    for eps in [0.001, 0.01, 0.1, 0.5] {
        let (p, se) = sublevel_fraction(&sq, &real, eps, 100_000, 4)?;
        println!("{eps:>8} {p:>10.4} {:>10.4}   (stderr {se:.1e})", eps.sqrt());
    }

    let fp = *places_over(NumberField::rationals(), 2)?[0].finite().unwrap();
    for spec in [real, MeasureSpec::new(vec![PlaceBall::integers(fp)])?] {
        let map = MapSpec::veronese(&spec, 2)?;
        let net = if spec.balls[0].place().is_archimedean() { 160 } else { 3 };
        let r = estimate_rho_v(&map, 0, &spec, 2000, net, 5)?;
        println!("rho at {}: raw {:.4}, lower {:.4} over {} directions", spec.balls[0].place(), r.raw, r.lower, r.net_size);
    }
    Ok(())
}
