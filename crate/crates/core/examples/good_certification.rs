//! Empirical (C, alpha)-good certificates for polynomials on a real interval
//! and on Z_2, and for their product over places.

use sadic::measures::{certify_good, combine_good_product, coordinate_abs, MeasureSpec, PlaceBall, SamplePoint};
use sadic::number_field::{places_over, NumberField};

const GRID: [f64; 5] = [0.01, 0.05, 0.1, 0.25, 0.5];

fn main() -> sadic::Result<()> {
    let real = MeasureSpec::new(vec![PlaceBall::interval(0.0, 1.0)])?;
    let x = coordinate_abs(0);
    let sq = |p: &SamplePoint| p[0][0].abs_f64().powi(2);
    for (name, f, c, alpha) in [("x", &x as &dyn sadic::measures::SampleFn, 1.0, 1.0), ("x^2", &sq, 1.0, 1.0), ("x^2", &sq, 2.0, 0.5)] {
        let cert = certify_good(&[f], &real, c, alpha, &GRID, 20_000, 1)?;
        println!("{name:>4} on [0,1] ({c}, {alpha})-good: {}", cert.pass);
    }

    let fp = *places_over(NumberField::rationals(), 2)?[0].finite().unwrap();
    let z2 = MeasureSpec::new(vec![PlaceBall::integers(fp)])?;
    let c2 = certify_good(&[&x], &z2, 1.0, 1.0, &GRID, 20_000, 2)?;
    println!("   x on Z_2   (1, 1)-good: {}", c2.pass);

    let c1 = certify_good(&[&x], &real, 1.0, 1.0, &GRID, 20_000, 1)?;
    let both = MeasureSpec::new(vec![PlaceBall::interval(0.0, 1.0), PlaceBall::integers(fp)])?;
    let prod = |p: &SamplePoint| p[0][0].abs_f64() * p[1][0].abs_f64();
    let pc = combine_good_product(&[c1, c2], &prod, &both, &GRID, 20_000, 3)?;
    println!("product candidate {:?}, confirmed {:?}", pc.candidate, pc.confirmed);
    Ok(())
}
