//! S-integers of Q(i) near a target, and the box enumerator.

use sadic::number_field::{places_over, KElem, NumberField, Place};
use sadic::s_adic::{enumerate_box, is_s_integer, s_integers_near, LocalBound, LocalValue, SBox, SConfig, DEFAULT_CAP};

fn main() -> sadic::Result<()> {
    let k = NumberField::gaussian();
    let v2 = places_over(k, 2)?[0];
    let cfg = SConfig::new(k, vec![Place::Complex, v2])?;
    println!("S = {:?}", cfg.places().iter().map(|v| v.to_string()).collect::<Vec<_>>());

    for s in ["1/2", "1/(1+i)", "1/3", "3/4+1/8i"] {
        let x = KElem::parse(k, s.replace("1/(1+i)", "1/2-1/2i").as_str())?;
        println!("{s:>8} is an S-integer: {}", is_s_integer(&x, &cfg));
    }

    // y with |y - (0.3 + 0.2i)|^2 <= 0.1 and |y|_2 <= 4
    let target = vec![
        LocalValue::Complex(num_complex::Complex64::new(0.3, 0.2)),
        LocalValue::zero(&cfg.places()[1]),
    ];
    let bounds = [LocalBound::Arch(0.1), LocalBound::from_abs(4.0, &cfg.places()[1])?];
    for y in s_integers_near(&cfg, &target, &bounds, DEFAULT_CAP)? {
        println!("near target: {y}");
    }

    let bx = SBox::uniform(&[LocalBound::Arch(1.0), LocalBound::Val(0)], 1);
    println!("{} points with |x|^2 <= 1 and |x|_2 <= 1", enumerate_box(&cfg, 1, &bx, DEFAULT_CAP)?.len());
    Ok(())
}
