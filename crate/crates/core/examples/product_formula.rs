//! Normalized absolute values and the product formula in every supported field.

use sadic::number_field::{abs_value, check_product_formula, places_over, support_primes, KElem, NumberField};

fn main() -> sadic::Result<()> {
    let fields = [
        NumberField::rationals(),
        NumberField::gaussian(),
        NumberField::imaginary_quadratic(2)?,
        NumberField::imaginary_quadratic(3)?,
        NumberField::imaginary_quadratic(7)?,
        NumberField::imaginary_quadratic(11)?,
    ];
    for k in fields {
        let x = KElem::parse(k, if k.is_rational() { "-12/35" } else { "3/10+5/6w" })?;
        println!("{k}: x = {x}");
        println!("  |x|_inf = {:.6}", abs_value(&x, &sadic::number_field::infinite_place(k)).to_f64());
        for p in support_primes(&x)? {
            for v in places_over(k, p)? {
                println!("  |x|_{v} = {}", abs_value(&x, &v).to_f64());
            }
        }
        println!("  |log prod_v |x|_v| = {:.2e}", check_product_formula(&x)?);
    }
    Ok(())
}
