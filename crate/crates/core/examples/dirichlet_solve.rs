//! Dirichlet's theorem over O_S: solutions for sqrt2 along the central ray,
//! first over Z, then over Z[1/2] with A = 1/3 at the 2-adic place.

use sadic::dirichlet::{central_ray_point, solve_dirichlet, DirichletInstance};
use sadic::number_field::{KElem, NumberField};
use sadic::s_adic::{LocalMatrix, LocalValue, SConfig, DEFAULT_CAP, DEFAULT_PREC};

fn main() -> sadic::Result<()> {
    let q = NumberField::rationals();
    for primes in [&[][..], &[2][..]] {
        let cfg = SConfig::with_primes(q, primes)?;
        println!("S over primes {primes:?}");
        for scale in [10.0, 100.0, 1000.0] {
            let a: Vec<LocalMatrix> = cfg
                .places()
                .iter()
                .map(|v| {
                    let x = if v.is_archimedean() {
                        LocalValue::Real(2f64.sqrt())
                    } else {
                        LocalValue::from_kelem(&KElem::from_ratio(q, 1, 3), v, DEFAULT_PREC)
                    };
                    LocalMatrix::from_fn(1, 1, |_, _| x.clone())
                })
                .collect();
            let delta: Vec<f64> = cfg.places().iter().map(|v| if v.is_archimedean() { scale } else { 4.0 }).collect();
            let t = central_ray_point(&cfg, 1, 1, &delta, None)?;
            let s = solve_dirichlet(&DirichletInstance::new(cfg.clone(), a, t)?, DEFAULT_CAP)?;
            println!(
                "  delta_inf = {scale:>6}: x = {:>6}, y = {:>6}, residual content {:.3e}",
                s.x[0].to_string(),
                s.y[0].to_string(),
                s.residual_content
            );
        }
    }
    Ok(())
}
