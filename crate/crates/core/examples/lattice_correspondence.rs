//! The Dirichlet system and the shortest content of the flowed lattice
//! g_t u_A O_S^{m+n}: every improvable instance yields a short lattice vector.

use sadic::dirichlet::{central_ray_schedule, DirichletInstance};
use sadic::lattice::{check_correspondence, delta_lattice, flow_lattice};
use sadic::number_field::NumberField;
use sadic::s_adic::{LocalMatrix, LocalValue, SConfig, DEFAULT_CAP};

fn main() -> sadic::Result<()> {
    let cfg = SConfig::with_primes(NumberField::gaussian(), &[])?;
    let a = vec![LocalMatrix::from_fn(1, 2, |_, j| {
        LocalValue::Complex(num_complex::Complex64::new(2f64.sqrt(), 1.0 / (j as f64 + 3.0)))
    })];
    println!("{:>8} {:>10} {:>10} {:>6}", "t_sup", "delta", "threshold", "holds");
    for t in central_ray_schedule(&cfg, 1, 2, 6, 2.0, 2.0)? {
        let d = delta_lattice(&flow_lattice(&cfg, &a, &t)?, None, DEFAULT_CAP)?;
        let inst = DirichletInstance::new(cfg.clone(), a.clone(), t.clone())?;
        let r = check_correspondence(&inst, 0.9, DEFAULT_CAP)?;
        println!("{:>8.1} {:>10.4} {:>10.4} {:>6}", t.sup_norm(), d.delta, r.threshold, r.holds);
    }
    Ok(())
}
