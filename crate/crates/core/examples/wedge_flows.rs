//! Exterior powers: Plücker coordinates, the wedge action of the flow and
//! covolumes of primitive submodules.

use sadic::dirichlet::central_ray_point;
use sadic::lattice::{
    covolume_submodule, enumerate_primitive_submodules, flow_lattice, plucker, wedge_action, Structure, WedgeVec,
};
use sadic::number_field::{KElem, NumberField};
use sadic::s_adic::{LocalMatrix, LocalValue, SConfig, DEFAULT_CAP};

fn main() -> sadic::Result<()> {
    let q = NumberField::rationals();
    let cfg = SConfig::with_primes(q, &[3])?;
    let b = |v: &[i64]| v.iter().map(|&x| KElem::from_int(q, x)).collect::<Vec<_>>();
    let w = plucker(&[b(&[1, 0, 2]), b(&[0, 1, 3])]);
    println!("plucker((1,0,2),(0,1,3)) = {:?}", w.iter().map(|x| x.to_string()).collect::<Vec<_>>());

    let a: Vec<LocalMatrix> = cfg
        .places()
        .iter()
        .map(|v| LocalMatrix::from_fn(1, 2, |_, j| LocalValue::from_kelem(&KElem::from_ratio(q, 1, j as i64 + 2), v, 30)))
        .collect();
    let t = central_ray_point(&cfg, 1, 2, &[8.0, 9.0], None)?;
    let h = flow_lattice(&cfg, &a, &t)?;

    let g = &h.matrices()[0];
    let e01 = WedgeVec::basis(&cfg.places()[0], 3, &[0, 1])?;
    let generic = wedge_action(g, &e01, Structure::Generic)?;
    println!("|wedge^2 g e01|_inf = {:.6}", generic.norm());

    for j in 1..=3 {
        let subs = enumerate_primitive_submodules(&cfg, 3, j, 1.0, DEFAULT_CAP)?;
        let covs: Vec<f64> = subs.iter().map(|d| covolume_submodule(d, &h)).collect::<sadic::Result<_>>()?;
        let min = covs.iter().copied().fold(f64::INFINITY, f64::min);
        println!("rank {j}: {} submodules, smallest covolume {min:.4}", subs.len());
    }
    Ok(())
}
