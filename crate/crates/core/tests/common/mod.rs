#![allow(dead_code)]

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sadic::dirichlet::{DirichletInstance, RayPoint};
use sadic::lattice::Structure;
use sadic::number_field::{places_over, KElem, NumberField, Place};
use sadic::s_adic::{LocalMatrix, LocalValue, SConfig, DEFAULT_PREC};

pub fn finite_candidates(k: NumberField) -> Vec<Place> {
    let primes: &[u64] = if k.is_rational() { &[2, 3, 5] } else { &[2, 3, 5] };
    primes.iter().flat_map(|&p| places_over(k, p).unwrap()).collect()
}

/// `S` with the archimedean place and up to `max_finite` random finite places.
pub fn random_s(rng: &mut ChaCha8Rng, k: NumberField, max_finite: usize) -> SConfig {
    let mut fin = finite_candidates(k);
    fin.shuffle(rng);
    let count = rng.gen_range(0..=max_finite);
    let mut places = vec![sadic::number_field::infinite_place(k)];
    places.extend(fin.into_iter().take(count));
    SConfig::new(k, places).unwrap()
}

pub fn random_kelem(rng: &mut ChaCha8Rng, k: NumberField, num: i64, den: i64) -> KElem {
    let a = KElem::from_ratio(k, rng.gen_range(-num..=num), rng.gen_range(1..=den));
    if k.is_rational() {
        return a;
    }
    let b = KElem::from_ratio(k, rng.gen_range(-num..=num), rng.gen_range(1..=den));
    let w = KElem::from_ints(k, 0, 1);
    &a + &(&b * &w)
}

pub fn random_local(rng: &mut ChaCha8Rng, v: &Place) -> LocalValue {
    match v {
        Place::Real => LocalValue::Real(rng.gen_range(-2.0..2.0)),
        Place::Complex => LocalValue::Complex(Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))),
        Place::Finite(fp) => {
            let x = random_kelem(rng, fp.field(), 30, 12);
            LocalValue::from_kelem(&x, v, DEFAULT_PREC)
        }
    }
}

/// A random point of the positive chamber with `‖t‖_∞ ≤ sup`, or `None`
/// when none turns up (large residue fields may leave no room).
pub fn random_ray_point(rng: &mut ChaCha8Rng, cfg: &SConfig, m: usize, n: usize, sup: f64) -> Option<RayPoint> {
    let target = cfg.field().field_constant().powi((m + n) as i32);
    for _ in 0..1000 {
        let mut t: Vec<Vec<f64>> = Vec::with_capacity(cfg.len());
        let mut arch = 0;
        let mut rest = 1.0;
        for (i, v) in cfg.places().iter().enumerate() {
            let row: Vec<f64> = match v {
                Place::Finite(fp) => {
                    let q = fp.q() as f64;
                    let top = (sup.ln() / q.ln()).floor() as i32;
                    let mut r: Vec<f64> = (0..m).map(|_| q.powi(-rng.gen_range(1..=2))).collect();
                    r.extend((0..n).map(|_| q.powi(rng.gen_range(0..=top.max(0)))));
                    r
                }
                _ => {
                    arch = i;
                    let mut r = vec![0.0; m];
                    r.extend((0..n).map(|_| rng.gen_range(1.0..sup)));
                    r
                }
            };
            rest *= row.iter().filter(|x| **x > 0.0).product::<f64>();
            t.push(row);
        }
        let r = target / rest;
        if !(r < 1.0) {
            continue;
        }
        let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..1.0)).collect();
        let ws: f64 = w.iter().sum();
        for i in 0..m {
            t[arch][i] = r.powf(w[i] / ws);
        }
        if let Ok(p) = RayPoint::new(cfg, m, n, t) {
            return Some(p);
        }
    }
    None
}

/// A random Dirichlet instance over `k` with `m + n ≤ 3` and `|S| ≤ 3`.
pub fn random_instance(rng: &mut ChaCha8Rng, k: NumberField) -> DirichletInstance {
    loop {
        if let Some(inst) = try_random_instance(rng, k) {
            return inst;
        }
    }
}

fn try_random_instance(rng: &mut ChaCha8Rng, k: NumberField) -> Option<DirichletInstance> {
    let cfg = random_s(rng, k, 2);
    let (m, n) = *[(1, 1), (1, 2), (2, 1)].choose(rng).unwrap();
    let a: Vec<LocalMatrix> = cfg
        .places()
        .iter()
        .map(|v| {
            let vals: Vec<LocalValue> = (0..m * n).map(|_| random_local(rng, v)).collect();
            LocalMatrix::from_fn(m, n, |i, j| vals[i * n + j].clone())
        })
        .collect();
    let t = random_ray_point(rng, &cfg, m, n, 32.0)?;
    Some(DirichletInstance::new(cfg, a, t).unwrap())
}

/// A random matrix of the given structure at `v`.
pub fn structured_matrix(rng: &mut ChaCha8Rng, v: &Place, dim: usize, s: Structure) -> LocalMatrix {
    let one = LocalValue::one(v, DEFAULT_PREC);
    let zero = LocalValue::zero(v);
    let nonzero = |rng: &mut ChaCha8Rng| loop {
        let x = random_local(rng, v);
        if !x.is_zero() {
            return x;
        }
    };
    let d: Vec<LocalValue> = (0..dim).map(|_| nonzero(rng)).collect();
    let f: Vec<LocalValue> = (0..dim).map(|_| random_local(rng, v)).collect();
    match s {
        Structure::Generic => LocalMatrix::from_fn(dim, dim, |_, _| random_local(rng, v)),
        Structure::Diagonal => LocalMatrix::from_fn(dim, dim, |i, j| if i == j { d[i].clone() } else { zero.clone() }),
        Structure::Unipotent => LocalMatrix::from_fn(dim, dim, |i, j| match (i, j) {
            (0, 0) => one.clone(),
            (0, j) => f[j].clone(),
            (i, j) if i == j => one.clone(),
            _ => zero.clone(),
        }),
        Structure::Flow => LocalMatrix::from_fn(dim, dim, |i, j| match (i, j) {
            (0, 0) => d[0].clone(),
            (0, j) => &d[0] * &f[j],
            (i, j) if i == j => d[i].clone(),
            _ => zero.clone(),
        }),
    }
}

/// Agreement of two local values: exact at finite places, relative at
/// archimedean ones.
pub fn agree(a: &LocalValue, b: &LocalValue, rel: f64) -> bool {
    match (a.as_complex(), b.as_complex()) {
        (Some(x), Some(y)) => (x - y).norm() <= rel * x.norm().max(y.norm()).max(1.0),
        _ => (a - b).is_zero(),
    }
}
