use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::spec::{residue_reps, sample_ball, MapSpec, MeasureSpec, PlaceBall, SamplePoint};
use crate::error::{Error, Result};
use crate::number_field::KElem;
use crate::s_adic::{LocalValue, PadicApprox, DEFAULT_PREC};

/// A function on the support of a product measure, seen through its
/// (composite) absolute value.
pub trait SampleFn: Sync {
    fn abs_at(&self, x: &SamplePoint) -> f64;

    /// A Lipschitz constant of `|f|` on a one-dimensional real ball, when
    /// known; used to inflate sample maxima into sup bounds.
    fn lipschitz(&self, _spec: &MeasureSpec) -> Option<f64> {
        None
    }
}

impl<F> SampleFn for F
where
    F: Fn(&SamplePoint) -> f64 + Sync,
{
    fn abs_at(&self, x: &SamplePoint) -> f64 {
        self(x)
    }
}

/// `a_0 + a_1 f_1 + … + a_n f_n` on ball component `comp`.
#[derive(Clone, Debug)]
pub struct Combination {
    pub map: MapSpec,
    pub comp: usize,
    pub coeffs: Vec<LocalValue>,
}

impl Combination {
    pub fn new(map: MapSpec, comp: usize, coeffs: Vec<LocalValue>) -> Result<Self> {
        if comp >= map.comps.len() || coeffs.len() != map.n() + 1 {
            return Err(Error::invalid("a combination needs n + 1 coefficients for an existing component"));
        }
        Ok(Combination { map, comp, coeffs })
    }

    pub fn value(&self, x: &SamplePoint) -> LocalValue {
        let fx = self.map.eval(self.comp, &x[self.comp]);
        let mut acc = self.coeffs[0].clone();
        for (a, f) in self.coeffs[1..].iter().zip(&fx) {
            acc = &acc + &(a * f);
        }
        acc
    }
}

impl SampleFn for Combination {
    fn abs_at(&self, x: &SamplePoint) -> f64 {
        self.value(x).abs_f64()
    }

    fn lipschitz(&self, spec: &MeasureSpec) -> Option<f64> {
        match &spec.balls[self.comp] {
            PlaceBall::Real { center, radius } if center.len() == 1 => {
                let r = center[0].abs() + radius;
                Some(
                    self.coeffs[1..]
                        .iter()
                        .zip(&self.map.comps[self.comp])
                        .map(|(a, p)| a.abs_f64() * p.lipschitz_1d(r))
                        .sum(),
                )
            }
            _ => None,
        }
    }
}

/// `count` random coefficient vectors on the unit sphere of `‖·‖_{v,2}`.
pub fn random_combinations(map: &MapSpec, spec: &MeasureSpec, comp: usize, count: usize, seed: u64) -> Result<Vec<Combination>> {
    let ball = spec
        .balls
        .get(comp)
        .ok_or_else(|| Error::invalid("component out of range"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = map.n() + 1;
    (0..count)
        .map(|_| {
            let coeffs = match ball {
                PlaceBall::Real { .. } => {
                    let a: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let s = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                    a.into_iter().map(|x| LocalValue::Real(x / s)).collect()
                }
                PlaceBall::Complex { .. } => {
                    let a: Vec<num_complex::Complex64> = (0..len)
                        .map(|_| num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect();
                    let s = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                    a.into_iter().map(|z| LocalValue::Complex(z / s)).collect()
                }
                PlaceBall::Finite { place, .. } => {
                    let reps = residue_reps(place);
                    let mut a: Vec<KElem> = (0..len).map(|_| reps[rng.gen_range(0..reps.len())].clone()).collect();
                    let unit = rng.gen_range(0..len);
                    let nonzero: Vec<&KElem> = reps.iter().filter(|r| !r.is_zero()).collect();
                    a[unit] = nonzero[rng.gen_range(0..nonzero.len())].clone();
                    a.iter()
                        .map(|x| LocalValue::Padic(PadicApprox::from_kelem(x, *place, DEFAULT_PREC)))
                        .collect()
                }
            };
            Combination::new(map.clone(), comp, coeffs)
        })
        .collect()
}

/// Fraction of `n` samples with `|f(x)| < threshold`, with its binomial
/// standard error.
pub fn sublevel_fraction(f: &dyn SampleFn, spec: &MeasureSpec, threshold: f64, n: usize, seed: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let xs = sample_ball(spec, n, seed);
    let below = xs.par_iter().filter(|x| f.abs_at(x) < threshold).count();
    Ok(binomial(below, n))
}

/// `(k/n, √(p(1-p)/n))`.
pub fn binomial(k: usize, n: usize) -> (f64, f64) {
    let p = k as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// One line of certification evidence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodEvidence {
    /// `f{k}:b{j}`: function `k` of the family on ball `j` of the grid.
    pub ball_id: String,
    /// Relative level: the sublevel set is `{|f| < eps·‖f‖}`.
    pub epsilon: f64,
    pub fraction: f64,
    pub stderr: f64,
    pub sup: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Outcome of an empirical `(C, α)`-good certification.
#[derive(Clone, Debug, Serialize)]
pub struct GoodCert {
    pub c: f64,
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
    pub pass: bool,
    pub evidence: Vec<GoodEvidence>,
}

impl GoodCert {
    /// Re-reads the stored evidence at another `(C, α)`.
    pub fn passes_at(&self, c: f64, alpha: f64) -> bool {
        self.evidence.iter().all(|e| e.fraction <= c * e.epsilon.powf(alpha) + 3.0 * e.stderr)
    }
}

fn real_gap(spec: &MeasureSpec, xs: &[SamplePoint]) -> Option<f64> {
    let [PlaceBall::Real { center, radius }] = spec.balls.as_slice() else {
        return None;
    };
    if center.len() != 1 {
        return None;
    }
    let mut pts: Vec<f64> = xs.iter().filter_map(|x| x[0][0].as_complex().map(|z| z.re)).collect();
    pts.push(center[0] - radius);
    pts.push(center[0] + radius);
    pts.sort_by(f64::total_cmp);
    Some(pts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max))
}

/// Tests `μ({x ∈ B : |f(x)| < ε‖f‖_B}) ≤ C ε^α μ(B)` for every function of
/// the family, every `ε` of the grid and every ball of `spec.ball_grid()`.
/// A row passes when the fraction is within three standard errors of the bound.
pub fn certify_good(
    family: &[&dyn SampleFn],
    spec: &MeasureSpec,
    c: f64,
    alpha: f64,
    eps_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<GoodCert> {
    if family.is_empty() || eps_grid.is_empty() || n == 0 {
        return Err(Error::invalid("certification needs functions, levels and samples"));
    }
    if eps_grid.iter().any(|e| !(*e > 0.0)) || !(c > 0.0) || !(alpha > 0.0) {
        return Err(Error::invalid("levels and constants must be positive"));
    }
    let mut evidence = Vec::new();
    for (j, ball) in spec.ball_grid().iter().enumerate() {
        let xs = sample_ball(ball, n, seed.wrapping_add(j as u64));
        let gap = real_gap(ball, &xs);
        for (k, f) in family.iter().enumerate() {
            let vals: Vec<f64> = xs.par_iter().map(|x| f.abs_at(x)).collect();
            let mut sup = vals.iter().copied().fold(0.0, f64::max);
            if let (Some(g), Some(l)) = (gap, f.lipschitz(ball)) {
                sup += l * g / 2.0;
            }
            for &eps in eps_grid {
                let below = vals.iter().filter(|v| **v < eps * sup).count();
                let (fraction, stderr) = binomial(below, n);
                let bound = c * eps.powf(alpha);
                evidence.push(GoodEvidence {
                    ball_id: format!("f{k}:b{j}"),
                    epsilon: eps,
                    fraction,
                    stderr,
                    sup,
                    bound,
                    pass: fraction <= bound + 3.0 * stderr,
                });
            }
        }
    }
    Ok(GoodCert {
        c,
        alpha,
        n,
        seed,
        pass: evidence.iter().all(|e| e.pass),
        evidence,
    })
}

/// Result of combining per-factor certificates for `Π_i f_i(x_i)`.
#[derive(Clone, Debug, Serialize)]
pub struct ProductCert {
    /// `(Σ C_i, min α_i / m)`.
    pub candidate: (f64, f64),
    pub recert: GoodCert,
    /// The candidate, when re-certification on the product confirms it.
    pub confirmed: Option<(f64, f64)>,
}

/// Combines `(C_i, α_i)` certificates of the factors of a product function
/// on a product ball and re-certifies the candidate there.
pub fn combine_good_product(
    certs: &[GoodCert],
    product: &dyn SampleFn,
    spec: &MeasureSpec,
    eps_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<ProductCert> {
    if certs.is_empty() {
        return Err(Error::invalid("no certificates to combine"));
    }
    let m = certs.len() as f64;
    let c: f64 = certs.iter().map(|x| x.c).sum();
    let alpha = certs.iter().map(|x| x.alpha).fold(f64::INFINITY, f64::min) / m;
    let recert = certify_good(&[product], spec, c, alpha, eps_grid, n, seed)?;
    let confirmed = recert.pass.then_some((c, alpha));
    Ok(ProductCert {
        candidate: (c, alpha),
        recert,
        confirmed,
    })
}

/// `|x_comp|_v` for a one-dimensional component, convenient for tests and
/// examples.
pub fn coordinate_abs(comp: usize) -> impl Fn(&SamplePoint) -> f64 + Sync {
    move |x: &SamplePoint| x[comp][0].abs_f64()
}
