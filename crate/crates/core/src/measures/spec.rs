use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::number_field::{FinitePlace, KElem, Place, Splitting};
use crate::s_adic::{LocalValue, PadicApprox, SConfig};

/// Samples are drawn in chunks of this size; chunk `c` uses the ChaCha8
/// stream `c` of the run seed, so results do not depend on the thread count.
pub const CHUNK: usize = 1024;

/// Relative `p`-adic precision of sampled points.
pub const SAMPLE_PREC: u32 = 40;

/// A ball in `K_v^l` carrying Lebesgue (archimedean) or Haar (finite)
/// measure. Real balls are cubes `|x_j - c_j| ≤ r`, complex balls are
/// polydiscs in the usual modulus and finite balls are `c + ϖ^k O_v^l`.
#[derive(Clone, Debug, PartialEq)]
pub enum PlaceBall {
    Real { center: Vec<f64>, radius: f64 },
    Complex { center: Vec<Complex64>, radius: f64 },
    Finite { place: FinitePlace, center: Vec<KElem>, k: i64 },
}

impl PlaceBall {
    pub fn interval(lo: f64, hi: f64) -> Self {
        PlaceBall::Real {
            center: vec![(lo + hi) / 2.0],
            radius: (hi - lo) / 2.0,
        }
    }

    /// `O_v`, the unit ball at a finite place.
    pub fn integers(place: FinitePlace) -> Self {
        PlaceBall::Finite {
            place,
            center: vec![place.field().zero()],
            k: 0,
        }
    }

    pub fn place(&self) -> Place {
        match self {
            PlaceBall::Real { .. } => Place::Real,
            PlaceBall::Complex { .. } => Place::Complex,
            PlaceBall::Finite { place, .. } => Place::Finite(*place),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PlaceBall::Real { center, .. } => center.len(),
            PlaceBall::Complex { center, .. } => center.len(),
            PlaceBall::Finite { center, .. } => center.len(),
        }
    }

    /// Radius in the metric of the ball (`q^{-k}` at finite places).
    pub fn radius(&self) -> f64 {
        match self {
            PlaceBall::Real { radius, .. } | PlaceBall::Complex { radius, .. } => *radius,
            PlaceBall::Finite { place, k, .. } => (place.q() as f64).powi(-*k as i32),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            PlaceBall::Real { center, radius } => !center.is_empty() && *radius > 0.0,
            PlaceBall::Complex { center, radius } => !center.is_empty() && *radius > 0.0,
            PlaceBall::Finite { center, place, .. } => {
                !center.is_empty() && center.iter().all(|c| c.field() == place.field())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("ball needs a nonempty center and a positive radius"))
        }
    }

    /// `sup_{r} μ(B(x, 3r)) / μ(B(x, r))` for this measure.
    pub fn federer(&self) -> f64 {
        let l = self.dim() as i32;
        match self {
            PlaceBall::Real { .. } => 3f64.powi(l),
            PlaceBall::Complex { .. } => 3f64.powi(2 * l),
            PlaceBall::Finite { place, .. } => {
                let q = place.q();
                let mut e = 0;
                let mut qe = 1u64;
                while qe < 3 {
                    qe *= q;
                    e += 1;
                }
                (q as f64).powi(e * l)
            }
        }
    }

    /// Balls of half the radius (real, complex) or the `q^l` residue
    /// sub-balls (finite) inside this one.
    pub fn split(&self) -> Vec<PlaceBall> {
        match self {
            PlaceBall::Real { center, radius } => {
                let l = center.len();
                (0..1usize << l)
                    .map(|mask| PlaceBall::Real {
                        center: (0..l)
                            .map(|j| center[j] + if mask >> j & 1 == 1 { radius / 2.0 } else { -radius / 2.0 })
                            .collect(),
                        radius: radius / 2.0,
                    })
                    .collect()
            }
            PlaceBall::Complex { center, radius } => {
                let h = radius / 2.0;
                [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)]
                    .iter()
                    .map(|s| PlaceBall::Complex {
                        center: center.iter().map(|c| c + s).collect(),
                        radius: h,
                    })
                    .collect()
            }
            PlaceBall::Finite { place, center, k } => {
                let reps = residue_reps(place);
                let step = prime_element(place).pow(*k);
                let mut out: Vec<Vec<KElem>> = vec![Vec::new()];
                for c in center {
                    let mut next = Vec::new();
                    for prefix in &out {
                        for r in &reps {
                            let mut v = prefix.clone();
                            v.push(c + &(&step * r));
                            next.push(v);
                        }
                    }
                    out = next;
                }
                out.into_iter()
                    .map(|center| PlaceBall::Finite {
                        place: *place,
                        center,
                        k: k + 1,
                    })
                    .collect()
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<LocalValue> {
        match self {
            PlaceBall::Real { center, radius } => center
                .iter()
                .map(|c| LocalValue::Real(c + radius * (2.0 * rng.gen::<f64>() - 1.0)))
                .collect(),
            PlaceBall::Complex { center, radius } => center
                .iter()
                .map(|c| {
                    let r = radius * rng.gen::<f64>().sqrt();
                    let th = std::f64::consts::TAU * rng.gen::<f64>();
                    LocalValue::Complex(c + Complex64::from_polar(r, th))
                })
                .collect(),
            PlaceBall::Finite { place, center, k } => {
                let step = prime_element(place).pow(*k);
                center
                    .iter()
                    .map(|c| {
                        let u = random_integer(place, rng);
                        let x = c + &(&step * &u);
                        LocalValue::Padic(PadicApprox::from_kelem(&x, *place, SAMPLE_PREC))
                    })
                    .collect()
            }
        }
    }
}

/// `p` at unramified places and the uniformizer at ramified ones.
pub(crate) fn prime_element(place: &FinitePlace) -> KElem {
    match place.splitting() {
        Splitting::Ramified => place.uniformizer(),
        _ => KElem::from_int(place.field(), place.p() as i64),
    }
}

/// Representatives of the residue field `O_v / ϖ`.
pub(crate) fn residue_reps(place: &FinitePlace) -> Vec<KElem> {
    let k = place.field();
    let p = place.p() as i64;
    if place.splitting() == Splitting::Inert {
        (0..p).flat_map(|a| (0..p).map(move |b| KElem::from_ints(k, a, b))).collect()
    } else {
        (0..p).map(|a| KElem::from_int(k, a)).collect()
    }
}

/// A Haar-random element of `O_v` modulo `p^{SAMPLE_PREC}`.
fn random_integer(place: &FinitePlace, rng: &mut ChaCha8Rng) -> KElem {
    let p = place.p();
    let digits = |rng: &mut ChaCha8Rng| {
        let mut acc = num_bigint::BigInt::from(0);
        for _ in 0..SAMPLE_PREC {
            acc = acc * p + rng.gen_range(0..p);
        }
        acc
    };
    let k = place.field();
    let a = digits(rng);
    let b = if place.is_qp() { num_bigint::BigInt::from(0) } else { digits(rng) };
    KElem::new(k, a.into(), b.into())
}

/// A sample point: coordinates per ball component.
pub type SamplePoint = Vec<Vec<LocalValue>>;

/// The product measure `μ = Π_v μ_v` restricted to a product of balls.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpec {
    pub balls: Vec<PlaceBall>,
}

impl MeasureSpec {
    pub fn new(balls: Vec<PlaceBall>) -> Result<Self> {
        if balls.is_empty() {
            return Err(Error::invalid("a measure needs at least one ball"));
        }
        for b in &balls {
            b.validate()?;
        }
        Ok(MeasureSpec { balls })
    }

    /// Checks that there is exactly one ball per place of `S`, in order.
    pub fn check_places(&self, cfg: &SConfig) -> Result<()> {
        if self.balls.len() != cfg.len() || self.balls.iter().zip(cfg.places()).any(|(b, v)| b.place() != *v) {
            return Err(Error::invalid("the measure must have one ball per place of S, in order"));
        }
        Ok(())
    }

    /// The ball itself followed by the products of first-level sub-balls.
    pub fn ball_grid(&self) -> Vec<MeasureSpec> {
        let mut out = vec![Vec::new()];
        for b in &self.balls {
            let mut next = Vec::new();
            for prefix in &out {
                for s in b.split() {
                    let mut v: Vec<PlaceBall> = prefix.clone();
                    v.push(s);
                    next.push(v);
                }
            }
            out = next;
        }
        let mut grid = vec![self.clone()];
        grid.extend(out.into_iter().map(|balls| MeasureSpec { balls }));
        grid
    }
}

/// `N` deterministic samples of `μ` restricted to the ball.
pub fn sample_ball(spec: &MeasureSpec, n: usize, seed: u64) -> Vec<SamplePoint> {
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len)
                .map(|_| spec.balls.iter().map(|b| b.sample(&mut rng)).collect::<SamplePoint>())
                .collect::<Vec<_>>()
        })
        .collect()
}

/// The Federer constant `D` of the product measure.
pub fn federer_constant(spec: &MeasureSpec) -> f64 {
    spec.balls.iter().map(|b| b.federer()).product()
}

/// Default Besicovitch multiplicity `N_X`: `1` on ultrametric factors, `2^l`
/// for the cubes of `R^l` and `19` per complex coordinate.
pub fn besicovitch_constant(spec: &MeasureSpec) -> f64 {
    spec.balls
        .iter()
        .map(|b| match b {
            PlaceBall::Real { center, .. } => 2f64.powi(center.len() as i32),
            PlaceBall::Complex { center, .. } => 19f64.powi(center.len() as i32),
            PlaceBall::Finite { .. } => 1.0,
        })
        .product()
}

/// A polynomial over `K_v` in `l` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    /// `(coefficient, exponents)`.
    pub terms: Vec<(LocalValue, Vec<u32>)>,
}

impl Polynomial {
    /// `c·x_var^e`.
    pub fn monomial(c: LocalValue, l: usize, var: usize, e: u32) -> Self {
        let mut exps = vec![0; l];
        exps[var] = e;
        Polynomial { terms: vec![(c, exps)] }
    }

    pub fn eval(&self, x: &[LocalValue]) -> LocalValue {
        let mut acc: Option<LocalValue> = None;
        for (c, exps) in &self.terms {
            let mut t = c.clone();
            for (xj, &e) in x.iter().zip(exps) {
                for _ in 0..e {
                    t = &t * xj;
                }
            }
            acc = Some(match acc {
                None => t,
                Some(a) => &a + &t,
            });
        }
        acc.expect("polynomial with at least one term")
    }

    /// An upper bound for `|f|_v` on the ball.
    pub fn sup_bound(&self, ball: &PlaceBall) -> f64 {
        match ball {
            PlaceBall::Real { center, radius } => {
                let r: Vec<f64> = center.iter().map(|c| c.abs() + radius).collect();
                self.arch_bound(&r)
            }
            PlaceBall::Complex { center, radius } => {
                let r: Vec<f64> = center.iter().map(|c| c.norm() + radius).collect();
                self.arch_bound(&r).powi(2)
            }
            PlaceBall::Finite { place, center, k } => {
                let v = Place::Finite(*place);
                let r: Vec<f64> = center
                    .iter()
                    .map(|c| crate::number_field::abs_value(c, &v).to_f64().max((place.q() as f64).powi(-*k as i32)))
                    .collect();
                self.terms
                    .iter()
                    .map(|(c, e)| c.abs_f64() * r.iter().zip(e).map(|(ri, &ei)| ri.powi(ei as i32)).product::<f64>())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// `Σ |c| Π R_j^{e_j}` in the usual modulus.
    fn arch_bound(&self, r: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                let m = c.as_complex().map_or(0.0, |z| z.norm());
                m * r.iter().zip(e).map(|(ri, &ei)| ri.powi(ei as i32)).product::<f64>()
            })
            .sum()
    }

    /// A Lipschitz bound on a real interval `|x| ≤ R` for one variable.
    pub fn lipschitz_1d(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                let k = e[0] as f64;
                if k == 0.0 {
                    0.0
                } else {
                    c.abs_f64() * k * r.powi(e[0] as i32 - 1)
                }
            })
            .sum()
    }
}

/// `f = (f^{(v)})_v`: `n` polynomial components per ball.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    pub comps: Vec<Vec<Polynomial>>,
}

impl MapSpec {
    pub fn new(comps: Vec<Vec<Polynomial>>) -> Result<Self> {
        let n = comps.first().map_or(0, |c| c.len());
        if comps.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("every place needs the same number of components"));
        }
        if comps.iter().flatten().any(|p| p.terms.is_empty()) {
            return Err(Error::invalid("empty polynomial"));
        }
        Ok(MapSpec { comps })
    }

    /// `x ↦ (x, x², …, xⁿ)` on every one-dimensional ball of `spec`.
    pub fn veronese(spec: &MeasureSpec, n: usize) -> Result<Self> {
        let comps = spec
            .balls
            .iter()
            .map(|b| {
                if b.dim() != 1 {
                    return Err(Error::invalid("the Veronese curve needs one-dimensional balls"));
                }
                let one = LocalValue::one(&b.place(), crate::s_adic::DEFAULT_PREC);
                Ok((1..=n as u32).map(|e| Polynomial::monomial(one.clone(), 1, 0, e)).collect())
            })
            .collect::<Result<_>>()?;
        MapSpec::new(comps)
    }

    pub fn n(&self) -> usize {
        self.comps[0].len()
    }

    /// `(f_1(x), …, f_n(x))` on component `comp`.
    pub fn eval(&self, comp: usize, x: &[LocalValue]) -> Vec<LocalValue> {
        self.comps[comp].iter().map(|p| p.eval(x)).collect()
    }
}
