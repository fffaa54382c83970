use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::arith::{big, factor, hensel_root, is_prime, pow_u, vp};
use super::field::{FieldKind, KElem, NumberField};
use crate::error::{Error, Result};

/// How a rational prime behaves in the field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Splitting {
    /// The base field `Q` itself.
    Rational,
    Inert,
    Ramified,
    Split,
}

/// A finite place of `K`, given by a prime element `π` of `O_K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FinitePlace {
    field: NumberField,
    p: u64,
    pi: (i64, i64),
    e: u32,
    f: u32,
    splitting: Splitting,
    /// For split places: the residue of `ω` modulo `p` under `O_K → Z_p`.
    root: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    Real,
    Complex,
    Finite(FinitePlace),
}

/// Normalized absolute value `|x|_v`. Finite values are kept as exact powers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AbsValue {
    Zero,
    Arch(f64),
    /// `p^exp`.
    Power { p: u64, exp: i64 },
}

impl AbsValue {
    pub fn to_f64(self) -> f64 {
        match self {
            AbsValue::Zero => 0.0,
            AbsValue::Arch(x) => x,
            AbsValue::Power { p, exp } => (p as f64).powf(exp as f64),
        }
    }

    pub fn ln(self) -> f64 {
        match self {
            AbsValue::Zero => f64::NEG_INFINITY,
            AbsValue::Arch(x) => x.ln(),
            AbsValue::Power { p, exp } => exp as f64 * (p as f64).ln(),
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, AbsValue::Zero)
    }
}

impl FinitePlace {
    pub fn field(&self) -> NumberField {
        self.field
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn splitting(&self) -> Splitting {
        self.splitting
    }

    pub fn local_degree(&self) -> u32 {
        self.e * self.f
    }

    /// Size of the residue field.
    pub fn q(&self) -> u64 {
        self.p.pow(self.f)
    }

    pub fn uniformizer(&self) -> KElem {
        KElem::from_ints(self.field, self.pi.0, self.pi.1)
    }

    pub fn pi_coords(&self) -> (i64, i64) {
        self.pi
    }

    /// True when the completion is `Q_p` itself.
    pub fn is_qp(&self) -> bool {
        matches!(self.splitting, Splitting::Rational | Splitting::Split)
    }

    /// Image of `ω` in `Z / p^k` for split places.
    pub fn omega_root(&self, k: u32) -> BigInt {
        debug_assert_eq!(self.splitting, Splitting::Split);
        let (t, n) = self.field.omega_tn();
        hensel_root(t, n, self.p, self.root, k)
    }

    /// `v_π(x)`, or `None` for `x = 0`.
    pub fn valuation(&self, x: &KElem) -> Option<i64> {
        if x.is_zero() {
            return None;
        }
        let (a, b, d) = x.integral_parts();
        let vd = vp(&d, self.p) as i64 * self.e as i64;
        Some(self.valuation_integral(&a, &b) - vd)
    }

    /// `v_π(a + bω)` for a nonzero integral element.
    pub(crate) fn valuation_integral(&self, a: &BigInt, b: &BigInt) -> i64 {
        let vp0 = |n: &BigInt| {
            if n.is_zero() {
                i64::MAX
            } else {
                vp(n, self.p) as i64
            }
        };
        match self.splitting {
            Splitting::Rational => vp0(a),
            Splitting::Inert => vp0(a).min(vp0(b)),
            Splitting::Ramified => {
                let (t, n) = self.field.omega_tn();
                let norm = a * a + a * b * big(t) + b * b * big(n);
                vp0(&norm)
            }
            Splitting::Split => {
                let (t, n) = self.field.omega_tn();
                let pb = big(self.p as i64);
                // divide by π via α·conj(π)/p while the quotient stays integral
                let (pa, pbv) = (big(self.pi.0 + self.pi.1 * t), big(-self.pi.1));
                let (mut a, mut b) = (a.clone(), b.clone());
                let mut v = 0;
                loop {
                    let (na, nb) = mul_int(&a, &b, &pa, &pbv, t, n);
                    let (qa, ra) = na.div_rem(&pb);
                    let (qb, rb) = nb.div_rem(&pb);
                    if !ra.is_zero() || !rb.is_zero() {
                        return v;
                    }
                    a = qa;
                    b = qb;
                    v += 1;
                }
            }
        }
    }
}

pub(crate) fn mul_int(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt, t: i64, n: i64) -> (BigInt, BigInt) {
    let bd = b * d;
    (a * c - &bd * big(n), a * d + b * c + bd * big(t))
}

impl Place {
    pub fn is_archimedean(&self) -> bool {
        !matches!(self, Place::Finite(_))
    }

    pub fn local_degree(&self) -> u32 {
        match self {
            Place::Real => 1,
            Place::Complex => 2,
            Place::Finite(fp) => fp.local_degree(),
        }
    }

    pub fn finite(&self) -> Option<&FinitePlace> {
        match self {
            Place::Finite(fp) => Some(fp),
            _ => None,
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real | Place::Complex => f.write_str("inf"),
            Place::Finite(fp) => {
                if fp.splitting == Splitting::Split {
                    write!(f, "v{}[{}]", fp.p, fp.uniformizer())
                } else {
                    write!(f, "v{}", fp.p)
                }
            }
        }
    }
}

/// The archimedean place of `K`.
pub fn infinite_place(k: NumberField) -> Place {
    if k.is_rational() {
        Place::Real
    } else {
        Place::Complex
    }
}

/// All finite places of `K` above the rational prime `p`.
pub fn places_over(k: NumberField, p: u64) -> Result<Vec<Place>> {
    if !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if p >= 1 << 60 {
        return Err(Error::invalid(format!("prime {p} is too large")));
    }
    let pi = p as i64;
    let mk = |pi_c: (i64, i64), e, f, splitting, root| {
        Place::Finite(FinitePlace {
            field: k,
            p,
            pi: pi_c,
            e,
            f,
            splitting,
            root,
        })
    };
    if k.kind() == FieldKind::Rationals {
        return Ok(vec![mk((pi, 0), 1, 1, Splitting::Rational, 0)]);
    }
    let (t, n) = k.omega_tn();
    let disc = k.discriminant();
    if disc.rem_euclid(pi) == 0 {
        let u = find_norm_element(k, pi)?;
        return Ok(vec![mk(u, 2, 1, Splitting::Ramified, 0)]);
    }
    let split = if p == 2 {
        t == 1 && n % 2 == 0
    } else {
        let e = BigInt::from(disc).modpow(&BigInt::from((p - 1) / 2), &BigInt::from(p));
        e.is_one()
    };
    if !split {
        return Ok(vec![mk((pi, 0), 1, 2, Splitting::Inert, 0)]);
    }
    let (a, b) = find_norm_element(k, pi)?;
    let conj = (a + b * t, -b);
    let root_of = |(a, b): (i64, i64)| -> u64 {
        // a + b r ≡ 0 (mod p)
        let binv = super::arith::mod_inverse(&big(b), &big(pi)).expect("p does not divide b");
        (big(-a) * binv).mod_floor(&big(pi)).to_u64().unwrap()
    };
    Ok(vec![
        mk((a, b), 1, 1, Splitting::Split, root_of((a, b))),
        mk(conj, 1, 1, Splitting::Split, root_of(conj)),
    ])
}

/// Smallest `a + bω` (by `b ≥ 1`, then `|a|`, nonnegative `a` first)
/// with norm `p`.
fn find_norm_element(k: NumberField, p: i64) -> Result<(i64, i64)> {
    if p > 1_000_000 {
        reduced_norm_element(k, p)
    } else {
        scan_norm_element(k, p)
    }
}

fn scan_norm_element(k: NumberField, p: i64) -> Result<(i64, i64)> {
    let (t, n) = k.omega_tn();
    // a² + t·b·a + (n·b² - p) = 0 has an integer root iff its discriminant is a square
    let mut b = 1i64;
    while 4 * n * b * b - t * t * b * b <= 4 * p {
        let disc = t * t * b * b - 4 * (n * b * b - p);
        let r = (disc as f64).sqrt().round() as i64;
        if let Some(s) = (r - 1..=r + 1).find(|s| *s >= 0 && s * s == disc) {
            let cands = [(-t * b + s) / 2, (-t * b - s) / 2];
            let mut roots: Vec<i64> = cands
                .into_iter()
                .filter(|a| a * a + t * a * b + n * b * b == p)
                .collect();
            roots.sort_by_key(|a| (a.abs(), *a < 0));
            if let Some(a) = roots.first() {
                return Ok((*a, b));
            }
        }
        b += 1;
    }
    Err(Error::UnsupportedField(format!(
        "no element of norm {p} in {k}"
    )))
}

/// Norm-`p` element for a large split prime: Lagrange-reduce the lattice
/// `{(a, b) : a ≡ ρ·b mod p}`, `ρ` a root of `z² + t·z + n`, under the norm
/// form, then pick the canonical associate among units and conjugates.
fn reduced_norm_element(k: NumberField, p: i64) -> Result<(i64, i64)> {
    let (t, n) = k.omega_tn();
    let unsupported = || Error::UnsupportedField(format!("no element of norm {p} in {k}"));
    if p >= 1 << 60 {
        return Err(Error::invalid(format!("prime {p} is too large")));
    }
    let s = super::arith::sqrt_mod(&big(t * t - 4 * n), p as u64).ok_or_else(unsupported)?;
    let inv2 = big((p + 1) / 2);
    let rho = ((s - big(t)) * inv2).mod_floor(&big(p)).to_i64().unwrap();
    let (t, n, p) = (t as i128, n as i128, p as i128);
    let b2 = |u: (i128, i128), v: (i128, i128)| 2 * u.0 * v.0 + t * (u.0 * v.1 + u.1 * v.0) + 2 * n * u.1 * v.1;
    let (mut u, mut v) = ((p, 0i128), (rho as i128, 1i128));
    loop {
        if b2(u, u) > b2(v, v) {
            std::mem::swap(&mut u, &mut v);
        }
        let (num, den) = (b2(u, v), b2(u, u));
        let m = (2 * num + den).div_euclid(2 * den);
        if m == 0 {
            break;
        }
        v = (v.0 - m * u.0, v.1 - m * u.1);
    }
    if b2(u, u) != 2 * p {
        return Err(unsupported());
    }
    let g = KElem::from_ints(k, u.0 as i64, u.1 as i64);
    let mut best: Option<(i64, i64)> = None;
    for ua in -1i64..=1 {
        for ub in -1i64..=1 {
            let unit = KElem::from_ints(k, ua, ub);
            if unit.norm() != BigRational::one() {
                continue;
            }
            for h in [&g * &unit, &g.conj() * &unit] {
                let (a, b) = (h.a().to_integer().to_i64().unwrap(), h.b().to_integer().to_i64().unwrap());
                if b >= 1 && best.map_or(true, |(ba, bb)| (b, a.abs(), a < 0) < (bb, ba.abs(), ba < 0)) {
                    best = Some((a, b));
                }
            }
        }
    }
    best.ok_or_else(unsupported)
}

/// The finite place of `K` determined by a prime `p` and an element `π` with
/// `v_π = 1` there; `π` may be omitted when only one place lies over `p`.
pub fn finite_place(k: NumberField, p: u64, pi: Option<&KElem>) -> Result<FinitePlace> {
    let places = places_over(k, p)?;
    let fin: Vec<FinitePlace> = places.iter().filter_map(|pl| pl.finite().copied()).collect();
    match pi {
        None if fin.len() == 1 => Ok(fin[0]),
        None => Err(Error::invalid(format!(
            "{p} splits in {k}; a uniformizer must be given"
        ))),
        Some(x) => fin
            .into_iter()
            .find(|fp| fp.valuation(x) == Some(1))
            .ok_or_else(|| Error::invalid(format!("{x} is not a prime element over {p} in {k}"))),
    }
}

/// `|x|_v` with the normalization `|x|_v = ‖x‖_v^{d_v}`.
pub fn abs_value(x: &KElem, v: &Place) -> AbsValue {
    if x.is_zero() {
        return AbsValue::Zero;
    }
    match v {
        Place::Real => AbsValue::Arch(x.embed().re.abs()),
        Place::Complex => AbsValue::Arch(x.embed().norm_sqr()),
        Place::Finite(fp) => AbsValue::Power {
            p: fp.p,
            exp: -(fp.f as i64) * fp.valuation(x).unwrap(),
        },
    }
}

/// Primes `p` with `v_p ≠ 0` somewhere above `p` for a nonzero element.
pub fn support_primes(x: &KElem) -> Result<Vec<u64>> {
    let (a, b, d) = x.integral_parts();
    let k = x.field();
    let num = if k.is_rational() {
        a
    } else {
        let (t, n) = k.omega_tn();
        &a * &a + &a * &b * big(t) + &b * &b * big(n)
    };
    let mut primes: Vec<u64> = factor(&num)?
        .into_iter()
        .chain(factor(&d)?)
        .map(|(p, _)| p)
        .collect();
    primes.sort_unstable();
    primes.dedup();
    Ok(primes)
}

pub(crate) fn ln_big(n: &BigInt) -> f64 {
    let n = n.abs();
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().unwrap().ln()
    } else {
        let shift = bits - 64;
        (&n >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `|log Π_v |x|_v|` over all places of `K`; zero means the product formula
/// holds exactly. The finite part is accumulated as an exact rational.
pub fn check_product_formula(x: &KElem) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::invalid("product formula needs a nonzero element"));
    }
    let k = x.field();
    let mut finite = BigRational::one();
    for p in support_primes(x)? {
        for v in places_over(k, p)? {
            if let AbsValue::Power { p, exp } = abs_value(x, &v) {
                let pw = BigRational::from_integer(pow_u(p, exp.unsigned_abs() as u32));
                finite = if exp >= 0 { finite * pw } else { finite / pw };
            }
        }
    }
    let arch = abs_value(x, &infinite_place(k)).ln();
    let fin = ln_big(finite.numer()) - ln_big(finite.denom());
    Ok((arch + fin).abs())
}

/// `Π_{v ∈ S} ‖x‖_{v,2}` for `x ∈ K^n` embedded diagonally: Euclidean norm at a
/// real place, squared Hermitian norm at a complex place, coordinate maximum
/// of `|·|_v` at a finite place.
pub fn content_vector(x: &[KElem], s: &[Place]) -> f64 {
    s.iter()
        .map(|v| match v {
            Place::Real => x.iter().map(|c| c.embed().re.powi(2)).sum::<f64>().sqrt(),
            Place::Complex => x.iter().map(|c| c.embed().norm_sqr()).sum::<f64>(),
            Place::Finite(_) => x
                .iter()
                .map(|c| abs_value(c, v).to_f64())
                .fold(0.0, f64::max),
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(pl: &Place) -> FinitePlace {
        *pl.finite().unwrap()
    }

    #[test]
    fn reduction_matches_scan_for_split_primes() {
        for d in [1u32, 2, 3, 7, 11] {
            let k = NumberField::imaginary_quadratic(d).unwrap();
            let mut seen = 0;
            for p in (50_000u64..60_000).filter(|p| is_prime(*p)) {
                if let Ok(pair) = scan_norm_element(k, p as i64) {
                    assert_eq!(reduced_norm_element(k, p as i64).unwrap(), pair, "d = {d}, p = {p}");
                    seen += 1;
                }
            }
            assert!(seen > 100);
        }
    }

    #[test]
    fn large_split_prime_has_places() {
        let k = NumberField::gaussian();
        let p = (1_000_000_000_000_000_001u64..).step_by(4).find(|p| is_prime(*p)).unwrap();
        let pl = places_over(k, p).unwrap();
        assert_eq!(pl.len(), 2);
        let g = fin(&pl[0]).uniformizer();
        assert_eq!(g.norm(), BigRational::from_integer(BigInt::from(p)));
    }

    #[test]
    fn splitting_examples() {
        let q = NumberField::rationals();
        let v3 = places_over(q, 3).unwrap();
        assert_eq!(v3.len(), 1);
        let f3 = fin(&v3[0]);
        assert_eq!((f3.pi_coords(), f3.e(), f3.f(), f3.local_degree()), ((3, 0), 1, 1, 1));

        let g = NumberField::gaussian();
        let v2 = places_over(g, 2).unwrap();
        assert_eq!(v2.len(), 1);
        let f2 = fin(&v2[0]);
        assert_eq!((f2.pi_coords(), f2.e(), f2.f(), f2.local_degree()), ((1, 1), 2, 1, 2));

        let v5 = places_over(g, 5).unwrap();
        let pis: Vec<_> = v5.iter().map(|p| fin(p).pi_coords()).collect();
        assert_eq!(pis, vec![(2, 1), (2, -1)]);
        assert!(v5.iter().all(|p| fin(p).e() == 1 && fin(p).f() == 1));

        let v3g = places_over(g, 3).unwrap();
        assert_eq!(fin(&v3g[0]).splitting(), Splitting::Inert);
    }

    #[test]
    fn degree_identity_all_fields() {
        let mut fields = vec![NumberField::rationals()];
        for d in crate::number_field::SUPPORTED_D {
            fields.push(NumberField::imaginary_quadratic(d).unwrap());
        }
        for k in fields {
            for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43] {
                let pl = places_over(k, p).unwrap();
                let s: u32 = pl.iter().map(|v| v.local_degree()).sum();
                assert_eq!(s, k.degree(), "{k} p={p}");
                for v in &pl {
                    let fp = fin(v);
                    assert_eq!(fp.valuation(&fp.uniformizer()), Some(1));
                    let pv = fp.valuation(&KElem::from_int(k, p as i64)).unwrap();
                    assert_eq!(pv, fp.e() as i64);
                }
            }
        }
    }

    #[test]
    fn split_at_two_for_d7() {
        let k = NumberField::imaginary_quadratic(7).unwrap();
        let pl = places_over(k, 2).unwrap();
        assert_eq!(pl.len(), 2);
        for d in [3, 11] {
            let k = NumberField::imaginary_quadratic(d).unwrap();
            assert_eq!(fin(&places_over(k, 2).unwrap()[0]).splitting(), Splitting::Inert);
        }
        let fp = fin(&pl[0]);
        let r = fp.omega_root(30);
        let m = pow_u(2, 30);
        assert!((&r * &r - &r + big(2)).mod_floor(&m).is_zero());
        // π maps to a multiple of 2 under ω ↦ r
        let (a, b) = fp.pi_coords();
        assert!((big(a) + big(b) * &r).mod_floor(&big(2)).is_zero());
    }

    #[test]
    fn abs_value_examples() {
        let q = NumberField::rationals();
        let v3 = places_over(q, 3).unwrap()[0];
        assert_eq!(abs_value(&KElem::from_int(q, 12), &v3), AbsValue::Power { p: 3, exp: -1 });
        assert_eq!(abs_value(&KElem::from_ratio(q, 3, 2), &Place::Real), AbsValue::Arch(1.5));
        let g = NumberField::gaussian();
        let v2 = places_over(g, 2).unwrap()[0];
        let one_i = KElem::from_ints(g, 1, 1);
        assert_eq!(abs_value(&one_i, &v2).to_f64(), 0.5);
        assert!((abs_value(&one_i, &Place::Complex).to_f64() - 2.0).abs() < 1e-15);
        assert!(abs_value(&q.zero(), &v3).is_zero());
    }

    #[test]
    fn product_formula_examples() {
        let q = NumberField::rationals();
        assert!(check_product_formula(&KElem::from_int(q, 6)).unwrap() < 1e-15);
        assert_eq!(check_product_formula(&q.one()).unwrap(), 0.0);
        let g = NumberField::gaussian();
        assert!(check_product_formula(&KElem::from_ints(g, 1, 1)).unwrap() < 1e-15);
        let k = NumberField::imaginary_quadratic(11).unwrap();
        let x = KElem::parse(k, "-17/12+35/9w").unwrap();
        assert!(check_product_formula(&x).unwrap() < 1e-13);
    }

    #[test]
    fn content_examples() {
        let q = NumberField::rationals();
        let s = vec![Place::Real, places_over(q, 2).unwrap()[0]];
        assert!((content_vector(&[KElem::from_ratio(q, 3, 2)], &s) - 3.0).abs() < 1e-15);
        let x = [KElem::from_int(q, 3), KElem::from_int(q, 4)];
        assert!((content_vector(&x, &[Place::Real]) - 5.0).abs() < 1e-15);
        assert_eq!(content_vector(&[q.one(), q.zero()], &s), 1.0);
    }

    #[test]
    fn place_from_uniformizer() {
        let g = NumberField::gaussian();
        let pi = KElem::from_ints(g, 1, 2); // i·(2 - i)
        let fp = finite_place(g, 5, Some(&pi)).unwrap();
        assert_eq!(fp.pi_coords(), (2, -1));
        assert!(finite_place(g, 5, None).is_err());
        assert_eq!(finite_place(g, 2, None).unwrap().e(), 2);
    }
}
