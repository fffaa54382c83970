use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::number_field::arith::{big, mod_inverse, pow_u, split_p, vp};
use crate::number_field::{FinitePlace, KElem, Splitting};

pub const DEFAULT_PREC: u32 = 64;

/// Fewest significant digits accepted at a decision point.
pub const MIN_SIGNIFICANT: u32 = 8;

/// An element of the completion `K_v` at a finite place, known to a fixed
/// number of digits.
///
/// Nonzero values are `ϖ^val · unit` where `ϖ` is `p` when `K_v` is `Q_p` or
/// unramified over it, and `π` when `K_v` is ramified. The unit is stored as
/// coordinates in `{1, ω}` (second coordinate zero when `K_v = Q_p`) reduced
/// modulo `ϖ^prec`. A zero flag marks values known only to vanish modulo
/// `ϖ^val`; exact zero has `val = i64::MAX`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicApprox {
    place: FinitePlace,
    zero: bool,
    val: i64,
    unit: (BigInt, BigInt),
    prec: u32,
}

struct Ring {
    p: u64,
    qp: bool,
    ramified: bool,
    t: i64,
    n: i64,
    pi: (BigInt, BigInt),
}

impl Ring {
    fn of(pl: &FinitePlace) -> Ring {
        let (t, n) = pl.field().omega_tn();
        let (a, b) = pl.pi_coords();
        Ring {
            p: pl.p(),
            qp: pl.is_qp(),
            ramified: pl.splitting() == Splitting::Ramified,
            t,
            n,
            pi: (big(a), big(b)),
        }
    }

    fn norm_prec(&self, prec: u32) -> u32 {
        if self.ramified {
            prec - prec % 2
        } else {
            prec
        }
    }

    fn modulus(&self, prec: u32) -> BigInt {
        if self.ramified {
            pow_u(self.p, prec / 2)
        } else {
            pow_u(self.p, prec)
        }
    }

    fn reduce(&self, x: &(BigInt, BigInt), prec: u32) -> (BigInt, BigInt) {
        let m = self.modulus(prec);
        if self.qp {
            (x.0.mod_floor(&m), BigInt::zero())
        } else {
            (x.0.mod_floor(&m), x.1.mod_floor(&m))
        }
    }

    fn mul(&self, x: &(BigInt, BigInt), y: &(BigInt, BigInt)) -> (BigInt, BigInt) {
        if self.qp {
            (&x.0 * &y.0, BigInt::zero())
        } else {
            crate::number_field::mul_int(&x.0, &x.1, &y.0, &y.1, self.t, self.n)
        }
    }

    fn norm(&self, x: &(BigInt, BigInt)) -> BigInt {
        &x.0 * &x.0 + &x.0 * &x.1 * big(self.t) + &x.1 * &x.1 * big(self.n)
    }

    fn divisible(&self, x: &(BigInt, BigInt)) -> bool {
        let p = big(self.p as i64);
        if self.qp {
            x.0.is_multiple_of(&p)
        } else if self.ramified {
            self.norm(x).is_multiple_of(&p)
        } else {
            x.0.is_multiple_of(&p) && x.1.is_multiple_of(&p)
        }
    }

    /// Exact division by the local uniformizer of an element it divides.
    fn div_uniformizer(&self, x: &(BigInt, BigInt)) -> (BigInt, BigInt) {
        let p = big(self.p as i64);
        if self.ramified {
            let conj = (&self.pi.0 + &self.pi.1 * big(self.t), -&self.pi.1);
            let y = self.mul(x, &conj);
            (&y.0 / &p, &y.1 / &p)
        } else {
            (&x.0 / &p, &x.1 / &p)
        }
    }

    fn mul_uniformizer_pow(&self, x: &(BigInt, BigInt), k: u64) -> (BigInt, BigInt) {
        if self.ramified {
            let (mut y, mut k) = (x.clone(), k);
            // π² = p·(unit) is not exploited; k is small in practice
            while k > 0 {
                y = self.mul(&y, &self.pi);
                k -= 1;
            }
            y
        } else {
            let f = pow_u(self.p, k as u32);
            (&x.0 * &f, &x.1 * &f)
        }
    }

    fn unit_inverse(&self, x: &(BigInt, BigInt), prec: u32) -> (BigInt, BigInt) {
        let m = self.modulus(prec);
        if self.qp {
            let inv = mod_inverse(&x.0, &m).expect("unit");
            (inv, BigInt::zero())
        } else {
            let ninv = mod_inverse(&self.norm(x), &m).expect("unit");
            let conj = (&x.0 + &x.1 * big(self.t), -&x.1);
            self.reduce(&(&conj.0 * &ninv, &conj.1 * &ninv), prec)
        }
    }
}

impl PadicApprox {
    pub fn exact_zero(place: FinitePlace) -> Self {
        PadicApprox {
            place,
            zero: true,
            val: i64::MAX,
            unit: (BigInt::zero(), BigInt::zero()),
            prec: 0,
        }
    }

    /// A value known only to be divisible by `ϖ^abs_prec`.
    pub fn zero_mod(place: FinitePlace, abs_prec: i64) -> Self {
        PadicApprox {
            val: abs_prec,
            ..Self::exact_zero(place)
        }
    }

    pub fn one(place: FinitePlace, prec: u32) -> Self {
        let r = Ring::of(&place);
        PadicApprox {
            place,
            zero: false,
            val: 0,
            unit: (BigInt::one(), BigInt::zero()),
            prec: r.norm_prec(prec),
        }
    }

    /// `ϖ^val · unit` with the unit reduced to `prec` digits; the unit must be a
    /// unit.
    pub fn from_parts(place: FinitePlace, val: i64, unit: (BigInt, BigInt), prec: u32) -> Result<Self> {
        let r = Ring::of(&place);
        let prec = r.norm_prec(prec);
        if prec == 0 {
            return Err(Error::Precision("no significant digits".into()));
        }
        if r.divisible(&unit) {
            return Err(Error::invalid("unit part divisible by the uniformizer"));
        }
        Ok(PadicApprox {
            place,
            zero: false,
            val,
            unit: r.reduce(&unit, prec),
            prec,
        })
    }

    /// Image of an exact field element in `K_v` with `prec` significant digits.
    pub fn from_kelem(x: &KElem, place: FinitePlace, prec: u32) -> Self {
        if x.is_zero() {
            return Self::exact_zero(place);
        }
        let r = Ring::of(&place);
        let prec = r.norm_prec(prec.max(2));
        let p = place.p();
        if r.qp {
            // via O_K → Z_p, ω ↦ root
            let (a, b, d) = x.integral_parts();
            let va = place.valuation_integral(&a, &b);
            let img = if place.splitting() == Splitting::Split {
                let k = (va.max(0) as u32) + prec;
                let root = place.omega_root(k);
                (&a + &b * root).mod_floor(&pow_u(p, k))
            } else {
                a
            };
            let (vi, ui) = split_p(&img, p);
            debug_assert_eq!(vi as i64, va);
            let (vd, ud) = split_p(&d, p);
            let m = pow_u(p, prec);
            let unit = (ui * mod_inverse(&ud, &m).unwrap()).mod_floor(&m);
            return PadicApprox {
                place,
                zero: false,
                val: va - vd as i64,
                unit: (unit, BigInt::zero()),
                prec,
            };
        }
        let val = place.valuation(x).unwrap();
        let u = x * &place.uniformizer().pow(-val);
        let (a, b, d) = u.integral_parts();
        debug_assert_eq!(vp(&d, p), 0);
        let m = r.modulus(prec);
        let dinv = mod_inverse(&d, &m).unwrap();
        PadicApprox {
            place,
            zero: false,
            val,
            unit: r.reduce(&(a * &dinv, b * &dinv), prec),
            prec,
        }
    }

    pub fn place(&self) -> &FinitePlace {
        &self.place
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn is_exact_zero(&self) -> bool {
        self.zero && self.val == i64::MAX
    }

    /// Valuation in `π`-units of the place, `None` for (approximate) zero.
    pub fn valuation(&self) -> Option<i64> {
        if self.zero {
            None
        } else {
            Some(self.val)
        }
    }

    pub fn unit(&self) -> &(BigInt, BigInt) {
        &self.unit
    }

    /// Relative precision in digits.
    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// The value is known modulo `ϖ^abs_precision`.
    pub fn abs_precision(&self) -> i64 {
        if self.zero {
            self.val
        } else {
            self.val.saturating_add(self.prec as i64)
        }
    }

    pub fn abs_value(&self) -> crate::number_field::AbsValue {
        if self.zero {
            crate::number_field::AbsValue::Zero
        } else {
            crate::number_field::AbsValue::Power {
                p: self.place.p(),
                exp: -(self.place.f() as i64) * self.val,
            }
        }
    }

    /// Decides `v(x) ≥ k`, failing when the digits do not reach that depth.
    pub fn val_at_least(&self, k: i64) -> Result<bool> {
        if !self.zero {
            return Ok(self.val >= k);
        }
        if self.val >= k {
            Ok(true)
        } else {
            Err(Error::Precision(format!(
                "value known only modulo ϖ^{} at {}, need depth {k}",
                self.val,
                crate::number_field::Place::Finite(self.place)
            )))
        }
    }

    /// Keeps digits below `ϖ^abs`.
    fn truncate_abs(&self, abs: i64) -> Self {
        if self.zero {
            return Self::zero_mod(self.place, self.val.min(abs));
        }
        if abs <= self.val {
            return Self::zero_mod(self.place, abs);
        }
        let r = Ring::of(&self.place);
        let prec = r.norm_prec(((abs - self.val) as u64).min(self.prec as u64) as u32);
        if prec == 0 {
            return Self::zero_mod(self.place, self.val);
        }
        PadicApprox {
            unit: r.reduce(&self.unit, prec),
            prec,
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.place, other.place);
        if self.is_exact_zero() {
            return other.clone();
        }
        if other.is_exact_zero() {
            return self.clone();
        }
        let abs = self.abs_precision().min(other.abs_precision());
        if self.zero || other.zero {
            let nz = if self.zero { other } else { self };
            return nz.truncate_abs(abs);
        }
        let (lo, hi) = if self.val <= other.val {
            (self, other)
        } else {
            (other, self)
        };
        if hi.val >= abs {
            return lo.truncate_abs(abs);
        }
        let r = Ring::of(&self.place);
        let rel = (abs - lo.val) as u32;
        let shifted = r.mul_uniformizer_pow(&hi.unit, (hi.val - lo.val) as u64);
        let mut s = r.reduce(&(&lo.unit.0 + &shifted.0, &lo.unit.1 + &shifted.1), rel);
        let mut w = 0u32;
        while w < rel && r.divisible(&s) {
            if s.0.is_zero() && s.1.is_zero() {
                w = rel;
                break;
            }
            s = r.div_uniformizer(&s);
            w += 1;
        }
        let prec = r.norm_prec(rel - w);
        if prec == 0 {
            return Self::zero_mod(self.place, abs);
        }
        PadicApprox {
            place: self.place,
            zero: false,
            val: lo.val + w as i64,
            unit: r.reduce(&s, prec),
            prec,
        }
    }

    pub fn neg(&self) -> Self {
        if self.zero {
            return self.clone();
        }
        let r = Ring::of(&self.place);
        PadicApprox {
            unit: r.reduce(&(-&self.unit.0, -&self.unit.1), self.prec),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.place, other.place);
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::exact_zero(self.place);
        }
        match (self.zero, other.zero) {
            (true, true) => return Self::zero_mod(self.place, self.val.saturating_add(other.val)),
            (true, false) => return Self::zero_mod(self.place, self.val.saturating_add(other.val)),
            (false, true) => return Self::zero_mod(self.place, self.val.saturating_add(other.val)),
            _ => {}
        }
        let r = Ring::of(&self.place);
        let prec = self.prec.min(other.prec);
        PadicApprox {
            place: self.place,
            zero: false,
            val: self.val + other.val,
            unit: r.reduce(&r.mul(&self.unit, &other.unit), prec),
            prec,
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.zero {
            return Err(Error::Precision("inverse of a value indistinguishable from zero".into()));
        }
        let r = Ring::of(&self.place);
        Ok(PadicApprox {
            val: -self.val,
            unit: r.unit_inverse(&self.unit, self.prec),
            ..self.clone()
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// A representative in `O_K` of this value modulo `π^k`; needs `v ≥ 0`.
    pub fn residue(&self, k: u32) -> Result<KElem> {
        let field = self.place.field();
        if k == 0 {
            return Ok(field.zero());
        }
        // digit depth measured in ϖ, which equals π for every kind of place
        if !self.val_at_least(0)? {
            return Err(Error::invalid("residue of a non-integral value"));
        }
        if self.zero || self.val >= k as i64 {
            self.val_at_least(k as i64)?;
            return Ok(field.zero());
        }
        if self.abs_precision() < k as i64 {
            return Err(Error::Precision(format!(
                "need {k} digits, have {}",
                self.abs_precision()
            )));
        }
        let r = Ring::of(&self.place);
        let x = r.mul_uniformizer_pow(&self.unit, self.val as u64);
        let kk = if r.ramified { k + k % 2 } else { k };
        let m = r.modulus(kk);
        Ok(KElem::new(
            field,
            num_rational::BigRational::from_integer(x.0.mod_floor(&m)),
            num_rational::BigRational::from_integer(x.1.mod_floor(&m)),
        ))
    }

    /// Base-`p` digits of the unit, least significant first; two-coordinate
    /// units are written digit-wise as `a:b`.
    pub fn unit_digits(&self) -> String {
        if self.zero {
            return String::new();
        }
        let r = Ring::of(&self.place);
        let count = if r.ramified { self.prec / 2 } else { self.prec };
        let p = big(self.place.p() as i64);
        let (mut a, mut b) = self.unit.clone();
        let mut out = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let (qa, ra) = a.div_rem(&p);
            let (qb, rb) = b.div_rem(&p);
            if r.qp {
                out.push(ra.to_string());
            } else {
                out.push(format!("{ra}:{rb}"));
            }
            a = qa;
            b = qb;
        }
        out.join(",")
    }

    /// Inverse of [`unit_digits`](Self::unit_digits).
    pub fn from_digits(place: FinitePlace, val: i64, digits: &str, prec: u32) -> Result<Self> {
        if digits.is_empty() {
            return Ok(if val == i64::MAX {
                Self::exact_zero(place)
            } else {
                Self::zero_mod(place, val)
            });
        }
        let p = big(place.p() as i64);
        let bad = || Error::invalid(format!("bad digit string {digits:?}"));
        let (mut a, mut b) = (BigInt::zero(), BigInt::zero());
        let mut scale = BigInt::one();
        for d in digits.split(',') {
            let (da, db) = match d.split_once(':') {
                Some((x, y)) => (x.parse::<BigInt>().map_err(|_| bad())?, y.parse::<BigInt>().map_err(|_| bad())?),
                None => (d.parse::<BigInt>().map_err(|_| bad())?, BigInt::zero()),
            };
            a += &da * &scale;
            b += &db * &scale;
            scale *= &p;
        }
        Self::from_parts(place, val, (a, b), prec)
    }

    pub fn to_f64_abs(&self) -> f64 {
        self.abs_value().to_f64()
    }

    pub fn val_i64(&self) -> i64 {
        self.val
    }

    /// Unit part of a `Q_p` value as an integer.
    pub fn unit_int(&self) -> Option<u64> {
        self.unit.0.to_u64()
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            return f.write_str("0");
        }
        if self.zero {
            return write!(f, "O(ϖ^{})", self.val);
        }
        write!(f, "ϖ^{}·[{}] + O(ϖ^{})", self.val, self.unit_digits(), self.abs_precision())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_field::{places_over, NumberField};

    fn place(k: NumberField, p: u64, i: usize) -> FinitePlace {
        *places_over(k, p).unwrap()[i].finite().unwrap()
    }

    fn fields() -> Vec<NumberField> {
        let mut v = vec![NumberField::rationals()];
        for d in crate::number_field::SUPPORTED_D {
            v.push(NumberField::imaginary_quadratic(d).unwrap());
        }
        v
    }

    #[test]
    fn embedding_is_a_ring_map() {
        for k in fields() {
            for p in [2u64, 3, 5, 7, 11] {
                for i in 0..places_over(k, p).unwrap().len() {
                    let pl = place(k, p, i);
                    let x = KElem::parse(k, if k.is_rational() { "-12/35" } else { "-12/35+14/3w" }).unwrap();
                    let y = KElem::parse(k, if k.is_rational() { "50/9" } else { "50/9-2w" }).unwrap();
                    let e = |z: &KElem| PadicApprox::from_kelem(z, pl, 40);
                    let s = e(&(&x + &y));
                    assert_eq!(e(&x).add(&e(&y)).residue(20).unwrap_or_else(|_| k.zero()), s.residue(20).unwrap_or_else(|_| k.zero()));
                    let pr = e(&(&x * &y));
                    let pm = e(&x).mul(&e(&y));
                    assert_eq!(pm.valuation(), pr.valuation(), "{k} {p}");
                    assert_eq!(pm.valuation(), pl.valuation(&(&x * &y)));
                    let d = pm.sub(&pr);
                    assert!(d.val_at_least(pr.valuation().unwrap() + 30).unwrap(), "{k} {p} {d}");
                    let q = e(&x).div(&e(&y)).unwrap();
                    let qe = e(&(&x / &y));
                    assert!(q.sub(&qe).val_at_least(qe.valuation().unwrap() + 30).unwrap());
                }
            }
        }
    }

    #[test]
    fn cancellation_tracks_precision() {
        let q = NumberField::rationals();
        let pl = place(q, 2, 0);
        let a = PadicApprox::from_kelem(&KElem::from_int(q, 1), pl, 10);
        let b = PadicApprox::from_kelem(&KElem::from_int(q, 1 + 8), pl, 10);
        let d = b.sub(&a);
        assert_eq!(d.valuation(), Some(3));
        assert_eq!(d.precision(), 7);
        let z = a.sub(&a);
        assert!(z.is_zero() && !z.is_exact_zero());
        assert_eq!(z.abs_precision(), 10);
        assert!(z.val_at_least(10).unwrap());
        assert!(z.val_at_least(11).is_err());
    }

    #[test]
    fn residues() {
        let g = NumberField::gaussian();
        let v2 = place(g, 2, 0);
        let x = PadicApprox::from_kelem(&KElem::from_ints(g, 3, 5), v2, 20);
        let r = x.residue(5).unwrap();
        let diff = &r - &KElem::from_ints(g, 3, 5);
        assert!(v2.valuation(&diff).map_or(true, |v| v >= 5));
        let v5 = place(g, 5, 1);
        let y = KElem::parse(g, "1/3+7/2i").unwrap();
        let r = PadicApprox::from_kelem(&y, v5, 20).residue(6).unwrap();
        assert!(r.b().is_zero());
        assert!(v5.valuation(&(&r - &y)).unwrap() >= 6);
        let z = PadicApprox::from_kelem(&KElem::from_ratio(NumberField::rationals(), 1, 2), place(NumberField::rationals(), 2, 0), 10);
        assert!(z.residue(3).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let k = NumberField::imaginary_quadratic(2).unwrap();
        for p in [2u64, 3, 5] {
            for i in 0..places_over(k, p).unwrap().len() {
                let pl = place(k, p, i);
                let x = PadicApprox::from_kelem(&KElem::parse(k, "7/4-3w").unwrap(), pl, 16);
                let s = x.unit_digits();
                let y = PadicApprox::from_digits(pl, x.valuation().unwrap(), &s, x.precision()).unwrap();
                assert_eq!(x, y);
            }
        }
    }
}
