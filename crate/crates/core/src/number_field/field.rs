use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Values of `d` for which `Q(sqrt(-d))` is supported. These are the
/// imaginary quadratic fields of class number one with small discriminant,
/// so every ideal of the S-integers is principal.
pub const SUPPORTED_D: [u32; 5] = [1, 2, 3, 7, 11];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Rationals,
    ImaginaryQuadratic(u32),
}

/// `Q` or one of the supported imaginary quadratic fields.
///
/// Elements are written in the integral basis `{1, ω}` with
/// `ω = sqrt(-d)` when `-d ≡ 2, 3 (mod 4)` and `ω = (1 + sqrt(-d)) / 2`
/// otherwise, so `ω² = t·ω - n` for the trace `t` and norm `n` of `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NumberField {
    kind: FieldKind,
}

impl NumberField {
    pub fn rationals() -> Self {
        NumberField {
            kind: FieldKind::Rationals,
        }
    }

    pub fn imaginary_quadratic(d: u32) -> Result<Self> {
        if SUPPORTED_D.contains(&d) {
            Ok(NumberField {
                kind: FieldKind::ImaginaryQuadratic(d),
            })
        } else {
            Err(Error::UnsupportedField(format!("Q(sqrt(-{d}))")))
        }
    }

    pub fn gaussian() -> Self {
        Self::imaginary_quadratic(1).expect("d = 1 is supported")
    }

    /// Parses `"Q"`, `"Q(i)"` or `"Q(sqrt-d)"`.
    pub fn parse(name: &str) -> Result<Self> {
        let s: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        match s.as_str() {
            "Q" => Ok(Self::rationals()),
            "Q(i)" | "Q(sqrt-1)" => Ok(Self::gaussian()),
            _ => {
                let d = s
                    .strip_prefix("Q(sqrt-")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.parse::<u32>().ok())
                    .ok_or_else(|| Error::UnsupportedField(name.to_string()))?;
                Self::imaginary_quadratic(d)
            }
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            FieldKind::Rationals => "Q".into(),
            FieldKind::ImaginaryQuadratic(1) => "Q(i)".into(),
            FieldKind::ImaginaryQuadratic(d) => format!("Q(sqrt-{d})"),
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn is_rational(&self) -> bool {
        self.kind == FieldKind::Rationals
    }

    pub fn degree(&self) -> u32 {
        match self.kind {
            FieldKind::Rationals => 1,
            FieldKind::ImaginaryQuadratic(_) => 2,
        }
    }

    /// Trace and norm of `ω`; `(0, 0)` for `Q` where `ω` is unused.
    pub(crate) fn omega_tn(&self) -> (i64, i64) {
        match self.kind {
            FieldKind::Rationals => (0, 0),
            FieldKind::ImaginaryQuadratic(d) => {
                let d = d as i64;
                if (-d).rem_euclid(4) == 1 {
                    (1, (1 + d) / 4)
                } else {
                    (0, d)
                }
            }
        }
    }

    /// Discriminant `D_K` (`t² - 4n` for the minimal polynomial of `ω`).
    pub fn discriminant(&self) -> i64 {
        match self.kind {
            FieldKind::Rationals => 1,
            FieldKind::ImaginaryQuadratic(_) => {
                let (t, n) = self.omega_tn();
                t * t - 4 * n
            }
        }
    }

    /// Number of complex places `s`.
    pub fn complex_place_count(&self) -> u32 {
        match self.kind {
            FieldKind::Rationals => 0,
            FieldKind::ImaginaryQuadratic(_) => 1,
        }
    }

    pub fn real_place_count(&self) -> u32 {
        match self.kind {
            FieldKind::Rationals => 1,
            FieldKind::ImaginaryQuadratic(_) => 0,
        }
    }

    /// `const_K = (2/π)^s · |D_K|^{1/2}`.
    pub fn field_constant(&self) -> f64 {
        (2.0 / std::f64::consts::PI).powi(self.complex_place_count() as i32)
            * (self.discriminant().abs() as f64).sqrt()
    }

    /// `sqrt(|D_K|)`.
    pub fn sqrt_abs_disc(&self) -> f64 {
        (self.discriminant().abs() as f64).sqrt()
    }

    /// Image of `ω` under the fixed embedding `sqrt(-d) ↦ +i·sqrt(d)`.
    pub fn omega_embedding(&self) -> Complex64 {
        match self.kind {
            FieldKind::Rationals => Complex64::new(0.0, 0.0),
            FieldKind::ImaginaryQuadratic(d) => {
                let s = (d as f64).sqrt();
                let (t, _) = self.omega_tn();
                if t == 1 {
                    Complex64::new(0.5, s / 2.0)
                } else {
                    Complex64::new(0.0, s)
                }
            }
        }
    }

    /// Covolume of `O_K` in `K ⊗ R` (1 for `Z ⊂ R`, `sqrt|D_K|/2` in `C`).
    pub fn ring_covolume(&self) -> f64 {
        match self.kind {
            FieldKind::Rationals => 1.0,
            FieldKind::ImaginaryQuadratic(_) => self.sqrt_abs_disc() / 2.0,
        }
    }

    pub fn zero(&self) -> KElem {
        KElem::from_int(*self, 0)
    }

    pub fn one(&self) -> KElem {
        KElem::from_int(*self, 1)
    }

    /// Units of `O_K`.
    pub fn roots_of_unity(&self) -> Vec<KElem> {
        let f = *self;
        let mut out = vec![f.one(), -f.one()];
        match self.kind {
            FieldKind::ImaginaryQuadratic(1) => {
                out.push(KElem::from_ints(f, 0, 1));
                out.push(KElem::from_ints(f, 0, -1));
            }
            FieldKind::ImaginaryQuadratic(3) => {
                // ω = (1 + sqrt(-3))/2 is a primitive sixth root of unity
                let w = KElem::from_ints(f, 0, 1);
                let mut z = w.clone();
                for _ in 0..4 {
                    if !out.contains(&z) {
                        out.push(z.clone());
                    }
                    z = &z * &w;
                }
            }
            _ => {}
        }
        out
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// An exact element `a + b·ω` of a supported field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KElem {
    field: NumberField,
    a: BigRational,
    b: BigRational,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl KElem {
    pub fn new(field: NumberField, a: BigRational, b: BigRational) -> Self {
        let b = if field.is_rational() {
            BigRational::zero()
        } else {
            b
        };
        KElem { field, a, b }
    }

    pub fn from_int(field: NumberField, n: i64) -> Self {
        Self::new(field, rat(n), BigRational::zero())
    }

    pub fn from_ints(field: NumberField, a: i64, b: i64) -> Self {
        Self::new(field, rat(a), rat(b))
    }

    pub fn from_bigint(field: NumberField, n: BigInt) -> Self {
        Self::new(field, BigRational::from_integer(n), BigRational::zero())
    }

    pub fn from_ratio(field: NumberField, num: i64, den: i64) -> Self {
        Self::new(
            field,
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn from_rational(field: NumberField, r: BigRational) -> Self {
        Self::new(field, r, BigRational::zero())
    }

    pub fn field(&self) -> NumberField {
        self.field
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// True iff the element lies in `O_K`.
    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    pub fn conj(&self) -> KElem {
        let (t, _) = self.field.omega_tn();
        KElem::new(self.field, &self.a + &self.b * rat(t), -&self.b)
    }

    /// Field norm `N_{K/Q}`; the square of the usual modulus for quadratic fields,
    /// the element itself for `Q`.
    pub fn norm(&self) -> BigRational {
        if self.field.is_rational() {
            return self.a.clone();
        }
        let (t, n) = self.field.omega_tn();
        &self.a * &self.a + &self.a * &self.b * rat(t) + &self.b * &self.b * rat(n)
    }

    pub fn inv(&self) -> Option<KElem> {
        if self.is_zero() {
            return None;
        }
        if self.field.is_rational() {
            return Some(KElem::from_rational(self.field, self.a.recip()));
        }
        let n = self.norm();
        let c = self.conj();
        Some(KElem::new(self.field, c.a / &n, c.b / n))
    }

    pub fn pow(&self, k: i64) -> KElem {
        let base = if k < 0 {
            self.inv().expect("nonzero base for negative power")
        } else {
            self.clone()
        };
        let mut out = self.field.one();
        for _ in 0..k.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    /// Writes the element as `(α_a + α_b·ω) / D` with integral numerator and
    /// positive integer `D`.
    pub fn integral_parts(&self) -> (BigInt, BigInt, BigInt) {
        let d = self.a.denom().lcm(self.b.denom());
        let aa = self.a.numer() * (&d / self.a.denom());
        let bb = self.b.numer() * (&d / self.b.denom());
        (aa, bb, d)
    }

    /// Complex image under the fixed embedding.
    pub fn embed(&self) -> Complex64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.field.is_rational() {
            return Complex64::new(a, 0.0);
        }
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        Complex64::new(a, 0.0) + self.field.omega_embedding() * b
    }

    /// Real value for elements of `Q`.
    pub fn to_f64(&self) -> f64 {
        self.embed().re
    }

    pub fn scale(&self, r: &BigRational) -> KElem {
        KElem::new(self.field, &self.a * r, &self.b * r)
    }

    /// Lexicographic sign: `+1` if `(a, b) > (0, 0)`, `-1` if below, `0` at zero.
    pub fn lex_sign(&self) -> i32 {
        match self.a.cmp(&BigRational::zero()) {
            Ordering::Greater => 1,
            Ordering::Less => -1,
            Ordering::Equal => match self.b.cmp(&BigRational::zero()) {
                Ordering::Greater => 1,
                Ordering::Less => -1,
                Ordering::Equal => 0,
            },
        }
    }

    /// Parses `"3"`, `"-1/2"`, `"1+2w"`, `"1/2-3/4w"` or `"2i"` (for `Q(i)`, `i` is `ω`).
    pub fn parse(field: NumberField, s: &str) -> Result<KElem> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::invalid(format!("cannot parse field element {s:?}"));
        if s.is_empty() {
            return Err(bad());
        }
        let (re_part, om_part) = match s.find(|c| c == 'w' || c == 'i') {
            None => (s.as_str(), None),
            Some(pos) => {
                if pos + 1 != s.len() || field.is_rational() {
                    return Err(bad());
                }
                let body = &s[..pos];
                // split at the last sign that is not in front of the string
                let split = body
                    .char_indices()
                    .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
                    .map(|(i, _)| i)
                    .last();
                match split {
                    Some(i) => (&body[..i], Some(&body[i..])),
                    None => ("0", Some(body)),
                }
            }
        };
        let parse_rat = |t: &str| -> Result<BigRational> {
            let t = t.strip_prefix('+').unwrap_or(t);
            match t {
                "" => Ok(rat(1)),
                "-" => Ok(rat(-1)),
                _ => {
                    if let Some((n, d)) = t.split_once('/') {
                        let n: BigInt = n.parse().map_err(|_| bad())?;
                        let d: BigInt = d.parse().map_err(|_| bad())?;
                        if d.is_zero() {
                            return Err(bad());
                        }
                        Ok(BigRational::new(n, d))
                    } else {
                        Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?))
                    }
                }
            }
        };
        let a = if re_part.is_empty() {
            rat(0)
        } else {
            parse_rat(re_part)?
        };
        let b = match om_part {
            Some(t) => parse_rat(t)?,
            None => rat(0),
        };
        Ok(KElem::new(field, a, b))
    }
}

impl PartialOrd for KElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on the coordinates `(a, b)`; used only to make
/// enumerations deterministic.
impl Ord for KElem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.a.cmp(&other.a).then_with(|| self.b.cmp(&other.b))
    }
}

impl fmt::Display for KElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sym = if self.field.kind() == FieldKind::ImaginaryQuadratic(1) {
            "i"
        } else {
            "w"
        };
        let coef = if self.b.is_one() {
            String::new()
        } else if (-&self.b).is_one() {
            "-".to_string()
        } else {
            self.b.to_string()
        };
        if self.a.is_zero() {
            write!(f, "{coef}{sym}")
        } else if self.b.is_negative() {
            write!(f, "{}{coef}{sym}", self.a)
        } else {
            write!(f, "{}+{coef}{sym}", self.a)
        }
    }
}

impl<'a> Add<&'a KElem> for &'a KElem {
    type Output = KElem;
    fn add(self, rhs: &KElem) -> KElem {
        debug_assert_eq!(self.field, rhs.field);
        KElem::new(self.field, &self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a> Sub<&'a KElem> for &'a KElem {
    type Output = KElem;
    fn sub(self, rhs: &KElem) -> KElem {
        debug_assert_eq!(self.field, rhs.field);
        KElem::new(self.field, &self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a> Mul<&'a KElem> for &'a KElem {
    type Output = KElem;
    fn mul(self, rhs: &KElem) -> KElem {
        debug_assert_eq!(self.field, rhs.field);
        if self.field.is_rational() {
            return KElem::from_rational(self.field, &self.a * &rhs.a);
        }
        let (t, n) = self.field.omega_tn();
        let bd = &self.b * &rhs.b;
        let a = &self.a * &rhs.a - &bd * rat(n);
        let b = &self.a * &rhs.b + &self.b * &rhs.a + bd * rat(t);
        KElem::new(self.field, a, b)
    }
}

impl<'a> Div<&'a KElem> for &'a KElem {
    type Output = KElem;
    fn div(self, rhs: &KElem) -> KElem {
        self * &rhs.inv().expect("division by zero field element")
    }
}

impl Neg for &KElem {
    type Output = KElem;
    fn neg(self) -> KElem {
        KElem::new(self.field, -&self.a, -&self.b)
    }
}

impl Neg for KElem {
    type Output = KElem;
    fn neg(self) -> KElem {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<KElem> for KElem {
            type Output = KElem;
            fn $m(self, rhs: KElem) -> KElem {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a KElem> for KElem {
            type Output = KElem;
            fn $m(self, rhs: &KElem) -> KElem {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminants_match_minimal_polynomials() {
        let cases = [(1, -4), (2, -8), (3, -3), (7, -7), (11, -11)];
        for (d, disc) in cases {
            let k = NumberField::imaginary_quadratic(d).unwrap();
            assert_eq!(k.discriminant(), disc, "d = {d}");
            assert_eq!(k.degree(), 2);
            assert_eq!(k.complex_place_count(), 1);
        }
        let q = NumberField::rationals();
        assert_eq!((q.degree(), q.discriminant(), q.complex_place_count()), (1, 1, 0));
        assert!(NumberField::imaginary_quadratic(5).is_err());
    }

    #[test]
    fn field_constants() {
        assert_eq!(NumberField::rationals().field_constant(), 1.0);
        let g = NumberField::gaussian().field_constant();
        assert!((g - 4.0 / std::f64::consts::PI).abs() < 1e-12);
        let e = NumberField::imaginary_quadratic(3).unwrap().field_constant();
        assert!((e - 1.10266).abs() < 1e-5);
    }

    #[test]
    fn arithmetic_in_eisenstein_field() {
        let k = NumberField::imaginary_quadratic(3).unwrap();
        let w = KElem::from_ints(k, 0, 1);
        // ω² = ω - 1
        assert_eq!(&w * &w, KElem::from_ints(k, -1, 1));
        assert_eq!(w.norm(), rat(1));
        let x = KElem::from_ints(k, 2, -5);
        let y = x.inv().unwrap();
        assert!((&x * &y).is_one());
        let z = x.embed() * y.embed();
        assert!((z.re - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12);
    }

    #[test]
    fn parse_literals() {
        let g = NumberField::gaussian();
        assert_eq!(KElem::parse(g, "1+i").unwrap(), KElem::from_ints(g, 1, 1));
        assert_eq!(KElem::parse(g, "2-i").unwrap(), KElem::from_ints(g, 2, -1));
        assert_eq!(KElem::parse(g, "-i").unwrap(), KElem::from_ints(g, 0, -1));
        assert_eq!(
            KElem::parse(g, "1/2-3/4i").unwrap(),
            KElem::new(g, BigRational::new(1.into(), 2.into()), BigRational::new((-3).into(), 4.into()))
        );
        let q = NumberField::rationals();
        assert_eq!(KElem::parse(q, "-7/21").unwrap(), KElem::from_ratio(q, -1, 3));
        assert!(KElem::parse(q, "1+i").is_err());
        assert!(KElem::parse(q, "1/0").is_err());
    }

    #[test]
    fn field_names_round_trip() {
        for name in ["Q", "Q(i)", "Q(sqrt-2)", "Q(sqrt-7)"] {
            assert_eq!(NumberField::parse(name).unwrap().name(), name);
        }
    }
}
