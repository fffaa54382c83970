use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::padic::PadicApprox;
use crate::error::{Error, Result};
use crate::number_field::{AbsValue, KElem, Place};

/// A value in the completion `K_v` for one place `v`.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalValue {
    Real(f64),
    Complex(Complex64),
    Padic(PadicApprox),
}

impl LocalValue {
    pub fn from_kelem(x: &KElem, v: &Place, prec: u32) -> Self {
        match v {
            Place::Real => LocalValue::Real(x.embed().re),
            Place::Complex => LocalValue::Complex(x.embed()),
            Place::Finite(fp) => LocalValue::Padic(PadicApprox::from_kelem(x, *fp, prec)),
        }
    }

    pub fn zero(v: &Place) -> Self {
        match v {
            Place::Real => LocalValue::Real(0.0),
            Place::Complex => LocalValue::Complex(Complex64::new(0.0, 0.0)),
            Place::Finite(fp) => LocalValue::Padic(PadicApprox::exact_zero(*fp)),
        }
    }

    pub fn one(v: &Place, prec: u32) -> Self {
        match v {
            Place::Real => LocalValue::Real(1.0),
            Place::Complex => LocalValue::Complex(Complex64::new(1.0, 0.0)),
            Place::Finite(fp) => LocalValue::Padic(PadicApprox::one(*fp, prec)),
        }
    }

    pub fn abs_value(&self) -> AbsValue {
        match self {
            LocalValue::Real(x) if *x == 0.0 => AbsValue::Zero,
            LocalValue::Real(x) => AbsValue::Arch(x.abs()),
            LocalValue::Complex(z) if z.norm_sqr() == 0.0 => AbsValue::Zero,
            LocalValue::Complex(z) => AbsValue::Arch(z.norm_sqr()),
            LocalValue::Padic(x) => x.abs_value(),
        }
    }

    /// `|x|_v` as a float.
    pub fn abs_f64(&self) -> f64 {
        self.abs_value().to_f64()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            LocalValue::Real(x) => *x == 0.0,
            LocalValue::Complex(z) => z.norm_sqr() == 0.0,
            LocalValue::Padic(x) => x.is_zero(),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match self {
            LocalValue::Real(x) if *x == 0.0 => Err(Error::invalid("inverse of zero")),
            LocalValue::Real(x) => Ok(LocalValue::Real(1.0 / x)),
            LocalValue::Complex(z) if z.norm_sqr() == 0.0 => Err(Error::invalid("inverse of zero")),
            LocalValue::Complex(z) => Ok(LocalValue::Complex(z.inv())),
            LocalValue::Padic(x) => Ok(LocalValue::Padic(x.inv()?)),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn as_padic(&self) -> Option<&PadicApprox> {
        match self {
            LocalValue::Padic(x) => Some(x),
            _ => None,
        }
    }

    /// Complex image at an archimedean place.
    pub fn as_complex(&self) -> Option<Complex64> {
        match self {
            LocalValue::Real(x) => Some(Complex64::new(*x, 0.0)),
            LocalValue::Complex(z) => Some(*z),
            LocalValue::Padic(_) => None,
        }
    }

    /// Decides `|x|_v ≤ bound` with the archimedean tolerance; finite bounds
    /// are taken as `v(x) ≥ k`.
    pub fn within(&self, bound: &super::LocalBound) -> Result<bool> {
        match (self, bound) {
            (LocalValue::Padic(x), super::LocalBound::Val(k)) => x.val_at_least(*k),
            (_, super::LocalBound::Arch(b)) if !matches!(self, LocalValue::Padic(_)) => {
                Ok(self.abs_f64() <= b * (1.0 + super::TAU_ARCH))
            }
            _ => Err(Error::invalid("bound kind does not match the place")),
        }
    }
}

fn mismatch() -> ! {
    panic!("local values from different completions")
}

impl<'a> Add<&'a LocalValue> for &'a LocalValue {
    type Output = LocalValue;
    fn add(self, rhs: &LocalValue) -> LocalValue {
        match (self, rhs) {
            (LocalValue::Real(a), LocalValue::Real(b)) => LocalValue::Real(a + b),
            (LocalValue::Complex(a), LocalValue::Complex(b)) => LocalValue::Complex(a + b),
            (LocalValue::Padic(a), LocalValue::Padic(b)) => LocalValue::Padic(a.add(b)),
            _ => mismatch(),
        }
    }
}

impl<'a> Sub<&'a LocalValue> for &'a LocalValue {
    type Output = LocalValue;
    fn sub(self, rhs: &LocalValue) -> LocalValue {
        match (self, rhs) {
            (LocalValue::Real(a), LocalValue::Real(b)) => LocalValue::Real(a - b),
            (LocalValue::Complex(a), LocalValue::Complex(b)) => LocalValue::Complex(a - b),
            (LocalValue::Padic(a), LocalValue::Padic(b)) => LocalValue::Padic(a.sub(b)),
            _ => mismatch(),
        }
    }
}

impl<'a> Mul<&'a LocalValue> for &'a LocalValue {
    type Output = LocalValue;
    fn mul(self, rhs: &LocalValue) -> LocalValue {
        match (self, rhs) {
            (LocalValue::Real(a), LocalValue::Real(b)) => LocalValue::Real(a * b),
            (LocalValue::Complex(a), LocalValue::Complex(b)) => LocalValue::Complex(a * b),
            (LocalValue::Padic(a), LocalValue::Padic(b)) => LocalValue::Padic(a.mul(b)),
            _ => mismatch(),
        }
    }
}

impl Neg for &LocalValue {
    type Output = LocalValue;
    fn neg(self) -> LocalValue {
        match self {
            LocalValue::Real(a) => LocalValue::Real(-a),
            LocalValue::Complex(a) => LocalValue::Complex(-a),
            LocalValue::Padic(a) => LocalValue::Padic(a.neg()),
        }
    }
}

impl fmt::Display for LocalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalValue::Real(x) => write!(f, "{x}"),
            LocalValue::Complex(z) => write!(f, "{z}"),
            LocalValue::Padic(x) => write!(f, "{x}"),
        }
    }
}

/// A point of `K_S`: one completion value per place of the configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SAdelePoint(pub Vec<LocalValue>);

impl SAdelePoint {
    pub fn from_kelem(x: &KElem, places: &[Place], prec: u32) -> Self {
        SAdelePoint(places.iter().map(|v| LocalValue::from_kelem(x, v, prec)).collect())
    }

    pub fn components(&self) -> &[LocalValue] {
        &self.0
    }
}

/// Content `Π_v ‖x^{(v)}‖_{v,2}` of a vector given per place.
pub fn content(per_place: &[Vec<LocalValue>]) -> f64 {
    per_place.iter().map(|xs| local_norm(xs)).product()
}

/// `‖x‖_{v,2}`: Euclidean norm (real), squared Hermitian norm (complex),
/// coordinate maximum of `|·|_v` (finite).
pub fn local_norm(xs: &[LocalValue]) -> f64 {
    match xs.first() {
        None => 0.0,
        Some(LocalValue::Real(_)) => xs.iter().map(|x| x.abs_f64().powi(2)).sum::<f64>().sqrt(),
        Some(LocalValue::Complex(_)) => xs.iter().map(|x| x.abs_f64()).sum(),
        Some(LocalValue::Padic(_)) => xs.iter().map(|x| x.abs_f64()).fold(0.0, f64::max),
    }
}

/// A square or rectangular matrix over one completion.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<LocalValue>,
}

impl LocalMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> LocalValue) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        LocalMatrix { rows, cols, data }
    }

    pub fn identity(n: usize, v: &Place, prec: u32) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                LocalValue::one(v, prec)
            } else {
                LocalValue::zero(v)
            }
        })
    }

    pub fn get(&self, i: usize, j: usize) -> &LocalValue {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: LocalValue) {
        self.data[i * self.cols + j] = x;
    }

    pub fn mul(&self, other: &LocalMatrix) -> LocalMatrix {
        assert_eq!(self.cols, other.rows);
        LocalMatrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self.get(i, 0) * other.get(0, j);
            for k in 1..self.cols {
                acc = &acc + &(self.get(i, k) * other.get(k, j));
            }
            acc
        })
    }

    pub fn mul_vec(&self, x: &[LocalValue]) -> Vec<LocalValue> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = self.get(i, 0) * &x[0];
                for k in 1..self.cols {
                    acc = &acc + &(self.get(i, k) * &x[k]);
                }
                acc
            })
            .collect()
    }

    /// Gaussian elimination with pivots of largest `|·|_v`; returns the
    /// determinant and, when requested, the inverse.
    fn eliminate(&self, want_inverse: bool) -> Result<(LocalValue, Option<LocalMatrix>)> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let proto = self.get(0, 0).clone();
        let one = match &proto {
            LocalValue::Real(_) => LocalValue::Real(1.0),
            LocalValue::Complex(_) => LocalValue::Complex(Complex64::new(1.0, 0.0)),
            LocalValue::Padic(x) => LocalValue::Padic(PadicApprox::one(*x.place(), super::padic::DEFAULT_PREC * 2)),
        };
        let zero = &one - &one;
        let zero = match zero {
            LocalValue::Padic(x) => LocalValue::Padic(PadicApprox::exact_zero(*x.place())),
            z => z,
        };
        let mut inv = LocalMatrix::from_fn(n, n, |i, j| if i == j { one.clone() } else { zero.clone() });
        let mut det = one.clone();
        for c in 0..n {
            let piv = (c..n)
                .max_by(|&i, &j| a.get(i, c).abs_f64().total_cmp(&a.get(j, c).abs_f64()))
                .unwrap();
            if a.get(piv, c).is_zero() {
                return Ok((zero, None));
            }
            if piv != c {
                for j in 0..n {
                    a.data.swap(piv * n + j, c * n + j);
                    inv.data.swap(piv * n + j, c * n + j);
                }
                det = -&det;
            }
            let pv = a.get(c, c).clone();
            det = &det * &pv;
            let pinv = pv.inv()?;
            for j in 0..n {
                let x = a.get(c, j) * &pinv;
                a.set(c, j, x);
                if want_inverse {
                    let y = inv.get(c, j) * &pinv;
                    inv.set(c, j, y);
                }
            }
            for i in 0..n {
                if i == c {
                    continue;
                }
                let fct = a.get(i, c).clone();
                if fct.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let x = a.get(i, j) - &(&fct * a.get(c, j));
                    a.set(i, j, x);
                    if want_inverse {
                        let y = inv.get(i, j) - &(&fct * inv.get(c, j));
                        inv.set(i, j, y);
                    }
                }
            }
        }
        Ok((det, if want_inverse { Some(inv) } else { None }))
    }

    pub fn det(&self) -> Result<LocalValue> {
        Ok(self.eliminate(false)?.0)
    }

    pub fn inverse(&self) -> Result<LocalMatrix> {
        self.eliminate(true)?
            .1
            .ok_or_else(|| Error::invalid("singular matrix"))
    }

    pub fn transpose(&self) -> LocalMatrix {
        LocalMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_field::{places_over, NumberField};

    #[test]
    fn determinant_and_inverse_at_each_kind_of_place() {
        let g = NumberField::gaussian();
        let mut places = vec![Place::Complex];
        places.extend(places_over(g, 2).unwrap());
        places.extend(places_over(g, 5).unwrap());
        places.push(places_over(g, 3).unwrap()[0]);
        let m = [["1+i", "3", "1/2"], ["2", "-i", "5"], ["7/3", "1", "2+2i"]];
        let el = |s: &str| KElem::parse(g, s).unwrap();
        // exact determinant by cofactor expansion
        let e: Vec<Vec<KElem>> = m.iter().map(|r| r.iter().map(|s| el(s)).collect()).collect();
        let det = &(&e[0][0] * &(&(&e[1][1] * &e[2][2]) - &(&e[1][2] * &e[2][1])))
            - &(&(&e[0][1] * &(&(&e[1][0] * &e[2][2]) - &(&e[1][2] * &e[2][0])))
                - &(&e[0][2] * &(&(&e[1][0] * &e[2][1]) - &(&e[1][1] * &e[2][0]))));
        for v in &places {
            let a = LocalMatrix::from_fn(3, 3, |i, j| LocalValue::from_kelem(&e[i][j], v, 60));
            let d = a.det().unwrap();
            let want = LocalValue::from_kelem(&det, v, 60);
            match (&d, &want) {
                (LocalValue::Padic(x), LocalValue::Padic(y)) => {
                    assert!(x.sub(y).val_at_least(y.valuation().unwrap() + 30).unwrap())
                }
                _ => assert!((&d - &want).abs_f64().sqrt() < 1e-12 * want.abs_f64().sqrt()),
            }
            let prod = a.mul(&a.inverse().unwrap());
            for i in 0..3 {
                for j in 0..3 {
                    let target = if i == j { LocalValue::one(v, 60) } else { LocalValue::zero(v) };
                    let diff = prod.get(i, j) - &target;
                    match diff {
                        LocalValue::Padic(x) => assert!(x.val_at_least(30).unwrap()),
                        z => assert!(z.abs_f64() < 1e-20),
                    }
                }
            }
        }
    }
}
