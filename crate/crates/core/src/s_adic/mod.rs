//! Points of `K_S`, the ring of S-integers, and exhaustive enumeration of
//! S-integers inside adelic boxes.

mod enumerate;
mod local;
mod padic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number_field::{
    arith::factor, finite_place, infinite_place, places_over, FinitePlace, KElem, NumberField,
    Place,
};

pub use enumerate::{
    enumerate_box, estimate_box_count, nearest_s_integer, reduce_mod, s_integers_near,
    DEFAULT_CAP,
};
pub(crate) use enumerate::{exact_within, finite_coset};
pub use local::{content, local_norm, LocalMatrix, LocalValue, SAdelePoint};
pub use padic::{PadicApprox, DEFAULT_PREC, MIN_SIGNIFICANT};

/// Relative tolerance for archimedean comparisons: `|x|_v ≤ b` is accepted
/// when `|x|_v ≤ b·(1 + TAU_ARCH)`.
pub const TAU_ARCH: f64 = 1e-9;

/// A field together with an ordered set `S` of places containing the
/// archimedean one.
#[derive(Clone, Debug, PartialEq)]
pub struct SConfig {
    field: NumberField,
    places: Vec<Place>,
}

impl SConfig {
    pub fn new(field: NumberField, places: Vec<Place>) -> Result<Self> {
        let inf = infinite_place(field);
        if !places.contains(&inf) {
            return Err(Error::invalid("S must contain the archimedean place"));
        }
        for (i, v) in places.iter().enumerate() {
            if places[..i].contains(v) {
                return Err(Error::invalid(format!("duplicate place {v} in S")));
            }
            match v {
                Place::Real if !field.is_rational() => {
                    return Err(Error::invalid(format!("{field} has no real place")))
                }
                Place::Complex if field.is_rational() => {
                    return Err(Error::invalid("Q has no complex place"))
                }
                Place::Finite(fp) if fp.field() != field => {
                    return Err(Error::invalid("place belongs to another field"))
                }
                _ => {}
            }
        }
        Ok(SConfig { field, places })
    }

    /// `S` = the archimedean place followed by every place over each listed prime.
    pub fn with_primes(field: NumberField, primes: &[u64]) -> Result<Self> {
        let mut places = vec![infinite_place(field)];
        for &p in primes {
            places.extend(places_over(field, p)?);
        }
        Self::new(field, places)
    }

    pub fn field(&self) -> NumberField {
        self.field
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    pub fn finite_places(&self) -> impl Iterator<Item = &FinitePlace> {
        self.places.iter().filter_map(|v| v.finite())
    }

    pub fn real_count(&self) -> usize {
        self.places.iter().filter(|v| matches!(v, Place::Real)).count()
    }

    pub fn complex_count(&self) -> usize {
        self.places.iter().filter(|v| matches!(v, Place::Complex)).count()
    }

    pub fn finite_count(&self) -> usize {
        self.places.len() - self.real_count() - self.complex_count()
    }

    /// Exponent `|S_r|/2 + |S_c|` of the correspondence threshold.
    pub fn threshold_exponent(&self) -> f64 {
        self.real_count() as f64 / 2.0 + self.complex_count() as f64
    }

    pub fn index_of(&self, v: &Place) -> Option<usize> {
        self.places.iter().position(|w| w == v)
    }

    pub fn contains_prime(&self, p: u64) -> bool {
        self.finite_places().any(|fp| fp.p() == p)
    }

    pub fn to_json(&self) -> SConfigJson {
        SConfigJson {
            field: self.field.name(),
            s: self
                .places
                .iter()
                .map(|v| match v {
                    Place::Finite(fp) => PlaceJson::Finite {
                        p: fp.p(),
                        pi: Some([fp.pi_coords().0, fp.pi_coords().1]),
                    },
                    _ => PlaceJson::Inf,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &SConfigJson) -> Result<Self> {
        let field = NumberField::parse(&j.field)?;
        let mut places = Vec::new();
        for pj in &j.s {
            match pj {
                PlaceJson::Inf => places.push(infinite_place(field)),
                PlaceJson::Finite { p, pi } => {
                    let pi = pi.map(|[a, b]| KElem::from_ints(field, a, b));
                    places.push(Place::Finite(finite_place(field, *p, pi.as_ref())?));
                }
            }
        }
        Self::new(field, places)
    }
}

/// JSON form `{"field": "Q(i)", "S": [{"type": "inf"}, {"type": "finite", "p": 2, "pi": [1, 1]}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SConfigJson {
    pub field: String,
    #[serde(rename = "S")]
    pub s: Vec<PlaceJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PlaceJson {
    Inf,
    Finite {
        p: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pi: Option<[i64; 2]>,
    },
}

/// A bound on `|x|_v` at one place. At a finite place the bound
/// `|x|_v ≤ p^{-f·k}` is stored as the valuation condition `v(x) ≥ k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocalBound {
    Arch(f64),
    Val(i64),
}

impl LocalBound {
    /// Snaps a real bound at a finite place down to the value group.
    pub fn from_abs(r: f64, v: &Place) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid(format!("bound {r} must be positive and finite")));
        }
        match v {
            Place::Finite(fp) => {
                let q = fp.q() as f64;
                let mut k = (-r.ln() / q.ln()).ceil() as i64;
                // guard against rounding on exact powers
                if q.powf(-(k as f64 - 1.0)) <= r * (1.0 + TAU_ARCH) {
                    k -= 1;
                }
                Ok(LocalBound::Val(k))
            }
            _ => Ok(LocalBound::Arch(r)),
        }
    }

    /// The bound as a real number `|·|_v`.
    pub fn to_abs(&self, v: &Place) -> f64 {
        match (self, v) {
            (LocalBound::Arch(b), _) => *b,
            (LocalBound::Val(k), Place::Finite(fp)) => (fp.q() as f64).powf(-(*k as f64)),
            (LocalBound::Val(_), _) => panic!("valuation bound at an archimedean place"),
        }
    }
}

/// Per place and per coordinate bounds `|x_j|_v ≤ r_{v,j}`; indexed
/// `[place][coordinate]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SBox {
    pub bounds: Vec<Vec<LocalBound>>,
}

impl SBox {
    /// The same bound for every coordinate at each place.
    pub fn uniform(per_place: &[LocalBound], n: usize) -> Self {
        SBox {
            bounds: per_place.iter().map(|b| vec![*b; n]).collect(),
        }
    }
}

/// True iff `x` is integral at every finite place outside `S`.
pub fn is_s_integer(x: &KElem, cfg: &SConfig) -> bool {
    if x.is_zero() {
        return true;
    }
    let (_, _, d) = x.integral_parts();
    let Ok(primes) = factor(&d) else {
        return false;
    };
    for (p, _) in primes {
        let Ok(places) = places_over(x.field(), p) else {
            return false;
        };
        for v in places {
            if cfg.index_of(&v).is_none() && v.finite().unwrap().valuation(x).unwrap() < 0 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_integer_examples() {
        let q = NumberField::rationals();
        let cfg = SConfig::with_primes(q, &[2]).unwrap();
        assert!(is_s_integer(&KElem::from_ratio(q, 3, 2), &cfg));
        assert!(!is_s_integer(&KElem::from_ratio(q, 1, 3), &cfg));
        let g = NumberField::gaussian();
        let cfg = SConfig::with_primes(g, &[2]).unwrap();
        let x = KElem::from_ints(g, 1, 1).inv().unwrap();
        assert!(is_s_integer(&x, &cfg));
        // only one of the two places over 5
        let v5 = places_over(g, 5).unwrap();
        let cfg = SConfig::new(g, vec![Place::Complex, v5[0]]).unwrap();
        assert!(is_s_integer(&KElem::from_ints(g, 2, 1).inv().unwrap(), &cfg));
        assert!(!is_s_integer(&KElem::from_ints(g, 2, -1).inv().unwrap(), &cfg));
    }

    #[test]
    fn config_json_round_trip() {
        let g = NumberField::gaussian();
        let v5 = places_over(g, 5).unwrap();
        let cfg = SConfig::new(g, vec![Place::Complex, places_over(g, 2).unwrap()[0], v5[1]]).unwrap();
        let s = serde_json::to_string(&cfg.to_json()).unwrap();
        assert_eq!(
            s,
            r#"{"field":"Q(i)","S":[{"type":"inf"},{"type":"finite","p":2,"pi":[1,1]},{"type":"finite","p":5,"pi":[2,-1]}]}"#
        );
        let back = SConfig::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(SConfig::new(g, vec![v5[0]]).is_err());
        assert!(SConfig::new(g, vec![Place::Complex, v5[0], v5[0]]).is_err());
    }

    #[test]
    fn snapping_bounds() {
        let q = NumberField::rationals();
        let v2 = places_over(q, 2).unwrap()[0];
        assert_eq!(LocalBound::from_abs(0.25, &v2).unwrap(), LocalBound::Val(2));
        assert_eq!(LocalBound::from_abs(0.3, &v2).unwrap(), LocalBound::Val(2));
        assert_eq!(LocalBound::from_abs(4.0, &v2).unwrap(), LocalBound::Val(-2));
        assert_eq!(LocalBound::from_abs(3.9, &v2).unwrap(), LocalBound::Val(-1));
        let g = NumberField::gaussian();
        let v3 = places_over(g, 3).unwrap()[0];
        // value group of the inert place is 9^Z
        assert_eq!(LocalBound::from_abs(0.5, &v3).unwrap(), LocalBound::Val(1));
        assert_eq!(LocalBound::Val(1).to_abs(&v3), 1.0 / 9.0);
    }
}
