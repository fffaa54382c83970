use num_bigint::BigInt;

use crate::dirichlet::RayPoint;
use crate::error::{Error, Result};
use crate::number_field::{KElem, Place, Splitting};
use crate::s_adic::{content, LocalMatrix, LocalValue, PadicApprox, SConfig, DEFAULT_PREC};

/// The data a lattice was built from when it has the form `g_{ε,δ} g_A O_S^{m+n}`.
#[derive(Clone, Debug)]
pub struct FlowData {
    /// `m × n` matrix per place.
    pub a: Vec<LocalMatrix>,
    pub t: RayPoint,
}

/// A lattice `g·O_S^N` in `K_S^N` given by one invertible matrix per place.
#[derive(Clone, Debug)]
pub struct SLatticeBasis {
    cfg: SConfig,
    g: Vec<LocalMatrix>,
    flow: Option<FlowData>,
}

impl SLatticeBasis {
    pub fn new(cfg: SConfig, g: Vec<LocalMatrix>) -> Result<Self> {
        if g.len() != cfg.len() {
            return Err(Error::invalid("one matrix per place of S is required"));
        }
        let dim = g.first().map_or(0, |m| m.rows);
        if dim == 0 || g.iter().any(|m| m.rows != dim || m.cols != dim) {
            return Err(Error::invalid("lattice matrices must be square of one size"));
        }
        for (v, m) in cfg.places().iter().zip(&g) {
            let d = m.det()?;
            let ok = match &d {
                LocalValue::Padic(x) => !x.is_zero(),
                _ => d.abs_f64() > crate::s_adic::TAU_ARCH,
            };
            if !ok {
                return Err(Error::invalid(format!("lattice matrix at {v} is singular")));
            }
        }
        Ok(SLatticeBasis { cfg, g, flow: None })
    }

    /// `O_S^N` itself.
    pub fn identity(cfg: &SConfig, dim: usize) -> Self {
        let g = cfg.places().iter().map(|v| LocalMatrix::identity(dim, v, DEFAULT_PREC)).collect();
        SLatticeBasis {
            cfg: cfg.clone(),
            g,
            flow: None,
        }
    }

    pub fn cfg(&self) -> &SConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.g[0].rows
    }

    pub fn matrices(&self) -> &[LocalMatrix] {
        &self.g
    }

    pub fn flow(&self) -> Option<&FlowData> {
        self.flow.as_ref()
    }

    /// `h·L`, forgetting any flow provenance.
    pub fn left_mul(&self, h: &[LocalMatrix]) -> Result<Self> {
        let g = h.iter().zip(&self.g).map(|(a, b)| a.mul(b)).collect();
        SLatticeBasis::new(self.cfg.clone(), g)
    }

    /// `Π_v |det g^{(v)}|_v`.
    pub fn det_content(&self) -> Result<f64> {
        let mut c = 1.0;
        for m in &self.g {
            c *= m.det()?.abs_f64();
        }
        Ok(c)
    }

    /// The image `g·z` per place.
    pub fn apply(&self, z: &[KElem]) -> Vec<Vec<LocalValue>> {
        self.cfg
            .places()
            .iter()
            .zip(&self.g)
            .map(|(v, m)| {
                let zv: Vec<LocalValue> = z.iter().map(|c| LocalValue::from_kelem(c, v, DEFAULT_PREC)).collect();
                m.mul_vec(&zv)
            })
            .collect()
    }

    /// `c(g·z)`.
    pub fn point_content(&self, z: &[KElem]) -> f64 {
        content(&self.apply(z))
    }
}

/// `τ(A) = [[I_m, A], [0, I_n]]` at every place.
pub fn tau(cfg: &SConfig, a: &[LocalMatrix]) -> Result<SLatticeBasis> {
    if a.len() != cfg.len() {
        return Err(Error::invalid("one matrix per place of S is required"));
    }
    let (m, n) = (a[0].rows, a[0].cols);
    if a.iter().any(|x| x.rows != m || x.cols != n) {
        return Err(Error::invalid("matrices disagree in shape"));
    }
    let g = cfg
        .places()
        .iter()
        .zip(a)
        .map(|(v, av)| {
            LocalMatrix::from_fn(m + n, m + n, |i, j| {
                if i == j {
                    LocalValue::one(v, DEFAULT_PREC)
                } else if i < m && j >= m {
                    av.get(i, j - m).clone()
                } else {
                    LocalValue::zero(v)
                }
            })
        })
        .collect();
    SLatticeBasis::new(cfg.clone(), g)
}

/// The canonical element of `K_v` with `|·|_v = t`: `t` at a real place,
/// `√t` at a complex place and a power of the prime element `ϖ_v` at a
/// finite place.
pub fn named_value(v: &Place, t: f64) -> Result<LocalValue> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("absolute value {t} must be positive")));
    }
    match v {
        Place::Real => Ok(LocalValue::Real(t)),
        Place::Complex => Ok(LocalValue::Complex(num_complex::Complex64::new(t.sqrt(), 0.0))),
        Place::Finite(fp) => {
            let e = t.ln() / (fp.q() as f64).ln();
            if (e - e.round()).abs() > 1e-9 {
                return Err(Error::invalid(format!("{t} is not in the value group at {v}")));
            }
            let unit = (BigInt::from(1), BigInt::from(0));
            Ok(LocalValue::Padic(PadicApprox::from_parts(*fp, -(e.round() as i64), unit, DEFAULT_PREC)?))
        }
    }
}

fn value_matches(v: &Place, x: &LocalValue, t: f64) -> bool {
    match (v, x) {
        (Place::Finite(fp), LocalValue::Padic(p)) => {
            let Some(val) = p.valuation() else { return false };
            let per = if fp.splitting() == Splitting::Inert { 2 } else { 1 };
            let e = -(t.ln() / (fp.p() as f64).ln());
            (val * per) as f64 == e.round() && (e - e.round()).abs() < 1e-9
        }
        (Place::Finite(_), _) => false,
        _ => ((x.abs_f64() - t) / t).abs() <= 1e-9,
    }
}

/// `g_{ε,δ} = diag((ε^{(1)})^{-1}, …, (δ^{(n)})^{-1})` per place. Without
/// explicit values the canonical elements of [`named_value`] are used.
pub fn diag_flow(cfg: &SConfig, t: &RayPoint, values: Option<&[Vec<LocalValue>]>) -> Result<SLatticeBasis> {
    let dim = t.m() + t.n();
    let mut g = Vec::with_capacity(cfg.len());
    for (vi, v) in cfg.places().iter().enumerate() {
        let mut diag = Vec::with_capacity(dim);
        for k in 0..dim {
            let tk = t.components()[vi][k];
            let x = match values {
                Some(vals) => {
                    let x = vals[vi][k].clone();
                    if !value_matches(v, &x, tk) {
                        return Err(Error::invalid(format!(
                            "entry {k} at {v} does not have absolute value {tk}"
                        )));
                    }
                    x
                }
                None => named_value(v, tk)?,
            };
            if x.is_zero() {
                return Err(Error::invalid("zero entry in the diagonal flow"));
            }
            diag.push(x.inv()?);
        }
        g.push(LocalMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                diag[i].clone()
            } else {
                LocalValue::zero(v)
            }
        }));
    }
    SLatticeBasis::new(cfg.clone(), g)
}

/// `g_{ε,δ} g_A O_S^{m+n}`.
pub fn flow_lattice(cfg: &SConfig, a: &[LocalMatrix], t: &RayPoint) -> Result<SLatticeBasis> {
    if a.len() != cfg.len() {
        return Err(Error::invalid("one matrix per place of S is required"));
    }
    let (m, n) = (t.m(), t.n());
    if a.iter().any(|x| x.rows != m || x.cols != n) {
        return Err(Error::invalid("matrix shape does not match the ray point"));
    }
    let mut g = Vec::with_capacity(cfg.len());
    for (vi, v) in cfg.places().iter().enumerate() {
        let diag = t.components()[vi]
            .iter()
            .map(|&tk| named_value(v, tk)?.inv())
            .collect::<Result<Vec<_>>>()?;
        let av = &a[vi];
        g.push(LocalMatrix::from_fn(m + n, m + n, |i, j| {
            if i == j {
                diag[i].clone()
            } else if i < m && j >= m {
                &diag[i] * av.get(i, j - m)
            } else {
                LocalValue::zero(v)
            }
        }));
    }
    Ok(SLatticeBasis {
        cfg: cfg.clone(),
        g,
        flow: Some(FlowData {
            a: a.to_vec(),
            t: t.clone(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::central_ray_point;
    use crate::number_field::NumberField;

    #[test]
    fn tau_is_block_unipotent() {
        let cfg = SConfig::with_primes(NumberField::rationals(), &[]).unwrap();
        let a = vec![LocalMatrix::from_fn(1, 1, |_, _| LocalValue::Real(2f64.sqrt()))];
        let l = tau(&cfg, &a).unwrap();
        let g = &l.matrices()[0];
        assert_eq!(g.get(0, 1), &LocalValue::Real(2f64.sqrt()));
        assert_eq!(g.get(1, 0), &LocalValue::Real(0.0));
        assert_eq!(l.det_content().unwrap(), 1.0);
        let zero = vec![LocalMatrix::from_fn(1, 2, |_, _| LocalValue::Real(0.0))];
        let id = tau(&cfg, &zero).unwrap();
        assert_eq!(id.matrices()[0], LocalMatrix::identity(3, &Place::Real, DEFAULT_PREC));
    }

    #[test]
    fn diag_flow_inverts_components() {
        let cfg = SConfig::with_primes(NumberField::rationals(), &[]).unwrap();
        let t = central_ray_point(&cfg, 1, 1, &[5.0], None).unwrap();
        let d = diag_flow(&cfg, &t, None).unwrap();
        assert!((d.matrices()[0].get(0, 0).abs_f64() - 5.0).abs() < 1e-12);
        assert!((d.matrices()[0].get(1, 1).abs_f64() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn diag_flow_det_content_is_inverse_constant_power() {
        for (k, primes) in [
            (NumberField::rationals(), vec![2u64, 3]),
            (NumberField::gaussian(), vec![2, 5]),
            (NumberField::imaginary_quadratic(7).unwrap(), vec![2]),
        ] {
            let cfg = SConfig::with_primes(k, &primes).unwrap();
            let delta: Vec<f64> = cfg
                .places()
                .iter()
                .map(|v| match v {
                    Place::Finite(fp) => fp.q() as f64,
                    _ => 9.0,
                })
                .collect();
            let t = central_ray_point(&cfg, 1, 2, &delta, None).unwrap();
            let d = diag_flow(&cfg, &t, None).unwrap();
            let want = k.field_constant().powi(-3);
            assert!((d.det_content().unwrap() - want).abs() / want < 1e-9);
        }
    }

    #[test]
    fn finite_entry_inverts_to_prime_power() {
        let q = NumberField::rationals();
        let cfg = SConfig::with_primes(q, &[2]).unwrap();
        let v2 = cfg.places()[1];
        let x = named_value(&v2, 0.5).unwrap().inv().unwrap();
        assert_eq!(x.abs_f64(), 2.0);
        assert_eq!(x, LocalValue::from_kelem(&KElem::from_ratio(q, 1, 2), &v2, DEFAULT_PREC));
    }

    #[test]
    fn explicit_values_are_checked() {
        let cfg = SConfig::with_primes(NumberField::rationals(), &[]).unwrap();
        let t = central_ray_point(&cfg, 1, 1, &[5.0], None).unwrap();
        let good = vec![vec![LocalValue::Real(-0.2), LocalValue::Real(5.0)]];
        assert!(diag_flow(&cfg, &t, Some(&good)).is_ok());
        let bad = vec![vec![LocalValue::Real(0.3), LocalValue::Real(5.0)]];
        assert!(diag_flow(&cfg, &t, Some(&bad)).is_err());
    }
}
