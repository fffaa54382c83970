use crate::error::{Error, Result};
use crate::number_field::Place;
use crate::s_adic::{LocalBound, SConfig};

/// Relative tolerance on the product constraint of a ray point.
pub const PRODUCT_TOL: f64 = 1e-9;

/// A point `t` of the positive chamber: for every place `v ∈ S` a tuple
/// `(t_v^{(1)}, …, t_v^{(m+n)})` of normalized absolute values with the
/// first `m` entries below one, the last `n` at least one, and
/// `Π_v Π_i t_v^{(i)} = const_K^{m+n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RayPoint {
    m: usize,
    n: usize,
    t: Vec<Vec<f64>>,
}

impl RayPoint {
    pub fn new(cfg: &SConfig, m: usize, n: usize, t: Vec<Vec<f64>>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid("m and n must be positive"));
        }
        if t.len() != cfg.len() || t.iter().any(|row| row.len() != m + n) {
            return Err(Error::invalid("ray point shape does not match S and m + n"));
        }
        for (v, row) in cfg.places().iter().zip(&t) {
            for (i, &x) in row.iter().enumerate() {
                if !(x > 0.0) || !x.is_finite() {
                    return Err(Error::invalid(format!("component {x} at {v} is not positive")));
                }
                if i < m && x >= 1.0 {
                    return Err(Error::invalid(format!(
                        "contracting component {x} at {v} must be below 1"
                    )));
                }
                if i >= m && x < 1.0 {
                    return Err(Error::invalid(format!(
                        "expanding component {x} at {v} must be at least 1"
                    )));
                }
                if let Place::Finite(fp) = v {
                    let e = -(x.ln() / (fp.q() as f64).ln());
                    if (e - e.round()).abs() > 1e-9 {
                        return Err(Error::invalid(format!(
                            "component {x} at {v} is not a power of {}",
                            fp.q()
                        )));
                    }
                }
            }
        }
        let target = cfg.field().field_constant().powi((m + n) as i32);
        let prod: f64 = t.iter().flatten().product();
        if ((prod - target) / target).abs() > PRODUCT_TOL {
            return Err(Error::invalid(format!(
                "product of components {prod} differs from {target}"
            )));
        }
        Ok(RayPoint { m, n, t })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Components `[place][i]`.
    pub fn components(&self) -> &[Vec<f64>] {
        &self.t
    }

    /// `|ε_v^{(i)}|_v`.
    pub fn eps(&self, place: usize, i: usize) -> f64 {
        self.t[place][i]
    }

    /// `|δ_v^{(j)}|_v`.
    pub fn delta(&self, place: usize, j: usize) -> f64 {
        self.t[place][self.m + j]
    }

    /// `‖t‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        self.t.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// `‖p_i(t)‖_∞` for the place with index `i`.
    pub fn projection_sup(&self, i: usize) -> f64 {
        self.t[i].iter().copied().fold(0.0, f64::max)
    }

    /// Bounds for the system tightened by `ε`: `|·|_v ≤ ε^{d_v}·t_v^{(i)}`,
    /// snapped down to the value group at finite places. Returns the row
    /// bounds and the column bounds, both indexed `[place][k]`.
    pub fn bounds(&self, cfg: &SConfig, eps: f64) -> Result<(Vec<Vec<LocalBound>>, Vec<Vec<LocalBound>>)> {
        let mut rows = Vec::with_capacity(cfg.len());
        let mut cols = Vec::with_capacity(cfg.len());
        for (vi, v) in cfg.places().iter().enumerate() {
            let s = eps.powi(v.local_degree() as i32);
            let b = |x: f64| -> Result<LocalBound> {
                match v {
                    Place::Finite(_) => LocalBound::from_abs(x * s, v),
                    _ => Ok(LocalBound::Arch(x * s)),
                }
            };
            rows.push((0..self.m).map(|i| b(self.eps(vi, i))).collect::<Result<Vec<_>>>()?);
            cols.push((0..self.n).map(|j| b(self.delta(vi, j))).collect::<Result<Vec<_>>>()?);
        }
        Ok((rows, cols))
    }
}

/// A point on the central ray with expanding components `delta[v]` at every
/// place. Finite contracting components are `finite_eps[v]` when given and
/// `q_v^{-1}` otherwise; the archimedean contracting component is solved
/// from the product constraint.
pub fn central_ray_point(
    cfg: &SConfig,
    m: usize,
    n: usize,
    delta: &[f64],
    finite_eps: Option<&[f64]>,
) -> Result<RayPoint> {
    if delta.len() != cfg.len() {
        return Err(Error::invalid("one expanding scale per place is required"));
    }
    if let Some(&d) = delta.iter().find(|&&d| !(d >= 1.0)) {
        return Err(Error::invalid(format!("expanding scale {d} is below 1")));
    }
    let target = cfg.field().field_constant().powi((m + n) as i32);
    let mut eps = vec![0.0; cfg.len()];
    let mut rest = 1.0;
    let mut arch = None;
    for (i, v) in cfg.places().iter().enumerate() {
        rest *= delta[i].powi(n as i32);
        match v {
            Place::Finite(fp) => {
                let e = finite_eps.map_or(1.0 / fp.q() as f64, |fe| fe[i]);
                eps[i] = e;
                rest *= e.powi(m as i32);
            }
            _ => arch = Some(i),
        }
    }
    let ai = arch.ok_or_else(|| Error::invalid("S has no archimedean place"))?;
    let ea = (target / rest).powf(1.0 / m as f64);
    if !(ea < 1.0) {
        return Err(Error::invalid(format!(
            "archimedean contracting component {ea} would not be below 1; enlarge the expanding scales"
        )));
    }
    eps[ai] = ea;
    let t = (0..cfg.len())
        .map(|i| {
            let mut row = vec![eps[i]; m];
            row.extend(std::iter::repeat(delta[i]).take(n));
            row
        })
        .collect();
    RayPoint::new(cfg, m, n, t)
}

/// A central-ray schedule of `len` points: the archimedean expanding scale is
/// `arch_start · arch_ratio^s` and each finite expanding scale is `q_v^s` at
/// step `s = 0, 1, …`.
pub fn central_ray_schedule(
    cfg: &SConfig,
    m: usize,
    n: usize,
    len: usize,
    arch_start: f64,
    arch_ratio: f64,
) -> Result<Vec<RayPoint>> {
    (0..len)
        .map(|s| {
            let delta: Vec<f64> = cfg
                .places()
                .iter()
                .map(|v| match v {
                    Place::Finite(fp) => (fp.q() as f64).powi(s as i32),
                    _ => arch_start * arch_ratio.powi(s as i32),
                })
                .collect();
            central_ray_point(cfg, m, n, &delta, None)
        })
        .collect()
}
