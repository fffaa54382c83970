use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dirichlet::{central_ray_point, central_ray_schedule, RayPoint};
use crate::error::{Error, Result};
use crate::measures::{MapSpec, MeasureSpec, PlaceBall, Polynomial};
use crate::number_field::{finite_place, infinite_place, KElem, NumberField, Place};
use crate::s_adic::{LocalMatrix, LocalValue, SConfig, DEFAULT_CAP, DEFAULT_PREC};

/// Experiments the runner knows.
pub const EXPERIMENTS: [&str; 11] = [
    "dirichlet-solve",
    "dirichlet-improvable",
    "di-scan",
    "delta-trajectory",
    "lattice-delta",
    "lattice-correspond",
    "good-certify",
    "good-rho",
    "nondiv-check",
    "nondiv-constants",
    "nondiv-discan",
];

/// A place of `S`: `"inf"`, a prime `p`, or `{"p": 5, "pi": "2+i"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlaceSpec {
    Prime(u64),
    Name(String),
    Full {
        p: u64,
        #[serde(default)]
        pi: Option<String>,
    },
}

/// `m × n` matrix literal: a scalar (for `1 × 1`), a row, or rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<Value>>),
    Row(Vec<Value>),
    Scalar(Value),
}

/// Per-place data keyed by place label (`"inf"`, `"2"`, `"v5[2+i]"`) or
/// listed in the order of `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerPlace<T> {
    List(Vec<T>),
    Map(BTreeMap<String, T>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySpec {
    /// Expanding scale per place; contracting scales follow the central ray.
    #[serde(default)]
    pub central: Option<PerPlace<f64>>,
    /// Full component tuples `(t^{(1)}, …, t^{(m+n)})` per place.
    #[serde(default)]
    pub components: Option<PerPlace<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub len: usize,
    pub arch_start: f64,
    #[serde(default = "two")]
    pub arch_ratio: f64,
}

fn two() -> f64 {
    2.0
}

/// A ball: `{"interval": [a, b]}` at a real place, `{"center": [re, im],
/// "radius": r}` at a complex place, `{"center": "1/3", "k": 2}` at a finite
/// place (defaults: `O_v`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    #[serde(default)]
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub center: Option<Value>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub k: Option<i64>,
}

/// `{"veronese": n}` or explicit one-variable polynomials per place, each a
/// list of `[coefficient, exponent]` terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    #[serde(default)]
    pub veronese: Option<usize>,
    #[serde(default)]
    pub components: Option<Vec<Vec<Vec<(Value, u32)>>>>,
}

/// Goodness certification parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodSpec {
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_good_grid")]
    pub eps_grid: Vec<f64>,
    /// Random unit-sphere combinations added to the coordinate functions.
    #[serde(default = "default_family")]
    pub family: usize,
    #[serde(default = "default_good_samples")]
    pub samples: usize,
}

fn default_good_grid() -> Vec<f64> {
    vec![0.01, 0.05, 0.1, 0.25, 0.5]
}

fn default_family() -> usize {
    4
}

fn default_good_samples() -> usize {
    20_000
}

impl Default for GoodSpec {
    fn default() -> Self {
        GoodSpec {
            c: None,
            alpha: None,
            eps_grid: default_good_grid(),
            family: default_family(),
            samples: default_good_samples(),
        }
    }
}

/// Nondivergence parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NondivSpec {
    /// Levels as fractions of `ρ/√|D_K|`.
    #[serde(default = "default_rel_grid")]
    pub eps_rel: Vec<f64>,
    #[serde(default)]
    pub n_x: Option<f64>,
    #[serde(default = "default_rho_samples")]
    pub rho_samples: usize,
    /// Archimedean steps per cube edge of the coefficient net.
    #[serde(default = "default_arch_net")]
    pub arch_net: u32,
    /// Digits of the finite residue-class net.
    #[serde(default = "default_finite_net")]
    pub finite_net: u32,
    #[serde(default = "default_sup_samples")]
    pub sup_samples: usize,
    #[serde(default = "one")]
    pub delta_height: f64,
}

fn default_rel_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.25, 0.5, 1.0]
}

fn default_rho_samples() -> usize {
    2000
}

fn default_arch_net() -> u32 {
    160
}

fn default_finite_net() -> u32 {
    3
}

fn default_sup_samples() -> usize {
    1000
}

fn one() -> f64 {
    1.0
}

impl Default for NondivSpec {
    fn default() -> Self {
        NondivSpec {
            eps_rel: default_rel_grid(),
            n_x: None,
            rho_samples: default_rho_samples(),
            arch_net: default_arch_net(),
            finite_net: default_finite_net(),
            sup_samples: default_sup_samples(),
            delta_height: 1.0,
        }
    }
}

/// A run configuration: one JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub field: String,
    #[serde(rename = "S")]
    pub s: Vec<PlaceSpec>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default, rename = "A")]
    pub a: Option<PerPlace<MatrixSpec>>,
    #[serde(default)]
    pub t: Option<RaySpec>,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub cap: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub ball: Option<PerPlace<BallSpec>>,
    #[serde(default)]
    pub map: Option<MapJson>,
    #[serde(default)]
    pub good: Option<GoodSpec>,
    #[serde(default)]
    pub nondiv: Option<NondivSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        if !EXPERIMENTS.contains(&c.experiment.as_str()) {
            return Err(Error::invalid(format!(
                "unknown experiment {:?}; expected one of {}",
                c.experiment,
                EXPERIMENTS.join(", ")
            )));
        }
        Ok(c)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn cap(&self) -> u64 {
        self.cap.unwrap_or(DEFAULT_CAP)
    }

    pub fn s_config(&self) -> Result<SConfig> {
        let field = NumberField::parse(&self.field)?;
        let mut places = Vec::with_capacity(self.s.len());
        for p in &self.s {
            let v = match p {
                PlaceSpec::Name(s) if s == "inf" => infinite_place(field),
                PlaceSpec::Name(s) => {
                    let p: u64 = s
                        .trim_start_matches('v')
                        .parse()
                        .map_err(|_| Error::invalid(format!("unknown place {s:?}")))?;
                    Place::Finite(finite_place(field, p, None)?)
                }
                PlaceSpec::Prime(p) => Place::Finite(finite_place(field, *p, None)?),
                PlaceSpec::Full { p, pi } => {
                    let pi = pi.as_deref().map(|s| KElem::parse(field, s)).transpose()?;
                    Place::Finite(finite_place(field, *p, pi.as_ref())?)
                }
            };
            places.push(v);
        }
        SConfig::new(field, places)
    }

    pub fn dims(&self) -> Result<(usize, usize)> {
        match (self.m, self.n) {
            (Some(m), Some(n)) if m > 0 && n > 0 => Ok((m, n)),
            _ => Err(Error::invalid("positive \"m\" and \"n\" are required")),
        }
    }

    pub fn require<'a, T>(&self, x: &'a Option<T>, name: &str) -> Result<&'a T> {
        x.as_ref()
            .ok_or_else(|| Error::invalid(format!("experiment {} needs \"{name}\"", self.experiment)))
    }

    pub fn matrices(&self, cfg: &SConfig) -> Result<Vec<LocalMatrix>> {
        let (m, n) = self.dims()?;
        let specs = per_place(cfg, self.require(&self.a, "A")?)?;
        cfg.places()
            .iter()
            .zip(specs)
            .map(|(v, spec)| {
                let rows: Vec<Vec<Value>> = match spec {
                    MatrixSpec::Rows(r) => r.clone(),
                    MatrixSpec::Row(r) if m == 1 => vec![r.clone()],
                    MatrixSpec::Row(r) if n == 1 => r.iter().map(|x| vec![x.clone()]).collect(),
                    MatrixSpec::Scalar(x) => vec![vec![x.clone()]],
                    MatrixSpec::Row(_) => return Err(Error::invalid("a single row needs m = 1 or n = 1")),
                };
                if rows.len() != m || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::invalid(format!("matrix at {v} is not {m} × {n}")));
                }
                let vals = rows
                    .iter()
                    .map(|r| r.iter().map(|x| parse_local(x, v, cfg.field())).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Ok(LocalMatrix::from_fn(m, n, |i, j| vals[i][j].clone()))
            })
            .collect()
    }

    pub fn ray_point(&self, cfg: &SConfig, m: usize, n: usize) -> Result<RayPoint> {
        let t = self.require(&self.t, "t")?;
        match (&t.central, &t.components) {
            (Some(c), None) => {
                let delta: Vec<f64> = per_place(cfg, c)?.into_iter().copied().collect();
                central_ray_point(cfg, m, n, &delta, None)
            }
            (None, Some(c)) => {
                let comps: Vec<Vec<f64>> = per_place(cfg, c)?.into_iter().cloned().collect();
                RayPoint::new(cfg, m, n, comps)
            }
            _ => Err(Error::invalid("\"t\" needs exactly one of \"central\" and \"components\"")),
        }
    }

    pub fn schedule(&self, cfg: &SConfig, m: usize, n: usize) -> Result<Vec<RayPoint>> {
        let s = self.require(&self.schedule, "schedule")?;
        if s.len == 0 {
            return Err(Error::invalid("schedule length must be positive"));
        }
        central_ray_schedule(cfg, m, n, s.len, s.arch_start, s.arch_ratio)
    }

    pub fn measure(&self, cfg: &SConfig) -> Result<MeasureSpec> {
        let balls = per_place(cfg, self.require(&self.ball, "ball")?)?;
        let balls = cfg
            .places()
            .iter()
            .zip(balls)
            .map(|(v, b)| ball(v, b, cfg.field()))
            .collect::<Result<Vec<_>>>()?;
        MeasureSpec::new(balls)
    }

    pub fn map_spec(&self, cfg: &SConfig, spec: &MeasureSpec) -> Result<MapSpec> {
        let mj = self.require(&self.map, "map")?;
        match (mj.veronese, &mj.components) {
            (Some(n), None) if n > 0 => MapSpec::veronese(spec, n),
            (None, Some(comps)) => {
                if comps.len() != cfg.len() {
                    return Err(Error::invalid("one list of polynomials per place is required"));
                }
                let polys = cfg
                    .places()
                    .iter()
                    .zip(comps)
                    .map(|(v, fs)| {
                        fs.iter()
                            .map(|terms| {
                                let terms = terms
                                    .iter()
                                    .map(|(c, e)| Ok((parse_local(c, v, cfg.field())?, vec![*e])))
                                    .collect::<Result<Vec<_>>>()?;
                                Ok(Polynomial { terms })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                MapSpec::new(polys)
            }
            _ => Err(Error::invalid("\"map\" needs exactly one of \"veronese\" and \"components\"")),
        }
    }
}

/// Resolves per-place data to the order of `S`.
pub fn per_place<'a, T>(cfg: &SConfig, data: &'a PerPlace<T>) -> Result<Vec<&'a T>> {
    match data {
        PerPlace::List(xs) => {
            if xs.len() != cfg.len() {
                return Err(Error::invalid(format!("expected {} per-place entries, found {}", cfg.len(), xs.len())));
            }
            Ok(xs.iter().collect())
        }
        PerPlace::Map(map) => {
            for k in map.keys() {
                if !cfg.places().iter().any(|v| label_matches(k, v, cfg)) {
                    return Err(Error::invalid(format!("no place of S matches key {k:?}")));
                }
            }
            cfg.places()
                .iter()
                .map(|v| {
                    let hits: Vec<&T> = map.iter().filter(|(k, _)| label_matches(k, v, cfg)).map(|(_, x)| x).collect();
                    match hits.as_slice() {
                        [x] => Ok(*x),
                        [] => Err(Error::invalid(format!("missing entry for place {v}"))),
                        _ => Err(Error::invalid(format!("several entries for place {v}"))),
                    }
                })
                .collect()
        }
    }
}

fn label_matches(key: &str, v: &Place, cfg: &SConfig) -> bool {
    let key: String = key.chars().filter(|c| !c.is_whitespace()).collect();
    match v {
        Place::Real | Place::Complex => key == "inf",
        Place::Finite(fp) => {
            if key == v.to_string() {
                return true;
            }
            let bare = key.trim_start_matches('v');
            bare.parse::<u64>().is_ok_and(|p| p == fp.p()) && cfg.finite_places().filter(|q| q.p() == fp.p()).count() == 1
        }
    }
}

const SYMBOLS: [(&str, f64); 4] = [
    ("pi", std::f64::consts::PI),
    ("e", std::f64::consts::E),
    ("phi", 1.618_033_988_749_895),
    ("ln2", std::f64::consts::LN_2),
];

/// Evaluates an archimedean literal: a rational `"p/q"`, a decimal, or an
/// optionally scaled symbol `"-3/2*sqrt2"` from `sqrtN`, `pi`, `e`, `phi`, `ln2`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::invalid(format!("cannot parse literal {s:?}"));
    let (sign, body) = match s.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
    };
    let (coef, sym) = match body.split_once('*') {
        Some((c, sym)) => (parse_rational(c).ok_or_else(bad)?, Some(sym)),
        None => match parse_rational(body) {
            Some(r) => (r, None),
            None => (1.0, Some(body)),
        },
    };
    let val = match sym {
        None => 1.0,
        Some(sym) => {
            if let Some(n) = sym.strip_prefix("sqrt") {
                let n: u32 = n.parse().map_err(|_| bad())?;
                (n as f64).sqrt()
            } else {
                SYMBOLS.iter().find(|(k, _)| *k == sym).map(|(_, v)| *v).ok_or_else(bad)?
            }
        }
    };
    Ok(sign * coef * val)
}

fn parse_rational(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.parse().ok()?;
            let b: f64 = b.parse().ok()?;
            (b != 0.0).then_some(a / b)
        }
        None => s.parse().ok(),
    }
}

/// Reads a literal into `K_v`. Finite places need exact field elements;
/// archimedean places also take symbolic reals and `{"re": …, "im": …}`.
pub fn parse_local(x: &Value, v: &Place, field: NumberField) -> Result<LocalValue> {
    let bad = || Error::invalid(format!("cannot read {x} at {v}"));
    match (v, x) {
        (Place::Finite(_), Value::String(s)) => Ok(LocalValue::from_kelem(&KElem::parse(field, s)?, v, DEFAULT_PREC)),
        (Place::Finite(_), Value::Number(n)) => {
            let k = n.as_i64().ok_or_else(bad)?;
            Ok(LocalValue::from_kelem(&KElem::from_int(field, k), v, DEFAULT_PREC))
        }
        (_, Value::Number(n)) => {
            let r = n.as_f64().ok_or_else(bad)?;
            Ok(arch(v, Complex64::new(r, 0.0)))
        }
        (_, Value::String(s)) => match KElem::parse(field, s) {
            Ok(k) => Ok(LocalValue::from_kelem(&k, v, DEFAULT_PREC)),
            Err(_) => Ok(arch(v, Complex64::new(parse_real(s)?, 0.0))),
        },
        (Place::Complex, Value::Object(o)) => {
            let part = |k: &str| -> Result<f64> {
                match o.get(k) {
                    None => Ok(0.0),
                    Some(Value::Number(n)) => n.as_f64().ok_or_else(bad),
                    Some(Value::String(s)) => parse_real(s),
                    Some(_) => Err(bad()),
                }
            };
            Ok(LocalValue::Complex(Complex64::new(part("re")?, part("im")?)))
        }
        _ => Err(bad()),
    }
}

fn arch(v: &Place, z: Complex64) -> LocalValue {
    match v {
        Place::Real => LocalValue::Real(z.re),
        _ => LocalValue::Complex(z),
    }
}

fn ball(v: &Place, b: &BallSpec, field: NumberField) -> Result<PlaceBall> {
    match v {
        Place::Real => match (b.interval, b.radius) {
            (Some([lo, hi]), None) if hi > lo => Ok(PlaceBall::interval(lo, hi)),
            (None, Some(r)) => {
                let c = match &b.center {
                    None => 0.0,
                    Some(Value::Number(n)) => n.as_f64().unwrap_or(0.0),
                    Some(Value::String(s)) => parse_real(s)?,
                    Some(_) => return Err(Error::invalid("real ball center must be a number")),
                };
                Ok(PlaceBall::Real {
                    center: vec![c],
                    radius: r,
                })
            }
            _ => Err(Error::invalid("a real ball needs an increasing \"interval\" or a \"radius\"")),
        },
        Place::Complex => {
            let r = b.radius.ok_or_else(|| Error::invalid("a complex ball needs a \"radius\""))?;
            let c = match &b.center {
                None => Complex64::new(0.0, 0.0),
                Some(x) => parse_local(x, v, field)?.as_complex().unwrap(),
            };
            Ok(PlaceBall::Complex {
                center: vec![c],
                radius: r,
            })
        }
        Place::Finite(fp) => {
            let c = match &b.center {
                None => field.zero(),
                Some(Value::String(s)) => KElem::parse(field, s)?,
                Some(Value::Number(n)) => KElem::from_int(field, n.as_i64().ok_or_else(|| Error::invalid("bad center"))?),
                Some(_) => return Err(Error::invalid("finite ball center must be a field element")),
            };
            Ok(PlaceBall::Finite {
                place: *fp,
                center: vec![c],
                k: b.k.unwrap_or(0),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert!((parse_real("sqrt2").unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((parse_real("-3/2*sqrt5").unwrap() + 1.5 * 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(parse_real("1/4").unwrap(), 0.25);
        assert!((parse_real("pi").unwrap() - std::f64::consts::PI).abs() < 1e-15);
        assert!(parse_real("sqrtx").is_err());
    }

    #[test]
    fn minimal_config() {
        let c = ExperimentConfig::from_json(
            r#"{"experiment":"dirichlet-solve","field":"Q","S":["inf"],"m":1,"n":1,
                "A":{"inf":"sqrt2"},"t":{"central":{"inf":4}}}"#,
        )
        .unwrap();
        let cfg = c.s_config().unwrap();
        let a = c.matrices(&cfg).unwrap();
        assert_eq!(a[0].get(0, 0), &LocalValue::Real(2f64.sqrt()));
        let t = c.ray_point(&cfg, 1, 1).unwrap();
        assert_eq!(t.delta(0, 0), 4.0);
    }

    #[test]
    fn schema_errors() {
        assert!(ExperimentConfig::from_json(r#"{"experiment":"nope","field":"Q","S":["inf"]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment":"di-scan","field":"Q","S":["inf"],"bogus":1}"#).is_err());
    }

    #[test]
    fn place_keys() {
        let c = ExperimentConfig::from_json(
            r#"{"experiment":"dirichlet-solve","field":"Q(i)","S":["inf",2,{"p":5,"pi":"2+i"}],"m":1,"n":1,
                "A":{"inf":{"re":"sqrt2","im":1},"2":"1/3","v5[2+i]":"1+i"}}"#,
        )
        .unwrap();
        let cfg = c.s_config().unwrap();
        let a = c.matrices(&cfg).unwrap();
        assert_eq!(a[0].get(0, 0).as_complex().unwrap(), Complex64::new(2f64.sqrt(), 1.0));
        assert_eq!(a[1].get(0, 0).abs_f64(), 1.0);
    }
}
