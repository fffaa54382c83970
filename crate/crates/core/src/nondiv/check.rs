use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constants::PropConstants;
use crate::dirichlet::RayPoint;
use crate::error::{Error, Result};
use crate::lattice::{covolume_submodule, delta_below, flow_lattice, PrimitiveSubmodule, SLatticeBasis};
use crate::measures::{binomial, sample_ball, MapSpec, MeasureSpec, SamplePoint};
use crate::s_adic::{LocalMatrix, SConfig};

/// Hypotheses and Monte Carlo budget of a nondivergence check on `K_S^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QNConfig {
    pub m: usize,
    pub c: f64,
    pub alpha: f64,
    pub n_x: f64,
    pub d: f64,
    /// `|D_K|`.
    pub d_k: u64,
    pub rho: f64,
    pub eps_grid: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    /// Samples used for the sup lower bound of the covolumes.
    pub sup_samples: usize,
    /// Height bound of the submodule family, echoed in reports.
    pub delta_height: f64,
    pub cap: u64,
}

impl QNConfig {
    pub fn eps_cap(&self) -> f64 {
        self.rho / (self.d_k as f64).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n_samples == 0 || self.eps_grid.is_empty() {
            return Err(Error::invalid("m, the sample count and the ε grid must be nonzero"));
        }
        if ![self.c, self.alpha, self.n_x, self.d, self.rho].iter().all(|x| *x > 0.0 && x.is_finite()) || self.d_k == 0 {
            return Err(Error::invalid("constants must be positive"));
        }
        for &e in &self.eps_grid {
            self.check_eps(e)?;
            if e == 0.0 {
                return Err(Error::invalid("grid levels must be positive"));
            }
        }
        Ok(())
    }

    fn check_eps(&self, eps: f64) -> Result<()> {
        if !(eps >= 0.0) || eps > self.eps_cap() * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "ε = {eps} must lie in [0, ρ/√|D_K|] = [0, {}]",
                self.eps_cap()
            )));
        }
        Ok(())
    }
}

/// `m C (N_X D²)^m (ε √|D_K| / ρ)^α μ(B)`.
pub fn qn_rhs(cfg: &QNConfig, eps: f64, mu_b: f64) -> Result<f64> {
    cfg.check_eps(eps)?;
    let m = cfg.m as f64;
    Ok(m * cfg.c
        * (cfg.n_x * cfg.d * cfg.d).powf(m)
        * (eps * (cfg.d_k as f64).sqrt() / cfg.rho).powf(cfg.alpha)
        * mu_b)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QNRow {
    pub epsilon: f64,
    pub lhs: f64,
    pub stderr: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Largest sampled covolume of one submodule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovolumeSup {
    pub rank: usize,
    pub basis: Vec<Vec<String>>,
    pub sup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NondivReport {
    pub config: QNConfig,
    pub rows: Vec<QNRow>,
    pub covolume_sups: Vec<CovolumeSup>,
    pub pass: bool,
}

/// Compares `μ({x ∈ B : δ(h(x) O_S^m) < ε})` with [`qn_rhs`] on the grid.
///
/// Before sampling the left side, every submodule of `deltas` must reach
/// covolume `ρ` somewhere on the first `sup_samples` samples; otherwise the
/// hypothesis is reported as [`Error::LowerBound`].
pub fn qn_empirical_check<H>(h: H, spec: &MeasureSpec, deltas: &[PrimitiveSubmodule], cfg: &QNConfig) -> Result<NondivReport>
where
    H: Fn(&SamplePoint) -> Result<SLatticeBasis> + Sync,
{
    cfg.validate()?;
    let xs = sample_ball(spec, cfg.n_samples, cfg.seed);
    let sub = &xs[..cfg.sup_samples.clamp(1, xs.len())];
    let lattices: Vec<SLatticeBasis> = sub.par_iter().map(&h).collect::<Result<_>>()?;
    let mut sups = Vec::with_capacity(deltas.len());
    for d in deltas {
        if d.dim() != cfg.m {
            return Err(Error::invalid("submodule dimension differs from m"));
        }
        let sup = lattices
            .par_iter()
            .map(|l| covolume_submodule(d, l))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let entry = CovolumeSup {
            rank: d.rank,
            basis: d.basis.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect(),
            sup,
        };
        if sup < cfg.rho * (1.0 - 1e-12) {
            return Err(Error::LowerBound(format!(
                "submodule {:?} of rank {} reaches covolume {sup} < ρ = {}",
                entry.basis, entry.rank, cfg.rho
            )));
        }
        sups.push(entry);
    }
    let theta = cfg.eps_grid.iter().copied().fold(0.0, f64::max);
    let deltas_below: Vec<Option<f64>> = xs
        .par_iter()
        .map(|x| Ok(delta_below(&h(x)?, theta, cfg.cap)?.map(|p| p.content)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(cfg.eps_grid.len());
    for &eps in &cfg.eps_grid {
        let k = deltas_below.iter().filter(|d| d.is_some_and(|c| c < eps)).count();
        let (lhs, stderr) = binomial(k, xs.len());
        let rhs = qn_rhs(cfg, eps, 1.0)?;
        rows.push(QNRow {
            epsilon: eps,
            lhs,
            stderr,
            rhs,
            pass: lhs - 3.0 * stderr <= rhs,
        });
    }
    Ok(NondivReport {
        config: cfg.clone(),
        pass: rows.iter().all(|r| r.pass),
        rows,
        covolume_sups: sups,
    })
}

/// `g_t τ(f(x)) O_S^{n+1}`, with `f(x)` read as a row at every place.
pub fn map_lattice(map: &MapSpec, cfg: &SConfig, t: &RayPoint, x: &SamplePoint) -> Result<SLatticeBasis> {
    if x.len() != cfg.len() || map.comps.len() != cfg.len() {
        return Err(Error::invalid("one ball component per place of S is required"));
    }
    let a: Vec<LocalMatrix> = (0..cfg.len())
        .map(|v| {
            let fx = map.eval(v, &x[v]);
            LocalMatrix::from_fn(1, fx.len(), |_, j| fx[j].clone())
        })
        .collect();
    flow_lattice(cfg, &a, t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiScanRow {
    pub t_index: usize,
    pub t_norm: f64,
    pub included: bool,
    pub fraction: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiScanReport {
    pub eps: f64,
    pub threshold: f64,
    pub bound: f64,
    pub t0: f64,
    pub rows: Vec<DiScanRow>,
    /// Every row with `‖t‖_∞ ≥ t0` passes.
    pub pass: bool,
}

/// Inputs of [`di_measure_scan`] besides the map and the measure.
#[derive(Clone, Debug)]
pub struct DiScanSetup<'a> {
    pub cfg: &'a SConfig,
    pub schedule: &'a [RayPoint],
    pub t0: f64,
    pub n: usize,
    pub seed: u64,
    pub cap: u64,
}

/// For each ray point `t`, the fraction of `x` with
/// `δ(g_t τ(f(x)) O_S^{n+1}) < (n+1)^{|S_r|/2+|S_c|} ε`, next to `C̃ ε^α`.
pub fn di_measure_scan(
    map: &MapSpec,
    spec: &MeasureSpec,
    eps: f64,
    consts: &PropConstants,
    setup: &DiScanSetup,
) -> Result<DiScanReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("ε = {eps} must lie in (0, 1)")));
    }
    if setup.schedule.is_empty() || setup.n == 0 {
        return Err(Error::invalid("empty schedule or sample budget"));
    }
    spec.check_places(setup.cfg)?;
    let dim = map.n() + 1;
    if setup.schedule.iter().any(|t| t.m() != 1 || t.n() != map.n()) {
        return Err(Error::invalid("ray points must have shape (1, n)"));
    }
    let threshold = (dim as f64).powf(setup.cfg.threshold_exponent()) * eps;
    let bound = consts.c_tilde * eps.powf(consts.alpha);
    let xs = sample_ball(spec, setup.n, setup.seed);
    let mut rows = Vec::with_capacity(setup.schedule.len());
    for (t_index, t) in setup.schedule.iter().enumerate() {
        let below = xs
            .par_iter()
            .map(|x| {
                let l = map_lattice(map, setup.cfg, t, x)?;
                Ok(delta_below(&l, threshold, setup.cap)?.is_some_and(|p| p.content < threshold))
            })
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .filter(|b| *b)
            .count();
        let (fraction, stderr) = binomial(below, xs.len());
        rows.push(DiScanRow {
            t_index,
            t_norm: t.sup_norm(),
            included: t.sup_norm() >= setup.t0,
            fraction,
            stderr,
            bound,
            pass: fraction <= bound + 3.0 * stderr,
        });
    }
    if !rows.iter().any(|r| r.included) {
        return Err(Error::invalid(format!("no ray point reaches the horizon t0 = {}", setup.t0)));
    }
    Ok(DiScanReport {
        eps,
        threshold,
        bound,
        t0: setup.t0,
        pass: rows.iter().filter(|r| r.included).all(|r| r.pass),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::central_ray_point;
    use crate::lattice::enumerate_primitive_submodules;
    use crate::measures::PlaceBall;
    use crate::number_field::NumberField;

    fn cfg(eps: Vec<f64>) -> QNConfig {
        QNConfig {
            m: 2,
            c: 2.0,
            alpha: 1.0,
            n_x: 1.0,
            d: 4.0,
            d_k: 1,
            rho: 1.0,
            eps_grid: eps,
            n_samples: 200,
            seed: 1,
            sup_samples: 50,
            delta_height: 1.0,
            cap: 100_000,
        }
    }

    #[test]
    fn rhs_examples() {
        let c = cfg(vec![0.1]);
        assert!((qn_rhs(&c, 0.1, 1.0).unwrap() - 102.4).abs() < 1e-9);
        assert_eq!(qn_rhs(&c, 0.0, 1.0).unwrap(), 0.0);
        assert!((qn_rhs(&c, 1.0, 1.0).unwrap() - 1024.0).abs() < 1e-9);
        assert!(qn_rhs(&c, 1.5, 1.0).is_err());
    }

    #[test]
    fn rhs_is_monotone() {
        let base = cfg(vec![0.1]);
        let r0 = qn_rhs(&base, 0.1, 1.0).unwrap();
        let mut c = base.clone();
        c.c = 3.0;
        assert!(qn_rhs(&c, 0.1, 1.0).unwrap() > r0);
        let mut c = base.clone();
        c.rho = 0.5;
        assert!(qn_rhs(&c, 0.1, 1.0).unwrap() > r0);
        assert!(qn_rhs(&base, 0.2, 1.0).unwrap() > r0);
    }

    #[test]
    fn identity_lattice_never_short() {
        let s = SConfig::with_primes(NumberField::rationals(), &[]).unwrap();
        let spec = MeasureSpec::new(vec![PlaceBall::interval(0.0, 1.0)]).unwrap();
        let deltas = enumerate_primitive_submodules(&s, 2, 1, 1.0, 1000).unwrap();
        let h = |_: &SamplePoint| Ok(SLatticeBasis::identity(&s, 2));
        let r = qn_empirical_check(h, &spec, &deltas, &cfg(vec![0.25, 0.5, 0.9])).unwrap();
        assert!(r.pass);
        assert!(r.rows.iter().all(|x| x.lhs == 0.0));
        assert!(qn_empirical_check(h, &spec, &deltas, &cfg(vec![1.5])).is_err());
    }

    #[test]
    fn lower_bound_failure_is_reported() {
        let s = SConfig::with_primes(NumberField::rationals(), &[]).unwrap();
        let spec = MeasureSpec::new(vec![PlaceBall::interval(0.0, 1.0)]).unwrap();
        let deltas = enumerate_primitive_submodules(&s, 2, 1, 1.0, 1000).unwrap();
        let t = central_ray_point(&s, 1, 1, &[8.0], None).unwrap();
        let zero = LocalMatrix::from_fn(1, 1, |_, _| crate::s_adic::LocalValue::Real(0.0));
        let h = |_: &SamplePoint| flow_lattice(&s, &[zero.clone()], &t);
        let e = qn_empirical_check(h, &spec, &deltas, &cfg(vec![0.1])).unwrap_err();
        assert!(matches!(e, Error::LowerBound(_)));
    }

    #[test]
    fn scan_rejects_bad_eps_and_marks_horizon() {
        let s = SConfig::with_primes(NumberField::rationals(), &[]).unwrap();
        let spec = MeasureSpec::new(vec![PlaceBall::interval(0.0, 1.0)]).unwrap();
        let map = MapSpec::veronese(&spec, 2).unwrap();
        let schedule: Vec<RayPoint> = [2.0, 4.0]
            .iter()
            .map(|d| central_ray_point(&s, 1, 2, &[*d], None).unwrap())
            .collect();
        let consts = PropConstants {
            rho_v: vec![0.1],
            rho_tilde: 0.1,
            rho: 0.1,
            c_tilde: 10.0,
            eps0: 0.001,
            alpha: 0.5,
        };
        let setup = DiScanSetup {
            cfg: &s,
            schedule: &schedule,
            t0: 3.0,
            n: 100,
            seed: 2,
            cap: 100_000,
        };
        assert!(di_measure_scan(&map, &spec, 1.0, &consts, &setup).is_err());
        let r = di_measure_scan(&map, &spec, 0.2, &consts, &setup).unwrap();
        assert!(!r.rows[0].included && r.rows[1].included);
        assert!((r.threshold - 3f64.sqrt() * 0.2).abs() < 1e-12);
    }
}
