use rayon::prelude::*;

use super::basis::{flow_lattice, SLatticeBasis};
use crate::dirichlet::{is_improvable_at, DirichletInstance, DirichletSolution};
use crate::error::{Error, Result};
use crate::number_field::{KElem, Place};
use crate::s_adic::{
    content, enumerate_box, s_integers_near, LocalBound, LocalValue, SBox, SConfig,
};

/// A lattice point found by the content-ball search.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint {
    pub z: Vec<KElem>,
    pub image: Vec<Vec<LocalValue>>,
    pub content: f64,
}

/// How the region of a content-ball search was built.
#[derive(Clone, Debug, PartialEq)]
pub enum SearchMode {
    /// `q` ranges over a box and each row of `p` is rounded near `A q`.
    Structured,
    /// `z` ranges over a box obtained from `g^{-1}`.
    Generic,
}

/// The region searched for points of content below `theta`. Every class of
/// such points modulo `O_S^×` has a representative in it.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchRegion {
    pub theta: f64,
    pub mode: SearchMode,
    /// The coordinate box enumerated (the `q` block in structured mode).
    pub bounds: SBox,
}

/// Bounds on `z` for the generic search: at a finite place every point can be
/// rescaled by an S-unit to have `max_k |w_k|_v = 1`, so `|z_k|_v` is at most
/// `max_l |(g^{-1})_{kl}|_v`; at the archimedean place Cauchy–Schwarz gives
/// `|z_k|_v < θ·‖row_k(g^{-1})‖`.
fn generic_region(l: &SLatticeBasis, theta: f64) -> Result<SBox> {
    let dim = l.dim();
    let mut bounds = Vec::with_capacity(l.cfg().len());
    for (v, g) in l.cfg().places().iter().zip(l.matrices()) {
        let gi = g.inverse()?;
        let mut row_b = Vec::with_capacity(dim);
        for k in 0..dim {
            let row: Vec<f64> = (0..dim).map(|j| gi.get(k, j).abs_f64()).collect();
            row_b.push(match v {
                Place::Real => LocalBound::Arch(theta * row.iter().map(|x| x * x).sum::<f64>().sqrt()),
                Place::Complex => LocalBound::Arch(theta * row.iter().sum::<f64>()),
                Place::Finite(_) => LocalBound::from_abs(row.iter().copied().fold(0.0, f64::max), v)?,
            });
        }
        bounds.push(row_b);
    }
    Ok(SBox { bounds })
}

fn arch_index(cfg: &SConfig) -> usize {
    cfg.places().iter().position(|v| v.is_archimedean()).unwrap()
}

fn row_bounds(l: &SLatticeBasis, theta: f64, row: usize) -> Result<Vec<LocalBound>> {
    let flow = l.flow().unwrap();
    let cfg = l.cfg();
    let ai = arch_index(cfg);
    cfg.places()
        .iter()
        .enumerate()
        .map(|(vi, v)| {
            let t = flow.t.eps(vi, row);
            if vi == ai {
                Ok(LocalBound::Arch(theta * t))
            } else {
                LocalBound::from_abs(t, v)
            }
        })
        .collect()
}

fn q_box(l: &SLatticeBasis, theta: f64) -> Result<SBox> {
    let flow = l.flow().unwrap();
    let cfg = l.cfg();
    let ai = arch_index(cfg);
    let bounds = cfg
        .places()
        .iter()
        .enumerate()
        .map(|(vi, v)| {
            (0..flow.t.n())
                .map(|j| {
                    let t = flow.t.delta(vi, j);
                    if vi == ai {
                        Ok(LocalBound::Arch(theta * t))
                    } else {
                        LocalBound::from_abs(t, v)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SBox { bounds })
}

/// The search region [`lattice_points_in_content_ball`] uses for `theta`.
pub fn search_region(l: &SLatticeBasis, theta: f64) -> Result<SearchRegion> {
    Ok(match l.flow() {
        Some(_) => SearchRegion {
            theta,
            mode: SearchMode::Structured,
            bounds: q_box(l, theta)?,
        },
        None => SearchRegion {
            theta,
            mode: SearchMode::Generic,
            bounds: generic_region(l, theta)?,
        },
    })
}

fn structured_points(l: &SLatticeBasis, theta: f64, cap: u64) -> Result<Vec<LatticePoint>> {
    let flow = l.flow().unwrap();
    let cfg = l.cfg();
    let (m, n) = (flow.t.m(), flow.t.n());
    let qs = enumerate_box(cfg, n, &q_box(l, theta)?, cap)?;
    let row_bounds: Vec<Vec<LocalBound>> = (0..m)
        .map(|i| row_bounds(l, theta, i))
        .collect::<Result<_>>()?;
    let per_q: Vec<Vec<LatticePoint>> = qs
        .par_iter()
        .map(|q| -> Result<Vec<LatticePoint>> {
            let aq: Vec<Vec<LocalValue>> = cfg
                .places()
                .iter()
                .zip(&flow.a)
                .map(|(v, a)| {
                    let qv: Vec<LocalValue> =
                        q.iter().map(|c| LocalValue::from_kelem(c, v, crate::s_adic::DEFAULT_PREC)).collect();
                    a.mul_vec(&qv)
                })
                .collect();
            let mut rows: Vec<Vec<KElem>> = Vec::with_capacity(m);
            for (i, rb) in row_bounds.iter().enumerate() {
                let targets: Vec<LocalValue> = aq.iter().map(|r| r[i].clone()).collect();
                let cands = s_integers_near(cfg, &targets, rb, cap)?;
                if cands.is_empty() {
                    return Ok(Vec::new());
                }
                rows.push(cands);
            }
            let mut out = Vec::new();
            let mut idx = vec![0usize; m];
            loop {
                let mut z: Vec<KElem> = (0..m).map(|i| -&rows[i][idx[i]]).collect();
                z.extend(q.iter().cloned());
                if z.iter().any(|c| !c.is_zero()) {
                    let image = l.apply(&z);
                    let c = content(&image);
                    if c < theta {
                        out.push(LatticePoint { z, image, content: c });
                    }
                }
                let mut k = 0;
                loop {
                    if k == m {
                        return Ok(out);
                    }
                    idx[k] += 1;
                    if idx[k] < rows[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(per_q.into_iter().flatten().collect())
}

fn generic_points(l: &SLatticeBasis, theta: f64, cap: u64) -> Result<Vec<LatticePoint>> {
    let bx = generic_region(l, theta)?;
    let zs = enumerate_box(l.cfg(), l.dim(), &bx, cap)?;
    Ok(zs
        .into_par_iter()
        .filter(|z| z.iter().any(|c| !c.is_zero()))
        .filter_map(|z| {
            let image = l.apply(&z);
            let c = content(&image);
            (c < theta).then_some(LatticePoint { z, image, content: c })
        })
        .collect())
}

fn sort_points(pts: &mut [LatticePoint]) {
    pts.sort_by(|a, b| a.content.total_cmp(&b.content).then_with(|| a.z.cmp(&b.z)));
}

/// Nonzero `z ∈ O_S^N` with `c(L z) < theta`, sorted by content. The
/// search is complete up to multiplication by S-units: every point of
/// content below `theta` is an S-unit multiple of a listed one.
pub fn lattice_points_in_content_ball(l: &SLatticeBasis, theta: f64, cap: u64) -> Result<Vec<LatticePoint>> {
    if !(theta > 0.0) {
        return Ok(Vec::new());
    }
    let mut pts = if l.flow().is_some() {
        structured_points(l, theta, cap)?
    } else {
        generic_points(l, theta, cap)?
    };
    sort_points(&mut pts);
    Ok(pts)
}

/// Same as [`lattice_points_in_content_ball`] but always through the
/// generic `g^{-1}` box; used to cross-check the structured search.
pub fn lattice_points_generic(l: &SLatticeBasis, theta: f64, cap: u64) -> Result<Vec<LatticePoint>> {
    if !(theta > 0.0) {
        return Ok(Vec::new());
    }
    let mut pts = generic_points(l, theta, cap)?;
    sort_points(&mut pts);
    Ok(pts)
}

/// `δ(Λ)` together with a minimizer and the searched region.
#[derive(Clone, Debug)]
pub struct DeltaResult {
    pub delta: f64,
    pub argmin: Vec<KElem>,
    pub region: SearchRegion,
}

/// `δ(Λ) = min{c(x) : x ∈ Λ ∖ {0}}`.
///
/// The region radius defaults to the smallest content of a basis vector
/// (and, for lattices `g_{ε,δ} g_A O_S^{m+n}`, to the bound
/// `(m+n)^{|S_r|/2+|S_c|}` on the shortest point), so the minimum over the
/// region is the true minimum.
pub fn delta_lattice(l: &SLatticeBasis, theta: Option<f64>, cap: u64) -> Result<DeltaResult> {
    let dim = l.dim();
    let field = l.cfg().field();
    let theta = match theta {
        Some(t) => t,
        None => {
            let mut best = f64::INFINITY;
            for k in 0..dim {
                let mut e = vec![field.zero(); dim];
                e[k] = field.one();
                best = best.min(l.point_content(&e));
            }
            if l.flow().is_some() {
                best = best.min((dim as f64).powf(l.cfg().threshold_exponent()));
            }
            best * (1.0 + 1e-9)
        }
    };
    let region = search_region(l, theta)?;
    let pts = lattice_points_in_content_ball(l, theta, cap)?;
    let p = pts.into_iter().next().ok_or_else(|| {
        Error::invalid(format!("no lattice point of content below {theta} in the search region"))
    })?;
    Ok(DeltaResult {
        delta: p.content,
        argmin: p.z,
        region,
    })
}

/// The shortest point of content below `theta`, if any.
pub fn delta_below(l: &SLatticeBasis, theta: f64, cap: u64) -> Result<Option<LatticePoint>> {
    Ok(lattice_points_in_content_ball(l, theta, cap)?.into_iter().next())
}

/// Outcome of [`check_correspondence`].
#[derive(Clone, Debug)]
pub struct CorrespondenceReport {
    pub eps: f64,
    pub threshold: f64,
    pub witness: Option<DirichletSolution>,
    /// The lattice point `(ε^{-1}(A x - y), δ^{-1} x)` built from the witness.
    pub point: Option<LatticePoint>,
    /// False only when a witness exists and its lattice point is not below
    /// the threshold.
    pub holds: bool,
}

/// For an `eps`-improvable instance, checks that the lattice
/// `g_{ε,δ} g_A O_S^{m+n}` has a point of content below
/// `(m+n)^{|S_r|/2+|S_c|}·eps`.
pub fn check_correspondence(inst: &DirichletInstance, eps: f64, cap: u64) -> Result<CorrespondenceReport> {
    let cfg = &inst.cfg;
    let dim = inst.m() + inst.n();
    let threshold = (dim as f64).powf(cfg.threshold_exponent()) * eps;
    let witness = is_improvable_at(inst, eps, cap)?;
    let Some(sol) = witness else {
        return Ok(CorrespondenceReport {
            eps,
            threshold,
            witness: None,
            point: None,
            holds: true,
        });
    };
    let l = flow_lattice(cfg, &inst.a, &inst.t)?;
    let mut z: Vec<KElem> = sol.y.iter().map(|y| -y).collect();
    z.extend(sol.x.iter().cloned());
    let image = l.apply(&z);
    let c = content(&image);
    Ok(CorrespondenceReport {
        eps,
        threshold,
        witness: Some(sol),
        point: Some(LatticePoint { z, image, content: c }),
        holds: c < threshold,
    })
}
