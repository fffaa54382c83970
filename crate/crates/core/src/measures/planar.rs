use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::spec::{prime_element, residue_reps, sample_ball, MapSpec, MeasureSpec, PlaceBall, SamplePoint};
use crate::error::{Error, Result};
use crate::number_field::{FinitePlace, KElem};
use crate::s_adic::{LocalValue, PadicApprox, DEFAULT_PREC};

/// Relative singular-value cutoff of the archimedean rank test.
pub const TAU_RANK: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct NonplanarReport {
    pub nonplanar: bool,
    pub rank: usize,
    /// Normalized singular values (archimedean) or pivot absolute values
    /// (finite), in decreasing order of appearance.
    pub evidence: Vec<f64>,
}

fn rows(map: &MapSpec, comp: usize, samples: &[SamplePoint]) -> Vec<Vec<LocalValue>> {
    samples
        .iter()
        .map(|x| {
            let v = x[comp][0].clone();
            let one = match &v {
                LocalValue::Real(_) => LocalValue::Real(1.0),
                LocalValue::Complex(_) => LocalValue::Complex(Complex64::new(1.0, 0.0)),
                LocalValue::Padic(p) => LocalValue::Padic(PadicApprox::one(*p.place(), DEFAULT_PREC)),
            };
            let mut row = vec![one];
            row.extend(map.eval(comp, &x[comp]));
            row
        })
        .collect()
}

fn arch_rank<T>(m: DMatrix<T>) -> (usize, Vec<f64>)
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let mut m = m;
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    let sv = m.singular_values();
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let top = s.first().copied().unwrap_or(0.0);
    let s: Vec<f64> = s.iter().map(|x| if top > 0.0 { x / top } else { 0.0 }).collect();
    (s.iter().filter(|x| **x > TAU_RANK).count(), s)
}

fn padic_rank(mut m: Vec<Vec<LocalValue>>) -> Result<(usize, Vec<f64>)> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut pivots = Vec::new();
    for j in 0..cols {
        let Some(pi) = (rank..m.len())
            .filter(|&i| !m[i][j].is_zero())
            .max_by(|&a, &b| m[a][j].abs_f64().total_cmp(&m[b][j].abs_f64()))
        else {
            continue;
        };
        m.swap(rank, pi);
        let piv = m[rank][j].clone();
        pivots.push(piv.abs_f64());
        for i in rank + 1..m.len() {
            if m[i][j].is_zero() {
                continue;
            }
            let f = m[i][j].div(&piv)?;
            for k in j..cols {
                let t = &f * &m[rank][k];
                m[i][k] = &m[i][k] - &t;
            }
        }
        rank += 1;
    }
    Ok((rank, pivots))
}

/// Decides whether the sampled image of `f` on component `comp` spans an
/// affine space of full dimension: the rows `(1, f(x_s))` must have rank `n + 1`.
pub fn check_nonplanar(map: &MapSpec, comp: usize, samples: &[SamplePoint]) -> Result<NonplanarReport> {
    let n = map.n();
    if samples.len() < n + 1 {
        return Err(Error::invalid(format!("need at least {} samples", n + 1)));
    }
    let rs = rows(map, comp, samples);
    let (rank, evidence) = match &rs[0][0] {
        LocalValue::Real(_) => arch_rank(DMatrix::from_fn(rs.len(), n + 1, |i, j| {
            rs[i][j].as_complex().unwrap().re
        })),
        LocalValue::Complex(_) => arch_rank(DMatrix::from_fn(rs.len(), n + 1, |i, j| rs[i][j].as_complex().unwrap())),
        LocalValue::Padic(_) => padic_rank(rs)?,
    };
    Ok(NonplanarReport {
        nonplanar: rank == n + 1,
        rank,
        evidence,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RhoEstimate {
    /// Minimum over the coefficient net of the sample sup.
    pub raw: f64,
    /// `raw` minus the net discretization error: a lower bound for `ρ_v`.
    pub lower: f64,
    pub net_size: usize,
    pub samples: usize,
}

/// Integer points of `{-k/2, …, k/2}^dim` on the boundary of the cube, one
/// per pair `±a`.
fn cube_surface(dim: usize, k: i64) -> Vec<Vec<i64>> {
    let half = k / 2;
    let mut out = Vec::new();
    let mut cur = vec![-half; dim];
    loop {
        if cur.iter().any(|c| c.abs() == half) && cur.iter().find(|c| **c != 0).is_some_and(|c| *c > 0) {
            out.push(cur.clone());
        }
        let mut i = 0;
        while i < dim {
            if cur[i] < half {
                cur[i] += 1;
                break;
            }
            cur[i] = -half;
            i += 1;
        }
        if i == dim {
            return out;
        }
    }
}

/// Lower estimate of `ρ_v = inf_{‖a‖_{v,2} = 1} sup_{x ∈ B} |a_0 + Σ a_i f_i(x)|_v`
/// on component `comp`.
///
/// At archimedean places `net` is the number of steps per cube edge of the
/// coefficient grid (rounded up to even); at finite places it is the number
/// of `ϖ`-adic digits of the residue-class net.
pub fn estimate_rho_v(map: &MapSpec, comp: usize, spec: &MeasureSpec, samples: usize, net: u32, seed: u64) -> Result<RhoEstimate> {
    let ball = spec
        .balls
        .get(comp)
        .ok_or_else(|| Error::invalid("component out of range"))?;
    if ball.dim() != 1 {
        return Err(Error::invalid("coefficient nets need a one-dimensional ball"));
    }
    let xs = sample_ball(spec, samples, seed);
    let np = check_nonplanar(map, comp, &xs)?;
    if !np.nonplanar {
        return Err(Error::invalid(format!("map is not nonplanar on the ball (rank {})", np.rank)));
    }
    let rs = rows(map, comp, &xs);
    let dim = map.n() + 1;
    let sup_f: Vec<f64> = map.comps[comp].iter().map(|p| p.sup_bound(ball)).collect();
    match ball {
        PlaceBall::Real { .. } | PlaceBall::Complex { .. } => {
            let complex = matches!(ball, PlaceBall::Complex { .. });
            let f: Vec<Vec<Complex64>> = rs.iter().map(|r| r.iter().map(|v| v.as_complex().unwrap()).collect()).collect();
            let moduli: Vec<f64> = sup_f.iter().map(|s| if complex { s.sqrt() } else { *s }).collect();
            let m = (1.0 + moduli.iter().map(|s| s * s).sum::<f64>()).sqrt();
            let k = (net.max(2) as i64 + 1) / 2 * 2;
            let h = 2.0 / k as f64;
            let real_dim = if complex { 2 * dim } else { dim };
            let grid = cube_surface(real_dim, k);
            let raw = grid
                .par_iter()
                .map(|g| {
                    let u: Vec<f64> = g.iter().map(|c| *c as f64 * h).collect();
                    let s = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let a: Vec<Complex64> = if complex {
                        u.chunks(2).map(|c| Complex64::new(c[0] / s, c[1] / s)).collect()
                    } else {
                        u.iter().map(|x| Complex64::new(x / s, 0.0)).collect()
                    };
                    f.iter()
                        .map(|row| row.iter().zip(&a).map(|(x, y)| x * y).sum::<Complex64>().norm())
                        .fold(0.0, f64::max)
                })
                .reduce(|| f64::INFINITY, f64::min);
            let eta = h / 2.0 * ((real_dim - 1) as f64).sqrt();
            let lower = (raw - eta * m).max(0.0);
            let (raw, lower) = if complex { (raw * raw, lower * lower) } else { (raw, lower) };
            Ok(RhoEstimate {
                raw,
                lower,
                net_size: grid.len(),
                samples,
            })
        }
        PlaceBall::Finite { place, .. } => {
            let m = sup_f.iter().copied().fold(1.0, f64::max);
            let classes = residue_classes(place, net.max(1), dim);
            let slack = (place.q() as f64).powi(-(net.max(1) as i32)) * m;
            let vals: Vec<(f64, f64)> = classes
                .par_iter()
                .map(|a| {
                    let a: Vec<LocalValue> = a
                        .iter()
                        .map(|x| LocalValue::Padic(PadicApprox::from_kelem(x, *place, DEFAULT_PREC)))
                        .collect();
                    let sup = rs
                        .iter()
                        .map(|row| {
                            let mut acc = LocalValue::zero(&crate::number_field::Place::Finite(*place));
                            for (x, y) in row.iter().zip(&a) {
                                acc = &acc + &(x * y);
                            }
                            acc.abs_f64()
                        })
                        .fold(0.0, f64::max);
                    (sup, if sup > slack { sup } else { 0.0 })
                })
                .collect();
            Ok(RhoEstimate {
                raw: vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min),
                lower: vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min),
                net_size: classes.len(),
                samples,
            })
        }
    }
}

/// Representatives `Σ_{i<k} d_i ϖ^i` of `(O_v/ϖ^k)^dim` with at least one
/// unit coordinate.
fn residue_classes(place: &FinitePlace, k: u32, dim: usize) -> Vec<Vec<KElem>> {
    let digits = residue_reps(place);
    let pi = prime_element(place);
    let mut reps = vec![place.field().zero()];
    let mut pow = place.field().one();
    for _ in 0..k {
        reps = reps
            .iter()
            .flat_map(|r| digits.iter().map(|d| r + &(&pow * d)).collect::<Vec<_>>())
            .collect();
        pow = &pow * &pi;
    }
    let mut out: Vec<Vec<KElem>> = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .iter()
            .flat_map(|pre| {
                reps.iter().map(|r| {
                    let mut v = pre.clone();
                    v.push(r.clone());
                    v
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|x| place.valuation(x) == Some(0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::spec::Polynomial;
    use crate::number_field::{places_over, NumberField};

    fn interval() -> MeasureSpec {
        MeasureSpec::new(vec![PlaceBall::interval(-1.0, 1.0)]).unwrap()
    }

    fn z2() -> MeasureSpec {
        let v = *places_over(NumberField::rationals(), 2).unwrap()[0].finite().unwrap();
        MeasureSpec::new(vec![PlaceBall::integers(v)]).unwrap()
    }

    #[test]
    fn veronese_is_nonplanar() {
        for spec in [interval(), z2()] {
            let f = MapSpec::veronese(&spec, 3).unwrap();
            let xs = sample_ball(&spec, 50, 1);
            let r = check_nonplanar(&f, 0, &xs).unwrap();
            assert!(r.nonplanar, "{r:?}");
        }
    }

    #[test]
    fn planted_dependency_is_planar() {
        for spec in [interval(), z2()] {
            let v = spec.balls[0].place();
            let c = |x: i64| LocalValue::from_kelem(&KElem::from_int(NumberField::rationals(), x), &v, DEFAULT_PREC);
            let f1 = Polynomial::monomial(c(1), 1, 0, 1);
            let mut f2 = Polynomial::monomial(c(2), 1, 0, 1);
            f2.terms.push((c(3), vec![0]));
            let f = MapSpec::new(vec![vec![f1, f2]]).unwrap();
            let xs = sample_ball(&spec, 30, 2);
            let r = check_nonplanar(&f, 0, &xs).unwrap();
            assert!(!r.nonplanar);
            assert_eq!(r.rank, 2);
            let k = MapSpec::new(vec![vec![Polynomial::monomial(c(5), 1, 0, 0)]]).unwrap();
            assert!(!check_nonplanar(&k, 0, &xs).unwrap().nonplanar);
        }
    }

    #[test]
    fn rho_of_identity_on_interval() {
        let spec = interval();
        let f = MapSpec::veronese(&spec, 1).unwrap();
        let r = estimate_rho_v(&f, 0, &spec, 2000, 200, 3).unwrap();
        assert!((r.raw - 1.0).abs() < 0.01, "{r:?}");
        assert!(r.lower <= r.raw && r.lower > 0.9);
    }

    #[test]
    fn rho_refinement_is_monotone() {
        let spec = interval();
        let f = MapSpec::veronese(&spec, 2).unwrap();
        let a = estimate_rho_v(&f, 0, &spec, 500, 10, 3).unwrap();
        let b = estimate_rho_v(&f, 0, &spec, 500, 20, 3).unwrap();
        assert!(b.raw <= a.raw);
        let spec = z2();
        let f = MapSpec::veronese(&spec, 1).unwrap();
        let a = estimate_rho_v(&f, 0, &spec, 200, 1, 3).unwrap();
        let b = estimate_rho_v(&f, 0, &spec, 200, 2, 3).unwrap();
        assert!(b.raw <= a.raw);
    }

    #[test]
    fn two_adic_identity_rho() {
        // a_0 + a_1 x on Z_2 with max |a_i| = 1 reaches 1 at x = 0 or x = 1
        let spec = z2();
        let f = MapSpec::veronese(&spec, 1).unwrap();
        let r = estimate_rho_v(&f, 0, &spec, 200, 3, 5).unwrap();
        assert_eq!(r.raw, 1.0);
        assert_eq!(r.lower, 1.0);
    }
}
