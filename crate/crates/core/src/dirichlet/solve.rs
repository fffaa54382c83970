use rayon::prelude::*;

use super::ray::RayPoint;
use crate::error::{Error, Result};
use crate::number_field::{KElem, Place};
use crate::s_adic::{
    exact_within, finite_coset, local_norm, nearest_s_integer, LocalBound, LocalMatrix, LocalValue,
    SConfig, DEFAULT_PREC,
};

/// The data of a Dirichlet system: an `m × n` matrix over each completion and
/// a ray point fixing the bounds.
#[derive(Clone, Debug)]
pub struct DirichletInstance {
    pub cfg: SConfig,
    /// One `m × n` matrix per place of `S`.
    pub a: Vec<LocalMatrix>,
    pub t: RayPoint,
}

/// A nonzero `x ∈ O_S^n` and `y ∈ O_S^m` meeting the bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletSolution {
    pub x: Vec<KElem>,
    pub y: Vec<KElem>,
    /// `|A_v^{(i)} x - y_i|_v`, indexed `[place][row]`.
    pub row_residuals: Vec<Vec<f64>>,
    /// `|x_j|_v`, indexed `[place][column]`.
    pub col_norms: Vec<Vec<f64>>,
    /// `Π_v max_i |A_v^{(i)} x - y_i|_v`.
    pub residual_content: f64,
    /// `A_v x - y` per place, the raw material for lattice points.
    pub residual_vectors: Vec<Vec<LocalValue>>,
}

impl DirichletInstance {
    pub fn new(cfg: SConfig, a: Vec<LocalMatrix>, t: RayPoint) -> Result<Self> {
        if a.len() != cfg.len() {
            return Err(Error::invalid("one matrix per place of S is required"));
        }
        if a.iter().any(|m| m.rows != t.m() || m.cols != t.n()) {
            return Err(Error::invalid("matrix dimensions do not match the ray point"));
        }
        Ok(DirichletInstance { cfg, a, t })
    }

    /// The same exact matrix over `K` at every place.
    pub fn from_exact(cfg: SConfig, rows: &[Vec<KElem>], t: RayPoint) -> Result<Self> {
        let a = exact_matrices(&cfg, rows);
        Self::new(cfg, a, t)
    }

    pub fn m(&self) -> usize {
        self.t.m()
    }

    pub fn n(&self) -> usize {
        self.t.n()
    }

    /// `A_v x` per place for an exact `x`.
    pub fn apply(&self, x: &[KElem]) -> Vec<Vec<LocalValue>> {
        self.cfg
            .places()
            .iter()
            .zip(&self.a)
            .map(|(v, a)| {
                let xv: Vec<LocalValue> = x.iter().map(|c| LocalValue::from_kelem(c, v, DEFAULT_PREC)).collect();
                a.mul_vec(&xv)
            })
            .collect()
    }
}

/// Diagonal embedding of an exact `m × n` matrix over `K`.
pub fn exact_matrices(cfg: &SConfig, rows: &[Vec<KElem>]) -> Vec<LocalMatrix> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    cfg.places()
        .iter()
        .map(|v| LocalMatrix::from_fn(m, n, |i, j| LocalValue::from_kelem(&rows[i][j], v, DEFAULT_PREC)))
        .collect()
}

fn evaluate(
    inst: &DirichletInstance,
    x: &[KElem],
    row_bounds: &[Vec<LocalBound>],
    cap: u64,
) -> Result<Option<DirichletSolution>> {
    let cfg = &inst.cfg;
    let ax = inst.apply(x);
    let mut y = Vec::with_capacity(inst.m());
    for i in 0..inst.m() {
        let targets: Vec<LocalValue> = ax.iter().map(|r| r[i].clone()).collect();
        let bounds: Vec<LocalBound> = row_bounds.iter().map(|b| b[i]).collect();
        match nearest_s_integer(cfg, &targets, &bounds, cap)? {
            Some(yi) => y.push(yi),
            None => return Ok(None),
        }
    }
    Ok(Some(solution_from(inst, x.to_vec(), y, ax)))
}

fn solution_from(inst: &DirichletInstance, x: Vec<KElem>, y: Vec<KElem>, ax: Vec<Vec<LocalValue>>) -> DirichletSolution {
    let places = inst.cfg.places();
    let residual_vectors: Vec<Vec<LocalValue>> = places
        .iter()
        .zip(&ax)
        .map(|(v, r)| {
            r.iter()
                .zip(&y)
                .map(|(a, yi)| a - &LocalValue::from_kelem(yi, v, DEFAULT_PREC))
                .collect()
        })
        .collect();
    let row_residuals: Vec<Vec<f64>> = residual_vectors
        .iter()
        .map(|r| r.iter().map(|z| z.abs_f64()).collect())
        .collect();
    let col_norms = places
        .iter()
        .map(|v| x.iter().map(|c| crate::number_field::abs_value(c, v).to_f64()).collect())
        .collect();
    let residual_content = row_residuals
        .iter()
        .map(|r| r.iter().copied().fold(0.0, f64::max))
        .product();
    DirichletSolution {
        x,
        y,
        row_residuals,
        col_norms,
        residual_content,
        residual_vectors,
    }
}

fn verify(inst: &DirichletInstance, sol: &DirichletSolution, rows: &[Vec<LocalBound>], cols: &[Vec<LocalBound>]) -> Result<()> {
    if sol.x.iter().all(|c| c.is_zero()) {
        return Err(Error::Falsified("witness has x = 0".into()));
    }
    for (vi, v) in inst.cfg.places().iter().enumerate() {
        for (j, xj) in sol.x.iter().enumerate() {
            if !exact_within(xj, v, &cols[vi][j]) {
                return Err(Error::Falsified(format!("x_{j} = {xj} breaks its bound at {v}")));
            }
        }
        for (i, r) in sol.residual_vectors[vi].iter().enumerate() {
            if !r.within(&rows[vi][i])? {
                return Err(Error::Falsified(format!("row {i} residual breaks its bound at {v}")));
            }
        }
    }
    Ok(())
}

/// The `x ∈ O_S^n` that can belong to a solution: the integer points of
/// the lattice `{(x, y)}` cut out by the finite conditions, lying in the
/// product of the archimedean bounds. The lattice is LLL-reduced and
/// enumerated with Fincke–Pohst, so the cost tracks the number of
/// solutions rather than the size of the `x`-box.
fn lattice_candidates(
    inst: &DirichletInstance,
    rows: &[Vec<LocalBound>],
    cols: &[Vec<LocalBound>],
    cap: u64,
) -> Result<Vec<Vec<KElem>>> {
    let cfg = &inst.cfg;
    let k = cfg.field();
    let (m, n) = (inst.m(), inst.n());
    let places = cfg.places();
    let arch = places
        .iter()
        .position(Place::is_archimedean)
        .ok_or_else(|| Error::invalid("S must contain the archimedean place"))?;
    let complex = matches!(places[arch], Place::Complex);
    let units: Vec<KElem> = if k.is_rational() {
        vec![k.one()]
    } else {
        vec![k.one(), KElem::from_ints(k, 0, 1)]
    };
    let scale = |b: &LocalBound| match b {
        LocalBound::Arch(r) if complex => r.sqrt(),
        LocalBound::Arch(r) => *r,
        LocalBound::Val(_) => 1.0,
    };
    let fin_gamma = |bounds: &[LocalBound]| -> KElem {
        let mut g = k.one();
        for (v, b) in places.iter().zip(bounds) {
            if let (Place::Finite(fp), LocalBound::Val(kv)) = (v, b) {
                g = &g * &fp.uniformizer().pow(*kv);
            }
        }
        g
    };
    let col_bounds = |j: usize| -> Vec<LocalBound> { cols.iter().map(|c| c[j]).collect() };
    let row_bounds = |i: usize| -> Vec<LocalBound> { rows.iter().map(|r| r[i]).collect() };
    let a_inf: Vec<Vec<num_complex::Complex64>> = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| inst.a[arch].get(i, j).as_complex().unwrap_or_default())
                .collect()
        })
        .collect();
    let push = |out: &mut Vec<f64>, z: num_complex::Complex64, s: f64| {
        out.push(z.re / s);
        if complex {
            out.push(z.im / s);
        }
    };
    // generators: (x, y) pairs, with their real embedding
    let mut gens_x: Vec<Vec<KElem>> = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let gamma = fin_gamma(&col_bounds(j));
        for u in &units {
            let mut x = vec![k.zero(); n];
            x[j] = &gamma * u;
            let ax = inst.apply(&x);
            let mut y = Vec::with_capacity(m);
            for i in 0..m {
                let targets: Vec<LocalValue> = ax.iter().map(|r| r[i].clone()).collect();
                y.push(finite_coset(cfg, &targets, &row_bounds(i))?.y0);
            }
            let mut e = Vec::new();
            for (jj, xj) in x.iter().enumerate() {
                push(&mut e, xj.embed(), scale(&cols[arch][jj]));
            }
            for i in 0..m {
                let r: num_complex::Complex64 =
                    (0..n).map(|jj| a_inf[i][jj] * x[jj].embed()).sum::<num_complex::Complex64>() - y[i].embed();
                push(&mut e, r, scale(&rows[arch][i]));
            }
            gens_x.push(x);
            basis.push(e);
        }
    }
    for i in 0..m {
        let beta = fin_gamma(&row_bounds(i));
        for u in &units {
            let mut e = Vec::new();
            for jj in 0..n {
                push(&mut e, num_complex::Complex64::default(), scale(&cols[arch][jj]));
            }
            for ii in 0..m {
                let z = if ii == i { -(&beta * u).embed() } else { num_complex::Complex64::default() };
                push(&mut e, z, scale(&rows[arch][ii]));
            }
            gens_x.push(vec![k.zero(); n]);
            basis.push(e);
        }
    }
    let r2 = (m + n) as f64 * (1.0 + 1e-6);
    let coefs = super::short::short_vectors(&basis, r2, cap)?;
    let mut xs: Vec<Vec<KElem>> = Vec::new();
    for c in coefs {
        let mut x = vec![k.zero(); n];
        for (cb, g) in c.iter().zip(&gens_x) {
            if *cb == 0 {
                continue;
            }
            let s = KElem::from_int(k, *cb);
            for (xj, gj) in x.iter_mut().zip(g) {
                if !gj.is_zero() {
                    *xj = &*xj + &(&s * gj);
                }
            }
        }
        let keep = x.iter().find(|c| !c.is_zero()).is_some_and(|c| c.lex_sign() > 0)
            && x.iter().enumerate().all(|(j, xj)| exact_within(xj, &places[arch], &cols[arch][j]));
        if keep {
            xs.push(x);
        }
    }
    xs.sort();
    xs.dedup();
    Ok(xs)
}

/// The exhaustive `x`-box search, kept as a reference for the lattice search.
#[cfg(test)]
fn box_candidates(inst: &DirichletInstance, cols: &[Vec<LocalBound>], cap: u64) -> Result<Vec<Vec<KElem>>> {
    let xs = crate::s_adic::enumerate_box(&inst.cfg, inst.n(), &crate::s_adic::SBox { bounds: cols.to_vec() }, cap)?;
    Ok(xs
        .into_iter()
        .filter(|x| x.iter().find(|c| !c.is_zero()).is_some_and(|c| c.lex_sign() > 0))
        .collect())
}

fn best_of(
    inst: &DirichletInstance,
    xs: &[Vec<KElem>],
    rows: &[Vec<LocalBound>],
    cols: &[Vec<LocalBound>],
    cap: u64,
) -> Result<Option<DirichletSolution>> {
    let found: Vec<Option<DirichletSolution>> = xs
        .par_iter()
        .map(|x| evaluate(inst, x, rows, cap))
        .collect::<Result<_>>()?;
    let best = found.into_iter().flatten().min_by(|a, b| {
        a.residual_content
            .total_cmp(&b.residual_content)
            .then_with(|| a.x.cmp(&b.x))
    });
    if let Some(sol) = &best {
        verify(inst, sol, rows, cols)?;
    }
    Ok(best)
}

/// Complete search for the system tightened by `eps` (`eps = 1` is the
/// plain system). Among all witnesses the one with the smallest residual
/// content is returned, ties broken by the lexicographically smallest `x`.
fn search(inst: &DirichletInstance, eps: f64, cap: u64) -> Result<Option<DirichletSolution>> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("ε = {eps} must lie in (0, 1]")));
    }
    let (rows, cols) = inst.t.bounds(&inst.cfg, eps)?;
    let xs = lattice_candidates(inst, &rows, &cols, cap)?;
    best_of(inst, &xs, &rows, &cols, cap)
}

/// A solution of the Dirichlet system for `inst`. The search over `x` is
/// exhaustive, so failing to find one is reported as `Error::Falsified`.
pub fn solve_dirichlet(inst: &DirichletInstance, cap: u64) -> Result<DirichletSolution> {
    search(inst, 1.0, cap)?.ok_or_else(|| {
        Error::Falsified(format!(
            "no solution of the Dirichlet system exists in the exhaustive search (t = {:?})",
            inst.t.components()
        ))
    })
}

/// A witness for the system with both sides multiplied by `eps`, or `None`.
pub fn is_improvable_at(inst: &DirichletInstance, eps: f64, cap: u64) -> Result<Option<DirichletSolution>> {
    search(inst, eps, cap)
}

/// One row of [`scan_di`].
#[derive(Clone, Debug)]
pub struct ScanRow {
    pub t_index: usize,
    pub t: RayPoint,
    /// False when some projection of `t` does not exceed `t0`.
    pub included: bool,
    pub witness: Option<DirichletSolution>,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub eps: f64,
    pub t0: f64,
    pub rows: Vec<ScanRow>,
    /// True iff every included ray point admits a witness.
    pub aggregate: bool,
}

/// Runs the `eps`-improvability test along a schedule of ray points.
/// Only points whose every projection exceeds `t0` enter the aggregate.
pub fn scan_di(
    cfg: &SConfig,
    a: &[LocalMatrix],
    schedule: &[RayPoint],
    eps: f64,
    t0: f64,
    cap: u64,
) -> Result<ScanReport> {
    if schedule.len() >= 2 {
        for i in 0..cfg.len() {
            let first = schedule[0].projection_sup(i);
            if !schedule.iter().any(|t| t.projection_sup(i) > first) {
                return Err(Error::invalid(format!(
                    "projection {i} of the schedule never increases"
                )));
            }
        }
    }
    let included: Vec<bool> = schedule
        .iter()
        .map(|t| (0..cfg.len()).all(|i| t.projection_sup(i) > t0))
        .collect();
    if !included.iter().any(|&b| b) {
        return Err(Error::invalid("no ray point of the schedule lies past t0"));
    }
    let rows: Vec<ScanRow> = schedule
        .par_iter()
        .enumerate()
        .map(|(k, t)| {
            let inst = DirichletInstance::new(cfg.clone(), a.to_vec(), t.clone())?;
            Ok(ScanRow {
                t_index: k,
                t: t.clone(),
                included: included[k],
                witness: is_improvable_at(&inst, eps, cap)?,
            })
        })
        .collect::<Result<_>>()?;
    let aggregate = rows.iter().filter(|r| r.included).all(|r| r.witness.is_some());
    Ok(ScanReport {
        eps,
        t0,
        rows,
        aggregate,
    })
}

/// `‖·‖_{v,2}` of the residual vector at each place.
pub fn residual_norms(sol: &DirichletSolution) -> Vec<f64> {
    sol.residual_vectors.iter().map(|r| local_norm(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::central_ray_point;
    use crate::number_field::{NumberField, Place};
    use crate::s_adic::{PadicApprox, DEFAULT_CAP};

    fn real_instance(a: f64, delta: f64) -> DirichletInstance {
        let cfg = SConfig::with_primes(NumberField::rationals(), &[]).unwrap();
        let t = central_ray_point(&cfg, 1, 1, &[delta], None).unwrap();
        let a = vec![LocalMatrix::from_fn(1, 1, |_, _| LocalValue::Real(a))];
        DirichletInstance::new(cfg, a, t).unwrap()
    }

    #[test]
    fn sqrt2_with_delta_five() {
        let inst = real_instance(2f64.sqrt(), 5.0);
        let sol = solve_dirichlet(&inst, DEFAULT_CAP).unwrap();
        let q = NumberField::rationals();
        assert_eq!(sol.x, vec![KElem::from_int(q, 5)]);
        assert_eq!(sol.y, vec![KElem::from_int(q, 7)]);
        assert!((sol.residual_content - (5.0 * 2f64.sqrt() - 7.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_gives_first_unit_vector() {
        let cfg = SConfig::with_primes(NumberField::rationals(), &[]).unwrap();
        let q = cfg.field();
        let t = central_ray_point(&cfg, 1, 2, &[3.0], None).unwrap();
        let inst = DirichletInstance::from_exact(cfg, &[vec![q.zero(), q.zero()]], t).unwrap();
        let sol = solve_dirichlet(&inst, DEFAULT_CAP).unwrap();
        assert_eq!(sol.x, vec![q.zero(), q.one()]);
        assert_eq!(sol.y, vec![q.zero()]);
    }

    #[test]
    fn rational_point_is_improvable_exactly() {
        let cfg = SConfig::with_primes(NumberField::rationals(), &[]).unwrap();
        let q = cfg.field();
        let t = central_ray_point(&cfg, 1, 1, &[49.0 * 100.0], None).unwrap();
        let inst = DirichletInstance::from_exact(cfg, &[vec![KElem::from_ratio(q, 3, 7)]], t).unwrap();
        let w = is_improvable_at(&inst, 0.01, DEFAULT_CAP).unwrap().unwrap();
        assert_eq!(w.x, vec![KElem::from_int(q, 7)]);
        assert_eq!(w.y, vec![KElem::from_int(q, 3)]);
        assert!(w.residual_content < 1e-12);
    }

    #[test]
    fn two_adic_instance_meets_both_places() {
        let q = NumberField::rationals();
        let cfg = SConfig::with_primes(q, &[2]).unwrap();
        let t = central_ray_point(&cfg, 1, 1, &[4.0, 4.0], None).unwrap();
        let v2 = *cfg.places()[1].finite().unwrap();
        let a = vec![
            LocalMatrix::from_fn(1, 1, |_, _| LocalValue::Real(2f64.sqrt())),
            LocalMatrix::from_fn(1, 1, |_, _| {
                LocalValue::Padic(PadicApprox::from_kelem(&KElem::from_ratio(q, 1, 3), v2, 64))
            }),
        ];
        let inst = DirichletInstance::new(cfg.clone(), a, t).unwrap();
        let sol = solve_dirichlet(&inst, DEFAULT_CAP).unwrap();
        assert!(sol.row_residuals[0][0] <= 0.125 * (1.0 + 1e-9));
        assert!(sol.row_residuals[1][0] <= 0.5);
        assert!(sol.col_norms[0][0] <= 4.0 && sol.col_norms[1][0] <= 4.0);
        // brute-force oracle over x = a/4, y = b/4
        let mut best: Option<(f64, i64, i64)> = None;
        for a in -16i64..=16 {
            if a <= 0 {
                continue;
            }
            for b in -40i64..=40 {
                let arch = (a as f64 * 2f64.sqrt() - b as f64).abs() / 4.0;
                let d = a - 3 * b;
                let v2 = if d == 0 { 99 } else { d.trailing_zeros() as i64 };
                let fin = 4.0 * 2f64.powi(-v2 as i32);
                if arch <= 0.125 && fin <= 0.5 {
                    let c = arch * fin;
                    if best.map_or(true, |(bc, _, _)| c < bc) {
                        best = Some((c, a, b));
                    }
                }
            }
        }
        let (c, a, b) = best.unwrap();
        assert_eq!(sol.x, vec![KElem::from_ratio(q, a, 4)]);
        assert_eq!(sol.y, vec![KElem::from_ratio(q, b, 4)]);
        assert!((sol.residual_content - c).abs() < 1e-12);
        assert!(matches!(cfg.places()[1], Place::Finite(_)));
    }

    #[test]
    fn improvability_is_monotone_in_eps() {
        let inst = real_instance((1.0 + 5f64.sqrt()) / 2.0, 89.0);
        let mut seen = false;
        for e in [0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let w = is_improvable_at(&inst, e, DEFAULT_CAP).unwrap();
            if seen {
                assert!(w.is_some(), "lost witness at {e}");
            }
            seen |= w.is_some();
        }
        assert!(seen);
    }

    #[test]
    fn lattice_search_agrees_with_the_box_search() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let fields = [
            NumberField::rationals(),
            NumberField::imaginary_quadratic(1).unwrap(),
            NumberField::imaginary_quadratic(3).unwrap(),
        ];
        for trial in 0..40 {
            let k = fields[trial % fields.len()];
            let primes: &[u64] = match trial % 4 {
                0 => &[],
                1 => &[2],
                2 => &[3],
                _ => &[2, 3],
            };
            let cfg = SConfig::with_primes(k, primes).unwrap();
            let (m, n) = [(1, 1), (1, 2), (2, 1)][trial % 3];
            let sup = if k.is_rational() { 20.0 } else { 6.0 };
            let arch: Vec<f64> = (0..cfg.len()).map(|_| rng.gen_range(2.0..sup)).collect();
            let Ok(t) = central_ray_point(&cfg, m, n, &arch, None) else { continue };
            let rows: Vec<Vec<KElem>> = (0..m)
                .map(|_| {
                    (0..n)
                        .map(|_| KElem::from_ratio(k, rng.gen_range(-30..30), rng.gen_range(1..13)))
                        .collect()
                })
                .collect();
            let mut a = exact_matrices(&cfg, &rows);
            for i in 0..m {
                for j in 0..n {
                    let z = rng.gen_range(-1.0..1.0);
                    a[0] = LocalMatrix::from_fn(m, n, |ii, jj| {
                        if (ii, jj) == (i, j) {
                            match a[0].get(ii, jj) {
                                LocalValue::Real(r) => LocalValue::Real(r + z),
                                LocalValue::Complex(c) => LocalValue::Complex(c + z),
                                other => other.clone(),
                            }
                        } else {
                            a[0].get(ii, jj).clone()
                        }
                    });
                }
            }
            let inst = DirichletInstance::new(cfg, a, t).unwrap();
            for eps in [1.0, 0.5] {
                let (rb, cb) = inst.t.bounds(&inst.cfg, eps).unwrap();
                let Ok(full) = box_candidates(&inst, &cb, 200_000) else { continue };
                let want = best_of(&inst, &full, &rb, &cb, DEFAULT_CAP).unwrap();
                let got = search(&inst, eps, DEFAULT_CAP).unwrap();
                assert_eq!(got.map(|s| (s.x, s.y)), want.map(|s| (s.x, s.y)), "trial {trial}, eps {eps}");
            }
        }
    }

    #[test]
    fn scan_rejects_empty_horizon() {
        let cfg = SConfig::with_primes(NumberField::rationals(), &[]).unwrap();
        let sched = crate::dirichlet::central_ray_schedule(&cfg, 1, 1, 4, 2.0, 2.0).unwrap();
        let a = vec![LocalMatrix::from_fn(1, 1, |_, _| LocalValue::Real(2f64.sqrt()))];
        assert!(scan_di(&cfg, &a, &sched, 0.9, 1e6, DEFAULT_CAP).is_err());
        let rep = scan_di(&cfg, &a, &sched, 0.9, 0.0, DEFAULT_CAP).unwrap();
        assert_eq!(rep.rows.len(), 4);
    }
}
