use std::collections::BTreeSet;

use super::basis::SLatticeBasis;
use crate::error::{Error, Result};
use crate::number_field::{arith::factor, places_over, KElem, Place};
use crate::s_adic::{
    content, enumerate_box, is_s_integer, LocalBound, LocalMatrix, LocalValue, SBox, SConfig, DEFAULT_CAP,
    DEFAULT_PREC,
};

/// Sorted `j`-subsets of `{0, …, dim-1}` in lexicographic order.
pub fn subsets(dim: usize, j: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, dim: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            go(i + 1, dim, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if j <= dim {
        go(0, dim, j, &mut Vec::with_capacity(j), &mut out);
    }
    out
}

fn subset_index(all: &[Vec<usize>], s: &[usize]) -> usize {
    all.binary_search_by(|x| x.as_slice().cmp(s)).expect("subset of the right size")
}

/// An element `Σ_I w_I e_I` of `⋀^j K_v^{dim}` with coefficients in the
/// order of [`subsets`].
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeVec {
    pub dim: usize,
    pub rank: usize,
    pub coeffs: Vec<LocalValue>,
}

impl WedgeVec {
    pub fn new(dim: usize, rank: usize, coeffs: Vec<LocalValue>) -> Result<Self> {
        if rank == 0 || rank > dim {
            return Err(Error::invalid(format!("rank {rank} out of range for dimension {dim}")));
        }
        if coeffs.len() != subsets(dim, rank).len() {
            return Err(Error::invalid("coefficient count must be C(dim, rank)"));
        }
        Ok(WedgeVec { dim, rank, coeffs })
    }

    /// `e_I`.
    pub fn basis(v: &Place, dim: usize, subset: &[usize]) -> Result<Self> {
        let all = subsets(dim, subset.len());
        let k = all
            .binary_search_by(|x| x.as_slice().cmp(subset))
            .map_err(|_| Error::invalid("index set must be sorted and in range"))?;
        let mut coeffs = vec![LocalValue::zero(v); all.len()];
        coeffs[k] = LocalValue::one(v, DEFAULT_PREC);
        WedgeVec::new(dim, subset.len(), coeffs)
    }

    /// `w_I` for a sorted index set.
    pub fn coeff(&self, subset: &[usize]) -> &LocalValue {
        &self.coeffs[subset_index(&subsets(self.dim, self.rank), subset)]
    }

    /// `v_1 ∧ … ∧ v_j` for column vectors.
    pub fn decomposable(vs: &[Vec<LocalValue>]) -> Result<Self> {
        let j = vs.len();
        let dim = vs.first().map_or(0, |v| v.len());
        let coeffs = subsets(dim, j)
            .iter()
            .map(|rows| LocalMatrix::from_fn(j, j, |a, b| vs[b][rows[a]].clone()).det())
            .collect::<Result<_>>()?;
        WedgeVec::new(dim, j, coeffs)
    }

    /// `‖w‖_{v,2}` at the place of the coefficients.
    pub fn norm(&self) -> f64 {
        crate::s_adic::local_norm(&self.coeffs)
    }
}

/// The shape `wedge_action` may exploit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    /// `g = [[1, f], [0, I_n]]`.
    Unipotent,
    /// `g` diagonal.
    Diagonal,
    /// `g = D·[[1, f], [0, I_n]]` with `D` diagonal.
    Flow,
    /// Any matrix: full minor expansion.
    Generic,
}

fn wedge_generic(g: &LocalMatrix, w: &WedgeVec) -> Result<WedgeVec> {
    let all = subsets(w.dim, w.rank);
    let mut out = Vec::with_capacity(all.len());
    for rows in &all {
        let mut acc: Option<LocalValue> = None;
        for (cols, wj) in all.iter().zip(&w.coeffs) {
            if wj.is_zero() && !matches!(wj, LocalValue::Padic(_)) {
                continue;
            }
            let minor = LocalMatrix::from_fn(w.rank, w.rank, |a, b| g.get(rows[a], cols[b]).clone()).det()?;
            let term = &minor * wj;
            acc = Some(match acc {
                None => term,
                Some(a) => &a + &term,
            });
        }
        out.push(acc.unwrap_or_else(|| zero_like(&w.coeffs[0])));
    }
    WedgeVec::new(w.dim, w.rank, out)
}

fn zero_like(x: &LocalValue) -> LocalValue {
    match x {
        LocalValue::Real(_) => LocalValue::Real(0.0),
        LocalValue::Complex(_) => LocalValue::Complex(num_complex::Complex64::new(0.0, 0.0)),
        LocalValue::Padic(p) => LocalValue::Padic(crate::s_adic::PadicApprox::exact_zero(*p.place())),
    }
}

/// `e_I ↦ e_I` if `0 ∈ I`, otherwise
/// `e_I + Σ_{i∈I} (-1)^{pos(i)} f_i e_{I∪{0}∖{i}}`.
fn wedge_unipotent(f: &[LocalValue], w: &WedgeVec) -> WedgeVec {
    let all = subsets(w.dim, w.rank);
    let mut out = w.coeffs.clone();
    for (s, wj) in all.iter().zip(&w.coeffs) {
        if s[0] == 0 {
            continue;
        }
        for (pos, &i) in s.iter().enumerate() {
            let mut target: Vec<usize> = s.iter().copied().filter(|&x| x != i).collect();
            target.insert(0, 0);
            let k = subset_index(&all, &target);
            let term = &f[i] * wj;
            out[k] = if pos % 2 == 0 { &out[k] + &term } else { &out[k] - &term };
        }
    }
    WedgeVec {
        dim: w.dim,
        rank: w.rank,
        coeffs: out,
    }
}

/// `e_I ↦ (Π_{i∈I} d_i) e_I`.
fn wedge_diagonal(d: &[LocalValue], w: &WedgeVec) -> WedgeVec {
    let coeffs = subsets(w.dim, w.rank)
        .iter()
        .zip(&w.coeffs)
        .map(|(s, c)| s.iter().fold(c.clone(), |acc, &i| &acc * &d[i]))
        .collect();
    WedgeVec {
        dim: w.dim,
        rank: w.rank,
        coeffs,
    }
}

/// `(⋀^j g) w`. Structured modes read only the entries their shape needs.
pub fn wedge_action(g: &LocalMatrix, w: &WedgeVec, structure: Structure) -> Result<WedgeVec> {
    if g.rows != w.dim || g.cols != w.dim {
        return Err(Error::invalid("matrix and wedge dimensions differ"));
    }
    let n = w.dim;
    match structure {
        Structure::Generic => wedge_generic(g, w),
        Structure::Diagonal => {
            let d: Vec<LocalValue> = (0..n).map(|i| g.get(i, i).clone()).collect();
            Ok(wedge_diagonal(&d, w))
        }
        Structure::Unipotent => {
            let f: Vec<LocalValue> = (0..n).map(|i| g.get(0, i).clone()).collect();
            Ok(wedge_unipotent(&f, w))
        }
        Structure::Flow => {
            let d: Vec<LocalValue> = (0..n).map(|i| g.get(i, i).clone()).collect();
            let d0 = d[0].inv()?;
            let f: Vec<LocalValue> = (0..n).map(|i| g.get(0, i) * &d0).collect();
            Ok(wedge_diagonal(&d, &wedge_unipotent(&f, w)))
        }
    }
}

/// Plücker coordinates of the module spanned by exact column vectors.
pub fn plucker(basis: &[Vec<KElem>]) -> Vec<KElem> {
    let j = basis.len();
    let dim = basis.first().map_or(0, |v| v.len());
    subsets(dim, j)
        .iter()
        .map(|rows| {
            let m: Vec<Vec<KElem>> = rows.iter().map(|&r| basis.iter().map(|b| b[r].clone()).collect()).collect();
            det_exact(m)
        })
        .collect()
}

fn det_exact(mut m: Vec<Vec<KElem>>) -> KElem {
    let n = m.len();
    let field = m[0][0].field();
    let mut det = field.one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return field.zero();
        };
        if p != c {
            m.swap(p, c);
            det = -&det;
        }
        det = &det * &m[c][c];
        let inv = m[c][c].inv().unwrap();
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] * &inv;
            for k in c..n {
                let x = &m[r][k] - &(&f * &m[c][k]);
                m[r][k] = x;
            }
        }
    }
    det
}

/// A primitive rank-`j` submodule `Δ ⊆ O_S^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveSubmodule {
    pub rank: usize,
    pub basis: Vec<Vec<KElem>>,
    /// `b_1 ∧ … ∧ b_j`.
    pub w: Vec<KElem>,
}

/// True iff the `O_S`-ideal generated by the coordinates is `O_S`.
fn content_is_unit(cfg: &SConfig, w: &[KElem]) -> Result<bool> {
    let mut g = num_bigint::BigInt::from(0);
    for x in w.iter().filter(|x| !x.is_zero()) {
        let (a, b, _) = x.integral_parts();
        let (t, n) = x.field().omega_tn();
        let norm = &a * &a + &a * &b * t + &b * &b * n;
        g = num_integer::Integer::gcd(&g, &norm);
    }
    if g == num_bigint::BigInt::from(0) {
        return Ok(false);
    }
    for (p, _) in factor(&g)? {
        for v in places_over(cfg.field(), p)? {
            if cfg.index_of(&v).is_some() {
                continue;
            }
            let fp = v.finite().unwrap();
            if w.iter().filter(|x| !x.is_zero()).all(|x| fp.valuation(x).unwrap() > 0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

impl PrimitiveSubmodule {
    pub fn new(cfg: &SConfig, basis: Vec<Vec<KElem>>) -> Result<Self> {
        let rank = basis.len();
        let m = basis.first().map_or(0, |b| b.len());
        if rank == 0 || rank > m || basis.iter().any(|b| b.len() != m) {
            return Err(Error::invalid("basis must have between 1 and m vectors of length m"));
        }
        if basis.iter().flatten().any(|x| !is_s_integer(x, cfg)) {
            return Err(Error::invalid("basis coordinates must be S-integers"));
        }
        let w = plucker(&basis);
        if w.iter().all(|x| x.is_zero()) {
            return Err(Error::invalid("basis vectors are linearly dependent"));
        }
        if !content_is_unit(cfg, &w)? {
            return Err(Error::invalid("submodule is not primitive"));
        }
        Ok(PrimitiveSubmodule { rank, basis, w })
    }

    /// `O_S^m` itself.
    pub fn full(cfg: &SConfig, m: usize) -> Self {
        let k = cfg.field();
        let basis: Vec<Vec<KElem>> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { k.one() } else { k.zero() }).collect())
            .collect();
        PrimitiveSubmodule::new(cfg, basis).expect("standard basis is primitive")
    }

    pub fn dim(&self) -> usize {
        self.basis[0].len()
    }

    /// `w` embedded at each place.
    pub fn wedge_at(&self, cfg: &SConfig) -> Vec<WedgeVec> {
        cfg.places()
            .iter()
            .map(|v| WedgeVec {
                dim: self.dim(),
                rank: self.rank,
                coeffs: self.w.iter().map(|x| LocalValue::from_kelem(x, v, DEFAULT_PREC)).collect(),
            })
            .collect()
    }
}

/// Representative of `w` modulo `O_S^×`: every finite place of `S` divides
/// out exactly, then the root of unity giving the largest vector is chosen.
fn canonical_wedge(cfg: &SConfig, w: &[KElem]) -> Vec<KElem> {
    let mut w = w.to_vec();
    for fp in cfg.finite_places() {
        let k = w.iter().filter_map(|x| fp.valuation(x)).min().unwrap_or(0);
        if k != 0 {
            let pi = match fp.splitting() {
                crate::number_field::Splitting::Inert => KElem::from_int(cfg.field(), fp.p() as i64),
                _ => fp.uniformizer(),
            };
            let s = pi.pow(-k);
            w = w.iter().map(|x| x * &s).collect();
        }
    }
    cfg.field()
        .roots_of_unity()
        .iter()
        .map(|u| w.iter().map(|x| x * u).collect::<Vec<_>>())
        .max()
        .unwrap()
}

/// `cov(h Δ) = (√|D_K|)^j · c(⋀^j h · w)`.
pub fn covolume_submodule(delta: &PrimitiveSubmodule, h: &SLatticeBasis) -> Result<f64> {
    if delta.dim() != h.dim() {
        return Err(Error::invalid("submodule and lattice dimensions differ"));
    }
    let cfg = h.cfg();
    let a_k = cfg.field().sqrt_abs_disc().powi(delta.rank as i32);
    let images = delta
        .wedge_at(cfg)
        .iter()
        .zip(h.matrices())
        .map(|(w, g)| Ok(wedge_action(g, w, Structure::Generic)?.coeffs))
        .collect::<Result<Vec<_>>>()?;
    Ok(a_k * content(&images))
}

/// Primitive rank-`j` submodules of `O_S^m` spanned by vectors of `O_K^m`
/// whose coordinates satisfy `|x_k|_∞ ≤ height`, one per submodule.
pub fn enumerate_primitive_submodules(
    cfg: &SConfig,
    m: usize,
    j: usize,
    height: f64,
    cap: u64,
) -> Result<Vec<PrimitiveSubmodule>> {
    if j == 0 || j > m {
        return Err(Error::invalid(format!("rank {j} must lie in 1..={m}")));
    }
    if j == m {
        return Ok(vec![PrimitiveSubmodule::full(cfg, m)]);
    }
    let arch = SConfig::with_primes(cfg.field(), &[])?;
    let bx = SBox::uniform(&[LocalBound::Arch(height)], m);
    let vecs: Vec<Vec<KElem>> = enumerate_box(&arch, m, &bx, cap.min(DEFAULT_CAP))?
        .into_iter()
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .collect();
    let mut tuples = 1.0f64;
    for i in 0..j {
        tuples *= (vecs.len() - i) as f64 / (i + 1) as f64;
    }
    if tuples > cap as f64 {
        return Err(Error::CapExceeded { estimate: tuples, cap });
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..j).collect();
    loop {
        let basis: Vec<Vec<KElem>> = idx.iter().map(|&i| vecs[i].clone()).collect();
        let w = plucker(&basis);
        if w.iter().any(|x| !x.is_zero()) && content_is_unit(cfg, &w)? && seen.insert(canonical_wedge(cfg, &w)) {
            out.push(PrimitiveSubmodule { rank: j, basis, w });
        }
        let mut k = j;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if idx[k] < vecs.len() - (j - k) {
                idx[k] += 1;
                for r in k + 1..j {
                    idx[r] = idx[r - 1] + 1;
                }
                break;
            }
        }
    }
}
