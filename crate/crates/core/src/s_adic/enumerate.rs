use num_complex::Complex64;
use num_rational::BigRational;

use super::{LocalBound, LocalValue, PadicApprox, SBox, SConfig, MIN_SIGNIFICANT, TAU_ARCH};
use crate::error::{Error, Result};
use crate::number_field::{FinitePlace, KElem, NumberField, Place};

/// Default cap on the number of points an enumeration may visit.
pub const DEFAULT_CAP: u64 = 10_000_000;

/// A representative in `O_K` of an exact `π`-integral element modulo `π^k`.
pub fn reduce_mod(x: &KElem, place: &FinitePlace, k: u32) -> Result<KElem> {
    PadicApprox::from_kelem(x, *place, k + MIN_SIGNIFICANT).residue(k)
}

/// The coset `y0 + γ·O_K` of S-integers meeting every finite condition
/// `v_i(y - c_i) ≥ k_i`.
pub(crate) struct Coset {
    pub(crate) y0: KElem,
    pub(crate) gamma: KElem,
}

pub(crate) fn finite_coset(cfg: &SConfig, targets: &[LocalValue], bounds: &[LocalBound]) -> Result<Coset> {
    let k = cfg.field();
    let mut fin: Vec<(FinitePlace, PadicApprox, i64)> = Vec::new();
    for ((v, c), b) in cfg.places().iter().zip(targets).zip(bounds) {
        if let Place::Finite(fp) = v {
            let LocalBound::Val(kv) = b else {
                return Err(Error::invalid("finite place needs a valuation bound"));
            };
            let c = c
                .as_padic()
                .ok_or_else(|| Error::invalid("finite place needs a p-adic target"))?;
            if c.abs_precision() < *kv {
                return Err(Error::Precision(format!(
                    "target at {v} known modulo ϖ^{} only, need {kv}",
                    c.abs_precision()
                )));
            }
            fin.push((*fp, c.clone(), *kv));
        }
    }
    if fin.is_empty() {
        return Ok(Coset {
            y0: k.zero(),
            gamma: k.one(),
        });
    }
    // y ∈ λ·O_K with λ = Π π_i^{a_i}
    let a: Vec<i64> = fin
        .iter()
        .map(|(_, c, kv)| 0.min(*kv).min(c.valuation().unwrap_or(*kv)))
        .collect();
    let big_k: Vec<u32> = fin.iter().zip(&a).map(|((_, _, kv), ai)| (kv - ai) as u32).collect();
    let lambda = fin
        .iter()
        .zip(&a)
        .fold(k.one(), |acc, ((fp, _, _), ai)| &acc * &fp.uniformizer().pow(*ai));
    let mut z0 = k.zero();
    for (i, (fp, c, _)) in fin.iter().enumerate() {
        if big_k[i] == 0 {
            continue;
        }
        let depth = big_k[i] + MIN_SIGNIFICANT;
        let lam = PadicApprox::from_kelem(&lambda, *fp, depth + 8);
        let r = c.div(&lam)?.residue(big_k[i])?;
        let qi = fin
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .fold(k.one(), |acc, (j, (fq, _, _))| &acc * &fq.uniformizer().pow(big_k[j] as i64));
        let qinv = PadicApprox::from_kelem(&qi, *fp, depth).inv()?.residue(big_k[i])?;
        z0 = &z0 + &(&r * &(&qi * &qinv));
    }
    let gamma = fin
        .iter()
        .fold(k.one(), |acc, (fp, _, kv)| &acc * &fp.uniformizer().pow(*kv));
    let mut y0 = &lambda * &z0;
    // shift y0 into a fundamental domain of γ·O_K
    let w = &y0 / &gamma;
    let round = |r: &BigRational| BigRational::from_integer(r.round().to_integer());
    let w = KElem::new(k, round(w.a()), round(w.b()));
    y0 = &y0 - &(&gamma * &w);
    Ok(Coset { y0, gamma })
}

fn coset_size_estimate(k: NumberField, gamma: &KElem, b: f64) -> f64 {
    let g = gamma.embed().norm();
    if k.is_rational() {
        2.0 * b / g + 1.0
    } else {
        let r = b.sqrt() / g;
        // disc area over covolume plus a boundary allowance
        std::f64::consts::PI * r * r / k.ring_covolume() + 4.0 * r + 1.0
    }
}

fn check_finite(cfg: &SConfig, y: &KElem, targets: &[LocalValue], bounds: &[LocalBound]) -> Result<bool> {
    for ((v, c), b) in cfg.places().iter().zip(targets).zip(bounds) {
        if let (Place::Finite(fp), LocalBound::Val(kv), LocalValue::Padic(c)) = (v, b, c) {
            let vy = fp.valuation(y).unwrap_or(*kv);
            let prec = ((kv - vy).max(0) as u32) + MIN_SIGNIFICANT;
            let d = PadicApprox::from_kelem(y, *fp, prec).sub(c);
            if !d.val_at_least(*kv)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All `y ∈ O_S` with `|y - c_v|_v ≤ b_v` at every `v ∈ S`, sorted by
/// archimedean distance to the target and then by coordinates.
///
/// The finite conditions cut out a coset `y0 + γ·O_K` (by the Chinese
/// remainder theorem applied to the prime elements of `S`); the coset points
/// in the archimedean ball are then listed exhaustively.
pub fn s_integers_near(
    cfg: &SConfig,
    targets: &[LocalValue],
    bounds: &[LocalBound],
    cap: u64,
) -> Result<Vec<KElem>> {
    if targets.len() != cfg.len() || bounds.len() != cfg.len() {
        return Err(Error::invalid("targets and bounds must cover every place of S"));
    }
    let k = cfg.field();
    let inf = cfg.index_of(&crate::number_field::infinite_place(k)).unwrap();
    let LocalBound::Arch(b) = bounds[inf] else {
        return Err(Error::invalid("archimedean place needs a real bound"));
    };
    let c = targets[inf]
        .as_complex()
        .ok_or_else(|| Error::invalid("archimedean target must be real or complex"))?;
    if !(b >= 0.0) || !c.re.is_finite() || !c.im.is_finite() {
        return Err(Error::invalid("archimedean target and bound must be finite"));
    }
    let coset = finite_coset(cfg, targets, bounds)?;
    let est = coset_size_estimate(k, &coset.gamma, b);
    if est > cap as f64 {
        return Err(Error::CapExceeded { estimate: est, cap });
    }
    let bt = b * (1.0 + TAU_ARCH);
    let y0 = coset.y0.embed();
    let g = coset.gamma.embed();
    let z = (c - y0) / g;
    let mut cands: Vec<(f64, KElem)> = Vec::new();
    let mut push = |w: KElem| -> Result<()> {
        let y = &coset.y0 + &(&coset.gamma * &w);
        let d = y.embed() - c;
        let dist = if k.is_rational() { d.re.abs() } else { d.norm_sqr() };
        if dist <= bt && check_finite(cfg, &y, targets, bounds)? {
            cands.push((dist, y));
        }
        Ok(())
    };
    let slack = 1e-9;
    if k.is_rational() {
        let r = bt / g.re.abs();
        let lo = (z.re - r - slack).ceil() as i64;
        let hi = (z.re + r + slack).floor() as i64;
        for w in lo..=hi {
            push(KElem::from_int(k, w))?;
        }
    } else {
        let r = bt.sqrt() / g.norm();
        let om: Complex64 = k.omega_embedding();
        let ylo = ((z.im - r) / om.im - slack).ceil() as i64;
        let yhi = ((z.im + r) / om.im + slack).floor() as i64;
        for yy in ylo..=yhi {
            let dy = yy as f64 * om.im - z.im;
            let h = (r * r - dy * dy).max(0.0).sqrt();
            let cx = z.re - yy as f64 * om.re;
            let xlo = (cx - h - slack).ceil() as i64;
            let xhi = (cx + h + slack).floor() as i64;
            for xx in xlo..=xhi {
                push(KElem::from_ints(k, xx, yy))?;
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(cands.into_iter().map(|(_, y)| y).collect())
}

/// The S-integer closest to the archimedean target among those meeting all
/// bounds, or `None` when the exhaustive search finds nothing.
pub fn nearest_s_integer(
    cfg: &SConfig,
    targets: &[LocalValue],
    bounds: &[LocalBound],
    cap: u64,
) -> Result<Option<KElem>> {
    Ok(s_integers_near(cfg, targets, bounds, cap)?.into_iter().next())
}

fn coordinate_points(cfg: &SConfig, bounds: &[LocalBound], cap: u64) -> Result<Vec<KElem>> {
    let zeros: Vec<LocalValue> = cfg.places().iter().map(LocalValue::zero).collect();
    let mut pts = s_integers_near(cfg, &zeros, bounds, cap)?;
    pts.sort();
    Ok(pts)
}

/// Upper estimate of the number of points [`enumerate_box`] would return.
pub fn estimate_box_count(cfg: &SConfig, bx: &SBox) -> Result<f64> {
    let n = bx.bounds.first().map_or(0, |b| b.len());
    let zeros: Vec<LocalValue> = cfg.places().iter().map(LocalValue::zero).collect();
    let mut total = 1.0;
    for j in 0..n {
        let col: Vec<LocalBound> = bx.bounds.iter().map(|b| b[j]).collect();
        let coset = finite_coset(cfg, &zeros, &col)?;
        let inf = cfg.index_of(&crate::number_field::infinite_place(cfg.field())).unwrap();
        let LocalBound::Arch(b) = col[inf] else {
            return Err(Error::invalid("archimedean place needs a real bound"));
        };
        total *= coset_size_estimate(cfg.field(), &coset.gamma, b);
    }
    Ok(total)
}

/// Every `x ∈ O_S^n` with `|x_j|_v ≤ r_{v,j}` for all `v ∈ S` and all `j`,
/// in lexicographic order of coordinates.
pub fn enumerate_box(cfg: &SConfig, n: usize, bx: &SBox, cap: u64) -> Result<Vec<Vec<KElem>>> {
    if bx.bounds.len() != cfg.len() || bx.bounds.iter().any(|b| b.len() != n) {
        return Err(Error::invalid("box shape does not match S and n"));
    }
    let est = estimate_box_count(cfg, bx)?;
    if est > cap as f64 {
        return Err(Error::CapExceeded { estimate: est, cap });
    }
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let col: Vec<LocalBound> = bx.bounds.iter().map(|b| b[j]).collect();
        cols.push(coordinate_points(cfg, &col, cap)?);
    }
    let mut out: Vec<Vec<KElem>> = vec![Vec::new()];
    for col in &cols {
        let mut next = Vec::with_capacity(out.len() * col.len());
        for prefix in &out {
            for c in col {
                let mut v = prefix.clone();
                v.push(c.clone());
                next.push(v);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Exact `|x|_v` comparisons used by tests and by callers that hold exact data.
pub(crate) fn exact_within(x: &KElem, v: &Place, b: &LocalBound) -> bool {
    match (v, b) {
        (Place::Finite(fp), LocalBound::Val(k)) => fp.valuation(x).map_or(true, |vx| vx >= *k),
        (_, LocalBound::Arch(r)) => crate::number_field::abs_value(x, v).to_f64() <= r * (1.0 + TAU_ARCH),
        _ => false,
    }
}
