use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(t: &[Vec<i64>], basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    t.iter()
        .map(|row| {
            let mut v = vec![0.0; basis[0].len()];
            for (c, b) in row.iter().zip(basis) {
                if *c != 0 {
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += *c as f64 * bi;
                    }
                }
            }
            v
        })
        .collect()
}

/// Gram–Schmidt data: squared lengths `c_i` and coefficients `mu[i][j]`, `j < i`.
fn gram_schmidt(b: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = b.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut c = vec![0.0; n];
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&b[i], &star[j]) / c[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= mu[i][j] * sk;
            }
        }
        c[i] = dot(&v, &v);
        star.push(v);
    }
    (c, mu)
}

/// LLL reduction (δ = 0.99) of linearly independent vectors. Returns the
/// unimodular transform: reduced vector `k` is `Σ_l t[k][l]·b[l]`. The
/// reduced basis is always recomputed from the input so rounding does not
/// accumulate.
pub(crate) fn lll(b: &[Vec<f64>]) -> Vec<Vec<i64>> {
    let n = b.len();
    let mut t: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut k = 1;
    let mut steps = 0;
    while k < n && steps < 10_000 {
        steps += 1;
        for j in (0..k).rev() {
            let cur = combine(&t, b);
            let (_, mu) = gram_schmidt(&cur);
            let r = mu[k][j].round();
            if r != 0.0 {
                let r = r as i64;
                for l in 0..n {
                    t[k][l] -= r * t[j][l];
                }
            }
        }
        let cur = combine(&t, b);
        let (c, mu) = gram_schmidt(&cur);
        if c[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * c[k - 1] {
            k += 1;
        } else {
            t.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    t
}

/// Every nonzero integer vector `n` with `‖Σ_l n_l b_l‖² ≤ r2`, as
/// coefficients of the input vectors. Both `n` and `-n` are listed.
pub(crate) fn short_vectors(b: &[Vec<f64>], r2: f64, cap: u64) -> Result<Vec<Vec<i64>>> {
    let n = b.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let t = lll(b);
    let red = combine(&t, b);
    let (c, mu) = gram_schmidt(&red);
    if c.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Precision("lattice basis is numerically degenerate".into()));
    }
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    let mut visited = 0u64;
    enumerate(n, &c, &mu, r2, &mut x, &mut visited, cap, &mut |k: &[i64]| {
        if k.iter().any(|v| *v != 0) {
            let mut coef = vec![0i64; n];
            for (ki, row) in k.iter().zip(&t) {
                for (cl, tl) in coef.iter_mut().zip(row) {
                    *cl += ki * tl;
                }
            }
            out.push(coef);
        }
    })?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    level: usize,
    c: &[f64],
    mu: &[Vec<f64>],
    budget: f64,
    x: &mut Vec<i64>,
    visited: &mut u64,
    cap: u64,
    emit: &mut dyn FnMut(&[i64]),
) -> Result<()> {
    if level == 0 {
        emit(x);
        return Ok(());
    }
    let i = level - 1;
    let n = x.len();
    let center = -(i + 1..n).map(|j| mu[j][i] * x[j] as f64).sum::<f64>();
    let half = (budget.max(0.0) / c[i]).sqrt();
    let lo = (center - half).ceil() as i64;
    let hi = (center + half).floor() as i64;
    *visited += (hi - lo + 1).max(0) as u64;
    if *visited > cap {
        return Err(Error::CapExceeded {
            estimate: *visited as f64,
            cap,
        });
    }
    for xi in lo..=hi {
        let d = xi as f64 - center;
        let rest = budget - c[i] * d * d;
        if rest < 0.0 {
            continue;
        }
        x[i] = xi;
        enumerate(i, c, mu, rest, x, visited, cap, emit)?;
    }
    x[i] = 0;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(b: &[Vec<f64>], r2: f64, box_r: i64) -> Vec<Vec<i64>> {
        let n = b.len();
        let mut out = Vec::new();
        let mut idx = vec![-box_r; n];
        loop {
            if idx.iter().any(|v| *v != 0) {
                let v = combine(&[idx.clone()], b).remove(0);
                if dot(&v, &v) <= r2 {
                    out.push(idx.clone());
                }
            }
            let mut k = 0;
            loop {
                if k == n {
                    return out;
                }
                idx[k] += 1;
                if idx[k] <= box_r {
                    break;
                }
                idx[k] = -box_r;
                k += 1;
            }
        }
    }

    #[test]
    fn matches_brute_force_on_skewed_bases() {
        let bases = vec![
            vec![vec![1.0, 0.0], vec![0.5, 0.9]],
            vec![vec![3.0, 0.1], vec![2.9, 0.2]],
            vec![vec![1.0, 0.0, 0.0], vec![2.4, 0.8, 0.0], vec![1.3, 0.2, 0.7]],
        ];
        for b in bases {
            let mut got = short_vectors(&b, 2.5, 1_000_000).unwrap();
            let mut want = brute(&b, 2.5, 40);
            got.sort();
            want.sort();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn lll_shortens_a_skewed_basis() {
        let b = vec![vec![1.0, 0.0], vec![1000.0, 0.001]];
        let t = lll(&b);
        let red = combine(&t, &b);
        assert!(red.iter().all(|v| dot(v, v) <= 1.0 + 1e-9));
    }

    #[test]
    fn cap_is_enforced() {
        let b = vec![vec![0.01, 0.0], vec![0.0, 0.01]];
        assert!(matches!(short_vectors(&b, 1.0, 100), Err(Error::CapExceeded { .. })));
    }
}
