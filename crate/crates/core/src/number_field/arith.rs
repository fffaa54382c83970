//! Integer helpers: p-adic valuations, modular inverses and factorisation.
//! Everything here works on `BigInt` so that no intermediate product can
//! overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn pow_u(p: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// `v_p(n)` for nonzero `n`.
pub fn vp(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// Splits `n = p^v * rest` with `p ∤ rest`.
pub fn split_p(n: &BigInt, p: u64) -> (u32, BigInt) {
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    while !m.is_zero() {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1;
    }
    (v, m)
}

/// Least nonnegative residue.
pub fn modulo(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Residue of a p-integral rational modulo `p^k`.
pub fn rational_mod(r: &BigRational, p: u64, k: u32) -> Result<BigInt> {
    let m = pow_u(p, k);
    let inv = mod_inverse(r.denom(), &m).ok_or_else(|| {
        Error::Precision(format!("{r} is not {p}-integral, cannot reduce mod {p}^{k}"))
    })?;
    Ok((r.numer() * inv).mod_floor(&m))
}

/// `v_p` of a nonzero rational.
pub fn vp_rational(r: &BigRational, p: u64) -> i64 {
    vp(r.numer(), p) as i64 - vp(r.denom(), p) as i64
}

pub fn is_prime(n: u64) -> bool {
    num_prime::nt_funcs::is_prime64(n)
}

/// A square root of `a` modulo an odd prime `p` (Tonelli–Shanks).
pub fn sqrt_mod(a: &BigInt, p: u64) -> Option<BigInt> {
    let pb = BigInt::from(p);
    let a = a.mod_floor(&pb);
    if a.is_zero() {
        return Some(a);
    }
    let pow = |x: &BigInt, e: u64| x.modpow(&BigInt::from(e), &pb);
    if !pow(&a, (p - 1) / 2).is_one() {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..).map(BigInt::from).find(|z| !pow(z, (p - 1) / 2).is_one())?;
    let mut c = pow(&z, q);
    let mut x = pow(&a, q.div_ceil(2));
    let mut t = pow(&a, q);
    let mut m = s;
    while !t.is_one() {
        let mut i = 0;
        let mut tt = t.clone();
        while !tt.is_one() {
            tt = (&tt * &tt).mod_floor(&pb);
            i += 1;
        }
        let b = c.modpow(&(BigInt::one() << (m - i - 1)), &pb);
        x = (&x * &b).mod_floor(&pb);
        c = (&b * &b).mod_floor(&pb);
        t = (&t * &c).mod_floor(&pb);
        m = i;
    }
    Some(x)
}

/// Prime factorisation of `|n|`. Prime factors beyond `u64` are refused.
pub fn factor(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    let m = n.magnitude().clone();
    if m.is_zero() {
        return Err(Error::invalid("cannot factor zero"));
    }
    let (found, rest) = num_prime::nt_funcs::factors(m, None);
    if let Some(rest) = rest {
        return Err(Error::invalid(format!("could not factor {rest:?}")));
    }
    found
        .into_iter()
        .map(|(p, e)| {
            p.to_u64()
                .map(|p| (p, e as u32))
                .ok_or_else(|| Error::invalid(format!("prime factor {p} exceeds 64 bits")))
        })
        .collect()
}

/// Hensel-lifted root of `x² - t·x + n` modulo `p^k`, starting from a simple
/// root `r0` modulo `p`.
pub fn hensel_root(t: i64, n: i64, p: u64, r0: u64, k: u32) -> BigInt {
    let mut r = BigInt::from(r0);
    let (tb, nb) = (big(t), big(n));
    let mut prec = 1u32;
    while prec < k {
        prec = (2 * prec).min(k);
        let m = pow_u(p, prec);
        let fx = &r * &r - &tb * &r + &nb;
        let dfx = big(2) * &r - &tb;
        let inv = mod_inverse(&dfx, &m).expect("simple root");
        r = (&r - fx * inv).mod_floor(&m);
    }
    r.mod_floor(&pow_u(p, k))
}
