use serde::Serialize;

use crate::error::{Error, Result};
use crate::number_field::NumberField;

/// `(√|D_K|)^j · const_K^{-(n+1)} · Π_v ρ_v`.
pub fn rho_tilde(j: u32, n: usize, rho_v: &[f64], field: NumberField) -> f64 {
    field.sqrt_abs_disc().powi(j as i32) * field.field_constant().powi(-(n as i32 + 1)) * rho_v.iter().product::<f64>()
}

/// The constants of the measure estimate for `f: X → K_S^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropConstants {
    pub rho_v: Vec<f64>,
    pub rho_tilde: f64,
    pub rho: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
    pub eps0: f64,
    pub alpha: f64,
}

/// Inputs of [`prop_constants`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropInputs {
    pub n: usize,
    pub c: f64,
    pub alpha: f64,
    /// Federer constant.
    pub d: f64,
    pub n_x: f64,
    pub s_r: usize,
    pub s_c: usize,
}

/// `ρ = min(1, ρ̃)` with `ρ̃` taken at rank one,
/// `C̃ = C (N_X D²)^{n+1} (n+1)^{1 + α|S_r|/2 + α|S_c|} (√|D_K|/ρ)^α` and
/// `ε₀ = min(ρ/√|D_K|, (1/C̃)^{1/α}(1 - 10⁻⁶))`.
pub fn prop_constants(inp: &PropInputs, field: NumberField, rho_v: &[f64]) -> Result<PropConstants> {
    let positive = [inp.c, inp.alpha, inp.d, inp.n_x].iter().all(|x| *x > 0.0 && x.is_finite());
    if !positive || rho_v.is_empty() || rho_v.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::invalid("constants and every ρ_v must be positive"));
    }
    let rt = rho_tilde(1, inp.n, rho_v, field);
    let rho = rt.min(1.0);
    let sd = field.sqrt_abs_disc();
    let n1 = (inp.n + 1) as f64;
    let c_tilde = inp.c
        * (inp.n_x * inp.d * inp.d).powf(n1)
        * n1.powf(1.0 + inp.alpha * inp.s_r as f64 / 2.0 + inp.alpha * inp.s_c as f64)
        * (sd / rho).powf(inp.alpha);
    let eps0 = (rho / sd).min((1.0 / c_tilde).powf(1.0 / inp.alpha) * (1.0 - 1e-6));
    Ok(PropConstants {
        rho_v: rho_v.to_vec(),
        rho_tilde: rt,
        rho,
        c_tilde,
        eps0,
        alpha: inp.alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_tilde_examples() {
        let q = NumberField::rationals();
        assert_eq!(rho_tilde(1, 2, &[0.5, 0.25], q), 0.125);
        let g = NumberField::gaussian();
        let want = std::f64::consts::PI.powi(2) / 8.0;
        assert!((rho_tilde(1, 1, &[1.0], g) - want).abs() < 1e-12);
        assert_eq!(rho_tilde(1, 1, &[0.0, 1.0], q), 0.0);
    }

    #[test]
    fn minimal_case() {
        let inp = PropInputs {
            n: 1,
            c: 1.0,
            alpha: 1.0,
            d: 3.0,
            n_x: 2.0,
            s_r: 1,
            s_c: 0,
        };
        let k = prop_constants(&inp, NumberField::rationals(), &[1.0]).unwrap();
        let want = 18f64.powi(2) * 2f64.powf(1.5);
        assert!((k.c_tilde - want).abs() / want < 1e-12);
        assert_eq!(k.rho, 1.0);
        assert!(k.c_tilde * k.eps0 < 1.0);
        assert!((k.eps0 - 1.0 / want).abs() / k.eps0 < 1e-5);
    }

    #[test]
    fn larger_federer_constant_shrinks_eps0() {
        let mut inp = PropInputs {
            n: 2,
            c: 4.0 * 3f64.sqrt(),
            alpha: 0.5,
            d: 3.0,
            n_x: 2.0,
            s_r: 1,
            s_c: 0,
        };
        let q = NumberField::rationals();
        let a = prop_constants(&inp, q, &[0.3]).unwrap();
        inp.d = 4.0;
        let b = prop_constants(&inp, q, &[0.3]).unwrap();
        assert!(b.eps0 < a.eps0);
        assert!(a.c_tilde * a.eps0.powf(a.alpha) < 1.0);
        assert!(a.eps0 <= a.rho);
    }

    #[test]
    fn rejects_zero_rho() {
        let inp = PropInputs {
            n: 1,
            c: 1.0,
            alpha: 1.0,
            d: 3.0,
            n_x: 2.0,
            s_r: 1,
            s_c: 0,
        };
        assert!(prop_constants(&inp, NumberField::rationals(), &[0.0]).is_err());
    }
}
