//! Forced MIE: entanglement entropy of A for a single Dirichlet mismatch.

use std::f64::consts::PI;

use crate::cft::{BoundaryMismatch, CftParams};
use crate::error::Result;
use crate::special::{ThetaEval, ThetaForm};

/// Evaluator of `MIE_F(δφ)` at fixed parameters, with the δφ-independent
/// eta-function contributions precomputed.
///
/// For `n ≠ 1` this is `(1/(1−n)) ln(Z_{C(n),δφ} / Z_{C(1),δφ}ⁿ)`; at `n = 1`
/// the replica limit is taken analytically, giving the entropy of the
/// winding-sector weights plus the oscillator part. The `q^{1/24}` factors
/// cancel identically in both cases.
#[derive(Debug, Clone, Copy)]
pub struct ForcedMie {
    params: CftParams,
    a1: f64,
    an: f64,
    eta_term: f64,
}

impl ForcedMie {
    pub fn new(params: &CftParams) -> Result<Self> {
        let n = params.n();
        let p1 = params.euler_product(1.0)?;
        let eta_term = if n == 1.0 {
            // −d/dn [ln η(q_n) − n ln η(q_1)] at n = 1, Casimir parts removed
            -p1.log_product + 2.0 * PI * PI / params.h() * p1.log_derivative
        } else {
            let pn = params.euler_product(n)?;
            -(pn.log_product - n * p1.log_product) / (1.0 - n)
        };
        Ok(Self {
            params: *params,
            a1: params.winding_coefficient(1.0),
            an: params.winding_coefficient(n),
            eta_term,
        })
    }

    pub fn params(&self) -> &CftParams {
        &self.params
    }

    fn thetas(&self, delta_phi: f64) -> (ThetaEval, ThetaEval) {
        let x = BoundaryMismatch::new(delta_phi).fraction();
        let t1 = crate::special::theta(self.a1, x);
        let tn = crate::special::theta(self.an, x);
        (t1, tn)
    }

    /// `MIE_F(δφ)`.
    pub fn value(&self, delta_phi: f64) -> f64 {
        self.value_and_derivative(delta_phi).0
    }

    /// `d MIE_F / dδφ`.
    pub fn derivative(&self, delta_phi: f64) -> f64 {
        self.value_and_derivative(delta_phi).1
    }

    pub fn value_and_derivative(&self, delta_phi: f64) -> (f64, f64) {
        let n = self.params.n();
        if n == 1.0 {
            let x = BoundaryMismatch::new(delta_phi).fraction();
            let t = crate::special::theta(self.a1, x);
            return (t.entropy() + self.eta_term, t.entropy_x() / (2.0 * PI));
        }
        let (t1, tn) = self.thetas(delta_phi);
        let both_direct = t1.form == ThetaForm::Direct && tn.form == ThetaForm::Direct;
        let (log_ratio, d_log_ratio) = if both_direct {
            // the Gaussian leads cancel exactly between Θ(n a) and Θ(a)ⁿ
            (tn.excess - n * t1.excess, tn.excess_x - n * t1.excess_x)
        } else {
            (tn.log_value() - n * t1.log_value(), tn.d_x() - n * t1.d_x())
        };
        (
            log_ratio / (1.0 - n) + self.eta_term,
            d_log_ratio / ((1.0 - n) * 2.0 * PI),
        )
    }
}

/// Forced MIE at the Rényi index carried by `params`.
pub fn forced_mie(params: &CftParams, delta_phi: f64) -> Result<f64> {
    Ok(ForcedMie::new(params)?.value(delta_phi))
}

/// Von Neumann forced MIE, the analytic `n → 1` limit. The Rényi index
/// stored in `params` is ignored.
pub fn forced_mie_vn_limit(params: &CftParams, delta_phi: f64) -> Result<f64> {
    forced_mie(&params.with_n(1.0)?, delta_phi)
}

/// `d MIE_F / dδφ` at the Rényi index carried by `params`.
pub fn forced_mie_derivative(params: &CftParams, delta_phi: f64) -> Result<f64> {
    Ok(ForcedMie::new(params)?.derivative(delta_phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cft::z_cylinder;

    fn literal(params: &CftParams, delta_phi: f64) -> f64 {
        let n = params.n();
        let zn = z_cylinder(params, n, delta_phi).unwrap();
        let z1 = z_cylinder(params, 1.0, delta_phi).unwrap();
        (zn.ln() - n * z1.ln()) / (1.0 - n)
    }

    #[test]
    fn matches_partition_function_ratio() {
        for &zeta in &[0.05, 0.3, 0.7, 0.95] {
            for &n in &[0.5, 2.0, 3.0] {
                let p = CftParams::new(1.0, n, zeta).unwrap();
                for &d in &[0.0, 0.7, 2.0, PI] {
                    let a = forced_mie(&p, d).unwrap();
                    let b = literal(&p, d);
                    assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "ζ={zeta} n={n} δφ={d}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn von_neumann_limit_matches_symmetric_difference() {
        let step = 1e-4;
        for &zeta in &[0.02, 0.2, 0.6] {
            for &g in &[0.5, 1.0] {
                for &d in &[0.0, 1.0, 2.5, PI] {
                    let p = CftParams::new(g, 1.0, zeta).unwrap();
                    let vn = forced_mie_vn_limit(&p, d).unwrap();
                    let up = forced_mie(&p.with_n(1.0 + step).unwrap(), d).unwrap();
                    let dn = forced_mie(&p.with_n(1.0 - step).unwrap(), d).unwrap();
                    assert!((vn - 0.5 * (up + dn)).abs() < 1e-6, "ζ={zeta} g={g} δφ={d}");
                }
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let step = 1e-6;
        for &n in &[1.0, 2.0, 0.5] {
            let m = ForcedMie::new(&CftParams::new(0.8, n, 0.1).unwrap()).unwrap();
            for &d in &[0.3, 1.5, 2.9] {
                let fd = (m.value(d + step) - m.value(d - step)) / (2.0 * step);
                assert!((fd - m.derivative(d)).abs() < 1e-7 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn bell_pair_at_small_zeta() {
        let p = CftParams::new(1.0, 1.0, 1e-6).unwrap();
        let top = forced_mie(&p, PI).unwrap();
        assert!((top - 2f64.ln()).abs() < 1e-6);
        let bottom = forced_mie(&p, 0.0).unwrap();
        assert!(bottom > 0.0 && bottom < 1e-9);
    }

    #[test]
    fn even_and_periodic() {
        let m = ForcedMie::new(&CftParams::new(1.0, 2.0, 0.3).unwrap()).unwrap();
        for &d in &[0.2, 1.1, 3.0] {
            assert!((m.value(d) - m.value(2.0 * PI - d)).abs() < 1e-14);
            assert!((m.value(d) - m.value(d + 4.0 * PI)).abs() < 1e-13);
        }
    }
}
