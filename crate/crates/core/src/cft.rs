//! Compact-boson cylinder partition functions with Dirichlet boundaries.
//!
//! The slit geometry maps conformally to a cylinder of circumference `2π`
//! and length `h(ζ)/n`. Its partition function with boundary mismatch `δφ`
//! is `Z_{C(n),δφ} = η(q_n)⁻¹ Σ_w q_n^{g (w + δφ/2π)²}` with nome
//! `q_n = exp(−2π² n / h(ζ))`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{self, EulerProduct, ThetaEval};

/// Cylinder length `h(ζ) = 2π K(k) / K(√(1 − k²))` with
/// `k = (1 − √(1−ζ)) / (1 + √(1−ζ))`.
pub fn h_of_zeta(zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::Domain(format!("cross-ratio must lie in (0, 1), got {zeta}")));
    }
    // k and k' in cancellation-free form
    let s = (1.0 - zeta).sqrt();
    let k = zeta / ((1.0 + s) * (1.0 + s));
    let k_comp = 2.0 * s.sqrt() / (1.0 + s);
    Ok(2.0 * PI * special::agm(1.0, k) / special::agm(1.0, k_comp))
}

/// Dirichlet mismatch between the two measured arcs, reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BoundaryMismatch(f64);

impl BoundaryMismatch {
    pub fn new(delta_phi: f64) -> Self {
        let r = delta_phi.rem_euclid(2.0 * PI);
        Self(if r >= 2.0 * PI { 0.0 } else { r })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Position on the unit winding lattice, `δφ / 2π ∈ [0, 1)`.
    pub fn fraction(self) -> f64 {
        self.0 / (2.0 * PI)
    }
}

impl From<f64> for BoundaryMismatch {
    fn from(v: f64) -> Self {
        Self::new(v)
    }
}

/// Luttinger parameter `g`, Rényi index `n` and cross-ratio `ζ`, with the
/// derived cylinder length cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CftParams {
    g: f64,
    n: f64,
    zeta: f64,
    h: f64,
}

impl CftParams {
    pub fn new(g: f64, n: f64, zeta: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Domain(format!("Luttinger parameter must be positive, got {g}")));
        }
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain(format!("Rényi index must be positive, got {n}")));
        }
        let h = h_of_zeta(zeta)?;
        Ok(Self { g, n, zeta, h })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn with_n(&self, n: f64) -> Result<Self> {
        Self::new(self.g, n, self.zeta)
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(g, self.n, self.zeta)
    }

    /// `ln q_m = −2π² m / h`.
    pub fn log_nome(&self, replica_n: f64) -> f64 {
        -2.0 * PI * PI * replica_n / self.h
    }

    pub fn nome(&self, replica_n: f64) -> f64 {
        self.log_nome(replica_n).exp()
    }

    /// Gaussian coefficient of the winding sum on `C(m)`: `a = g |ln q_m|`.
    pub fn winding_coefficient(&self, replica_n: f64) -> f64 {
        -self.g * self.log_nome(replica_n)
    }

    pub fn theta(&self, replica_n: f64, delta_phi: BoundaryMismatch) -> ThetaEval {
        special::theta(self.winding_coefficient(replica_n), delta_phi.fraction())
    }

    pub fn euler_product(&self, replica_n: f64) -> Result<EulerProduct> {
        let q = self.nome(replica_n);
        if q == 0.0 {
            // far below the 1e-17 truncation threshold
            return Ok(EulerProduct {
                log_product: 0.0,
                log_derivative: 0.0,
            });
        }
        special::euler_product(q)
    }

    /// `ln Z_{C(m),δφ} + (1/24) ln q_m`, i.e. the log partition function
    /// without the Casimir factor.
    pub fn log_z_reduced(&self, replica_n: f64, delta_phi: BoundaryMismatch) -> Result<f64> {
        if !(replica_n > 0.0) {
            return Err(Error::Domain(format!("replica index must be positive, got {replica_n}")));
        }
        let theta = self.theta(replica_n, delta_phi);
        Ok(theta.log_value() - self.euler_product(replica_n)?.log_product)
    }
}

/// `Z_{C(m),δφ} = η(q_m)⁻¹ Σ_w q_m^{g (w + δφ/2π)²}`.
pub fn z_cylinder(params: &CftParams, replica_n: f64, delta_phi: f64) -> Result<f64> {
    let reduced = params.log_z_reduced(replica_n, BoundaryMismatch::new(delta_phi))?;
    Ok((reduced - params.log_nome(replica_n) / 24.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{dedekind_eta, theta_winding};

    #[test]
    fn self_dual_point() {
        let zeta = 12.0 * 2f64.sqrt() - 16.0;
        let h = h_of_zeta(zeta).unwrap();
        assert!((h - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn domain_checks() {
        assert!(h_of_zeta(0.0).is_err());
        assert!(h_of_zeta(1.0).is_err());
        assert!(CftParams::new(-1.0, 1.0, 0.5).is_err());
        assert!(CftParams::new(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn h_is_increasing() {
        let mut prev = 0.0;
        for i in 1..200 {
            let z = i as f64 / 200.0;
            let h = h_of_zeta(z).unwrap();
            assert!(h > prev);
            prev = h;
        }
    }

    #[test]
    fn mismatch_reduction() {
        let a = BoundaryMismatch::new(PI);
        let b = BoundaryMismatch::new(3.0 * PI);
        assert!((a.value() - b.value()).abs() < 1e-15);
        assert!(BoundaryMismatch::new(-0.5).value() > 0.0);
    }

    #[test]
    fn z_cylinder_composition_at_self_dual_point() {
        let zeta = 12.0 * 2f64.sqrt() - 16.0;
        let p = CftParams::new(1.0, 1.0, zeta).unwrap();
        let q = (-PI).exp();
        assert!((p.nome(1.0) / q - 1.0).abs() < 1e-12);
        for &d in &[0.0, 1.0, PI] {
            let direct = theta_winding(q, 1.0, d).unwrap() / dedekind_eta(q).unwrap();
            let z = z_cylinder(&p, 1.0, d).unwrap();
            assert!((z / direct - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn z_cylinder_periodic_and_maximal_at_zero() {
        let p = CftParams::new(0.7, 1.0, 0.3).unwrap();
        let z0 = z_cylinder(&p, 1.0, 0.0).unwrap();
        for i in 1..64 {
            let d = 2.0 * PI * i as f64 / 64.0;
            assert!(z_cylinder(&p, 1.0, d).unwrap() < z0);
        }
        let a = z_cylinder(&p, 1.0, PI).unwrap();
        let b = z_cylinder(&p, 1.0, 3.0 * PI).unwrap();
        assert!((a / b - 1.0).abs() < 1e-14);
    }
}
