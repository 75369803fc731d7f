//! Born measure over Dirichlet mismatches, `p(δφ) ∝ Z_{C(1),δφ}`.

use std::f64::consts::PI;

use crate::cft::{BoundaryMismatch, CftParams};
use crate::error::Result;
use crate::quad::{integrate_pieces, QuadOptions};
use crate::special;

/// Below this cross-ratio expectations are integrated in the rescaled
/// variable `u = δφ / √(h/g)`.
pub const RESCALE_BELOW_ZETA: f64 = 1e-3;

/// `p(δφ) = Z_{C(1),δφ} / ∫₀^{2π} Z_{C(1),δφ'} dδφ'` with the normaliser
/// obtained once by quadrature.
#[derive(Debug, Clone, Copy)]
pub struct BornMeasure {
    params: CftParams,
    a1: f64,
    log_norm: f64,
}

impl BornMeasure {
    pub fn new(params: &CftParams) -> Result<Self> {
        let a1 = params.winding_coefficient(1.0);
        // the eta factor is δφ-independent and cancels in the ratio
        let theta = |d: f64| special::theta(a1, d / (2.0 * PI)).value();
        let half = integrate_pieces(
            theta,
            &[0.0, 0.5 * PI, PI],
            QuadOptions::rel(1e-12),
        )?;
        Ok(Self {
            params: *params,
            a1,
            log_norm: (2.0 * half.value).ln(),
        })
    }

    pub fn params(&self) -> &CftParams {
        &self.params
    }

    /// `∫₀^{2π} Σ_w q₁^{g (w + δφ/2π)²} dδφ`.
    pub fn normalizer(&self) -> f64 {
        self.log_norm.exp()
    }

    pub fn log_density(&self, delta_phi: f64) -> f64 {
        let x = BoundaryMismatch::new(delta_phi).fraction();
        special::theta(self.a1, x).log_value() - self.log_norm
    }

    pub fn density(&self, delta_phi: f64) -> f64 {
        self.log_density(delta_phi).exp()
    }

    /// Width `√(h/g)` of the Gaussian the measure approaches as `ζ → 0`.
    pub fn width(&self) -> f64 {
        (self.params.h() / self.params.g()).sqrt()
    }

    /// `E[f(δφ)] = 2 ∫₀^π p(δφ) f(δφ) dδφ`, using `δφ ↔ 2π − δφ` symmetry of
    /// `f`.
    pub fn expectation<F: FnMut(f64) -> f64>(&self, mut f: F, opts: QuadOptions) -> Result<f64> {
        if self.params.zeta() < RESCALE_BELOW_ZETA {
            let sigma = self.width();
            let top = PI / sigma;
            let mut breaks: Vec<f64> = (0..).map(f64::from).take_while(|&u| u < top).collect();
            breaks.push(top);
            let r = integrate_pieces(
                |u| sigma * self.density(sigma * u) * f(sigma * u),
                &breaks,
                opts,
            )?;
            Ok(2.0 * r.value)
        } else {
            let r = integrate_pieces(
                |d| self.density(d) * f(d),
                &[0.0, 0.25 * PI, 0.5 * PI, 0.75 * PI, PI],
                opts,
            )?;
            Ok(2.0 * r.value)
        }
    }

    /// Probability mass of `[lo, hi] ⊂ [0, π]`.
    pub fn mass(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok(crate::quad::integrate(|d| self.density(d), lo, hi, QuadOptions::rel(1e-12))?.value)
    }
}

/// `p(δφ)` for the parameters in `params`.
pub fn born_measure(params: &CftParams, delta_phi: f64) -> Result<f64> {
    Ok(BornMeasure::new(params)?.density(delta_phi))
}
