//! Small-ζ asymptotics of the cumulants: the controlling integral over the
//! leading winding terms and the three-branch scaling law.

use std::f64::consts::PI;

use crate::cft::h_of_zeta;
use crate::error::{Error, Result};
use crate::quad::{integrate_pieces, QuadOptions};

/// Cross-ratios above this are outside the asymptotic regime.
pub const ASYMPTOTIC_ZETA_MAX: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingBranch {
    /// `n > 1/2l`: `ζ^{g/2} / √ln(1/ζ)`
    LogSuppressed,
    /// `n = 1/2l`: `ζ^{g/2}`
    Marginal,
    /// `0 < n < 1/2l`: `ζ^{2gnl(1−nl)}`
    PowerLaw,
}

impl ScalingBranch {
    pub fn select(l: usize, n: f64) -> Self {
        let nl = n * l as f64;
        if (nl - 0.5).abs() <= 1e-12 {
            Self::Marginal
        } else if nl > 0.5 {
            Self::LogSuppressed
        } else {
            Self::PowerLaw
        }
    }

    /// The scaling form evaluated at `ζ`, without its constant prefactor.
    pub fn law(self, l: usize, n: f64, g: f64, zeta: f64) -> f64 {
        match self {
            Self::LogSuppressed => zeta.powf(0.5 * g) / (1.0 / zeta).ln().sqrt(),
            Self::Marginal => zeta.powf(0.5 * g),
            Self::PowerLaw => {
                let nl = n * l as f64;
                zeta.powf(2.0 * g * nl * (1.0 - nl))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticCumulant {
    /// `(1/√h) ∫₀^π e^{−gδφ²/2h} B(δφ)^l dδφ`
    pub controlling_integral: f64,
    pub branch: ScalingBranch,
    pub scaling_law: f64,
    /// `false` when `ζ` exceeds [`ASYMPTOTIC_ZETA_MAX`].
    pub in_regime: bool,
}

/// Leading-winding bracket
/// `B = (e^{−An(1−t)} − n e^{−A(1−t)}) / (1−n)` with `A = 2π²g/h`,
/// `t = δφ/π`; at `n = 1` its limit `(A(1−t) + 1) e^{−A(1−t)}`.
fn bracket(big_a: f64, n: f64, t: f64) -> f64 {
    let u = big_a * (1.0 - t);
    if n == 1.0 {
        (u + 1.0) * (-u).exp()
    } else {
        ((-u * n).exp() - n * (-u).exp()) / (1.0 - n)
    }
}

pub fn asymptotic_cumulant(l: usize, n: f64, g: f64, zeta: f64) -> Result<AsymptoticCumulant> {
    if l == 0 {
        return Err(Error::Domain("cumulant order must be at least 1".into()));
    }
    if !(n > 0.0 && g > 0.0) {
        return Err(Error::Domain(format!("need n > 0 and g > 0, got n={n}, g={g}")));
    }
    let h = h_of_zeta(zeta)?;
    let big_a = 2.0 * PI * PI * g / h;
    let integrand = |d: f64| (-g * d * d / (2.0 * h)).exp() * bracket(big_a, n, d / PI).powi(l as i32);
    let breaks: Vec<f64> = (0..=16).map(|i| PI * i as f64 / 16.0).collect();
    let r = integrate_pieces(integrand, &breaks, QuadOptions::rel(1e-11))?;
    let branch = ScalingBranch::select(l, n);
    Ok(AsymptoticCumulant {
        controlling_integral: r.value / h.sqrt(),
        branch,
        scaling_law: branch.law(l, n, g, zeta),
        in_regime: zeta < ASYMPTOTIC_ZETA_MAX,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_selection() {
        assert_eq!(ScalingBranch::select(1, 1.0), ScalingBranch::LogSuppressed);
        assert_eq!(ScalingBranch::select(2, 0.25), ScalingBranch::Marginal);
        assert_eq!(ScalingBranch::select(3, 0.1), ScalingBranch::PowerLaw);
        let a = asymptotic_cumulant(1, 0.5, 1.0, 1e-6).unwrap();
        assert_eq!(a.branch, ScalingBranch::Marginal);
        assert!((a.scaling_law - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn power_law_exponent_from_slope() {
        for &(l, n, g) in &[(1usize, 0.2, 1.0), (2, 0.1, 1.0), (1, 0.3, 0.5)] {
            let (z1, z2) = (1e-40, 1e-44);
            let i1 = asymptotic_cumulant(l, n, g, z1).unwrap().controlling_integral;
            let i2 = asymptotic_cumulant(l, n, g, z2).unwrap().controlling_integral;
            let slope = (i1 / i2).ln() / (z1 / z2).ln();
            let nl = n * l as f64;
            let expected = 2.0 * g * nl * (1.0 - nl);
            assert!((slope / expected - 1.0).abs() < 0.02, "l={l} n={n}: {slope} vs {expected}");
        }
    }

    #[test]
    fn regime_flag() {
        assert!(!asymptotic_cumulant(1, 1.0, 1.0, 0.1).unwrap().in_regime);
        assert!(asymptotic_cumulant(1, 1.0, 1.0, 1e-4).unwrap().in_regime);
    }
}
