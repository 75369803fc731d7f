//! Full distribution of the von Neumann post-measurement entropy,
//! `P(S) = Σ_{MIE_F(δφᵢ) = S} p(δφᵢ) / |MIE_F'(δφᵢ)|`.

use std::cell::Cell;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::born::BornMeasure;
use super::forced::ForcedMie;
use crate::cft::{h_of_zeta, CftParams};
use crate::error::{Error, Result};
use crate::quad::{integrate_pieces, FixedRule, QuadOptions};

/// Samples of `MIE_F` on `[0, π]` used to seed root finding.
pub const CURVE_SAMPLES: usize = 4097;
/// Relative width of the excluded band at each support edge.
pub const GUARD_FRACTION: f64 = 1e-6;
/// Smallest slope accepted when converting a root into a density.
pub const MIN_SLOPE: f64 = 1e-14;
const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub delta_phi: f64,
    pub value: f64,
    pub derivative: f64,
}

/// `MIE_F` tabulated on `[0, π]`, verified non-decreasing.
#[derive(Debug, Clone)]
pub struct ForcedMieCurve {
    mie: ForcedMie,
    samples: Vec<CurveSample>,
}

impl ForcedMieCurve {
    pub fn new(params: &CftParams, points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::Domain(format!("need at least 3 curve samples, got {points}")));
        }
        let mie = ForcedMie::new(params)?;
        let samples: Vec<CurveSample> = (0..points)
            .map(|i| {
                let delta_phi = PI * i as f64 / (points - 1) as f64;
                let (value, derivative) = mie.value_and_derivative(delta_phi);
                CurveSample {
                    delta_phi,
                    value,
                    derivative,
                }
            })
            .collect();
        for w in samples.windows(2) {
            let slack = 64.0 * f64::EPSILON * w[0].value.abs().max(w[1].value.abs());
            if !(w[1].value >= w[0].value - slack) {
                return Err(Error::NotMonotone { at: w[1].delta_phi });
            }
        }
        Ok(Self { mie, samples })
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn forced_mie(&self) -> &ForcedMie {
        &self.mie
    }

    /// `(MIE_F(0), MIE_F(π))`.
    pub fn support(&self) -> (f64, f64) {
        (self.samples[0].value, self.samples[self.samples.len() - 1].value)
    }

    /// The root `δφ* ∈ (0, π)` of `MIE_F(δφ*) = s`, by bisection.
    pub fn invert(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !(s > lo && s < hi) {
            return Err(Error::RootNotBracketed { s, lo, hi });
        }
        let i = self.samples.partition_point(|c| c.value < s);
        let (mut a, mut b) = (self.samples[i - 1].delta_phi, self.samples[i].delta_phi);
        // relative to the distance from the nearer endpoint, where the
        // density is most sensitive to the root
        while b - a > ROOT_TOL * a.min(PI - b) {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.mie.value(m) < s {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Evaluator of `P(S)` and its integrals at one parameter point (`n = 1`).
#[derive(Debug, Clone)]
pub struct MieDensity {
    curve: ForcedMieCurve,
    born: BornMeasure,
}

impl MieDensity {
    pub fn new(params: &CftParams) -> Result<Self> {
        if params.n() != 1.0 {
            return Err(Error::Domain(format!(
                "the entropy distribution is defined for the von Neumann entropy, got n = {}",
                params.n()
            )));
        }
        Ok(Self {
            curve: ForcedMieCurve::new(params, CURVE_SAMPLES)?,
            born: BornMeasure::new(params)?,
        })
    }

    pub fn params(&self) -> &CftParams {
        self.born.params()
    }

    pub fn curve(&self) -> &ForcedMieCurve {
        &self.curve
    }

    pub fn support(&self) -> (f64, f64) {
        self.curve.support()
    }

    /// Width of the band excluded at each edge of the support.
    pub fn guard(&self) -> f64 {
        let (lo, hi) = self.support();
        GUARD_FRACTION * (hi - lo)
    }

    /// `P(S)` and its root `δφ*`, without guard-band checks.
    pub fn density_with_root(&self, s: f64) -> Result<(f64, f64)> {
        let root = self.curve.invert(s)?;
        let slope = self.curve.mie.derivative(root).abs();
        if slope < MIN_SLOPE {
            return Err(Error::Convergence(format!(
                "MIE_F slope {slope:e} at δφ = {root} (S = {s}) is too close to an endpoint"
            )));
        }
        // mirror root 2π − δφ* contributes equally
        Ok((2.0 * self.born.density(root) / slope, root))
    }

    pub fn density(&self, s: f64) -> Result<f64> {
        Ok(self.density_with_root(s)?.0)
    }

    /// `P(MIE ≤ s) = 2 ∫₀^{δφ*} p`.
    pub fn cdf(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if s <= lo {
            return Ok(0.0);
        }
        if s >= hi {
            return Ok(1.0);
        }
        let root = self.curve.invert(s)?;
        Ok(2.0 * self.born.mass(0.0, root)?)
    }

    /// Mean density over `[lo, hi]`, exact up to quadrature error.
    pub fn bin_density(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok((self.cdf(hi)? - self.cdf(lo)?) / (hi - lo))
    }

    /// `∫ f(S) P(S) dS` over the support. Between the guard bands the
    /// variable `S = S_min + (S_max − S_min)(1 − cos θ)/2` absorbs the
    /// inverse-square-root divergences at both edges; each guard band, where
    /// `S − S_min` sinks into the cancellation noise of `MIE_F`, contributes
    /// its exact Born mass at the band midpoint.
    pub fn integrate_against<F: Fn(f64) -> f64>(&self, f: F, tol: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        let range = hi - lo;
        let failure: Cell<Option<Error>> = Cell::new(None);
        let integrand = |theta: f64| {
            let s = lo + 0.5 * range * (1.0 - theta.cos());
            match self.density(s) {
                Ok(p) => f(s) * p * 0.5 * range * theta.sin(),
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        };
        let edge = |offset: f64| (1.0 - 2.0 * offset).acos();
        let guard = edge(GUARD_FRACTION);
        // geometric breaks towards both edges resolve the log-normal body
        let mut breaks = vec![guard, 0.5 * PI, PI - guard];
        for j in 1..GUARD_FRACTION.log10().abs().round() as i32 {
            let t = edge(10f64.powi(-j));
            breaks.extend([t, PI - t]);
        }
        breaks.sort_by(f64::total_cmp);
        // per-piece tolerances anchored to the scale of the whole integral
        let scale = FixedRule::on_breaks(&breaks).apply(&integrand).abs();
        let opts = QuadOptions::rel(tol).with_abs(tol * scale / breaks.len() as f64);
        let r = integrate_pieces(&integrand, &breaks, opts)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let g = self.guard();
        let bands = f(lo + 0.5 * g) * self.cdf(lo + g)? + f(hi - 0.5 * g) * (1.0 - self.cdf(hi - g)?);
        Ok(r.value + bands)
    }

    pub fn normalization(&self) -> Result<f64> {
        self.integrate_against(|_| 1.0, 1e-9)
    }

    /// Least-squares tail exponents and the log-normal fit.
    pub fn tail_fits(&self) -> Result<TailFits> {
        let (lo, hi) = self.support();
        let range = hi - lo;
        let offsets: Vec<f64> = (0..=16).map(|j| range * 10f64.powf(-10.0 + j as f64 / 8.0)).collect();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &o in &offsets {
            left.push((o.ln(), self.density(lo + o)?.ln()));
            right.push((o.ln(), self.density(hi - o)?.ln()));
        }
        let lognormal = {
            let (a, b) = ((10.0 * lo).max(1e-300), 0.1f64.min(0.5 * hi));
            if a < b {
                let pts: Vec<(f64, f64)> = (0..=24)
                    .map(|j| (a.ln() + (b / a).ln() * j as f64 / 24.0).exp())
                    .map(|s| Ok((s.ln(), (s * self.density(s)?).ln())))
                    .collect::<Result<_>>()?;
                fit_lognormal(&pts)
            } else {
                None
            }
        };
        Ok(TailFits {
            left_exponent: slope(&left),
            right_exponent: slope(&right),
            lognormal,
        })
    }
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Fits `ln(S P) = c₀ + c₁ ln S + c₂ ln² S`; returns `(μ, σ)` of `ln S`.
fn fit_lognormal(pts: &[(f64, f64)]) -> Option<LogNormalFit> {
    let design = DMatrix::from_fn(pts.len(), 3, |i, j| pts[i].0.powi(j as i32));
    let rhs = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let c = design.svd(true, true).solve(&rhs, 1e-14).ok()?;
    if c[2] >= 0.0 {
        return None;
    }
    let var = -0.5 / c[2];
    Some(LogNormalFit {
        mu: c[1] * var,
        sigma: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalFit {
    pub mu: f64,
    pub sigma: f64,
}

/// Log-log slopes of `P` against the distance to each support edge
/// (both `−1/2` for a square-root divergence), and the log-normal fit of
/// the small-S body when the window `[10 S_min, 0.1]` is nonempty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFits {
    pub left_exponent: f64,
    pub right_exponent: f64,
    pub lognormal: Option<LogNormalFit>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub s: f64,
    pub delta_phi: f64,
    pub density: f64,
}

/// `P(S)` on a grid, guard bands removed, with tail metadata.
#[derive(Debug, Clone)]
pub struct DistributionCurve {
    pub params: CftParams,
    pub support: (f64, f64),
    pub guard: f64,
    pub points: Vec<DensityPoint>,
    pub tails: TailFits,
}

/// Evaluates `P(S)` on `s_grid` (n = 1). Points inside the guard bands are
/// dropped; points outside the support are an error.
pub fn mie_distribution(params: &CftParams, s_grid: &[f64]) -> Result<DistributionCurve> {
    let dens = MieDensity::new(params)?;
    let (lo, hi) = dens.support();
    let guard = dens.guard();
    let mut points = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if !(s > lo && s < hi) {
            return Err(Error::RootNotBracketed { s, lo, hi });
        }
        if s < lo + guard || s > hi - guard {
            continue;
        }
        let (density, delta_phi) = dens.density_with_root(s)?;
        points.push(DensityPoint {
            s,
            delta_phi,
            density,
        });
    }
    Ok(DistributionCurve {
        params: *params,
        support: (lo, hi),
        guard,
        points,
        tails: dens.tail_fits()?,
    })
}

/// Small-S, small-ζ closed form: a log-normal in `S` with
/// `ln S ~ N(2g ln ζ, 4 g ln(1/ζ))`, up to an overall factor 2.
pub fn lognormal_tail(g: f64, zeta: f64, s: f64) -> f64 {
    let big_l = (1.0 / zeta).ln();
    let z = s.ln() - 2.0 * g * zeta.ln();
    (-z * z / (8.0 * g * big_l)).exp() / ((2.0 * PI * g * big_l).sqrt() * s)
}

/// Near-`ln 2`, small-ζ form of `P(S)` before dropping prefactors:
/// `√(g/2πh) (π / (g ln(1/ζ))) (2ΔS)^{−1/2} Σ_l [ζ^{2g(l+½+ε/2π)²} + ζ^{2g(l+½−ε/2π)²}]`
/// with `ΔS = ln 2 − S` and `ε = π √(2ΔS) / (g ln(1/ζ))`.
pub fn bell_pair_tail(g: f64, zeta: f64, s: f64) -> Result<f64> {
    let ds = 2f64.ln() - s;
    if !(ds > 0.0) {
        return Err(Error::Domain(format!("need S < ln 2, got {s}")));
    }
    let h = h_of_zeta(zeta)?;
    let big_l = (1.0 / zeta).ln();
    let eps = PI * (2.0 * ds).sqrt() / (g * big_l);
    let mut sum = 0.0;
    for l in -20..=20 {
        let c = l as f64 + 0.5;
        for y in [c + eps / (2.0 * PI), c - eps / (2.0 * PI)] {
            sum += (2.0 * g * y * y * zeta.ln()).exp();
        }
    }
    Ok((g / (2.0 * PI * h)).sqrt() * PI / (g * big_l) / (2.0 * ds).sqrt() * sum)
}
