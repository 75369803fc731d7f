//! Cumulants of MIE as cumulants of `MIE_F(δφ)` under the Born measure,
//! and DIE as the uniform average of `MIE_F`.

use std::f64::consts::PI;

use super::born::BornMeasure;
use super::forced::ForcedMie;
use crate::cft::CftParams;
use crate::error::{Error, Result};
use crate::quad::{adaptive_breaks, integrate_pieces, FixedRule, QuadOptions};

pub const CUMULANT_TOL: f64 = 1e-10;

/// `κ₁ … κ₄` of the post-measurement entropy at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSet {
    pub params: CftParams,
    pub kappa: [f64; 4],
}

impl CumulantSet {
    /// Cumulant of order `l ∈ 1..=4`.
    pub fn get(&self, l: usize) -> Result<f64> {
        check_order(l)?;
        Ok(self.kappa[l - 1])
    }
}

fn check_order(l: usize) -> Result<()> {
    if (1..=4).contains(&l) {
        Ok(())
    } else {
        Err(Error::Domain(format!("cumulant order must be 1..=4, got {l}")))
    }
}

/// Mean and central moments `μ₂, μ₃, μ₄` of `MIE_F` under `p(δφ)`, each by
/// its own adaptive pass.
pub fn central_moments(params: &CftParams) -> Result<[f64; 4]> {
    let born = BornMeasure::new(params)?;
    let mie = ForcedMie::new(params)?;
    let mean = born.expectation(|d| mie.value(d), QuadOptions::rel(CUMULANT_TOL))?;
    let mu2 = born.expectation(
        |d| (mie.value(d) - mean).powi(2),
        QuadOptions::rel(CUMULANT_TOL),
    )?;
    let mut out = [mean, mu2, 0.0, 0.0];
    for k in 3..=4 {
        // signed integrand: anchor the absolute tolerance to the spread
        let opts = QuadOptions::rel(CUMULANT_TOL).with_abs(1e-14 * mu2.powf(k as f64 / 2.0));
        out[k - 1] = born.expectation(|d| (mie.value(d) - mean).powi(k as i32), opts)?;
    }
    Ok(out)
}

/// All four cumulants via central moments.
pub fn mie_cumulants(params: &CftParams) -> Result<CumulantSet> {
    let [m1, m2, m3, m4] = central_moments(params)?;
    Ok(CumulantSet {
        params: *params,
        kappa: [m1, m2, m3, m4 - 3.0 * m2 * m2],
    })
}

/// `κ_l` of the Rényi-`n` post-measurement entropy.
pub fn mie_cumulant(params: &CftParams, order: usize) -> Result<f64> {
    check_order(order)?;
    mie_cumulants(params)?.get(order)
}

/// `κ₁, κ₂, κ₃` from the cumulant generating function
/// `K(k) = ln E[exp(k (1−n) MIE_F)]`, differentiated by central finite
/// differences at `k ∈ {±δ, ±2δ, ±3δ}` and rescaled by `(1−n)^{−l}`. At
/// `n = 1` the factor `(1−n)` is replaced by 1, the generating function of
/// the von Neumann entropy itself.
///
/// `E` is evaluated on one fixed quadrature rule shared by all `k`, so
/// discretisation errors cancel in the differences.
pub fn cgf_cumulants(params: &CftParams, delta: f64) -> Result<[f64; 3]> {
    let born = BornMeasure::new(params)?;
    let mie = ForcedMie::new(params)?;
    let n = params.n();
    let c = if n == 1.0 { 1.0 } else { 1.0 - n };

    let mean = born.expectation(|d| mie.value(d), QuadOptions::rel(CUMULANT_TOL))?;
    let opts = QuadOptions::rel(1e-12);
    let mut breaks = vec![0.0, PI];
    breaks.extend(adaptive_breaks(|d| born.density(d), 0.0, PI, opts)?);
    breaks.extend(adaptive_breaks(|d| born.density(d) * mie.value(d), 0.0, PI, opts)?);
    breaks.extend(adaptive_breaks(
        |d| born.density(d) * (mie.value(d) - mean).powi(2),
        0.0,
        PI,
        opts,
    )?);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let rule = FixedRule::on_breaks(&breaks);

    let weights: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&d, &w)| (w * born.density(d), mie.value(d)))
        .collect();
    let total: f64 = weights.iter().map(|(w, _)| w).sum();
    let centre = weights.iter().map(|(w, s)| w * s).sum::<f64>() / total;
    // ln E[e^{t(S − centre)}] = ln(1 + E[e^x − 1 − x]); the remainder is
    // non-negative termwise, so nothing cancels
    let cgf = |k: f64| {
        let t = k * c;
        let excess: f64 = weights.iter().map(|&(w, s)| w * exp_excess(t * (s - centre))).sum();
        (excess / total).ln_1p()
    };

    let kp: Vec<f64> = (1..=3).map(|j| cgf(j as f64 * delta)).collect();
    let km: Vec<f64> = (1..=3).map(|j| cgf(-(j as f64) * delta)).collect();
    let d1 = |j: usize| (kp[j] - km[j]) / (2.0 * (j + 1) as f64 * delta);
    let d2 = |j: usize| (kp[j] + km[j]) / ((j + 1) as f64 * delta).powi(2);
    // Richardson over steps δ and 2δ
    let k1 = (4.0 * d1(0) - d1(1)) / 3.0 + c * centre;
    let k2 = (4.0 * d2(0) - d2(1)) / 3.0;
    // fourth-order central stencil for the third derivative
    let k3 = (-(kp[2] - km[2]) + 8.0 * (kp[1] - km[1]) - 13.0 * (kp[0] - km[0]))
        / (8.0 * delta.powi(3));
    Ok([k1 / c, k2 / (c * c), k3 / (c * c * c)])
}

/// `e^x − 1 − x` without cancellation for small `|x|`.
fn exp_excess(x: f64) -> f64 {
    if x.abs() > 0.5 {
        return x.exp_m1() - x;
    }
    let mut term = 0.5 * x * x;
    let mut sum = term;
    for j in 3..30 {
        term *= x / j as f64;
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

/// `DIE = (1/2π) ∫₀^{2π} MIE_F(δφ) dδφ`.
pub fn die(params: &CftParams) -> Result<f64> {
    let mie = ForcedMie::new(params)?;
    let r = integrate_pieces(
        |d| mie.value(d),
        &[0.0, 0.5 * PI, 0.75 * PI, PI],
        QuadOptions::rel(CUMULANT_TOL),
    )?;
    Ok(r.value / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_checked() {
        let p = CftParams::new(1.0, 1.0, 0.3).unwrap();
        assert!(mie_cumulant(&p, 0).is_err());
        assert!(mie_cumulant(&p, 5).is_err());
    }

    #[test]
    fn cgf_path_agrees() {
        for &(g, zeta, n) in &[(1.0, 0.1, 1.0), (0.5, 0.4, 2.0), (1.5, 0.02, 1.0)] {
            let p = CftParams::new(g, n, zeta).unwrap();
            let m = mie_cumulants(&p).unwrap();
            let c = cgf_cumulants(&p, 1e-3).unwrap();
            for l in 0..3 {
                let rel = (m.kappa[l] - c[l]).abs() / m.kappa[l].abs();
                assert!(rel < 1e-6, "g={g} ζ={zeta} n={n} κ{}: {} vs {}", l + 1, m.kappa[l], c[l]);
            }
        }
    }

    #[test]
    fn die_exceeds_mie_at_small_zeta() {
        for &zeta in &[1e-4, 1e-3, 1e-2] {
            let p = CftParams::new(1.0, 1.0, zeta).unwrap();
            assert!(die(&p).unwrap() > mie_cumulant(&p, 1).unwrap());
        }
    }

    #[test]
    fn spread_shrinks_relative_to_mean_as_regions_merge() {
        let ratio = |z: f64| {
            let c = mie_cumulants(&CftParams::new(1.0, 1.0, z).unwrap()).unwrap();
            c.kappa[1] / c.kappa[0]
        };
        assert!(ratio(0.99) < ratio(0.9));
        assert!(ratio(0.9) < ratio(0.6));
    }
}
