//! Replica winding function `W^{(n)}_{k₁,k₂}` in its lattice-sum form and in
//! its analytically continued integral form.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quad::{integrate_pieces, QuadOptions};
use crate::special;

/// Largest `k₁ + k₂` accepted by the lattice sum.
pub const MAX_DIRECT_REPLICAS: usize = 4;
const SHELL_TOL: f64 = 1e-12;
const MAX_TERMS: f64 = 5e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingSpec {
    pub k1: usize,
    pub k2: usize,
    pub n: f64,
    pub g: f64,
    pub h: f64,
}

impl WindingSpec {
    pub fn new(k1: usize, k2: usize, n: f64, g: f64, h: f64) -> Result<Self> {
        if !(n > 0.0 && g > 0.0 && h > 0.0) {
            return Err(Error::Domain(format!(
                "winding function needs n, g, h > 0, got n={n} g={g} h={h}"
            )));
        }
        Ok(Self { k1, k2, n, g, h })
    }

    pub fn replicas(&self) -> usize {
        self.k1 + self.k2
    }

    /// `2π² n g / h`, so that each term is `exp(−c wᵀTw) = q_n^{g wᵀTw}`.
    fn coupling(&self) -> f64 {
        2.0 * PI * PI * self.n * self.g / self.h
    }

    /// `T = Λ MᵀM Λ`, with `M` the top-left `(k₁+k₂)` block of the
    /// reflection taking `μ = (1^{k₁}, n^{−1/2 (k₂+1)})` onto `|μ| e_last`.
    pub fn coupling_matrix(&self) -> DMatrix<f64> {
        let k = self.replicas();
        let s = 1.0 / self.n.sqrt();
        let mu = DVector::from_fn(k + 1, |i, _| if i < self.k1 { 1.0 } else { s });
        let mut gamma = mu.clone();
        gamma[k] -= mu.norm();
        let r = DMatrix::identity(k + 1, k + 1) - 2.0 * &gamma * gamma.transpose() / gamma.norm_squared();
        let m = r.view((0, 0), (k, k)).into_owned();
        let lambda = DMatrix::from_diagonal(&DVector::from_fn(k, |i, _| if i < self.k1 { 1.0 } else { s }));
        &lambda * m.transpose() * &m * &lambda
    }
}

/// Lattice sum `Σ_{w ∈ ℤ^{k₁+k₂}, |wᵢ| ≤ w_max} q_n^{g wᵀTw}`. Fails when the
/// outermost shell still carries more than `1e−12` of the total.
pub fn winding_direct(spec: &WindingSpec, w_max: i64) -> Result<f64> {
    let k = spec.replicas();
    if k == 0 {
        return Ok(1.0);
    }
    if k > MAX_DIRECT_REPLICAS {
        return Err(Error::SizeCap(format!(
            "lattice winding sum limited to k1 + k2 ≤ {MAX_DIRECT_REPLICAS}, got {k}"
        )));
    }
    if w_max < 1 {
        return Err(Error::Domain(format!("w_max must be at least 1, got {w_max}")));
    }
    if ((2 * w_max + 1) as f64).powi(k as i32) > MAX_TERMS {
        return Err(Error::SizeCap(format!("{k}-dimensional sum with w_max = {w_max}")));
    }
    let t = spec.coupling_matrix();
    let c = spec.coupling();
    let mut w = vec![-w_max; k];
    let (mut total, mut shell) = (0.0, 0.0);
    loop {
        let mut form = 0.0;
        for i in 0..k {
            for j in 0..k {
                form += w[i] as f64 * t[(i, j)] * w[j] as f64;
            }
        }
        let term = (-c * form).exp();
        total += term;
        if w.iter().any(|x| x.abs() == w_max) {
            shell += term;
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == k {
                if shell > SHELL_TOL * total {
                    return Err(Error::Convergence(format!(
                        "winding sum shell |w| = {w_max} carries {:.3e} of the total",
                        shell / total
                    )));
                }
                return Ok(total);
            }
            w[i] += 1;
            if w[i] <= w_max {
                break;
            }
            w[i] = -w_max;
            i += 1;
        }
    }
}

/// [`winding_direct`] with the cutoff chosen from the smallest eigenvalue
/// of `T`.
pub fn winding_direct_auto(spec: &WindingSpec) -> Result<f64> {
    let k = spec.replicas();
    if k == 0 {
        return Ok(1.0);
    }
    let lam = spec
        .coupling_matrix()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(lam > 0.0) {
        return Err(Error::Eigen(format!("coupling matrix not positive definite (λ_min = {lam})")));
    }
    let w_max = (36.0 / (spec.coupling() * lam)).sqrt().ceil() as i64 + 1;
    winding_direct(spec, w_max)
}

/// `√((n k₁ + k₂ + 1) g / 2πh) ∫ e^{−gδφ²/2h} Θ(q₁)^{k₂} Θ(q_n)^{k₁} dδφ` over
/// the real line, with `Θ(q) = Σ_w q^{g (w + δφ/2π)²}`.
pub fn winding_continued(spec: &WindingSpec) -> Result<f64> {
    let (g, h, n) = (spec.g, spec.h, spec.n);
    let a1 = 2.0 * PI * PI * g / h;
    let an = n * a1;
    let (k1, k2) = (spec.k1 as i32, spec.k2 as i32);
    let log_integrand = |d: f64| {
        let x = d / (2.0 * PI);
        -g * d * d / (2.0 * h)
            + k2 as f64 * special::theta(a1, x).log_value()
            + k1 as f64 * special::theta(an, x).log_value()
    };
    // the winding sums are bounded by their value at δφ = 0
    let peak = log_integrand(0.0).max(0.0);
    let reach = (2.0 * h / g * (60.0 + peak)).sqrt();
    let step = PI.min((h / g).sqrt());
    let mut breaks: Vec<f64> = (0..).map(|i| i as f64 * step).take_while(|&d| d < reach).collect();
    breaks.push(reach);
    let half = integrate_pieces(
        |d| log_integrand(d).exp(),
        &breaks,
        QuadOptions::rel(1e-13),
    )?;
    let pref = ((n * k1 as f64 + k2 as f64 + 1.0) * g / (2.0 * PI * h)).sqrt();
    Ok(pref * 2.0 * half.value)
}
