//! Special functions: complete elliptic integral, Dedekind eta and the
//! winding (theta-type) sum of the compact boson.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Terms of a winding sum smaller than `e^{-THETA_CUTOFF}` relative to the
/// leading one are dropped.
pub const THETA_CUTOFF: f64 = 40.0;

/// Arithmetic–geometric mean of two non-negative numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, modulus convention:
/// `K(k) = ∫₀^{π/2} dθ / √(1 − k² sin²θ)`.
pub fn elliptic_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("elliptic_k needs 0 ≤ k < 1, got {k}")));
    }
    let kp = ((1.0 - k) * (1.0 + k)).sqrt();
    Ok(PI / (2.0 * agm(1.0, kp)))
}

/// `K(√(1 − k²))`, evaluated without forming the complementary modulus.
/// Accurate for tiny `k`, where it grows like `ln(4/k)`.
pub fn elliptic_k_complement(k: f64) -> Result<f64> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::Domain(format!(
            "elliptic_k_complement needs 0 < k ≤ 1, got {k}"
        )));
    }
    Ok(PI / (2.0 * agm(1.0, k)))
}

fn check_nome(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("nome must lie in (0, 1), got {q}")))
    }
}

/// The Euler product `∏(1 − q^m)` of the eta function in log form,
/// together with `Σ m q^m / (1 − q^m) = −q d/dq Σ ln(1 − q^m)`.
///
/// The `q^{1/24}` Casimir factor is left out; callers that form ratios of
/// cylinder partition functions at nomes tied by `ln q_n = n ln q_1` see it
/// cancel exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerProduct {
    pub log_product: f64,
    pub log_derivative: f64,
}

pub fn euler_product(q: f64) -> Result<EulerProduct> {
    check_nome(q)?;
    let mut log_product = 0.0;
    let mut log_derivative = 0.0;
    let mut qm = q;
    let mut m = 1.0;
    // omitted factors differ from 1 by < 1e-17
    while qm > 1e-17 {
        log_product += (-qm).ln_1p();
        log_derivative += m * qm / (1.0 - qm);
        qm *= q;
        m += 1.0;
        if m > 1e7 {
            return Err(Error::Convergence(format!("eta product at q = {q}")));
        }
    }
    Ok(EulerProduct {
        log_product,
        log_derivative,
    })
}

/// Dedekind eta `η(q) = q^{1/24} ∏_{m≥1} (1 − q^m)` for real nome.
pub fn dedekind_eta(q: f64) -> Result<f64> {
    let p = euler_product(q)?;
    Ok((q.ln() / 24.0 + p.log_product).exp())
}

/// Which representation of the winding sum was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaForm {
    /// `Θ = e^{−a x²} (1 + R)` with `R` the `w ≠ 0` terms.
    Direct,
    /// `Θ = √(π/a) (1 + R)` with `R` the `m ≥ 1` dual terms.
    Dual,
}

/// `Θ(a, x) = Σ_w exp(−a (w + x)²)` split as `Θ = lead(a, x) · (1 + R)`.
///
/// The correction `ℓ = ln(1 + R)` and its derivatives are kept separately
/// from the lead so that differences of log-theta values at small nome
/// can be formed without cancellation. `x` is stored folded into
/// `[−1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaEval {
    pub form: ThetaForm,
    pub a: f64,
    pub x: f64,
    /// `ℓ = ln(1 + R)`
    pub excess: f64,
    /// `∂_a ℓ`
    pub excess_a: f64,
    /// `∂_x ℓ`
    pub excess_x: f64,
    /// `∂_a ∂_x ℓ`
    pub excess_ax: f64,
}

impl ThetaEval {
    /// Logarithm of the lead factor.
    pub fn lead(&self) -> f64 {
        match self.form {
            ThetaForm::Direct => -self.a * self.x * self.x,
            ThetaForm::Dual => 0.5 * (PI / self.a).ln(),
        }
    }

    pub fn lead_a(&self) -> f64 {
        match self.form {
            ThetaForm::Direct => -self.x * self.x,
            ThetaForm::Dual => -0.5 / self.a,
        }
    }

    pub fn lead_x(&self) -> f64 {
        match self.form {
            ThetaForm::Direct => -2.0 * self.a * self.x,
            ThetaForm::Dual => 0.0,
        }
    }

    pub fn lead_ax(&self) -> f64 {
        match self.form {
            ThetaForm::Direct => -2.0 * self.x,
            ThetaForm::Dual => 0.0,
        }
    }

    /// `ln Θ`
    pub fn log_value(&self) -> f64 {
        self.lead() + self.excess
    }

    pub fn value(&self) -> f64 {
        self.log_value().exp()
    }

    /// `∂_a ln Θ`
    pub fn d_a(&self) -> f64 {
        self.lead_a() + self.excess_a
    }

    /// `∂_x ln Θ`
    pub fn d_x(&self) -> f64 {
        self.lead_x() + self.excess_x
    }

    /// `∂_a ∂_x ln Θ`
    pub fn d_ax(&self) -> f64 {
        self.lead_ax() + self.excess_ax
    }

    /// `ln Θ − a ∂_a ln Θ`, the entropy of the Gaussian weights over
    /// winding sectors. The direct lead drops out exactly.
    pub fn entropy(&self) -> f64 {
        let lead = match self.form {
            ThetaForm::Direct => 0.0,
            ThetaForm::Dual => self.lead() + 0.5,
        };
        lead + self.excess - self.a * self.excess_a
    }

    /// `∂_x` of [`ThetaEval::entropy`].
    pub fn entropy_x(&self) -> f64 {
        self.excess_x - self.a * self.excess_ax
    }
}

/// Shift of `x` into `[−1/2, 1/2]`.
fn fold(x: f64) -> f64 {
    x - x.round()
}

fn excess_from_sums(form: ThetaForm, a: f64, x: f64, r: f64, r_a: f64, r_x: f64, r_ax: f64) -> ThetaEval {
    let norm = 1.0 + r;
    ThetaEval {
        form,
        a,
        x,
        excess: r.ln_1p(),
        excess_a: r_a / norm,
        excess_x: r_x / norm,
        excess_ax: r_ax / norm - r_a * r_x / (norm * norm),
    }
}

/// Direct winding sum. `w_max = None` truncates where the remaining terms
/// fall below `e^{-THETA_CUTOFF}` of the leading one.
pub fn theta_direct(a: f64, x: f64, w_max: Option<i64>) -> ThetaEval {
    let x = fold(x);
    let w_max = w_max.unwrap_or_else(|| (x.abs() + (THETA_CUTOFF / a).sqrt()).ceil() as i64 + 1);
    let (mut r, mut r_a, mut r_x, mut r_ax) = (0.0, 0.0, 0.0, 0.0);
    for w in -w_max..=w_max {
        if w == 0 {
            continue;
        }
        let wf = w as f64;
        // exponent relative to the w = 0 term: −a (w² + 2 w x)
        let s = wf * (wf + 2.0 * x);
        let e = (-a * s).exp();
        if e == 0.0 {
            continue;
        }
        r += e;
        r_a -= s * e;
        r_x -= 2.0 * a * wf * e;
        r_ax += (2.0 * a * wf * s - 2.0 * wf) * e;
    }
    excess_from_sums(ThetaForm::Direct, a, x, r, r_a, r_x, r_ax)
}

/// Poisson-resummed winding sum,
/// `Θ = √(π/a) [1 + 2 Σ_{m≥1} e^{−π² m²/a} cos 2πmx]`.
pub fn theta_dual(a: f64, x: f64, m_max: Option<i64>) -> ThetaEval {
    let x = fold(x);
    let b = PI * PI / a;
    let m_max = m_max.unwrap_or_else(|| (THETA_CUTOFF / b).sqrt().ceil() as i64 + 1);
    let (mut r, mut r_a, mut r_x, mut r_ax) = (0.0, 0.0, 0.0, 0.0);
    for m in 1..=m_max {
        let mf = m as f64;
        let e = 2.0 * (-b * mf * mf).exp();
        if e == 0.0 {
            break;
        }
        let (sin, cos) = (2.0 * PI * mf * x).sin_cos();
        let da = PI * PI * mf * mf / (a * a);
        let dx = -2.0 * PI * mf * sin;
        r += e * cos;
        r_a += e * da * cos;
        r_x += e * dx;
        r_ax += e * da * dx;
    }
    excess_from_sums(ThetaForm::Dual, a, x, r, r_a, r_x, r_ax)
}

/// `Θ(a, x)` in whichever representation converges faster: the dual form
/// once `a < π`.
pub fn theta(a: f64, x: f64) -> ThetaEval {
    if a < PI {
        theta_dual(a, x, None)
    } else {
        theta_direct(a, x, None)
    }
}

/// `Σ_{w∈ℤ} q^{g (w + δφ/2π)²}`.
pub fn theta_winding(q: f64, g: f64, delta_phi: f64) -> Result<f64> {
    check_nome(q)?;
    if !(g > 0.0) {
        return Err(Error::Domain(format!("g must be positive, got {g}")));
    }
    Ok(theta(-g * q.ln(), delta_phi / (2.0 * PI)).value())
}
