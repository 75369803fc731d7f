//! Ring geometry: two unmeasured arcs A and C separated by the measured
//! arcs B₁ and B₂.
//!
//! Sites are `0..len`. With boundaries `x1 < x2 < x3 < x4` the regions are
//! half-open: `A = [x1, x2)`, `B₁ = [x2, x3)`, `C = [x3, x4)` and
//! `B₂ = [x4, len) ∪ [0, x1)`. Region lengths are then exactly the
//! boundary separations entering the chord lengths.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingGeometry {
    len: usize,
    bounds: [usize; 4],
}

impl RingGeometry {
    pub fn new(len: usize, bounds: [usize; 4]) -> Result<Self> {
        let [x1, x2, x3, x4] = bounds;
        if !(x1 < x2 && x2 < x3 && x3 < x4 && x4 < len) {
            return Err(Error::DegenerateGeometry(format!(
                "need 0 ≤ x1 < x2 < x3 < x4 < L, got L={len} x={bounds:?}"
            )));
        }
        Ok(Self { len, bounds })
    }

    /// `|A| = |C| = region_len`, B₁ of length `separation`, B₂ the rest,
    /// with A starting at site 0.
    pub fn with_separation(len: usize, region_len: usize, separation: usize) -> Result<Self> {
        let x2 = region_len;
        let x3 = x2 + separation;
        let x4 = x3 + region_len;
        Self::new(len, [0, x2, x3, x4])
    }

    /// A and C diametrically opposite, `|B₁| = |B₂|` up to one site.
    pub fn symmetric(len: usize, region_len: usize) -> Result<Self> {
        if 2 * region_len >= len {
            return Err(Error::DegenerateGeometry(format!(
                "regions of length {region_len} do not fit twice into L={len} with B nonempty"
            )));
        }
        Self::with_separation(len, region_len, (len - 2 * region_len) / 2)
    }

    /// The separation realising a cross-ratio closest to `target` for fixed
    /// `|A| = |C| = region_len`.
    pub fn closest_to_zeta(len: usize, region_len: usize, target: f64) -> Result<Self> {
        if 2 * region_len + 2 > len {
            return Err(Error::DegenerateGeometry(format!(
                "region length {region_len} too large for L={len}"
            )));
        }
        let mut best: Option<(f64, Self)> = None;
        for sep in 1..len - 2 * region_len {
            let geom = Self::with_separation(len, region_len, sep)?;
            let miss = (cross_ratio(&geom) - target).abs();
            if best.map_or(true, |(m, _)| miss < m) {
                best = Some((miss, geom));
            }
        }
        best.map(|(_, g)| g)
            .ok_or_else(|| Error::DegenerateGeometry("no admissible separation".into()))
    }

    /// The widest `|A| = |C|` that can still reach `target` (A and C close
    /// to antipodal), with the separation chosen by [`Self::closest_to_zeta`].
    pub fn widest_for_zeta(len: usize, target: f64) -> Result<Self> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::Domain(format!("cross-ratio must lie in (0, 1), got {target}")));
        }
        let l = len as f64;
        let cap = len.saturating_sub(2) / 2;
        let mut region = ((l / PI) * target.sqrt().asin()).floor() as usize;
        region = region.clamp(1, cap.max(1));
        while region < cap && (PI * (region + 1) as f64 / l).sin().powi(2) <= target {
            region += 1;
        }
        while region > 1 && (PI * region as f64 / l).sin().powi(2) > target {
            region -= 1;
        }
        Self::closest_to_zeta(len, region, target)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn bounds(&self) -> [usize; 4] {
        self.bounds
    }

    pub fn region_a(&self) -> Vec<usize> {
        (self.bounds[0]..self.bounds[1]).collect()
    }

    pub fn region_c(&self) -> Vec<usize> {
        (self.bounds[2]..self.bounds[3]).collect()
    }

    /// Measured sites B₁ ∪ B₂ in ascending index order.
    pub fn measured_sites(&self) -> Vec<usize> {
        let [x1, x2, x3, x4] = self.bounds;
        (0..x1).chain(x2..x3).chain(x4..self.len).collect()
    }

    /// Same layout shifted by `shift` sites; fails if region C would wrap
    /// past the end of the ring.
    pub fn shifted(&self, shift: usize) -> Result<Self> {
        Self::new(self.len, self.bounds.map(|x| x + shift))
    }
}

fn chord(len: usize, sep: usize) -> f64 {
    let l = len as f64;
    l / PI * (PI * sep as f64 / l).sin()
}

/// Conformal cross-ratio `ζ = w₁₂ w₃₄ / (w₁₃ w₂₄)` with chord lengths
/// `w_ij = (L/π) sin(π x_ij / L)`.
pub fn cross_ratio(geom: &RingGeometry) -> f64 {
    let [x1, x2, x3, x4] = geom.bounds;
    let l = geom.len;
    chord(l, x2 - x1) * chord(l, x4 - x3) / (chord(l, x3 - x1) * chord(l, x4 - x2))
}

/// Cross-ratio of four real positions on a ring of circumference `len`.
pub fn cross_ratio_continuous(len: f64, x: [f64; 4]) -> Result<f64> {
    let w = |a: f64, b: f64| (len / PI * (PI * (b - a) / len).sin()).abs();
    let (w12, w34, w13, w24) = (w(x[0], x[1]), w(x[2], x[3]), w(x[0], x[2]), w(x[1], x[3]));
    if w12 == 0.0 || w34 == 0.0 || w13 == 0.0 || w24 == 0.0 {
        return Err(Error::DegenerateGeometry(format!("coincident points {x:?}")));
    }
    Ok(w12 * w34 / (w13 * w24))
}
