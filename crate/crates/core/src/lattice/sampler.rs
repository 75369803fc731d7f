//! Compact trajectory sampler.
//!
//! Region C is never measured and never enters the entropy of A, so it is
//! dropped. The remaining matrix is permuted to `[B; A]` and the measured
//! sites are eliminated in order, touching only the lower triangle. Updates
//! are applied to panels of columns immediately and to the trailing block
//! as one matrix product per panel. Outcomes, probabilities and random-number consumption
//! coincide with [`run_trajectory`](super::run_trajectory) over the
//! ascending measured sites.
//!
//! Uniform and forced strings pick improbable outcomes, and the Schur
//! updates then amplify roundoff until `C` is no longer a projector. Those
//! policies act on the occupied orbitals instead: a Householder reflection
//! moves the measured site's amplitude into one orbital, which is removed
//! (occupied) or stripped of that site (empty).

use nalgebra::{DMatrix, DMatrixViewMut, DVector, SymmetricEigen};
use rand::Rng;

use super::{gaussian_entropy, CorrelationMatrix, Outcome, OutcomePolicy, OUTCOME_TOL};
use crate::error::{Error, Result};
use crate::geometry::RingGeometry;

const PANEL: usize = 48;
const COLUMN_CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct CompactSample {
    pub log_born_prob: f64,
    /// Number of occupied outcomes on B.
    pub particles: usize,
    /// Outcome strings discarded by the uniform policy before this one.
    pub rejections: u32,
    /// `S_n(A)` in the order of the requested indices.
    pub entropies: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrajectorySampler {
    base: Vec<f64>,
    dim: usize,
    measured: usize,
    renyi: Vec<f64>,
    work: Vec<f64>,
    col: Vec<f64>,
    panel: DMatrix<f64>,
    scaled: DMatrix<f64>,
    orbitals: Option<Orbitals>,
}

/// Occupied orbitals as columns, rows ordered `[B; A; C]`.
#[derive(Debug, Clone)]
struct Orbitals {
    base: DMatrix<f64>,
    work: DMatrix<f64>,
    active: usize,
    region: usize,
}

/// Eigenvalues of a pure Gaussian state must be 0 or 1 to this accuracy
/// for the orbital path to apply.
const PROJECTOR_TOL: f64 = 1e-8;

impl TrajectorySampler {
    pub fn new(geom: &RingGeometry, c: &CorrelationMatrix, renyi: &[f64]) -> Result<Self> {
        if c.len() != geom.len() {
            return Err(Error::Domain(format!(
                "correlation matrix of {} sites for a ring of {}",
                c.len(),
                geom.len()
            )));
        }
        if let Some(&n) = renyi.iter().find(|&&n| !(n > 0.0)) {
            return Err(Error::Domain(format!("Rényi index must be positive, got {n}")));
        }
        let order: Vec<usize> = geom.measured_sites().into_iter().chain(geom.region_a()).collect();
        let dim = order.len();
        let mut base = vec![0.0; dim * dim];
        for (j, &sj) in order.iter().enumerate() {
            for (i, &si) in order.iter().enumerate() {
                base[j * dim + i] = c.matrix()[(si, sj)];
            }
        }
        let full: Vec<usize> = order.iter().cloned().chain(geom.region_c()).collect();
        let orbitals = occupied_orbitals(&c.restricted(&full))?.map(|base| Orbitals {
            work: base.clone(),
            active: base.ncols(),
            region: geom.region_a().len(),
            base,
        });
        Ok(Self {
            base,
            dim,
            measured: dim - geom.region_a().len(),
            renyi: renyi.to_vec(),
            work: vec![0.0; dim * dim],
            col: vec![0.0; dim],
            panel: DMatrix::zeros(dim, PANEL),
            scaled: DMatrix::zeros(dim, PANEL),
            orbitals,
        })
    }

    pub fn measured_sites(&self) -> usize {
        self.measured
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, policy: OutcomePolicy<'_>, rng: &mut R) -> Result<CompactSample> {
        if let OutcomePolicy::Forced(o) = policy {
            if o.len() != self.measured {
                return Err(Error::Domain(format!(
                    "{} forced outcomes for {} measured sites",
                    o.len(),
                    self.measured
                )));
            }
        }
        let stable = !matches!(policy, OutcomePolicy::Born) && self.orbitals.is_some();
        let mut rejections = 0;
        loop {
            let attempt = if stable {
                self.project_orbitals(policy, rng)?
            } else {
                self.eliminate(policy, rng)?
            };
            match attempt {
                Some((log_born_prob, particles)) => {
                    return Ok(CompactSample {
                        log_born_prob,
                        particles,
                        rejections,
                        entropies: if stable {
                            self.orbital_entropies()?
                        } else {
                            self.region_entropies()?
                        },
                    })
                }
                None => rejections += 1,
            }
        }
    }

    fn eliminate<R: Rng + ?Sized>(
        &mut self,
        policy: OutcomePolicy<'_>,
        rng: &mut R,
    ) -> Result<Option<(f64, usize)>> {
        let n = self.dim;
        self.work.copy_from_slice(&self.base);
        let mut log_p = 0.0;
        let mut particles = 0;
        let mut k0 = 0;
        let mut k1 = PANEL.min(self.measured);
        for k in 0..self.measured {
            let occ = self.work[k * n + k];
            let outcome = match policy {
                OutcomePolicy::Born => {
                    if rng.gen::<f64>() < occ {
                        Outcome::Occupied
                    } else {
                        Outcome::Empty
                    }
                }
                OutcomePolicy::Forced(o) => o[k],
                OutcomePolicy::Uniform => {
                    let o = if rng.gen::<bool>() {
                        Outcome::Occupied
                    } else {
                        Outcome::Empty
                    };
                    if o.probability(occ) < OUTCOME_TOL {
                        return Ok(None);
                    }
                    o
                }
            };
            let p = outcome.probability(occ);
            if p < OUTCOME_TOL {
                return Err(Error::ImpossibleOutcome {
                    site: k,
                    outcome: outcome.bit(),
                    probability: p,
                });
            }
            log_p += p.ln();
            if outcome == Outcome::Occupied {
                particles += 1;
            }
            let inv = 1.0 / outcome.pivot(occ);
            let slot = k - k0;
            self.col[k + 1..n].copy_from_slice(&self.work[k * n + k + 1..k * n + n]);
            let v = &self.col;
            for j in k + 1..k1 {
                let f = v[j] * inv;
                let dst = &mut self.work[j * n + j..j * n + n];
                for (d, &x) in dst.iter_mut().zip(&v[j..n]) {
                    *d -= x * f;
                }
            }
            for i in k1..n {
                self.panel[(i - k1, slot)] = v[i];
                self.scaled[(i - k1, slot)] = v[i] * inv;
            }
            if k + 1 == k1 {
                self.trailing_update(k1, slot + 1);
                k0 = k1;
                k1 = (k0 + PANEL).min(self.measured);
            }
        }
        Ok(Some((log_p, particles)))
    }

    /// Applies the deferred rank-`width` update of the current panel to the
    /// lower triangle of the trailing block starting at `start`.
    fn trailing_update(&mut self, start: usize, width: usize) {
        let n = self.dim;
        let rows = n - start;
        let u = self.panel.view((0, 0), (rows, width));
        let us = self.scaled.view((0, 0), (rows, width));
        for c0 in (0..rows).step_by(COLUMN_CHUNK) {
            let c1 = (c0 + COLUMN_CHUNK).min(rows);
            let offset = (start + c0) * n + start + c0;
            let mut target = DMatrixViewMut::from_slice_with_strides_mut(
                &mut self.work[offset..],
                rows - c0,
                c1 - c0,
                1,
                n,
            );
            target.gemm(
                -1.0,
                &us.rows(c0, rows - c0),
                &u.rows(c0, c1 - c0).transpose(),
                1.0,
            );
        }
    }

    fn project_orbitals<R: Rng + ?Sized>(
        &mut self,
        policy: OutcomePolicy<'_>,
        rng: &mut R,
    ) -> Result<Option<(f64, usize)>> {
        let orb = self.orbitals.as_mut().expect("orbital path requires orbitals");
        orb.work.copy_from(&orb.base);
        orb.active = orb.base.ncols();
        let rows = orb.work.nrows();
        let mut log_p = 0.0;
        let mut particles = 0;
        let mut v = DVector::zeros(orb.active);
        let mut w = DVector::zeros(rows);
        for k in 0..self.measured {
            let cols = orb.active;
            let u = &mut orb.work;
            let norm2: f64 = (0..cols).map(|j| u[(k, j)] * u[(k, j)]).sum();
            let occ = norm2.min(1.0);
            let outcome = match policy {
                OutcomePolicy::Born => unreachable!("Born outcomes use the Schur path"),
                OutcomePolicy::Forced(o) => o[k],
                OutcomePolicy::Uniform => {
                    let o = if rng.gen::<bool>() {
                        Outcome::Occupied
                    } else {
                        Outcome::Empty
                    };
                    if o.probability(occ) < OUTCOME_TOL {
                        return Ok(None);
                    }
                    o
                }
            };
            let p = outcome.probability(occ);
            if p < OUTCOME_TOL {
                return Err(Error::ImpossibleOutcome {
                    site: k,
                    outcome: outcome.bit(),
                    probability: p,
                });
            }
            log_p += p.ln();
            if norm2 == 0.0 {
                continue;
            }
            // reflect row k onto the first orbital
            let norm = norm2.sqrt();
            let alpha = if u[(k, 0)] > 0.0 { -norm } else { norm };
            let mut vv = v.rows_mut(0, cols);
            for j in 0..cols {
                vv[j] = u[(k, j)];
            }
            vv[0] -= alpha;
            let vtv = vv.norm_squared();
            let below = rows - k - 1;
            if vtv > 0.0 {
                let mut block = u.view_mut((k + 1, 0), (below, cols));
                let mut ww = w.rows_mut(0, below);
                ww.gemv(1.0, &block, &vv, 0.0);
                block.ger(-2.0 / vtv, &ww, &vv, 1.0);
            }
            for j in 0..cols {
                u[(k, j)] = 0.0;
            }
            match outcome {
                Outcome::Occupied => {
                    particles += 1;
                    u.swap_columns(0, cols - 1);
                    orb.active -= 1;
                }
                Outcome::Empty => {
                    let mut first = u.view_mut((k + 1, 0), (below, 1));
                    let n0 = first.norm();
                    first /= n0;
                    if norm2 > 0.5 && cols > 1 {
                        // rescaling by 1/√p magnifies any overlap with the others
                        let mut block = u.view_mut((k + 1, 0), (below, cols));
                        let (mut first, rest) = block.columns_range_pair_mut(0, 1..);
                        let overlap = rest.tr_mul(&first);
                        first.gemm(-1.0, &rest, &overlap, 1.0);
                        let n1 = first.norm();
                        first /= n1;
                    }
                }
            }
        }
        Ok(Some((log_p, particles)))
    }

    fn orbital_entropies(&self) -> Result<Vec<f64>> {
        let orb = self.orbitals.as_ref().expect("orbital path requires orbitals");
        let ua = orb.work.view((self.measured, 0), (orb.region, orb.active));
        let sub = &ua * ua.transpose();
        let eig = SymmetricEigen::try_new(sub, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Eigen(format!("post-measurement block of {} sites", orb.region)))?;
        let lambda: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        Ok(self.renyi.iter().map(|&r| gaussian_entropy(&lambda, r)).collect())
    }

    fn region_entropies(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let m = self.measured;
        let a = n - m;
        let sub = DMatrix::from_fn(a, a, |i, j| {
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            self.work[(m + c) * n + m + r]
        });
        let eig = SymmetricEigen::try_new(sub, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Eigen(format!("post-measurement block of {a} sites")))?;
        let lambda: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        Ok(self.renyi.iter().map(|&r| gaussian_entropy(&lambda, r)).collect())
    }
}

/// Orthonormal basis of the unit eigenspace when `c` is a projector.
fn occupied_orbitals(c: &DMatrix<f64>) -> Result<Option<DMatrix<f64>>> {
    let eig = SymmetricEigen::try_new(c.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen(format!("correlation matrix of {} sites", c.nrows())))?;
    if eig.eigenvalues.iter().any(|&l| (l * (1.0 - l)).abs() > PROJECTOR_TOL) {
        return Ok(None);
    }
    let occupied: Vec<usize> = (0..c.nrows()).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    Ok(Some(eig.eigenvectors.select_columns(&occupied)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ground_state_correlation, simulate_trajectory};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_matches(fast: &CompactSample, slow: &crate::lattice::TrajectoryResult, label: &str) {
        assert_eq!(fast.particles, slow.record.particle_count());
        assert!((fast.log_born_prob - slow.record.log_born_prob).abs() < 1e-9);
        for (f, (n, s)) in fast.entropies.iter().zip(&slow.entropies) {
            // S_n for n < 1 weights roundoff-level eigenvalues by λ^n
            let tol = if *n < 1.0 { 1e-6 } else { 1e-10 };
            assert!((f - s).abs() < tol, "{label} n={n}: {f} vs {s}");
        }
    }

    #[test]
    fn matches_reference_path() {
        let geom = RingGeometry::new(64, [5, 17, 30, 44]).unwrap();
        let c = ground_state_correlation(64, 0.5).unwrap();
        let renyi = [0.5, 1.0, 2.0];
        let mut sampler = TrajectorySampler::new(&geom, &c, &renyi).unwrap();
        for seed in 0..5 {
            let mut r1 = ChaCha8Rng::seed_from_u64(seed);
            let mut r2 = ChaCha8Rng::seed_from_u64(seed);
            let fast = sampler.sample(OutcomePolicy::Born, &mut r1).unwrap();
            let slow = simulate_trajectory(&geom, &c, OutcomePolicy::Born, &renyi, &mut r2).unwrap();
            assert_matches(&fast, &slow, &format!("Born seed {seed}"));
            assert_eq!(r1.gen::<u64>(), r2.gen::<u64>());

            // a typical string keeps the reference well conditioned
            let outcomes: Vec<Outcome> = slow.record.outcomes.iter().map(|&(_, o)| o).collect();
            let forced = OutcomePolicy::Forced(&outcomes);
            let fast = sampler.sample(forced, &mut r1).unwrap();
            let slow = simulate_trajectory(&geom, &c, forced, &renyi, &mut r2).unwrap();
            assert_matches(&fast, &slow, &format!("forced seed {seed}"));
        }
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let fast = sampler.sample(OutcomePolicy::Uniform, &mut r1).unwrap();
        let slow = simulate_trajectory(&geom, &c, OutcomePolicy::Uniform, &renyi, &mut r2).unwrap();
        assert_eq!(fast.particles, slow.record.particle_count());
        assert_eq!(r1.gen::<u64>(), r2.gen::<u64>());
    }

    #[test]
    fn uniform_strings_stay_pure() {
        let len = 400;
        let geom = RingGeometry::widest_for_zeta(len, 0.4).unwrap();
        let c = ground_state_correlation(len, 0.5).unwrap();
        let mut sampler = TrajectorySampler::new(&geom, &c, &[1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..4 {
            let sample = sampler.sample(OutcomePolicy::Uniform, &mut rng).unwrap();
            assert!(sample.log_born_prob < -100.0);
            let orb = sampler.orbitals.as_ref().unwrap();
            let m = sampler.measured;
            let u = orb.work.view((m, 0), (len - m, orb.active));
            let gram = u.tr_mul(&u) - DMatrix::identity(orb.active, orb.active);
            assert!(gram.amax() < 1e-10, "orthonormality lost by {:e}", gram.amax());
            // the unmeasured part is pure, so S(A) = S(C)
            let uc = orb.work.view((m + orb.region, 0), (len - m - orb.region, orb.active));
            let lambda: Vec<f64> = SymmetricEigen::new(&uc * uc.transpose()).eigenvalues.iter().cloned().collect();
            assert!((gaussian_entropy(&lambda, 1.0) - sample.entropies[0]).abs() < 1e-9);
        }
    }
}
