//! Measurement trajectories on the reference (full-matrix) path.

use rand::Rng;

use super::{entanglement_entropy, CorrelationMatrix, Outcome, OUTCOME_TOL};
use crate::error::{Error, Result};
use crate::geometry::RingGeometry;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    /// `(site, outcome)` in the order the measurements were applied.
    pub outcomes: Vec<(usize, Outcome)>,
    /// Sum of the logs of the per-step conditional probabilities.
    pub log_born_prob: f64,
}

impl MeasurementRecord {
    pub fn born_probability(&self) -> f64 {
        self.log_born_prob.exp()
    }

    pub fn particle_count(&self) -> usize {
        self.outcomes.iter().filter(|(_, o)| *o == Outcome::Occupied).count()
    }
}

/// How outcomes are chosen along a trajectory.
#[derive(Debug, Clone, Copy)]
pub enum OutcomePolicy<'a> {
    /// Sampled from the conditional Born probabilities.
    Born,
    /// Fixed, one outcome per measured site.
    Forced(&'a [Outcome]),
    /// Fair coins; strings containing an impossible outcome are rejected and
    /// redrawn, giving the uniform measure over possible strings.
    Uniform,
}

/// Measures `sites` in the given order under `policy`. A uniform draw that
/// hits an impossible outcome is redrawn from scratch.
pub fn run_trajectory<R: Rng + ?Sized>(
    c: &CorrelationMatrix,
    sites: &[usize],
    policy: OutcomePolicy<'_>,
    rng: &mut R,
) -> Result<(MeasurementRecord, CorrelationMatrix)> {
    if let OutcomePolicy::Forced(o) = policy {
        if o.len() != sites.len() {
            return Err(Error::Domain(format!(
                "{} forced outcomes for {} measured sites",
                o.len(),
                sites.len()
            )));
        }
    }
    'attempt: loop {
        let mut state = c.clone();
        let mut record = MeasurementRecord {
            outcomes: Vec::with_capacity(sites.len()),
            log_born_prob: 0.0,
        };
        for (k, &site) in sites.iter().enumerate() {
            let occ = state.occupation(site);
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
                        continue 'attempt;
                    }
                    o
                }
            };
            let p = state.measure(site, outcome)?;
            record.log_born_prob += p.ln();
            record.outcomes.push((site, outcome));
        }
        return Ok((record, state));
    }
}

/// Born-sampled trajectory over `sites`.
pub fn sample_trajectory<R: Rng + ?Sized>(
    c: &CorrelationMatrix,
    sites: &[usize],
    rng: &mut R,
) -> Result<(MeasurementRecord, CorrelationMatrix)> {
    run_trajectory(c, sites, OutcomePolicy::Born, rng)
}

#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub record: MeasurementRecord,
    /// `(n, S_n(A))` after all measurements.
    pub entropies: Vec<(f64, f64)>,
}

/// Measures every site of B₁ ∪ B₂ in ascending order and evaluates the
/// Rényi entropies of A.
pub fn simulate_trajectory<R: Rng + ?Sized>(
    geom: &RingGeometry,
    c: &CorrelationMatrix,
    policy: OutcomePolicy<'_>,
    renyi: &[f64],
    rng: &mut R,
) -> Result<TrajectoryResult> {
    if c.len() != geom.len() {
        return Err(Error::Domain(format!(
            "correlation matrix of {} sites for a ring of {}",
            c.len(),
            geom.len()
        )));
    }
    let (record, state) = run_trajectory(c, &geom.measured_sites(), policy, rng)?;
    let a = geom.region_a();
    let entropies = renyi
        .iter()
        .map(|&n| entanglement_entropy(&state, &a, n).map(|s| (n, s)))
        .collect::<Result<_>>()?;
    Ok(TrajectoryResult { record, entropies })
}

#[derive(Debug, Clone)]
pub struct EnumeratedOutcome {
    pub outcomes: Vec<Outcome>,
    pub born_probability: f64,
    pub entropies: Vec<(f64, f64)>,
}

/// Every possible outcome string on the measured sites, with its Born
/// probability and the post-measurement entropies of A. Strings with an
/// impossible outcome are left out.
pub fn enumerate_outcomes(
    geom: &RingGeometry,
    c: &CorrelationMatrix,
    renyi: &[f64],
) -> Result<Vec<EnumeratedOutcome>> {
    let sites = geom.measured_sites();
    if sites.len() > 24 {
        return Err(Error::SizeCap(format!(
            "exhaustive enumeration over {} measured sites",
            sites.len()
        )));
    }
    let a = geom.region_a();
    let mut out = Vec::new();
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    for mask in 0u32..(1u32 << sites.len()) {
        let outcomes: Vec<Outcome> = (0..sites.len())
            .map(|k| if mask >> k & 1 == 1 { Outcome::Occupied } else { Outcome::Empty })
            .collect();
        let (record, state) = match run_trajectory(c, &sites, OutcomePolicy::Forced(&outcomes), &mut rng) {
            Ok(r) => r,
            Err(Error::ImpossibleOutcome { .. }) => continue,
            Err(e) => return Err(e),
        };
        let entropies = renyi
            .iter()
            .map(|&n| entanglement_entropy(&state, &a, n).map(|s| (n, s)))
            .collect::<Result<_>>()?;
        out.push(EnumeratedOutcome {
            outcomes,
            born_probability: record.born_probability(),
            entropies,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ground_state_correlation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn born_probabilities_sum_to_one() {
        let geom = RingGeometry::new(12, [1, 4, 7, 10]).unwrap();
        let c = ground_state_correlation(12, 0.5).unwrap();
        let all = enumerate_outcomes(&geom, &c, &[1.0]).unwrap();
        let total: f64 = all.iter().map(|o| o.born_probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn record_probability_matches_forced_replay() {
        let geom = RingGeometry::new(16, [0, 4, 8, 12]).unwrap();
        let c = ground_state_correlation(16, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = simulate_trajectory(&geom, &c, OutcomePolicy::Born, &[1.0, 2.0], &mut rng).unwrap();
        let forced: Vec<Outcome> = t.record.outcomes.iter().map(|(_, o)| *o).collect();
        let replay = simulate_trajectory(&geom, &c, OutcomePolicy::Forced(&forced), &[1.0, 2.0], &mut rng).unwrap();
        assert!((replay.record.log_born_prob - t.record.log_born_prob).abs() < 1e-13);
        assert_eq!(replay.entropies, t.entropies);
    }

    #[test]
    fn uniform_policy_avoids_impossible_strings() {
        let geom = RingGeometry::new(8, [0, 2, 4, 6]).unwrap();
        let c = ground_state_correlation(8, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let t = simulate_trajectory(&geom, &c, OutcomePolicy::Uniform, &[1.0], &mut rng).unwrap();
            assert!(t.record.log_born_prob > OUTCOME_TOL.ln() * 4.0);
        }
    }
}
