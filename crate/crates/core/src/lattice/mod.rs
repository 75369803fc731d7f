//! Gaussian free-fermion engine: the half-filled XX-chain ground state,
//! projective charge measurements as rank-one updates of the correlation
//! matrix, and entanglement entropies from its restricted spectrum.

pub mod oracle;
pub mod sampler;
pub mod trajectory;

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub use oracle::{statevector_oracle, OracleOutcome, StatevectorOracle, ORACLE_MAX_SITES};
pub use sampler::{CompactSample, TrajectorySampler};
pub use trajectory::{
    enumerate_outcomes, run_trajectory, sample_trajectory, simulate_trajectory, EnumeratedOutcome,
    MeasurementRecord, OutcomePolicy, TrajectoryResult,
};

/// Outcomes whose probability falls below this are treated as impossible.
pub const OUTCOME_TOL: f64 = 1e-12;

/// Result of a projective measurement of `n_a = c†_a c_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Empty,
    Occupied,
}

impl Outcome {
    pub fn bit(self) -> u8 {
        match self {
            Self::Empty => 0,
            Self::Occupied => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Self::Empty),
            1 => Ok(Self::Occupied),
            b => Err(Error::Domain(format!("measurement outcome must be 0 or 1, got {b}"))),
        }
    }

    /// Born probability of this outcome given `C_aa`.
    pub fn probability(self, occupation: f64) -> f64 {
        match self {
            Self::Occupied => occupation,
            Self::Empty => 1.0 - occupation,
        }
    }

    /// Schur-complement pivot: `C_aa` for occupied, `C_aa − 1` for empty.
    pub fn pivot(self, occupation: f64) -> f64 {
        match self {
            Self::Occupied => occupation,
            Self::Empty => occupation - 1.0,
        }
    }
}

/// `C_ij = ⟨c†_i c_j⟩` of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    m: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Domain(format!("correlation matrix must be square, got {:?}", m.shape())));
        }
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::Domain(format!("correlation matrix asymmetric by {asym:e}")));
        }
        Ok(Self { m })
    }

    pub fn len(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.m.nrows() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn occupation(&self, site: usize) -> f64 {
        self.m[(site, site)]
    }

    pub fn particle_number(&self) -> f64 {
        self.m.trace()
    }

    pub fn restricted(&self, sites: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(sites.len(), sites.len(), |i, j| self.m[(sites[i], sites[j])])
    }

    pub fn spectrum(&self) -> Vec<f64> {
        SymmetricEigen::new(self.m.clone()).eigenvalues.iter().cloned().collect()
    }

    /// Projects site `a` onto `outcome` in place and returns the outcome's
    /// Born probability.
    pub fn measure(&mut self, site: usize, outcome: Outcome) -> Result<f64> {
        let len = self.len();
        if site >= len {
            return Err(Error::Domain(format!("site {site} outside ring of {len}")));
        }
        let occ = self.m[(site, site)];
        let probability = outcome.probability(occ);
        if probability < OUTCOME_TOL {
            return Err(Error::ImpossibleOutcome {
                site,
                outcome: outcome.bit(),
                probability,
            });
        }
        let pivot = outcome.pivot(occ);
        let col = self.m.column(site).clone_owned();
        for j in 0..len {
            let f = col[j] / pivot;
            if f == 0.0 {
                continue;
            }
            for i in 0..len {
                self.m[(i, j)] -= col[i] * f;
            }
        }
        self.m.column_mut(site).fill(0.0);
        self.m.row_mut(site).fill(0.0);
        self.m[(site, site)] = outcome.bit() as f64;
        // hygiene against drift over many rank-one updates
        for j in 0..len {
            for i in j + 1..len {
                let v = 0.5 * (self.m[(i, j)] + self.m[(j, i)]);
                self.m[(i, j)] = v;
                self.m[(j, i)] = v;
            }
        }
        Ok(probability)
    }
}

/// Ground-state correlations of the ring at filling `n_f`:
/// `C_ij = sin(π n_f (i−j)) / (L sin(π (i−j)/L))`, `C_ii = n_f`.
pub fn ground_state_correlation(len: usize, filling: f64) -> Result<CorrelationMatrix> {
    if len == 0 || len % 2 != 0 {
        return Err(Error::Domain(format!("ring length must be even and positive, got {len}")));
    }
    if !(filling > 0.0 && filling < 1.0) {
        return Err(Error::Domain(format!("filling must lie in (0, 1), got {filling}")));
    }
    let l = len as f64;
    let m = DMatrix::from_fn(len, len, |i, j| {
        if i == j {
            filling
        } else {
            let r = i as f64 - j as f64;
            (PI * filling * r).sin() / (l * (PI * r / l).sin())
        }
    });
    Ok(CorrelationMatrix {
        m: 0.5 * (&m + m.transpose()),
    })
}

/// `measure_site` as a pure function.
pub fn measure_site(c: &CorrelationMatrix, site: usize, outcome: Outcome) -> Result<CorrelationMatrix> {
    let mut out = c.clone();
    out.measure(site, outcome)?;
    Ok(out)
}

/// Rényi entropy of a Gaussian state from the eigenvalues of its
/// restricted correlation matrix; `n = 1` is von Neumann.
pub fn gaussian_entropy(eigenvalues: &[f64], renyi_n: f64) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .map(|l| {
            if renyi_n == 1.0 {
                let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
                term(l) + term(1.0 - l)
            } else {
                (l.powf(renyi_n) + (1.0 - l).powf(renyi_n)).ln() / (1.0 - renyi_n)
            }
        })
        .sum();
    s.max(0.0)
}

pub fn region_spectrum(c: &CorrelationMatrix, region: &[usize]) -> Result<Vec<f64>> {
    if region.is_empty() {
        return Err(Error::Domain("entropy needs a nonempty region".into()));
    }
    if let Some(&s) = region.iter().find(|&&s| s >= c.len()) {
        return Err(Error::Domain(format!("site {s} outside ring of {}", c.len())));
    }
    let sub = c.restricted(region);
    let eig = SymmetricEigen::try_new(sub, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen(format!("restricted correlation matrix of {} sites", region.len())))?;
    Ok(eig.eigenvalues.iter().cloned().collect())
}

/// Rényi-`n` entanglement entropy of `region`.
pub fn entanglement_entropy(c: &CorrelationMatrix, region: &[usize], renyi_n: f64) -> Result<f64> {
    if !(renyi_n > 0.0) {
        return Err(Error::Domain(format!("Rényi index must be positive, got {renyi_n}")));
    }
    Ok(gaussian_entropy(&region_spectrum(c, region)?, renyi_n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ring_entries() {
        let c = ground_state_correlation(4, 0.5).unwrap();
        assert!((0..4).all(|i| c.occupation(i) == 0.5));
        assert!(c.matrix()[(0, 2)].abs() < 1e-16);
        let nn = 1.0 / (4.0 * (PI / 4.0).sin());
        assert!((c.matrix()[(0, 1)] - nn).abs() < 1e-15);
        assert!(ground_state_correlation(5, 0.5).is_err());
    }

    #[test]
    fn ground_state_is_a_projector() {
        let c = ground_state_correlation(8, 0.5).unwrap();
        for l in c.spectrum() {
            assert!(l.abs() < 1e-12 || (l - 1.0).abs() < 1e-12, "{l}");
        }
        assert!((c.particle_number() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn two_site_update() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let mut c = CorrelationMatrix::from_matrix(m).unwrap();
        let p = c.measure(0, Outcome::Occupied).unwrap();
        assert_eq!(p, 0.5);
        assert_eq!(c.matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert!(matches!(
            c.measure(0, Outcome::Empty),
            Err(Error::ImpossibleOutcome { .. })
        ));
        let before = c.clone();
        assert_eq!(c.measure(0, Outcome::Occupied).unwrap(), 1.0);
        assert_eq!(c, before);
    }

    #[test]
    fn entropy_limits() {
        for &n in &[0.5, 1.0, 2.0, 3.0] {
            assert!((gaussian_entropy(&[0.5], n) - 2f64.ln()).abs() < 1e-15);
            assert_eq!(gaussian_entropy(&[0.0, 1.0, 1.0], n), 0.0);
        }
    }
}
