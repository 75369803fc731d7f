//! Exact statevector oracle for small rings.
//!
//! The XX chain `H = −Σ_i (σ⁺_i σ⁻_{i+1} + h.c.)` with periodic spin
//! boundary conditions is diagonalised in the half-filled `S_z` sector.
//! Its ground state is the same state as the Gaussian ground state used by
//! the free-fermion engine, but every quantity here is computed from the
//! many-body wavefunction without Wick's theorem.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use super::Outcome;
use crate::error::{Error, Result};
use crate::geometry::RingGeometry;

pub const ORACLE_MAX_SITES: usize = 12;

#[derive(Debug, Clone)]
pub struct StatevectorOracle {
    len: usize,
    basis: Vec<u32>,
    ground: Vec<f64>,
    energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub born_probability: f64,
    /// `(n, S_n(A))`.
    pub entropies: Vec<(f64, f64)>,
}

impl StatevectorOracle {
    pub fn new(len: usize) -> Result<Self> {
        if len > ORACLE_MAX_SITES {
            return Err(Error::SizeCap(format!(
                "statevector oracle limited to {ORACLE_MAX_SITES} sites, got {len}"
            )));
        }
        if len < 4 || len % 2 != 0 {
            return Err(Error::Domain(format!("ring length must be even and at least 4, got {len}")));
        }
        let basis: Vec<u32> = (0u32..1 << len)
            .filter(|b| b.count_ones() as usize == len / 2)
            .collect();
        let index: HashMap<u32, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let dim = basis.len();
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for (col, &b) in basis.iter().enumerate() {
            for i in 0..len {
                let j = (i + 1) % len;
                if (b >> i & 1) != (b >> j & 1) {
                    let flipped = b ^ (1 << i) ^ (1 << j);
                    h[(index[&flipped], col)] -= 1.0;
                }
            }
        }
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 100_000)
            .ok_or_else(|| Error::Eigen(format!("XX Hamiltonian on {len} sites")))?;
        let k = eig.eigenvalues.imin();
        let mut ground: Vec<f64> = eig.eigenvectors.column(k).iter().cloned().collect();
        let sum: f64 = ground.iter().sum();
        if sum < 0.0 {
            ground.iter_mut().for_each(|x| *x = -*x);
        }
        Ok(Self {
            len,
            basis,
            ground,
            energy: eig.eigenvalues[k],
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `⟨n_i n_j⟩` in the ground state (`⟨n_i⟩` on the diagonal).
    pub fn density_correlations(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.len, self.len);
        for (&b, &amp) in self.basis.iter().zip(&self.ground) {
            let w = amp * amp;
            for i in 0..self.len {
                if b >> i & 1 == 0 {
                    continue;
                }
                for j in 0..self.len {
                    if b >> j & 1 == 1 {
                        m[(i, j)] += w;
                    }
                }
            }
        }
        m
    }

    /// Born probability of `outcomes` on the measured sites (ascending) and
    /// the Rényi entropies of A in the projected state.
    pub fn outcome(&self, geom: &RingGeometry, outcomes: &[Outcome], renyi: &[f64]) -> Result<OracleOutcome> {
        if geom.len() != self.len {
            return Err(Error::Domain(format!(
                "geometry of {} sites for an oracle of {}",
                geom.len(),
                self.len
            )));
        }
        let measured = geom.measured_sites();
        if outcomes.len() != measured.len() {
            return Err(Error::Domain(format!(
                "{} outcomes for {} measured sites",
                outcomes.len(),
                measured.len()
            )));
        }
        let (mask, pattern) = measured.iter().zip(outcomes).fold((0u32, 0u32), |(m, p), (&s, o)| {
            (m | 1 << s, p | (o.bit() as u32) << s)
        });
        let a = geom.region_a();
        let c = geom.region_c();
        let sub = |b: u32, sites: &[usize]| {
            sites
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &s)| acc | ((b >> s & 1) as usize) << k)
        };
        let mut psi = DMatrix::<f64>::zeros(1 << a.len(), 1 << c.len());
        let mut prob = 0.0;
        for (&b, &amp) in self.basis.iter().zip(&self.ground) {
            if b & mask == pattern {
                psi[(sub(b, &a), sub(b, &c))] += amp;
                prob += amp * amp;
            }
        }
        if prob < 1e-14 {
            return Err(Error::ImpossibleOutcome {
                site: measured[0],
                outcome: outcomes[0].bit(),
                probability: prob,
            });
        }
        let rho = &psi * psi.transpose() / prob;
        let eig = SymmetricEigen::try_new(rho, f64::EPSILON, 100_000)
            .ok_or_else(|| Error::Eigen("reduced density matrix".into()))?;
        let lambda: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let entropies = renyi
            .iter()
            .map(|&n| {
                let s = if n == 1.0 {
                    -lambda.iter().filter(|&&l| l > 0.0).map(|&l| l * l.ln()).sum::<f64>()
                } else {
                    lambda.iter().map(|&l| l.powf(n)).sum::<f64>().ln() / (1.0 - n)
                };
                (n, s.max(0.0))
            })
            .collect();
        Ok(OracleOutcome {
            born_probability: prob,
            entropies,
        })
    }
}

/// One-shot oracle evaluation.
pub fn statevector_oracle(
    geom: &RingGeometry,
    outcomes: &[Outcome],
    renyi: &[f64],
) -> Result<OracleOutcome> {
    StatevectorOracle::new(geom.len())?.outcome(geom, outcomes, renyi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ground_state_correlation;

    #[test]
    fn ground_state_matches_gaussian_state() {
        for len in [8, 10, 12] {
            let oracle = StatevectorOracle::new(len).unwrap();
            let c = ground_state_correlation(len, 0.5).unwrap();
            let cm = c.matrix();
            let nn = oracle.density_correlations();
            for i in 0..len {
                for j in 0..len {
                    let wick = if i == j {
                        cm[(i, i)]
                    } else {
                        cm[(i, i)] * cm[(j, j)] - cm[(i, j)] * cm[(i, j)]
                    };
                    assert!((nn[(i, j)] - wick).abs() < 1e-12, "L={len} ({i},{j})");
                }
            }
            // the wrap bond carries the Jordan–Wigner parity (−1)^(N−1)
            let parity = if (len / 2) % 2 == 0 { -1.0 } else { 1.0 };
            let bonds: f64 = (0..len - 1).map(|i| cm[(i, i + 1)]).sum::<f64>() + parity * cm[(len - 1, 0)];
            let exact_energy = -2.0 * bonds;
            assert!((oracle.energy() - exact_energy).abs() < 1e-10, "{} vs {exact_energy}", oracle.energy());
        }
    }

    #[test]
    fn size_cap() {
        assert!(matches!(StatevectorOracle::new(14), Err(Error::SizeCap(_))));
    }
}
