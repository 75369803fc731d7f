//! Monte-Carlo estimators: unbiased k-statistics with delete-1 jackknife
//! errors, and histograms.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantEstimate {
    pub samples: usize,
    pub kappa: [f64; 3],
    pub err: [f64; 3],
}

/// Power sums of data centred on a fixed shift.
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    n: f64,
    s1: f64,
    s2: f64,
    s3: f64,
}

impl Sums {
    fn of(xs: &[f64], shift: f64) -> Self {
        xs.iter().fold(Self::default(), |acc, &x| {
            let d = x - shift;
            Self {
                n: acc.n + 1.0,
                s1: acc.s1 + d,
                s2: acc.s2 + d * d,
                s3: acc.s3 + d * d * d,
            }
        })
    }

    fn without(&self, x: f64, shift: f64) -> Self {
        let d = x - shift;
        Self {
            n: self.n - 1.0,
            s1: self.s1 - d,
            s2: self.s2 - d * d,
            s3: self.s3 - d * d * d,
        }
    }

    /// `k₁, k₂, k₃` (the shift only enters `k₁`).
    fn k_statistics(&self, shift: f64) -> [f64; 3] {
        let n = self.n;
        let mean = self.s1 / n;
        let m2 = self.s2 / n - mean * mean;
        let m3 = self.s3 / n - 3.0 * mean * self.s2 / n + 2.0 * mean.powi(3);
        let k2 = if n > 1.0 { n / (n - 1.0) * m2 } else { f64::NAN };
        let k3 = if n > 2.0 {
            n * n / ((n - 1.0) * (n - 2.0)) * m3
        } else {
            f64::NAN
        };
        [mean + shift, k2, k3]
    }
}

/// Unbiased `k₁, k₂, k₃`.
pub fn k_statistics(xs: &[f64]) -> [f64; 3] {
    let shift = mean(xs);
    Sums::of(xs, shift).k_statistics(shift)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// k-statistics with delete-1 jackknife standard errors, `O(N)`.
pub fn estimate_cumulants(xs: &[f64]) -> CumulantEstimate {
    let n = xs.len();
    let shift = mean(xs);
    let all = Sums::of(xs, shift);
    let kappa = all.k_statistics(shift);
    let mut err = [f64::NAN; 3];
    if n > 3 {
        let mut sum = [0.0; 3];
        let mut sum_sq = [0.0; 3];
        for &x in xs {
            let k = all.without(x, shift).k_statistics(shift);
            for j in 0..3 {
                sum[j] += k[j];
                sum_sq[j] += k[j] * k[j];
            }
        }
        let nf = n as f64;
        for j in 0..3 {
            let m = sum[j] / nf;
            let var = (sum_sq[j] / nf - m * m).max(0.0);
            err[j] = ((nf - 1.0) * var).sqrt();
        }
    }
    CumulantEstimate {
        samples: n,
        kappa,
        err,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binning {
    Linear,
    Log,
}

/// Counts per bin and `count / (N · width)`, normalised by the total sample
/// count so that bins outside the window simply carry no mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub binning: Binning,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    pub total: u64,
}

impl Histogram {
    pub fn with_edges(binning: Binning, edges: Vec<f64>, xs: &[f64]) -> Self {
        let bins = edges.len() - 1;
        let mut counts = vec![0u64; bins];
        let (lo, hi) = (edges[0], edges[bins]);
        for &x in xs {
            if !(x >= lo && x <= hi) {
                continue;
            }
            let k = edges.partition_point(|&e| e <= x).clamp(1, bins) - 1;
            counts[k] += 1;
        }
        let total = xs.len() as u64;
        let density = counts
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, w)| c as f64 / (total as f64 * (w[1] - w[0])))
            .collect();
        Self {
            binning,
            edges,
            counts,
            density,
            total,
        }
    }

    /// `bins` equal bins over the observed range.
    pub fn linear(xs: &[f64], bins: usize) -> Self {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            hi = lo + f64::EPSILON * lo.abs().max(1.0);
        }
        let edges = (0..=bins)
            .map(|k| if k == bins { hi } else { lo + (hi - lo) * k as f64 / bins as f64 })
            .collect();
        Self::with_edges(Binning::Linear, edges, xs)
    }

    /// `bins` logarithmic bins over `[smallest positive sample, upper]`;
    /// `None` when no positive sample lies below `upper`.
    pub fn log(xs: &[f64], bins: usize, upper: f64) -> Option<Self> {
        let lo = xs.iter().cloned().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
        if !(lo < upper) {
            return None;
        }
        let ratio = (upper / lo).ln();
        let edges = (0..=bins)
            .map(|k| {
                if k == bins {
                    upper
                } else {
                    lo * (ratio * k as f64 / bins as f64).exp()
                }
            })
            .collect();
        Some(Self::with_edges(Binning::Log, edges, xs))
    }

    pub fn mass(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_k(xs: &[f64]) -> [f64; 3] {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
        [m, n / (n - 1.0) * m2, n * n / ((n - 1.0) * (n - 2.0)) * m3]
    }

    #[test]
    fn k_statistics_match_definition() {
        let xs = [0.3, 1.7, 0.2, 5.0, 2.2, 0.9];
        let k = k_statistics(&xs);
        let b = brute_k(&xs);
        for j in 0..3 {
            assert!((k[j] - b[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..40).map(|_| rng.gen::<f64>().powi(3)).collect();
        let est = estimate_cumulants(&xs);
        let n = xs.len() as f64;
        let loo: Vec<[f64; 3]> = (0..xs.len())
            .map(|i| {
                let mut v = xs.clone();
                v.remove(i);
                brute_k(&v)
            })
            .collect();
        for j in 0..3 {
            let m = loo.iter().map(|k| k[j]).sum::<f64>() / n;
            let var = loo.iter().map(|k| (k[j] - m).powi(2)).sum::<f64>() * (n - 1.0) / n;
            assert!((est.err[j] / var.sqrt() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn linear_histogram_holds_all_mass() {
        let xs = [0.0, 0.1, 0.5, 0.5, 1.0];
        let h = Histogram::linear(&xs, 4);
        assert_eq!(h.counts, vec![2, 0, 2, 1]);
        assert!((h.mass() - 1.0).abs() < 1e-15);
        let integral: f64 = h.density.iter().zip(h.edges.windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum();
        assert!((integral - 1.0).abs() < 1e-12);
        assert_eq!(Histogram::linear(&[2.0, 2.0], 3).mass(), 1.0);
    }

    #[test]
    fn log_histogram_window() {
        let xs = [1e-6, 1e-4, 1e-2, 0.5];
        let h = Histogram::log(&xs, 4, 0.1).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 3);
        assert!(Histogram::log(&[0.5, 0.0], 4, 0.1).is_none());
    }
}
