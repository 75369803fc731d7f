//! Closed-form MIE statistics from the compact-boson description.

pub mod asymptotic;
pub mod born;
pub mod cumulants;
pub mod distribution;
pub mod forced;

pub use asymptotic::{asymptotic_cumulant, AsymptoticCumulant, ScalingBranch};
pub use born::{born_measure, BornMeasure};
pub use cumulants::{cgf_cumulants, die, mie_cumulant, mie_cumulants, CumulantSet};
pub use distribution::{
    bell_pair_tail, lognormal_tail, mie_distribution, DistributionCurve, ForcedMieCurve,
    MieDensity, TailFits,
};
pub use forced::{forced_mie, forced_mie_derivative, forced_mie_vn_limit, ForcedMie};
