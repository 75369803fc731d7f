//! Analytic and lattice engines for the statistics of measurement-induced
//! entanglement (MIE) in Tomonaga–Luttinger liquids.
//!
//! Two independent routes compute the same observables:
//!
//! - [`analytics`]: closed-form compact-boson results. Born averaging over
//!   measurement outcomes reduces to averaging the forced MIE over the
//!   Dirichlet mismatch `δφ` with the measure `p(δφ) ∝ Z_{C(1),δφ}`.
//!   Cumulants, the full distribution, disorder-induced entanglement (DIE)
//!   and the small cross-ratio asymptotics all derive from that picture.
//! - [`lattice`]: exact Gaussian-state simulation of charge measurements on
//!   the XX chain. Measurement outcomes are Born-sampled site by site via
//!   rank-one updates of the correlation matrix; a brute-force statevector
//!   oracle checks the engine at small sizes.
//!
//! The [`special`] and [`cft`] modules hold the shared numerical substrate
//! (elliptic integrals, theta/eta sums, cylinder partition functions) and
//! [`quad`] the adaptive Gauss–Kronrod integrator used throughout.

pub mod analytics;
pub mod cft;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod quad;
pub mod special;
pub mod winding;

pub use cft::{h_of_zeta, z_cylinder, BoundaryMismatch, CftParams};
pub use error::{Error, Result};
pub use geometry::{cross_ratio, RingGeometry};
