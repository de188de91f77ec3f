//! Location estimation for symmetric log-concave mixtures.
//!
//! * [`fast_estimator`]: parameter-free estimator built from interval symmetry tests,
//!   `O(n log n log log n)` on sorted input.
//! * [`tournament`]: known-shape estimator selecting among candidate translations by
//!   batched likelihood duels.
//! * [`hellinger`]: squared Hellinger distance, total variation and the translation
//!   modulus of a density.
//! * [`lowerbound`]: hard-instance density constructions and checks of their properties.
//! * [`bench`], [`verify`], [`plot`]: Monte-Carlo harness, JSON check reports and SVG output.
//!
//! The sweep-line estimator and the reference oracles are generic over [`Real`]
//! (`f32` or `f64`); the aliases below fix the common cases. Everything built on
//! densities, the tournament included, works in `f64`.

pub mod bench;
pub mod distributions;
pub mod error;
pub mod fast_estimator;
pub mod hellinger;
pub mod lowerbound;
pub mod oracles;
pub mod plot;
pub mod quadrature;
pub mod samples;
pub mod scalar;
pub mod tournament;
pub mod verify;

pub use distributions::{DensityModel, DvParams, Family, StepParams};
pub use error::{Error, Result};
pub use fast_estimator::{estimate, EstimateReport, FeasibleInterval, GammaList, Status};
pub use hellinger::{modulus, sq_hellinger, tensorize, tv_bounds, HellingerResult};
pub use samples::{Provenance, SampleSet};
pub use scalar::Real;
pub use tournament::{tournament_estimate, TournamentConfig};

pub type Samples = SampleSet<f64>;
pub type Samples32 = SampleSet<f32>;
pub type Estimate = EstimateReport<f64>;
pub type Estimate32 = EstimateReport<f32>;
pub type Interval = FeasibleInterval<f64>;
