//! Low-rank matrix denoising by singular value shrinkage that is optimal in
//! operator norm for the spiked model `Y = X + G`, with `G` iid `N(0, 1/n)`.
//!
//! * [`asymptotics`]: spike forward map, its inverse, and singular vector cosines.
//! * [`shrinker`]: the 2×2 block loss, the optimal shrinker and its loss.
//! * [`denoiser`]: rank detection and the shrink-and-reconstruct pipeline.
//! * [`sim`]: spiked-model sampling, Monte Carlo replicates, curve experiments.

pub mod asymptotics;
pub mod denoiser;
pub mod error;
pub mod io;
pub mod linalg;
pub mod parallel;
pub mod shrinker;
pub mod sim;

pub use asymptotics::{AspectRatio, ComponentAsymptotics};
pub use denoiser::{denoise, DenoiseReport, DEFAULT_DETECTION_TOLERANCE};
pub use error::{Error, Result};
pub use linalg::DataMatrix;
pub use shrinker::{BlockParams, ShrinkerKind};
