//! Truthful relay selection and secure cooperative beamforming for two-way
//! amplify-and-forward relay networks with energy-harvesting relays.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: dense complex kernels (null-space bases, Hermitian forms,
//!   real embeddings).
//! - [`model`]: channel sampling, effective two-way channels, SNRs,
//!   capacities, harvested and stored relay power, per-relay valuations.
//! - [`mechanism`]: K-winner VCG auction, transfers, utilities, selection
//!   probabilities and Monte Carlo expected payoffs.
//! - [`conic`]: a dense primal-dual interior-point solver for LPs and SOCPs.
//! - [`optimizer`]: the relay beamforming SOCP, rate-target bisection,
//!   source-power LP and the alternating joint optimization.

pub mod conic;
pub mod error;
pub mod mechanism;
pub mod model;
pub mod numerics;
pub mod optimizer;

pub use error::{Error, Result};
pub use mechanism::{AuctionOutcome, PayoffEstimate};
pub use model::{ChannelRealization, EffectiveChannels, PowerInit, RelayReport, SystemParams};
pub use numerics::{CMatrix, CVector};
pub use optimizer::{HarvestRequirements, JointSolution, Termination};

pub use num_complex::Complex64;
