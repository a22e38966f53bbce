//! Delay-phase precoding and RIS phase design for wideband THz MIMO.
//!
//! The array model is a ULA at the base station and a square UPA at the
//! surface. Gains are always normalised so a perfectly aligned beam has
//! gain 1.

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod manifold;
pub mod output;
pub mod ris;
pub mod scenario;

pub use beamforming::{Architecture, TdMode, TpBeamformer};
pub use channel::{ChannelSet, NoiseModel};
pub use config::{FrequencyGrid, SystemConfig, SystemParams};
pub use error::{Error, Result};
pub use manifold::{PhysicalDirection1D, PhysicalDirection2D};
pub use output::{GainRow, GainTable};
pub use scenario::{Scenario, SubcarrierSelection};
