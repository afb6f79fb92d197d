//! Detecting behaviourally anomalous agents in simulated swarms with graph
//! signal processing.
//!
//! Agents become vertices of a Gaussian-kernel graph built from their
//! positions; per-agent quantities (position offsets, normalized velocities,
//! oscillator phases) become graph signals. Filtering those signals in the
//! graph Fourier domain of the normalized Laplacian and thresholding each
//! agent's filtered energy exposes agents whose dynamics differ from the
//! rest of the swarm.

pub mod bridge;
pub mod cli;
pub mod config;
pub mod detection;
pub mod error;
pub mod experiment;
pub mod models;
pub mod output;
pub mod roc;
pub mod spectral;

pub use error::{Error, Result};
