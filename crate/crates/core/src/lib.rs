//! Spiking neuron models (LIF, FitzHugh-Nagumo, Izhikevich, Hodgkin-Huxley),
//! fixed-step Euler and RK4 integration, and a membrane + synapse regression
//! pipeline with a benchmark harness.

pub mod bench;
pub mod encode;
pub mod error;
pub mod models;
pub mod network;
pub mod raster;
pub mod solvers;

pub use error::{Error, Result};
