//! Exact Gaussian-averaged dynamics of non-interacting qubits dephased by
//! classical Ornstein-Uhlenbeck noise.
//!
//! Qubits are grouped into environments by a [`Partition`]; every qubit in an
//! environment sees the same random phase. The averaged channel is diagonal in
//! the collective σx eigenbasis, so [`channel::evolve`] applies it as a Hadamard
//! transform, an element-wise Gaussian decay and the inverse transform. The
//! [`montecarlo`] module samples noise realizations directly and serves as an
//! independent check on that construction.

pub mod channel;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measures;
pub mod model;
pub mod montecarlo;

pub use channel::DephasingChannel;
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix};
pub use measures::{EntropyBase, MeasureSeries, SaturationReport, SaturationTime};
pub use model::{InitialState, NoiseParams, Partition};
pub use montecarlo::{Scheme, TrajectoryConfig};
