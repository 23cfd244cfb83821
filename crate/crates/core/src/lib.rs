//! Simulation kernel for small open quantum systems whose relaxation spreads
//! over widely separated timescales.
//!
//! The crate builds Lindblad-form master equations for two concrete models —
//! a nearly degenerate two-level system and a three-level V system, each
//! coupled to an Ohmic bosonic bath — then propagates density operators
//! exactly through the spectrum of the vectorized generator, extracts the
//! timescale hierarchy from the Liouvillian eigenvalues, and unravels the same
//! dynamics into stochastic jump trajectories with seedable, reproducible
//! randomness.
//!
//! Module map:
//!
//! * [`numkit`] — dense complex matrices, Kronecker/vectorization helpers,
//!   and a general eigensolver.
//! * [`models`] — model constructors and bath-induced rates.
//! * [`master`] — Liouvillian assembly, spectral propagation, steady states,
//!   timescale extraction.
//! * [`bases`] — decoherence and |±⟩ basis transforms, Bloch-sphere mapping.
//! * [`trajectories`] — jump unraveling and parallel ensemble averaging.
//! * [`analytic`] — closed-form reference solutions used as oracles.

pub mod analytic;
pub mod bases;
pub mod master;
pub mod models;
pub mod numkit;
pub mod trajectories;

pub use bases::{BasisTransform, BlochVector};
pub use master::{Liouvillian, TimescaleReport};
pub use models::{BathSpec, Model};
pub use numkit::{ComplexMatrix, SpectralDecomposition, C64};
pub use trajectories::{EnsembleSummary, TrajectoryRecord};
