//! Cascaded channel estimation for RIS-assisted multi-user uplinks.
//!
//! The angular cascaded channels of all users share their non-zero rows
//! completely and a subset of their non-zero columns per row. The
//! [`estimators::ds_omp`] estimator exploits both structures: joint row
//! detection, joint column voting, then per-user OMP completion.
//!
//! Around the estimator live the pieces needed to reproduce the pilot
//! overhead comparison end to end:
//!
//! * [`angular`]: UPA steering vectors and Kronecker-DFT dictionaries.
//! * [`channel`]: on-grid multipath sampling and ground-truth supports.
//! * [`pilot`]: random RIS reflection patterns and noisy measurements.
//! * [`estimators`]: DS-OMP plus the row-structured, per-user OMP and oracle LS baselines.
//! * [`bench`]: paired Monte-Carlo sweeps, NMSE and CSV output.
//! * [`cli`]: the `generate`, `estimate` and `sweep` commands.

pub mod angular;
pub mod bench;
pub mod channel;
pub mod cli;
mod error;
pub mod estimators;
pub mod pilot;
pub mod seed;

pub use error::{Error, Result};

/// Complex dense matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
/// Complex dense column vector.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
