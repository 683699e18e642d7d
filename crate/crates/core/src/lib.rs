//! Linear regression when the labels arrive in an unknown order.
//!
//! Observations follow `y = π(X w0) + e` for an unknown permutation `π`.
//! Rows may be grouped into replications: blocks that are shuffled
//! independently but whose membership is known.
//!
//! The main entry point is [`estimate`], which fits an [`EstimatorChoice`]
//! to a [`Dataset`]:
//!
//! ```
//! use shufreg::{estimate, Dataset, EstimatorChoice, EstimatorKind};
//!
//! let x = vec![vec![1.0], vec![2.0], vec![3.0]];
//! let ds = Dataset::from_rows(&x, vec![6.0, 2.0, 4.0]).unwrap();
//! let fit = estimate(&ds, &EstimatorChoice::new(EstimatorKind::Sm)).unwrap();
//! assert_eq!(fit.weights[0], 2.0);
//! ```
//!
//! Modules:
//! - [`data`]: datasets, normalization, replication splits, least squares.
//! - [`synth`]: Gaussian designs, permutations and noise.
//! - [`losses`]: sorted least squares, self-moments and other
//!   order-invariant losses.
//! - [`optim`]: multi-start descent with numerical gradients.
//! - [`estimators`]: closed forms, projection hybrids and dispatch.
//! - [`theory`]: population limits used as reference values.
//! - [`bench`]: studies, sweeps and the dataset protocol.
//! - [`cli`]: the `shufreg` command.

pub mod bench;
pub mod cli;
pub mod csv_io;
pub mod data;
pub mod error;
pub mod estimators;
pub mod losses;
pub mod optim;
pub mod rng;
pub mod synth;
pub mod theory;

pub use data::{relative_error, Dataset, WeightVector};
pub use error::{Error, Result};
pub use estimators::{estimate, estimate_resolved, EstimatorChoice, EstimatorKind};
pub use losses::{LossKind, LossSpec};
pub use optim::{FitConfig, FitResult};
pub use rng::Seed;
