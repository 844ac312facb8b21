//! Thermal sensation modeling toolkit.
//!
//! Survey records from several field studies are ingested into a canonical
//! form, merged onto a five-point sensation scale and used to train
//! classifiers for a single target building. The central model is a
//! multilayer perceptron trained on a pooled (optionally climate-filtered)
//! source dataset whose last hidden layer is kept frozen while the
//! remaining layers are re-fitted on the target building.
//!
//! Module map:
//!
//! - [`dataset`]: ingestion, class merging, standardization, climate filters
//! - [`pmv`]: Fanger heat-balance PMV and its five-class mapping
//! - [`neural`]: from-scratch MLP with Adam and per-layer freezing
//! - [`resampling`]: minority-class synthesis (interpolation or GAN)
//! - [`transfer`]: source pooling, source training, layer retention
//! - [`baselines`]: random, k-NN, Gaussian naive Bayes, CART, random forest
//! - [`evaluation`]: k-fold harness, metrics, experiment suites
//! - [`fixtures`]: checked-in fixture validation

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod fixtures;
pub mod matrix;
pub mod neural;
pub mod pmv;
pub mod resampling;
pub mod rng;
pub mod transfer;

pub use error::{Error, Result};
pub use matrix::Matrix;
