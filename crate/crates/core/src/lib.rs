//! Streaming Hermite series estimators.
//!
//! A sketch keeps a fixed number of Hermite series coefficients and updates
//! them in constant time per observation. From that state it answers
//! density, distribution-function and quantile queries (univariate) or
//! density, distribution-function, Spearman and Kendall queries
//! (bivariate). Sketches built on separate shards of a data set merge into
//! one.
//!
//! ```
//! use hermite_sketch::{QuantileAlgorithm, UnivariateSketch};
//!
//! let mut sketch = UnivariateSketch::default();
//! let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
//! sketch.update_batch(&xs).unwrap();
//! let median = sketch.quantiles(&[0.5], QuantileAlgorithm::Interpolate, true).unwrap();
//! assert!(median[0].abs() < 0.1);
//! ```

pub mod basis;
pub mod bivariate;
mod error;
pub mod format;
pub mod ingest;
pub mod merge;
pub mod moments;
pub mod series;
pub mod univariate;

pub use basis::{BasisTables, GaussHermite, MAX_ORDER};
pub use bivariate::{BivariateParts, BivariateSketch};
pub use error::{Error, Result};
pub use format::{deserialize, serialize, Sketch, SketchFile};
pub use merge::{merge_bivariate, merge_univariate};
pub use moments::{MomentMode, RunningMoments};
pub use univariate::{QuantileAlgorithm, QueryOptions, UnivariateSketch, DEFAULT_ORDER};
