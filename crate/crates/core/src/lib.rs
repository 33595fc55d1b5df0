//! Periodicity testing through sliding-window embeddings and persistent
//! homology.
//!
//! A sampled signal is embedded with a time-delay map, optionally
//! centralized and normalized, and the 1-dimensional Rips persistence of the
//! resulting cloud is compared against a subsampling confidence radius. A
//! loop that outlives the radius marks the signal as periodic. A generalized
//! Lomb-Scargle periodogram is provided as the classical baseline.
//!
//! The geometric and topological routines are generic over [`Scalar`]
//! (`f32` or `f64`); the aliases below fix the scalar to `f64`.

pub mod embedding;
pub mod error;
pub mod geometry;
pub mod gls;
pub mod inference;
pub mod persistence;
pub mod rng;
pub mod scalar;
pub mod signal;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use embedding::{CloudTag, EmbeddingParams, PostProcess};
pub use gls::{gls_periodogram, gls_test, GlsOutcome, Periodogram};
pub use inference::{BoundVariant, SubsampleConfig, TestSpec};
pub use signal::{FunctionSpec, NoiseKind, NoiseSpec, SampledSignal};

pub type PointCloud = embedding::PointCloud<f64>;
pub type PointCloud32 = embedding::PointCloud<f32>;
pub type DistanceMatrix = geometry::DistanceMatrix<f64>;
pub type DistanceMatrix32 = geometry::DistanceMatrix<f32>;
pub type PersistencePair = persistence::PersistencePair<f64>;
pub type PersistenceDiagram = persistence::PersistenceDiagram<f64>;
pub type PersistenceDiagram32 = persistence::PersistenceDiagram<f32>;
pub type FiltrationSpec = persistence::FiltrationSpec<f64>;
pub type ConfidenceBound = inference::ConfidenceBound<f64>;
pub type ConfidenceBound32 = inference::ConfidenceBound<f32>;
pub type TestOutcome = inference::TestOutcome<f64>;
