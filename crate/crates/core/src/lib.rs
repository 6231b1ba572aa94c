//! Federated graph-level anomaly detection.
//!
//! The pipeline trains a joint feature and structure reconstruction model on
//! normal graphs only, reweights per-node losses with a learned contribution
//! gate, and aggregates client updates on a server that clusters clients and
//! keeps the clustering honest with a sliding stability window. Everything is
//! deterministic given a seed: datasets, initialization, batching, clustering,
//! and aggregation.
//!
//! Entry points:
//! - [`experiment::run_experiment`] drives a full in-process federation run
//!   from an [`config::ExperimentConfig`].
//! - [`client`] and [`server`] expose the per-round pieces for embedding the
//!   pipeline in another trainer.

pub mod autodiff;
pub mod client;
pub mod config;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod experiment;
pub mod gating;
pub mod graph;
pub mod mat;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod server;

pub use error::{Error, Result};
pub use graph::{ClientDataset, FederatedDataset, Graph, Scenario};
pub use mat::Mat;
