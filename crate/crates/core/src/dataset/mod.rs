//! Dataset ingestion, anomaly labeling, client partitioning, and synthetic
//! graph generation.

mod partition;
mod synthetic;
mod tudataset;

pub use partition::{label_anomalies, partition_multi, partition_single};
pub use synthetic::{generate_synthetic, FeatureSpec, GeneratorSpec, NodeRange, Topology};
pub use tudataset::{parse_tudataset, write_tudataset};
