//! Server runtime: client-embedding clustering, the sliding-window stability
//! protocol, and cluster-wise parameter aggregation.
//!
//! The server never sees raw graphs. Each round it receives one
//! [`crate::client::ClientRound`] per client, clusters the embedded client
//! representations, and maintains one aggregated model per cluster. The
//! window protocol skips re-clustering while assignments are stable.

pub mod aggregate;
pub mod ari;
pub mod kmeans;
pub mod window;

pub use aggregate::{aggregate, broadcast, ClusterModelBank};
pub use ari::adjusted_rand_index;
pub use kmeans::{kmeans, ClusterAssignment};
pub use window::{ClusterWindow, Phase, WindowStep};
