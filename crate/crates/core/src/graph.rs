//! Graph instances and their federated groupings.

use crate::error::{Error, Result};
use crate::mat::Mat;
use serde::{Deserialize, Serialize};

/// One graph: dense 0/1 adjacency, node features, class label, anomaly flag.
///
/// Adjacency is symmetric with a zero diagonal; features have one row per
/// node. Datasets without node information get a single all-ones feature
/// column so that cosine reconstruction errors stay well defined.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub adjacency: Mat,
    pub features: Mat,
    pub class_label: i64,
    pub is_anomaly: bool,
}

impl Graph {
    /// Build a graph and check the structural invariants.
    pub fn new(adjacency: Mat, features: Mat, class_label: i64) -> Result<Graph> {
        let g = Graph {
            adjacency,
            features,
            class_label,
            is_anomaly: false,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency.row(node).iter().filter(|&&v| v != 0.0).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|i| self.degree(i)).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        let n = self.node_count();
        let mut e = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.adjacency.at(i, j) != 0.0 {
                    e += 1;
                }
            }
        }
        e
    }

    /// Relabel nodes: node `i` of the result is node `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let n = self.node_count();
        assert_eq!(perm.len(), n, "permutation length mismatch");
        let mut adj = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                adj.set(i, j, self.adjacency.at(perm[i], perm[j]));
            }
        }
        let m = self.feature_dim();
        let mut feats = Mat::zeros(n, m);
        for i in 0..n {
            for c in 0..m {
                feats.set(i, c, self.features.at(perm[i], c));
            }
        }
        Graph {
            adjacency: adj,
            features: feats,
            class_label: self.class_label,
            is_anomaly: self.is_anomaly,
        }
    }

    /// Pad the feature matrix with zero columns up to `dim`.
    pub fn pad_features(&mut self, dim: usize) {
        let m = self.feature_dim();
        if m >= dim {
            return;
        }
        let pad = Mat::zeros(self.node_count(), dim - m);
        self.features = self.features.concat_cols(&pad);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.adjacency.rows();
        if n == 0 {
            return Err(Error::Config("graph must have at least one node".into()));
        }
        if self.adjacency.cols() != n {
            return Err(Error::Shape {
                op: "graph adjacency",
                lhs: self.adjacency.shape(),
                rhs: (n, n),
            });
        }
        for i in 0..n {
            if self.adjacency.at(i, i) != 0.0 {
                return Err(Error::Config(format!("nonzero diagonal at node {i}")));
            }
            for j in 0..n {
                let v = self.adjacency.at(i, j);
                if v != 0.0 && v != 1.0 {
                    return Err(Error::Config(format!(
                        "adjacency entry ({i},{j}) = {v}, expected 0 or 1"
                    )));
                }
                if v != self.adjacency.at(j, i) {
                    return Err(Error::Config(format!(
                        "adjacency not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if self.features.rows() != n {
            return Err(Error::Shape {
                op: "graph features",
                lhs: self.features.shape(),
                rhs: (n, self.features.cols()),
            });
        }
        Ok(())
    }
}

/// How graphs were spread across clients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// One dataset dealt randomly across clients (IID).
    SingleDataset,
    /// One whole dataset per client (non-IID).
    MultiDataset,
}

/// A client's local split: normal-only training graphs plus a mixed test set.
#[derive(Debug, Clone)]
pub struct ClientDataset {
    pub client_id: usize,
    pub train_normal: Vec<Graph>,
    pub test: Vec<Graph>,
    pub feature_dim: usize,
}

impl ClientDataset {
    /// Build and validate; feature_dim is taken from the first graph.
    pub fn new(client_id: usize, train_normal: Vec<Graph>, test: Vec<Graph>) -> Result<ClientDataset> {
        let feature_dim = train_normal
            .first()
            .or_else(|| test.first())
            .map(|g| g.feature_dim())
            .unwrap_or(0);
        let ds = ClientDataset {
            client_id,
            train_normal,
            test,
            feature_dim,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_normal.iter().any(|g| g.is_anomaly) {
            return Err(Error::Partition(format!(
                "client {}: anomalous graph in train_normal",
                self.client_id
            )));
        }
        if self.train_normal.is_empty() {
            return Err(Error::Partition(format!(
                "client {}: no normal training graphs",
                self.client_id
            )));
        }
        let test_anoms = self.test.iter().filter(|g| g.is_anomaly).count();
        if test_anoms == 0 || test_anoms == self.test.len() {
            return Err(Error::Partition(format!(
                "client {}: test set needs both normal and anomalous graphs (got {} anomalies of {})",
                self.client_id,
                test_anoms,
                self.test.len()
            )));
        }
        for g in self.train_normal.iter().chain(&self.test) {
            if g.feature_dim() != self.feature_dim {
                return Err(Error::Partition(format!(
                    "client {}: inconsistent feature dim {} (expected {})",
                    self.client_id,
                    g.feature_dim(),
                    self.feature_dim
                )));
            }
        }
        Ok(())
    }
}

/// All clients of one simulated federation.
#[derive(Debug, Clone)]
pub struct FederatedDataset {
    pub clients: Vec<ClientDataset>,
    pub scenario: Scenario,
}

impl FederatedDataset {
    pub fn new(clients: Vec<ClientDataset>, scenario: Scenario) -> Result<FederatedDataset> {
        let fed = FederatedDataset { clients, scenario };
        fed.validate()?;
        Ok(fed)
    }

    pub fn num_clients(&self) -> usize {
        self.clients.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.clients.iter().enumerate() {
            if c.client_id != i {
                return Err(Error::Partition(format!(
                    "client ids must be 0..C-1 in order, found {} at position {i}",
                    c.client_id
                )));
            }
            c.validate()?;
        }
        Ok(())
    }

    /// Largest node degree over every client's training split.
    pub fn max_train_degree(&self) -> usize {
        self.clients
            .iter()
            .flat_map(|c| c.train_normal.iter())
            .map(|g| g.max_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn feature_dim(&self) -> usize {
        self.clients.first().map(|c| c.feature_dim).unwrap_or(0)
    }
}
