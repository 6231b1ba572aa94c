//! Structure encodings: capped degree one-hots and random-walk return
//! probabilities.
//!
//! Both encodings are exactly permutation equivariant: relabeling the nodes
//! of a graph permutes the encoding rows bit-for-bit. For the random-walk
//! channel this requires summing matrix-product terms in a canonical order,
//! since plain row-major accumulation rounds differently under relabeling.

use crate::graph::Graph;
use crate::mat::Mat;

/// Configuration for the combined structure encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureEncoding {
    /// Degrees at or above this value share the top one-hot bin.
    pub d_cap: usize,
    /// Number of random-walk steps; column k holds diag(P^(k+1)).
    pub k_rw: usize,
}

impl StructureEncoding {
    /// Width of the encoding: d_cap + 1 degree bins plus k_rw walk columns.
    pub fn dim(&self) -> usize {
        self.d_cap + 1 + self.k_rw
    }

    /// Degree one-hots concatenated with random-walk return probabilities,
    /// one row per node.
    pub fn encode(&self, g: &Graph) -> Mat {
        degree_encoding(g, self.d_cap).concat_cols(&rwse(g, self.k_rw))
    }
}

/// One-hot encoding of min(degree, d_cap) into d_cap + 1 bins.
pub fn degree_encoding(g: &Graph, d_cap: usize) -> Mat {
    let n = g.node_count();
    let mut out = Mat::zeros(n, d_cap + 1);
    for i in 0..n {
        out.set(i, g.degree(i).min(d_cap), 1.0);
    }
    out
}

/// Random-walk return probabilities diag(P^k) for k = 1..=k_rw, where
/// P = D^-1 A and rows of isolated nodes are zero.
///
/// Every inner-product accumulation sorts its terms before summing, making
/// the result independent of node order at full f64 precision.
pub fn rwse(g: &Graph, k_rw: usize) -> Mat {
    let n = g.node_count();
    let mut p = Mat::zeros(n, n);
    for i in 0..n {
        let d = g.degree(i);
        if d == 0 {
            continue;
        }
        let inv = 1.0 / d as f64;
        for j in 0..n {
            if g.adjacency.at(i, j) != 0.0 {
                p.set(i, j, inv);
            }
        }
    }

    let mut out = Mat::zeros(n, k_rw);
    let mut walk = p.clone();
    let mut terms = Vec::with_capacity(n);
    for k in 0..k_rw {
        for i in 0..n {
            out.set(i, k, walk.at(i, i));
        }
        if k + 1 == k_rw {
            break;
        }
        let mut next = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                terms.clear();
                for m in 0..n {
                    let t = walk.at(i, m) * p.at(m, j);
                    if t != 0.0 {
                        terms.push(t);
                    }
                }
                terms.sort_by(|a, b| a.total_cmp(b));
                next.set(i, j, terms.iter().sum());
            }
        }
        walk = next;
    }
    out
}
