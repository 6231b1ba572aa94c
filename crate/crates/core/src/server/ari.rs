//! Adjusted Rand Index between two cluster assignments.

use super::kmeans::ClusterAssignment;
use crate::error::{Error, Result};

fn comb2(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Chance-corrected agreement between two partitions of the same clients,
/// in [-1, 1]. Computed from the contingency table as
/// (Index - Expected) / (Max - Expected). Degenerate pairs with a zero
/// denominator (both single-cluster, or both all-singleton) compare equal
/// partitions and are defined as 1.
pub fn adjusted_rand_index(a: &ClusterAssignment, b: &ClusterAssignment) -> Result<f64> {
    let n = a.clients();
    if n != b.clients() {
        return Err(Error::Evaluation(format!(
            "cannot compare partitions of {} and {} clients",
            n,
            b.clients()
        )));
    }

    let mut table = vec![0u64; a.k * b.k];
    for i in 0..n {
        table[a.assignment[i] * b.k + b.assignment[i]] += 1;
    }
    let index: f64 = table.iter().map(|&x| comb2(x)).sum();
    let sum_a: f64 = (0..a.k)
        .map(|r| comb2((0..b.k).map(|c| table[r * b.k + c]).sum()))
        .sum();
    let sum_b: f64 = (0..b.k)
        .map(|c| comb2((0..a.k).map(|r| table[r * b.k + c]).sum()))
        .sum();
    let total = comb2(n as u64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let denominator = 0.5 * (sum_a + sum_b) - expected;
    if denominator == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denominator)
}
