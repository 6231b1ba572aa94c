//! Cluster-wise weighted parameter aggregation.

use std::collections::BTreeMap;

use super::kmeans::ClusterAssignment;
use crate::client::ClientRound;
use crate::error::{Error, Result};
use crate::model::GlobalModelParams;

/// One aggregated model per nonempty cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModelBank {
    pub models: BTreeMap<usize, GlobalModelParams>,
}

/// Aggregate uploaded parameters within each cluster, weighting every client
/// by its training sample count. Single-member clusters pass parameters
/// through bit-for-bit.
pub fn aggregate(rounds: &[ClientRound], assignment: &ClusterAssignment) -> Result<ClusterModelBank> {
    let c = assignment.clients();
    if rounds.len() != c {
        return Err(Error::Aggregation(format!(
            "{} uploads for {} assigned clients",
            rounds.len(),
            c
        )));
    }
    let mut by_id: Vec<Option<&ClientRound>> = vec![None; c];
    for round in rounds {
        let slot = by_id
            .get_mut(round.client_id)
            .ok_or_else(|| Error::Aggregation(format!("unknown client id {}", round.client_id)))?;
        if slot.is_some() {
            return Err(Error::Aggregation(format!(
                "duplicate upload from client {}",
                round.client_id
            )));
        }
        *slot = Some(round);
    }
    let by_id: Vec<&ClientRound> = by_id.into_iter().map(|s| s.unwrap()).collect();

    let mut models = BTreeMap::new();
    for cluster in 0..assignment.k {
        let members = assignment.members(cluster);
        let Some((&first, rest)) = members.split_first() else {
            continue;
        };
        if rest.is_empty() {
            models.insert(cluster, by_id[first].params.clone());
            continue;
        }
        let total: usize = members.iter().map(|&id| by_id[id].sample_count).sum();
        if total == 0 {
            return Err(Error::Aggregation(format!(
                "cluster {cluster} has zero total sample count"
            )));
        }
        let dims = by_id[first].params.dims;
        let mut acc = GlobalModelParams::zeros(dims)?;
        for &id in &members {
            let params = &by_id[id].params;
            if params.dims != dims {
                return Err(Error::Aggregation(format!(
                    "client {id} uploaded mismatched model dimensions"
                )));
            }
            let weight = by_id[id].sample_count as f64 / total as f64;
            for ((_, slot), (_, tensor)) in acc
                .named_tensors_mut()
                .into_iter()
                .zip(params.named_tensors())
            {
                slot.axpy(tensor, weight);
            }
        }
        models.insert(cluster, acc);
    }
    Ok(ClusterModelBank { models })
}

/// Hand every client its cluster's aggregated model, indexed by client id.
pub fn broadcast(
    bank: &ClusterModelBank,
    assignment: &ClusterAssignment,
) -> Result<Vec<GlobalModelParams>> {
    assignment
        .assignment
        .iter()
        .enumerate()
        .map(|(client, &cluster)| {
            bank.models.get(&cluster).cloned().ok_or_else(|| {
                Error::Aggregation(format!(
                    "client {client} assigned to cluster {cluster} with no model"
                ))
            })
        })
        .collect()
}
