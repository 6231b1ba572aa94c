//! Anomaly labeling and client partitioning.

use crate::error::{Error, Result};
use crate::graph::{ClientDataset, FederatedDataset, Graph, Scenario};
use crate::rng;
use rand::seq::SliceRandom;

const PATH_PARTITION: u64 = 0x504152;

/// Flag graphs whose class label equals `anomaly_class`; `None` selects the
/// smallest label present.
pub fn label_anomalies(mut graphs: Vec<Graph>, anomaly_class: Option<i64>) -> Result<Vec<Graph>> {
    let smallest = graphs.iter().map(|g| g.class_label).min().ok_or_else(|| {
        Error::Config("cannot label anomalies in an empty graph set".into())
    })?;
    let class = anomaly_class.unwrap_or(smallest);
    if !graphs.iter().any(|g| g.class_label == class) {
        return Err(Error::Config(format!(
            "anomaly class {class} does not appear in the dataset"
        )));
    }
    for g in &mut graphs {
        g.is_anomaly = g.class_label == class;
    }
    Ok(graphs)
}

fn check_fraction(train_fraction: f64) -> Result<()> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Partition(format!(
            "train_fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    Ok(())
}

/// Split one client's dealt graphs: the first floor(train_fraction * normals)
/// normal graphs train; every other graph tests, in dealt order.
fn split_client(client_id: usize, dealt: Vec<Graph>, train_fraction: f64) -> Result<ClientDataset> {
    let normal_count = dealt.iter().filter(|g| !g.is_anomaly).count();
    let train_take = (train_fraction * normal_count as f64).floor() as usize;
    let mut train_normal = Vec::with_capacity(train_take);
    let mut test = Vec::new();
    let mut normals_seen = 0usize;
    for g in dealt {
        if !g.is_anomaly && normals_seen < train_take {
            normals_seen += 1;
            train_normal.push(g);
        } else {
            test.push(g);
        }
    }
    ClientDataset::new(client_id, train_normal, test)
}

/// Shuffle with the seed, deal round-robin, split each client.
pub fn partition_single(
    graphs: Vec<Graph>,
    num_clients: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<FederatedDataset> {
    if num_clients < 1 {
        return Err(Error::Partition("need at least one client".into()));
    }
    check_fraction(train_fraction)?;
    let mut order: Vec<usize> = (0..graphs.len()).collect();
    order.shuffle(&mut rng::rng_for(seed, &[PATH_PARTITION, 0]));

    let mut per_client: Vec<Vec<Graph>> = (0..num_clients).map(|_| Vec::new()).collect();
    let mut graphs: Vec<Option<Graph>> = graphs.into_iter().map(Some).collect();
    for (deal_pos, &idx) in order.iter().enumerate() {
        per_client[deal_pos % num_clients].push(graphs[idx].take().expect("dealt once"));
    }

    let clients = per_client
        .into_iter()
        .enumerate()
        .map(|(cid, dealt)| split_client(cid, dealt, train_fraction))
        .collect::<Result<Vec<_>>>()?;
    FederatedDataset::new(clients, Scenario::SingleDataset)
}

/// One client per named dataset; features zero-padded to the widest dataset
/// so a single global model fits all clients.
pub fn partition_multi(
    datasets: Vec<(String, Vec<Graph>)>,
    train_fraction: f64,
    seed: u64,
) -> Result<FederatedDataset> {
    if datasets.len() < 2 {
        return Err(Error::Partition(format!(
            "multi-dataset scenario needs at least 2 datasets, got {}",
            datasets.len()
        )));
    }
    check_fraction(train_fraction)?;
    let max_dim = datasets
        .iter()
        .flat_map(|(_, gs)| gs.iter().map(|g| g.feature_dim()))
        .max()
        .unwrap_or(1);

    let mut clients = Vec::with_capacity(datasets.len());
    for (cid, (_name, mut gs)) in datasets.into_iter().enumerate() {
        for g in &mut gs {
            g.pad_features(max_dim);
        }
        let mut order: Vec<usize> = (0..gs.len()).collect();
        order.shuffle(&mut rng::rng_for(seed, &[PATH_PARTITION, 1, cid as u64]));
        let mut gs: Vec<Option<Graph>> = gs.into_iter().map(Some).collect();
        let dealt: Vec<Graph> = order
            .iter()
            .map(|&i| gs[i].take().expect("dealt once"))
            .collect();
        clients.push(split_client(cid, dealt, train_fraction)?);
    }
    FederatedDataset::new(clients, Scenario::MultiDataset)
}
