//! Client runtime: local training over normal graphs, the statistical client
//! embedding, test scoring, and the round upload message.
//!
//! A client never sends raw graphs: the upload is the updated global
//! parameters, a sample count, and the 3*d_z embedding. Gating parameters
//! stay local for the whole experiment.

use crate::autodiff::{adam_step, read_params, write_params, AdamHyper, AdamState, Tape};
use crate::encoding::StructureEncoding;
use crate::error::{Error, Result};
use crate::gating::{node_weights, GatingParams, GatingVars};
use crate::graph::{ClientDataset, Graph};
use crate::mat::Mat;
use crate::model::{
    forward, loss_from_errors, norm_adjacency, ForwardInput, GlobalModelParams, ModelDims,
    ModelVars,
};
use crate::rng;
use rand::seq::SliceRandom;

/// A graph with everything the forward pass needs precomputed once.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub graph: Graph,
    pub norm_adj: Mat,
    /// Structure channel input; all zeros under the no_se ablation.
    pub structure: Mat,
    /// Gating input X' = concat(X, S), or X alone under no_se.
    pub gate_input: Mat,
}

impl PreparedGraph {
    pub fn new(graph: Graph, se: StructureEncoding, drop_structure: bool) -> PreparedGraph {
        let norm_adj = norm_adjacency(&graph);
        let encoded = se.encode(&graph);
        let (structure, gate_input) = if drop_structure {
            (
                Mat::zeros(graph.node_count(), se.dim()),
                graph.features.clone(),
            )
        } else {
            (encoded.clone(), graph.features.concat_cols(&encoded))
        };
        PreparedGraph {
            graph,
            norm_adj,
            structure,
            gate_input,
        }
    }

    pub fn input(&self) -> ForwardInput<'_> {
        ForwardInput {
            features: &self.graph.features,
            structure: &self.structure,
            norm_adj: &self.norm_adj,
            adjacency: &self.graph.adjacency,
        }
    }
}

/// A client's datasets after encoding, ready for repeated rounds.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub client_id: usize,
    pub train: Vec<PreparedGraph>,
    pub test: Vec<PreparedGraph>,
}

impl PreparedDataset {
    pub fn new(ds: &ClientDataset, se: StructureEncoding, drop_structure: bool) -> PreparedDataset {
        let prep = |g: &Graph| PreparedGraph::new(g.clone(), se, drop_structure);
        PreparedDataset {
            client_id: ds.client_id,
            train: ds.train_normal.iter().map(prep).collect(),
            test: ds.test.iter().map(prep).collect(),
        }
    }

    pub fn sample_count(&self) -> usize {
        self.train.len()
    }
}

/// Knobs for one local training call.
#[derive(Debug, Clone, Copy)]
pub struct LocalTrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
    pub alpha: f64,
    pub beta: f64,
    /// None disables gating (the no_gate ablation): w = 1 identically.
    pub use_gate: bool,
    pub seed: u64,
}

const PATH_LOCAL_TRAIN: u64 = 0x4c54;

/// Loss (and gradients, when `grads` is given) for one graph under the
/// current parameters. Gradient order: model tensors then gate tensors.
fn graph_loss(
    prep: &PreparedGraph,
    model: &GlobalModelParams,
    gate: &GatingParams,
    cfg: &LocalTrainConfig,
    mut grads: Option<&mut [Mat]>,
    grad_scale: f64,
) -> Result<f64> {
    let mut tape = Tape::new();
    let mv = ModelVars::insert(&mut tape, model);
    let gv = GatingVars::insert(&mut tape, gate);
    let recon = forward(&mut tape, &prep.input(), &mv)?;
    let weights = if cfg.use_gate {
        let gi = tape.constant(prep.gate_input.clone());
        let nav = tape.constant(prep.norm_adj.clone());
        Some(node_weights(&mut tape, gi, nav, &gv, gate.tau)?)
    } else {
        None
    };
    let loss = loss_from_errors(&mut tape, recon.l_x, recon.l_a, weights, cfg.alpha, cfg.beta)?;
    let value = tape.scalar_value(loss);
    if let Some(grads) = grads.as_deref_mut() {
        tape.backward(loss)?;
        let vars: Vec<_> = mv.all().into_iter().chain(gv.all()).collect();
        for (slot, var) in grads.iter_mut().zip(vars) {
            slot.axpy(tape.grad(var)?, grad_scale);
        }
    }
    Ok(value)
}

/// Run `epochs` of Adam over seeded mini-batches of the training split,
/// minimizing the (gated) reconstruction loss jointly in both parameter
/// sets. Returns updated parameters and the per-epoch mean loss. A pure
/// function of its inputs: repeated calls agree bit-for-bit.
pub fn local_train(
    dataset: &PreparedDataset,
    global: &GlobalModelParams,
    gating: &GatingParams,
    cfg: &LocalTrainConfig,
) -> Result<(GlobalModelParams, GatingParams, Vec<f64>)> {
    if cfg.epochs < 1 {
        return Err(Error::Config("local_train needs epochs >= 1".into()));
    }
    if cfg.batch < 1 {
        return Err(Error::Config("batch size must be >= 1".into()));
    }
    if dataset.train.is_empty() {
        return Err(Error::Training {
            graph_index: 0,
            message: "no training graphs".into(),
        });
    }
    let mut model = global.clone();
    let mut gate = gating.clone();
    let zeros_like = |model: &GlobalModelParams, gate: &GatingParams| -> Vec<Mat> {
        model
            .named_tensors()
            .iter()
            .map(|(_, m)| Mat::zeros(m.rows(), m.cols()))
            .chain(gate.named_tensors().iter().map(|(_, m)| Mat::zeros(m.rows(), m.cols())))
            .collect()
    };
    let param_refs: Vec<&Mat> = model
        .named_tensors()
        .iter()
        .map(|(_, m)| *m)
        .chain(gate.named_tensors().iter().map(|(_, m)| *m))
        .collect();
    let mut state = AdamState::new_like(&param_refs);
    drop(param_refs);
    let hp = AdamHyper::with_lr(cfg.lr);

    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..dataset.train.len()).collect();
        order.shuffle(&mut rng::rng_for(cfg.seed, &[
            PATH_LOCAL_TRAIN,
            dataset.client_id as u64,
            epoch as u64,
        ]));
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch) {
            let mut grads = zeros_like(&model, &gate);
            let scale = 1.0 / chunk.len() as f64;
            for &gi in chunk {
                let loss = graph_loss(
                    &dataset.train[gi],
                    &model,
                    &gate,
                    cfg,
                    Some(&mut grads),
                    scale,
                )?;
                if !loss.is_finite() {
                    return Err(Error::Training {
                        graph_index: gi,
                        message: format!("non-finite loss {loss} in epoch {epoch}"),
                    });
                }
                epoch_loss += loss;
            }
            let grad_refs: Vec<&Mat> = grads.iter().collect();
            let mut model_tensors = model.named_tensors_mut();
            let mut gate_tensors = gate.named_tensors_mut();
            let mut params: Vec<&mut Mat> = model_tensors
                .iter_mut()
                .map(|(_, m)| &mut **m)
                .chain(gate_tensors.iter_mut().map(|(_, m)| &mut **m))
                .collect();
            adam_step(&mut state, &mut params, &grad_refs, &hp);
        }
        trace.push(epoch_loss / dataset.train.len() as f64);
    }
    Ok((model, gate, trace))
}

/// Mean-pool Z per training graph, then stack the pooled vectors and emit
/// [coordinate-wise mean || max || min], a 3*d_z summary. Gradients are
/// never taken through this path.
pub fn client_embedding(
    dataset: &PreparedDataset,
    model: &GlobalModelParams,
) -> Result<Vec<f64>> {
    let d_z = model.dims.latent;
    let mut pooled = Vec::with_capacity(dataset.train.len());
    for prep in &dataset.train {
        let mut tape = Tape::new();
        let mv = ModelVars::insert(&mut tape, model);
        let recon = forward(&mut tape, &prep.input(), &mv)?;
        let z = tape.value(recon.z);
        let n = z.rows() as f64;
        let mut g = vec![0.0; d_z];
        for i in 0..z.rows() {
            for (k, slot) in g.iter_mut().enumerate() {
                *slot += z.at(i, k) / n;
            }
        }
        pooled.push(g);
    }
    let mut out = vec![0.0; 3 * d_z];
    for k in 0..d_z {
        let column = pooled.iter().map(|g| g[k]);
        out[k] = column.clone().sum::<f64>() / pooled.len() as f64;
        out[d_z + k] = column.clone().fold(f64::NEG_INFINITY, f64::max);
        out[2 * d_z + k] = column.fold(f64::INFINITY, f64::min);
    }
    Ok(out)
}

/// Gated anomaly score for every test graph, in test order.
pub fn score_test_set(
    dataset: &PreparedDataset,
    model: &GlobalModelParams,
    gate: &GatingParams,
    cfg: &LocalTrainConfig,
) -> Result<Vec<(f64, bool)>> {
    dataset
        .test
        .iter()
        .map(|prep| {
            let score = graph_loss(prep, model, gate, cfg, None, 0.0)?;
            Ok((score, prep.graph.is_anomaly))
        })
        .collect()
}

/// One client's upload for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientRound {
    pub client_id: usize,
    /// N_c, the client's training sample count (aggregation weight).
    pub sample_count: usize,
    /// [mean || max || min] statistic, length 3*d_z.
    pub embedding: Vec<f64>,
    pub params: GlobalModelParams,
}

impl ClientRound {
    /// Wire format: client_id, N_c, d_z, model dims, embedding, param blob.
    /// All integers u64 little-endian, floats f64 little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let d_z = self.params.dims.latent;
        for v in [
            self.client_id as u64,
            self.sample_count as u64,
            d_z as u64,
            self.params.dims.feature_dim as u64,
            self.params.dims.structure_dim as u64,
            self.params.dims.hidden as u64,
            self.params.dims.layers as u64,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.embedding {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&write_params(&self.params.named_tensors()));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<ClientRound> {
        let header = 7 * 8;
        if bytes.len() < header {
            return Err(Error::Checkpoint("client round message too short".into()));
        }
        let u = |i: usize| {
            u64::from_le_bytes(bytes[i * 8..(i + 1) * 8].try_into().expect("sized")) as usize
        };
        let (client_id, sample_count, d_z) = (u(0), u(1), u(2));
        let dims = ModelDims {
            feature_dim: u(3),
            structure_dim: u(4),
            hidden: u(5),
            latent: d_z,
            layers: u(6),
        };
        let emb_len = 3 * d_z;
        let emb_end = header + emb_len * 8;
        if bytes.len() < emb_end {
            return Err(Error::Checkpoint("client round embedding truncated".into()));
        }
        let embedding: Vec<f64> = (0..emb_len)
            .map(|k| {
                f64::from_le_bytes(
                    bytes[header + k * 8..header + (k + 1) * 8]
                        .try_into()
                        .expect("sized"),
                )
            })
            .collect();
        let params = GlobalModelParams::from_named(dims, read_params(&bytes[emb_end..])?)?;
        Ok(ClientRound {
            client_id,
            sample_count,
            embedding,
            params,
        })
    }
}

#[cfg(test)]
mod tests;
