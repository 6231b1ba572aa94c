//! Joint feature and structure reconstruction model.
//!
//! Two GCN encoders read the node features X and the structure encoding S
//! over the same adjacency; a fusion MLP produces the latent Z; a GCN decoder
//! rebuilds X while a parameter-free dot product rebuilds A. The loss blends
//! mean and spread of both reconstruction errors, and the same scalar serves
//! as the anomaly score: larger means more anomalous.

use crate::autodiff::{read_params, write_params, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mat::Mat;
use crate::rng;
use rand::Rng;

/// Width of every block, fixed for one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    /// Node feature width m.
    pub feature_dim: usize,
    /// Structure encoding width d_s.
    pub structure_dim: usize,
    /// GCN and fusion hidden width h.
    pub hidden: usize,
    /// Latent width d_z.
    pub latent: usize,
    /// GCN layers per encoder/decoder block.
    pub layers: usize,
}

impl ModelDims {
    pub fn validate(&self) -> Result<()> {
        let all_positive = self.feature_dim >= 1
            && self.structure_dim >= 1
            && self.hidden >= 1
            && self.latent >= 1
            && self.layers >= 1;
        if !all_positive {
            return Err(Error::Config(format!("model dims must be positive: {self:?}")));
        }
        Ok(())
    }

    fn enc_shapes(&self, input: usize) -> Vec<(usize, usize)> {
        let mut v = vec![(input, self.hidden)];
        v.extend(std::iter::repeat((self.hidden, self.hidden)).take(self.layers - 1));
        v
    }

    fn fusion_shapes(&self) -> Vec<(usize, usize)> {
        vec![(2 * self.hidden, self.hidden), (self.hidden, self.latent)]
    }

    fn dec_shapes(&self) -> Vec<(usize, usize)> {
        if self.layers == 1 {
            return vec![(self.latent, self.feature_dim)];
        }
        let mut v = vec![(self.latent, self.hidden)];
        v.extend(std::iter::repeat((self.hidden, self.hidden)).take(self.layers - 2));
        v.push((self.hidden, self.feature_dim));
        v
    }
}

/// The aggregated (server-visible) parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalModelParams {
    pub dims: ModelDims,
    pub enc_f: Vec<Mat>,
    pub enc_s: Vec<Mat>,
    pub fusion: Vec<Mat>,
    pub dec_f: Vec<Mat>,
}

const PATH_MODEL_INIT: u64 = 0x4d494e49;

fn xavier(shape: (usize, usize), seed: u64, tensor_index: u64) -> Mat {
    let (rows, cols) = shape;
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let mut r = rng::rng_for(seed, &[PATH_MODEL_INIT, tensor_index]);
    let mut m = Mat::zeros(rows, cols);
    for i in 0..m.len() {
        m.data_mut()[i] = r.random_range(-limit..limit);
    }
    m
}

impl GlobalModelParams {
    /// Xavier-uniform initialization, a pure function of (dims, seed).
    pub fn init(dims: ModelDims, seed: u64) -> Result<GlobalModelParams> {
        dims.validate()?;
        let mut tensor_index = 0u64;
        let mut block = |shapes: Vec<(usize, usize)>| -> Vec<Mat> {
            shapes
                .into_iter()
                .map(|s| {
                    let m = xavier(s, seed, tensor_index);
                    tensor_index += 1;
                    m
                })
                .collect()
        };
        Ok(GlobalModelParams {
            dims,
            enc_f: block(dims.enc_shapes(dims.feature_dim)),
            enc_s: block(dims.enc_shapes(dims.structure_dim)),
            fusion: block(dims.fusion_shapes()),
            dec_f: block(dims.dec_shapes()),
        })
    }

    /// All-zero tensors with the same structure, an accumulator shape.
    pub fn zeros(dims: ModelDims) -> Result<GlobalModelParams> {
        dims.validate()?;
        let block = |shapes: Vec<(usize, usize)>| -> Vec<Mat> {
            shapes.into_iter().map(|(r, c)| Mat::zeros(r, c)).collect()
        };
        Ok(GlobalModelParams {
            dims,
            enc_f: block(dims.enc_shapes(dims.feature_dim)),
            enc_s: block(dims.enc_shapes(dims.structure_dim)),
            fusion: block(dims.fusion_shapes()),
            dec_f: block(dims.dec_shapes()),
        })
    }

    /// Tensors in canonical order with stable names.
    pub fn named_tensors(&self) -> Vec<(String, &Mat)> {
        let mut out = Vec::new();
        for (block, mats) in [
            ("enc_f", &self.enc_f),
            ("enc_s", &self.enc_s),
            ("fusion", &self.fusion),
            ("dec_f", &self.dec_f),
        ] {
            for (i, m) in mats.iter().enumerate() {
                out.push((format!("{block}.{i}"), m));
            }
        }
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Mat)> {
        let mut out = Vec::new();
        for (block, mats) in [
            ("enc_f", &mut self.enc_f),
            ("enc_s", &mut self.enc_s),
            ("fusion", &mut self.fusion),
            ("dec_f", &mut self.dec_f),
        ] {
            for (i, m) in mats.iter_mut().enumerate() {
                out.push((format!("{block}.{i}"), m));
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.named_tensors().iter().map(|(_, m)| m.len()).sum()
    }

    /// Rebuild from named tensors, checking that every expected tensor is
    /// present with the right shape.
    pub fn from_named(dims: ModelDims, entries: Vec<(String, Mat)>) -> Result<GlobalModelParams> {
        let mut template = GlobalModelParams::init(dims, 0)?;
        let expected: Vec<String> = template.named_tensors().iter().map(|(n, _)| n.clone()).collect();
        if entries.len() != expected.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                expected.len(),
                entries.len()
            )));
        }
        for ((name, mat), (slot_name, slot)) in
            entries.into_iter().zip(template.named_tensors_mut())
        {
            if name != slot_name {
                return Err(Error::Checkpoint(format!(
                    "tensor {name} out of order, expected {slot_name}"
                )));
            }
            if mat.shape() != slot.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor {name} has shape {}x{}, expected {}x{}",
                    mat.shape().0,
                    mat.shape().1,
                    slot.shape().0,
                    slot.shape().1
                )));
            }
            *slot = mat;
        }
        Ok(template)
    }
}

/// Symmetric GCN propagation matrix: D~^(-1/2) (A + I) D~^(-1/2).
pub fn norm_adjacency(g: &Graph) -> Mat {
    let n = g.node_count();
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / ((g.degree(i) + 1) as f64).sqrt()).collect();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let a = if i == j { 1.0 } else { g.adjacency.at(i, j) };
            if a != 0.0 {
                out.set(i, j, inv_sqrt[i] * inv_sqrt[j]);
            }
        }
    }
    out
}

/// One graph-convolution layer: relu(N H W), or N H W when `apply_relu` is
/// false (stack-final layers stay linear).
pub fn gcn_layer(tape: &mut Tape, norm_adj: Var, h: Var, w: Var, apply_relu: bool) -> Result<Var> {
    let propagated = tape.matmul(norm_adj, h)?;
    let mixed = tape.matmul(propagated, w)?;
    if apply_relu {
        tape.relu(mixed)
    } else {
        Ok(mixed)
    }
}

/// GCN stack; relu between layers, final layer linear.
pub fn gnn_stack(tape: &mut Tape, norm_adj: Var, input: Var, weights: &[Var]) -> Result<Var> {
    let mut h = input;
    for (i, &w) in weights.iter().enumerate() {
        h = gcn_layer(tape, norm_adj, h, w, i + 1 < weights.len())?;
    }
    Ok(h)
}

/// Model parameters inserted into a tape as trainable leaves.
pub struct ModelVars {
    pub enc_f: Vec<Var>,
    pub enc_s: Vec<Var>,
    pub fusion: Vec<Var>,
    pub dec_f: Vec<Var>,
}

impl ModelVars {
    pub fn insert(tape: &mut Tape, p: &GlobalModelParams) -> ModelVars {
        let ins = |tape: &mut Tape, mats: &[Mat]| mats.iter().map(|m| tape.param(m.clone())).collect();
        ModelVars {
            enc_f: ins(tape, &p.enc_f),
            enc_s: ins(tape, &p.enc_s),
            fusion: ins(tape, &p.fusion),
            dec_f: ins(tape, &p.dec_f),
        }
    }

    /// Canonical order matching `GlobalModelParams::named_tensors`.
    pub fn all(&self) -> Vec<Var> {
        self.enc_f
            .iter()
            .chain(&self.enc_s)
            .chain(&self.fusion)
            .chain(&self.dec_f)
            .copied()
            .collect()
    }
}

/// Per-graph tensors the forward pass reads.
pub struct ForwardInput<'a> {
    pub features: &'a Mat,
    pub structure: &'a Mat,
    pub norm_adj: &'a Mat,
    pub adjacency: &'a Mat,
}

/// Tape handles for the forward pass outputs.
#[derive(Clone, Copy)]
pub struct ReconVars {
    pub z: Var,
    pub x_hat: Var,
    pub a_hat: Var,
    /// Per-node cosine reconstruction error, n x 1, entries in [0,2].
    pub l_x: Var,
    /// Per-pair nonnegative adjacency BCE, n x n (diagonal included).
    pub l_a: Var,
}

/// Materialized forward outputs, for inspection and tests.
#[derive(Debug, Clone)]
pub struct ReconOutput {
    pub z: Mat,
    pub x_hat: Mat,
    pub a_hat: Mat,
    pub l_x: Mat,
    pub l_a: Mat,
}

impl ReconOutput {
    pub fn from_vars(tape: &Tape, vars: ReconVars) -> ReconOutput {
        ReconOutput {
            z: tape.value(vars.z).clone(),
            x_hat: tape.value(vars.x_hat).clone(),
            a_hat: tape.value(vars.a_hat).clone(),
            l_x: tape.value(vars.l_x).clone(),
            l_a: tape.value(vars.l_a).clone(),
        }
    }
}

/// Per-node cosine reconstruction error 1 - cos(x_i, x_hat_i) as an n x 1
/// column. Rows with near-zero norm on either side contribute the maximal
/// ignorance value 1.
pub fn cosine_errors(tape: &mut Tape, x: Var, x_hat: Var) -> Result<Var> {
    let (n, m) = tape.value(x).shape();
    let xn = tape.row_l2_normalize(x)?;
    let hn = tape.row_l2_normalize(x_hat)?;
    let prod = tape.mul(xn, hn)?;
    let ones_col = tape.constant(Mat::filled(m, 1, 1.0));
    let cos = tape.matmul(prod, ones_col)?;
    let ones_n = tape.constant(Mat::filled(n, 1, 1.0));
    tape.sub(ones_n, cos)
}

/// Elementwise adjacency BCE over all n^2 pairs:
/// -(A log A_hat + (1-A) log(1-A_hat)), with A_hat clamped away from {0,1}.
pub fn bce_errors(tape: &mut Tape, a_hat: Var, adjacency: Var) -> Result<Var> {
    let (n, _) = tape.value(a_hat).shape();
    let clamped = tape.clamp(a_hat, 1e-7, 1.0 - 1e-7)?;
    let log_p = tape.log(clamped)?;
    let pos = tape.mul(adjacency, log_p)?;
    let ones = tape.constant(Mat::filled(n, n, 1.0));
    let inv_a = tape.sub(ones, adjacency)?;
    let ones2 = tape.constant(Mat::filled(n, n, 1.0));
    let inv_p = tape.sub(ones2, clamped)?;
    let log_q = tape.log(inv_p)?;
    let neg = tape.mul(inv_a, log_q)?;
    let ll = tape.add(pos, neg)?;
    tape.scalar_mul(ll, -1.0)
}

/// Full forward pass: encode both channels, fuse, decode both targets, and
/// compute per-node and per-pair reconstruction errors.
pub fn forward(tape: &mut Tape, input: &ForwardInput, vars: &ModelVars) -> Result<ReconVars> {
    let x = tape.constant(input.features.clone());
    let s = tape.constant(input.structure.clone());
    let norm_adj = tape.constant(input.norm_adj.clone());
    let adjacency = tape.constant(input.adjacency.clone());

    let h_f = gnn_stack(tape, norm_adj, x, &vars.enc_f)?;
    let h_s = gnn_stack(tape, norm_adj, s, &vars.enc_s)?;
    let cat = tape.concat_cols(h_f, h_s)?;
    let hidden = tape.matmul(cat, vars.fusion[0])?;
    let hidden = tape.relu(hidden)?;
    let z = tape.matmul(hidden, vars.fusion[1])?;

    let x_hat = gnn_stack(tape, norm_adj, z, &vars.dec_f)?;
    let zt = tape.transpose(z)?;
    let logits = tape.matmul(z, zt)?;
    let a_hat = tape.sigmoid(logits)?;

    let l_x = cosine_errors(tape, x, x_hat)?;
    let l_a = bce_errors(tape, a_hat, adjacency)?;
    Ok(ReconVars {
        z,
        x_hat,
        a_hat,
        l_x,
        l_a,
    })
}

/// Statistics-aware objective over the (possibly reweighted) error terms:
/// alpha (avg + beta std) of l_x plus (1 - alpha) (avg + beta std) of l_a.
/// With `weights` given (n x 1), l_x is scaled per node and l_a per pair by
/// the weight outer product. The same scalar is the anomaly score.
pub fn loss_from_errors(
    tape: &mut Tape,
    l_x: Var,
    l_a: Var,
    weights: Option<Var>,
    alpha: f64,
    beta: f64,
) -> Result<Var> {
    if !(0.0..=1.0).contains(&alpha) || beta < 0.0 {
        return Err(Error::Config(format!(
            "alpha must be in [0,1] and beta >= 0, got alpha={alpha} beta={beta}"
        )));
    }
    let (l_x, l_a) = match weights {
        None => (l_x, l_a),
        Some(w) => {
            let wt = tape.transpose(w)?;
            let outer = tape.matmul(w, wt)?;
            (tape.mul(l_x, w)?, tape.mul(l_a, outer)?)
        }
    };
    let eps = 1e-8;
    let term = |tape: &mut Tape, errs: Var| -> Result<Var> {
        let avg = tape.mean(errs)?;
        let spread = tape.std(errs, eps)?;
        let scaled = tape.scalar_mul(spread, beta)?;
        tape.add(avg, scaled)
    };
    let feat = term(tape, l_x)?;
    let stru = term(tape, l_a)?;
    let feat_scaled = tape.scalar_mul(feat, alpha)?;
    let stru_scaled = tape.scalar_mul(stru, 1.0 - alpha)?;
    tape.add(feat_scaled, stru_scaled)
}

const CHECKPOINT_MAGIC: &[u8; 4] = b"FCGR";
const CHECKPOINT_VERSION: u32 = 1;

/// Checkpoint bytes: magic, version, experiment seed, dims, parameter blob.
pub fn checkpoint_bytes(params: &GlobalModelParams, seed: u64) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&seed.to_le_bytes());
    for d in [
        params.dims.feature_dim,
        params.dims.structure_dim,
        params.dims.hidden,
        params.dims.latent,
        params.dims.layers,
    ] {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out.extend_from_slice(&write_params(&params.named_tensors()));
    out
}

/// Parse checkpoint bytes back into parameters and the recorded seed.
pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<(GlobalModelParams, u64)> {
    let header = 4 + 4 + 8 + 5 * 8;
    if bytes.len() < header {
        return Err(Error::Checkpoint("checkpoint too short".into()));
    }
    if &bytes[0..4] != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad checkpoint magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("sized"));
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    let read_u64 = |off: usize| u64::from_le_bytes(bytes[off..off + 8].try_into().expect("sized"));
    let seed = read_u64(8);
    let dims = ModelDims {
        feature_dim: read_u64(16) as usize,
        structure_dim: read_u64(24) as usize,
        hidden: read_u64(32) as usize,
        latent: read_u64(40) as usize,
        layers: read_u64(48) as usize,
    };
    let entries = read_params(&bytes[header..])?;
    let params = GlobalModelParams::from_named(dims, entries)?;
    Ok((params, seed))
}
