//! Client-local node contribution gating.
//!
//! A small GCN (the local personalized model, LPM) maps each node of X' =
//! concat(X, S) to a logit; sigmoid(logit / tau) gives a raw weight in (0,1).
//! Raw weights are mean-normalized to w = raw * n / sum(raw) so mean(w) = 1:
//! without that pin, jointly training the gate with the reconstruction loss
//! drives every weight to zero. Gating parameters never leave the client.

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::model::{gnn_stack, ModelDims};
use crate::rng;
use rand::Rng;

/// Client-private gate parameters: a GCN stack ending in one output column.
#[derive(Debug, Clone, PartialEq)]
pub struct GatingParams {
    pub lpm: Vec<Mat>,
    pub tau: f64,
}

const PATH_GATE_INIT: u64 = 0x47494e49;

impl GatingParams {
    /// Two-layer GCN input_dim -> hidden -> 1, Xavier-uniform.
    pub fn init(input_dim: usize, hidden: usize, tau: f64, seed: u64) -> Result<GatingParams> {
        if tau <= 0.0 {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        if input_dim < 1 || hidden < 1 {
            return Err(Error::Config(
                "gating dims must be positive".into(),
            ));
        }
        let shapes = [(input_dim, hidden), (hidden, 1)];
        let lpm = shapes
            .iter()
            .enumerate()
            .map(|(i, &(r, c))| {
                let limit = (6.0 / (r + c) as f64).sqrt();
                let mut rng = rng::rng_for(seed, &[PATH_GATE_INIT, i as u64]);
                let mut m = Mat::zeros(r, c);
                for k in 0..m.len() {
                    m.data_mut()[k] = rng.random_range(-limit..limit);
                }
                m
            })
            .collect();
        Ok(GatingParams { lpm, tau })
    }

    /// Width of X' this gate expects.
    pub fn input_dim(&self) -> usize {
        self.lpm.first().map(|m| m.rows()).unwrap_or(0)
    }

    pub fn named_tensors(&self) -> Vec<(String, &Mat)> {
        self.lpm.iter().enumerate().map(|(i, m)| (format!("lpm.{i}"), m)).collect()
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Mat)> {
        self.lpm
            .iter_mut()
            .enumerate()
            .map(|(i, m)| (format!("lpm.{i}"), m))
            .collect()
    }
}

/// Gate parameters inserted into a tape as trainable leaves.
pub struct GatingVars {
    pub lpm: Vec<Var>,
}

impl GatingVars {
    pub fn insert(tape: &mut Tape, p: &GatingParams) -> GatingVars {
        GatingVars {
            lpm: p.lpm.iter().map(|m| tape.param(m.clone())).collect(),
        }
    }

    pub fn all(&self) -> Vec<Var> {
        self.lpm.clone()
    }
}

/// Mean-normalized node weights: sigmoid(LPM(X', A) / tau) scaled so the
/// weights sum to exactly n. Differentiable through the normalization.
pub fn node_weights(
    tape: &mut Tape,
    gate_input: Var,
    norm_adj: Var,
    vars: &GatingVars,
    tau: f64,
) -> Result<Var> {
    let n = tape.value(gate_input).rows();
    let logits = gnn_stack(tape, norm_adj, gate_input, &vars.lpm)?;
    let scaled = tape.scalar_mul(logits, 1.0 / tau)?;
    let raw = tape.sigmoid(scaled)?;
    let total = tape.sum(raw)?;
    let n_const = tape.scalar(n as f64);
    let ratio = tape.div(n_const, total)?;
    tape.mul_scalar_t(raw, ratio)
}

/// Default LPM hidden width.
pub const GATE_HIDDEN: usize = 32;

/// Gate input width for the given model dims: X' = concat(X, S), or X alone
/// when the structure channel is ablated.
pub fn gate_input_dim(dims: &ModelDims, drop_structure: bool) -> usize {
    if drop_structure {
        dims.feature_dim
    } else {
        dims.feature_dim + dims.structure_dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, FeatureSpec, GeneratorSpec, NodeRange, Topology};
    use crate::graph::Graph;
    use crate::model::{
        forward, loss_from_errors, norm_adjacency, ForwardInput, GlobalModelParams, ModelVars,
    };
    use crate::encoding::StructureEncoding;
    use rand::seq::SliceRandom;

    fn fixture(seed: u64) -> (Graph, Mat, Mat, Mat) {
        let spec = GeneratorSpec {
            topology: Topology::ErdosRenyi { n: NodeRange::fixed(7), p: 0.4 },
            features: FeatureSpec::StdNormal { dim: 3 },
        };
        let g = generate_synthetic(&spec, 1, seed).unwrap().remove(0);
        let se = StructureEncoding { d_cap: 4, k_rw: 4 };
        let s = se.encode(&g);
        let gate_input = g.features.concat_cols(&s);
        let na = norm_adjacency(&g);
        (g, s, gate_input, na)
    }

    fn weights_for(gp: &GatingParams, gate_input: &Mat, na: &Mat) -> Vec<f64> {
        let mut tape = Tape::new();
        let gi = tape.constant(gate_input.clone());
        let nav = tape.constant(na.clone());
        let vars = GatingVars::insert(&mut tape, gp);
        let w = node_weights(&mut tape, gi, nav, &vars, gp.tau).unwrap();
        tape.value(w).data().to_vec()
    }

    #[test]
    fn zero_lpm_gives_exactly_unit_weights() {
        let (_, _, gate_input, na) = fixture(1);
        let mut gp = GatingParams::init(gate_input.cols(), 8, 1.0, 2).unwrap();
        for m in &mut gp.lpm {
            *m = Mat::zeros(m.rows(), m.cols());
        }
        let w = weights_for(&gp, &gate_input, &na);
        assert!(w.iter().all(|&x| x == 1.0), "{w:?}");
    }

    #[test]
    fn weights_sum_to_n_within_1e10() {
        for seed in 0..10u64 {
            let (_, _, gate_input, na) = fixture(seed);
            let gp = GatingParams::init(gate_input.cols(), 8, 1.0, 100 + seed).unwrap();
            let w = weights_for(&gp, &gate_input, &na);
            let sum: f64 = w.iter().sum();
            assert!((sum - w.len() as f64).abs() < 1e-10, "seed {seed}: sum {sum}");
            assert!(w.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn large_tau_flattens_weights_toward_one() {
        let (_, _, gate_input, na) = fixture(3);
        let mut gp = GatingParams::init(gate_input.cols(), 8, 1.0, 4).unwrap();
        gp.tau = 1e9;
        let w = weights_for(&gp, &gate_input, &na);
        assert!(w.iter().all(|&x| (x - 1.0).abs() < 1e-6), "{w:?}");
    }

    #[test]
    fn weights_are_permutation_equivariant() {
        let (g, _, gate_input, na) = fixture(5);
        let gp = GatingParams::init(gate_input.cols(), 8, 1.0, 6).unwrap();
        let n = g.node_count();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng::rng(7));
        let gp_g = g.permuted(&perm);
        let se = StructureEncoding { d_cap: 4, k_rw: 4 };
        let gate_p = gp_g.features.concat_cols(&se.encode(&gp_g));
        let na_p = norm_adjacency(&gp_g);
        let w = weights_for(&gp, &gate_input, &na);
        let wp = weights_for(&gp, &gate_p, &na_p);
        for i in 0..n {
            assert!((wp[i] - w[perm[i]]).abs() < 1e-9, "node {i}");
        }
    }

    #[test]
    fn invalid_tau_rejected() {
        assert!(matches!(
            GatingParams::init(4, 8, 0.0, 1),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            GatingParams::init(4, 8, -1.0, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unit_weights_reproduce_ungated_loss_bitwise() {
        let (g, s, _, na) = fixture(8);
        let dims = ModelDims {
            feature_dim: 3,
            structure_dim: s.cols(),
            hidden: 6,
            latent: 4,
            layers: 2,
        };
        let params = GlobalModelParams::init(dims, 9).unwrap();
        let input = ForwardInput {
            features: &g.features,
            structure: &s,
            norm_adj: &na,
            adjacency: &g.adjacency,
        };
        let run = |with_ones: bool| -> f64 {
            let mut tape = Tape::new();
            let vars = ModelVars::insert(&mut tape, &params);
            let recon = forward(&mut tape, &input, &vars).unwrap();
            let w = if with_ones {
                Some(tape.constant(Mat::filled(g.node_count(), 1, 1.0)))
            } else {
                None
            };
            let loss = loss_from_errors(&mut tape, recon.l_x, recon.l_a, w, 0.6, 0.9).unwrap();
            tape.scalar_value(loss)
        };
        assert_eq!(run(true).to_bits(), run(false).to_bits());
    }

    #[test]
    fn upweighting_the_worst_node_raises_the_feature_term() {
        // Two nodes, the second reconstructing worse; weights [2/3, 4/3]
        // cover the case of one node's weight doubled pre-normalization.
        let mut tape = Tape::new();
        let l_x = tape.constant(Mat::from_vec(2, 1, vec![0.1, 1.0]));
        let l_a = tape.constant(Mat::filled(2, 2, 0.3));
        let w = tape.constant(Mat::from_vec(2, 1, vec![2.0 / 3.0, 4.0 / 3.0]));
        let gated = loss_from_errors(&mut tape, l_x, l_a, Some(w), 1.0, 0.0).unwrap();
        let ungated = loss_from_errors(&mut tape, l_x, l_a, None, 1.0, 0.0).unwrap();
        assert!(tape.scalar_value(gated) > tape.scalar_value(ungated));
    }

    #[test]
    fn gated_loss_gradient_matches_finite_differences_for_gate_params() {
        let (g, s, gate_input, na) = fixture(10);
        let dims = ModelDims {
            feature_dim: 3,
            structure_dim: s.cols(),
            hidden: 5,
            latent: 3,
            layers: 2,
        };
        let model = GlobalModelParams::init(dims, 11).unwrap();
        let gate = GatingParams::init(gate_input.cols(), 4, 0.7, 12).unwrap();
        let input = ForwardInput {
            features: &g.features,
            structure: &s,
            norm_adj: &na,
            adjacency: &g.adjacency,
        };

        let loss_of = |gp: &GatingParams| -> f64 {
            let mut tape = Tape::new();
            let mv = ModelVars::insert(&mut tape, &model);
            let gv = GatingVars::insert(&mut tape, gp);
            let gi = tape.constant(gate_input.clone());
            let nav = tape.constant(na.clone());
            let recon = forward(&mut tape, &input, &mv).unwrap();
            let w = node_weights(&mut tape, gi, nav, &gv, gp.tau).unwrap();
            let loss = loss_from_errors(&mut tape, recon.l_x, recon.l_a, Some(w), 0.5, 0.8).unwrap();
            tape.scalar_value(loss)
        };

        let mut tape = Tape::new();
        let mv = ModelVars::insert(&mut tape, &model);
        let gv = GatingVars::insert(&mut tape, &gate);
        let gi = tape.constant(gate_input.clone());
        let nav = tape.constant(na.clone());
        let recon = forward(&mut tape, &input, &mv).unwrap();
        let w = node_weights(&mut tape, gi, nav, &gv, gate.tau).unwrap();
        let loss = loss_from_errors(&mut tape, recon.l_x, recon.l_a, Some(w), 0.5, 0.8).unwrap();
        tape.backward(loss).unwrap();

        for (t, v) in gv.lpm.iter().enumerate() {
            let analytic_grad = tape.grad(*v).unwrap().clone();
            for idx in 0..gate.lpm[t].len() {
                let x = gate.lpm[t].data()[idx];
                let h = 1e-6 * x.abs().max(1.0);
                let mut plus = gate.clone();
                plus.lpm[t].data_mut()[idx] = x + h;
                let mut minus = gate.clone();
                minus.lpm[t].data_mut()[idx] = x - h;
                let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
                let analytic = analytic_grad.data()[idx];
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0);
                assert!(rel < 1e-4, "lpm.{t}[{idx}]: {analytic} vs {numeric}");
            }
        }
    }
}
