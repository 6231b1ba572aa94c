//! Adam optimizer with bias correction.

use crate::mat::Mat;

/// Step-size and moment hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamHyper {
    pub fn with_lr(lr: f64) -> AdamHyper {
        AdamHyper {
            lr,
            ..AdamHyper::default()
        }
    }
}

/// First and second moment estimates, one pair per parameter tensor.
/// State is positional: `apply` must always receive the parameter tensors
/// in the order used at construction.
#[derive(Debug, Clone)]
pub struct AdamState {
    step: u64,
    m: Vec<Mat>,
    v: Vec<Mat>,
}

impl AdamState {
    pub fn new_like(params: &[&Mat]) -> AdamState {
        AdamState {
            step: 0,
            m: params.iter().map(|p| Mat::zeros(p.rows(), p.cols())).collect(),
            v: params.iter().map(|p| Mat::zeros(p.rows(), p.cols())).collect(),
        }
    }
}

/// One optimizer step over parallel slices of parameters and gradients.
///
/// Panics if the slice lengths or tensor shapes disagree with the state;
/// that is a caller bug, not a recoverable condition.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [&mut Mat],
    grads: &[&Mat],
    hp: &AdamHyper,
) {
    assert_eq!(params.len(), state.m.len(), "parameter count changed under Adam state");
    assert_eq!(params.len(), grads.len(), "params and grads must pair up");
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - hp.beta1.powi(t);
    let bc2 = 1.0 - hp.beta2.powi(t);
    for k in 0..params.len() {
        assert_eq!(params[k].shape(), grads[k].shape(), "gradient shape mismatch");
        assert_eq!(params[k].shape(), state.m[k].shape(), "state shape mismatch");
        let m = &mut state.m[k];
        let v = &mut state.v[k];
        let g = grads[k];
        let p = &mut *params[k];
        for idx in 0..g.len() {
            let gi = g.data()[idx];
            let mi = hp.beta1 * m.data()[idx] + (1.0 - hp.beta1) * gi;
            let vi = hp.beta2 * v.data()[idx] + (1.0 - hp.beta2) * gi * gi;
            m.data_mut()[idx] = mi;
            v.data_mut()[idx] = vi;
            let m_hat = mi / bc1;
            let v_hat = vi / bc2;
            p.data_mut()[idx] -= hp.lr * m_hat / (v_hat.sqrt() + hp.eps);
        }
    }
}
