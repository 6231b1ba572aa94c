//! Sliding-window stability protocol over clustering rounds.
//!
//! The server re-clusters every round while assignments are in flux. Once L
//! consecutive assignments agree (minimum pairwise ARI against the window at
//! or above theta), it pins the latest assignment and reuses it for P rounds
//! without running k-means, then resumes watching.

use super::ari::adjusted_rand_index;
use super::kmeans::{kmeans, ClusterAssignment};
use crate::error::{Error, Result};
use crate::mat::Mat;

#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    /// Clustering runs every round and feeds the window.
    Update,
    /// A pinned assignment is replayed; k-means is skipped.
    Silent {
        remaining: usize,
        pinned: ClusterAssignment,
    },
}

/// Outcome of one protocol step.
#[derive(Debug, Clone)]
pub struct WindowStep {
    pub assignment: ClusterAssignment,
    pub did_run_kmeans: bool,
    /// R_t, the minimum ARI of the fresh assignment against the window.
    /// None on the first append after a clear and throughout silent rounds.
    pub stability: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ClusterWindow {
    window: Vec<ClusterAssignment>,
    phase: Phase,
    theta: f64,
    /// L, assignments required in agreement before pinning.
    cap: usize,
    /// P, rounds a pinned assignment is replayed.
    silent_rounds: usize,
}

impl ClusterWindow {
    pub fn new(cap: usize, silent_rounds: usize, theta: f64) -> Result<ClusterWindow> {
        if cap == 0 {
            return Err(Error::Config("window length must be at least 1".into()));
        }
        if silent_rounds == 0 {
            return Err(Error::Config("silent duration must be at least 1".into()));
        }
        if !(-1.0..=1.0).contains(&theta) {
            return Err(Error::Config(format!(
                "stability threshold {theta} outside [-1, 1]"
            )));
        }
        Ok(ClusterWindow {
            window: Vec::new(),
            phase: Phase::Update,
            theta,
            cap,
            silent_rounds,
        })
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn is_silent(&self) -> bool {
        matches!(self.phase, Phase::Silent { .. })
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// Advance one round: cluster (or replay the pinned assignment) and
    /// return what this round should use.
    pub fn step(&mut self, embeddings: &Mat, k: usize, seed: u64) -> Result<WindowStep> {
        if let Phase::Silent { remaining, pinned } = &mut self.phase {
            let assignment = pinned.clone();
            *remaining -= 1;
            if *remaining == 0 {
                self.phase = Phase::Update;
            }
            return Ok(WindowStep {
                assignment,
                did_run_kmeans: false,
                stability: None,
            });
        }

        let fresh = kmeans(embeddings, k, seed)?;
        let stability = if self.window.is_empty() {
            None
        } else {
            let mut r_t = f64::INFINITY;
            for past in &self.window {
                r_t = r_t.min(adjusted_rand_index(&fresh, past)?);
            }
            Some(r_t)
        };
        match stability {
            Some(r_t) if r_t < self.theta => {
                // Agreement broke: restart the window from the new assignment.
                self.window.clear();
                self.window.push(fresh.clone());
            }
            _ => self.window.push(fresh.clone()),
        }
        if self.window.len() == self.cap {
            self.window.clear();
            self.phase = Phase::Silent {
                remaining: self.silent_rounds,
                pinned: fresh.clone(),
            };
        }
        Ok(WindowStep {
            assignment: fresh,
            did_run_kmeans: true,
            stability,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Embeddings whose k-means(2) partition is exactly `pattern`.
    fn clouds(pattern: &[usize]) -> Mat {
        let rows: Vec<Vec<f64>> = pattern
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let base = if c == 0 { 0.0 } else { 100.0 };
                vec![base + 0.001 * i as f64, base - 0.001 * i as f64]
            })
            .collect();
        Mat::from_rows(&rows)
    }

    fn same_partition(a: &ClusterAssignment, b: &ClusterAssignment) -> bool {
        adjusted_rand_index(a, b).unwrap() == 1.0
    }

    #[test]
    fn first_step_appends_and_runs_kmeans() {
        let mut w = ClusterWindow::new(5, 10, 0.5).unwrap();
        let step = w.step(&clouds(&[0, 0, 1, 1]), 2, 3).unwrap();
        assert!(step.did_run_kmeans);
        assert!(step.stability.is_none());
        assert_eq!(w.window_len(), 1);
        assert!(!w.is_silent());
    }

    #[test]
    fn stable_rounds_pin_then_resume() {
        let (cap, silent) = (5, 3);
        let mut w = ClusterWindow::new(cap, silent, 0.5).unwrap();
        let points = clouds(&[0, 0, 1, 1]);
        let mut pinned = None;
        for round in 0..cap {
            let step = w.step(&points, 2, round as u64).unwrap();
            assert!(step.did_run_kmeans, "round {round} should cluster");
            pinned = Some(step.assignment);
        }
        assert!(w.is_silent());
        assert_eq!(w.window_len(), 0, "window clears at the transition");
        let pinned = pinned.unwrap();
        for round in 0..silent {
            let step = w.step(&points, 2, 1000 + round as u64).unwrap();
            assert!(!step.did_run_kmeans, "silent round {round} must not cluster");
            assert!(step.stability.is_none());
            assert!(same_partition(&step.assignment, &pinned));
        }
        assert!(!w.is_silent(), "silence ends after exactly P rounds");
        let step = w.step(&points, 2, 2000).unwrap();
        assert!(step.did_run_kmeans);
        assert_eq!(w.window_len(), 1);
    }

    #[test]
    fn instability_resets_the_window() {
        let mut w = ClusterWindow::new(5, 10, 0.5).unwrap();
        w.step(&clouds(&[0, 0, 1, 1]), 2, 1).unwrap();
        w.step(&clouds(&[0, 0, 1, 1]), 2, 2).unwrap();
        assert_eq!(w.window_len(), 2);
        // Crossed pattern scores ARI -0.5 against the window, below theta.
        let step = w.step(&clouds(&[0, 1, 0, 1]), 2, 3).unwrap();
        assert!((step.stability.unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(w.window_len(), 1, "window restarts from the new assignment");
        assert!(!w.is_silent());
    }

    #[test]
    fn stability_is_the_minimum_over_the_window() {
        let mut w = ClusterWindow::new(5, 10, -1.0).unwrap();
        w.step(&clouds(&[0, 0, 1, 1]), 2, 1).unwrap();
        // theta = -1 means nothing resets; the crossed pattern lands in the
        // window and drags the minimum down for the next stable step.
        w.step(&clouds(&[0, 1, 0, 1]), 2, 2).unwrap();
        let step = w.step(&clouds(&[0, 0, 1, 1]), 2, 3).unwrap();
        assert!((step.stability.unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(w.window_len(), 3);
    }

    #[test]
    fn window_of_one_pins_immediately() {
        let mut w = ClusterWindow::new(1, 2, 0.5).unwrap();
        let step = w.step(&clouds(&[0, 1]), 2, 1).unwrap();
        assert!(step.did_run_kmeans);
        assert!(w.is_silent());
        let silent = w.step(&clouds(&[0, 1]), 2, 2).unwrap();
        assert!(!silent.did_run_kmeans);
    }

    #[test]
    fn invalid_parameters_are_config_errors() {
        assert!(matches!(
            ClusterWindow::new(0, 10, 0.5),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ClusterWindow::new(5, 0, 0.5),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ClusterWindow::new(5, 10, 1.5),
            Err(Error::Config(_))
        ));
    }
}
