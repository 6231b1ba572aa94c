//! Seeded k-means over client embeddings.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::rng;
use rand::Rng;

/// Seed-derivation label for the clustering stream.
pub const KMEANS_PATH: u64 = 0x4b4d_4541;

/// One cluster id per client, ids in [0, k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub assignment: Vec<usize>,
    pub k: usize,
}

impl ClusterAssignment {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<ClusterAssignment> {
        if k == 0 {
            return Err(Error::Config("cluster count must be at least 1".into()));
        }
        if assignment.is_empty() {
            return Err(Error::Config("assignment needs at least one client".into()));
        }
        if let Some(&id) = assignment.iter().find(|&&id| id >= k) {
            return Err(Error::Config(format!(
                "cluster id {id} out of range for k = {k}"
            )));
        }
        Ok(ClusterAssignment { assignment, k })
    }

    pub fn clients(&self) -> usize {
        self.assignment.len()
    }

    /// Client ids belonging to one cluster, ascending.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == cluster)
            .collect()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = sq_dist(point, &centroids[0]);
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(point, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn assign_all(points: &Mat, centroids: &[Vec<f64>]) -> Vec<usize> {
    (0..points.rows())
        .map(|i| nearest(points.row(i), centroids))
        .collect()
}

/// Hand each empty cluster the point farthest from its current centroid, so
/// every cluster leaves the iteration nonempty.
fn refill_empty(points: &Mat, centroids: &mut [Vec<f64>], assignment: &mut [usize], k: usize) {
    for empty in 0..k {
        if assignment.contains(&empty) {
            continue;
        }
        let mut far = 0;
        let mut far_d = -1.0;
        for (i, &cluster) in assignment.iter().enumerate() {
            let d = sq_dist(points.row(i), &centroids[cluster]);
            if d > far_d {
                far = i;
                far_d = d;
            }
        }
        assignment[far] = empty;
        centroids[empty] = points.row(far).to_vec();
    }
}

fn update_means(points: &Mat, assignment: &[usize], k: usize, centroids: &mut [Vec<f64>]) {
    let dim = points.cols();
    for (cluster, centroid) in centroids.iter_mut().enumerate().take(k) {
        let members: Vec<usize> = (0..points.rows())
            .filter(|&i| assignment[i] == cluster)
            .collect();
        if members.is_empty() {
            continue;
        }
        let inv = 1.0 / members.len() as f64;
        for (d, slot) in centroid.iter_mut().enumerate().take(dim) {
            *slot = members.iter().map(|&i| points.at(i, d)).sum::<f64>() * inv;
        }
    }
}

fn inertia(points: &Mat, centroids: &[Vec<f64>], assignment: &[usize]) -> f64 {
    (0..points.rows())
        .map(|i| sq_dist(points.row(i), &centroids[assignment[i]]))
        .sum()
}

/// k-means++ initialization followed by Lloyd iteration, deterministic for a
/// fixed seed. Returns the assignment together with the per-iteration inertia
/// trace (one entry per assignment step).
pub(crate) fn kmeans_trace(
    embeddings: &Mat,
    k: usize,
    seed: u64,
) -> Result<(ClusterAssignment, Vec<f64>)> {
    let c = embeddings.rows();
    if k == 0 {
        return Err(Error::Config("cluster count must be at least 1".into()));
    }
    if k > c {
        return Err(Error::Config(format!(
            "cannot form {k} clusters from {c} clients"
        )));
    }
    let mut rng = rng::rng_for(seed, &[KMEANS_PATH]);

    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(embeddings.row(rng.random_range(0..c)).to_vec());
    while centroids.len() < k {
        let d2: Vec<f64> = (0..c)
            .map(|i| {
                let p = embeddings.row(i);
                centroids
                    .iter()
                    .map(|cent| sq_dist(p, cent))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            // D^2 sampling: probability proportional to squared distance.
            let mut t = rng.random::<f64>() * total;
            let mut chosen = c - 1;
            for (i, &w) in d2.iter().enumerate() {
                t -= w;
                if t <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // Every point coincides with a centroid; any choice is as good.
            rng.random_range(0..c)
        };
        centroids.push(embeddings.row(pick).to_vec());
    }

    let mut assignment = assign_all(embeddings, &centroids);
    refill_empty(embeddings, &mut centroids, &mut assignment, k);
    let mut trace = vec![inertia(embeddings, &centroids, &assignment)];
    update_means(embeddings, &assignment, k, &mut centroids);
    for _ in 1..100 {
        let mut next = assign_all(embeddings, &centroids);
        refill_empty(embeddings, &mut centroids, &mut next, k);
        trace.push(inertia(embeddings, &centroids, &next));
        if next == assignment {
            break;
        }
        assignment = next;
        update_means(embeddings, &assignment, k, &mut centroids);
    }
    Ok((ClusterAssignment::new(assignment, k)?, trace))
}

/// Cluster the rows of `embeddings` into `k` groups.
pub fn kmeans(embeddings: &Mat, k: usize, seed: u64) -> Result<ClusterAssignment> {
    kmeans_trace(embeddings, k, seed).map(|(a, _)| a)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two tight clouds at a large mutual distance.
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

    #[test]
    fn k_equals_one_puts_everyone_together() {
        let a = kmeans(&clouds(&[0, 1, 0, 1]), 1, 5).unwrap();
        assert_eq!(a.assignment, vec![0, 0, 0, 0]);
    }

    #[test]
    fn k_equals_c_separates_distinct_points() {
        let points = Mat::from_rows(&[vec![0.0], vec![10.0], vec![20.0], vec![30.0]]);
        let a = kmeans(&points, 4, 7).unwrap();
        let mut seen = a.assignment.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn separated_clouds_are_recovered_exactly() {
        for seed in 0..20 {
            let a = kmeans(&clouds(&[0, 0, 1, 1, 0, 1]), 2, seed).unwrap();
            assert_eq!(a.assignment[0], a.assignment[1]);
            assert_eq!(a.assignment[0], a.assignment[4]);
            assert_eq!(a.assignment[2], a.assignment[3]);
            assert_eq!(a.assignment[2], a.assignment[5]);
            assert_ne!(a.assignment[0], a.assignment[2]);
        }
    }

    #[test]
    fn too_many_clusters_is_a_config_error() {
        let err = kmeans(&clouds(&[0, 1]), 3, 1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn fixed_seed_reproduces_the_assignment() {
        let points = clouds(&[0, 1, 0, 1, 1, 0, 0]);
        assert_eq!(
            kmeans(&points, 2, 42).unwrap(),
            kmeans(&points, 2, 42).unwrap()
        );
    }

    #[test]
    fn nearest_breaks_ties_toward_the_lowest_index() {
        let centroids = vec![vec![-1.0], vec![1.0]];
        assert_eq!(nearest(&[0.0], &centroids), 0);
    }

    #[test]
    fn refill_hands_an_empty_cluster_the_farthest_point() {
        let points = Mat::from_rows(&[vec![0.0], vec![1.0], vec![5.0]]);
        let mut centroids = vec![vec![0.0], vec![99.0]];
        let mut assignment = vec![0, 0, 0];
        refill_empty(&points, &mut centroids, &mut assignment, 2);
        assert_eq!(assignment, vec![0, 0, 1]);
        assert_eq!(centroids[1], vec![5.0]);
    }

    #[test]
    fn lloyd_inertia_never_increases() {
        let mut rng = crate::rng::rng_for(99, &[1]);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random::<f64>() * 10.0).collect())
            .collect();
        let points = Mat::from_rows(&rows);
        for seed in 0..10 {
            let (_, trace) = kmeans_trace(&points, 3, seed).unwrap();
            for w in trace.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-9,
                    "inertia rose from {} to {}",
                    w[0],
                    w[1]
                );
            }
        }
    }
}
