//! Seeded generators for controlled-topology test graphs.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mat::Mat;
use crate::rng;
use rand::Rng;
use rand_distr::StandardNormal;

/// Inclusive node-count range; a fixed size is `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRange {
    pub lo: usize,
    pub hi: usize,
}

impl NodeRange {
    pub fn fixed(n: usize) -> NodeRange {
        NodeRange { lo: n, hi: n }
    }

    pub fn new(lo: usize, hi: usize) -> NodeRange {
        NodeRange { lo, hi }
    }

    fn validate(&self) -> Result<()> {
        if self.lo < 1 || self.lo > self.hi {
            return Err(Error::GeneratorSpec(format!(
                "node range {}..{} must satisfy 1 <= lo <= hi",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    ErdosRenyi { n: NodeRange, p: f64 },
    Cycle { n: NodeRange },
    Clique { n: NodeRange },
    TwoCommunity { n: NodeRange, p_in: f64, p_out: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSpec {
    /// n x 1 all-ones column.
    Ones,
    /// n x dim standard-normal draws.
    StdNormal { dim: usize },
}

/// What to generate and which features to attach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub topology: Topology,
    pub features: FeatureSpec,
}

impl GeneratorSpec {
    fn validate(&self) -> Result<()> {
        let check_p = |p: f64, what: &str| {
            if !(0.0..=1.0).contains(&p) {
                Err(Error::GeneratorSpec(format!(
                    "{what} = {p} outside [0,1]"
                )))
            } else {
                Ok(())
            }
        };
        match self.topology {
            Topology::ErdosRenyi { n, p } => {
                n.validate()?;
                check_p(p, "edge probability")?;
            }
            Topology::Cycle { n } | Topology::Clique { n } => n.validate()?,
            Topology::TwoCommunity { n, p_in, p_out } => {
                n.validate()?;
                check_p(p_in, "p_in")?;
                check_p(p_out, "p_out")?;
            }
        }
        if let FeatureSpec::StdNormal { dim } = self.features {
            if dim < 1 {
                return Err(Error::GeneratorSpec("feature dim must be >= 1".into()));
            }
        }
        Ok(())
    }
}

const PATH_SYNTHETIC: u64 = 0x53594e;

/// Generate `count` graphs, each from an independently derived stream so the
/// result is a pure function of (spec, count, seed).
pub fn generate_synthetic(spec: &GeneratorSpec, count: usize, seed: u64) -> Result<Vec<Graph>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut r = rng::rng_for(seed, &[PATH_SYNTHETIC, idx as u64]);
        let n = match spec.topology {
            Topology::ErdosRenyi { n, .. }
            | Topology::Cycle { n }
            | Topology::Clique { n }
            | Topology::TwoCommunity { n, .. } => r.random_range(n.lo..=n.hi),
        };
        let mut adj = Mat::zeros(n, n);
        let connect = |a: Mat, pairs: &mut dyn FnMut(usize, usize) -> bool| -> Mat {
            let mut a = a;
            for i in 0..n {
                for j in (i + 1)..n {
                    if pairs(i, j) {
                        a.set(i, j, 1.0);
                        a.set(j, i, 1.0);
                    }
                }
            }
            a
        };
        adj = match spec.topology {
            Topology::ErdosRenyi { p, .. } => {
                connect(adj, &mut |_, _| r.random_range(0.0..1.0) < p)
            }
            Topology::Cycle { .. } => {
                // A 1-cycle has no edges and a 2-cycle is a single edge.
                for i in 0..n {
                    let j = (i + 1) % n;
                    if i != j {
                        adj.set(i, j, 1.0);
                        adj.set(j, i, 1.0);
                    }
                }
                adj
            }
            Topology::Clique { .. } => connect(adj, &mut |_, _| true),
            Topology::TwoCommunity { p_in, p_out, .. } => {
                let half = n / 2;
                connect(adj, &mut |i, j| {
                    let p = if (i < half) == (j < half) { p_in } else { p_out };
                    r.random_range(0.0..1.0) < p
                })
            }
        };
        let features = match spec.features {
            FeatureSpec::Ones => Mat::filled(n, 1, 1.0),
            FeatureSpec::StdNormal { dim } => {
                let mut f = Mat::zeros(n, dim);
                for k in 0..f.len() {
                    f.data_mut()[k] = r.sample(StandardNormal);
                }
                f
            }
        };
        out.push(Graph::new(adj, features, 0)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(t: Topology) -> GeneratorSpec {
        GeneratorSpec {
            topology: t,
            features: FeatureSpec::Ones,
        }
    }

    #[test]
    fn cycle_has_n_edges_and_degree_two() {
        let gs = generate_synthetic(&ones(Topology::Cycle { n: NodeRange::fixed(4) }), 3, 1).unwrap();
        for g in &gs {
            assert_eq!(g.edge_count(), 4);
            assert!(g.degrees().iter().all(|&d| d == 2));
        }
    }

    #[test]
    fn clique_edge_count_is_n_choose_2() {
        let gs = generate_synthetic(&ones(Topology::Clique { n: NodeRange::fixed(5) }), 1, 1).unwrap();
        assert_eq!(gs[0].edge_count(), 10);
    }

    #[test]
    fn er_zero_probability_is_empty() {
        let spec = ones(Topology::ErdosRenyi {
            n: NodeRange::fixed(20),
            p: 0.0,
        });
        let gs = generate_synthetic(&spec, 2, 7).unwrap();
        assert_eq!(gs[0].edge_count(), 0);
        assert_eq!(gs[0].node_count(), 20);
    }

    #[test]
    fn same_seed_same_graphs() {
        let spec = GeneratorSpec {
            topology: Topology::TwoCommunity {
                n: NodeRange::new(8, 14),
                p_in: 0.8,
                p_out: 0.1,
            },
            features: FeatureSpec::StdNormal { dim: 3 },
        };
        let a = generate_synthetic(&spec, 5, 42).unwrap();
        let b = generate_synthetic(&spec, 5, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&spec, 5, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bad_specs_are_rejected() {
        let bad_p = ones(Topology::ErdosRenyi {
            n: NodeRange::fixed(5),
            p: 1.5,
        });
        assert!(matches!(
            generate_synthetic(&bad_p, 1, 0),
            Err(Error::GeneratorSpec(_))
        ));
        let bad_n = ones(Topology::Cycle {
            n: NodeRange::new(0, 3),
        });
        assert!(matches!(
            generate_synthetic(&bad_n, 1, 0),
            Err(Error::GeneratorSpec(_))
        ));
    }
}
