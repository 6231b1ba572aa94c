//! End-to-end experiment driver: dataset construction, the federated round
//! loop, evaluation, and the text artifacts (round log, score dump, plot
//! tables) that runs are compared by.
//!
//! Every random choice is derived from the one experiment seed, so a config
//! fully determines all artifacts byte for byte. Clients train in parallel;
//! results are collected in client order before the server acts, which keeps
//! the trajectory independent of scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::autodiff::write_params;
use crate::client::{
    client_embedding, local_train, score_test_set, ClientRound, LocalTrainConfig, PreparedDataset,
};
use crate::config::{Ablation, ExperimentConfig, SourceSpec};
use crate::dataset::{
    generate_synthetic, label_anomalies, parse_tudataset, partition_multi, partition_single,
    GeneratorSpec,
};
use crate::encoding::StructureEncoding;
use crate::error::{Error, Result};
use crate::gating::{gate_input_dim, GatingParams, GATE_HIDDEN};
use crate::graph::{ClientDataset, FederatedDataset, Scenario};
use crate::mat::Mat;
use crate::metrics::{auc, f1_at_contamination, macro_average, ClientEval, EvalReport};
use crate::model::{GlobalModelParams, ModelDims};
use crate::rng;
use crate::server::{aggregate, broadcast, ClusterAssignment, ClusterModelBank, ClusterWindow};

const PATH_DATA: u64 = 0x44415441;
const PATH_MODEL_INIT: u64 = 0x4d494e49;
const PATH_GATE_INIT: u64 = 0x47494e49;
const PATH_ROUND: u64 = 0x524f554e;
const PATH_KMEANS_ROUND: u64 = 0x4b4d52;

/// Degree bins are capped here when d_cap resolves automatically.
const D_CAP_LIMIT: usize = 50;

/// One line of the round log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    /// "update" or "silent".
    pub phase: &'static str,
    pub did_run_kmeans: bool,
    pub assignment: Vec<usize>,
    /// Minimum pairwise agreement against the window, when k-means ran on a
    /// non-empty window; null otherwise.
    pub stability: Option<f64>,
    /// FNV-1a digest of the aggregated model bank after this round.
    pub digest: String,
    /// Per-client mean epoch loss this round.
    pub mean_loss: Vec<f64>,
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Canonical echo of the effective configuration.
    pub config_echo: String,
    /// The degree cap actually used (resolved when the config said auto).
    pub resolved_d_cap: usize,
    pub report: EvalReport,
    pub rounds: Vec<RoundRecord>,
    /// Per client, per test graph: (score, is_anomaly), in test order.
    pub scores: Vec<Vec<(f64, bool)>>,
    /// Final per-cluster models.
    pub bank: ClusterModelBank,
    /// Final client-to-cluster assignment.
    pub assignment: ClusterAssignment,
    /// Experiment seed, recorded into checkpoints.
    pub seed: u64,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Order-stable digest of a model bank, used to compare trajectories.
pub fn bank_digest(bank: &ClusterModelBank) -> String {
    let mut buf = Vec::new();
    for (cluster, model) in &bank.models {
        buf.extend_from_slice(&(*cluster as u64).to_le_bytes());
        buf.extend_from_slice(&write_params(&model.named_tensors()));
    }
    format!("{:016x}", fnv1a(&buf))
}

/// Materialize the dataset a config describes.
pub fn build_dataset(cfg: &ExperimentConfig) -> Result<FederatedDataset> {
    match &cfg.source {
        SourceSpec::Synthetic {
            per_client,
            train,
            test_normal,
            test_anomalous,
        } => {
            let mut splits = Vec::with_capacity(per_client.len());
            for (cid, spec) in per_client.iter().enumerate() {
                let normal = GeneratorSpec {
                    topology: spec.normal,
                    features: spec.features,
                };
                let anomaly = GeneratorSpec {
                    topology: spec.anomaly,
                    features: spec.features,
                };
                let cid_u = cid as u64;
                let train_graphs = generate_synthetic(
                    &normal,
                    *train,
                    rng::derive(cfg.seed, &[PATH_DATA, cid_u, 0]),
                )?;
                let mut test = generate_synthetic(
                    &normal,
                    *test_normal,
                    rng::derive(cfg.seed, &[PATH_DATA, cid_u, 1]),
                )?;
                let anomalies = generate_synthetic(
                    &anomaly,
                    *test_anomalous,
                    rng::derive(cfg.seed, &[PATH_DATA, cid_u, 2]),
                )?;
                for mut g in anomalies {
                    g.class_label = 1;
                    g.is_anomaly = true;
                    test.push(g);
                }
                splits.push((train_graphs, test));
            }
            let max_dim = splits
                .iter()
                .flat_map(|(tr, te)| tr.iter().chain(te).map(|g| g.feature_dim()))
                .max()
                .unwrap_or(1);
            let mut clients = Vec::with_capacity(splits.len());
            for (cid, (mut tr, mut te)) in splits.into_iter().enumerate() {
                for g in tr.iter_mut().chain(te.iter_mut()) {
                    g.pad_features(max_dim);
                }
                clients.push(ClientDataset::new(cid, tr, te)?);
            }
            let homogeneous = per_client.windows(2).all(|w| w[0] == w[1]);
            let scenario = if homogeneous {
                Scenario::SingleDataset
            } else {
                Scenario::MultiDataset
            };
            FederatedDataset::new(clients, scenario)
        }
        SourceSpec::TuSingle {
            root,
            name,
            anomaly_label,
            train_fraction,
        } => {
            let graphs = parse_tudataset(root, name)?;
            let graphs = label_anomalies(graphs, *anomaly_label)?;
            partition_single(graphs, cfg.clients, *train_fraction, cfg.seed)
        }
        SourceSpec::TuMulti {
            root,
            names,
            anomaly_label,
            train_fraction,
        } => {
            let mut sets = Vec::with_capacity(names.len());
            for name in names {
                let graphs = parse_tudataset(root, name)?;
                sets.push((name.clone(), label_anomalies(graphs, *anomaly_label)?));
            }
            partition_multi(sets, *train_fraction, cfg.seed)
        }
    }
}

/// Build the dataset and run the full experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let dataset = build_dataset(cfg)?;
    run_on_dataset(cfg, &dataset)
}

/// Run the round loop and evaluation on an already-built dataset.
pub fn run_on_dataset(cfg: &ExperimentConfig, dataset: &FederatedDataset) -> Result<RunOutput> {
    cfg.validate()?;
    if dataset.num_clients() != cfg.clients {
        return Err(Error::Config(format!(
            "config says {} clients but the dataset has {}",
            cfg.clients,
            dataset.num_clients()
        )));
    }
    let d_cap = cfg
        .d_cap
        .unwrap_or_else(|| dataset.max_train_degree().min(D_CAP_LIMIT).max(1));
    let se = StructureEncoding {
        d_cap,
        k_rw: cfg.k_rw,
    };
    let drop_structure = cfg.ablation == Ablation::NoSe;
    let prepared: Vec<PreparedDataset> = dataset
        .clients
        .iter()
        .map(|c| PreparedDataset::new(c, se, drop_structure))
        .collect();
    let dims = ModelDims {
        feature_dim: dataset.feature_dim(),
        structure_dim: se.dim(),
        hidden: cfg.hidden,
        latent: cfg.latent,
        layers: cfg.layers,
    };
    let init = GlobalModelParams::init(dims, rng::derive(cfg.seed, &[PATH_MODEL_INIT]))?;
    let gate_dim = gate_input_dim(&dims, drop_structure);
    let mut gates = (0..cfg.clients)
        .map(|c| {
            GatingParams::init(
                gate_dim,
                GATE_HIDDEN,
                cfg.tau,
                rng::derive(cfg.seed, &[PATH_GATE_INIT, c as u64]),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let no_cluster = cfg.ablation == Ablation::NoCluster;
    let k = if no_cluster { 1 } else { cfg.clusters };
    let mut window = ClusterWindow::new(cfg.window, cfg.silent, cfg.theta)?;
    // Every client starts from the same seeded initialization.
    let mut assignment = ClusterAssignment::new(vec![0; cfg.clients], k)?;
    let mut bank = ClusterModelBank {
        models: [(0usize, init)].into_iter().collect(),
    };

    let mut records = Vec::with_capacity(cfg.rounds);
    for t in 0..cfg.rounds {
        let models = broadcast(&bank, &assignment)?;
        let round_cfg = LocalTrainConfig {
            epochs: cfg.local_epochs,
            lr: cfg.lr,
            batch: cfg.batch,
            alpha: cfg.alpha,
            beta: cfg.beta,
            use_gate: cfg.ablation != Ablation::NoGate,
            seed: rng::derive(cfg.seed, &[PATH_ROUND, t as u64]),
        };
        let trained: Vec<(ClientRound, GatingParams, f64)> = prepared
            .par_iter()
            .zip(models.par_iter())
            .zip(gates.par_iter())
            .map(|((prep, model), gate)| {
                let cid = prep.client_id;
                let (new_model, new_gate, trace) = local_train(prep, model, gate, &round_cfg)
                    .map_err(|e| e.in_round(t, cid))?;
                let embedding =
                    client_embedding(prep, &new_model).map_err(|e| e.in_round(t, cid))?;
                let mean_loss = trace.iter().sum::<f64>() / trace.len() as f64;
                let upload = ClientRound {
                    client_id: cid,
                    sample_count: prep.sample_count(),
                    embedding,
                    params: new_model,
                };
                Ok((upload, new_gate, mean_loss))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut uploads = Vec::with_capacity(cfg.clients);
        let mut mean_loss = Vec::with_capacity(cfg.clients);
        for (i, (upload, gate, loss)) in trained.into_iter().enumerate() {
            gates[i] = gate;
            mean_loss.push(loss);
            uploads.push(upload);
        }

        let (phase, did_run_kmeans, stability) = if no_cluster {
            ("update", false, None)
        } else {
            let rows: Vec<Vec<f64>> = uploads.iter().map(|u| u.embedding.clone()).collect();
            let embeddings = Mat::from_rows(&rows);
            let step = window
                .step(
                    &embeddings,
                    k,
                    rng::derive(cfg.seed, &[PATH_KMEANS_ROUND, t as u64]),
                )
                .map_err(|e| e.in_round(t, 0))?;
            assignment = step.assignment;
            let phase = if step.did_run_kmeans { "update" } else { "silent" };
            (phase, step.did_run_kmeans, step.stability)
        };

        bank = aggregate(&uploads, &assignment).map_err(|e| e.in_round(t, 0))?;
        records.push(RoundRecord {
            round: t,
            phase,
            did_run_kmeans,
            assignment: assignment.assignment.clone(),
            stability,
            digest: bank_digest(&bank),
            mean_loss,
        });
    }

    let eval_cfg = LocalTrainConfig {
        epochs: 1,
        lr: 0.0,
        batch: 1,
        alpha: cfg.alpha,
        beta: cfg.beta,
        use_gate: cfg.ablation != Ablation::NoGate,
        seed: cfg.seed,
    };
    let final_models = broadcast(&bank, &assignment)?;
    let mut per_client = Vec::with_capacity(cfg.clients);
    let mut scores = Vec::with_capacity(cfg.clients);
    for (prep, model) in prepared.iter().zip(&final_models) {
        let scored = score_test_set(prep, model, &gates[prep.client_id], &eval_cfg)?;
        let vals: Vec<f64> = scored.iter().map(|&(s, _)| s).collect();
        let labels: Vec<bool> = scored.iter().map(|&(_, a)| a).collect();
        let client_auc = auc(&vals, &labels)?;
        let (f1, threshold) = f1_at_contamination(&vals, &labels)?;
        per_client.push(ClientEval {
            client_id: prep.client_id,
            auc: client_auc,
            f1,
            threshold,
        });
        scores.push(scored);
    }
    let report = macro_average(per_client)?;

    Ok(RunOutput {
        config_echo: cfg.to_text(),
        resolved_d_cap: d_cap,
        report,
        rounds: records,
        scores,
        bank,
        assignment,
        seed: cfg.seed,
    })
}

impl RunOutput {
    /// Line-delimited JSON, one record per round.
    pub fn round_log(&self) -> String {
        let mut out = String::new();
        for r in &self.rounds {
            out.push_str(&serde_json::to_string(r).expect("round records serialize"));
            out.push('\n');
        }
        out
    }

    /// Tab-separated scores, one row per test graph, byte-stable.
    pub fn score_dump(&self) -> String {
        let mut out = String::from("client\tindex\tscore\tlabel\n");
        for (client, rows) in self.scores.iter().enumerate() {
            for (index, (score, is_anomaly)) in rows.iter().enumerate() {
                out.push_str(&format!(
                    "{client}\t{index}\t{score:?}\t{}\n",
                    *is_anomaly as u8
                ));
            }
        }
        out
    }

    /// Tab-separated per-round mean training loss, one column per client.
    pub fn loss_curves(&self) -> String {
        loss_curve_table(&self.rounds)
    }

    /// Human-readable report: metrics, then the effective configuration.
    pub fn report_text(&self) -> String {
        let mut out = self.report.to_text();
        out.push_str(&format!("resolved_d_cap = {}\n", self.resolved_d_cap));
        out.push('\n');
        out.push_str(&self.config_echo);
        out
    }
}

/// Loss-curve plot data. Header-only when there are no rounds.
pub fn loss_curve_table(records: &[RoundRecord]) -> String {
    let clients = records.first().map_or(0, |r| r.mean_loss.len());
    let mut out = String::from("round");
    for c in 0..clients {
        out.push_str(&format!("\tclient{c}"));
    }
    out.push('\n');
    for r in records {
        out.push_str(&r.round.to_string());
        for l in &r.mean_loss {
            out.push_str(&format!("\t{l:?}"));
        }
        out.push('\n');
    }
    out
}

/// Sweep summary: one row per swept value.
pub fn sweep_table(key: &str, rows: &[(String, EvalReport)]) -> String {
    let mut out = format!("{key}\tmacro_auc\tmacro_f1\n");
    for (value, report) in rows {
        out.push_str(&format!(
            "{value}\t{:.6}\t{:.6}\n",
            report.macro_auc, report.macro_f1
        ));
    }
    out
}

/// The standard ablation grid: the full pipeline and the three removals.
pub const ABLATIONS: [Ablation; 4] = [
    Ablation::None,
    Ablation::NoSe,
    Ablation::NoGate,
    Ablation::NoCluster,
];

/// Run the config once per ablation variant (overriding its own `ablation`
/// field), so the variants differ in nothing else.
pub fn run_ablation(cfg: &ExperimentConfig) -> Result<Vec<(Ablation, RunOutput)>> {
    ABLATIONS
        .iter()
        .map(|&a| {
            let mut variant = cfg.clone();
            variant.ablation = a;
            Ok((a, run_experiment(&variant)?))
        })
        .collect()
}

/// Side-by-side ablation summary table.
pub fn ablation_table(results: &[(Ablation, RunOutput)]) -> String {
    let mut out = String::from("ablation\tmacro_auc\tmacro_f1\n");
    for (a, run) in results {
        out.push_str(&format!(
            "{}\t{:.6}\t{:.6}\n",
            a.as_str(),
            run.report.macro_auc,
            run.report.macro_f1
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::PreparedDataset;
    use crate::mat::Mat;

    fn tiny_config(extra: &str) -> ExperimentConfig {
        let text = format!(
            "\
dataset = syn
clients = 3
syn_normal = cycle:n=6..9
syn_anomaly = clique:n=5..6
train_per_client = 6
test_normal_per_client = 3
test_anomaly_per_client = 3
rounds = 3
local_epochs = 1
hidden = 8
latent = 4
k_rw = 4
batch = 4
clusters = 2
window = 2
silent = 2
seed = 11
{extra}"
        );
        ExperimentConfig::parse(&text).unwrap()
    }

    #[test]
    fn smoke_run_produces_consistent_artifacts() {
        let cfg = tiny_config("");
        let run = run_experiment(&cfg).unwrap();
        assert_eq!(run.rounds.len(), 3);
        assert_eq!(run.report.per_client.len(), 3);
        assert_eq!(run.scores.len(), 3);
        assert_eq!(run.scores[0].len(), 6);
        assert_eq!(run.round_log().lines().count(), 3);
        assert_eq!(run.score_dump().lines().count(), 1 + 3 * 6);
        assert_eq!(run.loss_curves().lines().count(), 1 + 3);
        assert!(run.report_text().contains("macro: auc="));
        assert!(run.report_text().contains("seed = 11"));
        for r in &run.rounds {
            assert_eq!(r.assignment.len(), 3);
            assert_eq!(r.mean_loss.len(), 3);
            assert!(r.mean_loss.iter().all(|l| l.is_finite()));
        }
    }

    #[test]
    fn runs_are_bitwise_deterministic() {
        let cfg = tiny_config("");
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.round_log(), b.round_log());
        assert_eq!(a.score_dump(), b.score_dump());
        assert_eq!(a.loss_curves(), b.loss_curves());

        let other = tiny_config("lr = 0.002\n");
        let c = run_experiment(&other).unwrap();
        assert_ne!(a.round_log(), c.round_log());
    }

    #[test]
    fn test_split_never_influences_training() {
        // Only the test halves differ; every trained parameter digest must
        // match because training sees the train split alone.
        let a = run_experiment(&tiny_config("")).unwrap();
        let mut cfg = tiny_config("");
        if let SourceSpec::Synthetic {
            test_anomalous, ..
        } = &mut cfg.source
        {
            *test_anomalous = 5;
        }
        let b = run_experiment(&cfg).unwrap();
        let digests = |r: &RunOutput| -> Vec<String> {
            r.rounds.iter().map(|x| x.digest.clone()).collect()
        };
        assert_eq!(digests(&a), digests(&b));
        assert_ne!(a.scores[0].len(), b.scores[0].len());
    }

    #[test]
    fn no_cluster_matches_a_plain_fedavg_oracle() {
        let cfg = tiny_config("ablation = no_cluster\n");
        let run = run_experiment(&cfg).unwrap();
        for r in &run.rounds {
            assert!(!r.did_run_kmeans);
            assert_eq!(r.assignment, vec![0, 0, 0]);
            assert_eq!(r.stability, None);
        }

        // Independent oracle: a straight-line FedAvg loop with no server
        // machinery at all.
        let dataset = build_dataset(&cfg).unwrap();
        let d_cap = dataset.max_train_degree().min(50).max(1);
        let se = StructureEncoding { d_cap, k_rw: cfg.k_rw };
        let prepared: Vec<PreparedDataset> = dataset
            .clients
            .iter()
            .map(|c| PreparedDataset::new(c, se, false))
            .collect();
        let dims = ModelDims {
            feature_dim: dataset.feature_dim(),
            structure_dim: se.dim(),
            hidden: cfg.hidden,
            latent: cfg.latent,
            layers: cfg.layers,
        };
        let mut global =
            GlobalModelParams::init(dims, rng::derive(cfg.seed, &[PATH_MODEL_INIT])).unwrap();
        let mut gates: Vec<GatingParams> = (0..cfg.clients)
            .map(|c| {
                GatingParams::init(
                    gate_input_dim(&dims, false),
                    GATE_HIDDEN,
                    cfg.tau,
                    rng::derive(cfg.seed, &[PATH_GATE_INIT, c as u64]),
                )
                .unwrap()
            })
            .collect();
        let mut digests = Vec::new();
        for t in 0..cfg.rounds {
            let round_cfg = LocalTrainConfig {
                epochs: cfg.local_epochs,
                lr: cfg.lr,
                batch: cfg.batch,
                alpha: cfg.alpha,
                beta: cfg.beta,
                use_gate: true,
                seed: rng::derive(cfg.seed, &[PATH_ROUND, t as u64]),
            };
            let mut locals = Vec::new();
            let mut weights = Vec::new();
            for (prep, gate) in prepared.iter().zip(gates.iter_mut()) {
                let (m, g, _) = local_train(prep, &global, gate, &round_cfg).unwrap();
                locals.push(m);
                weights.push(prep.sample_count() as f64);
                *gate = g;
            }
            let total: f64 = weights.iter().sum();
            let mut avg = GlobalModelParams::zeros(dims).unwrap();
            for (m, w) in locals.iter().zip(&weights) {
                for ((_, slot), (_, tensor)) in
                    avg.named_tensors_mut().into_iter().zip(m.named_tensors())
                {
                    slot.axpy(tensor, w / total);
                }
            }
            global = avg;
            let bank = ClusterModelBank {
                models: [(0usize, global.clone())].into_iter().collect(),
            };
            digests.push(bank_digest(&bank));
        }
        let run_digests: Vec<String> =
            run.rounds.iter().map(|r| r.digest.clone()).collect();
        assert_eq!(run_digests, digests);
    }

    #[test]
    fn silent_rounds_replay_the_pinned_assignment() {
        // window = 2: two stable update rounds pin, then 2 silent rounds.
        let cfg = tiny_config("")
            .with_override("rounds", "6")
            .unwrap()
            .with_override("theta", "-1")
            .unwrap();
        let run = run_experiment(&cfg).unwrap();
        let phases: Vec<&str> = run.rounds.iter().map(|r| r.phase).collect();
        assert_eq!(phases, ["update", "update", "silent", "silent", "update", "update"]);
        assert_eq!(run.rounds[2].assignment, run.rounds[1].assignment);
        assert_eq!(run.rounds[3].assignment, run.rounds[1].assignment);
        for r in &run.rounds {
            assert_eq!(r.did_run_kmeans, r.phase == "update");
            if r.phase == "silent" {
                assert_eq!(r.stability, None);
            }
        }
        assert_eq!(run.rounds[0].stability, None, "first window is empty");
        assert!(run.rounds[1].stability.is_some());
    }

    #[test]
    fn ablation_grid_covers_all_variants() {
        let cfg = tiny_config("").with_override("rounds", "2").unwrap();
        let results = run_ablation(&cfg).unwrap();
        assert_eq!(results.len(), 4);
        let table = ablation_table(&results);
        let mut lines = table.lines();
        assert_eq!(lines.next(), Some("ablation\tmacro_auc\tmacro_f1"));
        let names: Vec<&str> = lines
            .map(|l| l.split('\t').next().unwrap())
            .collect();
        assert_eq!(names, ["none", "no_se", "no_gate", "no_cluster"]);

        // The no_se variant must keep model shapes but see a zero structure
        // channel; cheapest observable: it still runs and scores all clients.
        let no_se = &results[1].1;
        assert_eq!(no_se.report.per_client.len(), 3);
    }

    #[test]
    fn plot_tables_are_header_only_without_data() {
        assert_eq!(loss_curve_table(&[]), "round\n");
        assert_eq!(sweep_table("alpha", &[]), "alpha\tmacro_auc\tmacro_f1\n");
    }

    #[test]
    fn round_log_is_valid_line_delimited_json() {
        let cfg = tiny_config("");
        let run = run_experiment(&cfg).unwrap();
        for line in run.round_log().lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("round").is_some());
            assert!(v.get("phase").is_some());
            assert!(v.get("did_run_kmeans").is_some());
            assert!(v.get("assignment").is_some());
            assert!(v.get("stability").is_some());
            assert!(v.get("digest").is_some());
        }
        // Embeddings feed k-means as a C x 3*latent matrix; latent = 4 here.
        let first: serde_json::Value =
            serde_json::from_str(run.round_log().lines().next().unwrap()).unwrap();
        assert_eq!(first["round"], 0);
        let emb_cols = 3 * cfg.latent;
        let _ = Mat::zeros(cfg.clients, emb_cols);
    }

    #[test]
    fn client_count_mismatch_is_rejected() {
        let cfg = tiny_config("");
        let mut other = tiny_config("");
        other.clients = 2;
        if let SourceSpec::Synthetic { per_client, .. } = &mut other.source {
            per_client.truncate(2);
        }
        let dataset = build_dataset(&other).unwrap();
        assert!(matches!(
            run_on_dataset(&cfg, &dataset),
            Err(Error::Config(_))
        ));
    }
}
