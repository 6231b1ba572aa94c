//! Flat key-value experiment configuration.
//!
//! One `key = value` pair per line, `#` starts a comment, unknown or
//! duplicate keys are errors. Every run echoes the full effective
//! configuration so reported numbers always carry their hyperparameters.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::dataset::{FeatureSpec, NodeRange, Topology};
use crate::error::{Error, Result};

/// Which pipeline piece an ablation run removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    None,
    /// Zero the structure-encoding channel and drop it from the gate input.
    NoSe,
    /// Fix all node weights to one.
    NoGate,
    /// Single cluster, no window protocol: plain federated averaging.
    NoCluster,
}

impl Ablation {
    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::None => "none",
            Ablation::NoSe => "no_se",
            Ablation::NoGate => "no_gate",
            Ablation::NoCluster => "no_cluster",
        }
    }

    pub fn parse(s: &str) -> Result<Ablation> {
        match s {
            "none" => Ok(Ablation::None),
            "no_se" => Ok(Ablation::NoSe),
            "no_gate" => Ok(Ablation::NoGate),
            "no_cluster" => Ok(Ablation::NoCluster),
            other => Err(Error::Config(format!("unknown ablation '{other}'"))),
        }
    }
}

/// Per-client synthetic generators.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientSynSpec {
    pub normal: Topology,
    pub anomaly: Topology,
    pub features: FeatureSpec,
}

/// Where the graphs come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// One labelled dataset in TU text format, dealt across clients.
    TuSingle {
        root: PathBuf,
        name: String,
        anomaly_label: Option<i64>,
        train_fraction: f64,
    },
    /// One TU dataset per client.
    TuMulti {
        root: PathBuf,
        names: Vec<String>,
        anomaly_label: Option<i64>,
        train_fraction: f64,
    },
    /// Generated graphs, one generator pair per client.
    Synthetic {
        per_client: Vec<ClientSynSpec>,
        train: usize,
        test_normal: usize,
        test_anomalous: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceSpec,
    pub clients: usize,
    pub rounds: usize,
    pub local_epochs: usize,
    pub lr: f64,
    pub batch: usize,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    /// K; defaults to min(4, clients).
    pub clusters: usize,
    /// L, the stability window length.
    pub window: usize,
    /// P, rounds to replay a pinned assignment.
    pub silent: usize,
    pub theta: f64,
    /// Degree-encoding cap; None resolves to the max train degree (<= 50).
    pub d_cap: Option<usize>,
    pub k_rw: usize,
    pub hidden: usize,
    pub latent: usize,
    pub layers: usize,
    pub seed: u64,
    pub ablation: Ablation,
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a non-negative integer")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a non-negative integer")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))
}

fn parse_range(key: &str, v: &str) -> Result<NodeRange> {
    let range = if let Some((lo, hi)) = v.split_once("..") {
        NodeRange::new(parse_usize(key, lo)?, parse_usize(key, hi)?)
    } else {
        NodeRange::fixed(parse_usize(key, v)?)
    };
    if range.lo < 1 || range.lo > range.hi {
        return Err(Error::Config(format!(
            "{key}: node range '{v}' must satisfy 1 <= lo <= hi"
        )));
    }
    Ok(range)
}

/// Topology grammar: `er:n=20..30:p=0.3`, `cycle:n=6..10`, `clique:n=5..7`,
/// `two:n=20..24:p_in=0.6:p_out=0.05`.
pub fn parse_topology(key: &str, v: &str) -> Result<Topology> {
    let mut parts = v.split(':');
    let kind = parts.next().unwrap_or_default();
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for part in parts {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{key}: malformed field '{part}' in '{v}'")))?;
        fields.insert(name, value);
    }
    let mut take_range = |name: &str| -> Result<NodeRange> {
        let raw = fields
            .remove(name)
            .ok_or_else(|| Error::Config(format!("{key}: '{v}' is missing {name}=")))?;
        parse_range(key, raw)
    };
    let topology = match kind {
        "er" => Topology::ErdosRenyi {
            n: take_range("n")?,
            p: parse_f64(key, fields.remove("p").unwrap_or("0.3"))?,
        },
        "cycle" => Topology::Cycle { n: take_range("n")? },
        "clique" => Topology::Clique { n: take_range("n")? },
        "two" => Topology::TwoCommunity {
            n: take_range("n")?,
            p_in: parse_f64(key, fields.remove("p_in").unwrap_or("0.6"))?,
            p_out: parse_f64(key, fields.remove("p_out").unwrap_or("0.05"))?,
        },
        other => {
            return Err(Error::Config(format!(
                "{key}: unknown topology '{other}' in '{v}'"
            )))
        }
    };
    if let Some((name, _)) = fields.into_iter().next() {
        return Err(Error::Config(format!(
            "{key}: unexpected field '{name}' in '{v}'"
        )));
    }
    Ok(topology)
}

/// Feature grammar: `ones` or `normal:d=8`.
pub fn parse_features(key: &str, v: &str) -> Result<FeatureSpec> {
    if v == "ones" {
        return Ok(FeatureSpec::Ones);
    }
    if let Some(rest) = v.strip_prefix("normal:d=") {
        let dim = parse_usize(key, rest)?;
        if dim == 0 {
            return Err(Error::Config(format!("{key}: feature dim must be >= 1")));
        }
        return Ok(FeatureSpec::StdNormal { dim });
    }
    Err(Error::Config(format!(
        "{key}: unknown feature spec '{v}' (expected 'ones' or 'normal:d=<dim>')"
    )))
}

fn render_range(r: &NodeRange) -> String {
    if r.lo == r.hi {
        format!("{}", r.lo)
    } else {
        format!("{}..{}", r.lo, r.hi)
    }
}

pub fn render_topology(t: &Topology) -> String {
    match t {
        Topology::ErdosRenyi { n, p } => format!("er:n={}:p={p}", render_range(n)),
        Topology::Cycle { n } => format!("cycle:n={}", render_range(n)),
        Topology::Clique { n } => format!("clique:n={}", render_range(n)),
        Topology::TwoCommunity { n, p_in, p_out } => {
            format!("two:n={}:p_in={p_in}:p_out={p_out}", render_range(n))
        }
    }
}

pub fn render_features(f: &FeatureSpec) -> String {
    match f {
        FeatureSpec::Ones => "ones".into(),
        FeatureSpec::StdNormal { dim } => format!("normal:d={dim}"),
    }
}

/// Expand a comma list to exactly `clients` entries: a single entry repeats,
/// otherwise the count must match.
fn per_client_list<T: Clone>(key: &str, items: Vec<T>, clients: usize) -> Result<Vec<T>> {
    match items.len() {
        1 => Ok(vec![items[0].clone(); clients]),
        n if n == clients => Ok(items),
        n => Err(Error::Config(format!(
            "{key}: {n} entries for {clients} clients (give 1 or {clients})"
        ))),
    }
}

impl ExperimentConfig {
    /// Parse the flat key-value format.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", line_no + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if raw.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("duplicate key '{key}'")));
            }
        }
        ExperimentConfig::from_pairs(raw)
    }

    fn from_pairs(mut raw: BTreeMap<String, String>) -> Result<ExperimentConfig> {
        let mut take = |key: &str| raw.remove(key);

        let dataset = take("dataset")
            .ok_or_else(|| Error::Config("missing required key 'dataset' (syn or tu)".into()))?;

        let clients_raw = take("clients");
        let tu_root = take("tu_root");
        let tu_names = take("tu_names");
        let anomaly_label = match take("anomaly_label") {
            Some(v) => Some(v.parse::<i64>().map_err(|_| {
                Error::Config(format!("anomaly_label: '{v}' is not an integer"))
            })?),
            None => None,
        };
        let train_fraction = match take("train_fraction") {
            Some(v) => parse_f64("train_fraction", &v)?,
            None => 0.8,
        };
        let syn_normal = take("syn_normal");
        let syn_anomaly = take("syn_anomaly");
        let syn_features = take("syn_features").unwrap_or_else(|| "ones".into());
        let train = match take("train_per_client") {
            Some(v) => parse_usize("train_per_client", &v)?,
            None => 80,
        };
        let test_normal = match take("test_normal_per_client") {
            Some(v) => parse_usize("test_normal_per_client", &v)?,
            None => 20,
        };
        let test_anomalous = match take("test_anomaly_per_client") {
            Some(v) => parse_usize("test_anomaly_per_client", &v)?,
            None => 20,
        };

        let (source, clients) = match dataset.as_str() {
            "syn" => {
                let clients = match clients_raw {
                    Some(v) => parse_usize("clients", &v)?,
                    None => return Err(Error::Config("syn dataset requires 'clients'".into())),
                };
                if clients == 0 {
                    return Err(Error::Config("clients must be at least 1".into()));
                }
                let normal_raw = syn_normal
                    .ok_or_else(|| Error::Config("syn dataset requires 'syn_normal'".into()))?;
                let anomaly_raw = syn_anomaly
                    .ok_or_else(|| Error::Config("syn dataset requires 'syn_anomaly'".into()))?;
                let normals = per_client_list(
                    "syn_normal",
                    normal_raw
                        .split(',')
                        .map(|s| parse_topology("syn_normal", s.trim()))
                        .collect::<Result<Vec<_>>>()?,
                    clients,
                )?;
                let anomalies = per_client_list(
                    "syn_anomaly",
                    anomaly_raw
                        .split(',')
                        .map(|s| parse_topology("syn_anomaly", s.trim()))
                        .collect::<Result<Vec<_>>>()?,
                    clients,
                )?;
                let features = per_client_list(
                    "syn_features",
                    syn_features
                        .split(',')
                        .map(|s| parse_features("syn_features", s.trim()))
                        .collect::<Result<Vec<_>>>()?,
                    clients,
                )?;
                if train == 0 || test_normal == 0 || test_anomalous == 0 {
                    return Err(Error::Config(
                        "synthetic runs need train, test-normal, and test-anomaly counts >= 1"
                            .into(),
                    ));
                }
                let per_client = normals
                    .into_iter()
                    .zip(anomalies)
                    .zip(features)
                    .map(|((normal, anomaly), features)| ClientSynSpec {
                        normal,
                        anomaly,
                        features,
                    })
                    .collect();
                (
                    SourceSpec::Synthetic {
                        per_client,
                        train,
                        test_normal,
                        test_anomalous,
                    },
                    clients,
                )
            }
            "tu" => {
                let root = PathBuf::from(
                    tu_root.ok_or_else(|| Error::Config("tu dataset requires 'tu_root'".into()))?,
                );
                let names: Vec<String> = tu_names
                    .ok_or_else(|| Error::Config("tu dataset requires 'tu_names'".into()))?
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if names.is_empty() {
                    return Err(Error::Config("tu_names lists no datasets".into()));
                }
                if !(0.0..1.0).contains(&train_fraction) || train_fraction <= 0.0 {
                    return Err(Error::Config(format!(
                        "train_fraction {train_fraction} outside (0, 1)"
                    )));
                }
                if names.len() == 1 {
                    let clients = match clients_raw {
                        Some(v) => parse_usize("clients", &v)?,
                        None => 3,
                    };
                    if clients == 0 {
                        return Err(Error::Config("clients must be at least 1".into()));
                    }
                    (
                        SourceSpec::TuSingle {
                            root,
                            name: names.into_iter().next().unwrap(),
                            anomaly_label,
                            train_fraction,
                        },
                        clients,
                    )
                } else {
                    let clients = names.len();
                    if let Some(v) = clients_raw {
                        let stated = parse_usize("clients", &v)?;
                        if stated != clients {
                            return Err(Error::Config(format!(
                                "clients = {stated} but tu_names lists {clients} datasets"
                            )));
                        }
                    }
                    (
                        SourceSpec::TuMulti {
                            root,
                            names,
                            anomaly_label,
                            train_fraction,
                        },
                        clients,
                    )
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "dataset must be 'syn' or 'tu', got '{other}'"
                )))
            }
        };

        let rounds = match take("rounds") {
            Some(v) => parse_usize("rounds", &v)?,
            None => 10,
        };
        let local_epochs = match take("local_epochs") {
            Some(v) => parse_usize("local_epochs", &v)?,
            None => 1,
        };
        let lr = match take("lr") {
            Some(v) => parse_f64("lr", &v)?,
            None => 1e-3,
        };
        let batch = match take("batch") {
            Some(v) => parse_usize("batch", &v)?,
            None => 16,
        };
        let alpha = match take("alpha") {
            Some(v) => parse_f64("alpha", &v)?,
            None => 0.5,
        };
        let beta = match take("beta") {
            Some(v) => parse_f64("beta", &v)?,
            None => 0.1,
        };
        let tau = match take("tau") {
            Some(v) => parse_f64("tau", &v)?,
            None => 1.0,
        };
        let clusters = match take("clusters") {
            Some(v) => parse_usize("clusters", &v)?,
            None => clients.min(4),
        };
        let window = match take("window") {
            Some(v) => parse_usize("window", &v)?,
            None => 5,
        };
        let silent = match take("silent") {
            Some(v) => parse_usize("silent", &v)?,
            None => 10,
        };
        let theta = match take("theta") {
            Some(v) => parse_f64("theta", &v)?,
            None => 0.5,
        };
        let d_cap = match take("d_cap") {
            Some(v) if v == "auto" => None,
            Some(v) => Some(parse_usize("d_cap", &v)?),
            None => None,
        };
        let k_rw = match take("k_rw") {
            Some(v) => parse_usize("k_rw", &v)?,
            None => 16,
        };
        let hidden = match take("hidden") {
            Some(v) => parse_usize("hidden", &v)?,
            None => 64,
        };
        let latent = match take("latent") {
            Some(v) => parse_usize("latent", &v)?,
            None => 32,
        };
        let layers = match take("layers") {
            Some(v) => parse_usize("layers", &v)?,
            None => 2,
        };
        let seed = match take("seed") {
            Some(v) => parse_u64("seed", &v)?,
            None => 7,
        };
        let ablation = match take("ablation") {
            Some(v) => Ablation::parse(&v)?,
            None => Ablation::None,
        };

        if let Some((key, _)) = raw.into_iter().next() {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }

        let config = ExperimentConfig {
            source,
            clients,
            rounds,
            local_epochs,
            lr,
            batch,
            alpha,
            beta,
            tau,
            clusters,
            window,
            silent,
            theta,
            d_cap,
            k_rw,
            hidden,
            latent,
            layers,
            seed,
            ablation,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.rounds == 0 {
            return fail("rounds must be at least 1".into());
        }
        if self.local_epochs == 0 {
            return fail("local_epochs must be at least 1".into());
        }
        if self.batch == 0 {
            return fail("batch must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha {} outside [0, 1]", self.alpha));
        }
        if self.beta < 0.0 {
            return fail(format!("beta {} is negative", self.beta));
        }
        if self.tau <= 0.0 {
            return fail(format!("tau {} must be positive", self.tau));
        }
        if !(-1.0..=1.0).contains(&self.theta) {
            return fail(format!("theta {} outside [-1, 1]", self.theta));
        }
        if !self.lr.is_finite() || self.lr < 0.0 {
            return fail(format!("lr {} must be a non-negative number", self.lr));
        }
        if self.clusters == 0 || self.clusters > self.clients {
            return fail(format!(
                "clusters = {} must be in [1, {}]",
                self.clusters, self.clients
            ));
        }
        if self.window == 0 || self.silent == 0 {
            return fail("window and silent must be at least 1".into());
        }
        if self.k_rw == 0 || self.hidden == 0 || self.latent == 0 || self.layers == 0 {
            return fail("k_rw, hidden, latent, and layers must be at least 1".into());
        }
        Ok(())
    }

    /// Apply one `key = value` override on top of this configuration, as the
    /// sweep verb does.
    pub fn with_override(&self, key: &str, value: &str) -> Result<ExperimentConfig> {
        let mut pairs = self.to_pairs();
        if !pairs.contains_key(key) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        pairs.insert(key.to_string(), value.to_string());
        ExperimentConfig::from_pairs(pairs)
    }

    fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            p.insert(k.to_string(), v);
        };
        match &self.source {
            SourceSpec::Synthetic {
                per_client,
                train,
                test_normal,
                test_anomalous,
            } => {
                put("dataset", "syn".into());
                put("clients", self.clients.to_string());
                put(
                    "syn_normal",
                    per_client
                        .iter()
                        .map(|c| render_topology(&c.normal))
                        .collect::<Vec<_>>()
                        .join(", "),
                );
                put(
                    "syn_anomaly",
                    per_client
                        .iter()
                        .map(|c| render_topology(&c.anomaly))
                        .collect::<Vec<_>>()
                        .join(", "),
                );
                put(
                    "syn_features",
                    per_client
                        .iter()
                        .map(|c| render_features(&c.features))
                        .collect::<Vec<_>>()
                        .join(", "),
                );
                put("train_per_client", train.to_string());
                put("test_normal_per_client", test_normal.to_string());
                put("test_anomaly_per_client", test_anomalous.to_string());
            }
            SourceSpec::TuSingle {
                root,
                name,
                anomaly_label,
                train_fraction,
            } => {
                put("dataset", "tu".into());
                put("clients", self.clients.to_string());
                put("tu_root", root.display().to_string());
                put("tu_names", name.clone());
                if let Some(l) = anomaly_label {
                    put("anomaly_label", l.to_string());
                }
                put("train_fraction", train_fraction.to_string());
            }
            SourceSpec::TuMulti {
                root,
                names,
                anomaly_label,
                train_fraction,
            } => {
                put("dataset", "tu".into());
                put("tu_root", root.display().to_string());
                put("tu_names", names.join(", "));
                if let Some(l) = anomaly_label {
                    put("anomaly_label", l.to_string());
                }
                put("train_fraction", train_fraction.to_string());
            }
        }
        put("rounds", self.rounds.to_string());
        put("local_epochs", self.local_epochs.to_string());
        put("lr", self.lr.to_string());
        put("batch", self.batch.to_string());
        put("alpha", self.alpha.to_string());
        put("beta", self.beta.to_string());
        put("tau", self.tau.to_string());
        put("clusters", self.clusters.to_string());
        put("window", self.window.to_string());
        put("silent", self.silent.to_string());
        put("theta", self.theta.to_string());
        put(
            "d_cap",
            self.d_cap.map_or("auto".into(), |d| d.to_string()),
        );
        put("k_rw", self.k_rw.to_string());
        put("hidden", self.hidden.to_string());
        put("latent", self.latent.to_string());
        put("layers", self.layers.to_string());
        put("seed", self.seed.to_string());
        put("ablation", self.ablation.as_str().to_string());
        p
    }

    /// Canonical echo of every effective setting, one key per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.to_pairs() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
dataset = syn
clients = 4
syn_normal = cycle:n=6..10
syn_anomaly = clique:n=5..7
";

    #[test]
    fn minimal_synthetic_config_gets_defaults() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.clients, 4);
        assert_eq!(cfg.rounds, 10);
        assert_eq!(cfg.batch, 16);
        assert_eq!(cfg.clusters, 4, "K defaults to min(4, C)");
        assert_eq!(cfg.window, 5);
        assert_eq!(cfg.silent, 10);
        assert_eq!(cfg.theta, 0.5);
        assert_eq!(cfg.k_rw, 16);
        assert_eq!(cfg.ablation, Ablation::None);
        match &cfg.source {
            SourceSpec::Synthetic { per_client, .. } => {
                assert_eq!(per_client.len(), 4);
                assert!(matches!(per_client[0].normal, Topology::Cycle { .. }));
                assert!(matches!(per_client[0].features, FeatureSpec::Ones));
            }
            other => panic!("unexpected source {other:?}"),
        }
    }

    #[test]
    fn k_default_caps_at_four() {
        let text = MINIMAL.replace("clients = 4", "clients = 9");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg.clusters, 4);
    }

    #[test]
    fn per_client_lists_expand_or_match() {
        let text = "\
dataset = syn
clients = 4
syn_normal = er:n=20..30:p=0.3, er:n=20..30:p=0.3, cycle:n=20..30, cycle:n=20..30
syn_anomaly = clique:n=10..12
syn_features = normal:d=8
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        match &cfg.source {
            SourceSpec::Synthetic { per_client, .. } => {
                assert!(matches!(per_client[0].normal, Topology::ErdosRenyi { .. }));
                assert!(matches!(per_client[3].normal, Topology::Cycle { .. }));
                assert!(matches!(
                    per_client[2].features,
                    FeatureSpec::StdNormal { dim: 8 }
                ));
            }
            other => panic!("unexpected source {other:?}"),
        }
        let bad = text.replace("clients = 4", "clients = 3");
        assert!(matches!(
            ExperimentConfig::parse(&bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# header\n\n{MINIMAL}rounds = 3 # trailing\n");
        assert_eq!(ExperimentConfig::parse(&text).unwrap().rounds, 3);
    }

    #[test]
    fn unknown_and_duplicate_keys_are_errors() {
        assert!(matches!(
            ExperimentConfig::parse(&format!("{MINIMAL}typo = 1\n")),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse(&format!("{MINIMAL}rounds = 1\nrounds = 2\n")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn numeric_ranges_are_enforced() {
        for (key, bad) in [
            ("alpha", "1.5"),
            ("beta", "-0.1"),
            ("theta", "2"),
            ("tau", "0"),
            ("rounds", "0"),
            ("clusters", "9"),
        ] {
            let text = format!("{MINIMAL}{key} = {bad}\n");
            assert!(
                matches!(ExperimentConfig::parse(&text), Err(Error::Config(_))),
                "{key} = {bad} should be rejected"
            );
        }
    }

    #[test]
    fn echo_parses_back_to_the_same_config() {
        let text = format!("{MINIMAL}alpha = 0.7\nbeta = 0.2\nseed = 99\nablation = no_gate\n");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let echoed = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, echoed);
    }

    #[test]
    fn overrides_reject_unknown_keys_and_apply_known_ones() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        let swept = cfg.with_override("alpha", "0.9").unwrap();
        assert_eq!(swept.alpha, 0.9);
        assert!(cfg.with_override("nope", "1").is_err());
        assert!(cfg.with_override("alpha", "7").is_err());
    }

    #[test]
    fn tu_single_and_multi_are_distinguished() {
        let single = "dataset = tu\ntu_root = data\ntu_names = MUTAG\nclients = 3\n";
        let cfg = ExperimentConfig::parse(single).unwrap();
        assert!(matches!(cfg.source, SourceSpec::TuSingle { .. }));
        assert_eq!(cfg.clients, 3);

        let multi = "dataset = tu\ntu_root = data\ntu_names = AIDS, MUTAG\n";
        let cfg = ExperimentConfig::parse(multi).unwrap();
        assert!(matches!(cfg.source, SourceSpec::TuMulti { .. }));
        assert_eq!(cfg.clients, 2);

        let clash = "dataset = tu\ntu_root = data\ntu_names = AIDS, MUTAG\nclients = 3\n";
        assert!(matches!(
            ExperimentConfig::parse(clash),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn topology_grammar_round_trips() {
        for spec in [
            "er:n=20..30:p=0.25",
            "cycle:n=6",
            "clique:n=5..7",
            "two:n=20..24:p_in=0.6:p_out=0.05",
        ] {
            let t = parse_topology("syn_normal", spec).unwrap();
            let again = parse_topology("syn_normal", &render_topology(&t)).unwrap();
            assert_eq!(t, again);
        }
        assert!(parse_topology("k", "er:n=5..9:p=0.3:oops=1").is_err());
        assert!(parse_topology("k", "star:n=5").is_err());
        assert!(parse_topology("k", "er:p=0.3").is_err());
    }
}
