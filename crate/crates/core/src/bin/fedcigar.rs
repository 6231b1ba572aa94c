//! Experiment harness: run, ablate, sweep, and inspect verbs over the
//! flat key-value config format. All artifacts land in a directory named
//! after the config file, so runs never clobber each other.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fedcigar::config::ExperimentConfig;
use fedcigar::error::Result;
use fedcigar::experiment::{
    ablation_table, run_ablation, run_experiment, sweep_table, RunOutput,
};
use fedcigar::model::{checkpoint_bytes, checkpoint_from_bytes};

#[derive(Parser)]
#[command(
    name = "fedcigar",
    about = "Federated graph-level anomaly detection experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment end to end and write its artifacts.
    Run {
        /// Path to a flat key-value config file.
        config: PathBuf,
        /// Output directory (default: `<config stem>.out` next to the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full ablation grid (none, no_se, no_gate, no_cluster).
    Ablate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a config once per value of one overridden key.
    Sweep {
        config: PathBuf,
        /// Config key to override, e.g. `alpha`.
        #[arg(long)]
        key: String,
        /// Comma-separated values to sweep over, e.g. `0.1,0.5,0.9`.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a summary of a model checkpoint.
    Inspect { checkpoint: PathBuf },
}

fn default_out(config: &Path) -> PathBuf {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    config.with_file_name(format!("{stem}.out"))
}

fn missing_or_io(path: &Path, e: std::io::Error) -> fedcigar::Error {
    if e.kind() == std::io::ErrorKind::NotFound {
        fedcigar::Error::MissingFile(path.to_path_buf())
    } else {
        fedcigar::Error::Io(e)
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| missing_or_io(path, e))?;
    ExperimentConfig::parse(&text)
}

fn write_run(dir: &Path, run: &RunOutput) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.txt"), run.report_text())?;
    fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&run.report).expect("report serializes"),
    )?;
    fs::write(dir.join("round_log.jsonl"), run.round_log())?;
    fs::write(dir.join("scores.tsv"), run.score_dump())?;
    fs::write(dir.join("loss_curves.tsv"), run.loss_curves())?;
    fs::write(dir.join("config_echo.cfg"), &run.config_echo)?;
    for (cluster, model) in &run.bank.models {
        fs::write(
            dir.join(format!("model_cluster{cluster}.ckpt")),
            checkpoint_bytes(model, run.seed),
        )?;
    }
    Ok(())
}

fn run_verb(config: &Path, out: Option<PathBuf>) -> Result<String> {
    let cfg = load_config(config)?;
    let run = run_experiment(&cfg)?;
    let dir = out.unwrap_or_else(|| default_out(config));
    write_run(&dir, &run)?;
    Ok(format!(
        "wrote {} (macro auc {:.4}, macro f1 {:.4})",
        dir.display(),
        run.report.macro_auc,
        run.report.macro_f1
    ))
}

fn ablate_verb(config: &Path, out: Option<PathBuf>) -> Result<String> {
    let cfg = load_config(config)?;
    let results = run_ablation(&cfg)?;
    let dir = out.unwrap_or_else(|| default_out(config));
    fs::create_dir_all(&dir)?;
    for (ablation, run) in &results {
        write_run(&dir.join(ablation.as_str()), run)?;
    }
    let table = ablation_table(&results);
    fs::write(dir.join("ablation.tsv"), &table)?;
    Ok(format!("wrote {}\n{table}", dir.display()))
}

fn sweep_verb(
    config: &Path,
    key: &str,
    values: &str,
    out: Option<PathBuf>,
) -> Result<String> {
    let cfg = load_config(config)?;
    let dir = out.unwrap_or_else(|| default_out(config));
    fs::create_dir_all(&dir)?;
    let mut rows = Vec::new();
    for value in values.split(',').map(str::trim).filter(|v| !v.is_empty()) {
        let variant = cfg.with_override(key, value)?;
        let run = run_experiment(&variant)?;
        let slug: String = value
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '_' })
            .collect();
        write_run(&dir.join(format!("{key}_{slug}")), &run)?;
        rows.push((value.to_string(), run.report));
    }
    if rows.is_empty() {
        return Err(fedcigar::Error::Usage(
            "sweep needs at least one value".into(),
        ));
    }
    let table = sweep_table(key, &rows);
    fs::write(dir.join("sweep.tsv"), &table)?;
    Ok(format!("wrote {}\n{table}", dir.display()))
}

fn inspect_verb(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| missing_or_io(path, e))?;
    let (params, seed) = checkpoint_from_bytes(&bytes)?;
    let d = params.dims;
    let mut out = format!(
        "checkpoint {}\n  seed: {seed}\n  parameters: {}\n  feature_dim: {}\n  structure_dim: {}\n  hidden: {}\n  latent: {}\n  layers: {}\n  tensors:\n",
        path.display(),
        params.param_count(),
        d.feature_dim,
        d.structure_dim,
        d.hidden,
        d.latent,
        d.layers
    );
    for (name, m) in params.named_tensors() {
        out.push_str(&format!("    {name}: {}x{}\n", m.rows(), m.cols()));
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run_verb(&config, out),
        Command::Ablate { config, out } => ablate_verb(&config, out),
        Command::Sweep {
            config,
            key,
            values,
            out,
        } => sweep_verb(&config, &key, &values, out),
        Command::Inspect { checkpoint } => inspect_verb(&checkpoint),
    };
    match result {
        Ok(message) => {
            println!("{message}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
