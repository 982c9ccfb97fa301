//! Batch experiment runner. Every pipeline is a subcommand taking a JSON
//! config; results are CSV for scans and JSON for single runs, with the
//! resolved config and version tag embedded. Identical configs (including
//! seeds) produce byte-identical payloads; wall-clock metadata goes to a
//! `.meta.json` sidecar.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use config::*;

pub const VERSION_TAG: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "stitchkit",
    version,
    about = "Purity, entropy and PT-moment estimation of 1D qubit chains from stitched local randomized measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config file for the subcommand
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the config's master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap the rayon worker count
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output path; defaults to STITCHKIT_DATA_DIR or the working directory
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact dense quantities (moments, entropies, PT moments, probes)
    Oracle,
    /// Circuit-state factorization identity sweeps
    FdqcCheck,
    /// Simulate one randomized-measurement batch and run the estimators
    ShadowSim,
    /// Full stitched estimation protocol (purity, optionally f3)
    StitchRun,
    /// Random-MPS measurement-budget study with the Hamming estimator
    MpsDemo,
    /// Factorization-error scans of Gibbs states
    AfcScan,
    /// PPT-probe phase scan over temperature and size
    PptScan,
    /// Transfer-matrix purity bound on random MPDO tensors
    MpdoBound,
}

impl Command {
    fn default_output(&self) -> &'static str {
        match self {
            Command::Oracle => "oracle.json",
            Command::FdqcCheck => "fdqc_check.json",
            Command::ShadowSim => "shadow_sim.json",
            Command::StitchRun => "stitch_run.json",
            Command::MpsDemo => "mps_demo.csv",
            Command::AfcScan => "afc_scan.csv",
            Command::PptScan => "ppt_scan.csv",
            Command::MpdoBound => "mpdo_bound.csv",
        }
    }
}

fn read_config_text(path: &Option<PathBuf>) -> Result<String> {
    let path = path
        .as_ref()
        .ok_or_else(|| Error::Config("this subcommand requires --config PATH".into()))?;
    Ok(std::fs::read_to_string(path)?)
}

fn resolve_output(
    cli_output: &Option<PathBuf>,
    config_output: &Option<String>,
    default_name: &str,
) -> PathBuf {
    if let Some(path) = cli_output {
        return path.clone();
    }
    if let Some(path) = config_output {
        return PathBuf::from(path);
    }
    let root = std::env::var("STITCHKIT_DATA_DIR").unwrap_or_else(|_| ".".into());
    Path::new(&root).join(default_name)
}

fn write_payload(path: &Path, payload: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, payload)?;
    let sidecar = path.with_extension(format!(
        "{}.meta.json",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    let meta = json!({
        "version": VERSION_TAG,
        "written_unix_ms": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0),
    });
    std::fs::write(sidecar, serde_json::to_vec_pretty(&meta)?)?;
    Ok(())
}

fn json_result<C: Serialize>(config: &C, result: serde_json::Value) -> Result<Vec<u8>> {
    let doc = json!({
        "version": VERSION_TAG,
        "config": config,
        "result": result,
    });
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_result<C: Serialize>(config: &C, table: &str) -> Result<Vec<u8>> {
    // the resolved config rides along as a comment header
    let mut out = format!(
        "# stitchkit v{} config={}\n",
        VERSION_TAG,
        serde_json::to_string(config)?
    )
    .into_bytes();
    out.extend_from_slice(table.as_bytes());
    Ok(out)
}

/// Run a parsed CLI invocation. Returns the path the payload was written to.
pub fn run(cli: &Cli) -> Result<PathBuf> {
    if let Some(jobs) = cli.jobs {
        // a global pool can only be installed once per process; later calls
        // with the same value are harmless no-ops
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match &cli.command {
        Command::Oracle => {
            let mut cfg: OracleConfig = parse_config(&read_config_text(&cli.config)?)?;
            let out = resolve_output(&cli.output, &cfg.output_path, cli.command.default_output());
            cfg.output_path = Some(out.display().to_string());
            let result = commands::cmd_oracle(&cfg)?;
            write_payload(&out, &json_result(&cfg, result)?)?;
            Ok(out)
        }
        Command::FdqcCheck => {
            let mut cfg: FdqcCheckConfig = parse_config(&read_config_text(&cli.config)?)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out = resolve_output(&cli.output, &cfg.output_path, cli.command.default_output());
            cfg.output_path = Some(out.display().to_string());
            let result = commands::cmd_fdqc_check(&cfg)?;
            write_payload(&out, &json_result(&cfg, result)?)?;
            Ok(out)
        }
        Command::ShadowSim => {
            let mut cfg: ShadowSimConfig = parse_config(&read_config_text(&cli.config)?)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out = resolve_output(&cli.output, &cfg.output_path, cli.command.default_output());
            cfg.output_path = Some(out.display().to_string());
            let batch_path = cfg
                .batch_path
                .clone()
                .map(PathBuf::from)
                .unwrap_or_else(|| out.with_extension("batch"));
            let output = commands::cmd_shadow_sim(&cfg)?;
            crate::shadows::save_batch(&batch_path, &output.batch)?;
            let result = json!({
                "estimates": output.estimates,
                "batch_file": batch_path.display().to_string(),
            });
            write_payload(&out, &json_result(&cfg, result)?)?;
            Ok(out)
        }
        Command::StitchRun => {
            let mut cfg: StitchRunConfig = parse_config(&read_config_text(&cli.config)?)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out = resolve_output(&cli.output, &cfg.output_path, cli.command.default_output());
            cfg.output_path = Some(out.display().to_string());
            let result = commands::cmd_stitch_run(&cfg)?;
            write_payload(&out, &json_result(&cfg, result)?)?;
            Ok(out)
        }
        Command::MpsDemo => {
            let mut cfg: MpsDemoConfig = parse_config(&read_config_text(&cli.config)?)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out = resolve_output(&cli.output, &cfg.output_path, cli.command.default_output());
            cfg.output_path = Some(out.display().to_string());
            let rows = commands::cmd_mps_demo(&cfg)?;
            write_payload(&out, &csv_result(&cfg, &commands::mps_demo_csv(&rows))?)?;
            Ok(out)
        }
        Command::AfcScan => {
            let cfg: AfcScanConfig = parse_config(&read_config_text(&cli.config)?)?;
            let out = resolve_output(&cli.output, &cfg.output_path, cli.command.default_output());
            let records = commands::cmd_afc_scan(&cfg)?;
            write_payload(&out, &csv_result(&cfg, &crate::afc::write_csv(&records))?)?;
            Ok(out)
        }
        Command::PptScan => {
            let cfg: PptScanConfig = parse_config(&read_config_text(&cli.config)?)?;
            let out = resolve_output(&cli.output, &cfg.output_path, cli.command.default_output());
            let table = commands::cmd_ppt_scan(&cfg)?;
            write_payload(&out, &csv_result(&cfg, &table)?)?;
            Ok(out)
        }
        Command::MpdoBound => {
            let mut cfg: MpdoBoundConfig = parse_config(&read_config_text(&cli.config)?)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out = resolve_output(&cli.output, &cfg.output_path, cli.command.default_output());
            cfg.output_path = Some(out.display().to_string());
            let table = commands::cmd_mpdo_bound(&cfg)?;
            write_payload(&out, &csv_result(&cfg, &table)?)?;
            Ok(out)
        }
    }
}
