//! Command-line surface: ingest, gen, offline, join, bench, retrain.
//!
//! Exit codes: 0 success, 1 user error (bad arguments, missing files,
//! malformed input), 2 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rjoin::config::EngineConfig;
use rjoin::dataset::{self, Dataset, DatasetSidecar, ScanStats};
use rjoin::error::{EngineError, Result};
use rjoin::pipeline;

#[derive(Parser)]
#[command(
    name = "rjoin",
    about = "Spatial distance joins with learned partitioner reuse"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Register a CSV point file under a dataset id
    Ingest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        id: String,
    },
    /// Synthesize an enlarged dataset from an ingested one
    Gen {
        #[arg(long)]
        config: PathBuf,
        /// Source dataset id
        #[arg(long)]
        source: String,
        #[arg(long)]
        target_count: u64,
        /// Id (and file name) of the synthetic dataset
        #[arg(long)]
        id: String,
        /// Histogram resolution driving the resampling
        #[arg(long, default_value_t = 256)]
        resolution: u32,
    },
    /// Train the model and forest and populate the repository
    Offline {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated dataset ids (default: everything ingested)
        #[arg(long)]
        datasets: Option<String>,
        /// Join workload file with `left,right` lines (default: seeded
        /// random pairing)
        #[arg(long)]
        joins: Option<PathBuf>,
        #[arg(long)]
        theta: f64,
    },
    /// Run one online join
    Join {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        workers: Option<usize>,
        /// Skip the reuse decision and always build a fresh partitioner
        #[arg(long)]
        force_repartition: bool,
        /// Write the result pairs as CSV here (stats JSON lands next to it)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a workload under forced-repartition and online modes
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        datasets: Option<String>,
        #[arg(long)]
        joins: Option<PathBuf>,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Retrain the model and forest from the repository contents
    Retrain {
        #[arg(long)]
        config: PathBuf,
    },
}

fn sidecar_path(cfg: &EngineConfig, id: &str) -> PathBuf {
    cfg.data_dir.join(format!("{id}.meta.json"))
}

fn load_dataset(cfg: &EngineConfig, id: &str) -> Result<Dataset> {
    let path = sidecar_path(cfg, id);
    if !path.exists() {
        return Err(EngineError::UnknownDataset(id.to_string()));
    }
    DatasetSidecar::load(&path)?.into_dataset()
}

fn list_dataset_ids(cfg: &EngineConfig) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    let entries = std::fs::read_dir(&cfg.data_dir).map_err(|e| EngineError::io(&cfg.data_dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| EngineError::io(&cfg.data_dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(id) = name.strip_suffix(".meta.json") {
            ids.push(id.to_string());
        }
    }
    ids.sort();
    Ok(ids)
}

fn resolve_datasets(cfg: &EngineConfig, selection: &Option<String>) -> Result<Vec<Dataset>> {
    let ids = match selection {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => list_dataset_ids(cfg)?,
    };
    ids.iter().map(|id| load_dataset(cfg, id)).collect()
}

fn load_joins(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| EngineError::io(path, e))?;
    let mut joins = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((l, r)) = line.split_once(',') else {
            return Err(EngineError::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: format!("expected `left,right`, got {line:?}"),
            });
        };
        joins.push((l.trim().to_string(), r.trim().to_string()));
    }
    Ok(joins)
}

fn resolve_joins(
    cfg: &EngineConfig,
    datasets: &[Dataset],
    joins: &Option<PathBuf>,
) -> Result<Vec<(String, String)>> {
    match joins {
        Some(path) => load_joins(path),
        None => {
            let ids: Vec<String> = datasets.iter().map(|d| d.id.clone()).collect();
            Ok(dataset::pair_joins(&ids, cfg.seeds.workload))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Ingest { config, path, id } => {
            let cfg = EngineConfig::load(&config)?;
            rjoin::fsutil::create_dir_all(&cfg.data_dir)?;
            let mut scans = ScanStats::default();
            let d = dataset::ingest(&path, &id, cfg.sample_cap, cfg.seeds.ingest, &mut scans)?;
            DatasetSidecar::from_dataset(&d, cfg.seeds.ingest).save(&sidecar_path(&cfg, &id))?;
            println!(
                "ingested {id}: {} points, bbox ({}, {}, {}, {})",
                d.count,
                d.metadata.bbox.min_x,
                d.metadata.bbox.min_y,
                d.metadata.bbox.max_x,
                d.metadata.bbox.max_y
            );
            Ok(())
        }
        Cmd::Gen {
            config,
            source,
            target_count,
            id,
            resolution,
        } => {
            let cfg = EngineConfig::load(&config)?;
            let src = load_dataset(&cfg, &source)?;
            if target_count < src.count {
                return Err(EngineError::Config(format!(
                    "target_count {target_count} below source count {}",
                    src.count
                )));
            }
            let out = cfg.data_dir.join(format!("{id}.csv"));
            let mut scans = ScanStats::default();
            let d = dataset::enlarge(
                &src,
                target_count,
                resolution,
                cfg.seeds.workload,
                &out,
                &id,
                cfg.sample_cap,
                &mut scans,
            )?;
            DatasetSidecar::from_dataset(&d, cfg.seeds.workload).save(&sidecar_path(&cfg, &id))?;
            println!("generated {id}: {} points at {}", d.count, out.display());
            Ok(())
        }
        Cmd::Offline {
            config,
            datasets,
            joins,
            theta,
        } => {
            let cfg = EngineConfig::load(&config)?;
            let sets = resolve_datasets(&cfg, &datasets)?;
            let joins = resolve_joins(&cfg, &sets, &joins)?;
            let report = pipeline::offline(&cfg, &sets, &joins, theta)?;
            println!(
                "offline done: {} datasets, {} joins, {} decision samples, val mse {:.6}{}",
                sets.len(),
                joins.len(),
                report.samples.len(),
                report.train_report.final_val_mse,
                if report.forest_degenerate {
                    " (forest degenerate)"
                } else {
                    ""
                }
            );
            Ok(())
        }
        Cmd::Join {
            config,
            left,
            right,
            theta,
            workers,
            force_repartition,
            out,
        } => {
            let mut cfg = EngineConfig::load(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let l = load_dataset(&cfg, &left)?;
            let r = load_dataset(&cfg, &right)?;
            let (result, trace) = pipeline::online(&cfg, &l, &r, theta, force_repartition)?;
            if let Some(out) = out {
                let mut csv = String::from("r_index,s_index\n");
                for (a, b) in &result.pairs {
                    csv.push_str(&format!("{a},{b}\n"));
                }
                rjoin::fsutil::write_atomic(&out, csv.as_bytes())?;
                let stats_path = out.with_extension("stats.json");
                rjoin::fsutil::write_atomic(
                    &stats_path,
                    serde_json::to_string_pretty(&result.stats)
                        .expect("stats serialize")
                        .as_bytes(),
                )?;
            }
            println!(
                "join {left} x {right} theta {theta}: {} pairs, decision {}{}, sim {}",
                result.pairs.len(),
                trace.decision,
                if trace.reuse_failed {
                    " (reuse failed, fell back)"
                } else {
                    ""
                },
                trace
                    .sim_max
                    .map_or("n/a".to_string(), |s| format!("{s:.4}")),
            );
            Ok(())
        }
        Cmd::Bench {
            config,
            datasets,
            joins,
            theta,
            workers,
        } => {
            let mut cfg = EngineConfig::load(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let sets = resolve_datasets(&cfg, &datasets)?;
            let joins = resolve_joins(&cfg, &sets, &joins)?;
            let report = pipeline::bench(&cfg, &sets, &joins, theta)?;
            print!("{}", report.render_table());
            Ok(())
        }
        Cmd::Retrain { config } => {
            let cfg = EngineConfig::load(&config)?;
            let report = pipeline::retrain(&cfg)?;
            println!(
                "retrained on {} samples, val mse {:.6}{}",
                report.n_samples,
                report.train_report.final_val_mse,
                if report.forest_degenerate {
                    " (forest degenerate)"
                } else {
                    ""
                }
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes; everything else is a
            // user error
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
