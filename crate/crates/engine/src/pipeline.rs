//! Orchestration: offline training, the online decision path, the
//! benchmark harness, and retraining.
//!
//! Artifacts under the repository directory:
//!   models/siamese.json           distance-model checkpoint
//!   models/forest.json            decision-forest checkpoint
//!   models/training_report.json   grid search + epoch curves
//!   models/offline_samples.json   labeled decision samples
//!   ground_truth.json             cached divergence matrix
//!   decisions.log                 one JSON line per online call
//!   effective-config.txt          config snapshot of the last command
//!
//! The benchmark writes two files: `bench_trace.json` holds only
//! seed-deterministic fields and is byte-comparable across runs;
//! `bench_report.json` adds wall-clock timings and ratios.

use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use rjoin_core::embedding::{embed, DatasetEmbedding};
use rjoin_core::forest::{fit, Decision, DecisionForest, DecisionSample, Tree, TreeNode};
use rjoin_core::nn::{train, SiameseModel, TrainConfig, TrainReport};

use crate::checkpoint;
use crate::config::EngineConfig;
use crate::dataset::{Dataset, ScanStats};
use crate::engine::{run_join, speedup_report, JoinResult, PartitionerSource};
use crate::error::{EngineError, Result};
use crate::fsutil;
use crate::histio;
use crate::partfile;
use crate::repository::{RepoLock, Repository};

pub const MODEL_REL: &str = "models/siamese.json";
pub const FOREST_REL: &str = "models/forest.json";
const TRAIN_REPORT_REL: &str = "models/training_report.json";
const SAMPLES_REL: &str = "models/offline_samples.json";
const GROUND_TRUTH_REL: &str = "ground_truth.json";
const DECISION_LOG_REL: &str = "decisions.log";

fn embed_dataset(d: &Dataset, coord_scale: f64) -> DatasetEmbedding {
    embed(&d.id, &d.metadata, coord_scale)
}

/// JSON-safe decision sample (`serde_json` cannot carry the +inf runtime
/// of a failed reuse, so it is stored as an absent `t1`).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SampleRecord {
    sim_max: f64,
    t1: Option<f64>,
    t2: f64,
    label: u8,
}

impl SampleRecord {
    fn from_sample(s: &DecisionSample) -> Self {
        SampleRecord {
            sim_max: s.sim_max,
            t1: s.t1.is_finite().then_some(s.t1),
            t2: s.t2,
            label: s.label,
        }
    }

    fn into_sample(self) -> DecisionSample {
        DecisionSample::new(self.sim_max, self.t1.unwrap_or(f64::INFINITY), self.t2)
    }
}

/// Forest over the collected samples; an empty or single-class sample set
/// degenerates to a constant classifier (constant "repartition" when there
/// are no samples at all).
fn fit_or_default(samples: &[DecisionSample], seed: u64) -> DecisionForest {
    const N_TREES: usize = 100;
    const MAX_DEPTH: usize = 5;
    if samples.is_empty() {
        return DecisionForest {
            n_trees: N_TREES,
            max_depth: MAX_DEPTH,
            seed,
            trees: vec![
                Tree {
                    nodes: vec![TreeNode::Leaf { class: 0 }],
                };
                N_TREES
            ],
            degenerate: true,
        };
    }
    fit(samples, N_TREES, MAX_DEPTH, seed)
}

#[derive(Debug)]
pub struct OfflineReport {
    pub train_report: TrainReport,
    pub samples: Vec<DecisionSample>,
    pub forest_degenerate: bool,
}

/// Offline phase: embed the training datasets, train the distance model on
/// ground-truth divergences, partition and store every join's left dataset,
/// collect (similarity, faster-way) labels by running each training join
/// both ways, and fit the decision forest.
pub fn offline(
    cfg: &EngineConfig,
    datasets: &[Dataset],
    joins: &[(String, String)],
    theta: f64,
) -> Result<OfflineReport> {
    assert!(datasets.len() >= 2, "offline needs at least 2 datasets");
    let _lock = RepoLock::acquire(&cfg.repo_dir)?;
    let mut repo = Repository::open(&cfg.repo_dir)?;
    cfg.snapshot(&cfg.repo_dir)?;
    let mut scans = ScanStats::default();

    let find = |id: &str| -> Result<usize> {
        datasets
            .iter()
            .position(|d| d.id == id)
            .ok_or_else(|| EngineError::UnknownDataset(id.to_string()))
    };
    for (l, r) in joins {
        find(l)?;
        find(r)?;
    }

    // Step 1: embeddings
    let embs: Vec<DatasetEmbedding> = datasets
        .iter()
        .map(|d| embed_dataset(d, cfg.coord_scale))
        .collect();

    // Step 2: ground truth + distance model
    let sources: Vec<(String, PathBuf)> = datasets
        .iter()
        .map(|d| (d.id.clone(), d.path.clone()))
        .collect();
    let matrix = histio::ground_truth_matrix(
        &sources,
        cfg.global_domain,
        cfg.histogram_resolution,
        Some(&repo.abs(GROUND_TRUTH_REL)),
        &mut scans,
    )?;
    let pairs = training_pairs(&embs, &matrix);
    let tc = TrainConfig {
        seed: cfg.seeds.train,
        ..TrainConfig::default()
    };
    let (model, train_report) = train(&pairs, &tc)?;
    checkpoint::save_model(&repo.abs(MODEL_REL), &model, cfg.coord_scale)?;
    fsutil::write_atomic(
        &repo.abs(TRAIN_REPORT_REL),
        serde_json::to_string_pretty(&train_report)
            .expect("report serializes")
            .as_bytes(),
    )?;

    // Step 3a: partition and store every left dataset
    for (left, _) in joins {
        if repo.entry(left).is_some() {
            continue;
        }
        let idx = find(left)?;
        let d = &datasets[idx];
        let mut st = crate::engine::JoinStats::default();
        let p = crate::engine::build_or_fetch_partitioner(
            d,
            PartitionerSource::Build,
            cfg,
            &mut scans,
            &mut st,
        )?;
        let rel = format!("partitioners/{}.json", d.id);
        partfile::save_partitioner(&repo.abs(&rel), &p)?;
        repo.add(&d.id, &embs[idx], &rel, &d.path.display().to_string())?;
    }

    // Step 3b: run each training join both ways against the best match
    // among the *other* stored partitioners
    let mut samples = Vec::new();
    for (left, right) in joins {
        let li = find(left)?;
        let ri = find(right)?;
        let exclude = [left.as_str(), right.as_str()];
        let (sim, matched) =
            match repo.best_match_excluding(&embs[li], &embs[ri], &model, &exclude) {
                Ok((sim, idx)) => (sim, repo.manifest.entries[idx].clone()),
                Err(EngineError::EmptyRepository) => continue,
                Err(e) => return Err(e),
            };
        let (fresh, _) = run_join(
            &datasets[li],
            &datasets[ri],
            theta,
            PartitionerSource::Build,
            cfg,
            &mut scans,
        )?;
        let t2 = fresh.stats.total_time();
        let t1 = match run_join(
            &datasets[li],
            &datasets[ri],
            theta,
            PartitionerSource::Reuse {
                path: &repo.abs(&matched.partitioner_path),
                matched_dataset_id: matched.dataset_id.clone(),
            },
            cfg,
            &mut scans,
        ) {
            Ok((reused, _)) => {
                debug_assert_eq!(reused.pairs, fresh.pairs);
                reused.stats.total_time()
            }
            Err(EngineError::Capacity { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        samples.push(DecisionSample::new(sim, t1, t2));
    }

    let forest = fit_or_default(&samples, cfg.seeds.forest);
    if forest.degenerate {
        eprintln!("warning: decision samples are single-class; forest is a constant classifier");
    }
    checkpoint::save_forest(&repo.abs(FOREST_REL), &forest)?;
    let records: Vec<SampleRecord> = samples.iter().map(SampleRecord::from_sample).collect();
    fsutil::write_atomic(
        &repo.abs(SAMPLES_REL),
        serde_json::to_string_pretty(&records)
            .expect("samples serialize")
            .as_bytes(),
    )?;
    repo.manifest.model_ref = Some(MODEL_REL.to_string());
    repo.manifest.forest_ref = Some(FOREST_REL.to_string());
    repo.save()?;

    Ok(OfflineReport {
        train_report,
        forest_degenerate: forest.degenerate,
        samples,
    })
}

/// All unordered cross pairs plus all self-pairs with target 0.
fn training_pairs(
    embs: &[DatasetEmbedding],
    matrix: &[Vec<f64>],
) -> Vec<rjoin_core::nn::TrainPair> {
    let mut pairs = Vec::new();
    for (i, e) in embs.iter().enumerate() {
        pairs.push(rjoin_core::nn::TrainPair {
            a: e.v,
            b: e.v,
            target: 0.0,
        });
        for (j, f) in embs.iter().enumerate().skip(i + 1) {
            pairs.push(rjoin_core::nn::TrainPair {
                a: e.v,
                b: f.v,
                target: matrix[i][j],
            });
        }
    }
    pairs
}

/// One JSON line per online call, appended to `decisions.log`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionTrace {
    pub seq: u64,
    pub left: String,
    pub right: String,
    pub theta: f64,
    /// Absent when the repository was empty or no model was trained.
    pub sim_max: Option<f64>,
    pub matched_id: Option<String>,
    /// "reuse" or "repartition" (the executed path).
    pub decision: String,
    pub forced: bool,
    /// True when reuse was chosen but failed and the join fell back to
    /// repartitioning; `t2` then holds the fallback runtime.
    pub reuse_failed: bool,
    pub match_seconds: f64,
    pub decide_seconds: f64,
    pub pair_count: usize,
    pub t2: Option<f64>,
}

/// Loaded model + forest, shared by online calls.
pub struct OnlineContext {
    pub model: SiameseModel,
    pub forest: DecisionForest,
    pub coord_scale: f64,
}

/// Loads the checkpoints referenced by the manifest, or `None` when the
/// offline phase has not run.
pub fn load_context(repo: &Repository) -> Result<Option<OnlineContext>> {
    let (Some(model_ref), Some(forest_ref)) =
        (&repo.manifest.model_ref, &repo.manifest.forest_ref)
    else {
        return Ok(None);
    };
    let (model, coord_scale) = checkpoint::load_model(&repo.abs(model_ref))?;
    let forest = checkpoint::load_forest(&repo.abs(forest_ref))?;
    Ok(Some(OnlineContext {
        model,
        forest,
        coord_scale,
    }))
}

fn append_trace(repo: &Repository, trace: &DecisionTrace) -> Result<()> {
    let path = repo.dir.join(DECISION_LOG_REL);
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| EngineError::io(&path, e))?;
    writeln!(
        file,
        "{}",
        serde_json::to_string(trace).expect("trace serializes")
    )
    .map_err(|e| EngineError::io(&path, e))
}

fn trace_count(repo: &Repository) -> u64 {
    std::fs::read_to_string(repo.dir.join(DECISION_LOG_REL))
        .map(|t| t.lines().count() as u64)
        .unwrap_or(0)
}

/// Online phase against an already-open repository. Embeds both sides,
/// looks up the best stored match, asks the forest, and executes; any
/// reuse-path failure falls back to repartitioning and is recorded. A
/// fresh partitioner is stored unless the left dataset already has one.
fn online_inner(
    cfg: &EngineConfig,
    repo: &mut Repository,
    ctx: Option<&OnlineContext>,
    left: &Dataset,
    right: &Dataset,
    theta: f64,
    force_repartition: bool,
    scans: &mut ScanStats,
) -> Result<(JoinResult, DecisionTrace)> {
    let mut trace = DecisionTrace {
        seq: trace_count(repo),
        left: left.id.clone(),
        right: right.id.clone(),
        theta,
        sim_max: None,
        matched_id: None,
        decision: "repartition".to_string(),
        forced: force_repartition,
        reuse_failed: false,
        match_seconds: 0.0,
        decide_seconds: 0.0,
        pair_count: 0,
        t2: None,
    };

    let mut reuse_plan: Option<(String, String)> = None; // (matched id, rel path)
    if let Some(ctx) = ctx {
        if !force_repartition {
            let l_emb = embed_dataset(left, ctx.coord_scale);
            let r_emb = embed_dataset(right, ctx.coord_scale);
            let t = Instant::now();
            match repo.best_match(&l_emb, &r_emb, &ctx.model) {
                Ok((sim, idx)) => {
                    trace.match_seconds = t.elapsed().as_secs_f64();
                    let entry = &repo.manifest.entries[idx];
                    trace.sim_max = Some(sim);
                    trace.matched_id = Some(entry.dataset_id.clone());
                    let t = Instant::now();
                    let decision = ctx.forest.predict(sim);
                    trace.decide_seconds = t.elapsed().as_secs_f64();
                    if decision == Decision::Reuse {
                        reuse_plan =
                            Some((entry.dataset_id.clone(), entry.partitioner_path.clone()));
                    }
                }
                Err(EngineError::EmptyRepository) => {
                    trace.match_seconds = t.elapsed().as_secs_f64();
                }
                Err(e) => return Err(e),
            }
        }
    } else if !force_repartition {
        eprintln!("warning: no trained model in repository; repartitioning");
    }

    if let Some((matched_id, rel)) = reuse_plan {
        let source = PartitionerSource::Reuse {
            path: &repo.abs(&rel),
            matched_dataset_id: matched_id,
        };
        match run_join(left, right, theta, source, cfg, scans) {
            Ok((result, _)) => {
                trace.decision = "reuse".to_string();
                trace.pair_count = result.pairs.len();
                return Ok((result, trace));
            }
            Err(EngineError::Capacity { .. }) | Err(EngineError::Format { .. }) => {
                trace.reuse_failed = true;
            }
            Err(e) => return Err(e),
        }
    }

    let (result, p) = run_join(left, right, theta, PartitionerSource::Build, cfg, scans)?;
    if trace.reuse_failed {
        trace.t2 = Some(result.stats.total_time());
    }
    trace.pair_count = result.pairs.len();
    if repo.entry(&left.id).is_none() {
        let rel = format!("partitioners/{}.json", left.id);
        partfile::save_partitioner(&repo.abs(&rel), &p)?;
        let scale = ctx.map_or(cfg.coord_scale, |c| c.coord_scale);
        repo.add(
            &left.id,
            &embed_dataset(left, scale),
            &rel,
            &left.path.display().to_string(),
        )?;
    }
    Ok((result, trace))
}

/// Locked single online join; appends its decision trace.
pub fn online(
    cfg: &EngineConfig,
    left: &Dataset,
    right: &Dataset,
    theta: f64,
    force_repartition: bool,
) -> Result<(JoinResult, DecisionTrace)> {
    let _lock = RepoLock::acquire(&cfg.repo_dir)?;
    let mut repo = Repository::open(&cfg.repo_dir)?;
    cfg.snapshot(&cfg.repo_dir)?;
    let ctx = load_context(&repo)?;
    let mut scans = ScanStats::default();
    let (result, trace) = online_inner(
        cfg,
        &mut repo,
        ctx.as_ref(),
        left,
        right,
        theta,
        force_repartition,
        &mut scans,
    )?;
    append_trace(&repo, &trace)?;
    Ok((result, trace))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub left: String,
    pub right: String,
    pub decision: String,
    pub reuse_failed: bool,
    pub results_equal: bool,
    pub pair_count: usize,
    pub sim_max: Option<f64>,
    pub matched_id: Option<String>,
    pub overall_ratio: f64,
    pub partitioning_ratio: f64,
    pub match_seconds: f64,
    pub decide_seconds: f64,
}

/// Order statistics of the per-join ratios.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Percentiles {
    pub best: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub worst: f64,
}

pub fn percentiles(values: &[f64]) -> Percentiles {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let at = |q: f64| sorted[((sorted.len() - 1) as f64 * q).round() as usize];
    Percentiles {
        best: *sorted.last().unwrap(),
        p25: at(0.25),
        median: at(0.5),
        p75: at(0.75),
        worst: sorted[0],
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub reuse_frequency: f64,
    pub overall: Percentiles,
    pub partitioning: Percentiles,
}

impl BenchReport {
    /// Human-readable summary table.
    pub fn render_table(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<12} {:<12} {:<12} {:>8} {:>10} {:>12} {:>6}",
            "left", "right", "decision", "pairs", "overall", "partitioning", "equal"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<12} {:<12} {:<12} {:>8} {:>10.3} {:>12.3} {:>6}",
                r.left,
                r.right,
                r.decision,
                r.pair_count,
                r.overall_ratio,
                r.partitioning_ratio,
                r.results_equal
            );
        }
        let _ = writeln!(s, "reuse frequency: {:.1}%", 100.0 * self.reuse_frequency);
        let p = &self.partitioning;
        let _ = writeln!(
            s,
            "partitioning speed-up  best {:.3}  p75 {:.3}  median {:.3}  p25 {:.3}  worst {:.3}",
            p.best, p.p75, p.median, p.p25, p.worst
        );
        let o = &self.overall;
        let _ = writeln!(
            s,
            "overall speed-up       best {:.3}  p75 {:.3}  median {:.3}  p25 {:.3}  worst {:.3}",
            o.best, o.p75, o.median, o.p25, o.worst
        );
        s
    }
}

/// The deterministic subset of the benchmark output; byte-comparable
/// across runs with identical seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BenchTraceRow {
    left: String,
    right: String,
    decision: String,
    reuse_failed: bool,
    results_equal: bool,
    pair_count: usize,
    sim_max: Option<f64>,
    matched_id: Option<String>,
}

/// Runs each join once under forced repartitioning and once through the
/// online path, checks the two pair sets agree, and reports speed-ups.
pub fn bench(
    cfg: &EngineConfig,
    datasets: &[Dataset],
    joins: &[(String, String)],
    theta: f64,
) -> Result<BenchReport> {
    assert!(!joins.is_empty());
    let _lock = RepoLock::acquire(&cfg.repo_dir)?;
    let mut repo = Repository::open(&cfg.repo_dir)?;
    cfg.snapshot(&cfg.repo_dir)?;
    let ctx = load_context(&repo)?;
    let mut scans = ScanStats::default();
    let find = |id: &str| -> Result<&Dataset> {
        datasets
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| EngineError::UnknownDataset(id.to_string()))
    };

    let mut rows = Vec::new();
    for (l, r) in joins {
        let left = find(l)?;
        let right = find(r)?;
        let (baseline, _) = run_join(
            left,
            right,
            theta,
            PartitionerSource::Build,
            cfg,
            &mut scans,
        )?;
        let (online_res, trace) = online_inner(
            cfg,
            &mut repo,
            ctx.as_ref(),
            left,
            right,
            theta,
            false,
            &mut scans,
        )?;
        append_trace(&repo, &trace)?;
        let ratios = speedup_report(&baseline.stats, &online_res.stats);
        rows.push(BenchRow {
            left: l.clone(),
            right: r.clone(),
            decision: trace.decision.clone(),
            reuse_failed: trace.reuse_failed,
            results_equal: baseline.pairs == online_res.pairs,
            pair_count: online_res.pairs.len(),
            sim_max: trace.sim_max,
            matched_id: trace.matched_id.clone(),
            overall_ratio: ratios.overall,
            partitioning_ratio: ratios.partitioning,
            match_seconds: trace.match_seconds,
            decide_seconds: trace.decide_seconds,
        });
    }

    let reuse_n = rows.iter().filter(|r| r.decision == "reuse").count();
    let overall: Vec<f64> = rows.iter().map(|r| r.overall_ratio).collect();
    let partitioning: Vec<f64> = rows.iter().map(|r| r.partitioning_ratio).collect();
    let report = BenchReport {
        reuse_frequency: reuse_n as f64 / rows.len() as f64,
        overall: percentiles(&overall),
        partitioning: percentiles(&partitioning),
        rows,
    };

    fsutil::write_atomic(
        &repo.dir.join("bench_report.json"),
        serde_json::to_string_pretty(&report)
            .expect("report serializes")
            .as_bytes(),
    )?;
    let trace_rows: Vec<BenchTraceRow> = report
        .rows
        .iter()
        .map(|r| BenchTraceRow {
            left: r.left.clone(),
            right: r.right.clone(),
            decision: r.decision.clone(),
            reuse_failed: r.reuse_failed,
            results_equal: r.results_equal,
            pair_count: r.pair_count,
            sim_max: r.sim_max,
            matched_id: r.matched_id.clone(),
        })
        .collect();
    fsutil::write_atomic(
        &repo.dir.join("bench_trace.json"),
        serde_json::to_string_pretty(&trace_rows)
            .expect("trace serializes")
            .as_bytes(),
    )?;
    Ok(report)
}

#[derive(Debug)]
pub struct RetrainReport {
    pub train_report: TrainReport,
    pub n_samples: usize,
    pub forest_degenerate: bool,
}

/// Recomputes the ground truth over every stored dataset, retrains the
/// distance model, refits the forest from the offline samples plus logged
/// reuse failures, and swaps the checkpoints. Each checkpoint write is
/// atomic, so a failure anywhere leaves the previous artifacts loadable.
pub fn retrain(cfg: &EngineConfig) -> Result<RetrainReport> {
    let _lock = RepoLock::acquire(&cfg.repo_dir)?;
    let mut repo = Repository::open(&cfg.repo_dir)?;
    cfg.snapshot(&cfg.repo_dir)?;
    if repo.manifest.entries.is_empty() {
        return Err(EngineError::EmptyRepository);
    }
    if repo.manifest.entries.len() < 2 {
        return Err(EngineError::Config(
            "retrain needs at least 2 repository entries".into(),
        ));
    }
    let mut scans = ScanStats::default();

    let sources: Vec<(String, PathBuf)> = repo
        .manifest
        .entries
        .iter()
        .map(|e| (e.dataset_id.clone(), PathBuf::from(&e.data_path)))
        .collect();
    let matrix = histio::ground_truth_matrix(
        &sources,
        cfg.global_domain,
        cfg.histogram_resolution,
        Some(&repo.abs(GROUND_TRUTH_REL)),
        &mut scans,
    )?;
    let coord_scale = match load_context(&repo)? {
        Some(ctx) => ctx.coord_scale,
        None => cfg.coord_scale,
    };
    let embs: Vec<DatasetEmbedding> = repo
        .manifest
        .entries
        .iter()
        .map(|e| DatasetEmbedding {
            source_id: e.dataset_id.clone(),
            v: e.embedding,
        })
        .collect();
    let pairs = training_pairs(&embs, &matrix);
    let tc = TrainConfig {
        seed: cfg.seeds.train,
        ..TrainConfig::default()
    };
    let (model, train_report) = train(&pairs, &tc)?;

    // offline samples plus feedback from logged reuse failures
    let mut samples: Vec<DecisionSample> = Vec::new();
    let samples_path = repo.abs(SAMPLES_REL);
    if samples_path.exists() {
        let text = fsutil::read_to_string(&samples_path)?;
        let records: Vec<SampleRecord> = fsutil::parse_json(&samples_path, &text)?;
        samples.extend(records.into_iter().map(SampleRecord::into_sample));
    }
    let log_path = repo.dir.join(DECISION_LOG_REL);
    if log_path.exists() {
        let text = fsutil::read_to_string(&log_path)?;
        for line in text.lines() {
            let trace: DecisionTrace = fsutil::parse_json(&log_path, line)?;
            if let (true, Some(sim), Some(t2)) = (trace.reuse_failed, trace.sim_max, trace.t2) {
                samples.push(DecisionSample::new(sim, f64::INFINITY, t2));
            }
        }
    }
    let forest = fit_or_default(&samples, cfg.seeds.forest);

    checkpoint::save_model(&repo.abs(MODEL_REL), &model, coord_scale)?;
    checkpoint::save_forest(&repo.abs(FOREST_REL), &forest)?;
    fsutil::write_atomic(
        &repo.abs(TRAIN_REPORT_REL),
        serde_json::to_string_pretty(&train_report)
            .expect("report serializes")
            .as_bytes(),
    )?;
    repo.manifest.model_ref = Some(MODEL_REL.to_string());
    repo.manifest.forest_ref = Some(FOREST_REL.to_string());
    repo.save()?;
    repo.invalidate_features();

    Ok(RetrainReport {
        train_report,
        n_samples: samples.len(),
        forest_degenerate: forest.degenerate,
    })
}
