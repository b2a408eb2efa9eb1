//! Acceptance suite: ten end-to-end criteria covering divergence math,
//! join correctness, matching, reuse accounting, desk-scale speed-ups,
//! gradient and model quality, the decision forest, determinism, and
//! lookup overhead. One pass/fail line is printed per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use rjoin::checkpoint;
use rjoin::config::{EngineConfig, Seeds};
use rjoin::dataset::{self, ScanStats};
use rjoin::engine::{run_join, speedup_report, JoinStats, PartitionerSource};
use rjoin::histio;
use rjoin::partfile;
use rjoin::pipeline::{self, percentiles};
use rjoin::repository::Repository;
use rjoin_core::embedding::{embed, DatasetEmbedding};
use rjoin_core::forest::{fit, Decision, DecisionForest, DecisionSample, Tree, TreeNode};
use rjoin_core::geom::{Point, Rect};
use rjoin_core::histogram::{jsd_parts, GridHistogram};
use rjoin_core::nn::{train, SiameseModel, TrainConfig};
use rjoin_core::sweep::nested_loop_join;
use rjoin_core::QuadtreePartitioner;

type CheckResult = Result<(), String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

/// Criterion 1: the worked divergence example. Count vectors [12,3,4,4]
/// and [5,2,3,1] must reproduce the commonly quoted rounded values (which
/// are natural-log: KLD terms 0.0152 / 0.0156, divergence 0.0154) within
/// 1e-3, via the exact identity KLD_e = KLD_2 * ln 2, in under 1 ms.
fn c01_divergence_golden() -> CheckResult {
    let quadrants = |counts: [u64; 4]| {
        let mut h = GridHistogram::new(Rect::new(0.0, 0.0, 2.0, 2.0), 2);
        let cells = [(0.5, 0.5), (1.5, 0.5), (0.5, 1.5), (1.5, 1.5)];
        for (i, &(x, y)) in cells.iter().enumerate() {
            for _ in 0..counts[i] {
                h.add(Point::new(x, y));
            }
        }
        h.normalize().unwrap()
    };
    let p = quadrants([12, 3, 4, 4]);
    let q = quadrants([5, 2, 3, 1]);
    let _ = jsd_parts(&p, &q).unwrap(); // warm-up
    let t = Instant::now();
    let (k1, k2, d) = jsd_parts(&p, &q).unwrap();
    let elapsed = t.elapsed();
    let ln2 = std::f64::consts::LN_2;
    for (got, want, name) in [
        (k1 * ln2, 0.0152, "first divergence term"),
        (k2 * ln2, 0.0156, "second divergence term"),
        (d * ln2, 0.0154, "symmetric divergence"),
    ] {
        check!((got - want).abs() < 1e-3, "{name}: got {got}, want {want}");
    }
    check!(
        elapsed < Duration::from_millis(1),
        "divergence took {elapsed:?}, budget 1 ms"
    );
    Ok(())
}

/// Criterion 2: >= 200 randomized (R, S, theta, depth, workers) instances,
/// each executed with a fresh, a disk-round-tripped, and a deliberately
/// mismatched partitioner, must all equal the nested-loop oracle exactly.
/// Budget 5 minutes.
fn c02_join_oracle() -> CheckResult {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let domain = Rect::new(0.0, 0.0, 100.0, 100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let rand_pts = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Point> {
        (0..n)
            .map(|_| Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
            .collect()
    };
    let mut instances = 0u32;
    for case in 0..200u64 {
        // mostly small instances, with periodic large ones up to 5k
        let (nr, ns) = if case % 25 == 0 {
            (
                rng.random_range(2500..=5000),
                rng.random_range(2500..=5000),
            )
        } else {
            (rng.random_range(20..=800), rng.random_range(20..=800))
        };
        let r = rand_pts(&mut rng, nr);
        let s = rand_pts(&mut rng, ns);
        let theta = rng.random_range(0.0..12.0);
        let depth = rng.random_range(1..=5u32);
        let workers = rng.random_range(1..=4usize);

        let mut expected = nested_loop_join(&r, &s, theta);
        expected.sort_unstable();

        let fresh = QuadtreePartitioner::build("fresh", &r, domain, depth, depth)
            .map_err(|e| format!("case {case}: build failed: {e:?}"))?;
        let path = dir.path().join("p.json");
        partfile::save_partitioner(&path, &fresh).map_err(|e| format!("save: {e}"))?;
        let reloaded = partfile::load_partitioner(&path).map_err(|e| format!("load: {e}"))?;
        let far: Vec<Point> = (0..50)
            .map(|_| Point::new(rng.random_range(95.0..100.0), rng.random_range(0.0..5.0)))
            .collect();
        let mismatched =
            QuadtreePartitioner::build("far", &far, domain, depth, depth).unwrap();

        for (kind, p) in [
            ("fresh", &fresh),
            ("reloaded", &reloaded),
            ("mismatched", &mismatched),
        ] {
            let mut stats = JoinStats::default();
            let got =
                rjoin::engine::execute(&r, &s, p, theta, workers, 50_000_000, &mut stats)
                    .map_err(|e| format!("case {case} ({kind}): {e}"))?;
            check!(
                got == expected,
                "case {case} ({kind}, |R|={nr}, |S|={ns}, theta={theta:.2}): \
                 {} pairs vs oracle {}",
                got.len(),
                expected.len()
            );
            instances += 1;
        }
    }
    check!(instances >= 200, "only {instances} instances ran");
    check!(
        start.elapsed() < Duration::from_secs(300),
        "suite took {:?}, budget 5 min",
        start.elapsed()
    );
    Ok(())
}

/// Criterion 3: every dataset already in the repository is matched to
/// itself with similarity exactly 1.0, and a 20-join repeated workload is
/// identified as repeated 100% of the time, each join reusing the stored
/// partitioner. (The forest is fit on threshold-separable samples so the
/// reuse decision does not hinge on wall-clock noise; the criterion's
/// subject is the matcher.)
fn c03_identity_matching() -> CheckResult {
    let dir = tempfile::tempdir().unwrap();
    let cfg = test_cfg(dir.path());
    let mut datasets = Vec::new();
    let mut joins = Vec::new();
    for i in 0..5 {
        let cx = 100.0 + 180.0 * i as f64;
        let l = write_dataset(
            &cfg,
            &format!("l{i}"),
            &cluster_points(300 + i, 800, cx, 300.0, 50.0),
        );
        let r = write_dataset(
            &cfg,
            &format!("r{i}"),
            &cluster_points(400 + i, 700, cx, 700.0, 50.0),
        );
        joins.push((l.id.clone(), r.id.clone()));
        datasets.push(l);
        datasets.push(r);
    }
    pipeline::offline(&cfg, &datasets, &joins, 3.0).map_err(|e| format!("offline: {e}"))?;
    let repo = Repository::open(&cfg.repo_dir).unwrap();
    check!(
        repo.manifest.entries.len() == 5,
        "expected 5 stored partitioners, found {}",
        repo.manifest.entries.len()
    );
    checkpoint::save_forest(&repo.abs(pipeline::FOREST_REL), &decisive_forest(0.7, 7)).unwrap();

    let mut matched = 0;
    for k in 0..20 {
        let left = &datasets[2 * (k % 5)];
        let right = &datasets[2 * ((k + 1) % 5) + 1];
        let (result, trace) =
            pipeline::online(&cfg, left, right, 3.0, false).map_err(|e| format!("online: {e}"))?;
        check!(
            trace.sim_max == Some(1.0),
            "join {k}: sim_max {:?}, want exactly 1.0",
            trace.sim_max
        );
        check!(
            trace.matched_id.as_deref() == Some(left.id.as_str()),
            "join {k}: matched {:?}, want {}",
            trace.matched_id,
            left.id
        );
        check!(
            trace.decision == "reuse" && result.stats.reused_partitioner,
            "join {k}: decision {}",
            trace.decision
        );
        matched += 1;
    }
    check!(matched == 20, "matching frequency {}/20", matched);
    Ok(())
}

/// Criterion 4: reuse does zero construction work, by counters rather than
/// wall-clock. The reuse path must show sample_scan = partitioner_build =
/// 0 s and 0 construction passes over R; the repartition path >= 1.
fn c04_reuse_counters() -> CheckResult {
    let dir = tempfile::tempdir().unwrap();
    let cfg = test_cfg(dir.path());
    let a = write_dataset(&cfg, "a", &cluster_points(61, 3000, 400.0, 400.0, 120.0));
    let b = write_dataset(&cfg, "b", &cluster_points(62, 2500, 450.0, 420.0, 110.0));
    let mut scans = ScanStats::default();

    let (fresh, p) = run_join(&a, &b, 2.0, PartitionerSource::Build, &cfg, &mut scans)
        .map_err(|e| format!("build join: {e}"))?;
    check!(
        fresh.stats.construction_passes_r >= 1,
        "repartition path shows {} construction passes",
        fresh.stats.construction_passes_r
    );
    let path = dir.path().join("a.partitioner.json");
    partfile::save_partitioner(&path, &p).unwrap();

    let before = scans.passes(&a.path);
    let (reused, _) = run_join(
        &a,
        &b,
        2.0,
        PartitionerSource::Reuse {
            path: &path,
            matched_dataset_id: "a".to_string(),
        },
        &cfg,
        &mut scans,
    )
    .map_err(|e| format!("reuse join: {e}"))?;
    check!(
        reused.stats.sample_scan == 0.0,
        "reuse sample_scan = {}",
        reused.stats.sample_scan
    );
    check!(
        reused.stats.partitioner_build == 0.0,
        "reuse partitioner_build = {}",
        reused.stats.partitioner_build
    );
    check!(
        reused.stats.construction_passes_r == 0,
        "reuse construction passes = {}",
        reused.stats.construction_passes_r
    );
    // the only pass over R on reuse is the routing read
    check!(
        scans.passes(&a.path) == before + 1,
        "reuse made {} passes over R, want 1",
        scans.passes(&a.path) - before
    );
    check!(reused.pairs == fresh.pairs, "reuse changed the result");
    Ok(())
}

fn write_big_csv(path: &Path, seed: u64, style: u8) {
    use std::io::Write as _;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let file = std::fs::File::create(path).unwrap();
    let mut w = std::io::BufWriter::new(file);
    let centers = [(200.0, 300.0), (700.0, 200.0), (350.0, 800.0), (820.0, 750.0)];
    for _ in 0..1_000_000u32 {
        let (x, y): (f64, f64) = match style {
            0 => (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)),
            1 => {
                let (cx, cy) = centers[rng.random_range(0..4usize)];
                (
                    (cx + rng.random_range(-120.0..120.0_f64)).clamp(0.0, 1000.0),
                    (cy + rng.random_range(-120.0..120.0_f64)).clamp(0.0, 1000.0),
                )
            }
            _ => (
                rng.random_range(0.0..1000.0),
                (500.0 + rng.random_range(-150.0..150.0_f64).powi(3) / 22500.0)
                    .clamp(0.0, 1000.0),
            ),
        };
        writeln!(w, "{x},{y}").unwrap();
    }
    w.flush().unwrap();
}

/// Criterion 5: desk-scale benchmark. 10 joins over 1M-point datasets;
/// median partitioning-phase ratio (repartition / reuse) >= 1.5 and median
/// overall ratio >= 1.0, within 15 minutes. The partitioner is built from
/// the full input (sample_cap = 1M), the regime where repartitioning is
/// genuinely expensive.
fn c05_desk_scale_speedup() -> CheckResult {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = EngineConfig {
        global_domain: Rect::new(0.0, 0.0, 1000.0, 1000.0),
        histogram_resolution: 64,
        coord_scale: 1000.0,
        workers: 4,
        user_max_depth: 8,
        sample_cap: 1_000_000,
        capacity_cap: 5_000_000,
        seeds: Seeds {
            ingest: 1,
            train: 2,
            forest: 3,
            workload: 4,
        },
        repo_dir: dir.path().join("repo"),
        data_dir: dir.path().join("data"),
    };
    std::fs::create_dir_all(&cfg.data_dir).unwrap();
    std::fs::create_dir_all(&cfg.repo_dir).unwrap();

    let mut scans = ScanStats::default();
    let mut sets = Vec::new();
    for (i, id) in ["u", "c", "s"].iter().enumerate() {
        let path = cfg.data_dir.join(format!("{id}.csv"));
        write_big_csv(&path, 500 + i as u64, i as u8);
        sets.push(
            dataset::ingest(&path, id, cfg.sample_cap, cfg.seeds.ingest, &mut scans)
                .map_err(|e| format!("ingest {id}: {e}"))?,
        );
    }

    let joins = [
        (0, 1),
        (1, 2),
        (2, 0),
        (0, 2),
        (1, 0),
        (2, 1),
        (0, 1),
        (1, 2),
        (2, 0),
        (0, 1),
    ];
    let mut overall = Vec::new();
    let mut partitioning = Vec::new();
    for (k, &(li, ri)) in joins.iter().enumerate() {
        let left = &sets[li];
        let right = &sets[ri];
        let (fresh, p) = run_join(left, right, 0.2, PartitionerSource::Build, &cfg, &mut scans)
            .map_err(|e| format!("join {k} build: {e}"))?;
        let ppath = cfg.repo_dir.join(format!("{}.json", left.id));
        if !ppath.exists() {
            partfile::save_partitioner(&ppath, &p).unwrap();
        }
        let (reused, _) = run_join(
            left,
            right,
            0.2,
            PartitionerSource::Reuse {
                path: &ppath,
                matched_dataset_id: left.id.clone(),
            },
            &cfg,
            &mut scans,
        )
        .map_err(|e| format!("join {k} reuse: {e}"))?;
        check!(reused.pairs == fresh.pairs, "join {k}: results diverge");
        let ratio = speedup_report(&fresh.stats, &reused.stats);
        overall.push(ratio.overall);
        partitioning.push(ratio.partitioning);
    }
    let po = percentiles(&overall);
    let pp = percentiles(&partitioning);
    println!(
        "    partitioning ratios: median {:.2} (best {:.2}, worst {:.2}); \
         overall: median {:.2} (best {:.2}, worst {:.2})",
        pp.median, pp.best, pp.worst, po.median, po.best, po.worst
    );
    check!(
        pp.median >= 1.5,
        "median partitioning ratio {:.3} < 1.5",
        pp.median
    );
    check!(po.median >= 1.0, "median overall ratio {:.3} < 1.0", po.median);
    check!(
        start.elapsed() < Duration::from_secs(900),
        "benchmark took {:?}, budget 15 min",
        start.elapsed()
    );
    Ok(())
}

/// Criterion 6: analytic gradients against central finite differences at
/// h = 1e-5 for every parameter, on 10 random (model, pair) draws; max
/// relative error <= 1e-4. Parameters whose difference quotient is
/// unstable between h and 2h (a rectifier kink inside the stencil) are
/// skipped; they must stay below 0.5% of all parameters.
fn c06_gradient_check() -> CheckResult {
    let h = 1e-5;
    let mut max_rel: f64 = 0.0;
    let mut skipped = 0usize;
    let mut checked = 0usize;
    for draw in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + draw);
        let model = SiameseModel::new(1000 + draw);
        let mut vec9 = || {
            let mut v = [0.0f64; 9];
            for x in v.iter_mut() {
                *x = rng.random_range(0.0..1.0);
            }
            v[0] = rng.random_range(0.0..9.0);
            v[1] = rng.random_range(0.0..9.0);
            v
        };
        let a = vec9();
        let b = vec9();
        let target = rng.random_range(0.0..1.0);

        let mut grads = model.zero_grads();
        model.accumulate_pair_grads(&a, &b, target, 1.0, &mut grads);

        let loss_of = |m: &SiameseModel| {
            let ea = DatasetEmbedding {
                source_id: "a".into(),
                v: a,
            };
            let eb = DatasetEmbedding {
                source_id: "b".into(),
                v: b,
            };
            m.loss(&ea, &eb, target)
        };

        let mut m = model.clone();
        for li in 0..m.layers.len() {
            let nw = m.layers[li].w.len();
            let nb = m.layers[li].b.len();
            for slot in 0..nw + nb {
                let read = |m: &SiameseModel| {
                    if slot < nw {
                        m.layers[li].w[slot]
                    } else {
                        m.layers[li].b[slot - nw]
                    }
                };
                let write = |m: &mut SiameseModel, v: f64| {
                    if slot < nw {
                        m.layers[li].w[slot] = v;
                    } else {
                        m.layers[li].b[slot - nw] = v;
                    }
                };
                let orig = read(&m);
                let mut central = |step: f64| {
                    write(&mut m, orig + step);
                    let plus = loss_of(&m);
                    write(&mut m, orig - step);
                    let minus = loss_of(&m);
                    write(&mut m, orig);
                    (plus - minus) / (2.0 * step)
                };
                let numeric = central(h);
                let numeric2 = central(2.0 * h);
                let analytic = if slot < nw {
                    grads[li].w[slot]
                } else {
                    grads[li].b[slot - nw]
                };
                if (numeric - numeric2).abs() > 1e-6 * numeric.abs().max(1.0) {
                    skipped += 1;
                    continue;
                }
                checked += 1;
                let denom = analytic.abs().max(numeric.abs());
                if denom > 1e-6 {
                    max_rel = max_rel.max((analytic - numeric).abs() / denom);
                } else {
                    // below the finite-difference noise floor relative
                    // error is meaningless; bound the absolute gap
                    check!(
                        (analytic - numeric).abs() <= 1e-8,
                        "tiny gradient gap {:.3e}",
                        (analytic - numeric).abs()
                    );
                }
            }
        }
    }
    check!(
        max_rel <= 1e-4,
        "max relative gradient error {max_rel:.3e} > 1e-4"
    );
    check!(
        (skipped as f64) < 0.005 * (checked + skipped) as f64,
        "{skipped} of {} parameters skipped as kink-unstable",
        checked + skipped
    );
    Ok(())
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

/// Criterion 7: on 12 synthetic datasets forming 3 spatial clusters, the
/// trained model's predicted distances reach Spearman rank correlation
/// >= 0.6 against ground-truth divergence over all 66 pairs, and the mean
/// within-cluster predicted distance is below the across-cluster mean.
/// Budget 5 minutes.
fn c07_similarity_quality() -> CheckResult {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = test_cfg(dir.path());
    let centers = [(150.0, 150.0), (500.0, 820.0), (850.0, 250.0)];
    let mut datasets = Vec::new();
    let mut cluster_of = Vec::new();
    for (c, &(cx, cy)) in centers.iter().enumerate() {
        for k in 0..4 {
            let id = format!("c{c}k{k}");
            let n = 2000 + 700 * k;
            let spread = 60.0 + 20.0 * k as f64;
            let jx = (k as f64 - 1.5) * 12.0;
            let d = write_dataset(
                &cfg,
                &id,
                &cluster_points(700 + (c * 4 + k) as u64, n, cx + jx, cy - jx, spread),
            );
            datasets.push(d);
            cluster_of.push(c);
        }
    }
    let sources: Vec<(String, std::path::PathBuf)> = datasets
        .iter()
        .map(|d| (d.id.clone(), d.path.clone()))
        .collect();
    let mut scans = ScanStats::default();
    let matrix = histio::ground_truth_matrix(
        &sources,
        cfg.global_domain,
        cfg.histogram_resolution,
        None,
        &mut scans,
    )
    .map_err(|e| format!("ground truth: {e}"))?;
    let embs: Vec<DatasetEmbedding> = datasets
        .iter()
        .map(|d| embed(&d.id, &d.metadata, cfg.coord_scale))
        .collect();
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
    let tc = TrainConfig {
        seed: cfg.seeds.train,
        ..TrainConfig::default()
    };
    let (model, report) = train(&pairs, &tc).map_err(|e| format!("training: {e:?}"))?;

    let mut truth = Vec::new();
    let mut predicted = Vec::new();
    let (mut within, mut across) = (Vec::new(), Vec::new());
    for i in 0..12 {
        for j in i + 1..12 {
            let d = model.predict_distance(&embs[i], &embs[j]);
            truth.push(matrix[i][j]);
            predicted.push(d);
            if cluster_of[i] == cluster_of[j] {
                within.push(d);
            } else {
                across.push(d);
            }
        }
    }
    let rho = spearman(&predicted, &truth);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "    spearman {:.3} over 66 pairs, within {:.3} vs across {:.3}, val mse {:.5}",
        rho,
        mean(&within),
        mean(&across),
        report.final_val_mse
    );
    check!(truth.len() == 66, "expected 66 pairs, got {}", truth.len());
    check!(rho >= 0.6, "spearman {rho:.3} < 0.6");
    check!(
        mean(&within) < mean(&across),
        "within-cluster mean {:.3} not below across-cluster {:.3}",
        mean(&within),
        mean(&across)
    );
    check!(
        start.elapsed() < Duration::from_secs(300),
        "training took {:?}, budget 5 min",
        start.elapsed()
    );
    Ok(())
}

/// Criterion 8: decision forest sanity. Threshold-separable labels train
/// to >= 95% accuracy; the prediction sweep over sim in {0, 0.01, ..., 1}
/// is a non-decreasing step function; an exact vote tie repartitions.
fn c08_forest_sanity() -> CheckResult {
    let samples: Vec<DecisionSample> = (0..200)
        .map(|i| {
            let sim = i as f64 / 199.0;
            let (t1, t2) = if sim > 0.55 { (1.0, 2.0) } else { (2.0, 1.0) };
            DecisionSample::new(sim, t1, t2)
        })
        .collect();
    let forest = fit(&samples, 100, 5, 8);
    let correct = samples
        .iter()
        .filter(|s| {
            let want = if s.label == 1 {
                Decision::Reuse
            } else {
                Decision::Repartition
            };
            forest.predict(s.sim_max) == want
        })
        .count();
    check!(
        correct as f64 >= 0.95 * samples.len() as f64,
        "training accuracy {}/{}",
        correct,
        samples.len()
    );

    let mut seen_reuse = false;
    for i in 0..=100 {
        let sim = i as f64 / 100.0;
        match forest.predict(sim) {
            Decision::Reuse => seen_reuse = true,
            Decision::Repartition => {
                check!(!seen_reuse, "sweep decreased back to repartition at sim {sim}");
            }
        }
    }
    check!(seen_reuse, "sweep never switched to reuse");

    let tied = DecisionForest {
        n_trees: 100,
        max_depth: 1,
        seed: 0,
        trees: (0..100)
            .map(|i| Tree {
                nodes: vec![TreeNode::Leaf {
                    class: (i % 2) as u8,
                }],
            })
            .collect(),
        degenerate: false,
    };
    check!(
        tied.predict(0.9) == Decision::Repartition,
        "vote tie did not repartition"
    );
    Ok(())
}

fn cli_flow(root: &Path) -> CheckResult {
    let config = "domain = 0,0,1000,1000\nhistogram_resolution = 64\ncoord_scale = 1000\n\
                  workers = 2\nuser_max_depth = 6\nsample_cap = 2000\n";
    std::fs::write(root.join("config.txt"), config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    for (name, cx, cy) in [("a.csv", 250.0, 250.0), ("b.csv", 700.0, 650.0)] {
        let mut s = String::new();
        for _ in 0..1500 {
            let x: f64 = cx + rng.random_range(-90.0..90.0);
            let y: f64 = cy + rng.random_range(-90.0..90.0);
            s.push_str(&format!("{x},{y}\n"));
        }
        std::fs::write(root.join(name), s).unwrap();
    }
    let steps: Vec<Vec<&str>> = vec![
        vec!["ingest", "--config", "config.txt", "--path", "a.csv", "--id", "a"],
        vec!["ingest", "--config", "config.txt", "--path", "b.csv", "--id", "b"],
        vec!["offline", "--config", "config.txt", "--datasets", "a,b", "--theta", "3"],
        vec![
            "join", "--config", "config.txt", "--left", "a", "--right", "b", "--theta", "3",
            "--out", "out.csv",
        ],
        vec!["bench", "--config", "config.txt", "--datasets", "a,b", "--theta", "3"],
    ];
    for args in steps {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_rjoin"))
            .current_dir(root)
            .args(&args)
            .output()
            .unwrap();
        check!(
            out.status.success(),
            "{:?} failed: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
    }
    Ok(())
}

/// Criterion 9: identical seeds reproduce byte-identical partitioner
/// files, checkpoints, manifest, and deterministic bench JSON across two
/// independent runs; save/load round-trips preserve predictions to 1e-12
/// and partitioner structure exactly.
fn c09_determinism_persistence() -> CheckResult {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    cli_flow(dir1.path())?;
    cli_flow(dir2.path())?;
    for rel in [
        "repo/manifest.json",
        "repo/models/siamese.json",
        "repo/models/forest.json",
        "repo/partitioners/a.json",
        "repo/bench_trace.json",
        "out.csv",
    ] {
        let x = std::fs::read(dir1.path().join(rel)).unwrap();
        let y = std::fs::read(dir2.path().join(rel)).unwrap();
        check!(x == y, "{rel} differs between same-seed runs");
    }

    // model round-trip: predictions preserved to 1e-12
    let model = SiameseModel::new(99);
    let mpath = dir1.path().join("rt_model.json");
    checkpoint::save_model(&mpath, &model, 1000.0).unwrap();
    let (back, scale) = checkpoint::load_model(&mpath).unwrap();
    check!(scale == 1000.0, "coord scale changed in round-trip");
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    for _ in 0..20 {
        let mut v1 = [0.0f64; 9];
        let mut v2 = [0.0f64; 9];
        for x in v1.iter_mut().chain(v2.iter_mut()) {
            *x = rng.random_range(0.0..5.0);
        }
        let e1 = DatasetEmbedding {
            source_id: "x".into(),
            v: v1,
        };
        let e2 = DatasetEmbedding {
            source_id: "y".into(),
            v: v2,
        };
        let d0 = model.predict_distance(&e1, &e2);
        let d1 = back.predict_distance(&e1, &e2);
        check!(
            (d0 - d1).abs() <= 1e-12,
            "round-trip drifted: {d0} vs {d1}"
        );
    }

    // partitioner round-trip: identical leaf structure
    let pts = cluster_points(91, 3000, 300.0, 600.0, 140.0);
    let p = QuadtreePartitioner::build("rt", &pts, DOMAIN, 4, 6).unwrap();
    let ppath = dir1.path().join("rt_part.json");
    partfile::save_partitioner(&ppath, &p).unwrap();
    let q = partfile::load_partitioner(&ppath).unwrap();
    check!(
        p.leaves() == q.leaves(),
        "partitioner structure changed in round-trip"
    );
    Ok(())
}

/// Criterion 10: best_match plus the forest decision over a 100-entry
/// repository completes in <= 50 ms median.
fn c10_lookup_overhead() -> CheckResult {
    let dir = tempfile::tempdir().unwrap();
    let cfg = test_cfg(dir.path());
    let mut repo = Repository::open(&cfg.repo_dir).unwrap();
    let pts = cluster_points(100, 500, 500.0, 500.0, 100.0);
    let p = QuadtreePartitioner::build("shared", &pts, DOMAIN, 2, 4).unwrap();
    partfile::save_partitioner(&repo.abs("partitioners/shared.json"), &p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut rand_emb = |id: &str| {
        let mut v = [0.0f64; 9];
        for x in v.iter_mut() {
            *x = rng.random_range(0.0..1.0);
        }
        v[0] = rng.random_range(4.0..10.0);
        DatasetEmbedding {
            source_id: id.to_string(),
            v,
        }
    };
    for i in 0..100 {
        let id = format!("e{i:03}");
        let e = rand_emb(&id);
        repo.add(&id, &e, "partitioners/shared.json", "unused.csv")
            .map_err(|e| format!("add: {e}"))?;
    }
    let model = SiameseModel::new(10);
    let forest = decisive_forest(0.5, 11);

    let mut times = Vec::new();
    for _ in 0..21 {
        let r = rand_emb("qr");
        let s = rand_emb("qs");
        let t = Instant::now();
        let (sim, idx) = repo
            .best_match(&r, &s, &model)
            .map_err(|e| format!("best_match: {e}"))?;
        let _ = forest.predict(sim);
        times.push(t.elapsed().as_secs_f64() * 1000.0);
        check!(idx < 100, "index out of range");
    }
    let median = percentiles(&times).median;
    println!("    lookup median {median:.3} ms over a 100-entry repository");
    check!(median <= 50.0, "median lookup {median:.3} ms > 50 ms");
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> CheckResult)> = vec![
        ("01 divergence golden values", c01_divergence_golden),
        ("02 join-correctness oracle", c02_join_oracle),
        ("03 identity matching", c03_identity_matching),
        ("04 reuse construction counters", c04_reuse_counters),
        ("05 desk-scale speed-up", c05_desk_scale_speedup),
        ("06 gradient correctness", c06_gradient_check),
        ("07 similarity learning quality", c07_similarity_quality),
        ("08 decision-forest sanity", c08_forest_sanity),
        ("09 determinism and persistence", c09_determinism_persistence),
        ("10 lookup overhead", c10_lookup_overhead),
    ];
    let mut failures = Vec::new();
    for (name, run) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(()) => println!("criterion {name}: PASS ({:.1}s)", t.elapsed().as_secs_f64()),
            Err(msg) => {
                println!("criterion {name}: FAIL ({msg})");
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
