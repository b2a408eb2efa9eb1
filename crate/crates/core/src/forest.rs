//! Random-forest classifier over the single similarity-score feature:
//! bootstrap bagging, Gini splits at midpoints of distinct values,
//! majority vote with ties resolved to "repartition".

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Outcome of the reuse decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Reuse,
    Repartition,
}

/// One labeled training instance from running a join both ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionSample {
    pub sim_max: f64,
    /// Runtime reusing the matched partitioner; +inf when reuse failed.
    pub t1: f64,
    /// Runtime building a partitioner from scratch.
    pub t2: f64,
    pub label: u8,
}

impl DecisionSample {
    /// label = 1 iff t1 < t2 (strict).
    pub fn new(sim_max: f64, t1: f64, t2: f64) -> Self {
        DecisionSample {
            sim_max,
            t1,
            t2,
            label: u8::from(t1 < t2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    /// Feature < threshold goes left, else right.
    Split {
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { class: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    fn predict(&self, x: f64) -> u8 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { class } => return *class,
                TreeNode::Split {
                    threshold,
                    left,
                    right,
                } => {
                    i = if x < *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionForest {
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub trees: Vec<Tree>,
    /// True when training saw a single class and the forest is a
    /// constant classifier.
    pub degenerate: bool,
}

fn gini(counts: [usize; 2]) -> f64 {
    let total = (counts[0] + counts[1]) as f64;
    if total == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / total;
    let p1 = counts[1] as f64 / total;
    1.0 - p0 * p0 - p1 * p1
}

fn majority(samples: &[(f64, u8)]) -> u8 {
    let ones = samples.iter().filter(|s| s.1 == 1).count();
    // tie at a leaf falls back to the conservative class
    u8::from(ones * 2 > samples.len())
}

fn grow(samples: &[(f64, u8)], depth: usize, max_depth: usize, nodes: &mut Vec<TreeNode>) -> usize {
    let ones = samples.iter().filter(|s| s.1 == 1).count();
    if depth >= max_depth || ones == 0 || ones == samples.len() || samples.len() < 2 {
        let id = nodes.len();
        nodes.push(TreeNode::Leaf {
            class: majority(samples),
        });
        return id;
    }

    let mut values: Vec<f64> = samples.iter().map(|s| s.0).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();

    let parent_impurity = gini([samples.len() - ones, ones]);
    let mut best: Option<(f64, f64)> = None; // (weighted gini, threshold)
    for w in values.windows(2) {
        let threshold = 0.5 * (w[0] + w[1]);
        let mut left = [0usize; 2];
        let mut right = [0usize; 2];
        for &(x, y) in samples {
            if x < threshold {
                left[y as usize] += 1;
            } else {
                right[y as usize] += 1;
            }
        }
        let n = samples.len() as f64;
        let weighted = (left[0] + left[1]) as f64 / n * gini(left)
            + (right[0] + right[1]) as f64 / n * gini(right);
        if best.is_none_or(|(b, _)| weighted < b) {
            best = Some((weighted, threshold));
        }
    }

    match best {
        Some((weighted, threshold)) if weighted < parent_impurity - 1e-12 => {
            let id = nodes.len();
            nodes.push(TreeNode::Leaf { class: 0 }); // placeholder
            let lhs: Vec<(f64, u8)> = samples.iter().copied().filter(|s| s.0 < threshold).collect();
            let rhs: Vec<(f64, u8)> =
                samples.iter().copied().filter(|s| s.0 >= threshold).collect();
            let left = grow(&lhs, depth + 1, max_depth, nodes);
            let right = grow(&rhs, depth + 1, max_depth, nodes);
            nodes[id] = TreeNode::Split {
                threshold,
                left,
                right,
            };
            id
        }
        _ => {
            let id = nodes.len();
            nodes.push(TreeNode::Leaf {
                class: majority(samples),
            });
            id
        }
    }
}

/// Fits a forest of `n_trees` depth-bounded trees on bootstrap resamples.
/// Single-class inputs yield a constant classifier flagged `degenerate`.
pub fn fit(samples: &[DecisionSample], n_trees: usize, max_depth: usize, seed: u64) -> DecisionForest {
    assert!(!samples.is_empty());
    let data: Vec<(f64, u8)> = samples.iter().map(|s| (s.sim_max, s.label)).collect();
    let classes: usize = {
        let ones = data.iter().filter(|s| s.1 == 1).count();
        usize::from(ones > 0) + usize::from(ones < data.len())
    };
    let degenerate = classes < 2;

    let mut trees = Vec::with_capacity(n_trees);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_trees {
        let boot: Vec<(f64, u8)> = (0..data.len())
            .map(|_| data[rng.random_range(0..data.len())])
            .collect();
        let mut nodes = Vec::new();
        grow(&boot, 0, max_depth, &mut nodes);
        trees.push(Tree { nodes });
    }
    DecisionForest {
        n_trees,
        max_depth,
        seed,
        trees,
        degenerate,
    }
}

impl DecisionForest {
    /// Majority vote; an exact tie repartitions.
    pub fn predict(&self, sim_max: f64) -> Decision {
        let reuse_votes = self.trees.iter().filter(|t| t.predict(sim_max) == 1).count();
        if reuse_votes * 2 > self.trees.len() {
            Decision::Reuse
        } else {
            Decision::Repartition
        }
    }
}
