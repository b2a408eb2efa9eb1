//! Full-coverage quadtree partitioner.
//!
//! The tree always covers the whole configured domain (by default the
//! world extent of the projection), so any stored partitioner can route
//! any future point. Leaves are the partition blocks of the distributed
//! join; internal counts used during construction are discarded.
//!
//! Child order is NW, NE, SW, SE (path characters 0..3). Cells are
//! half-open `[min, max)` on both axes except the domain's max edges,
//! which are closed, so routing is total and unambiguous.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::geom::{Point, Rect};

/// A leaf rectangle of the quadtree, processed by one worker task.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionBlock {
    /// Path from the root over {0,1,2,3}; empty for a depth-0 tree.
    pub path: String,
    pub bbox: Rect,
    /// Dense 0-based id in path lexicographic (DFS) order.
    pub block_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { block_id: usize },
    Internal { children: [Box<Node>; 4] },
}

/// Quadrant bbox for child `idx` (0=NW, 1=NE, 2=SW, 3=SE).
fn quadrant(bbox: &Rect, idx: usize) -> Rect {
    let mid_x = 0.5 * (bbox.min_x + bbox.max_x);
    let mid_y = 0.5 * (bbox.min_y + bbox.max_y);
    match idx {
        0 => Rect::new(bbox.min_x, mid_y, mid_x, bbox.max_y),
        1 => Rect::new(mid_x, mid_y, bbox.max_x, bbox.max_y),
        2 => Rect::new(bbox.min_x, bbox.min_y, mid_x, mid_y),
        3 => Rect::new(mid_x, bbox.min_y, bbox.max_x, mid_y),
        _ => unreachable!(),
    }
}

/// Child index for a point under the half-open rule: west if `x < mid_x`,
/// south if `y < mid_y`.
fn child_of(bbox: &Rect, p: Point) -> usize {
    let mid_x = 0.5 * (bbox.min_x + bbox.max_x);
    let mid_y = 0.5 * (bbox.min_y + bbox.max_y);
    let east = p.x >= mid_x;
    let north = p.y >= mid_y;
    match (north, east) {
        (true, false) => 0,
        (true, true) => 1,
        (false, false) => 2,
        (false, true) => 3,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadtreePartitioner {
    pub id: String,
    pub domain: Rect,
    pub max_depth: u32,
    root: Node,
    leaves: Vec<PartitionBlock>,
}

enum BuildNode {
    Leaf(Vec<Point>),
    Internal([Box<BuildNode>; 4]),
}

impl BuildNode {
    fn insert(&mut self, bbox: Rect, depth: u32, capacity: usize, tree_depth: u32, p: Point) {
        match self {
            BuildNode::Leaf(points) => {
                points.push(p);
                if points.len() > capacity && depth < tree_depth {
                    let drained = core::mem::take(points);
                    let mut children = [
                        Box::new(BuildNode::Leaf(Vec::new())),
                        Box::new(BuildNode::Leaf(Vec::new())),
                        Box::new(BuildNode::Leaf(Vec::new())),
                        Box::new(BuildNode::Leaf(Vec::new())),
                    ];
                    for q in drained {
                        let idx = child_of(&bbox, q);
                        children[idx].insert(
                            quadrant(&bbox, idx),
                            depth + 1,
                            capacity,
                            tree_depth,
                            q,
                        );
                    }
                    *self = BuildNode::Internal(children);
                }
            }
            BuildNode::Internal(children) => {
                let idx = child_of(&bbox, p);
                children[idx].insert(quadrant(&bbox, idx), depth + 1, capacity, tree_depth, p);
            }
        }
    }

    fn freeze(self, path: String, bbox: Rect, leaves: &mut Vec<PartitionBlock>) -> Node {
        match self {
            BuildNode::Leaf(_) => {
                let block_id = leaves.len();
                leaves.push(PartitionBlock {
                    path,
                    bbox,
                    block_id,
                });
                Node::Leaf { block_id }
            }
            BuildNode::Internal(children) => {
                let mut it = children.into_iter();
                let frozen = core::array::from_fn(|i| {
                    let child = it.next().unwrap();
                    let mut p = path.clone();
                    p.push(char::from(b'0' + i as u8));
                    Box::new(child.freeze(p, quadrant(&bbox, i), leaves))
                });
                Node::Internal { children: frozen }
            }
        }
    }
}

impl QuadtreePartitioner {
    /// Builds the partitioner from a point sample.
    ///
    /// `treeDepth = max(rdd_partitions, user_max_depth)` and the node
    /// capacity is `max(1, ceil(|sample| / treeDepth))`. The sample is
    /// inserted in canonical `(x, y)` order so the result is invariant
    /// under input permutation. A leaf that exceeds the capacity below
    /// `treeDepth` splits into four quadrants and redistributes.
    pub fn build(
        id: &str,
        sample: &[Point],
        domain: Rect,
        rdd_partitions: u32,
        user_max_depth: u32,
    ) -> Result<Self, CoreError> {
        if sample.is_empty() {
            return Err(CoreError::EmptySample);
        }
        debug_assert!(rdd_partitions >= 1 && user_max_depth >= 1);
        let tree_depth = rdd_partitions.max(user_max_depth);
        let capacity = 1usize.max(sample.len().div_ceil(tree_depth as usize));

        let mut canonical: Vec<Point> = sample.to_vec();
        canonical.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());

        let mut root = BuildNode::Leaf(Vec::new());
        for &p in &canonical {
            root.insert(domain, 0, capacity, tree_depth, domain.clamp(p));
        }

        let mut leaves = Vec::new();
        let root = root.freeze(String::new(), domain, &mut leaves);
        Ok(QuadtreePartitioner {
            id: String::from(id),
            domain,
            max_depth: tree_depth,
            root,
            leaves,
        })
    }

    /// Reconstructs a partitioner from its leaf paths (disk form).
    ///
    /// Leaf bboxes are recomputed from the paths, so round-trips are
    /// bit-exact. Paths must form a complete 4-ary subdivision.
    pub fn from_leaf_paths(
        id: &str,
        domain: Rect,
        max_depth: u32,
        paths: &[String],
    ) -> Result<Self, CoreError> {
        if paths.is_empty() {
            return Err(CoreError::InvalidPartitioner("no leaves".into()));
        }
        let mut sorted: Vec<&String> = paths.iter().collect();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(CoreError::InvalidPartitioner(format!(
                    "duplicate leaf path {:?}",
                    w[0]
                )));
            }
        }
        let mut leaves = Vec::new();
        let root = Self::assemble(&sorted, String::new(), domain, max_depth, &mut leaves)?;
        Ok(QuadtreePartitioner {
            id: String::from(id),
            domain,
            max_depth,
            root,
            leaves,
        })
    }

    fn assemble(
        paths: &[&String],
        prefix: String,
        bbox: Rect,
        max_depth: u32,
        leaves: &mut Vec<PartitionBlock>,
    ) -> Result<Node, CoreError> {
        if paths.len() == 1 && *paths[0] == prefix {
            let block_id = leaves.len();
            leaves.push(PartitionBlock {
                path: prefix,
                bbox,
                block_id,
            });
            return Ok(Node::Leaf { block_id });
        }
        if prefix.len() as u32 >= max_depth {
            return Err(CoreError::InvalidPartitioner(format!(
                "subdivision below max_depth at {prefix:?}"
            )));
        }
        let mut groups: [Vec<&String>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for &p in paths {
            let Some(c) = p.as_bytes().get(prefix.len()) else {
                return Err(CoreError::InvalidPartitioner(format!(
                    "leaf {p:?} overlaps subtree {prefix:?}"
                )));
            };
            let idx = (c - b'0') as usize;
            if !p.starts_with(prefix.as_str()) || idx > 3 {
                return Err(CoreError::InvalidPartitioner(format!("bad path {p:?}")));
            }
            groups[idx].push(p);
        }
        if groups.iter().any(|g| g.is_empty()) {
            return Err(CoreError::InvalidPartitioner(format!(
                "incomplete subdivision under {prefix:?}"
            )));
        }
        let mut out: Vec<Node> = Vec::with_capacity(4);
        for (i, group) in groups.iter().enumerate() {
            let mut child_prefix = prefix.clone();
            child_prefix.push(char::from(b'0' + i as u8));
            out.push(Self::assemble(
                group,
                child_prefix,
                quadrant(&bbox, i),
                max_depth,
                leaves,
            )?);
        }
        let mut it = out.into_iter();
        Ok(Node::Internal {
            children: core::array::from_fn(|_| Box::new(it.next().unwrap())),
        })
    }

    pub fn leaves(&self) -> &[PartitionBlock] {
        &self.leaves
    }

    /// Routes a point to its unique block. Errors if the point lies
    /// outside the domain.
    pub fn route(&self, pt: Point) -> Result<usize, CoreError> {
        if !self.domain.contains(pt) {
            return Err(CoreError::OutOfDomain);
        }
        Ok(self.route_unchecked(pt))
    }

    /// Clamps the point onto the domain, then routes. Total on all inputs.
    pub fn route_clamped(&self, pt: Point) -> usize {
        self.route_unchecked(self.domain.clamp(pt))
    }

    fn route_unchecked(&self, pt: Point) -> usize {
        let mut node = &self.root;
        let mut bbox = self.domain;
        loop {
            match node {
                Node::Leaf { block_id } => return *block_id,
                Node::Internal { children } => {
                    let idx = child_of(&bbox, pt);
                    bbox = quadrant(&bbox, idx);
                    node = &children[idx];
                }
            }
        }
    }

    /// All blocks whose bbox lies within `theta` of the point; a superset
    /// of `{route(pt)}`. The point is clamped onto the domain first.
    pub fn route_expanded(&self, pt: Point, theta: f64) -> Vec<usize> {
        debug_assert!(theta >= 0.0);
        let pt = self.domain.clamp(pt);
        let mut out = Vec::new();
        self.collect_within(&self.root, self.domain, pt, theta, &mut out);
        out
    }

    fn collect_within(&self, node: &Node, bbox: Rect, pt: Point, theta: f64, out: &mut Vec<usize>) {
        if bbox.distance_to_point(pt) > theta {
            return;
        }
        match node {
            Node::Leaf { block_id } => out.push(*block_id),
            Node::Internal { children } => {
                for (i, child) in children.iter().enumerate() {
                    self.collect_within(child, quadrant(&bbox, i), pt, theta, out);
                }
            }
        }
    }
}
