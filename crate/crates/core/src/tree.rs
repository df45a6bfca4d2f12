//! Balanced binary partition trees.
//!
//! Each node either becomes a leaf or splits its points in half. A node
//! whose heuristic diameter is large relative to its average diameter (it
//! "has outliers") is split by a sphere around its mean; every other node is
//! split by the hyperplane through the median projection onto the direction
//! chosen by the configured [`SplitRule`].
//!
//! Medians are taken under the total order `(key, point index)`: the left
//! child receives the first `ceil(n/2)` points of that order, so splits stay
//! balanced even when many keys tie. The node stores the threshold key and
//! the index of the last point sent left (`tie_index`), which lets training
//! points be routed exactly as they were partitioned. Arbitrary points are
//! routed with plain `key <= threshold`.
//!
//! Node ids follow heap numbering (root 1, children `2i` and `2i + 1`). Each
//! node's random stream is derived from `(master_seed, id)`, and the tree is
//! grown level by level, so the result does not depend on scheduling.

use alloc::vec::Vec;

use crate::geometry::{Dataset, DiameterStats, PointSubset};
use crate::linalg::{dist_sq, dot};
use crate::rng::RngStream;
use crate::split::SplitRule;
use crate::{Error, Result};

pub const DEFAULT_OUTLIER_C: f64 = 10.0;
pub const DEFAULT_MIN_LEAF_SIZE: usize = 1;
/// Heap-numbered ids of deeper nodes would not fit in a `u64`.
pub const MAX_DEPTH: u32 = 62;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub rule: SplitRule,
    pub max_depth: u32,
    pub min_leaf_size: usize,
    /// Outlier constant `c`: a node has outliers when `D^2(S) > c * Δa^2(S)`.
    pub outlier_c: f64,
    pub master_seed: u64,
}

impl TreeConfig {
    pub fn new(rule: SplitRule, max_depth: u32, master_seed: u64) -> Self {
        TreeConfig {
            rule,
            max_depth,
            min_leaf_size: DEFAULT_MIN_LEAF_SIZE,
            outlier_c: DEFAULT_OUTLIER_C,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rule.validate()?;
        if self.max_depth > MAX_DEPTH {
            return Err(Error::InvalidConfig("max_depth must be at most 62"));
        }
        if self.min_leaf_size == 0 {
            return Err(Error::InvalidConfig("min_leaf_size must be at least 1"));
        }
        if !(self.outlier_c > 0.0 && self.outlier_c.is_finite()) {
            return Err(Error::InvalidConfig("outlier constant must be positive"));
        }
        Ok(())
    }
}

/// A stored split predicate.
#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    /// Left iff `x . normal <= threshold`.
    Hyperplane { normal: Vec<f64>, threshold: f64, tie_index: usize },
    /// Left iff `||x - center||^2 <= radius_sq`.
    Sphere { center: Vec<f64>, radius_sq: f64, tie_index: usize },
}

impl Split {
    /// The scalar the split thresholds on. `-0.0` is folded into `+0.0` so
    /// that the build-time ordering and routing comparisons agree.
    #[inline]
    pub fn key(&self, x: &[f64]) -> f64 {
        match self {
            Split::Hyperplane { normal, .. } => dot(x, normal) + 0.0,
            Split::Sphere { center, .. } => dist_sq(x, center) + 0.0,
        }
    }

    pub fn threshold(&self) -> f64 {
        match *self {
            Split::Hyperplane { threshold, .. } => threshold,
            Split::Sphere { radius_sq, .. } => radius_sq,
        }
    }

    pub fn tie_index(&self) -> usize {
        match *self {
            Split::Hyperplane { tie_index, .. } | Split::Sphere { tie_index, .. } => tie_index,
        }
    }

    #[inline]
    pub fn goes_left(&self, x: &[f64]) -> bool {
        self.key(x) <= self.threshold()
    }

    /// Routing for the training point with the given index.
    #[inline]
    pub fn goes_left_training(&self, x: &[f64], index: usize) -> bool {
        let k = self.key(x);
        let t = self.threshold();
        k < t || (k == t && index <= self.tie_index())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    /// `children` are positions in [`PartitionTree::nodes`].
    Internal { split: Split, children: [usize; 2] },
    /// Sorted point indices. `degenerate` marks a node that could not be
    /// split because its points coincide.
    Leaf { indices: Vec<usize>, degenerate: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: u64,
    pub depth: u32,
    pub kind: NodeKind,
    /// Start vector of the power steps, for hyperplane splits.
    pub start_vector: Option<Vec<f64>>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn split(&self) -> Option<&Split> {
        match &self.kind {
            NodeKind::Internal { split, .. } => Some(split),
            NodeKind::Leaf { .. } => None,
        }
    }

    pub fn children(&self) -> Option<[usize; 2]> {
        match self.kind {
            NodeKind::Internal { children, .. } => Some(children),
            NodeKind::Leaf { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTree {
    config: TreeConfig,
    dim: usize,
    n_points: usize,
    /// Breadth-first (id-sorted); `nodes[0]` is the root.
    nodes: Vec<TreeNode>,
}

/// `D^2(S) > c * Δa^2(S)`; never true for a set of identical points.
pub fn has_outliers(stats: &DiameterStats, c: f64) -> bool {
    stats.avg_diameter_sq > 0.0 && stats.heuristic_diameter_sq > c * stats.avg_diameter_sq
}

/// Result of [`split_node`].
#[derive(Debug, Clone, PartialEq)]
pub enum SplitOutcome {
    Split {
        split: Split,
        left: Vec<usize>,
        right: Vec<usize>,
        start_vector: Option<Vec<f64>>,
    },
    /// The node cannot be split (all points coincide or the splitting
    /// direction degenerated).
    Leaf,
}

/// One step of the tree construction for the points of `s`.
pub fn split_node(s: &PointSubset<'_>, cfg: &TreeConfig, node_id: u64) -> Result<SplitOutcome> {
    if s.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, actual: s.len() });
    }
    let stats = DiameterStats::compute(s);
    if stats.is_degenerate() {
        return Ok(SplitOutcome::Leaf);
    }
    let data = s.dataset();
    if has_outliers(&stats, cfg.outlier_c) {
        return Ok(sphere_split_with_mean(s, stats.mean));
    }
    let mut rng = RngStream::for_node(cfg.master_seed, node_id);
    let dir = cfg.rule.direction_with_mean(s, &stats.mean, &mut rng);
    if dir.degenerate {
        return Ok(SplitOutcome::Leaf);
    }
    let keys: Vec<(f64, usize)> =
        s.indices().iter().map(|&i| (dot(data.row(i), &dir.vector) + 0.0, i)).collect();
    let m = median_partition(keys);
    Ok(SplitOutcome::Split {
        split: Split::Hyperplane { normal: dir.vector, threshold: m.threshold, tie_index: m.tie_index },
        left: m.left,
        right: m.right,
        start_vector: Some(dir.start),
    })
}

/// The outlier branch on its own: split by median distance to `mean(S)`.
pub fn sphere_split(s: &PointSubset<'_>) -> Result<SplitOutcome> {
    if s.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, actual: s.len() });
    }
    Ok(sphere_split_with_mean(s, crate::geometry::subset_mean(s)))
}

fn sphere_split_with_mean(s: &PointSubset<'_>, mean: Vec<f64>) -> SplitOutcome {
    let data = s.dataset();
    let keys: Vec<(f64, usize)> =
        s.indices().iter().map(|&i| (dist_sq(data.row(i), &mean) + 0.0, i)).collect();
    let m = median_partition(keys);
    SplitOutcome::Split {
        split: Split::Sphere { center: mean, radius_sq: m.threshold, tie_index: m.tie_index },
        left: m.left,
        right: m.right,
        start_vector: None,
    }
}

struct MedianPartition {
    left: Vec<usize>,
    right: Vec<usize>,
    threshold: f64,
    tie_index: usize,
}

fn median_partition(mut keys: Vec<(f64, usize)>) -> MedianPartition {
    let k = keys.len().div_ceil(2);
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let (_, &mut (threshold, tie_index), _) = keys.select_nth_unstable_by(k - 1, cmp);
    let mut left: Vec<usize> = keys[..k].iter().map(|&(_, i)| i).collect();
    let mut right: Vec<usize> = keys[k..].iter().map(|&(_, i)| i).collect();
    left.sort_unstable();
    right.sort_unstable();
    MedianPartition { left, right, threshold, tie_index }
}

pub fn build_tree(data: &Dataset, cfg: &TreeConfig) -> Result<PartitionTree> {
    build_tree_with_observer(data, cfg, |_| {})
}

enum Work {
    Leaf { degenerate: bool },
    Split(Split, Vec<usize>, Vec<usize>, Option<Vec<f64>>),
}

/// Like [`build_tree`]; `level_done(depth)` is called after every node of
/// that depth has been decided.
pub fn build_tree_with_observer<F>(data: &Dataset, cfg: &TreeConfig, mut level_done: F) -> Result<PartitionTree>
where
    F: FnMut(u32),
{
    cfg.validate()?;
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut frontier: Vec<(u64, Vec<usize>)> = alloc::vec![(1, (0..data.n()).collect())];
    let mut depth = 0u32;
    loop {
        let decide = |(id, indices): &(u64, Vec<usize>)| -> Result<Work> {
            if depth >= cfg.max_depth || indices.len() < 2 * cfg.min_leaf_size {
                return Ok(Work::Leaf { degenerate: false });
            }
            let s = PointSubset::trusted(data, indices);
            Ok(match split_node(&s, cfg, *id)? {
                SplitOutcome::Leaf => Work::Leaf { degenerate: true },
                SplitOutcome::Split { split, left, right, start_vector } => {
                    Work::Split(split, left, right, start_vector)
                }
            })
        };
        #[cfg(feature = "parallel")]
        let decided: Vec<Result<Work>> = {
            use rayon::prelude::*;
            frontier.par_iter().map(decide).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let decided: Vec<Result<Work>> = frontier.iter().map(decide).collect();

        let child_base = nodes.len() + frontier.len();
        let mut next = Vec::new();
        for ((id, indices), work) in frontier.into_iter().zip(decided) {
            let kind_and_start = match work? {
                Work::Leaf { degenerate } => (NodeKind::Leaf { indices, degenerate }, None),
                Work::Split(split, left, right, start) => {
                    let children = [child_base + next.len(), child_base + next.len() + 1];
                    next.push((2 * id, left));
                    next.push((2 * id + 1, right));
                    (NodeKind::Internal { split, children }, start)
                }
            };
            nodes.push(TreeNode { id, depth, kind: kind_and_start.0, start_vector: kind_and_start.1 });
        }
        level_done(depth);
        if next.is_empty() {
            break;
        }
        frontier = next;
        depth += 1;
    }
    Ok(PartitionTree { config: *cfg, dim: data.dim(), n_points: data.n(), nodes })
}

impl PartitionTree {
    /// Reassembles a tree from its parts, checking structural consistency:
    /// breadth-first order, child links, and leaves partitioning `0..n_points`.
    pub fn from_parts(config: TreeConfig, dim: usize, n_points: usize, nodes: Vec<TreeNode>) -> Result<Self> {
        config.validate()?;
        if nodes.is_empty() || nodes[0].id != 1 || nodes[0].depth != 0 {
            return Err(Error::InvalidConfig("tree must start with root id 1"));
        }
        let mut seen = alloc::vec![false; n_points];
        let mut covered = 0usize;
        for (pos, node) in nodes.iter().enumerate() {
            if pos > 0 && nodes[pos - 1].id >= node.id {
                return Err(Error::InvalidConfig("nodes must be sorted by id"));
            }
            match &node.kind {
                NodeKind::Internal { split, children } => {
                    let vec_len = match split {
                        Split::Hyperplane { normal, .. } => normal.len(),
                        Split::Sphere { center, .. } => center.len(),
                    };
                    if vec_len != dim {
                        return Err(Error::DimensionMismatch { expected: dim, actual: vec_len });
                    }
                    for (k, &c) in children.iter().enumerate() {
                        let ok = nodes.get(c).is_some_and(|child| {
                            child.id == 2 * node.id + k as u64 && child.depth == node.depth + 1
                        });
                        if !ok || c <= pos {
                            return Err(Error::InvalidConfig("inconsistent child link"));
                        }
                    }
                }
                NodeKind::Leaf { indices, .. } => {
                    for &i in indices {
                        if i >= n_points {
                            return Err(Error::IndexOutOfRange { index: i, n: n_points });
                        }
                        if core::mem::replace(&mut seen[i], true) {
                            return Err(Error::DuplicateIndex(i));
                        }
                    }
                    covered += indices.len();
                }
            }
            if let Some(sv) = &node.start_vector {
                if sv.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, actual: sv.len() });
                }
            }
        }
        if covered != n_points {
            return Err(Error::InvalidConfig("leaves do not cover every point"));
        }
        Ok(PartitionTree { config, dim, n_points, nodes })
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// Deepest level reached.
    pub fn depth(&self) -> u32 {
        self.nodes.last().map_or(0, |n| n.depth)
    }

    /// Position of the node with heap id `id`.
    pub fn position_of(&self, id: u64) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    /// Id of the leaf reached by `x` through the stored predicates.
    pub fn assign_leaf(&self, x: &[f64]) -> Result<u64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: x.len() });
        }
        Ok(self.descend(|split| split.goes_left(x)))
    }

    /// Id of the leaf holding training point `index`, reproducing the
    /// tie-breaking used at construction time.
    pub fn assign_training_point(&self, data: &Dataset, index: usize) -> Result<u64> {
        if data.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: data.dim() });
        }
        if index >= data.n() {
            return Err(Error::IndexOutOfRange { index, n: data.n() });
        }
        let x = data.row(index);
        Ok(self.descend(|split| split.goes_left_training(x, index)))
    }

    fn descend<F: Fn(&Split) -> bool>(&self, left: F) -> u64 {
        let mut pos = 0;
        loop {
            let node = &self.nodes[pos];
            match &node.kind {
                NodeKind::Leaf { .. } => return node.id,
                NodeKind::Internal { split, children } => {
                    pos = if left(split) { children[0] } else { children[1] };
                }
            }
        }
    }

    /// Sorted indices of all points below the node at `pos`.
    pub fn subset_of(&self, pos: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![pos];
        while let Some(p) = stack.pop() {
            match &self.nodes[p].kind {
                NodeKind::Leaf { indices, .. } => out.extend_from_slice(indices),
                NodeKind::Internal { children, .. } => stack.extend_from_slice(children),
            }
        }
        out.sort_unstable();
        out
    }

    /// Node positions forming the partition of the tree cut at `depth`:
    /// nodes at that depth plus shallower leaves, in id order.
    pub fn cut_at_depth(&self, depth: u32) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.depth == depth || (n.depth < depth && n.is_leaf()))
            .map(|(p, _)| p)
            .collect()
    }

    /// The point sets of the tree cut at `depth`.
    pub fn partition_at_depth(&self, depth: u32) -> Vec<Vec<usize>> {
        self.cut_at_depth(depth).into_iter().map(|p| self.subset_of(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn stats_of(rows: &[Vec<f64>]) -> (Dataset, DiameterStats) {
        let d = Dataset::from_rows(rows).unwrap();
        let s = DiameterStats::compute(&d.all());
        (d, s)
    }

    fn far_point_rows() -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0, 0.0]; 99];
        rows.push(vec![100.0, 0.0]);
        rows
    }

    #[test]
    fn outlier_examples() {
        let (_, st) = stats_of(&far_point_rows());
        assert!((st.avg_diameter_sq - 198.0).abs() < 1e-9);
        assert!(has_outliers(&st, 10.0));

        let (_, same) = stats_of(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(!has_outliers(&same, 10.0));

        let (_, two) = stats_of(&[vec![0.0, 0.0], vec![2.0, 0.0]]);
        assert!(has_outliers(&two, 1.0));
        assert!(!has_outliers(&two, 3.0));
    }

    #[test]
    fn median_of_four() {
        let m = median_partition(vec![(3.0, 0), (1.0, 1), (2.0, 2), (4.0, 3)]);
        assert_eq!(m.left, vec![1, 2]);
        assert_eq!(m.right, vec![0, 3]);
        assert_eq!(m.threshold, 2.0);
        assert_eq!(m.tie_index, 2);
    }

    #[test]
    fn median_ties_are_balanced() {
        let m = median_partition((0..7).map(|i| (1.0, 6 - i)).collect());
        assert_eq!(m.left, vec![0, 1, 2, 3]);
        assert_eq!(m.right, vec![4, 5, 6]);
        assert_eq!(m.tie_index, 3);
    }

    #[test]
    fn negative_zero_keys_route_like_positive_zero() {
        let split = Split::Hyperplane { normal: vec![1.0], threshold: 0.0, tie_index: 2 };
        assert!(split.goes_left_training(&[-0.0], 1));
        assert!(!split.goes_left_training(&[-0.0], 3));
    }

    #[test]
    fn hyperplane_split_of_four_points() {
        // Points on the x axis; whichever sign the direction takes, the
        // two-point halves are the median split of the projections.
        let d = Dataset::from_rows(&[vec![3.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![4.0, 0.0]]).unwrap();
        let cfg = TreeConfig { outlier_c: 100.0, ..TreeConfig::new(SplitRule::Apd { iterations: 1 }, 1, 0) };
        match split_node(&d.all(), &cfg, 1).unwrap() {
            SplitOutcome::Split { split: Split::Hyperplane { normal, threshold, .. }, left, right, .. } => {
                if normal[0] > 0.0 {
                    assert_eq!(left, vec![1, 2]);
                    assert_eq!(right, vec![0, 3]);
                    assert!((threshold - 2.0).abs() < 1e-12);
                } else {
                    assert_eq!(left, vec![0, 3]);
                    assert_eq!(right, vec![1, 2]);
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn outlier_set_gets_sphere_split() {
        let d = Dataset::from_rows(&far_point_rows()).unwrap();
        let cfg = TreeConfig::new(SplitRule::Rp, 1, 0);
        match split_node(&d.all(), &cfg, 1).unwrap() {
            SplitOutcome::Split { split: Split::Sphere { center, .. }, left, right, .. } => {
                assert!((center[0] - 1.0).abs() < 1e-12);
                assert_eq!(left.len(), 50);
                assert_eq!(right.len(), 50);
                assert!(right.contains(&99));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn split_refuses_singletons_and_leaves_duplicates() {
        let d = Dataset::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let cfg = TreeConfig::new(SplitRule::Rp, 3, 0);
        let one = PointSubset::new(&d, &[0]).unwrap();
        assert!(matches!(split_node(&one, &cfg, 1), Err(Error::TooFewPoints { .. })));
        assert_eq!(split_node(&d.all(), &cfg, 1).unwrap(), SplitOutcome::Leaf);
        let tree = build_tree(&d, &cfg).unwrap();
        assert_eq!(tree.node_count(), 1);
        assert!(matches!(tree.root().kind, NodeKind::Leaf { degenerate: true, .. }));
    }

    #[test]
    fn depth_zero_is_single_leaf() {
        let d = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![5.0]]).unwrap();
        let tree = build_tree(&d, &TreeConfig::new(SplitRule::Rp, 0, 1)).unwrap();
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.subset_of(0), vec![0, 1, 2]);
        assert_eq!(tree.assign_leaf(&[123.0]).unwrap(), 1);
    }

    #[test]
    fn sixteen_points_to_singletons() {
        let rows: Vec<Vec<f64>> =
            (0..16).map(|i| vec![i as f64, ((i * 7) % 5) as f64, ((i * 3) % 11) as f64 * 0.5]).collect();
        let d = Dataset::from_rows(&rows).unwrap();
        let tree = build_tree(&d, &TreeConfig::new(SplitRule::Apd { iterations: 1 }, 4, 3)).unwrap();
        assert_eq!(tree.leaf_count(), 16);
        assert!(tree.leaves().all(|l| matches!(&l.kind, NodeKind::Leaf { indices, .. } if indices.len() == 1)));
        for i in 0..16 {
            let leaf = tree.assign_training_point(&d, i).unwrap();
            let pos = tree.position_of(leaf).unwrap();
            assert_eq!(tree.subset_of(pos), vec![i]);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = TreeConfig::new(SplitRule::Rp, 63, 0);
        assert!(cfg.validate().is_err());
        cfg.max_depth = 3;
        cfg.min_leaf_size = 0;
        assert!(cfg.validate().is_err());
        cfg.min_leaf_size = 1;
        cfg.outlier_c = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn observer_sees_every_level() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let d = Dataset::from_rows(&rows).unwrap();
        let mut levels = Vec::new();
        build_tree_with_observer(&d, &TreeConfig::new(SplitRule::Rp, 3, 0), |l| levels.push(l)).unwrap();
        assert_eq!(levels, vec![0, 1, 2, 3]);
    }
}
