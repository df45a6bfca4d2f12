//! Binary tree files. See `docs/FORMATS.md` for the byte layout.

use std::fs;
use std::path::Path;

use apd_core::{NodeKind, PartitionTree, Split, SplitRule, TreeConfig, TreeNode};

use crate::binary::{Reader, Writer};
use crate::error::{AppError, FormatError, Result};

pub const TREE_MAGIC: [u8; 4] = *b"APDT";
pub const TREE_VERSION: u32 = 1;

const RULE_RP: u8 = 0;
const RULE_APD: u8 = 1;
const RULE_PCA: u8 = 2;

const NODE_LEAF: u8 = 0;
const NODE_HYPERPLANE: u8 = 1;
const NODE_SPHERE: u8 = 2;

fn put_config(w: &mut Writer, cfg: &TreeConfig) {
    let (tag, iterations, tolerance) = match cfg.rule {
        SplitRule::Rp => (RULE_RP, 0, 0.0),
        SplitRule::Apd { iterations } => (RULE_APD, iterations, 0.0),
        SplitRule::Pca { tolerance } => (RULE_PCA, 0, tolerance),
    };
    w.u8(tag);
    w.u32(iterations);
    w.f64(tolerance);
    w.u32(cfg.max_depth);
    w.u64(cfg.min_leaf_size as u64);
    w.f64(cfg.outlier_c);
    w.u64(cfg.master_seed);
}

fn get_config(r: &mut Reader<'_>) -> Result<TreeConfig, FormatError> {
    let tag = r.u8()?;
    let iterations = r.u32()?;
    let tolerance = r.f64()?;
    let rule = match tag {
        RULE_RP => SplitRule::Rp,
        RULE_APD => SplitRule::Apd { iterations },
        RULE_PCA => SplitRule::Pca { tolerance },
        other => return Err(FormatError::Corrupt(format!("unknown rule tag {other}"))),
    };
    Ok(TreeConfig {
        rule,
        max_depth: r.u32()?,
        min_leaf_size: r.usize()?,
        outlier_c: r.f64()?,
        master_seed: r.u64()?,
    })
}

pub fn encode_tree(tree: &PartitionTree) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.extend_from_slice(&TREE_MAGIC);
    w.u32(TREE_VERSION);
    put_config(&mut w, tree.config());
    w.u64(tree.dim() as u64);
    w.u64(tree.n_points() as u64);
    w.u64(tree.node_count() as u64);
    for node in tree.nodes() {
        w.u64(node.id);
        w.u32(node.depth);
        match &node.kind {
            NodeKind::Internal { split, children } => {
                let (tag, v, threshold, tie) = match split {
                    Split::Hyperplane { normal, threshold, tie_index } => (NODE_HYPERPLANE, normal, threshold, tie_index),
                    Split::Sphere { center, radius_sq, tie_index } => (NODE_SPHERE, center, radius_sq, tie_index),
                };
                w.u8(tag);
                w.f64s(v);
                w.f64(*threshold);
                w.u64(*tie as u64);
                w.u64(children[0] as u64);
                w.u64(children[1] as u64);
            }
            NodeKind::Leaf { indices, degenerate } => {
                w.u8(NODE_LEAF);
                w.u8(u8::from(*degenerate));
                w.u64(indices.len() as u64);
                for &i in indices {
                    w.u64(i as u64);
                }
            }
        }
        match &node.start_vector {
            Some(v) => {
                w.u8(1);
                w.f64s(v);
            }
            None => w.u8(0),
        }
    }
    w.buf
}

fn get_bool(r: &mut Reader<'_>) -> Result<bool, FormatError> {
    match r.u8()? {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(FormatError::Corrupt(format!("bad flag byte {other}"))),
    }
}

pub fn decode_tree(bytes: &[u8]) -> Result<PartitionTree, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(TREE_MAGIC)?;
    let version = r.u32()?;
    if version != TREE_VERSION {
        return Err(FormatError::Version(version));
    }
    let config = get_config(&mut r)?;
    let dim = r.usize()?;
    let n_points = r.usize()?;
    let count = r.usize()?;
    // Smallest node record: id, depth, tag, flag, count, start flag.
    r.ensure(count, 23)?;
    let mut nodes = Vec::with_capacity(count);
    for _ in 0..count {
        let id = r.u64()?;
        let depth = r.u32()?;
        let kind = match r.u8()? {
            NODE_LEAF => {
                let degenerate = get_bool(&mut r)?;
                let len = r.usize()?;
                r.ensure(len, 8)?;
                let indices = (0..len).map(|_| r.usize()).collect::<Result<Vec<_>, _>>()?;
                if indices.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(FormatError::Corrupt(format!("leaf {id} indices not strictly increasing")));
                }
                NodeKind::Leaf { indices, degenerate }
            }
            tag @ (NODE_HYPERPLANE | NODE_SPHERE) => {
                let v = r.f64s(dim)?;
                let threshold = r.f64()?;
                let tie_index = r.usize()?;
                let children = [r.usize()?, r.usize()?];
                let split = if tag == NODE_HYPERPLANE {
                    Split::Hyperplane { normal: v, threshold, tie_index }
                } else {
                    Split::Sphere { center: v, radius_sq: threshold, tie_index }
                };
                NodeKind::Internal { split, children }
            }
            other => return Err(FormatError::Corrupt(format!("unknown node tag {other}"))),
        };
        let start_vector = if get_bool(&mut r)? { Some(r.f64s(dim)?) } else { None };
        nodes.push(TreeNode { id, depth, kind, start_vector });
    }
    r.finish()?;
    PartitionTree::from_parts(config, dim, n_points, nodes).map_err(|e| FormatError::Corrupt(e.to_string()))
}

pub fn save_tree(path: &Path, tree: &PartitionTree) -> Result<()> {
    fs::write(path, encode_tree(tree)).map_err(|e| AppError::io(path, e))
}

pub fn load_tree(path: &Path) -> Result<PartitionTree> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    decode_tree(&bytes).map_err(|source| AppError::Format { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use apd_core::{build_tree, Dataset};

    fn sample() -> (Dataset, PartitionTree) {
        let mut rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * 7 % 11) as f64]).collect();
        rows.push(vec![1e4, 1e4]);
        let d = Dataset::from_rows(&rows).unwrap();
        let t = build_tree(&d, &TreeConfig::new(SplitRule::Apd { iterations: 2 }, 4, 3)).unwrap();
        (d, t)
    }

    #[test]
    fn round_trip() {
        let (_, t) = sample();
        assert!(t.nodes().iter().any(|n| matches!(n.split(), Some(Split::Sphere { .. }))));
        let bytes = encode_tree(&t);
        let back = decode_tree(&bytes).unwrap();
        assert_eq!(back, t);
        assert_eq!(encode_tree(&back), bytes);
    }

    #[test]
    fn every_truncation_fails() {
        let (_, t) = sample();
        let bytes = encode_tree(&t);
        for cut in (0..bytes.len()).step_by(7) {
            assert!(decode_tree(&bytes[..cut]).is_err(), "cut {cut}");
        }
    }

    #[test]
    fn corrupt_child_link_rejected() {
        let d = Dataset::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let t = build_tree(&d, &TreeConfig::new(SplitRule::Rp, 1, 0)).unwrap();
        let mut bytes = encode_tree(&t);
        // Root record starts after magic, version, config (41 bytes) and three u64s.
        let root = 4 + 4 + 41 + 24;
        let child0 = root + 8 + 4 + 1 + 8 + 8 + 8;
        bytes[child0] = 2;
        assert!(matches!(decode_tree(&bytes), Err(FormatError::Corrupt(_))));
    }
}
