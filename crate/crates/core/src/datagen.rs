//! Deterministic synthetic taxonomy + transaction generator.
//!
//! Builds a balanced tree (`n_roots` categories, fixed fanout, truncated to
//! `n_items` leaves spread evenly over the categories), draws a pool of
//! potential itemsets whose members cluster inside one category with
//! probability `share_bias`, then emits transactions by sampling patterns,
//! dropping each item with `corruption_prob`, and padding with uniform leaf
//! noise up to a Poisson-distributed width. Identical parameters and seed
//! give identical bytes.

use std::io::{self, Write};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DatagenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("unknown threshold profile `{0}` (expected thr1..thr10)")]
    UnknownProfile(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n_transactions: u64,
    /// Mean transaction width (Poisson, clipped to `[1, n_items]`).
    pub avg_width: f64,
    pub n_items: u32,
    pub n_levels: usize,
    pub n_roots: u32,
    pub fanout: u32,
    pub n_patterns: u32,
    /// Mean potential-itemset length (geometric, clipped to `[2, 12]`).
    pub avg_pattern_len: f64,
    /// Probability that a pattern item is dropped from a transaction.
    pub corruption_prob: f64,
    /// Probability that a pattern item stays inside the first item's
    /// level-1 category.
    pub share_bias: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_transactions: 100_000,
            avg_width: 5.0,
            n_items: 1000,
            n_levels: 4,
            n_roots: 10,
            fanout: 5,
            n_patterns: 200,
            avg_pattern_len: 4.0,
            corruption_prob: 0.25,
            share_bias: 0.5,
            seed: 42,
        }
    }
}

impl GenParams {
    fn validate(&self) -> Result<(), DatagenError> {
        let err = |msg: &str| Err(DatagenError::InvalidParams(msg.to_string()));
        if self.n_transactions == 0 {
            return err("n_transactions must be positive");
        }
        if self.n_items == 0 || self.n_roots == 0 || self.fanout == 0 || self.n_patterns == 0 {
            return err("counts must be positive");
        }
        if self.n_levels == 0 {
            return err("n_levels must be at least 1");
        }
        if self.avg_width < 1.0 {
            return err("avg_width must be at least 1");
        }
        if self.avg_pattern_len < 1.0 {
            return err("avg_pattern_len must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.corruption_prob) {
            return err("corruption_prob must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.share_bias) {
            return err("share_bias must lie in [0, 1]");
        }
        let mut capacity = self.n_roots as u64;
        for _ in 1..self.n_levels {
            capacity = capacity.saturating_mul(self.fanout as u64);
            if capacity >= self.n_items as u64 {
                break;
            }
        }
        if capacity < self.n_items as u64 {
            return err("n_roots * fanout^(n_levels-1) must cover n_items");
        }
        Ok(())
    }
}

/// Generator output: taxonomy edges in emission order and transactions as
/// leaf-label lists.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub taxonomy_edges: Vec<(String, String)>,
    pub transactions: Vec<Vec<String>>,
}

impl GeneratedData {
    /// Writes `child<TAB>parent` lines.
    pub fn write_taxonomy<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (child, parent) in &self.taxonomy_edges {
            writeln!(w, "{child}\t{parent}")?;
        }
        Ok(())
    }

    /// Writes one whitespace-separated transaction per line.
    pub fn write_transactions<W: Write>(&self, mut w: W) -> io::Result<()> {
        for t in &self.transactions {
            writeln!(w, "{}", t.join(" "))?;
        }
        Ok(())
    }
}

pub fn generate(p: &GenParams) -> Result<GeneratedData, DatagenError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let (taxonomy_edges, leaf_labels, leaf_root) = build_taxonomy_shape(p);
    let n_leaves = leaf_labels.len();
    debug_assert_eq!(n_leaves, p.n_items as usize);

    // Leaves grouped per level-1 category, for the sharing bias.
    let n_groups = leaf_root.iter().map(|&r| r as usize + 1).max().unwrap_or(0);
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); n_groups];
    for (leaf, &root) in leaf_root.iter().enumerate() {
        groups[root as usize].push(leaf as u32);
    }

    let patterns = draw_patterns(p, &mut rng, n_leaves, &leaf_root, &groups);

    let width_dist = Poisson::new(p.avg_width).expect("validated mean");
    let mut transactions = Vec::with_capacity(p.n_transactions as usize);
    let mut items: Vec<u32> = Vec::new();
    for _ in 0..p.n_transactions {
        let w = (width_dist.sample(&mut rng) as usize).clamp(1, n_leaves);
        items.clear();
        // Fill from patterns first, then pad with uniform noise.
        let mut attempts = 0;
        while items.len() < w && attempts < 12 {
            attempts += 1;
            let pat = &patterns[rng.gen_range(0..patterns.len())];
            for &leaf in pat {
                if items.len() >= w {
                    break;
                }
                if rng.gen::<f64>() >= p.corruption_prob && !items.contains(&leaf) {
                    items.push(leaf);
                }
            }
        }
        while items.len() < w {
            let leaf = rng.gen_range(0..n_leaves as u32);
            if !items.contains(&leaf) {
                items.push(leaf);
            }
        }
        items.sort_unstable();
        transactions.push(items.iter().map(|&i| leaf_labels[i as usize].clone()).collect());
    }

    Ok(GeneratedData { taxonomy_edges, transactions })
}

/// Balanced tree truncated to `n_items` leaves: per-category quotas are
/// `n_items / n_roots` with the remainder spread over the first categories,
/// and each category fills its subtree left to right. Categories with a zero
/// quota are omitted, so the emitted tree is always balanced.
fn build_taxonomy_shape(p: &GenParams) -> (Vec<(String, String)>, Vec<String>, Vec<u32>) {
    let mut edges = Vec::new();
    let mut leaf_labels = Vec::with_capacity(p.n_items as usize);
    let mut leaf_root = Vec::with_capacity(p.n_items as usize);

    if p.n_levels == 1 {
        for i in 0..p.n_items {
            let label = format!("n{}", i + 1);
            edges.push((label.clone(), "ROOT".to_string()));
            leaf_labels.push(label);
            leaf_root.push(i);
        }
        return (edges, leaf_labels, leaf_root);
    }

    let depth = p.n_levels - 1;
    let base = p.n_items / p.n_roots;
    let extra = (p.n_items % p.n_roots) as usize;
    for root_idx in 0..p.n_roots as usize {
        let quota = base as usize + usize::from(root_idx < extra);
        if quota == 0 {
            continue;
        }
        let root_label = format!("n{}", root_idx + 1);
        edges.push((root_label.clone(), "ROOT".to_string()));
        let mut seen_prefixes: Vec<String> = vec![root_label.clone()];
        for leaf_idx in 0..quota {
            // Digits of the leaf index in base `fanout`, most significant
            // first, name the internal chain under this category.
            let mut digits = vec![0u32; depth];
            let mut rest = leaf_idx as u64;
            for d in (0..depth).rev() {
                digits[d] = (rest % p.fanout as u64) as u32;
                rest /= p.fanout as u64;
            }
            let mut parent = root_label.clone();
            for (d, &digit) in digits.iter().enumerate() {
                let label = format!("{parent}_{}", digit + 1);
                if !seen_prefixes.contains(&label) {
                    edges.push((label.clone(), parent.clone()));
                    seen_prefixes.push(label.clone());
                }
                if d + 1 == depth {
                    leaf_labels.push(label.clone());
                    leaf_root.push(root_idx as u32);
                }
                parent = label;
            }
        }
    }
    (edges, leaf_labels, leaf_root)
}

fn draw_patterns(
    p: &GenParams,
    rng: &mut ChaCha8Rng,
    n_leaves: usize,
    leaf_root: &[u32],
    groups: &[Vec<u32>],
) -> Vec<Vec<u32>> {
    let len_cap = 12usize.min(n_leaves);
    let geo = Geometric::new((1.0 / p.avg_pattern_len).clamp(1e-9, 1.0)).expect("valid p");
    let mut patterns = Vec::with_capacity(p.n_patterns as usize);
    for _ in 0..p.n_patterns {
        let len = ((geo.sample(rng) + 1) as usize).clamp(2.min(len_cap), len_cap);
        let first = rng.gen_range(0..n_leaves as u32);
        let mut items = vec![first];
        let home = &groups[leaf_root[first as usize] as usize];
        let mut tries = 0;
        while items.len() < len && tries < 50 {
            tries += 1;
            let candidate = if rng.gen::<f64>() < p.share_bias {
                home[rng.gen_range(0..home.len())]
            } else {
                rng.gen_range(0..n_leaves as u32)
            };
            if !items.contains(&candidate) {
                items.push(candidate);
            }
        }
        items.sort_unstable();
        patterns.push(items);
    }
    patterns
}

/// The ten built-in minimum-support profiles for four-level taxonomies,
/// ordered from uniformly high (`thr1`) to aggressively low (`thr10`).
pub fn threshold_profile(name: &str) -> Result<[f64; 4], DatagenError> {
    match name {
        "thr1" => Ok([0.05, 0.05, 0.05, 0.05]),
        "thr2" => Ok([0.05, 0.001, 0.0005, 0.0001]),
        "thr3" => Ok([0.01, 0.001, 0.0005, 0.0001]),
        "thr4" => Ok([0.01, 0.0005, 0.0005, 0.0001]),
        "thr5" => Ok([0.01, 0.0005, 0.0001, 0.0001]),
        "thr6" => Ok([0.01, 0.0005, 0.0001, 0.00005]),
        "thr7" => Ok([0.001, 0.0005, 0.0001, 0.00005]),
        "thr8" => Ok([0.001, 0.0001, 0.0001, 0.00005]),
        "thr9" => Ok([0.001, 0.0001, 0.00006, 0.00005]),
        "thr10" => Ok([0.001, 0.0001, 0.00006, 0.00003]),
        other => Err(DatagenError::UnknownProfile(other.to_string())),
    }
}
