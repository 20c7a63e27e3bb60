//! Transaction store over taxonomy leaves, level-wise generalized views, and
//! exact support counting.
//!
//! Transactions are sets (duplicates within a line collapse), and so are
//! their generalized images: two siblings in one transaction count once
//! toward their parent. Support counting always returns the exact sequential
//! scan result; internally it picks between enumerating transaction subsets
//! and intersecting per-item tid lists, whichever is estimated cheaper, and
//! both paths produce identical integer counts.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::thread;

use thiserror::Error;

use crate::taxonomy::{NodeId, TaxonomyError, TaxonomyTree};

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("line {line}: unknown item `{label}`")]
    UnknownItem { label: String, line: usize },
    #[error("line {line}: `{label}` names an internal category, not an item")]
    NotALeaf { label: String, line: usize },
    #[error("candidate item is not a node of the queried level")]
    ItemLevelMismatch,
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("i/o error at line {line}")]
    Io { line: usize },
}

/// Immutable transaction store; every item is a leaf of the bound tree.
#[derive(Debug, Clone)]
pub struct Dataset {
    transactions: Vec<Vec<NodeId>>,
    leaf_sups: Vec<u32>,
}

/// Reads whitespace-separated leaf labels, one transaction per line.
/// Blank lines and `#` comments are skipped; unknown or internal labels are
/// errors carrying the 1-based line number.
pub fn load_transactions<R: BufRead>(
    reader: R,
    tree: &TaxonomyTree,
) -> Result<Dataset, DatasetError> {
    let mut transactions = Vec::new();
    let mut leaf_sups = vec![0u32; tree.node_count()];
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|_| DatasetError::Io { line: line_no })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut items = BTreeSet::new();
        for token in trimmed.split_whitespace() {
            match tree.resolve_leaf(token) {
                Some(id) => {
                    items.insert(id);
                }
                None => {
                    return Err(if tree.node_by_label(token).is_some() {
                        DatasetError::NotALeaf { label: token.to_string(), line: line_no }
                    } else {
                        DatasetError::UnknownItem { label: token.to_string(), line: line_no }
                    });
                }
            }
        }
        if items.is_empty() {
            continue;
        }
        let items: Vec<NodeId> = items.into_iter().collect();
        for &v in &items {
            leaf_sups[v.index()] += 1;
        }
        transactions.push(items);
    }
    Ok(Dataset { transactions, leaf_sups })
}

impl Dataset {
    /// Builds a dataset from id-level transactions (deduplicated here).
    /// Every id must be a leaf of `tree`.
    pub fn from_id_transactions(
        tree: &TaxonomyTree,
        raw: Vec<Vec<NodeId>>,
    ) -> Result<Dataset, DatasetError> {
        let height = tree.height();
        let mut transactions = Vec::with_capacity(raw.len());
        let mut leaf_sups = vec![0u32; tree.node_count()];
        for (idx, t) in raw.into_iter().enumerate() {
            let items: BTreeSet<NodeId> = t.into_iter().collect();
            if items.is_empty() {
                continue;
            }
            for &v in &items {
                if tree.level(v) != height || !tree.leaves().contains(&v) {
                    return Err(DatasetError::NotALeaf {
                        label: tree.label(v).to_string(),
                        line: idx + 1,
                    });
                }
            }
            let items: Vec<NodeId> = items.into_iter().collect();
            for &v in &items {
                leaf_sups[v.index()] += 1;
            }
            transactions.push(items);
        }
        Ok(Dataset { transactions, leaf_sups })
    }

    /// Number of non-empty transactions.
    pub fn n(&self) -> u64 {
        self.transactions.len() as u64
    }

    pub fn transactions(&self) -> &[Vec<NodeId>] {
        &self.transactions
    }

    pub fn leaf_support(&self, v: NodeId) -> u32 {
        self.leaf_sups[v.index()]
    }

    /// Generalizes every transaction to level `h` and tallies node supports
    /// in one pass.
    pub fn level_view(&self, tree: &TaxonomyTree, h: usize) -> Result<LevelView, DatasetError> {
        if h < 1 || h > tree.height() {
            return Err(TaxonomyError::LevelOutOfRange { level: h, max: tree.height() }.into());
        }
        let mut sups = vec![0u32; tree.node_count()];
        let mut tids: Vec<Vec<u32>> = vec![Vec::new(); tree.node_count()];
        let mut transactions = Vec::with_capacity(self.transactions.len());
        for (tid, t) in self.transactions.iter().enumerate() {
            let gen = tree.generalize_sorted(t, h)?;
            for &v in &gen {
                sups[v.index()] += 1;
                tids[v.index()].push(tid as u32);
            }
            transactions.push(gen);
        }
        let mut at_level = vec![false; tree.node_count()];
        for &v in tree.level_nodes(h)? {
            at_level[v.index()] = true;
        }
        Ok(LevelView { h, transactions, sups, tids, at_level })
    }
}

/// One level's generalized image of a dataset.
#[derive(Debug, Clone)]
pub struct LevelView {
    h: usize,
    transactions: Vec<Vec<NodeId>>,
    sups: Vec<u32>,
    tids: Vec<Vec<u32>>,
    at_level: Vec<bool>,
}

impl LevelView {
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n(&self) -> u64 {
        self.transactions.len() as u64
    }

    pub fn transactions(&self) -> &[Vec<NodeId>] {
        &self.transactions
    }

    /// Transactions containing at least one leaf descendant of `v`.
    pub fn support(&self, v: NodeId) -> u32 {
        self.sups[v.index()]
    }

    pub fn is_at_level(&self, v: NodeId) -> bool {
        self.at_level[v.index()]
    }

    /// Level nodes that occur in the data, sorted by ascending support with
    /// `NodeId` breaking ties.
    pub fn items_by_support_asc(&self) -> Vec<NodeId> {
        let mut items: Vec<NodeId> = (0..self.sups.len())
            .filter(|&i| self.at_level[i] && self.sups[i] > 0)
            .map(NodeId::from_index)
            .collect();
        items.sort_unstable_by_key(|&v| (self.sups[v.index()], v));
        items
    }
}

/// Exact supports for `candidates`, aligned with the input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportTable {
    counts: Vec<u32>,
}

impl SupportTable {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, idx: usize) -> u32 {
        self.counts[idx]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

/// Counts, for every candidate, the transactions of `view` containing all of
/// its items. Candidates must be sorted id lists of level-`h` nodes.
///
/// `threads > 1` partitions the work; partial counts are summed, so the
/// result is identical to the sequential scan.
pub fn count_supports(
    view: &LevelView,
    candidates: &[Vec<NodeId>],
    threads: usize,
) -> Result<SupportTable, DatasetError> {
    for c in candidates {
        debug_assert!(c.windows(2).all(|w| w[0] < w[1]), "candidates must be sorted and unique");
        for &v in c {
            if !view.is_at_level(v) {
                return Err(DatasetError::ItemLevelMismatch);
            }
        }
    }
    let mut counts = vec![0u32; candidates.len()];
    // Work is split per candidate size; each group picks its own strategy.
    let mut by_k: HashMap<usize, Vec<u32>> = HashMap::new();
    for (i, c) in candidates.iter().enumerate() {
        by_k.entry(c.len()).or_default().push(i as u32);
    }
    let mut sizes: Vec<usize> = by_k.keys().copied().collect();
    sizes.sort_unstable();
    for k in sizes {
        let idxs = &by_k[&k];
        if k == 0 {
            continue;
        }
        let subset_cost: u64 = view
            .transactions
            .iter()
            .map(|t| n_choose_k_capped(t.len() as u64, k as u64))
            .fold(0u64, u64::saturating_add);
        let isect_cost: u64 = idxs
            .iter()
            .map(|&i| {
                let c = &candidates[i as usize];
                let min_len =
                    c.iter().map(|&v| view.tids[v.index()].len() as u64).min().unwrap_or(0);
                min_len.saturating_mul(k as u64)
            })
            .fold(0u64, u64::saturating_add);
        if subset_cost <= isect_cost {
            count_by_subsets(view, candidates, idxs, k, threads, &mut counts);
        } else {
            count_by_intersection(view, candidates, idxs, threads, &mut counts);
        }
    }
    Ok(SupportTable { counts })
}

fn n_choose_k_capped(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
        if r > 1 << 40 {
            return 1 << 40;
        }
    }
    r
}

fn count_by_subsets(
    view: &LevelView,
    candidates: &[Vec<NodeId>],
    idxs: &[u32],
    k: usize,
    threads: usize,
    counts: &mut [u32],
) {
    // Duplicate candidates collapse onto one canonical index here and get
    // their counts copied back at the end.
    let mut lookup: HashMap<&[NodeId], u32> = HashMap::with_capacity(idxs.len());
    for &i in idxs {
        lookup.entry(candidates[i as usize].as_slice()).or_insert(i);
    }
    let run = |transactions: &[Vec<NodeId>]| -> Vec<(u32, u32)> {
        let mut local: HashMap<u32, u32> = HashMap::new();
        let mut buf: Vec<NodeId> = Vec::with_capacity(k);
        for t in transactions {
            if t.len() < k {
                continue;
            }
            for_each_k_subset(t, k, &mut buf, 0, &mut |subset| {
                if let Some(&i) = lookup.get(subset) {
                    *local.entry(i).or_insert(0) += 1;
                }
            });
        }
        let mut v: Vec<(u32, u32)> = local.into_iter().collect();
        v.sort_unstable();
        v
    };
    if threads <= 1 || view.transactions.len() < 2 {
        for (i, c) in run(&view.transactions) {
            counts[i as usize] += c;
        }
    } else {
        let chunk = view.transactions.len().div_ceil(threads);
        let partials: Vec<Vec<(u32, u32)>> = thread::scope(|s| {
            let handles: Vec<_> =
                view.transactions.chunks(chunk).map(|part| s.spawn(|| run(part))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for partial in partials {
            for (i, c) in partial {
                counts[i as usize] += c;
            }
        }
    }
    for &i in idxs {
        let canon = lookup[candidates[i as usize].as_slice()];
        if canon != i {
            counts[i as usize] = counts[canon as usize];
        }
    }
}

fn for_each_k_subset(
    t: &[NodeId],
    k: usize,
    buf: &mut Vec<NodeId>,
    start: usize,
    f: &mut impl FnMut(&[NodeId]),
) {
    if buf.len() == k {
        f(buf);
        return;
    }
    let need = k - buf.len();
    let mut i = start;
    while i + need <= t.len() {
        buf.push(t[i]);
        for_each_k_subset(t, k, buf, i + 1, f);
        buf.pop();
        i += 1;
    }
}

fn count_by_intersection(
    view: &LevelView,
    candidates: &[Vec<NodeId>],
    idxs: &[u32],
    threads: usize,
    counts: &mut [u32],
) {
    let count_one = |c: &[NodeId]| -> u32 {
        let mut lists: Vec<&[u32]> = c.iter().map(|&v| view.tids[v.index()].as_slice()).collect();
        lists.sort_unstable_by_key(|l| l.len());
        let (smallest, rest) = lists.split_first().expect("non-empty candidate");
        smallest
            .iter()
            .filter(|&&tid| rest.iter().all(|l| l.binary_search(&tid).is_ok()))
            .count() as u32
    };
    if threads <= 1 || idxs.len() < 2 {
        for &i in idxs {
            counts[i as usize] = count_one(&candidates[i as usize]);
        }
    } else {
        let chunk = idxs.len().div_ceil(threads);
        let partials: Vec<Vec<(u32, u32)>> = thread::scope(|s| {
            let handles: Vec<_> = idxs
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || {
                        part.iter()
                            .map(|&i| (i, count_one(&candidates[i as usize])))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for partial in partials {
            for (i, c) in partial {
                counts[i as usize] = c;
            }
        }
    }
}
