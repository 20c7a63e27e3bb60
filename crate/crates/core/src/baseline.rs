//! Reference engines: the support-pruning-only level-wise miner (`basic`)
//! and an exhaustive enumeration oracle used for exact-output verification.
//!
//! The oracle deliberately performs no candidate join at all, so a defect in
//! the shared join machinery cannot hide in both systems: it enumerates every
//! admissible itemset per level, counts each one by its own containment scan,
//! and applies the flipping definition literally.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use crate::dataset::Dataset;
use crate::measures::{corr, CorrLabel, MeasureError, MeasureKind, Thresholds};
use crate::miner::{
    evaluate_cell, generate_with_stats, peak_rss_bytes, sort_patterns, walk_chain, CellEntry,
    CellResult, CellStats, FlippingPattern, MineError, MineOptions, MineOutcome, MineStats,
};
use crate::taxonomy::{NodeId, TaxonomyTree};

/// Level-wise miner that prunes by support alone and post-filters the result
/// to flipping patterns. Stands in for the generate-all-frequent-itemsets
/// approach; expect far larger candidate counts than the direct miner.
pub fn mine_basic(
    ds: &Dataset,
    tree: &TaxonomyTree,
    th: &Thresholds,
    kind: MeasureKind,
    opts: MineOptions,
) -> Result<MineOutcome, MineError> {
    let start = Instant::now();
    if !kind.is_null_invariant() {
        return Err(MeasureError::NotNullInvariant(kind).into());
    }
    if !tree.is_balanced() {
        return Err(MineError::TreeNotRebalanced);
    }
    let height = tree.height();
    if th.levels() != height {
        return Err(MineError::ThresholdLevels { expected: height, got: th.levels() });
    }

    let mut stats = MineStats::default();
    let n = ds.n();
    let k_struct = tree.level_nodes(1)?.len();
    if n == 0 || k_struct < 2 {
        stats.wall = start.elapsed();
        stats.peak_rss_bytes = peak_rss_bytes();
        return Ok(MineOutcome { patterns: Vec::new(), stats });
    }

    let no_bans = HashSet::new();
    let mut budget_used = 0u64;
    let mut level_maps: Vec<HashMap<Vec<NodeId>, (f64, CorrLabel)>> =
        vec![HashMap::new(); height];
    for h in 1..=height {
        let view = ds.level_view(tree, h)?;
        stats.scans += 1;
        let min_count = th.min_count(h, n);
        let mut base: Vec<Vec<NodeId>> = tree
            .level_nodes(h)?
            .iter()
            .copied()
            .filter(|&v| view.support(v) as u64 >= min_count)
            .map(|v| vec![v])
            .collect();
        let mut k = 2;
        while k <= k_struct && !base.is_empty() {
            let (candidates, generated) = generate_with_stats(tree, h, k, &base, &no_bans);
            budget_used = budget_used.saturating_add(generated);
            if budget_used > opts.candidate_budget {
                return Err(MineError::CandidateBudgetExceeded(opts.candidate_budget));
            }
            let cell = evaluate_cell(&view, k, candidates, th, kind, opts.threads)?;
            stats.scans += 1;
            let evaluated = cell.entries.len() as u64;
            let frequent = cell.ext_survivors.len() as u64;
            let labeled =
                cell.entries.iter().filter(|e| e.label != CorrLabel::Neither).count() as u64;
            stats.cells.push(CellStats {
                h,
                k,
                generated,
                pruned_sibp: 0,
                evaluated,
                pruned_support: evaluated - frequent,
                pruned_flipping: frequent - labeled,
                survivors: labeled,
                ext_survivors: frequent,
            });
            for e in &cell.entries {
                if e.label != CorrLabel::Neither {
                    level_maps[h - 1].insert(e.items.clone(), (e.corr, e.label));
                }
            }
            base = cell
                .ext_survivors
                .iter()
                .map(|&i| cell.entries[i as usize].items.clone())
                .collect();
            k += 1;
        }
    }

    let mut patterns = Vec::new();
    for items in level_maps[height - 1].keys() {
        if let Some(chain) = walk_chain(&level_maps, tree, items) {
            patterns.push(FlippingPattern { chain });
        }
    }
    sort_patterns(&mut patterns, tree);
    stats.patterns = patterns.len() as u64;
    stats.wall = start.elapsed();
    stats.peak_rss_bytes = peak_rss_bytes();
    Ok(MineOutcome { patterns, stats })
}

/// Everything the oracle evaluated, plus the patterns it derived.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// One cell per `(h, k)` with every admissible itemset evaluated; the
    /// survivor index lists are left empty (the oracle does not prune).
    pub cells: Vec<CellResult>,
    pub patterns: Vec<FlippingPattern>,
    pub enumerated: u64,
}

impl OracleResult {
    /// Looks up an evaluated entry by level and sorted items.
    pub fn entry(&self, h: usize, items: &[NodeId]) -> Option<&CellEntry> {
        self.cells
            .iter()
            .filter(|c| c.h == h && c.k == items.len())
            .flat_map(|c| c.entries.iter())
            .find(|e| e.items == items)
    }
}

/// Exhaustively evaluates every k-itemset (`2 <= k <= k_max`) of items
/// occurring at each level, with pairwise-distinct level-1 ancestors, and
/// derives the flipping patterns by checking the alternation definition on
/// every bottom-level itemset. Guarded by `budget` on the enumeration size.
pub fn oracle_enumerate(
    ds: &Dataset,
    tree: &TaxonomyTree,
    th: &Thresholds,
    kind: MeasureKind,
    k_max: usize,
    budget: u64,
) -> Result<OracleResult, MineError> {
    if !kind.is_null_invariant() {
        return Err(MeasureError::NotNullInvariant(kind).into());
    }
    if !tree.is_balanced() {
        return Err(MineError::TreeNotRebalanced);
    }
    let height = tree.height();
    if th.levels() != height {
        return Err(MineError::ThresholdLevels { expected: height, got: th.levels() });
    }
    let n = ds.n();
    if n == 0 {
        return Ok(OracleResult { cells: Vec::new(), patterns: Vec::new(), enumerated: 0 });
    }
    let k_cap = k_max.min(tree.level_nodes(1)?.len());

    // Per-level generalized transactions and single supports, computed here
    // rather than through the dataset's view machinery.
    let mut level_txns: Vec<Vec<Vec<NodeId>>> = Vec::with_capacity(height);
    let mut level_items: Vec<Vec<NodeId>> = Vec::with_capacity(height);
    for h in 1..=height {
        let mut txns = Vec::with_capacity(ds.transactions().len());
        let mut sups: HashMap<NodeId, u32> = HashMap::new();
        for t in ds.transactions() {
            let gen = tree.generalize_sorted(t, h)?;
            for &v in &gen {
                *sups.entry(v).or_insert(0) += 1;
            }
            txns.push(gen);
        }
        let mut items: Vec<NodeId> = sups.keys().copied().collect();
        items.sort_unstable();
        level_txns.push(txns);
        level_items.push(items);
    }

    // Refuse enumerations that cannot finish at desk scale.
    let mut bound = 0u64;
    for items in &level_items {
        for k in 2..=k_cap {
            bound = bound.saturating_add(binomial_capped(items.len() as u64, k as u64));
        }
    }
    if bound > budget {
        return Err(MineError::BudgetExceeded(budget));
    }

    let mut cells = Vec::new();
    let mut enumerated = 0u64;
    let mut level_maps: Vec<HashMap<Vec<NodeId>, (f64, CorrLabel)>> =
        vec![HashMap::new(); height];
    for h in 1..=height {
        let txns = &level_txns[h - 1];
        let items = &level_items[h - 1];
        let sup_of = |v: NodeId| -> u64 {
            txns.iter().filter(|t| t.binary_search(&v).is_ok()).count() as u64
        };
        let single_sup: HashMap<NodeId, u64> = items.iter().map(|&v| (v, sup_of(v))).collect();
        for k in 2..=k_cap {
            let mut entries = Vec::new();
            for_each_distinct_top_combo(tree, items, k, &mut |combo| {
                let support =
                    txns.iter().filter(|t| is_subset_sorted(combo, t)).count() as u32;
                let sups: Vec<u64> = combo.iter().map(|v| single_sup[v]).collect();
                let value = corr(kind, support as u64, &sups).expect("positive item supports");
                let label = th.classify(h, value, support as u64, n);
                if label != CorrLabel::Neither {
                    level_maps[h - 1].insert(combo.to_vec(), (value, label));
                }
                entries.push(CellEntry { items: combo.to_vec(), support, corr: value, label });
            });
            enumerated += entries.len() as u64;
            cells.push(CellResult {
                h,
                k,
                entries,
                ext_survivors: Vec::new(),
                flip_survivors: Vec::new(),
            });
        }
    }

    let mut patterns = Vec::new();
    for items in level_maps[height - 1].keys() {
        if let Some(chain) = walk_chain(&level_maps, tree, items) {
            patterns.push(FlippingPattern { chain });
        }
    }
    sort_patterns(&mut patterns, tree);
    Ok(OracleResult { cells, patterns, enumerated })
}

fn binomial_capped(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut r = 1u64;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
        if r > 1 << 40 {
            return u64::MAX / 4;
        }
    }
    r
}

fn is_subset_sorted(needle: &[NodeId], haystack: &[NodeId]) -> bool {
    let mut it = haystack.iter();
    'outer: for want in needle {
        for have in it.by_ref() {
            if have == want {
                continue 'outer;
            }
            if have > want {
                return false;
            }
        }
        return false;
    }
    true
}

/// Enumerates sorted k-combinations of `items` whose level-1 ancestors are
/// pairwise distinct.
fn for_each_distinct_top_combo(
    tree: &TaxonomyTree,
    items: &[NodeId],
    k: usize,
    f: &mut impl FnMut(&[NodeId]),
) {
    fn recurse(
        tree: &TaxonomyTree,
        items: &[NodeId],
        k: usize,
        start: usize,
        buf: &mut Vec<NodeId>,
        tops: &mut Vec<NodeId>,
        f: &mut impl FnMut(&[NodeId]),
    ) {
        if buf.len() == k {
            f(buf);
            return;
        }
        let need = k - buf.len();
        let mut i = start;
        while i + need <= items.len() {
            let v = items[i];
            let top = tree.ancestor_at_level(v, 1).expect("level >= 1");
            if !tops.contains(&top) {
                buf.push(v);
                tops.push(top);
                recurse(tree, items, k, i + 1, buf, tops, f);
                buf.pop();
                tops.pop();
            }
            i += 1;
        }
    }
    let mut buf = Vec::with_capacity(k);
    let mut tops = Vec::with_capacity(k);
    recurse(tree, items, k, 0, &mut buf, &mut tops, f);
}

/// Recomputes a pattern's chain from raw transactions and checks every
/// invariant: chain shape, per-level supports and correlation values,
/// frequency, and strict label alternation.
pub fn validate_pattern(
    ds: &Dataset,
    tree: &TaxonomyTree,
    th: &Thresholds,
    kind: MeasureKind,
    pattern: &FlippingPattern,
) -> Result<(), String> {
    let height = tree.height();
    if pattern.chain.len() != height {
        return Err(format!("chain has {} links, tree height is {height}", pattern.chain.len()));
    }
    let leaf = pattern.leaf();
    if leaf.level != height {
        return Err("bottom link is not at leaf level".into());
    }
    let n = ds.n();
    let mut prev_label: Option<CorrLabel> = None;
    for (idx, link) in pattern.chain.iter().enumerate() {
        let h = idx + 1;
        if link.itemset.level != h {
            return Err(format!("link {idx} has level {}", link.itemset.level));
        }
        let expected_items = tree
            .generalize_sorted(&leaf.items, h)
            .map_err(|e| format!("generalization failed: {e}"))?;
        if expected_items != link.itemset.items {
            return Err(format!("link at level {h} is not the leaf generalization"));
        }
        let mut support = 0u32;
        let mut sups = vec![0u64; link.itemset.items.len()];
        for t in ds.transactions() {
            let gen = tree
                .generalize_sorted(t, h)
                .map_err(|e| format!("generalization failed: {e}"))?;
            if is_subset_sorted(&link.itemset.items, &gen) {
                support += 1;
            }
            for (slot, &v) in sups.iter_mut().zip(&link.itemset.items) {
                if gen.binary_search(&v).is_ok() {
                    *slot += 1;
                }
            }
        }
        let value =
            corr(kind, support as u64, &sups).map_err(|e| format!("corr failed: {e}"))?;
        if value != link.corr {
            return Err(format!("level {h}: corr {} recomputed as {value}", link.corr));
        }
        let label = th.classify(h, value, support as u64, n);
        if label != link.label {
            return Err(format!("level {h}: label mismatch"));
        }
        if label == CorrLabel::Neither {
            return Err(format!("level {h}: link is Neither"));
        }
        if prev_label == Some(label) {
            return Err(format!("level {h}: labels do not alternate"));
        }
        prev_label = Some(label);
    }
    Ok(())
}
