//! Direct mining of flipping correlation patterns.
//!
//! The search space is a grid of cells `Q[h][k]`: the k-itemsets built from
//! level-h generalizations, for levels `1..=H` and sizes `2..=K` where `K` is
//! the number of level-1 nodes (items of one pattern must descend from
//! distinct level-1 nodes, so larger sets cannot exist). A flipping pattern
//! is a leaf-level itemset whose generalization chain carries a positive or
//! negative label at every level, with the sign alternating level to level.
//!
//! Correlation values are not anti-monotone, so the candidate extension base
//! of each row is the support-frequent itemsets (provably complete). A chain
//! needs a frequent link at every level, so a level that runs out of frequent
//! `(k-1)`-itemsets caps the column limit for every row below. On top of
//! plain support pruning the miner applies:
//!
//! * **Flip filtering** — an entry survives only when its generalization one
//!   level up survived with the opposite sign. Survivors are all that later
//!   rows and the final assembly need, which keeps memory to two rows of
//!   survivor sets.
//! * **Termination of pattern growth (TPG)** — when two vertically adjacent
//!   cells of one column contain no positive itemset, no itemset of that size
//!   or larger can sit on an alternating chain, so the global column limit
//!   drops to `k - 1`.
//! * **Single-item bans (SIBP)** — per cell, walk the level's items in
//!   ascending support order and collect the maximal prefix whose members
//!   appear in no itemset with correlation `>= gamma`; supersets of such an
//!   item stay non-positive at larger sizes. An item banned on two adjacent
//!   levels (the generalization likewise collected one level up) can never
//!   sit on an alternating chain again and is excluded from candidate
//!   generation at larger sizes.
//!
//! With `unsafe_flipping_extension` the extension base is narrowed to flip
//! survivors, mirroring the most aggressive reading of in-cell pruning. That
//! variant can miss patterns whose sub-itemsets are non-flipping and exists
//! for performance comparison only.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::dataset::{count_supports, Dataset, DatasetError, LevelView};
use crate::measures::{corr, CorrLabel, MeasureError, MeasureKind, Thresholds};
use crate::taxonomy::{NodeId, TaxonomyError, TaxonomyTree};

#[derive(Debug, Error)]
pub enum MineError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("threshold list covers {got} levels but the tree height is {expected}")]
    ThresholdLevels { expected: usize, got: usize },
    #[error("taxonomy must be rebalanced before mining")]
    TreeNotRebalanced,
    #[error("cells are from different columns: k={upper} vs k={lower}")]
    ColumnMismatch { upper: usize, lower: usize },
    #[error("expected consecutive levels, got {upper} and {lower}")]
    LevelMismatch { upper: usize, lower: usize },
    #[error("candidate budget of {0} exceeded")]
    CandidateBudgetExceeded(u64),
    #[error("enumeration budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("invalid itemset: {0}")]
    InvalidItemset(String),
}

/// A k-itemset at one taxonomy level: sorted distinct node ids whose level-1
/// ancestors are pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Itemset {
    pub level: usize,
    pub items: Vec<NodeId>,
}

impl Itemset {
    pub fn new(tree: &TaxonomyTree, level: usize, mut items: Vec<NodeId>) -> Result<Self, MineError> {
        items.sort_unstable();
        items.dedup();
        if items.len() < 2 {
            return Err(MineError::InvalidItemset("fewer than 2 distinct items".into()));
        }
        for &v in &items {
            if tree.level(v) != level {
                return Err(MineError::InvalidItemset(format!(
                    "item `{}` is not at level {level}",
                    tree.label(v)
                )));
            }
        }
        if !tree.distinct_level1(&items) {
            return Err(MineError::InvalidItemset(
                "items share a level-1 ancestor".into(),
            ));
        }
        Ok(Itemset { level, items })
    }

    pub fn k(&self) -> usize {
        self.items.len()
    }
}

/// One evaluated candidate of a cell.
#[derive(Debug, Clone)]
pub struct CellEntry {
    pub items: Vec<NodeId>,
    pub support: u32,
    pub corr: f64,
    pub label: CorrLabel,
}

/// Evaluated contents of one search-space cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub h: usize,
    pub k: usize,
    pub entries: Vec<CellEntry>,
    /// Indices of frequent entries (the complete extension base).
    pub ext_survivors: Vec<u32>,
    /// Indices kept by [`flip_filter`]; subset of labeled entries.
    pub flip_survivors: Vec<u32>,
}

impl CellResult {
    pub fn empty(h: usize, k: usize) -> Self {
        CellResult { h, k, entries: Vec::new(), ext_survivors: Vec::new(), flip_survivors: Vec::new() }
    }

    pub fn has_positive(&self) -> bool {
        self.entries.iter().any(|e| e.label == CorrLabel::Positive)
    }
}

/// Pruning switches. The first three default on; the unsafe extension
/// reproduces the aggressive in-cell reading and may lose patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PruneConfig {
    pub flipping: bool,
    pub tpg: bool,
    pub sibp: bool,
    pub unsafe_flipping_extension: bool,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig { flipping: true, tpg: true, sibp: true, unsafe_flipping_extension: false }
    }
}

impl PruneConfig {
    pub fn support_only() -> Self {
        PruneConfig { flipping: false, tpg: false, sibp: false, unsafe_flipping_extension: false }
    }
}

/// One level of a pattern's generalization chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub itemset: Itemset,
    pub corr: f64,
    pub label: CorrLabel,
}

/// A leaf-level itemset with its full alternating chain, bottom link last.
#[derive(Debug, Clone, PartialEq)]
pub struct FlippingPattern {
    pub chain: Vec<ChainLink>,
}

impl FlippingPattern {
    /// The bottom (leaf-level) itemset.
    pub fn leaf(&self) -> &Itemset {
        &self.chain.last().expect("chain is never empty").itemset
    }

    pub fn size(&self) -> usize {
        self.leaf().k()
    }

    /// Lexicographic sort/display key: the leaf labels in sorted order.
    pub fn leaf_labels(&self, tree: &TaxonomyTree) -> Vec<String> {
        let mut labels: Vec<String> =
            self.leaf().items.iter().map(|&v| tree.label(v).to_string()).collect();
        labels.sort_unstable();
        labels
    }
}

/// Sorts patterns by their leaf labels; all miners emit this order.
pub fn sort_patterns(patterns: &mut [FlippingPattern], tree: &TaxonomyTree) {
    patterns.sort_by_cached_key(|p| p.leaf_labels(tree));
}

/// Per-cell instrumentation. `generated` counts join output before single-item
/// bans, so `pruned_sibp + pruned_support + pruned_flipping + survivors`
/// always equals `generated`.
#[derive(Debug, Clone, Copy)]
pub struct CellStats {
    pub h: usize,
    pub k: usize,
    pub generated: u64,
    pub pruned_sibp: u64,
    pub evaluated: u64,
    pub pruned_support: u64,
    pub pruned_flipping: u64,
    pub survivors: u64,
    pub ext_survivors: u64,
}

#[derive(Debug, Clone, Default)]
pub struct MineStats {
    pub cells: Vec<CellStats>,
    /// Full passes over the transaction data (view builds plus cell scans).
    pub scans: u64,
    /// Columns at which the termination check fired, as `(h, k)`.
    pub tpg_events: Vec<(usize, usize)>,
    /// Grid columns removed from the global limit by those events.
    pub columns_cut_by_tpg: u64,
    /// Items excluded from candidate generation by single-item bans.
    pub sibp_banned_items: u64,
    pub patterns: u64,
    pub wall: Duration,
    pub peak_rss_bytes: Option<u64>,
}

impl MineStats {
    pub fn generated_total(&self) -> u64 {
        self.cells.iter().map(|c| c.generated).sum()
    }

    pub fn evaluated_total(&self) -> u64 {
        self.cells.iter().map(|c| c.evaluated).sum()
    }

    pub fn pruned_sibp_total(&self) -> u64 {
        self.cells.iter().map(|c| c.pruned_sibp).sum()
    }

    pub fn pruned_support_total(&self) -> u64 {
        self.cells.iter().map(|c| c.pruned_support).sum()
    }

    pub fn pruned_flipping_total(&self) -> u64 {
        self.cells.iter().map(|c| c.pruned_flipping).sum()
    }
}

/// Execution knobs shared by the mining engines.
#[derive(Debug, Clone, Copy)]
pub struct MineOptions {
    pub threads: usize,
    /// Cap on cumulatively generated candidates; exceeding it is an error.
    pub candidate_budget: u64,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions { threads: 1, candidate_budget: 100_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct MineOutcome {
    pub patterns: Vec<FlippingPattern>,
    pub stats: MineStats,
}

/// Classic ordered join over the `(k-1)`-extension base, then subset,
/// distinct-level-1 and ban filtering. The base must hold sorted id lists of
/// one size; for `k = 2` it holds singletons and the subset check is vacuous.
pub fn generate_candidates(
    tree: &TaxonomyTree,
    h: usize,
    k: usize,
    ext_base_prev: &[Vec<NodeId>],
    sibp_banned: &HashSet<NodeId>,
) -> Vec<Vec<NodeId>> {
    generate_with_stats(tree, h, k, ext_base_prev, sibp_banned).0
}

/// Returns `(candidates, generated)` where `generated` counts candidates
/// before ban filtering.
pub(crate) fn generate_with_stats(
    tree: &TaxonomyTree,
    h: usize,
    k: usize,
    ext_base_prev: &[Vec<NodeId>],
    sibp_banned: &HashSet<NodeId>,
) -> (Vec<Vec<NodeId>>, u64) {
    debug_assert!(k >= 2);
    let mut base: Vec<&[NodeId]> =
        ext_base_prev.iter().filter(|s| s.len() == k - 1).map(|s| s.as_slice()).collect();
    base.sort_unstable();
    base.dedup();
    let member: HashSet<&[NodeId]> = base.iter().copied().collect();

    let mut out = Vec::new();
    let mut generated = 0u64;
    let mut buf: Vec<NodeId> = Vec::with_capacity(k);
    let mut i = 0;
    while i < base.len() {
        // Group of lists sharing the first k-2 items.
        let prefix = &base[i][..k - 2];
        let mut j = i;
        while j < base.len() && &base[j][..k - 2] == prefix {
            j += 1;
        }
        for x in i..j {
            'pair: for y in x + 1..j {
                buf.clear();
                buf.extend_from_slice(base[x]);
                buf.push(base[y][k - 2]);
                // All (k-1)-subsets must be in the base; dropping the last
                // two positions yields the two parents, already present.
                if k >= 3 {
                    let mut sub: Vec<NodeId> = Vec::with_capacity(k - 1);
                    for drop in 0..k - 2 {
                        sub.clear();
                        sub.extend(buf.iter().enumerate().filter(|(p, _)| *p != drop).map(|(_, v)| *v));
                        if !member.contains(sub.as_slice()) {
                            continue 'pair;
                        }
                    }
                }
                if !tree.distinct_level1(&buf) {
                    continue;
                }
                generated += 1;
                if buf.iter().any(|v| sibp_banned.contains(v)) {
                    continue;
                }
                out.push(buf.clone());
            }
        }
        i = j;
    }
    debug_assert!(h >= 1 && h <= tree.height());
    (out, generated)
}

/// Counts supports in one scan of the view and labels every candidate.
/// Flip survivors are left empty; apply [`flip_filter`] afterwards.
pub fn evaluate_cell(
    view: &LevelView,
    k: usize,
    candidates: Vec<Vec<NodeId>>,
    th: &Thresholds,
    kind: MeasureKind,
    threads: usize,
) -> Result<CellResult, MineError> {
    let h = view.h();
    let n = view.n();
    let table = count_supports(view, &candidates, threads)?;
    let min_count = th.min_count(h, n);
    let mut entries = Vec::with_capacity(candidates.len());
    let mut ext_survivors = Vec::new();
    let mut sups_buf: Vec<u64> = Vec::with_capacity(k.max(2));
    for (i, items) in candidates.into_iter().enumerate() {
        let support = table.count(i);
        sups_buf.clear();
        sups_buf.extend(items.iter().map(|&v| view.support(v) as u64));
        let value = corr(kind, support as u64, &sups_buf)?;
        let label = th.classify(h, value, support as u64, n);
        if support as u64 >= min_count {
            ext_survivors.push(entries.len() as u32);
        }
        entries.push(CellEntry { items, support, corr: value, label });
    }
    Ok(CellResult { h, k, entries, ext_survivors, flip_survivors: Vec::new() })
}

/// Marks flip survivors. At level 1 every labeled entry survives (a chain may
/// open with either sign); deeper entries survive only when their
/// generalization one level up survived with the opposite label. A missing
/// parent cell means nothing upstream survived.
pub fn flip_filter(
    cell: &mut CellResult,
    parent: Option<&CellResult>,
    tree: &TaxonomyTree,
) -> Result<(), MineError> {
    if cell.h == 1 {
        cell.flip_survivors = cell
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.label != CorrLabel::Neither)
            .map(|(i, _)| i as u32)
            .collect();
        return Ok(());
    }
    let parent_map: HashMap<&[NodeId], CorrLabel> = match parent {
        Some(p) => {
            if p.h + 1 != cell.h {
                return Err(MineError::LevelMismatch { upper: p.h, lower: cell.h });
            }
            if p.k != cell.k {
                return Err(MineError::ColumnMismatch { upper: p.k, lower: cell.k });
            }
            p.flip_survivors
                .iter()
                .map(|&i| {
                    let e = &p.entries[i as usize];
                    (e.items.as_slice(), e.label)
                })
                .collect()
        }
        None => HashMap::new(),
    };
    let mut survivors = Vec::new();
    for (i, e) in cell.entries.iter().enumerate() {
        let Some(opposite) = e.label.opposite() else { continue };
        let up = tree.generalize_sorted(&e.items, cell.h - 1)?;
        if parent_map.get(up.as_slice()) == Some(&opposite) {
            survivors.push(i as u32);
        }
    }
    cell.flip_survivors = survivors;
    Ok(())
}

/// True when neither cell holds a positive entry. An empty cell is vacuously
/// non-positive (whatever it would have held is infrequent or already proven
/// non-positive), which subsumes the all-infrequent break.
pub fn tpg_check(cell_upper: &CellResult, cell_lower: &CellResult) -> Result<bool, MineError> {
    if cell_upper.k != cell_lower.k {
        return Err(MineError::ColumnMismatch { upper: cell_upper.k, lower: cell_lower.k });
    }
    if cell_upper.h + 1 != cell_lower.h {
        return Err(MineError::LevelMismatch { upper: cell_upper.h, lower: cell_lower.h });
    }
    Ok(!cell_upper.has_positive() && !cell_lower.has_positive())
}

/// The level's removable-item set `R_h`: the maximal prefix of items in
/// ascending support order (ids break ties) whose members occur in no
/// evaluated itemset with correlation `>= gamma`. Items in no evaluated
/// itemset count as correlation 0.
pub fn sibp_update(view: &LevelView, cell: &CellResult, gamma: f64) -> BTreeSet<NodeId> {
    let mut max_corr: HashMap<NodeId, f64> = HashMap::new();
    for e in &cell.entries {
        for &v in &e.items {
            let slot = max_corr.entry(v).or_insert(0.0);
            if e.corr > *slot {
                *slot = e.corr;
            }
        }
    }
    let mut r = BTreeSet::new();
    for v in view.items_by_support_asc() {
        if max_corr.get(&v).copied().unwrap_or(0.0) < gamma {
            r.insert(v);
        } else {
            break;
        }
    }
    r
}

/// Items of `r_lower` whose generalization lies in `r_upper`; these are
/// banned from candidate generation at their level for all larger sizes.
pub fn sibp_ban(
    r_upper: &BTreeSet<NodeId>,
    r_lower: &BTreeSet<NodeId>,
    tree: &TaxonomyTree,
) -> Result<BTreeSet<NodeId>, MineError> {
    if r_upper.is_empty() || r_lower.is_empty() {
        return Ok(BTreeSet::new());
    }
    let upper_level = tree.level(*r_upper.iter().next().expect("non-empty"));
    let lower_level = tree.level(*r_lower.iter().next().expect("non-empty"));
    if upper_level + 1 != lower_level
        || r_upper.iter().any(|&v| tree.level(v) != upper_level)
        || r_lower.iter().any(|&v| tree.level(v) != lower_level)
    {
        return Err(MineError::LevelMismatch { upper: upper_level, lower: lower_level });
    }
    let mut banned = BTreeSet::new();
    for &v in r_lower {
        if r_upper.contains(&tree.ancestor_at_level(v, upper_level)?) {
            banned.insert(v);
        }
    }
    Ok(banned)
}

/// Reconstructs full chains from per-row flip-surviving cells: `rows[h - 1]`
/// holds the level-h cells. A pattern is emitted for a bottom-row survivor
/// exactly when every generalization of it survived its own row.
pub fn assemble_patterns(rows: &[Vec<CellResult>], tree: &TaxonomyTree) -> Vec<FlippingPattern> {
    let mut maps: Vec<HashMap<Vec<NodeId>, (f64, CorrLabel)>> = Vec::with_capacity(rows.len());
    for row in rows {
        let mut map = HashMap::new();
        for cell in row {
            for &i in &cell.flip_survivors {
                let e = &cell.entries[i as usize];
                map.insert(e.items.clone(), (e.corr, e.label));
            }
        }
        maps.push(map);
    }
    let mut patterns = Vec::new();
    if let Some(last) = maps.last() {
        for items in last.keys() {
            if let Some(chain) = walk_chain(&maps, tree, items) {
                patterns.push(FlippingPattern { chain });
            }
        }
    }
    sort_patterns(&mut patterns, tree);
    patterns
}

/// Checks the alternating-chain condition for one leaf-level itemset against
/// per-level `(corr, label)` maps, returning the chain when it holds.
pub(crate) fn walk_chain(
    levels: &[HashMap<Vec<NodeId>, (f64, CorrLabel)>],
    tree: &TaxonomyTree,
    bottom_items: &[NodeId],
) -> Option<Vec<ChainLink>> {
    let h_max = levels.len();
    let mut chain = Vec::with_capacity(h_max);
    let mut prev_label: Option<CorrLabel> = None;
    for h in 1..=h_max {
        let items = if h == h_max {
            bottom_items.to_vec()
        } else {
            tree.generalize_sorted(bottom_items, h).ok()?
        };
        let &(value, label) = levels[h - 1].get(&items)?;
        if label == CorrLabel::Neither || prev_label == Some(label) {
            return None;
        }
        prev_label = Some(label);
        chain.push(ChainLink { itemset: Itemset { level: h, items }, corr: value, label });
    }
    Some(chain)
}

/// Reads the process peak resident set from the kernel, if available.
pub(crate) fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: u64 = rest.trim().trim_end_matches("kB").trim().parse().ok()?;
            return Some(kb * 1024);
        }
    }
    None
}

/// Per-column residue kept while sweeping the next row.
struct ColMeta {
    has_positive: bool,
    r_set: BTreeSet<NodeId>,
}

struct Run<'a> {
    tree: &'a TaxonomyTree,
    th: &'a Thresholds,
    kind: MeasureKind,
    cfg: PruneConfig,
    opts: MineOptions,
    views: Vec<LevelView>,
    freq_items: Vec<Vec<NodeId>>,
    banned: Vec<HashSet<NodeId>>,
    /// Per-level `(corr, label)` maps of surviving entries, for assembly.
    flip_maps: Vec<HashMap<Vec<NodeId>, (f64, CorrLabel)>>,
    k_limit: usize,
    budget_used: u64,
    stats: MineStats,
}

impl<'a> Run<'a> {
    fn charge_budget(&mut self, generated: u64) -> Result<(), MineError> {
        self.budget_used = self.budget_used.saturating_add(generated);
        if self.budget_used > self.opts.candidate_budget {
            return Err(MineError::CandidateBudgetExceeded(self.opts.candidate_budget));
        }
        Ok(())
    }

    /// Generates, evaluates and filters one cell, updating bans and stats.
    /// `parent` carries the previous row's column state when that row exists.
    fn process_cell(
        &mut self,
        h: usize,
        k: usize,
        base: &[Vec<NodeId>],
        parent: Option<&ColMeta>,
    ) -> Result<(CellResult, ColMeta), MineError> {
        let (candidates, generated) =
            generate_with_stats(self.tree, h, k, base, &self.banned[h - 1]);
        self.charge_budget(generated)?;
        let pruned_sibp = generated - candidates.len() as u64;
        let mut cell =
            evaluate_cell(&self.views[h - 1], k, candidates, self.th, self.kind, self.opts.threads)?;
        self.stats.scans += 1;

        if self.cfg.flipping {
            if h == 1 {
                flip_filter(&mut cell, None, self.tree)?;
            } else {
                // Survival against the previous row's merged survivor map; a
                // column that row never reached contributes nothing.
                let map = &self.flip_maps[h - 2];
                let mut survivors = Vec::new();
                for (i, e) in cell.entries.iter().enumerate() {
                    let Some(opposite) = e.label.opposite() else { continue };
                    let up = self.tree.generalize_sorted(&e.items, h - 1)?;
                    if map.get(&up).map(|&(_, l)| l) == Some(opposite) {
                        survivors.push(i as u32);
                    }
                }
                cell.flip_survivors = survivors;
            }
        } else {
            // Without flip filtering every labeled entry is retained and the
            // alternation check moves to assembly.
            cell.flip_survivors = cell
                .entries
                .iter()
                .enumerate()
                .filter(|(_, e)| e.label != CorrLabel::Neither)
                .map(|(i, _)| i as u32)
                .collect();
        }

        for &i in &cell.flip_survivors {
            let e = &cell.entries[i as usize];
            self.flip_maps[h - 1].insert(e.items.clone(), (e.corr, e.label));
        }

        let r_set = if self.cfg.sibp {
            let r = sibp_update(&self.views[h - 1], &cell, self.th.gamma());
            if let Some(p) = parent {
                let bans = sibp_ban(&p.r_set, &r, self.tree)?;
                self.stats.sibp_banned_items +=
                    bans.iter().filter(|v| !self.banned[h - 1].contains(v)).count() as u64;
                self.banned[h - 1].extend(bans);
            }
            r
        } else {
            BTreeSet::new()
        };

        let evaluated = cell.entries.len() as u64;
        let pruned_support = evaluated - cell.ext_survivors.len() as u64;
        let survivors = cell.flip_survivors.len() as u64;
        let pruned_flipping = cell.ext_survivors.len() as u64 - survivors;
        self.stats.cells.push(CellStats {
            h,
            k,
            generated,
            pruned_sibp,
            evaluated,
            pruned_support,
            pruned_flipping,
            survivors,
            ext_survivors: cell.ext_survivors.len() as u64,
        });

        let has_positive = cell.has_positive();
        Ok((cell, ColMeta { has_positive, r_set }))
    }

    fn ext_base(&self, cell: &CellResult) -> Vec<Vec<NodeId>> {
        let idxs = if self.cfg.flipping && self.cfg.unsafe_flipping_extension {
            &cell.flip_survivors
        } else {
            &cell.ext_survivors
        };
        idxs.iter().map(|&i| cell.entries[i as usize].items.clone()).collect()
    }

    fn singletons(&self, h: usize) -> Vec<Vec<NodeId>> {
        self.freq_items[h - 1].iter().map(|&v| vec![v]).collect()
    }

    fn fire_tpg(&mut self, h: usize, k: usize) {
        self.stats.tpg_events.push((h, k));
        self.stats.columns_cut_by_tpg += (self.k_limit - (k - 1)) as u64;
        self.k_limit = k - 1;
    }

    /// A drained extension base entering column `k` means the level had no
    /// frequent `(k-1)`-itemsets (outside of banned ones, whose chains are
    /// dead anyway), so no pattern of size `>= k-1` exists and lower rows
    /// need not go that wide. Skipped under the unsafe extension, whose base
    /// is not frequency-complete.
    fn cap_on_drained_base(&mut self, k: usize) {
        if !(self.cfg.flipping && self.cfg.unsafe_flipping_extension) {
            self.k_limit = self.k_limit.min(k.saturating_sub(2));
        }
    }

    /// Zigzag over the two top rows: Q[1][2], Q[2][2], Q[1][3], Q[2][3], ...
    /// until the termination check fires or an extension base drains.
    fn zigzag_top_rows(&mut self) -> Result<HashMap<usize, ColMeta>, MineError> {
        let mut row2: HashMap<usize, ColMeta> = HashMap::new();
        let mut base1 = self.singletons(1);
        let mut base2 = self.singletons(2);
        let mut k = 2;
        while k <= self.k_limit {
            if base1.is_empty() || base2.is_empty() {
                self.cap_on_drained_base(k);
                break;
            }
            let (cell1, meta1) = self.process_cell(1, k, &base1, None)?;
            let (cell2, meta2) = self.process_cell(2, k, &base2, Some(&meta1))?;
            let fire = self.cfg.tpg && !meta1.has_positive && !meta2.has_positive;
            base1 = self.ext_base(&cell1);
            base2 = self.ext_base(&cell2);
            row2.insert(k, meta2);
            if fire {
                self.fire_tpg(2, k);
                break;
            }
            k += 1;
        }
        Ok(row2)
    }

    /// Row-wise sweep for level `h >= 3` (also level 1 of a height-1 tree).
    fn sweep_row(
        &mut self,
        h: usize,
        prev: Option<&HashMap<usize, ColMeta>>,
    ) -> Result<HashMap<usize, ColMeta>, MineError> {
        let mut row: HashMap<usize, ColMeta> = HashMap::new();
        let mut base = self.singletons(h);
        let mut k = 2;
        while k <= self.k_limit {
            if base.is_empty() {
                self.cap_on_drained_base(k);
                break;
            }
            let parent = prev.and_then(|m| m.get(&k));
            let (cell, meta) = self.process_cell(h, k, &base, parent)?;
            // With the row above evaluated, a vacant parent column is
            // vacuously non-positive.
            let parent_positive = parent.is_some_and(|p| p.has_positive);
            let fire = self.cfg.tpg && prev.is_some() && !parent_positive && !meta.has_positive;
            base = self.ext_base(&cell);
            row.insert(k, meta);
            if fire {
                self.fire_tpg(h, k);
                break;
            }
            k += 1;
        }
        Ok(row)
    }
}

/// Mines all flipping patterns of `ds` under `th`, returning them with run
/// statistics. Output order is lexicographic by leaf labels and independent
/// of `opts.threads`.
pub fn mine_flipping(
    ds: &Dataset,
    tree: &TaxonomyTree,
    th: &Thresholds,
    kind: MeasureKind,
    cfg: PruneConfig,
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

    let mut views = Vec::with_capacity(height);
    for h in 1..=height {
        views.push(ds.level_view(tree, h)?);
        stats.scans += 1;
    }
    let freq_items: Vec<Vec<NodeId>> = (1..=height)
        .map(|h| {
            let min_count = th.min_count(h, n);
            tree.level_nodes(h)
                .expect("level in range")
                .iter()
                .copied()
                .filter(|&v| views[h - 1].support(v) as u64 >= min_count)
                .collect()
        })
        .collect();

    let mut run = Run {
        tree,
        th,
        kind,
        cfg,
        opts,
        views,
        freq_items,
        banned: vec![HashSet::new(); height],
        flip_maps: vec![HashMap::new(); height],
        k_limit: k_struct,
        budget_used: 0,
        stats,
    };

    if height == 1 {
        run.sweep_row(1, None)?;
    } else {
        let mut prev_row = run.zigzag_top_rows()?;
        // A row without survivors breaks every chain crossing it.
        if cfg.flipping && run.flip_maps[..2].iter().any(|m| m.is_empty()) {
            return Ok(finish(run, start, Vec::new()));
        }
        for h in 3..=height {
            prev_row = run.sweep_row(h, Some(&prev_row))?;
            if cfg.flipping && run.flip_maps[h - 1].is_empty() {
                return Ok(finish(run, start, Vec::new()));
            }
        }
    }

    let mut patterns = Vec::new();
    for items in run.flip_maps[height - 1].keys() {
        if let Some(chain) = walk_chain(&run.flip_maps, tree, items) {
            patterns.push(FlippingPattern { chain });
        }
    }
    sort_patterns(&mut patterns, tree);
    Ok(finish(run, start, patterns))
}

fn finish(run: Run<'_>, start: Instant, patterns: Vec<FlippingPattern>) -> MineOutcome {
    let mut stats = run.stats;
    stats.patterns = patterns.len() as u64;
    stats.wall = start.elapsed();
    stats.peak_rss_bytes = peak_rss_bytes();
    MineOutcome { patterns, stats }
}
