//! Item taxonomy: an is-a tree mapping every item to one generalization per
//! abstraction level.
//!
//! The root stands for "all items" and is excluded from the level numbering:
//! its children are level 1, and the height `H` is the depth of the deepest
//! leaf. After [`TaxonomyTree::rebalance`] every leaf sits at level `H`
//! exactly; shallow leaves gain chains of copy nodes that share the original
//! label, so reports (which print labels) never expose them.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::BufRead;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TaxonomyError {
    #[error("taxonomy edge list is empty")]
    EmptyInput,
    #[error("taxonomy contains a cycle through `{0}`")]
    CycleDetected(String),
    #[error("node `{0}` is listed with more than one parent")]
    MultipleParents(String),
    #[error("node `{0}` is not reachable from the root")]
    DisconnectedNode(String),
    #[error("level {level} out of range 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("line {line}: expected `child<TAB>parent`")]
    Malformed { line: usize },
}

/// Dense node identifier; doubles as an index into per-node arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> NodeId {
        NodeId(u32::try_from(i).expect("node count fits in u32"))
    }
}

#[derive(Debug, Clone)]
struct NodeInfo {
    label: String,
    parent: Option<NodeId>,
    level: usize,
    is_copy: bool,
}

/// Immutable taxonomy tree. Construct with [`build_taxonomy`], then
/// [`TaxonomyTree::rebalance`] before binding transactions to it.
#[derive(Debug, Clone)]
pub struct TaxonomyTree {
    nodes: Vec<NodeInfo>,
    height: usize,
    /// `levels[h - 1]` lists the nodes of level `h` in `NodeId` order.
    levels: Vec<Vec<NodeId>>,
    leaves: Vec<NodeId>,
    /// Any node by label (copies excluded; labels are unique among originals).
    by_label: HashMap<String, NodeId>,
    /// Leaf by label; after rebalancing this resolves to the copy-chain
    /// terminal for originally shallow leaves.
    leaf_by_label: HashMap<String, NodeId>,
    /// `ancestors[v][h - 1]` is the ancestor of `v` at level `h` (self last).
    ancestors: Vec<Vec<NodeId>>,
}

/// Reserved parent label denoting the (virtual) root in edge lists.
pub const ROOT_LABEL: &str = "ROOT";

/// Builds and validates a tree from `(child, parent)` label pairs.
///
/// The root is either the reserved label `ROOT` used in parent position, or
/// the unique label that never appears as a child. Validation order: cycles,
/// then duplicate parents, then reachability.
pub fn build_taxonomy(edges: &[(String, String)]) -> Result<TaxonomyTree, TaxonomyError> {
    if edges.is_empty() {
        return Err(TaxonomyError::EmptyInput);
    }

    // Labels in first-appearance order keep everything deterministic.
    let mut order: Vec<String> = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for (c, p) in edges {
        for l in [c.as_str(), p.as_str()] {
            if l != ROOT_LABEL && seen.insert(l) {
                order.push(l.to_string());
            }
        }
    }

    let mut parents: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    for (c, p) in edges {
        let ps = parents.entry(c).or_default();
        if !ps.contains(&p.as_str()) {
            ps.push(p);
        }
        let cs = children.entry(p).or_default();
        if !cs.contains(&c.as_str()) {
            cs.push(c);
        }
    }

    detect_cycle(&order, &parents)?;

    for label in &order {
        if parents.get(label.as_str()).map_or(0, |v| v.len()) > 1 {
            return Err(TaxonomyError::MultipleParents(label.clone()));
        }
    }

    // Root selection: the ROOT keyword wins; otherwise the first label that
    // only ever appears in parent position.
    let explicit_root = edges.iter().any(|(_, p)| p == ROOT_LABEL);
    let root: &str = if explicit_root {
        ROOT_LABEL
    } else {
        order
            .iter()
            .find(|l| !parents.contains_key(l.as_str()))
            .map(|l| l.as_str())
            .expect("acyclic edge set has a parentless label")
    };

    // Breadth-first from the root: ids are dense and level-contiguous.
    let mut id_of: HashMap<&str, NodeId> = HashMap::new();
    let mut nodes: Vec<NodeInfo> = Vec::new();
    let mut levels: Vec<Vec<NodeId>> = Vec::new();
    let mut queue: VecDeque<(&str, Option<NodeId>, usize)> = VecDeque::new();
    for &c in children.get(root).map(|v| v.as_slice()).unwrap_or(&[]) {
        queue.push_back((c, None, 1));
    }
    while let Some((label, parent, level)) = queue.pop_front() {
        let id = NodeId(nodes.len() as u32);
        id_of.insert(label, id);
        nodes.push(NodeInfo { label: label.to_string(), parent, level, is_copy: false });
        if levels.len() < level {
            levels.push(Vec::new());
        }
        levels[level - 1].push(id);
        for &c in children.get(label).map(|v| v.as_slice()).unwrap_or(&[]) {
            queue.push_back((c, Some(id), level + 1));
        }
    }

    if let Some(missing) = order.iter().find(|l| l.as_str() != root && !id_of.contains_key(l.as_str())) {
        return Err(TaxonomyError::DisconnectedNode(missing.clone()));
    }
    if nodes.is_empty() {
        // Root with no child edges cannot happen (every edge names a child),
        // but a lone self-rooted label would land here.
        return Err(TaxonomyError::EmptyInput);
    }

    let mut tree = TaxonomyTree {
        height: levels.len(),
        nodes,
        levels,
        leaves: Vec::new(),
        by_label: HashMap::new(),
        leaf_by_label: HashMap::new(),
        ancestors: Vec::new(),
    };
    tree.reindex();
    Ok(tree)
}

fn detect_cycle(
    order: &[String],
    parents: &HashMap<&str, Vec<&str>>,
) -> Result<(), TaxonomyError> {
    // Iterative DFS over child -> parent edges; gray nodes are on the stack.
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color: HashMap<&str, u8> = HashMap::new();
    for start in order {
        if color.get(start.as_str()).copied().unwrap_or(WHITE) != WHITE {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(start.as_str(), 0)];
        color.insert(start.as_str(), GRAY);
        while let Some(&(label, next)) = stack.last() {
            let outgoing = parents.get(label).map(|v| v.as_slice()).unwrap_or(&[]);
            if next >= outgoing.len() {
                color.insert(label, BLACK);
                stack.pop();
                continue;
            }
            stack.last_mut().unwrap().1 += 1;
            let target = outgoing[next];
            if target == ROOT_LABEL {
                continue;
            }
            match color.get(target).copied().unwrap_or(WHITE) {
                WHITE => {
                    color.insert(target, GRAY);
                    stack.push((target, 0));
                }
                GRAY => return Err(TaxonomyError::CycleDetected(target.to_string())),
                _ => {}
            }
        }
    }
    Ok(())
}

impl TaxonomyTree {
    /// Recomputes leaves, label indexes and ancestor tables from `nodes`.
    fn reindex(&mut self) {
        let mut has_child = vec![false; self.nodes.len()];
        for info in &self.nodes {
            if let Some(p) = info.parent {
                has_child[p.index()] = true;
            }
        }
        self.leaves = (0..self.nodes.len())
            .filter(|&i| !has_child[i])
            .map(|i| NodeId(i as u32))
            .collect();

        self.by_label.clear();
        self.leaf_by_label.clear();
        for (i, info) in self.nodes.iter().enumerate() {
            if !info.is_copy {
                self.by_label.insert(info.label.clone(), NodeId(i as u32));
            }
        }
        for &leaf in &self.leaves {
            self.leaf_by_label.insert(self.nodes[leaf.index()].label.clone(), leaf);
        }

        self.ancestors = vec![Vec::new(); self.nodes.len()];
        for i in 0..self.nodes.len() {
            let id = NodeId(i as u32);
            let mut chain = Vec::with_capacity(self.nodes[i].level);
            let mut cur = Some(id);
            while let Some(v) = cur {
                chain.push(v);
                cur = self.nodes[v.index()].parent;
            }
            chain.reverse();
            debug_assert_eq!(chain.len(), self.nodes[i].level);
            self.ancestors[i] = chain;
        }
    }

    /// Pads every shallow leaf with a chain of copy nodes down to level `H`.
    /// Already balanced trees come back unchanged.
    pub fn rebalance(mut self) -> TaxonomyTree {
        let height = self.height;
        let shallow: Vec<NodeId> =
            self.leaves.iter().copied().filter(|&l| self.nodes[l.index()].level < height).collect();
        if shallow.is_empty() {
            return self;
        }
        for leaf in shallow {
            let label = self.nodes[leaf.index()].label.clone();
            let start = self.nodes[leaf.index()].level;
            let mut parent = leaf;
            for level in start + 1..=height {
                let id = NodeId(self.nodes.len() as u32);
                self.nodes.push(NodeInfo {
                    label: label.clone(),
                    parent: Some(parent),
                    level,
                    is_copy: true,
                });
                self.levels[level - 1].push(id);
                parent = id;
            }
        }
        self.reindex();
        self
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.nodes[v.index()].label
    }

    pub fn level(&self, v: NodeId) -> usize {
        self.nodes[v.index()].level
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v.index()].parent
    }

    pub fn is_copy(&self, v: NodeId) -> bool {
        self.nodes[v.index()].is_copy
    }

    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn is_balanced(&self) -> bool {
        self.leaves.iter().all(|&l| self.nodes[l.index()].level == self.height)
    }

    /// Looks up any original node by label.
    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.by_label.get(label).copied()
    }

    /// Resolves an item label to its leaf node (the copy-chain terminal for
    /// rebalanced shallow leaves).
    pub fn resolve_leaf(&self, label: &str) -> Option<NodeId> {
        self.leaf_by_label.get(label).copied()
    }

    /// Unique ancestor of `v` at level `h` (`v` itself when `level(v) == h`).
    pub fn ancestor_at_level(&self, v: NodeId, h: usize) -> Result<NodeId, TaxonomyError> {
        let level = self.nodes[v.index()].level;
        if h < 1 || h > level {
            return Err(TaxonomyError::LevelOutOfRange { level: h, max: level });
        }
        Ok(self.ancestors[v.index()][h - 1])
    }

    /// All nodes of level `h`, in `NodeId` order.
    pub fn level_nodes(&self, h: usize) -> Result<&[NodeId], TaxonomyError> {
        if h < 1 || h > self.height {
            return Err(TaxonomyError::LevelOutOfRange { level: h, max: self.height });
        }
        Ok(&self.levels[h - 1])
    }

    /// Item-wise generalization of a sorted id list to level `h`, re-sorted.
    pub fn generalize_sorted(&self, items: &[NodeId], h: usize) -> Result<Vec<NodeId>, TaxonomyError> {
        let mut out = Vec::with_capacity(items.len());
        for &v in items {
            out.push(self.ancestor_at_level(v, h)?);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// True when the items have pairwise distinct level-1 ancestors.
    pub fn distinct_level1(&self, items: &[NodeId]) -> bool {
        let mut tops: Vec<NodeId> = Vec::with_capacity(items.len());
        for &v in items {
            match self.ancestor_at_level(v, 1) {
                Ok(t) => tops.push(t),
                Err(_) => return false,
            }
        }
        tops.sort_unstable();
        tops.windows(2).all(|w| w[0] != w[1])
    }
}

/// Reads `child<TAB>parent` lines; `#` comments and blank lines are skipped.
pub fn parse_edges<R: BufRead>(reader: R) -> Result<Vec<(String, String)>, TaxonomyError> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|_| TaxonomyError::Malformed { line: idx + 1 })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split('\t');
        let child = parts.next().map(str::trim).unwrap_or_default();
        let parent = parts.next().map(str::trim).unwrap_or_default();
        if child.is_empty() || parent.is_empty() || parts.next().is_some() {
            return Err(TaxonomyError::Malformed { line: idx + 1 });
        }
        edges.push((child.to_string(), parent.to_string()));
    }
    Ok(edges)
}
