//! Mining of flipping correlation patterns: itemsets whose null-invariant
//! correlation label alternates between positive and negative across every
//! level of an item taxonomy.
//!
//! The crate is organized around the data flow of a mining run:
//!
//! * [`taxonomy`] — build, validate and rebalance the is-a hierarchy.
//! * [`dataset`] — load transactions, generalize them per level, count
//!   itemset supports exactly.
//! * [`measures`] — the five null-invariant correlation measures, label
//!   thresholds, and the expectation-based `lift` demonstration.
//! * [`miner`] — the direct pattern miner with correlation-based pruning.
//! * [`baseline`] — the support-only reference miner and the exhaustive
//!   verification oracle.
//! * [`datagen`] — deterministic synthetic taxonomy/transaction generator.

pub mod baseline;
pub mod datagen;
pub mod dataset;
pub mod measures;
pub mod miner;
pub mod taxonomy;

pub use baseline::{mine_basic, oracle_enumerate, validate_pattern, OracleResult};
pub use datagen::{generate, threshold_profile, GenParams, GeneratedData};
pub use dataset::{count_supports, load_transactions, Dataset, DatasetError, LevelView, SupportTable};
pub use measures::{
    corr, lift_demo, CorrLabel, LiftDemo, LiftVerdict, MeasureError, MeasureKind, Thresholds,
};
pub use miner::{
    assemble_patterns, evaluate_cell, flip_filter, generate_candidates, mine_flipping, sibp_ban,
    sibp_update, sort_patterns, tpg_check, CellEntry, CellResult, CellStats, ChainLink,
    FlippingPattern, Itemset, MineError, MineOptions, MineOutcome, MineStats, PruneConfig,
};
pub use taxonomy::{build_taxonomy, parse_edges, NodeId, TaxonomyError, TaxonomyTree};
