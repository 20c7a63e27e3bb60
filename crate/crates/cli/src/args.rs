//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "flipcorr",
    version,
    about = "Mine flipping correlation patterns from transactions with an item taxonomy"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Mine flipping patterns from a transaction file and taxonomy.
    Mine(MineArgs),
    /// Run the pruning ladder (basic, flipping, +tpg, full) and compare.
    Compare(CompareArgs),
    /// Generate a synthetic taxonomy and transaction file.
    Generate(GenerateArgs),
}

#[derive(Args)]
pub struct ThresholdArgs {
    /// Correlation measure: allconf|coherence|cosine|kulc|maxconf.
    #[arg(long, default_value = "kulc")]
    pub measure: String,
    /// Positive correlation threshold in (0, 1].
    #[arg(long)]
    pub gamma: f64,
    /// Negative correlation threshold in [0, 1), below gamma.
    #[arg(long)]
    pub epsilon: f64,
    /// Per-level minimum supports, top level first, e.g. 0.01,0.001,0.0005.
    #[arg(long, value_delimiter = ',')]
    pub minsup: Option<Vec<f64>>,
    /// Built-in four-level profile thr1..thr10 instead of --minsup.
    #[arg(long)]
    pub minsup_profile: Option<String>,
}

#[derive(Args)]
pub struct MineArgs {
    /// Transaction file: one transaction of leaf labels per line.
    #[arg(long)]
    pub transactions: PathBuf,
    /// Taxonomy file: child<TAB>parent per line, parent ROOT for top nodes.
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// Pattern output file.
    #[arg(long)]
    pub output: PathBuf,
    /// Statistics output file (omit to skip).
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Mining engine: flipper|basic|oracle.
    #[arg(long, default_value = "flipper")]
    pub engine: String,
    /// Disable flip filtering between rows.
    #[arg(long)]
    pub no_flipping: bool,
    /// Disable termination of pattern growth.
    #[arg(long)]
    pub no_tpg: bool,
    /// Disable single-item based pruning.
    #[arg(long)]
    pub no_sibp: bool,
    /// Extend candidates from flip survivors only (may miss patterns).
    #[arg(long)]
    pub unsafe_flipping_extension: bool,
    /// Worker threads for support counting.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Abort after this many generated candidates.
    #[arg(long, default_value_t = 100_000_000)]
    pub candidate_budget: u64,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub transactions: PathBuf,
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// Also write the agreed pattern set (from the full configuration) here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Statistics of the full configuration (requires --output).
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Include the exhaustive oracle as a fifth row (small inputs only).
    #[arg(long)]
    pub with_oracle: bool,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = 100_000_000)]
    pub candidate_budget: u64,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Output path for the generated transaction file.
    #[arg(long)]
    pub transactions: PathBuf,
    /// Output path for the generated taxonomy file.
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// Number of transactions.
    #[arg(long, default_value_t = 100_000)]
    pub n: u64,
    /// Mean transaction width.
    #[arg(long, default_value_t = 5.0)]
    pub width: f64,
    /// Number of distinct items (taxonomy leaves).
    #[arg(long, default_value_t = 1000)]
    pub items: u32,
    /// Taxonomy height.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Number of level-1 categories.
    #[arg(long, default_value_t = 10)]
    pub roots: u32,
    /// Children per internal node.
    #[arg(long, default_value_t = 5)]
    pub fanout: u32,
    /// Size of the potential-itemset pool.
    #[arg(long, default_value_t = 200)]
    pub patterns: u32,
    /// Mean potential-itemset length.
    #[arg(long, default_value_t = 4.0)]
    pub pattern_len: f64,
    /// Per-item drop probability when instantiating a potential itemset.
    #[arg(long, default_value_t = 0.25)]
    pub corruption: f64,
    /// Probability that a pattern item stays in the first item's category.
    #[arg(long, default_value_t = 0.5)]
    pub share_bias: f64,
    /// Generator seed; identical seeds give identical bytes.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}
