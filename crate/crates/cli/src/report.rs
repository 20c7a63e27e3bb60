//! Pattern and statistics file writers. Both formats are line-oriented TSV
//! and byte-deterministic for fixed inputs and flags, so golden-file diffs
//! stay trivial; volatile values (wall time, memory) go to stderr instead.

use std::io::{self, Write};

use flipcorr::miner::{FlippingPattern, MineStats};
use flipcorr::taxonomy::TaxonomyTree;

/// One pattern per line:
/// `k<TAB>leaf-labels<TAB>h:labels|corr|P-or-N` with one field per level.
/// Labels are comma-joined in lexicographic order; corr carries 6 decimals.
pub fn write_patterns<W: Write>(
    mut w: W,
    patterns: &[FlippingPattern],
    tree: &TaxonomyTree,
) -> io::Result<()> {
    for p in patterns {
        write!(w, "{}\t{}", p.size(), p.leaf_labels(tree).join(","))?;
        for link in &p.chain {
            let mut labels: Vec<&str> =
                link.itemset.items.iter().map(|&v| tree.label(v)).collect();
            labels.sort_unstable();
            write!(
                w,
                "\t{}:{}|{:.6}|{}",
                link.itemset.level,
                labels.join(","),
                link.corr,
                link.label.symbol()
            )?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Run description echoed at the top of a stats file.
pub struct RunMeta<'a> {
    pub engine: &'a str,
    pub measure: &'a str,
    pub gamma: f64,
    pub epsilon: f64,
    pub n_transactions: u64,
    pub height: usize,
}

/// Flat `key<TAB>value` lines, then `tpg<TAB>h<TAB>k` per termination event,
/// then `cell<TAB>h<TAB>k<TAB>generated<TAB>evaluated<TAB>survivors` per cell
/// in processing order.
pub fn write_stats<W: Write>(mut w: W, stats: &MineStats, meta: &RunMeta) -> io::Result<()> {
    writeln!(w, "engine\t{}", meta.engine)?;
    writeln!(w, "measure\t{}", meta.measure)?;
    writeln!(w, "gamma\t{}", meta.gamma)?;
    writeln!(w, "epsilon\t{}", meta.epsilon)?;
    writeln!(w, "n_transactions\t{}", meta.n_transactions)?;
    writeln!(w, "tree_height\t{}", meta.height)?;
    writeln!(w, "patterns\t{}", stats.patterns)?;
    writeln!(w, "generated_total\t{}", stats.generated_total())?;
    writeln!(w, "evaluated_total\t{}", stats.evaluated_total())?;
    writeln!(w, "pruned_support_total\t{}", stats.pruned_support_total())?;
    writeln!(w, "pruned_flipping_total\t{}", stats.pruned_flipping_total())?;
    writeln!(w, "pruned_sibp_total\t{}", stats.pruned_sibp_total())?;
    writeln!(w, "columns_cut_by_tpg\t{}", stats.columns_cut_by_tpg)?;
    writeln!(w, "sibp_banned_items\t{}", stats.sibp_banned_items)?;
    writeln!(w, "scans\t{}", stats.scans)?;
    for &(h, k) in &stats.tpg_events {
        writeln!(w, "tpg\t{h}\t{k}")?;
    }
    for c in &stats.cells {
        writeln!(
            w,
            "cell\t{}\t{}\t{}\t{}\t{}",
            c.h, c.k, c.generated, c.evaluated, c.survivors
        )?;
    }
    Ok(())
}
