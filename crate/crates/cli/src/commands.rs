//! Subcommand implementations and the error-to-exit-code mapping.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use flipcorr::baseline::{mine_basic, oracle_enumerate, OracleResult};
use flipcorr::datagen::{generate, threshold_profile, DatagenError, GenParams};
use flipcorr::dataset::{load_transactions, Dataset};
use flipcorr::measures::{CorrLabel, MeasureKind, Thresholds};
use flipcorr::miner::{
    mine_flipping, CellStats, MineError, MineOptions, MineOutcome, MineStats, PruneConfig,
};
use flipcorr::taxonomy::{build_taxonomy, parse_edges, TaxonomyTree};

use crate::args::{CompareArgs, GenerateArgs, MineArgs, ThresholdArgs};
use crate::report::{write_patterns, write_stats, RunMeta};

/// Exit codes: 1 usage, 2 data, 3 budget or engine disagreement.
pub enum CliError {
    Usage(String),
    Data(String),
    Budget(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Budget(m) => m,
        }
    }
}

fn mine_err(e: MineError) -> CliError {
    match e {
        MineError::CandidateBudgetExceeded(_) | MineError::BudgetExceeded(_) => {
            CliError::Budget(e.to_string())
        }
        MineError::ThresholdLevels { .. } => CliError::Usage(e.to_string()),
        other => CliError::Data(other.to_string()),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))
}

pub struct Inputs {
    pub tree: TaxonomyTree,
    pub ds: Dataset,
    pub th: Thresholds,
    pub kind: MeasureKind,
}

pub fn load_inputs(
    taxonomy: &Path,
    transactions: &Path,
    th_args: &ThresholdArgs,
) -> Result<Inputs, CliError> {
    let edges = parse_edges(open(taxonomy)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", taxonomy.display())))?;
    let tree = build_taxonomy(&edges)
        .map_err(|e| CliError::Data(format!("{}: {e}", taxonomy.display())))?
        .rebalance();

    let kind = MeasureKind::from_str(&th_args.measure).map_err(CliError::Usage)?;
    let minsup: Vec<f64> = match (&th_args.minsup, &th_args.minsup_profile) {
        (Some(list), None) => list.clone(),
        (None, Some(name)) => threshold_profile(name)
            .map_err(|e| CliError::Usage(e.to_string()))?
            .to_vec(),
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "pass either --minsup or --minsup-profile, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage("one of --minsup or --minsup-profile is required".into()))
        }
    };
    if minsup.len() != tree.height() {
        return Err(CliError::Usage(format!(
            "--minsup lists {} levels but the taxonomy height is {}",
            minsup.len(),
            tree.height()
        )));
    }
    let th = Thresholds::new(th_args.gamma, th_args.epsilon, minsup)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let ds = load_transactions(open(transactions)?, &tree)
        .map_err(|e| CliError::Data(format!("{}: {e}", transactions.display())))?;
    Ok(Inputs { tree, ds, th, kind })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Flipper,
    Basic,
    Oracle,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flipper" => Ok(Engine::Flipper),
            "basic" => Ok(Engine::Basic),
            "oracle" => Ok(Engine::Oracle),
            other => Err(format!("unknown engine `{other}` (expected flipper|basic|oracle)")),
        }
    }
}

/// Folds the oracle's exhaustive cells into the shared stats shape so its
/// output files line up with the mining engines.
fn oracle_stats(r: &OracleResult, inputs: &Inputs) -> MineStats {
    let mut stats = MineStats::default();
    let n = inputs.ds.n();
    for cell in &r.cells {
        let evaluated = cell.entries.len() as u64;
        let min_count = inputs.th.min_count(cell.h, n);
        let frequent =
            cell.entries.iter().filter(|e| e.support as u64 >= min_count).count() as u64;
        let labeled =
            cell.entries.iter().filter(|e| e.label != CorrLabel::Neither).count() as u64;
        stats.cells.push(CellStats {
            h: cell.h,
            k: cell.k,
            generated: evaluated,
            pruned_sibp: 0,
            evaluated,
            pruned_support: evaluated - frequent,
            pruned_flipping: frequent - labeled,
            survivors: labeled,
            ext_survivors: frequent,
        });
    }
    // The oracle re-scans the data once per enumerated itemset.
    stats.scans = r.enumerated + inputs.tree.height() as u64;
    stats.patterns = r.patterns.len() as u64;
    stats
}

pub fn run_engine(
    engine: Engine,
    inputs: &Inputs,
    cfg: PruneConfig,
    opts: MineOptions,
) -> Result<MineOutcome, CliError> {
    match engine {
        Engine::Flipper => {
            mine_flipping(&inputs.ds, &inputs.tree, &inputs.th, inputs.kind, cfg, opts)
                .map_err(mine_err)
        }
        Engine::Basic => {
            mine_basic(&inputs.ds, &inputs.tree, &inputs.th, inputs.kind, opts).map_err(mine_err)
        }
        Engine::Oracle => {
            let k_max = inputs
                .tree
                .level_nodes(1)
                .map_err(|e| CliError::Data(e.to_string()))?
                .len();
            let r = oracle_enumerate(
                &inputs.ds,
                &inputs.tree,
                &inputs.th,
                inputs.kind,
                k_max,
                opts.candidate_budget,
            )
            .map_err(mine_err)?;
            let stats = oracle_stats(&r, inputs);
            Ok(MineOutcome { patterns: r.patterns, stats })
        }
    }
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Flipper => "flipper",
        Engine::Basic => "basic",
        Engine::Oracle => "oracle",
    }
}

fn write_outputs(
    output: &Path,
    stats_path: Option<&PathBuf>,
    outcome: &MineOutcome,
    inputs: &Inputs,
    engine: &str,
) -> Result<(), CliError> {
    let mut w = create(output)?;
    write_patterns(&mut w, &outcome.patterns, &inputs.tree)
        .and_then(|()| w.flush())
        .map_err(|e| CliError::Data(format!("writing {}: {e}", output.display())))?;
    if let Some(path) = stats_path {
        let mut w = create(path)?;
        let meta = RunMeta {
            engine,
            measure: inputs.kind.cli_name(),
            gamma: inputs.th.gamma(),
            epsilon: inputs.th.epsilon(),
            n_transactions: inputs.ds.n(),
            height: inputs.tree.height(),
        };
        write_stats(&mut w, &outcome.stats, &meta)
            .and_then(|()| w.flush())
            .map_err(|e| CliError::Data(format!("writing {}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn cmd_mine(args: &MineArgs) -> Result<(), CliError> {
    let engine = Engine::from_str(&args.engine).map_err(CliError::Usage)?;
    let inputs = load_inputs(&args.taxonomy, &args.transactions, &args.thresholds)?;
    let cfg = PruneConfig {
        flipping: !args.no_flipping,
        tpg: !args.no_tpg,
        sibp: !args.no_sibp,
        unsafe_flipping_extension: args.unsafe_flipping_extension,
    };
    let opts = MineOptions { threads: args.threads, candidate_budget: args.candidate_budget };
    let outcome = run_engine(engine, &inputs, cfg, opts)?;
    write_outputs(&args.output, args.stats.as_ref(), &outcome, &inputs, engine_name(engine))?;
    eprintln!(
        "{}: {} patterns, {} candidates evaluated, {} ms{}",
        engine_name(engine),
        outcome.patterns.len(),
        outcome.stats.evaluated_total(),
        outcome.stats.wall.as_millis(),
        outcome
            .stats
            .peak_rss_bytes
            .map(|b| format!(", peak rss {} MiB", b / (1 << 20)))
            .unwrap_or_default(),
    );
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let params = GenParams {
        n_transactions: args.n,
        avg_width: args.width,
        n_items: args.items,
        n_levels: args.levels,
        n_roots: args.roots,
        fanout: args.fanout,
        n_patterns: args.patterns,
        avg_pattern_len: args.pattern_len,
        corruption_prob: args.corruption,
        share_bias: args.share_bias,
        seed: args.seed,
    };
    let data = generate(&params).map_err(|e| match e {
        DatagenError::InvalidParams(_) => CliError::Usage(e.to_string()),
        DatagenError::UnknownProfile(_) => CliError::Usage(e.to_string()),
    })?;
    let mut w = create(&args.taxonomy)?;
    data.write_taxonomy(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| CliError::Data(format!("writing {}: {e}", args.taxonomy.display())))?;
    let mut w = create(&args.transactions)?;
    data.write_transactions(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| CliError::Data(format!("writing {}: {e}", args.transactions.display())))?;
    eprintln!(
        "generated {} transactions over {} items into {}",
        args.n,
        args.items,
        args.transactions.display()
    );
    Ok(())
}

/// One engine run of the comparison ladder.
struct CompareRow {
    name: &'static str,
    generated: u64,
    evaluated: u64,
    pruned_support: u64,
    pruned_flipping: u64,
    pruned_sibp: u64,
    patterns: usize,
    wall: Duration,
    rendered: Vec<String>,
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let inputs = load_inputs(&args.taxonomy, &args.transactions, &args.thresholds)?;
    let opts = MineOptions { threads: args.threads, candidate_budget: args.candidate_budget };

    let ladder: Vec<(&'static str, Engine, PruneConfig)> = {
        let mut v = vec![
            ("basic", Engine::Basic, PruneConfig::support_only()),
            (
                "flipping",
                Engine::Flipper,
                PruneConfig { flipping: true, tpg: false, sibp: false, unsafe_flipping_extension: false },
            ),
            (
                "flipping+tpg",
                Engine::Flipper,
                PruneConfig { flipping: true, tpg: true, sibp: false, unsafe_flipping_extension: false },
            ),
            ("full", Engine::Flipper, PruneConfig::default()),
        ];
        if args.with_oracle {
            v.push(("oracle", Engine::Oracle, PruneConfig::support_only()));
        }
        v
    };

    let mut rows: Vec<CompareRow> = Vec::new();
    let mut full_outcome: Option<MineOutcome> = None;
    for (name, engine, cfg) in ladder {
        let outcome = run_engine(engine, &inputs, cfg, opts)?;
        let mut rendered = Vec::new();
        write_patterns(&mut rendered, &outcome.patterns, &inputs.tree)
            .map_err(|e| CliError::Data(format!("rendering patterns: {e}")))?;
        let rendered: Vec<String> = String::from_utf8(rendered)
            .expect("pattern lines are utf-8")
            .lines()
            .map(str::to_string)
            .collect();
        rows.push(CompareRow {
            name,
            generated: outcome.stats.generated_total(),
            evaluated: outcome.stats.evaluated_total(),
            pruned_support: outcome.stats.pruned_support_total(),
            pruned_flipping: outcome.stats.pruned_flipping_total(),
            pruned_sibp: outcome.stats.pruned_sibp_total(),
            patterns: outcome.patterns.len(),
            wall: outcome.stats.wall,
            rendered,
        });
        if name == "full" {
            full_outcome = Some(outcome);
        }
    }

    println!(
        "{:<14}{:>12}{:>12}{:>14}{:>15}{:>12}{:>10}{:>10}",
        "config", "generated", "evaluated", "pruned-sup", "pruned-flip", "pruned-sibp", "patterns", "ms"
    );
    for r in &rows {
        println!(
            "{:<14}{:>12}{:>12}{:>14}{:>15}{:>12}{:>10}{:>10}",
            r.name,
            r.generated,
            r.evaluated,
            r.pruned_support,
            r.pruned_flipping,
            r.pruned_sibp,
            r.patterns,
            r.wall.as_millis()
        );
    }

    let reference: HashSet<&String> = rows[0].rendered.iter().collect();
    for r in &rows[1..] {
        let got: HashSet<&String> = r.rendered.iter().collect();
        if got != reference {
            return Err(CliError::Budget(format!(
                "pattern sets disagree: `{}` found {} patterns, `basic` found {}",
                r.name,
                r.rendered.len(),
                rows[0].rendered.len()
            )));
        }
    }

    if let (Some(path), Some(outcome)) = (&args.output, &full_outcome) {
        write_outputs(path, args.stats.as_ref(), outcome, &inputs, "full")?;
    }
    Ok(())
}
