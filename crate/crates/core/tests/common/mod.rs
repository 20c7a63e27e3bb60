//! Shared generator of randomized mining cases: a three-level taxonomy with
//! occasional shallow leaves (exercising rebalance copies), transactions with
//! planted co-occurrence blocks, and randomized thresholds.
//!
//! Half of the cases additionally plant an alternating-chain gadget sized to
//! the sampled thresholds, so the corpus contains real flipping patterns:
//! a leaf pair `{xa, xb}` that only ever co-occurs (correlation 1), parents
//! diluted to a correlation of at most epsilon by solo appearances, and
//! categories that practically always co-occur. All gadget correlations sit
//! on balanced supports, where the five measures coincide, so the gadget
//! works for whichever measure the case rotates to.

use flipcorr::dataset::{load_transactions, Dataset};
use flipcorr::measures::{MeasureKind, Thresholds};
use flipcorr::taxonomy::{build_taxonomy, TaxonomyTree};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

// Each test binary reads its own subset of these fields.
#[allow(dead_code)]
pub struct RandomCase {
    pub tree: TaxonomyTree,
    pub ds: Dataset,
    pub th: Thresholds,
    pub kind: MeasureKind,
    /// Number of level-1 categories (the structural size cap).
    pub k_max: usize,
    pub raw_taxonomy: String,
    pub raw_transactions: String,
}

pub fn random_case(seed: u64) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Taxonomy: categories -> mid nodes -> leaves, plus the occasional
    // category-level item that rebalancing must pad down to leaf depth.
    let n_roots = rng.gen_range(2..=4usize);
    let mut edges: Vec<(String, String)> = Vec::new();
    // cats[r] lists the leaf labels of each mid node of category r; shallow
    // items are tracked as single-leaf pseudo-mids at the end.
    let mut cats: Vec<Vec<Vec<String>>> = Vec::new();
    for r in 1..=n_roots {
        let root = format!("r{r}");
        edges.push((root.clone(), "ROOT".to_string()));
        let mut mids = Vec::new();
        let n_mid = rng.gen_range(1..=3usize);
        for c in 1..=n_mid {
            let mid = format!("r{r}c{c}");
            edges.push((mid.clone(), root.clone()));
            let mut leaves = Vec::new();
            for l in 1..=rng.gen_range(1..=3usize) {
                let leaf = format!("r{r}c{c}l{l}");
                edges.push((leaf.clone(), mid.clone()));
                leaves.push(leaf);
            }
            mids.push(leaves);
        }
        if rng.gen_bool(0.3) {
            let shallow = format!("r{r}x");
            edges.push((shallow.clone(), root.clone()));
            mids.push(vec![shallow]);
        }
        cats.push(mids);
    }
    let raw_taxonomy: String = edges.iter().map(|(c, p)| format!("{c}\t{p}\n")).collect();
    let tree = build_taxonomy(&edges).expect("valid random tree").rebalance();
    assert!(tree.height() == 3 && tree.is_balanced());

    let gamma = rng.gen_range(0.3..=0.7);
    let epsilon = rng.gen_range(0.05..=0.25);

    let mut lines: Vec<String> = Vec::new();
    // Pool of leaves usable by generic blocks/noise; the gadget removes its
    // two quiet mid nodes from it so their counts stay exact.
    let mut pool: Vec<String> = cats.iter().flatten().flatten().cloned().collect();

    let gadget = seed.is_multiple_of(2) && plant_gadget(&mut rng, &cats, epsilon, &mut lines, &mut pool);

    // Generic texture: co-occurrence blocks plus uniform noise.
    let n_generic = if gadget { rng.gen_range(5..=15usize) } else { rng.gen_range(30..=200usize) };
    let n_blocks = rng.gen_range(1..=4usize);
    let blocks: Vec<Vec<usize>> = (0..n_blocks)
        .map(|_| {
            let len = rng.gen_range(2..=3.min(pool.len()));
            let mut picks = Vec::new();
            while picks.len() < len {
                let i = rng.gen_range(0..pool.len());
                if !picks.contains(&i) {
                    picks.push(i);
                }
            }
            picks
        })
        .collect();
    for _ in 0..n_generic {
        let mut items: Vec<&str> = Vec::new();
        if rng.gen_bool(0.6) {
            let block = &blocks[rng.gen_range(0..blocks.len())];
            for &i in block {
                if rng.gen_bool(0.8) {
                    items.push(&pool[i]);
                }
            }
        }
        for _ in 0..rng.gen_range(1..=4usize) {
            items.push(&pool[rng.gen_range(0..pool.len())]);
        }
        lines.push(items.join(" "));
    }

    let raw_transactions: String = lines.iter().map(|l| format!("{l}\n")).collect();
    let ds = load_transactions(raw_transactions.as_bytes(), &tree).expect("generated labels load");
    let n = ds.n();
    assert!(n <= 200, "case grew to {n} transactions");
    assert!(tree.level_nodes(3).expect("leaf level").len() <= 40);

    // Gadget links carry absolute support 4, so its cases draw thresholds
    // under 4/n; the rest use the generic non-increasing ranges.
    let (t1, t2, t3) = if gadget {
        let cap = 4.0 / n as f64;
        let t2 = rng.gen_range(1.0 / n as f64..=cap);
        let t3 = rng.gen_range(0.5 / n as f64..=t2);
        let t1 = rng.gen_range(t2..=0.2f64.max(t2));
        (t1, t2, t3)
    } else {
        let t1 = rng.gen_range(0.05..=0.2);
        let t2 = rng.gen_range(0.02..=t1);
        let t3 = rng.gen_range(0.01..=t2);
        (t1, t2, t3)
    };
    let th = Thresholds::new(gamma, epsilon, vec![t1, t2, t3]).expect("valid thresholds");
    let kind = MeasureKind::NULL_INVARIANT[(seed % 5) as usize];

    RandomCase { tree, ds, th, kind, k_max: n_roots, raw_taxonomy, raw_transactions }
}

/// Emits the alternating-chain transactions when two eligible categories
/// exist (two mids each, the first with two leaves). Chain for the planted
/// pair: categories co-occur almost always (positive), the two quiet mids
/// co-occur in exactly 4 of `4 + s` appearances (`s` sized so the ratio is
/// at most epsilon), and the planted leaves only ever co-occur (positive).
fn plant_gadget(
    rng: &mut ChaCha8Rng,
    cats: &[Vec<Vec<String>>],
    epsilon: f64,
    lines: &mut Vec<String>,
    pool: &mut Vec<String>,
) -> bool {
    let eligible: Vec<usize> = (0..cats.len())
        .filter(|&r| cats[r].len() >= 2 && cats[r][0].len() >= 2)
        .collect();
    if eligible.len() < 2 {
        return false;
    }
    let a = eligible[rng.gen_range(0..eligible.len())];
    let b = loop {
        let x = eligible[rng.gen_range(0..eligible.len())];
        if x != a {
            break x;
        }
    };

    let xa = cats[a][0][0].clone();
    let xa2 = cats[a][0][1].clone();
    let xb = cats[b][0][0].clone();
    let xb2 = cats[b][0][1].clone();
    let a_rest: Vec<&String> = cats[a][1..].iter().flatten().collect();
    let b_rest: Vec<&String> = cats[b][1..].iter().flatten().collect();

    for _ in 0..4 {
        lines.push(format!("{xa} {xb}"));
    }
    let s = (4.0 * (1.0 - epsilon) / epsilon).ceil() as usize;
    for _ in 0..s {
        lines.push(format!("{xa2} {}", b_rest[rng.gen_range(0..b_rest.len())]));
        lines.push(format!("{xb2} {}", a_rest[rng.gen_range(0..a_rest.len())]));
    }
    // Cross-category filler keeps the category pair strongly positive.
    let budget = 185usize.saturating_sub(4 + 2 * s);
    let n_filler = rng.gen_range(20..=50usize).min(budget);
    for _ in 0..n_filler {
        lines.push(format!(
            "{} {}",
            a_rest[rng.gen_range(0..a_rest.len())],
            b_rest[rng.gen_range(0..b_rest.len())]
        ));
    }

    pool.retain(|l| !cats[a][0].contains(l) && !cats[b][0].contains(l));
    if pool.is_empty() {
        pool.push(a_rest[0].clone());
    }
    true
}
