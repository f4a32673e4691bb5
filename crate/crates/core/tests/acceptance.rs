//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use quadalloc::first_fit::{ff_delete, invariant_check};
use quadalloc::oracle::{for_each_small_config_shard, Grid, Oracle, ORACLE_DEPTH};
use quadalloc::realloc::{cost_bounds, make_empty_pixel};
use quadalloc::request::{Request, RequestSequence, ScenarioConfig, Strategy, UnitRng};
use quadalloc::sim::{write_series_csv, Outcome, Simulator};
use quadalloc::worst_case::{build_worst_case, verify_lower_bound};
use quadalloc::zorder::first_empty_pixel;
use quadalloc::{
    Configuration, CostLedger, Dyadic, Error, Layer, ModuleId, PixelPath, Shape, Volume,
};

static TOUCHED: AtomicU64 = AtomicU64::new(0);
static PARTITION_FAILURES: AtomicU64 = AtomicU64::new(0);

/// Every configuration a criterion looks at passes through here.
fn touch(tree: &Configuration) {
    TOUCHED.fetch_add(1, Ordering::Relaxed);
    if tree.check_empty_partition().is_err() {
        PARTITION_FAILURES.fetch_add(1, Ordering::Relaxed);
    }
}

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn path(q: &[u8]) -> PixelPath {
    PixelPath::from_quadrants(q.iter().copied())
}

fn worst_case_reproduction() -> Verdict {
    let expected = [
        (1u8, Dyadic::new(3, -2), 3u64),
        (2, Dyadic::new(6, -3), 15),
        (3, Dyadic::new(9, -4), 63),
    ];
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    for (i, volume, moves) in expected {
        let start = Instant::now();
        let tree = build_worst_case::<Dyadic>(i).expect("worst case builds");
        touch(&tree);
        let ledger = verify_lower_bound::<Dyadic>(i).expect("insertion succeeds");
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        let bounds = cost_bounds::<Dyadic>(i, 2 * i);
        if ledger.total_volume != volume
            || ledger.moves != moves
            || bounds.total_volume != volume
            || bounds.moves != moves
            || elapsed >= Duration::from_secs(1)
        {
            failures.push(format!(
                "i={i}: volume {} moves {} in {elapsed:?}",
                ledger.total_volume, ledger.moves
            ));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("3/16, 3/32, 9/256 with 3, 15, 63 moves; slowest {slowest:?}")
        } else {
            failures.join("; ")
        },
    )
}

fn global_volume_bound() -> Verdict {
    const INSERTIONS: u64 = 100_000;
    let start = Instant::now();
    let cap = Dyadic::new(3, -2);
    let mut insertions = 0u64;
    let mut violations = Vec::new();
    let mut worst = Dyadic::ZERO;
    let mut seed = 0u64;
    while insertions < INSERTIONS {
        for bound in [0.5, 0.25, 0.125] {
            let scenario = ScenarioConfig {
                seed,
                n_requests: 1000,
                p_insert: 0.6,
                bound,
                aspect: 1.0,
                strategy: Strategy::DefragInsert,
                checked: Some(false),
            };
            let sequence = quadalloc::request::generate(&scenario).expect("scenario is valid");
            let mut sim = Simulator::new(Strategy::DefragInsert, 1.0, false);
            for request in &sequence.requests {
                let before = sim.configuration().smallest_square_layer();
                let row = sim.step(request).expect("request runs").clone();
                touch(sim.configuration());
                if row.outcome != Outcome::Placed {
                    continue;
                }
                insertions += 1;
                let i = row.layer;
                let s = before.unwrap_or(i);
                let bounds = cost_bounds::<Dyadic>(i, s);
                worst = worst.max(row.total_volume);
                if row.total_volume > cap || row.total_volume > bounds.total_volume {
                    violations.push(format!(
                        "seed {seed} bound {bound} request {}: {} (i={i}, s={s})",
                        row.index, row.total_volume
                    ));
                }
            }
        }
        seed += 1;
    }
    let elapsed = start.elapsed();
    let pass = violations.is_empty() && elapsed < Duration::from_secs(60);
    verdict(
        pass,
        format!(
            "{insertions} insertions over {seed} seeds, largest volume {worst}, {} violations, {elapsed:?}{}",
            violations.len(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    )
}

#[derive(Default)]
struct ShardReport {
    configs: u64,
    runs: u64,
    shapes: usize,
    mismatches: Vec<String>,
}

fn check_shard(shard: usize, shards: usize, max_squares: usize) -> ShardReport {
    let mut oracle = Oracle::default();
    let mut report = ShardReport::default();
    let result = for_each_small_config_shard::<Dyadic, _>(
        ORACLE_DEPTH,
        max_squares,
        shard,
        shards,
        |tree| {
            report.configs += 1;
            touch(tree);
            let grid = Grid::from_tree(tree)?;
            let capacity = tree.total_capacity();
            for j in 0..=ORACLE_DEPTH {
                let feasible = capacity >= Dyadic::pixel(j);
                let optimum = oracle.min_moves(&grid, j)?;
                let mismatches = &mut report.mismatches;
                let mut fail = |what: &str| {
                    if mismatches.len() < 5 {
                        mismatches.push(format!("{what} for j={j} on {}", tree.to_canonical()));
                    }
                };
                if feasible != optimum.is_some() {
                    fail("oracle disagrees with capacity");
                }
                if first_empty_pixel(tree, j).is_some() {
                    if optimum != Some(0) {
                        fail("oracle misses an empty pixel");
                    }
                    continue;
                }
                let mut copy = tree.clone();
                let mut ledger = CostLedger::for_request(j);
                match make_empty_pixel(&mut copy, j, &mut ledger) {
                    Ok(p) => {
                        report.runs += 1;
                        touch(&copy);
                        if !feasible || p.layer() != j || !copy.classify(p).is_empty() {
                            fail("engine produced no empty pixel");
                        }
                        if optimum.is_some_and(|m| ledger.moves < m as u64) {
                            fail("engine beat the oracle optimum");
                        }
                    }
                    Err(Error::InsufficientCapacity(_)) if !feasible => {}
                    Err(e) => {
                        fail(&format!("engine error {e}"));
                    }
                }
            }
            Ok(())
        },
    );
    if let Err(e) = result {
        report.mismatches.push(format!("enumeration stopped: {e}"));
    }
    report.shapes = oracle.cached();
    report
}

fn feasibility_against_oracle() -> Verdict {
    const MAX_SQUARES: usize = 6;
    let start = Instant::now();
    let shards = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(16);
    let reports: Vec<ShardReport> = thread::scope(|scope| {
        let handles: Vec<_> = (0..shards)
            .map(|shard| scope.spawn(move || check_shard(shard, shards, MAX_SQUARES)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("shard panicked"))
            .collect()
    });
    let elapsed = start.elapsed();
    let configs: u64 = reports.iter().map(|r| r.configs).sum();
    let runs: u64 = reports.iter().map(|r| r.runs).sum();
    let shapes = reports.iter().map(|r| r.shapes).max().unwrap_or(0);
    let first = reports.iter().flat_map(|r| r.mismatches.first()).next();
    let pass = first.is_none() && elapsed < Duration::from_secs(600);
    verdict(
        pass,
        format!(
            "{configs} configurations, {runs} engine runs, {shapes} oracle shapes, {shards} threads, {elapsed:?}{}",
            first.map(|m| format!("; {m}")).unwrap_or_default()
        ),
    )
}

/// Valid sequence of aligned squares of layers 1 to 5.
fn aligned_sequence(seed: u64, len: usize) -> RequestSequence {
    let mut rng = UnitRng::new(seed);
    let mut live: Vec<(ModuleId, Layer)> = Vec::new();
    let mut used = Dyadic::ZERO;
    let mut next = 0u64;
    let mut requests = Vec::with_capacity(len);
    while requests.len() < len {
        let fitting: Vec<Layer> = (1..=5)
            .filter(|&l| used + Dyadic::pixel(l) <= Dyadic::ONE)
            .collect();
        let insert = live.is_empty() || (rng.next_unit() < 0.6 && !fitting.is_empty());
        if insert {
            let layer = fitting[(rng.next_unit() * fitting.len() as f64) as usize];
            let id = ModuleId(next);
            next += 1;
            used += Dyadic::pixel(layer);
            live.push((id, layer));
            requests.push(Request::Insert {
                id,
                shape: Shape::aligned(layer),
            });
        } else {
            let (id, layer) = live.remove((rng.next_unit() * live.len() as f64) as usize);
            used -= Dyadic::pixel(layer);
            requests.push(Request::Delete { id });
        }
    }
    RequestSequence::new(requests)
}

fn first_fit_correctness() -> Verdict {
    const SEQUENCES: u64 = 1000;
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut relocations = 0u64;
    for seed in 0..SEQUENCES {
        let sequence = aligned_sequence(seed, 200);
        if !sequence.is_valid().unwrap_or(false) || !sequence.is_aligned().unwrap_or(false) {
            failures.push(format!(
                "seed {seed}: generated sequence is not valid and aligned"
            ));
            continue;
        }
        let mut sim = Simulator::new(Strategy::FirstFit, 1.0, false);
        for request in &sequence.requests {
            let row = sim.step(request).expect("request runs").clone();
            let tree = sim.configuration();
            touch(tree);
            relocations += row.moves;
            let mut fail =
                |what: &str| failures.push(format!("seed {seed} request {}: {what}", row.index));
            if row.insert && (row.outcome != Outcome::Placed || row.moves != 0) {
                fail("insertion was not placed for free");
            }
            if !invariant_check(tree) {
                fail("z-order invariant broken");
            }
            if !tree.is_compact() {
                fail("not compact");
            }
            let mut per_layer: BTreeMap<Layer, usize> = BTreeMap::new();
            for p in tree.maximally_empty_pixels() {
                *per_layer.entry(p.layer()).or_default() += 1;
            }
            if per_layer.values().any(|&n| n > 3) {
                fail("more than three maximally empty pixels in a layer");
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(300);
    verdict(
        pass,
        format!(
            "{SEQUENCES} sequences of 200, {relocations} relocations on deletes, {} failures, {elapsed:?}{}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn deletion_golden() -> Verdict {
    let mut tree = Configuration::new();
    let squares: [(u64, &[u8]); 9] = [
        (1, &[0, 0, 0]),
        (2, &[0, 0, 1]),
        (3, &[0, 0, 2]),
        (4, &[0, 0, 3]),
        (5, &[0, 1, 0]),
        (6, &[0, 2]),
        (7, &[0, 3]),
        (8, &[1, 0]),
        (9, &[2]),
    ];
    for (id, q) in squares {
        let p = path(q);
        tree.assign(ModuleId(id), p.layer(), p)
            .expect("golden configuration");
    }
    touch(&tree);
    let mut ledger = CostLedger::traced(3);
    ff_delete(&mut tree, ModuleId(4), &mut ledger).expect("deletion runs");
    touch(&tree);
    let moves: Vec<(ModuleId, PixelPath)> = ledger
        .trace
        .unwrap_or_default()
        .iter()
        .map(|r| (r.id, r.to))
        .collect();
    let expected = vec![
        (ModuleId(5), path(&[0, 0, 3])),
        (ModuleId(8), path(&[0, 1])),
        (ModuleId(9), path(&[1])),
    ];
    let pass = moves == expected && invariant_check(&tree);
    verdict(
        pass,
        format!(
            "moves {}",
            moves
                .iter()
                .map(|(id, to)| format!("{id}->{to}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn series_bytes(scenario: &ScenarioConfig) -> (Vec<u8>, f64) {
    let sequence = quadalloc::request::generate(scenario).expect("scenario is valid");
    let mut sim = Simulator::new(scenario.strategy, scenario.aspect, false);
    let mut max_u: f64 = 0.0;
    for request in &sequence.requests {
        max_u = max_u.max(sim.step(request).expect("request runs").u);
        touch(sim.configuration());
    }
    let mut bytes = Vec::new();
    write_series_csv(&sim.finish(), &mut bytes).expect("in-memory write");
    (bytes, max_u)
}

fn underallocation_bound() -> Verdict {
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut worst_ratio: f64 = 0.0;
    for k in [1.0, 2.0, 5.0] {
        for b in [0.125, 1.0] {
            for strategy in [Strategy::FirstFit, Strategy::DefragInsert] {
                let start = Instant::now();
                let scenario = ScenarioConfig {
                    seed: 7,
                    n_requests: 1000,
                    bound: b,
                    aspect: k,
                    strategy,
                    checked: Some(false),
                    ..ScenarioConfig::default()
                };
                let (first, max_u) = series_bytes(&scenario);
                let (second, _) = series_bytes(&scenario);
                let elapsed = start.elapsed() / 2;
                slowest = slowest.max(elapsed);
                worst_ratio = worst_ratio.max(max_u / (4.0 * k));
                if max_u > 4.0 * k {
                    failures.push(format!("k={k} b={b} {strategy}: u reached {max_u}"));
                }
                if first != second {
                    failures.push(format!(
                        "k={k} b={b} {strategy}: series differ between runs"
                    ));
                }
                if elapsed >= Duration::from_secs(30) {
                    failures.push(format!("k={k} b={b} {strategy}: took {elapsed:?}"));
                }
            }
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("12 runs, largest u/4k {worst_ratio:.4}, reruns byte-identical, slowest {slowest:?}")
        } else {
            failures.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("AC1", worst_case_reproduction),
        ("AC2", global_volume_bound),
        ("AC3", feasibility_against_oracle),
        ("AC4", first_fit_correctness),
        ("AC5", deletion_golden),
        ("AC6", underallocation_bound),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.starts_with("AC"))
        .collect();
    let mut all = true;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == name) {
            continue;
        }
        let v = run();
        all &= v.pass;
        println!(
            "{name} {} {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    let touched = TOUCHED.load(Ordering::Relaxed);
    let broken = PARTITION_FAILURES.load(Ordering::Relaxed);
    let pass = broken == 0 && touched > 0;
    all &= pass;
    println!(
        "AC7 {} {touched} configurations checked, {broken} with a broken empty partition",
        if pass { "PASS" } else { "FAIL" }
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
