//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line
//! directly to stdout so the verdicts show up without `--nocapture`.

mod common;

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use temporal_labeling::bench::{reproduction_suite, run_bench, BenchConfig, BenchReport, BenchRow};
use temporal_labeling::scenario::{extract_with, heading, random_scenario, SynthConfig};
use temporal_labeling::solvers::{exact_search, greedy_selection, mwis_intervals, pls_search, PlsParams};
use temporal_labeling::{
    build_graph, check_model, saturate, solve, Algorithm, AmMode, Instance, Problem, SolveRequest, SolveResult, Status,
    TimeInterval,
};

use common::{brute_force, random_instance, MEDIUM, SMALL};

const PROBLEMS: [Problem; 3] = [Problem::Gmt, Problem::Krmt(1), Problem::Krmt(2)];
const SMALL_COUNT: u64 = 200;
const MEDIUM_COUNT: u64 = 500;
const MEDIUM_SEED0: u64 = 10_000;
const SUITE_SIZE: usize = 50;
const SUITE_SEED: u64 = 7;

/// Criteria share cached suites; running them one at a time also keeps the
/// runtime measurements of criterion 8 free of interference.
fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(n: u32, pass: bool, detail: &str) {
    let word = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n}: {word} {detail}");
    let _ = out.flush();
}

fn pls_params() -> PlsParams {
    PlsParams { budget: Duration::from_secs(5), max_iterations: Some(400), ..PlsParams::default() }
}

/// Exact results indexed by `[problem][mode]`.
type ExactTable = Vec<[[SolveResult; 3]; 3]>;

fn exact_table(instances: &[Instance], limit: Duration) -> ExactTable {
    instances
        .iter()
        .map(|inst| {
            PROBLEMS.map(|p| {
                AmMode::ALL.map(|m| {
                    let req = SolveRequest::new(p, m, Algorithm::Exact).with_time_limit(limit);
                    exact_search(inst, &req).result
                })
            })
        })
        .collect()
}

fn small_suite() -> &'static (Vec<Instance>, ExactTable) {
    static CELL: OnceLock<(Vec<Instance>, ExactTable)> = OnceLock::new();
    CELL.get_or_init(|| {
        let instances: Vec<Instance> = (0..SMALL_COUNT).map(|s| random_instance(s, &SMALL)).collect();
        let table = exact_table(&instances, Duration::from_secs(60));
        (instances, table)
    })
}

fn medium_suite() -> &'static (Vec<Instance>, ExactTable) {
    static CELL: OnceLock<(Vec<Instance>, ExactTable)> = OnceLock::new();
    CELL.get_or_init(|| {
        let instances: Vec<Instance> =
            (MEDIUM_SEED0..MEDIUM_SEED0 + MEDIUM_COUNT).map(|s| random_instance(s, &MEDIUM)).collect();
        let table = exact_table(&instances, Duration::from_secs(30));
        (instances, table)
    })
}

fn navigation_suite() -> &'static [(String, Instance)] {
    static CELL: OnceLock<Vec<(String, Instance)>> = OnceLock::new();
    CELL.get_or_init(|| reproduction_suite(SUITE_SIZE, SUITE_SEED).expect("suite generation"))
}

/// GMT/AM1 with every algorithm, exact references under the 600 s cap.
fn quality_bench() -> &'static BenchReport {
    static CELL: OnceLock<BenchReport> = OnceLock::new();
    CELL.get_or_init(|| {
        let config = BenchConfig {
            problems: vec![Problem::Gmt],
            modes: vec![AmMode::Am1],
            intgraph_relaxed: true,
            time_limit: Duration::from_secs(600),
            seed: SUITE_SEED,
            ..BenchConfig::default()
        };
        run_bench(navigation_suite(), &config).expect("bench run")
    })
}

/// Exact GMT under every model. A few AM3 runs do not close within any
/// practical cap; their incumbents enter the ratios as lower bounds.
fn ratio_bench() -> &'static BenchReport {
    static CELL: OnceLock<BenchReport> = OnceLock::new();
    CELL.get_or_init(|| {
        let config = BenchConfig {
            problems: vec![Problem::Gmt],
            algorithms: vec![Algorithm::Exact],
            time_limit: Duration::from_secs(60),
            seed: SUITE_SEED,
            ..BenchConfig::default()
        };
        run_bench(navigation_suite(), &config).expect("bench run")
    })
}

#[test]
fn criterion_1_exact_matches_enumeration() {
    let _guard = serial();
    let (instances, table) = small_suite();
    let mut mismatches = Vec::new();
    let mut not_optimal = 0;
    for (i, inst) in instances.iter().enumerate() {
        for (pi, p) in PROBLEMS.iter().enumerate() {
            for (mi, m) in AmMode::ALL.iter().enumerate() {
                let exact = &table[i][pi][mi];
                if exact.status != Status::Optimal {
                    not_optimal += 1;
                }
                let (oracle, _) = brute_force(inst, *m, p.k());
                if exact.objective != oracle {
                    mismatches.push(format!("seed {i} {p} {m}: exact {} oracle {oracle}", exact.objective));
                }
            }
        }
    }
    let pass = mismatches.is_empty() && not_optimal == 0;
    let runs = instances.len() * 9;
    verdict(1, pass, &format!("{runs} runs, {} mismatches, {not_optimal} not optimal", mismatches.len()));
    assert!(pass, "{mismatches:?}");
}

#[test]
fn criterion_2_every_solver_output_is_valid() {
    let _guard = serial();
    let (instances, table) = medium_suite();
    let mut runs = 0;
    let mut violations = Vec::new();
    let mut unsupported = 0;
    for (i, inst) in instances.iter().enumerate() {
        for (pi, p) in PROBLEMS.iter().enumerate() {
            for (mi, m) in AmMode::ALL.iter().enumerate() {
                for algo in Algorithm::ALL {
                    let req = SolveRequest::new(*p, *m, algo).with_seed(i as u64).with_pls(pls_params());
                    let fresh;
                    let result = if algo == Algorithm::Exact {
                        &table[i][pi][mi]
                    } else {
                        fresh = solve(inst, &req).expect("valid request");
                        &fresh
                    };
                    if result.status == Status::Unsupported {
                        unsupported += 1;
                    }
                    runs += 1;
                    let report = check_model(inst, &result.phi, *m, p.k(), Some(req.min_duration)).expect("known labels");
                    if !report.valid {
                        violations.push(format!("seed {} {p} {m} {algo}", MEDIUM_SEED0 + i as u64));
                    }
                }
            }
        }
    }
    let pass = violations.is_empty();
    verdict(2, pass, &format!("{runs} runs ({unsupported} unsupported), {} invalid", violations.len()));
    assert!(pass, "{violations:?}");
}

/// Ordering failures of one exact table, counting only fully optimal rows.
fn ordering_failures(table: &ExactTable, seed0: u64) -> (Vec<String>, usize) {
    let mut failures = Vec::new();
    let mut skipped = 0;
    for (i, row) in table.iter().enumerate() {
        if row.iter().flatten().any(|r| r.status != Status::Optimal) {
            skipped += 1;
            continue;
        }
        let obj = |p: usize, m: usize| row[p][m].objective;
        for (p, problem) in PROBLEMS.iter().enumerate() {
            if !(obj(p, 0) <= obj(p, 1) && obj(p, 1) <= obj(p, 2)) {
                failures.push(format!("seed {} {problem}: AM order", seed0 + i as u64));
            }
        }
        for m in 0..3 {
            if !(obj(1, m) <= obj(2, m) && obj(2, m) <= obj(0, m)) {
                failures.push(format!("seed {} {}: k order", seed0 + i as u64, AmMode::ALL[m]));
            }
        }
    }
    (failures, skipped)
}

#[test]
fn criterion_3_model_ordering() {
    let _guard = serial();
    let (f1, s1) = ordering_failures(&small_suite().1, 0);
    let (f2, s2) = ordering_failures(&medium_suite().1, MEDIUM_SEED0);
    let failures: Vec<String> = f1.into_iter().chain(f2).collect();
    let skipped = s1 + s2;
    let pass = failures.is_empty() && skipped == 0;
    let total = SMALL_COUNT + MEDIUM_COUNT;
    verdict(3, pass, &format!("{total} instances, {} order violations, {skipped} with a non-optimal run", failures.len()));
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_4_interval_mwis_matches_subsets() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(0..=15);
        let items: Vec<(TimeInterval, f64)> = (0..n)
            .map(|_| {
                let s = rng.gen_range(0..30);
                let e = rng.gen_range(s + 1..=s + 12);
                (TimeInterval::new(s as f64, e as f64), rng.gen_range(1..=20) as f64)
            })
            .collect();
        let mut best = 0.0f64;
        for mask in 0u32..1 << n {
            let chosen: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let disjoint = chosen.iter().enumerate().all(|(a, &i)| chosen[a + 1..].iter().all(|&j| !items[i].0.intersects(&items[j].0)));
            if disjoint {
                best = best.max(chosen.iter().map(|&i| items[i].1).sum());
            }
        }
        let picked = mwis_intervals(&items);
        let disjoint = picked.iter().enumerate().all(|(a, &i)| picked[a + 1..].iter().all(|&j| !items[i].0.intersects(&items[j].0)));
        let value: f64 = picked.iter().map(|&i| items[i].1).sum();
        if !disjoint || value != best {
            mismatches += 1;
        }
    }
    verdict(4, mismatches == 0, &format!("1000 sets, {mismatches} mismatches"));
    assert_eq!(mismatches, 0);
}

#[test]
fn criterion_5_saturated_sets_validate() {
    let _guard = serial();
    let mut checked: HashMap<AmMode, usize> = HashMap::new();
    let mut failed: HashMap<AmMode, usize> = HashMap::new();
    let mut not_independent = 0;
    let instances = small_suite().0.iter().chain(medium_suite().0.iter());
    for (i, inst) in instances.enumerate() {
        for mode in AmMode::ALL {
            let graph = build_graph(inst, mode).expect("small graph");
            let greedy = greedy_selection(&graph, None);
            let pls = saturate(&graph, &pls_search(&graph, &pls_params(), i as u64)).expect("independent");
            for sel in [greedy, pls] {
                if !graph.is_independent(&sel) {
                    not_independent += 1;
                }
                let report = check_model(inst, &graph.activity(&sel), mode, None, None).expect("known labels");
                *checked.entry(mode).or_default() += 1;
                if !report.valid {
                    *failed.entry(mode).or_default() += 1;
                }
            }
        }
    }
    let count = |m: AmMode| failed.get(&m).copied().unwrap_or(0);
    let detail: Vec<String> = AmMode::ALL.iter().map(|&m| format!("{m} {}/{} invalid", count(m), checked[&m])).collect();
    let pass = not_independent == 0 && AmMode::ALL.iter().all(|&m| count(m) == 0);
    verdict(5, pass, &format!("{}, {not_independent} not independent", detail.join(", ")));
    // AM1 and AM2 follow from saturation; AM3 counterexamples exist (see the
    // `saturated_but_unjustified` fixture) and are repaired by the solvers,
    // which criterion 2 covers.
    assert_eq!(not_independent, 0);
    assert_eq!(count(AmMode::Am1), 0);
    assert_eq!(count(AmMode::Am2), 0);
}

fn am1_rows(report: &BenchReport, algo: Algorithm) -> Vec<&BenchRow> {
    report.select(Problem::Gmt, AmMode::Am1).filter(|r| r.algorithm == algo).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    match xs.len() {
        0 => 0.0,
        n if n % 2 == 1 => xs[n / 2],
        n => (xs[n / 2 - 1] + xs[n / 2]) / 2.0,
    }
}

#[test]
fn criterion_6_heuristic_quality_on_navigation_suite() {
    let _guard = serial();
    let report = quality_bench();
    let exact_am1 = am1_rows(report, Algorithm::Exact);
    let optimal = exact_am1.iter().filter(|r| r.status == Status::Optimal).count();
    let q = |a| report.mean_quality(Problem::Gmt, AmMode::Am1, a).unwrap_or(0.0);
    let (greedy, pls, intgraph) = (q(Algorithm::Greedy), q(Algorithm::Pls), q(Algorithm::IntGraph));
    let pass = exact_am1.len() >= SUITE_SIZE
        && optimal == exact_am1.len()
        && greedy >= 0.90
        && pls >= 0.90
        && intgraph >= 0.90
        && pls >= greedy - 0.01;
    verdict(
        6,
        pass,
        &format!(
            "{} instances ({optimal} optimal references), mean quality PLS {pls:.4} Greedy {greedy:.4} IntGraph {intgraph:.4}",
            exact_am1.len()
        ),
    );
    assert!(pass);
}

/// AM2 and AM3 references that timed out are incumbents, i.e. lower bounds,
/// which can only shrink the ratios; AM1 references must be optimal.
#[test]
fn criterion_7_activity_model_ratios() {
    let _guard = serial();
    let report = ratio_bench();
    let ratios = &report.ratios;
    let am1_optimal = am1_rows(report, Algorithm::Exact).iter().all(|r| r.status == Status::Optimal);
    let exact = ratios.iter().filter(|r| r.exact).count();
    let am2: Vec<f64> = ratios.iter().filter_map(|r| r.am2_am1).collect();
    let am3: Vec<f64> = ratios.iter().filter_map(|r| r.am3_am1).collect();
    let (m2, m3) = (mean(&am2), mean(&am3));
    let pass = am1_optimal
        && !am2.is_empty()
        && m2 >= 1.0
        && m3 >= m2
        && am2.iter().any(|&r| r > 1.0)
        && am3.iter().any(|&r| r > 1.0);
    verdict(
        7,
        pass,
        &format!("{} instances ({exact} with all models optimal), mean AM2/AM1 {m2:.4}, AM3/AM1 {m3:.4}", ratios.len()),
    );
    assert!(pass);
}

#[test]
fn criterion_8_heuristic_runtimes() {
    let _guard = serial();
    let report = quality_bench();
    let times = |a| -> Vec<f64> { am1_rows(report, a).iter().map(|r| r.runtime_s).collect() };
    let greedy = median(times(Algorithm::Greedy));
    let intgraph = median(times(Algorithm::IntGraph));
    let pls_max = times(Algorithm::Pls).into_iter().fold(0.0, f64::max);
    let pass = greedy <= 0.1 && intgraph <= 0.1 && pls_max <= 0.15;
    verdict(8, pass, &format!("median Greedy {greedy:.4}s IntGraph {intgraph:.4}s, max PLS {pls_max:.4}s"));
    assert!(pass);
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Largest endpoint shift between two extractions, or `None` when their
/// interval structure differs.
fn endpoint_shift(a: &Instance, b: &Instance) -> Option<f64> {
    if a.labels().len() != b.labels().len() || a.conflicts().len() != b.conflicts().len() {
        return None;
    }
    let mut shift = 0.0f64;
    let mut compare = |x: &TimeInterval, y: &TimeInterval| {
        shift = shift.max((x.start - y.start).abs()).max((x.end - y.end).abs());
    };
    for l in 0..a.labels().len() {
        if a.presences(l).len() != b.presences(l).len() {
            return None;
        }
        for (x, y) in a.presences(l).iter().zip(b.presences(l)) {
            compare(x, y);
        }
    }
    for (x, y) in a.conflicts().iter().zip(b.conflicts()) {
        if (x.a, x.b) != (y.a, y.b) {
            return None;
        }
        compare(&x.interval, &y.interval);
    }
    Some(shift)
}

#[test]
fn criterion_9_scenario_geometry() {
    let _guard = serial();
    let mut joint_max = 0.0f64;
    let mut ramps = 0;
    let mut ramp_failures = 0;
    let mut unstable = 0;
    let mut shift_max = 0.0f64;
    for seed in 0..20 {
        let scenario = random_scenario(&SynthConfig::default(), seed);
        let (step, tol) = (scenario.settings.sample_step_s, scenario.settings.tolerance_s);
        let coarse = extract_with(&scenario, step, tol).expect("valid scenario");
        let traj = &coarse.trajectory;

        for w in traj.pieces().windows(2) {
            let (a, b) = (&w[0].piece, &w[1].piece);
            let jump = angle_gap(heading(a.tangent_at(a.length())), heading(b.tangent_at(0.0)));
            joint_max = joint_max.max(jump);
        }

        for ramp in &traj.zoom_plan().ramps {
            ramps += 1;
            let straight = traj.pieces().iter().any(|p| p.piece.is_line() && p.t0 <= ramp.start && ramp.end <= p.t1);
            if !straight {
                ramp_failures += 1;
            }
            let angle0 = traj.pose_at(ramp.start).expect("in range").angle;
            for i in 0..=20 {
                let t = ramp.start + (ramp.end - ramp.start) * i as f64 / 20.0;
                let pose = traj.pose_at(t).expect("in range");
                let linear = ramp.from + (ramp.to - ramp.from) * (t - ramp.start) / (ramp.end - ramp.start);
                if angle_gap(pose.angle, angle0) > 1e-9 || (pose.zoom - linear).abs() > 1e-9 {
                    ramp_failures += 1;
                }
            }
        }

        let fine = extract_with(&scenario, step, tol / 10.0).expect("valid scenario");
        match endpoint_shift(&coarse.instance, &fine.instance) {
            Some(s) if s < tol => shift_max = shift_max.max(s),
            Some(s) => {
                shift_max = shift_max.max(s);
                unstable += 1;
            }
            None => unstable += 1,
        }
    }
    let pass = joint_max < 1e-6 && ramp_failures == 0 && unstable == 0;
    verdict(
        9,
        pass,
        &format!(
            "20 scenarios, max joint jump {joint_max:.2e} rad, {ramp_failures} violations over {ramps} ramps, \
             {unstable} unstable extractions, max endpoint shift {shift_max:.2e} s"
        ),
    );
    assert!(pass);
}
