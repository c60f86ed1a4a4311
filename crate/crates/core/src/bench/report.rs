use std::fs;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::solvers::{solve, Algorithm, PlsParams, Problem, SolveRequest, SolveResult, Status};
use crate::validation::AmMode;

use super::svg::scatter_svg;

/// Column order of `bench.csv`.
pub const BENCH_COLUMNS: [&str; 12] = [
    "instance",
    "complexity",
    "problem",
    "k",
    "mode",
    "algorithm",
    "status",
    "objective",
    "reference",
    "reference_kind",
    "quality",
    "runtime_s",
];

/// Column order of `am_ratios.csv`.
pub const RATIO_COLUMNS: [&str; 11] =
    ["instance", "complexity", "problem", "k", "am1", "am2", "am3", "am2_am1", "am3_am1", "am3_am2", "exact"];

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub problems: Vec<Problem>,
    pub modes: Vec<AmMode>,
    pub algorithms: Vec<Algorithm>,
    /// Per run.
    pub time_limit: Duration,
    /// Run seeds are this plus the instance position.
    pub seed: u64,
    pub workers: usize,
    pub min_duration: f64,
    pub intgraph_relaxed: bool,
    pub pls: PlsParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            problems: vec![Problem::Gmt, Problem::Krmt(2)],
            modes: AmMode::ALL.to_vec(),
            algorithms: Algorithm::ALL.to_vec(),
            time_limit: Duration::from_secs(600),
            seed: 0,
            workers: 1,
            min_duration: 1.0,
            intgraph_relaxed: false,
            pls: PlsParams::default(),
        }
    }
}

/// What a quality ratio is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Proven optimum of the exact solver.
    Optimal,
    /// Upper bound of a timed-out exact run; the ratio underestimates quality.
    Bound,
    None,
}

impl ReferenceKind {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::Optimal => "optimal",
            ReferenceKind::Bound => "bound",
            ReferenceKind::None => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub complexity: usize,
    pub problem: Problem,
    pub mode: AmMode,
    pub algorithm: Algorithm,
    pub status: Status,
    pub objective: Option<f64>,
    pub reference: Option<f64>,
    pub reference_kind: ReferenceKind,
    pub quality: Option<f64>,
    pub runtime_s: f64,
}

/// Exact objectives of one instance and problem under the three models.
#[derive(Clone, Debug, PartialEq)]
pub struct AmRatioRow {
    pub instance: String,
    pub complexity: usize,
    pub problem: Problem,
    pub am: [f64; 3],
    pub am2_am1: Option<f64>,
    pub am3_am1: Option<f64>,
    pub am3_am2: Option<f64>,
    /// All three runs finished with a proven optimum.
    pub exact: bool,
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    /// Sorted by complexity, then instance name.
    pub rows: Vec<BenchRow>,
    pub ratios: Vec<AmRatioRow>,
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b > 0.0).then(|| a / b)
}

/// Runs every (instance, problem, mode, algorithm) combination on a pool
/// of `config.workers` threads.
pub fn run_bench(instances: &[(String, Instance)], config: &BenchConfig) -> Result<BenchReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Request(format!("worker pool: {e}")))?;
    let mut jobs = Vec::new();
    for i in 0..instances.len() {
        for &problem in &config.problems {
            for &mode in &config.modes {
                for &algorithm in &config.algorithms {
                    jobs.push((i, problem, mode, algorithm));
                }
            }
        }
    }
    let results: Vec<Result<SolveResult>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, problem, mode, algorithm)| {
                let req = SolveRequest::new(problem, mode, algorithm)
                    .with_time_limit(config.time_limit)
                    .with_seed(config.seed.wrapping_add(i as u64))
                    .with_min_duration(config.min_duration)
                    .with_intgraph_relaxed(config.intgraph_relaxed)
                    .with_pls(config.pls.clone());
                solve(&instances[i].1, &req)
            })
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let find = |i: usize, problem: Problem, mode: AmMode, algorithm: Algorithm| {
        jobs.iter().position(|j| *j == (i, problem, mode, algorithm)).map(|p| &results[p])
    };

    let mut report = BenchReport::default();
    for (&(i, problem, mode, algorithm), r) in jobs.iter().zip(&results) {
        let (name, instance) = &instances[i];
        let (reference, reference_kind) = match find(i, problem, mode, Algorithm::Exact) {
            Some(e) if e.status == Status::Optimal => (Some(e.objective), ReferenceKind::Optimal),
            Some(e) if e.status == Status::Timeout => (e.upper_bound, ReferenceKind::Bound),
            _ => (None, ReferenceKind::None),
        };
        let solved = !matches!(r.status, Status::Unsupported | Status::SizeAbort);
        let objective = solved.then_some(r.objective);
        let quality = match (objective, reference) {
            (Some(o), Some(rf)) => Some(if rf > 0.0 { o / rf } else { 1.0 }),
            _ => None,
        };
        report.rows.push(BenchRow {
            instance: name.clone(),
            complexity: instance.complexity(),
            problem,
            mode,
            algorithm,
            status: r.status,
            objective,
            reference,
            reference_kind,
            quality,
            runtime_s: r.runtime.as_secs_f64(),
        });
    }
    for (i, (name, instance)) in instances.iter().enumerate() {
        for &problem in &config.problems {
            let runs: Vec<_> = AmMode::ALL.iter().map(|&m| find(i, problem, m, Algorithm::Exact)).collect();
            let [Some(a1), Some(a2), Some(a3)] = runs[..] else { continue };
            let am = [a1.objective, a2.objective, a3.objective];
            report.ratios.push(AmRatioRow {
                instance: name.clone(),
                complexity: instance.complexity(),
                problem,
                am,
                am2_am1: ratio(am[1], am[0]),
                am3_am1: ratio(am[2], am[0]),
                am3_am2: ratio(am[2], am[1]),
                exact: [a1, a2, a3].iter().all(|r| r.status == Status::Optimal),
            });
        }
    }
    let problem_rank = |p: Problem| config.problems.iter().position(|&q| q == p);
    let algo_rank = |a: Algorithm| config.algorithms.iter().position(|&b| b == a);
    report.rows.sort_by(|a, b| {
        (a.complexity, &a.instance, problem_rank(a.problem), a.mode, algo_rank(a.algorithm)).cmp(&(
            b.complexity,
            &b.instance,
            problem_rank(b.problem),
            b.mode,
            algo_rank(b.algorithm),
        ))
    });
    report.ratios.sort_by(|a, b| (a.complexity, &a.instance, problem_rank(a.problem)).cmp(&(b.complexity, &b.instance, problem_rank(b.problem))));
    Ok(report)
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn fixed(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn k_field(p: Problem) -> String {
    p.k().map(|k| k.to_string()).unwrap_or_default()
}

fn slug(p: Problem) -> String {
    match p {
        Problem::Gmt => "gmt".into(),
        Problem::Krmt(k) => format!("krmt{k}"),
    }
}

impl BenchReport {
    pub fn rows_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(BENCH_COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.instance.clone(),
                r.complexity.to_string(),
                r.problem.name().to_string(),
                k_field(r.problem),
                r.mode.to_string(),
                r.algorithm.to_string(),
                r.status.to_string(),
                num(r.objective),
                num(r.reference),
                r.reference_kind.name().to_string(),
                fixed(r.quality),
                format!("{:.6}", r.runtime_s),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn ratios_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RATIO_COLUMNS).expect("in-memory write");
        for r in &self.ratios {
            w.write_record([
                r.instance.clone(),
                r.complexity.to_string(),
                r.problem.name().to_string(),
                k_field(r.problem),
                num(Some(r.am[0])),
                num(Some(r.am[1])),
                num(Some(r.am[2])),
                fixed(r.am2_am1),
                fixed(r.am3_am1),
                fixed(r.am3_am2),
                r.exact.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    /// Rows of one problem and model.
    pub fn select(&self, problem: Problem, mode: AmMode) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(move |r| r.problem == problem && r.mode == mode)
    }

    /// Mean quality of an algorithm over rows with a known reference.
    pub fn mean_quality(&self, problem: Problem, mode: AmMode, algorithm: Algorithm) -> Option<f64> {
        let q: Vec<f64> = self.select(problem, mode).filter(|r| r.algorithm == algorithm).filter_map(|r| r.quality).collect();
        (!q.is_empty()).then(|| q.iter().sum::<f64>() / q.len() as f64)
    }

    /// Quality and log-runtime plots per (problem, model) and the model
    /// ratio plot per problem, x being the complexity rank.
    pub fn plots(&self) -> Vec<(String, String)> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.instance) {
                names.push(r.instance.clone());
            }
        }
        let rank = |n: &str| names.iter().position(|m| m == n).unwrap_or(0) as f64 + 1.0;
        let mut combos: Vec<(Problem, AmMode)> = Vec::new();
        let mut algos: Vec<Algorithm> = Vec::new();
        for r in &self.rows {
            if !combos.contains(&(r.problem, r.mode)) {
                combos.push((r.problem, r.mode));
            }
            if !algos.contains(&r.algorithm) {
                algos.push(r.algorithm);
            }
        }
        let mut out = Vec::new();
        for (problem, mode) in combos {
            let series = |f: &dyn Fn(&BenchRow) -> Option<f64>| -> Vec<(String, Vec<(f64, f64)>)> {
                algos
                    .iter()
                    .map(|&a| {
                        let pts = self.select(problem, mode).filter(|r| r.algorithm == a).filter_map(|r| f(r).map(|y| (rank(&r.instance), y))).collect();
                        (a.to_string(), pts)
                    })
                    .collect()
            };
            let tag = format!("{}_am{}", slug(problem), mode.number());
            let title = format!("{problem} {mode}");
            out.push((
                format!("quality_{tag}.svg"),
                scatter_svg(&format!("Quality, {title}"), "instance (by complexity)", "objective / reference", &series(&|r| r.quality)),
            ));
            out.push((
                format!("runtime_{tag}.svg"),
                scatter_svg(
                    &format!("Runtime, {title}"),
                    "instance (by complexity)",
                    "log10 seconds",
                    &series(&|r| r.objective.map(|_| r.runtime_s.max(1e-6).log10())),
                ),
            ));
        }
        let mut problems: Vec<Problem> = Vec::new();
        for r in &self.ratios {
            if !problems.contains(&r.problem) {
                problems.push(r.problem);
            }
        }
        for problem in problems {
            let rows: Vec<&AmRatioRow> = self.ratios.iter().filter(|r| r.problem == problem).collect();
            let pick = |f: fn(&AmRatioRow) -> Option<f64>| rows.iter().filter_map(|r| f(r).map(|y| (rank(&r.instance), y))).collect();
            let series = vec![("AM2/AM1".to_string(), pick(|r| r.am2_am1)), ("AM3/AM1".to_string(), pick(|r| r.am3_am1))];
            out.push((
                format!("am_ratio_{}.svg", slug(problem)),
                scatter_svg(&format!("Activity models, {problem}"), "instance (by complexity)", "ratio to AM1", &series),
            ));
        }
        out
    }

    /// Writes `bench.csv`, `am_ratios.csv` and the plots into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("bench.csv"), self.rows_csv())?;
        fs::write(dir.join("am_ratios.csv"), self.ratios_csv())?;
        for (name, svg) in self.plots() {
            fs::write(dir.join(name), svg)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::i1;

    fn tiny() -> Vec<(String, Instance)> {
        vec![("a".into(), i1()), ("b".into(), crate::instance::fixtures::saturated_but_unjustified()), ("c".into(), i1())]
    }

    #[test]
    fn full_matrix_rows_and_ratios() {
        let config = BenchConfig { problems: vec![Problem::Gmt, Problem::Krmt(1)], min_duration: 0.0, ..BenchConfig::default() };
        let report = run_bench(&tiny(), &config).unwrap();
        assert_eq!(report.rows.len(), 3 * 3 * 2 * 4);
        assert!(report.rows.iter().filter_map(|r| r.quality).all(|q| q <= 1.0 + 1e-12));
        assert!(report.rows.iter().all(|r| r.reference_kind == ReferenceKind::Optimal));
        for r in &report.ratios {
            assert!(r.exact);
            assert!(r.am[0] <= r.am[1] && r.am[1] <= r.am[2]);
        }
        assert_eq!(report.ratios.len(), 3 * 2);
        let unsupported = report.rows.iter().filter(|r| r.status == Status::Unsupported).count();
        assert_eq!(unsupported, 3 * 3);
    }

    #[test]
    fn csv_layout_is_stable() {
        let config = BenchConfig {
            problems: vec![Problem::Gmt],
            modes: vec![AmMode::Am1],
            algorithms: vec![Algorithm::Exact, Algorithm::Greedy],
            min_duration: 0.0,
            ..BenchConfig::default()
        };
        let report = run_bench(&tiny()[..1], &config).unwrap();
        let csv = report.rows_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "instance,complexity,problem,k,mode,algorithm,status,objective,reference,reference_kind,quality,runtime_s"
        );
        let strip = |l: &str| l.rsplit_once(',').unwrap().0.to_string();
        assert_eq!(strip(lines.next().unwrap()), "a,4,GMT,,AM1,exact,OPTIMAL,16,16,optimal,1.000000");
        assert_eq!(strip(lines.next().unwrap()), "a,4,GMT,,AM1,greedy,FEASIBLE,16,16,optimal,1.000000");
        assert_eq!(report.ratios_csv().lines().next().unwrap(), RATIO_COLUMNS.join(","));
    }
}
