//! The command layer behind the `tlabel` binary and the benchmark harness.
//!
//! Every command reads and writes plain files so that runs can be scripted;
//! [`exit_code`] maps solver outcomes to process exit codes.

mod report;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{build_graph_with, GraphOptions};
use crate::instance::{ActivitySet, Instance};
use crate::scenario::{extract_instance, random_scenario, Scenario, SynthConfig};
use crate::solvers::{solve, SolveRequest, SolveResult, Status};
use crate::validation::{check_model, AmMode, ValidationReport};

pub use report::{run_bench, AmRatioRow, BenchConfig, BenchReport, BenchRow, ReferenceKind, BENCH_COLUMNS, RATIO_COLUMNS};
pub use svg::scatter_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_TIMEOUT: i32 = 4;
pub const EXIT_SIZE_ABORT: i32 = 5;

/// Exit code for a finished solve.
pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Optimal | Status::Feasible => EXIT_OK,
        Status::Timeout => EXIT_TIMEOUT,
        Status::Unsupported => EXIT_UNSUPPORTED,
        Status::SizeAbort => EXIT_SIZE_ABORT,
    }
}

/// Where `generate` takes its scenario from.
#[derive(Clone, Debug)]
pub enum ScenarioSource {
    File(PathBuf),
    Synthetic { config: SynthConfig, seed: u64 },
}

impl ScenarioSource {
    pub fn scenario(&self) -> Result<Scenario> {
        match self {
            ScenarioSource::File(path) => Scenario::load(fs::File::open(path)?),
            ScenarioSource::Synthetic { config, seed } => Ok(random_scenario(config, *seed)),
        }
    }
}

/// Extracts an instance from a scenario and writes it to `out`. Equal
/// sources give byte-identical files.
pub fn cmd_generate(source: &ScenarioSource, out: &Path) -> Result<Instance> {
    let instance = extract_instance(&source.scenario()?)?;
    write_text(out, &instance.to_json())?;
    Ok(instance)
}

/// Synthetic instance family for the heuristic comparison: routes of one
/// edge per three features, feature counts drawn from 40 to 1000, kept
/// when the complexity lies in [100, 3000].
pub fn reproduction_suite(count: usize, seed: u64) -> Result<Vec<(String, Instance)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let pois = rng.gen_range(40..=1000);
        let scenario_seed = rng.gen();
        let config = SynthConfig { pois, edges: pois / 3, ..SynthConfig::default() };
        let instance = extract_instance(&random_scenario(&config, scenario_seed))?;
        if (100..=3000).contains(&instance.complexity()) {
            out.push((format!("nav{:03}", out.len()), instance));
        }
    }
    Ok(out)
}

/// Writes `instances` as `<name>.json` files into `dir`.
pub fn write_suite(dir: &Path, instances: &[(String, Instance)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, instance) in instances {
        write_text(&dir.join(format!("{name}.json")), &instance.to_json())?;
    }
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    Instance::load(fs::File::open(path)?)
}

pub fn read_solution(path: &Path) -> Result<ActivitySet> {
    ActivitySet::load(fs::File::open(path)?)
}

/// Path of the metadata file written next to a solution.
pub fn sidecar_path(solution: &Path) -> PathBuf {
    solution.with_extension("meta.json")
}

/// Solves an instance file, re-validates the answer under the requested
/// model and writes the solution and its sidecar when `out` is given.
pub fn cmd_solve(instance_path: &Path, req: &SolveRequest, out: Option<&Path>) -> Result<SolveResult> {
    let instance = read_instance(instance_path)?;
    let result = solve(&instance, req)?;
    let report = check_model(&instance, &result.phi, req.mode, req.problem.k(), Some(req.min_duration))?;
    if !report.valid {
        return Err(Error::Integrity(format!("solver produced an invalid solution: {}", report.to_json())));
    }
    if let Some(out) = out {
        write_text(out, &result.phi.to_json())?;
        let sidecar = serde_json::to_string_pretty(&result.sidecar(req))?;
        write_text(&sidecar_path(out), &sidecar)?;
    }
    Ok(result)
}

/// Checks a solution file against an instance file.
pub fn cmd_validate(
    instance_path: &Path,
    solution_path: &Path,
    mode: AmMode,
    k: Option<usize>,
    min_duration: Option<f64>,
) -> Result<ValidationReport> {
    let instance = read_instance(instance_path)?;
    let phi = read_solution(solution_path)?;
    check_model(&instance, &phi, mode, k, min_duration)
}

/// Conflict graph of an instance file in the line format of
/// [`crate::ConflictGraph::to_dimacs`].
pub fn cmd_graph_dump(instance_path: &Path, mode: AmMode, min_duration: f64) -> Result<String> {
    let instance = read_instance(instance_path)?;
    let opts = GraphOptions { min_duration, ..GraphOptions::default() };
    Ok(build_graph_with(&instance, mode, &opts)?.to_dimacs())
}

/// Runs the benchmark matrix on every `*.json` instance in `dir` and writes
/// `bench.csv`, `am_ratios.csv` and scatter plots into `out_dir`.
pub fn cmd_bench(dir: &Path, config: &BenchConfig, out_dir: &Path) -> Result<BenchReport> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && !p.to_string_lossy().ends_with(".meta.json"))
        .collect();
    paths.sort();
    let mut instances = Vec::with_capacity(paths.len());
    for p in paths {
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        instances.push((name, read_instance(&p)?));
    }
    let report = run_bench(&instances, config)?;
    report.write(out_dir)?;
    Ok(report)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::i1;
    use crate::solvers::{Algorithm, Problem};

    fn i1_file(dir: &Path) -> PathBuf {
        let p = dir.join("i1.json");
        fs::write(&p, i1().to_json()).unwrap();
        p
    }

    #[test]
    fn solve_writes_valid_solution_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let inst = i1_file(dir.path());
        let out = dir.path().join("sol.json");
        let req = SolveRequest::new(Problem::Gmt, AmMode::Am2, Algorithm::Exact).with_min_duration(1.0);
        let r = cmd_solve(&inst, &req, Some(&out)).unwrap();
        assert_eq!(r.objective, 20.0);
        let report = cmd_validate(&inst, &out, AmMode::Am2, None, Some(1.0)).unwrap();
        assert!(report.valid);
        let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(sidecar_path(&out)).unwrap()).unwrap();
        assert_eq!(meta["status"], "OPTIMAL");
        assert_eq!(meta["objective"], 20.0);
    }

    #[test]
    fn krmt_greedy_and_unsupported_pls() {
        let dir = tempfile::tempdir().unwrap();
        let inst = i1_file(dir.path());
        let req = SolveRequest::new(Problem::Krmt(1), AmMode::Am1, Algorithm::Greedy);
        assert_eq!(cmd_solve(&inst, &req, None).unwrap().objective, 10.0);
        let req = SolveRequest::new(Problem::Krmt(1), AmMode::Am1, Algorithm::Pls);
        let r = cmd_solve(&inst, &req, None).unwrap();
        assert_eq!(exit_code(r.status), EXIT_UNSUPPORTED);
    }

    #[test]
    fn generate_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let source = ScenarioSource::Synthetic { config: SynthConfig::default(), seed: 9 };
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
        cmd_generate(&source, &a).unwrap();
        cmd_generate(&source, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }

    #[test]
    fn generate_without_features() {
        let dir = tempfile::tempdir().unwrap();
        let config = SynthConfig { pois: 0, ..SynthConfig::default() };
        let inst = cmd_generate(&ScenarioSource::Synthetic { config, seed: 1 }, &dir.path().join("e.json")).unwrap();
        assert_eq!(inst.labels().len(), 0);
    }

    #[test]
    fn graph_dump_of_i1() {
        let dir = tempfile::tempdir().unwrap();
        let text = cmd_graph_dump(&i1_file(dir.path()), AmMode::Am1, 0.0).unwrap();
        assert!(text.lines().any(|l| l.starts_with("e ")));
    }
}
