use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use temporal_labeling::bench::{
    cmd_bench, cmd_generate, cmd_graph_dump, cmd_solve, cmd_validate, exit_code, reproduction_suite, write_suite, BenchConfig,
    ScenarioSource, EXIT_ERROR, EXIT_INVALID, EXIT_OK,
};
use temporal_labeling::scenario::SynthConfig;
use temporal_labeling::solvers::{PhaseSchedule, PlsParams};
use temporal_labeling::{AmMode, Algorithm, Problem, SolveRequest};

#[derive(Parser)]
#[command(name = "tlabel", version, about = "Temporal map labeling: generate, solve, validate and benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract an instance from a scenario file or a seeded synthetic scenario.
    Generate {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Point features of the synthetic scenario.
        #[arg(long)]
        pois: Option<usize>,
        /// Route edges of the synthetic scenario.
        #[arg(long)]
        edges: Option<usize>,
        /// Also write the synthetic scenario.
        #[arg(long)]
        scenario_out: Option<PathBuf>,
        /// Write this many instances of the benchmark suite into `--out`.
        #[arg(long)]
        suite: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance file.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = AlgoArg::Exact)]
        algo: AlgoArg,
        /// Solution file; a `.meta.json` sidecar is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution file against an instance file.
    Validate {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long, value_enum, default_value_t = ProblemArg::Gmt)]
        problem: ProblemArg,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "1", value_parser = parse_mode)]
        am: AmMode,
        #[arg(long, default_value_t = 1.0)]
        min_activity: f64,
    },
    /// Print the conflict graph of an instance.
    GraphDump {
        instance: PathBuf,
        #[arg(long, default_value = "1", value_parser = parse_mode)]
        am: AmMode,
        #[arg(long, default_value_t = 1.0)]
        min_activity: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the solver matrix on a directory of instance files.
    Bench {
        dir: PathBuf,
        /// Restrict to one problem; both run by default.
        #[arg(long, value_enum)]
        problem: Option<ProblemArg>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Restrict to one activity model.
        #[arg(long, value_parser = parse_mode)]
        am: Option<AmMode>,
        /// Restrict to one algorithm.
        #[arg(long, value_enum)]
        algo: Option<AlgoArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 600.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 1.0)]
        min_activity: f64,
        #[arg(long)]
        intgraph_relaxed: bool,
        #[arg(long, value_enum, default_value_t = ScheduleArg::Paper)]
        pls_phase_schedule: ScheduleArg,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = ProblemArg::Gmt)]
    problem: ProblemArg,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value = "1", value_parser = parse_mode)]
    am: AmMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    /// Shortest activity interval in seconds.
    #[arg(long, default_value_t = 1.0)]
    min_activity: f64,
    #[arg(long)]
    intgraph_relaxed: bool,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Paper)]
    pls_phase_schedule: ScheduleArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Gmt,
    Krmt,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Exact,
    Greedy,
    Pls,
    Intgraph,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Paper,
    Pullan,
}

fn parse_mode(s: &str) -> Result<AmMode, String> {
    s.parse().map_err(|e: temporal_labeling::Error| e.to_string())
}

fn problem(p: ProblemArg, k: usize) -> Problem {
    match p {
        ProblemArg::Gmt => Problem::Gmt,
        ProblemArg::Krmt => Problem::Krmt(k),
    }
}

fn algorithm(a: AlgoArg) -> Algorithm {
    match a {
        AlgoArg::Exact => Algorithm::Exact,
        AlgoArg::Greedy => Algorithm::Greedy,
        AlgoArg::Pls => Algorithm::Pls,
        AlgoArg::Intgraph => Algorithm::IntGraph,
    }
}

fn pls(s: ScheduleArg) -> PlsParams {
    let schedule = match s {
        ScheduleArg::Paper => PhaseSchedule::Paper,
        ScheduleArg::Pullan => PhaseSchedule::Pullan,
    };
    PlsParams { schedule, ..PlsParams::default() }
}

fn seconds(s: f64) -> temporal_labeling::Result<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| temporal_labeling::Error::Request(format!("bad time limit {s}")))
}

fn run(cli: Cli) -> temporal_labeling::Result<i32> {
    match cli.command {
        Command::Generate { scenario, seed, pois, edges, scenario_out, suite, out } => {
            if let Some(n) = suite {
                let instances = reproduction_suite(n, seed)?;
                write_suite(&out, &instances)?;
                println!("wrote {} instances to {}", instances.len(), out.display());
                return Ok(EXIT_OK);
            }
            let source = match scenario {
                Some(path) => ScenarioSource::File(path),
                None => {
                    let d = SynthConfig::default();
                    let config = SynthConfig { pois: pois.unwrap_or(d.pois), edges: edges.unwrap_or(d.edges), ..d };
                    ScenarioSource::Synthetic { config, seed }
                }
            };
            if let Some(path) = scenario_out {
                std::fs::write(path, source.scenario()?.to_json())?;
            }
            let instance = cmd_generate(&source, &out)?;
            println!(
                "labels {} presences {} conflicts {} complexity {}",
                instance.labels().len(),
                instance.presence_count(),
                instance.conflicts().len(),
                instance.complexity()
            );
            Ok(EXIT_OK)
        }
        Command::Solve { instance, solver, algo, out } => {
            let req = SolveRequest::new(problem(solver.problem, solver.k), solver.am, algorithm(algo))
                .with_seed(solver.seed)
                .with_time_limit(seconds(solver.time_limit)?)
                .with_min_duration(solver.min_activity)
                .with_intgraph_relaxed(solver.intgraph_relaxed)
                .with_pls(pls(solver.pls_phase_schedule));
            let result = cmd_solve(&instance, &req, out.as_deref())?;
            println!("{}", serde_json::to_string(&result.sidecar(&req))?);
            Ok(exit_code(result.status))
        }
        Command::Validate { instance, solution, problem: p, k, am, min_activity } => {
            let report = cmd_validate(&instance, &solution, am, problem(p, k).k(), Some(min_activity))?;
            println!("{}", report.to_json());
            Ok(if report.valid { EXIT_OK } else { EXIT_INVALID })
        }
        Command::GraphDump { instance, am, min_activity, out } => {
            let text = cmd_graph_dump(&instance, am, min_activity)?;
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(EXIT_OK)
        }
        Command::Bench {
            dir,
            problem: p,
            k,
            am,
            algo,
            seed,
            time_limit,
            min_activity,
            intgraph_relaxed,
            pls_phase_schedule,
            workers,
            out,
        } => {
            let d = BenchConfig::default();
            let config = BenchConfig {
                problems: match p {
                    Some(p) => vec![problem(p, k)],
                    None => vec![Problem::Gmt, Problem::Krmt(k)],
                },
                modes: am.map_or(d.modes, |m| vec![m]),
                algorithms: algo.map_or(d.algorithms, |a| vec![algorithm(a)]),
                time_limit: seconds(time_limit)?,
                seed,
                workers,
                min_duration: min_activity,
                intgraph_relaxed,
                pls: pls(pls_phase_schedule),
            };
            let report = cmd_bench(&dir, &config, &out)?;
            println!("{} runs, results in {}", report.rows.len(), out.display());
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
