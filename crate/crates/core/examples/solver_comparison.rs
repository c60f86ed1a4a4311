//! Runs every algorithm under every activity model on one generated
//! navigation instance, for the unrestricted problem and with at most two
//! labels on screen. Quality is relative to the exact run, which is only an
//! incumbent when it reports TIMEOUT.
//!
//! cargo run --release --example solver_comparison [seed]

use std::time::Duration;

use temporal_labeling::scenario::{extract_instance, random_scenario, SynthConfig};
use temporal_labeling::{check_model, solve, AmMode, Algorithm, Problem, SolveRequest, Status};

fn main() -> temporal_labeling::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let config = SynthConfig { pois: 120, edges: 40, ..SynthConfig::default() };
    let instance = extract_instance(&random_scenario(&config, seed))?;
    println!("seed {seed}: {} labels, complexity {}\n", instance.labels().len(), instance.complexity());
    println!("{:<10} {:<4} {:<9} {:>10} {:>8} {:>11} {:>6}", "problem", "AM", "algo", "objective", "quality", "status", "ms");
    for problem in [Problem::Gmt, Problem::Krmt(2)] {
        for mode in AmMode::ALL {
            let mut optimum = None;
            for algorithm in Algorithm::ALL {
                let req = SolveRequest::new(problem, mode, algorithm)
                    .with_min_duration(1.0)
                    .with_time_limit(Duration::from_secs(10))
                    .with_intgraph_relaxed(true)
                    .with_seed(seed);
                let r = solve(&instance, &req)?;
                let valid = check_model(&instance, &r.phi, mode, problem.k(), Some(1.0))?.valid;
                assert!(valid, "{algorithm} returned an invalid solution");
                if algorithm == Algorithm::Exact {
                    optimum = Some(r.objective);
                }
                let quality = match optimum {
                    Some(o) if o > 0.0 && r.status != Status::Unsupported => format!("{:.3}", r.objective / o),
                    _ => String::new(),
                };
                let ms = r.runtime.as_secs_f64() * 1e3;
                println!("{:<10} {:<4} {:<9} {:>10.1} {:>8} {:>11} {:>6.1}", problem.to_string(), mode.to_string(), algorithm.to_string(), r.objective, quality, r.status.to_string(), ms);
            }
        }
    }
    Ok(())
}
