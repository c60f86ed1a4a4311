//! A small benchmark: synthetic navigation instances, every algorithm under
//! every activity model, CSV tables and SVG plots.
//!
//! cargo run --release --example benchmark [out-dir]

use std::path::PathBuf;
use std::time::Duration;

use temporal_labeling::bench::{reproduction_suite, run_bench, BenchConfig};
use temporal_labeling::{AmMode, Algorithm, Problem};

fn main() -> temporal_labeling::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("tlabel-bench"));
    let suite = reproduction_suite(6, 1)?;
    let config = BenchConfig {
        problems: vec![Problem::Gmt, Problem::Krmt(2)],
        time_limit: Duration::from_secs(30),
        intgraph_relaxed: true,
        ..BenchConfig::default()
    };
    let report = run_bench(&suite, &config)?;
    report.write(&out)?;

    for problem in &config.problems {
        for mode in AmMode::ALL {
            let q: Vec<String> = Algorithm::ALL
                .iter()
                .map(|&a| match report.mean_quality(*problem, mode, a) {
                    Some(q) => format!("{a} {q:.3}"),
                    None => format!("{a} -"),
                })
                .collect();
            println!("{:<10} {mode}: {}", problem.to_string(), q.join("  "));
        }
    }
    for r in &report.ratios {
        println!("{} {} AM2/AM1 {:.3} AM3/AM1 {:.3}", r.instance, r.problem, r.am2_am1.unwrap_or(f64::NAN), r.am3_am1.unwrap_or(f64::NAN));
    }
    println!("\nwrote {}", out.display());
    Ok(())
}
