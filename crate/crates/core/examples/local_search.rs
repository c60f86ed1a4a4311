//! Phased local search on a conflict graph: the two phase schedules, and
//! the repair that turns its independent set into a valid AM3 solution.
//!
//! cargo run --release --example local_search

use std::time::Duration;

use temporal_labeling::scenario::{extract_instance, random_scenario, SynthConfig};
use temporal_labeling::solvers::{pls_search, PhaseSchedule, PlsParams};
use temporal_labeling::validation::saturate_and_repair;
use temporal_labeling::{build_graph_with, check_model, AmMode, GraphOptions};

fn main() -> temporal_labeling::Result<()> {
    let config = SynthConfig { pois: 150, edges: 50, ..SynthConfig::default() };
    let instance = extract_instance(&random_scenario(&config, 11))?;
    let opts = GraphOptions { min_duration: 1.0, ..GraphOptions::default() };
    let graph = build_graph_with(&instance, AmMode::Am3, &opts)?;
    println!("AM3 graph: {} candidates, {} edges", graph.len(), graph.edge_count());

    for schedule in [PhaseSchedule::Paper, PhaseSchedule::Pullan] {
        let params = PlsParams { schedule, budget: Duration::from_secs(5), max_iterations: Some(20_000), ..PlsParams::default() };
        let set = pls_search(&graph, &params, 1);
        let repaired = saturate_and_repair(&instance, &graph, &set)?;
        let phi = graph.activity(&repaired);
        let valid = check_model(&instance, &phi, AmMode::Am3, None, Some(1.0))?.valid;
        println!(
            "{schedule:?}: independent set weight {:.1}, after repair {:.1}, valid {valid}",
            graph.selection_weight(&set),
            graph.selection_weight(&repaired)
        );
    }
    Ok(())
}
