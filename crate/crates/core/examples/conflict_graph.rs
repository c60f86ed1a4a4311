//! Conflict graphs over activity candidates under the three activity models,
//! and the effect of a minimum activity length.
//!
//! cargo run --example conflict_graph

use temporal_labeling::{build_graph, build_graph_with, AmMode, GraphOptions, Instance};

const INSTANCE: &str = r#"{
  "horizon": 12,
  "labels": [
    {"id": 1, "weight": 1.0, "name": "Harbor"},
    {"id": 2, "weight": 2.0, "name": "Station"},
    {"id": 3, "weight": 1.5, "name": "Bridge"}
  ],
  "presences": [
    {"label": 1, "start": 0, "end": 12},
    {"label": 2, "start": 1, "end": 9},
    {"label": 3, "start": 3, "end": 12}
  ],
  "conflicts": [
    {"a": 1, "b": 2, "start": 2, "end": 5},
    {"a": 2, "b": 3, "start": 6, "end": 8}
  ]
}"#;

fn main() -> temporal_labeling::Result<()> {
    let instance = Instance::from_json(INSTANCE)?;
    for mode in AmMode::ALL {
        let g = build_graph(&instance, mode)?;
        println!("{mode}: {} candidates, {} edges, {} clusters", g.len(), g.edge_count(), g.clusters().len());
        for c in g.candidates() {
            println!("  v{:<2} label {} {} weight {:.1} degree {}", c.id, c.label_id, c.interval, c.weight, g.degree(c.id));
        }
    }

    let opts = GraphOptions { min_duration: 3.0, ..GraphOptions::default() };
    let g = build_graph_with(&instance, AmMode::Am3, &opts)?;
    println!("\nAM3 with activities of at least 3 s: {} candidates", g.len());

    println!("\nAM2 graph as text:");
    print!("{}", build_graph(&instance, AmMode::Am2)?.to_dimacs());
    Ok(())
}
