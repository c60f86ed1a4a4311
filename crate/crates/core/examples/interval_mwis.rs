//! Maximum-weight independent set of intervals, the subroutine of the
//! interval-graph heuristic. Touching intervals count as overlapping.
//!
//! cargo run --example interval_mwis

use temporal_labeling::solvers::mwis_intervals;
use temporal_labeling::TimeInterval;

fn main() {
    let items = vec![
        (TimeInterval::new(0.0, 4.0), 4.0),
        (TimeInterval::new(3.0, 6.0), 3.0),
        (TimeInterval::new(4.0, 9.0), 5.0),
        (TimeInterval::new(6.5, 8.0), 1.5),
        (TimeInterval::new(9.5, 12.0), 2.5),
        (TimeInterval::new(1.0, 11.0), 10.0),
    ];
    let chosen = mwis_intervals(&items);
    let total: f64 = chosen.iter().map(|&i| items[i].1).sum();
    for &i in &chosen {
        println!("{} weight {}", items[i].0, items[i].1);
    }
    println!("total {total}");
}
