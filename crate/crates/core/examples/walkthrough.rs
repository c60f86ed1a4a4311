//! Builds a three-label instance, checks a few activity sets against the
//! validity rules and activity models, and solves it exactly.
//!
//! cargo run --example walkthrough

use temporal_labeling::{
    check_model, check_valid, is_justified, solve, ActivitySet, AmMode, Algorithm, Conflict, Instance, Label, LabelId, Problem,
    SolveRequest, TimeInterval,
};

fn main() -> temporal_labeling::Result<()> {
    // Labels 1 and 2 share [0, 10] and collide on [4, 6]; label 3 is alone.
    let instance = Instance::new(
        10.0,
        vec![Label::new(1, 1.0, "Main St"), Label::new(2, 1.0, "Park"), Label::new(3, 1.0, "Museum")],
        vec![
            (LabelId(1), TimeInterval::new(0.0, 10.0)),
            (LabelId(2), TimeInterval::new(0.0, 10.0)),
            (LabelId(3), TimeInterval::new(2.0, 8.0)),
        ],
        vec![Conflict::new(1, 2, 4.0, 6.0)],
    )?;
    println!("labels {} presences {} conflicts {} complexity {}", instance.labels().len(), instance.presence_count(), instance.conflicts().len(), instance.complexity());

    let both_full = ActivitySet::from_pairs([(1, 0.0, 10.0), (2, 0.0, 10.0), (3, 2.0, 8.0)]);
    let report = check_valid(&instance, &both_full)?;
    println!("\nboth labels shown throughout: valid = {}", report.valid);
    for v in &report.violations {
        println!("  {:?} labels {:?} on [{}, {}]", v.rule, v.labels, v.start, v.end);
    }

    // Label 2 yields at 4 where the conflict starts: justified, so AM2 holds.
    let yield_at_4 = ActivitySet::from_pairs([(1, 0.0, 10.0), (2, 0.0, 4.0), (3, 2.0, 8.0)]);
    let (start, end) = is_justified(&instance, &yield_at_4, LabelId(2), &TimeInterval::new(0.0, 4.0))?;
    println!("\nlabel 2 on [0, 4]: start justified {start}, end justified {end}");
    for mode in AmMode::ALL {
        let r = check_model(&instance, &yield_at_4, mode, None, None)?;
        println!("  {mode}: valid = {}", r.valid);
    }

    // Stopping at 3 has no reason: nothing conflicts with label 2 there.
    let early = ActivitySet::from_pairs([(1, 0.0, 10.0), (2, 0.0, 3.0), (3, 2.0, 8.0)]);
    let r = check_model(&instance, &early, AmMode::Am3, None, None)?;
    println!("\nlabel 2 on [0, 3] under AM3: valid = {} ({} violations)", r.valid, r.violations.len());

    println!("\nexact optima:");
    for problem in [Problem::Gmt, Problem::Krmt(1)] {
        for mode in AmMode::ALL {
            let res = solve(&instance, &SolveRequest::new(problem, mode, Algorithm::Exact))?;
            let acts: Vec<String> = res.phi.iter().map(|(l, iv)| format!("{l}:{iv}")).collect();
            println!("  {:<10} {mode}: {:>5} {}  {}", problem.to_string(), res.objective, res.status, acts.join(" "));
        }
    }
    Ok(())
}
