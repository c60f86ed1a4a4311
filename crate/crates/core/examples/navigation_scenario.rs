//! A navigation scenario end to end: the smoothed route, the viewport along
//! it, the extracted interval instance and a labeling of it.
//!
//! cargo run --release --example navigation_scenario

use temporal_labeling::scenario::{demo_scenario, extract_with, label_box_in_view};
use temporal_labeling::{solve, AmMode, Algorithm, Problem, SolveRequest};

fn main() -> temporal_labeling::Result<()> {
    let scenario = demo_scenario();
    let trajectory = scenario.trajectory()?;
    println!("route of {} points, {:.0} m, driven in {:.1} s", scenario.route.len(), trajectory.length(), trajectory.duration());
    for p in trajectory.pieces() {
        println!("  {:>6.1} s to {:>6.1} s at {:>4.1} m/s", p.t0, p.t1, p.speed);
    }
    for r in &trajectory.zoom_plan().ramps {
        println!("  zoom {:.3} -> {:.3} from {:.1} s to {:.1} s", r.from, r.to, r.start, r.end);
    }

    let view = scenario.view_geometry()?;
    let t = trajectory.duration() / 2.0;
    let pose = trajectory.pose_at(t)?;
    println!("\nat {t:.1} s: center ({:.1}, {:.1}), heading {:.1} deg, zoom {:.3}", pose.center[0], pose.center[1], pose.angle.to_degrees(), pose.zoom);
    let visible = scenario.pois.iter().filter(|p| label_box_in_view(&pose, p, &view).is_some()).count();
    println!("{visible} of {} labels on screen", scenario.pois.len());

    let settings = &scenario.settings;
    let ex = extract_with(&scenario, settings.sample_step_s, settings.tolerance_s)?;
    let inst = &ex.instance;
    println!(
        "\ninstance: {} labels, {} presences, {} conflicts ({} samples, {} label pairs tested)",
        inst.labels().len(),
        inst.presence_count(),
        inst.conflicts().len(),
        ex.samples,
        ex.pairs_tested
    );

    let req = SolveRequest::new(Problem::Gmt, AmMode::Am2, Algorithm::Exact).with_min_duration(1.0);
    let res = solve(inst, &req)?;
    println!("AM2 optimum {:.1} ({}) with {} activities", res.objective, res.status, res.phi.len());
    Ok(())
}
