//! The shipped demo scenario extracts to a fixed instance.

use temporal_labeling::scenario::{demo_scenario, extract_instance};
use temporal_labeling::{check_model, solve, Algorithm, AmMode, Problem, SolveRequest, Status};

#[test]
fn demo_instance_is_stable() {
    let inst = extract_instance(&demo_scenario()).unwrap();
    let again = extract_instance(&demo_scenario()).unwrap();
    assert_eq!(inst.to_json(), again.to_json());
    let req = SolveRequest::new(Problem::Gmt, AmMode::Am1, Algorithm::Exact).with_min_duration(1.0);
    let r = solve(&inst, &req).unwrap();
    assert_eq!((inst.labels().len(), inst.presence_count(), inst.conflicts().len()), (40, 56, 24));
    assert_eq!(inst.complexity(), 80);
    assert!((r.objective - 1721.381_879_672_46).abs() < 1e-6, "{}", r.objective);
    assert_eq!(r.status, Status::Optimal);
    assert!(check_model(&inst, &r.phi, AmMode::Am1, None, Some(1.0)).unwrap().valid);
}
