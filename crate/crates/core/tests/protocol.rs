use std::time::Instant;

use msep_core::gf2::Rng;
use msep_core::learner::AmuLearner;
use msep_core::protocol::{adversary_harness, DecisionRule, LowWeightEavesdropper};
use msep_core::taskgen::{LpnTask, TaskParams};

fn report(n: usize, sessions: u64) -> f64 {
    let task = LpnTask::new(TaskParams::new(n).unwrap()).unwrap();
    let k = task.params.k;
    let t = Instant::now();
    let mut rng = Rng::new(n as u64, "eavesdrop", 0);
    let rep = adversary_harness(
        &task,
        &AmuLearner,
        &LowWeightEavesdropper::default(),
        k,
        DecisionRule::Threshold(0.25),
        sessions,
        &mut rng,
    )
    .unwrap();
    eprintln!(
        "n={n} k={k}: accuracy {:?} in {:?}",
        rep.accuracy,
        t.elapsed()
    );
    rep.accuracy.rate
}

#[test]
fn lowweight_eavesdropper_breaks_tiny_instances() {
    assert!(report(12, 200) >= 0.9);
}

#[test]
fn lowweight_eavesdropper_is_blind_at_moderate_n() {
    assert!(report(48, 50) <= 0.6);
}
