use super::*;
use crate::learner::{AmuLearner, ParityElimLearner, RandomLearner};
use crate::taskgen::{LpnTask, ModalityY, ParityTask, TaskParams};

fn lpn(n: usize, theta: f64, k: usize) -> LpnTask {
    LpnTask::new(TaskParams::with_noise(n, theta, k).unwrap()).unwrap()
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

#[test]
fn msg1_carries_only_the_second_modality() {
    let task = lpn(64, 0.45, 50);
    let mut rng = Rng::new(1, "msg1", 0);
    let (state, msg1) = alice_round1(&task, 50, &mut rng).unwrap();
    assert_eq!(msg1.ys.len(), 51);
    assert_eq!(state.xs().len(), 51);
    let frame = msg1.to_frame().unwrap();
    assert_eq!(Msg1::<ModalityY>::from_frame(&frame).unwrap(), msg1);
    for x in state.xs() {
        let bytes = x.xvec.to_bytes();
        assert!(bytes.iter().any(|&b| b != 0));
        assert!(!contains(&frame, &bytes), "xvec leaked into Msg1");
    }
}

#[test]
fn bob_bit_is_fair_and_serially_uncorrelated() {
    let task = ParityTask::new(8, 0.0).unwrap();
    let mut rng = Rng::new(2, "fair", 0);
    let results = run_ba_batch(
        &task,
        &RandomLearner,
        4,
        DecisionRule::Exact,
        10_000,
        &mut rng,
    )
    .unwrap();
    let s = BaSummary::from_results(&results);
    assert!((s.bob_ones.rate - 0.5).abs() <= 0.02, "{}", s.bob_ones.rate);
    assert!(
        s.bob_lag1_autocorrelation.abs() <= 0.05,
        "{}",
        s.bob_lag1_autocorrelation
    );
    assert!(results
        .iter()
        .enumerate()
        .all(|(i, r)| r.session_id == i as u64));
}

#[test]
fn bob_labels_are_reproducible_from_his_stream() {
    let task = lpn(12, 0.1, 20);
    let mut rng = Rng::new(3, "repro", 0);
    let (_, msg1) = alice_round1(&task, 20, &mut rng).unwrap();
    let mut seen = [false; 2];
    for i in 0..20 {
        let bob = Rng::new(3, "bob", i);
        let a = bob_round2(&task, &msg1, &mut bob.clone()).unwrap();
        let b = bob_round2(&task, &msg1, &mut bob.clone()).unwrap();
        assert_eq!(a, b);
        seen[usize::from(a.0)] = true;
    }
    assert_eq!(seen, [true, true]);
}

#[test]
fn uniform_branch_labels_are_balanced() {
    let task = lpn(32, 0.0, 999);
    let mut rng = Rng::new(4, "uniform-branch", 0);
    let (_, msg1) = alice_round1(&task, 999, &mut rng).unwrap();
    let mut i = 0;
    let labels = loop {
        let (b_b, msg2) = bob_round2(&task, &msg1, &mut Rng::new(4, "bob", i)).unwrap();
        if !b_b {
            break msg2.labels;
        }
        i += 1;
    };
    let ones: usize = labels
        .iter()
        .map(|z| z.zvec.weight() + usize::from(z.zbit))
        .sum();
    let mean = ones as f64 / (labels.len() * 33) as f64;
    assert!((mean - 0.5).abs() <= 0.01, "{mean}");
}

#[test]
fn threshold_rule_separates_the_branches() {
    let task = lpn(16, 0.05, 4096);
    let mut rng = Rng::new(5, "branches", 0);
    let mut zero_dis = Vec::new();
    for trial in 0..20 {
        let (state, msg1) = alice_round1(&task, 4096, &mut rng).unwrap();
        let labelled = trial % 2 == 0;
        let labels = if labelled {
            let w = task.sample_concept(&mut rng);
            msg1.ys
                .iter()
                .map(|y| task.label(&w, y, &mut rng).unwrap())
                .collect()
        } else {
            msg1.ys
                .iter()
                .map(|_| task.random_label(&mut rng))
                .collect()
        };
        let msg2 = Msg2 {
            n: 16,
            space: task.label_space(),
            labels,
        };
        let out = alice_finish(
            &task,
            &AmuLearner,
            state,
            &msg2,
            DecisionRule::Threshold(0.25),
            &mut rng,
        )
        .unwrap();
        if labelled {
            assert!(out.b_a, "labelled branch rejected: {}", out.disagreement);
        } else {
            zero_dis.push(out.disagreement);
        }
    }
    let mean = zero_dis.iter().sum::<f64>() / zero_dis.len() as f64;
    assert!((mean - 0.5).abs() <= 0.1, "{mean}");
}

#[test]
fn agreement_in_the_low_noise_regime() {
    let task = lpn(16, 0.05, 4096);
    let mut rng = Rng::new(6, "agree", 0);
    let rule = DecisionRule::default_for(task.label_space());
    assert_eq!(rule, DecisionRule::Threshold(0.25));
    let results = run_ba_batch(&task, &AmuLearner, 4096, rule, 200, &mut rng).unwrap();
    let s = BaSummary::from_results(&results);
    assert!(s.agreement.rate >= 0.9, "{:?}", s.agreement);
    assert!(
        s.alice_one_given_one.rate >= 0.95,
        "{:?}",
        s.alice_one_given_one
    );
    assert!(
        s.alice_zero_given_zero.rate >= 0.95,
        "{:?}",
        s.alice_zero_given_zero
    );
}

#[test]
fn sabotaged_learner_agrees_by_chance() {
    let task = lpn(16, 0.05, 4096);
    let mut rng = Rng::new(7, "sabotage", 0);
    let results = run_ba_batch(
        &task,
        &RandomLearner,
        4096,
        DecisionRule::Threshold(0.25),
        200,
        &mut rng,
    )
    .unwrap();
    let rate = BaSummary::from_results(&results).agreement.rate;
    assert!((rate - 0.5).abs() <= 0.07, "{rate}");
}

#[test]
fn exact_rule_with_a_perfect_learner() {
    let task = ParityTask::new(16, 0.0).unwrap();
    assert_eq!(
        DecisionRule::default_for(task.label_space()),
        DecisionRule::Exact
    );
    let mut rng = Rng::new(8, "exact", 0);
    let results = run_ba_batch(
        &task,
        &ParityElimLearner,
        64,
        DecisionRule::Exact,
        400,
        &mut rng,
    )
    .unwrap();
    let s = BaSummary::from_results(&results);
    // a correct label is always predicted; a uniform one matches half the time
    assert_eq!(s.alice_one_given_one.rate, 1.0);
    assert!(
        (s.alice_zero_given_zero.rate - 0.5).abs() <= 0.08,
        "{:?}",
        s.alice_zero_given_zero
    );
    for r in &results {
        assert_eq!(r.b_a, r.alice_disagreement == 0.0);
    }
}

#[test]
fn sessions_replay_identically_over_both_transports() {
    let task = lpn(10, 0.1, 30);
    let rule = DecisionRule::Threshold(0.25);
    let run = |seed| {
        run_ba_session(
            &task,
            &AmuLearner,
            30,
            rule,
            7,
            &mut Rng::new(seed, "replay", 0),
        )
        .unwrap()
    };
    let (r1, t1) = run(9);
    let (r2, t2) = run(9);
    assert_eq!((r1, &t1), (r2, &t2));
    let (r3, t3) = run_ba_session_socket(
        &task,
        &AmuLearner,
        30,
        rule,
        7,
        &mut Rng::new(9, "replay", 0),
    )
    .unwrap();
    assert_eq!((r1, &t1), (r3, &t3));
    let (_, t4) = run(10);
    assert_ne!(t1.msg1, t4.msg1);

    assert_eq!(t1.wire_bytes(), [t1.msg1.clone(), t1.msg2.clone()].concat());
    let (m1, m2) = t1.decode::<LpnTask>().unwrap();
    assert_eq!((m1.ys.len(), m2.labels.len()), (31, 31));
    assert_eq!(t1.params.k, 30);
}

#[test]
fn malformed_messages_are_rejected() {
    let task = lpn(8, 0.1, 4);
    let mut rng = Rng::new(11, "bad", 0);
    let (mut alice, mut bob) = memory_pair();
    alice
        .send(encode_frame(TAG_MSG2, &[0; 12]).unwrap())
        .unwrap();
    assert!(matches!(
        bob_serve(&task, &mut bob, &mut rng),
        Err(Error::Protocol(_))
    ));

    let other = lpn(9, 0.1, 4);
    let (_, msg1) = alice_round1(&other, 4, &mut rng).unwrap();
    assert!(matches!(
        bob_round2(&task, &msg1, &mut rng),
        Err(Error::Protocol(_))
    ));

    let (state, msg1) = alice_round1(&task, 4, &mut rng).unwrap();
    let (_, mut msg2) = bob_round2(&task, &msg1, &mut rng).unwrap();
    msg2.labels.pop();
    let err = alice_finish(
        &task,
        &AmuLearner,
        state,
        &msg2,
        DecisionRule::Exact,
        &mut rng,
    );
    assert!(matches!(err, Err(Error::Protocol(_))));
    assert!(alice_round1(&task, 0, &mut rng).is_err());
}

#[test]
fn key_agreement_in_the_low_noise_regime() {
    let task = lpn(32, 0.02, 8192);
    let cfg = KaConfig {
        k: 8192,
        m_sessions: 64,
        key_len: 32,
        rule: DecisionRule::Threshold(0.2),
    };
    let mut rng = Rng::new(12, "ka", 0);
    let (res, transcript) = run_ka(&task, &AmuLearner, &cfg, &mut rng).unwrap();
    assert_eq!((res.key_a.len(), res.key_b.len()), (32, 32));
    assert_eq!(res.raw_errors, 0);
    assert!(res.keys_equal());
    assert_eq!(transcript.sessions.len(), 64);
    assert_eq!(
        SeedMsg::from_frame(&transcript.seed_frame).unwrap().seed,
        res.seed
    );
    assert_eq!(res.seed.len(), 64 + 32 - 1);

    let keys_only = run_ka_keys(&task, &AmuLearner, &cfg, &mut Rng::new(12, "ka", 0)).unwrap();
    assert_eq!(keys_only, res);
}

#[test]
fn key_agreement_edge_cases() {
    let task = ParityTask::new(8, 0.0).unwrap();
    let mut cfg = KaConfig {
        k: 16,
        m_sessions: 10,
        key_len: 0,
        rule: DecisionRule::Exact,
    };
    let mut rng = Rng::new(13, "ka-edge", 0);
    let res = run_ka_keys(&task, &ParityElimLearner, &cfg, &mut rng).unwrap();
    assert!(res.key_a.is_empty() && res.keys_equal());
    cfg.key_len = 11;
    assert!(run_ka_keys(&task, &ParityElimLearner, &cfg, &mut rng).is_err());
}

#[test]
fn coin_flip_adversary_is_blind() {
    let task = ParityTask::new(8, 0.0).unwrap();
    let mut rng = Rng::new(14, "coin", 0);
    let rep = adversary_harness(
        &task,
        &ParityElimLearner,
        &CoinFlipEavesdropper,
        8,
        DecisionRule::Exact,
        1000,
        &mut rng,
    )
    .unwrap();
    assert_eq!(rep.sessions, 1000);
    assert!(
        (rep.accuracy.rate - 0.5).abs() <= 0.03,
        "{:?}",
        rep.accuracy
    );
}
