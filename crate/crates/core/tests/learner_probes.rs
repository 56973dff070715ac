use msep_core::gf2::{uniform_vec, Rng};
use msep_core::learner::{gauss_attack, learn_amu, lowweight_attack, GaussConfig, LowWeightConfig};
use msep_core::taskgen::{
    project_yz, sample_dataset, sample_zeta, LabelZ, ModalityY, Secret, TaskParams,
};

fn yz_pairs(p: &TaskParams, count: usize, rng: &mut Rng) -> (Secret, Vec<(ModalityY, LabelZ)>) {
    let s = sample_zeta(p, rng);
    let d = sample_dataset(p, &s, count, rng).unwrap();
    (s, project_yz(&d).unwrap())
}

#[test]
fn lowweight_recovers_at_n12() {
    let p = TaskParams::new(12).unwrap();
    let mut hits = 0;
    for t in 0..100 {
        let mut rng = Rng::new(t, "lowweight-recover", 0);
        let (s, ps) = yz_pairs(&p, 50, &mut rng);
        let got = lowweight_attack(&ps, 12, &LowWeightConfig::default()).unwrap();
        hits += usize::from(got.as_ref() == Some(&s));
    }
    assert!(hits >= 90, "{hits}/100");
}

#[test]
fn lowweight_rejects_uniform_labels() {
    let p = TaskParams::new(12).unwrap();
    let mut found = 0;
    for t in 0..100 {
        let mut rng = Rng::new(t, "lowweight-uniform", 0);
        let (_, mut ps) = yz_pairs(&p, 200, &mut rng);
        for (_, z) in ps.iter_mut() {
            z.zvec = uniform_vec(12, &mut rng);
            z.zbit = rng.bit();
        }
        found += usize::from(
            lowweight_attack(&ps, 12, &LowWeightConfig::default())
                .unwrap()
                .is_some(),
        );
    }
    assert!(found <= 5, "{found}/100");
}

#[test]
fn gauss_breaks_n16() {
    let p = TaskParams::new(16).unwrap();
    let cfg = GaussConfig {
        trials: 10_000,
        ..Default::default()
    };
    let mut hits = 0;
    for t in 0..20 {
        let mut rng = Rng::new(t, "gauss16", 0);
        let (s, ps) = yz_pairs(&p, 100, &mut rng);
        let got = gauss_attack(&ps, 16, &cfg, &mut rng).unwrap();
        if let Some(g) = &got {
            assert_eq!(g, &s, "validated candidate must be the planted secret");
        }
        hits += usize::from(got.is_some());
    }
    assert!(hits >= 10, "{hits}/20");
}

#[test]
fn gauss_fails_at_n64() {
    let p = TaskParams::new(64).unwrap();
    let cfg = GaussConfig {
        trials: 1_000,
        ..Default::default()
    };
    let mut hits = 0;
    for t in 0..20 {
        let mut rng = Rng::new(t, "gauss64", 0);
        let (_, ps) = yz_pairs(&p, 100, &mut rng);
        hits += usize::from(gauss_attack(&ps, 64, &cfg, &mut rng).unwrap().is_some());
    }
    // per-seed success ≈ 0.055; P(Bin(20, 0.055) >= 5) ≈ 0.003
    assert!(hits <= 4, "{hits}/20");
}

#[test]
fn min_bin_size_at_default_k() {
    let n = 24;
    let p = TaskParams::new(n).unwrap();
    let mut ok = 0;
    for t in 0..100 {
        let mut rng = Rng::new(t, "min-bin", 0);
        let s = sample_zeta(&p, &mut rng);
        let d = sample_dataset(&p, &s, p.k, &mut rng).unwrap();
        let (_, stats) = learn_amu(&d, n).unwrap();
        ok += usize::from(stats.min_bin_size as usize >= p.k / (2 * n));
    }
    assert!(ok >= 99, "{ok}/100");
}

/// Recovery rate over 50 trials at k in {n², 4n², n³}. At θ = 0.12 and n = 24
/// votes are right with probability ≈ 0.59, so the three sizes land near 0,
/// one half and 1.
fn recovery_rates(theta: f64) -> Vec<usize> {
    let n = 24;
    [n * n, 4 * n * n, n * n * n]
        .iter()
        .map(|&k| {
            let p = TaskParams::with_noise(n, theta, k).unwrap();
            (0..50)
                .filter(|&t| {
                    let mut rng = Rng::new(t, "monotone", k as u64);
                    let s = sample_zeta(&p, &mut rng);
                    let d = sample_dataset(&p, &s, k, &mut rng).unwrap();
                    learn_amu(&d, n).unwrap().0.matches(&s)
                })
                .count()
        })
        .collect()
}

#[test]
fn recovery_is_monotone_in_k() {
    for theta in [0.12, TaskParams::default_theta(24)] {
        let r = recovery_rates(theta);
        assert!(r[0] <= r[1] && r[1] <= r[2], "theta {theta}: {r:?}");
        if theta == 0.12 {
            assert!(r[0] < r[2], "{r:?}");
        }
    }
}
