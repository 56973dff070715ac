use msep_core::gf2::Rng;
use msep_core::learner::{
    candidate_count, gauss_attack, lowweight_attack, GaussConfig, LowWeightConfig,
};
use msep_core::stats::Proportion;
use msep_core::taskgen::{project_yz, sample_dataset, sample_zeta, DataPoint, TaskParams};
use msep_core::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{to_json, trials};
use crate::config::{ProbeArgs, Resolver};
use crate::report::Check;
use crate::CliError;

fn parse_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let grid: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("grid {s:?}: {e}")))?;
    if grid.is_empty() {
        return Err(CliError::Config("empty grid".into()));
    }
    Ok(grid)
}

/// Largest and mean absolute Pearson correlation between each `xvec` bit
/// and each of the `n + 1` label bits.
pub fn xz_correlation(data: &[DataPoint], n: usize) -> (f64, f64) {
    let m = n + 1;
    let mut x1 = vec![0u64; n];
    let mut z1 = vec![0u64; m];
    let mut both = vec![0u64; n * m];
    let mut zbits = Vec::with_capacity(m);
    for p in data {
        zbits.clear();
        zbits.extend(p.z.zvec.iter());
        zbits.push(p.z.zbit);
        for (j, &b) in zbits.iter().enumerate() {
            z1[j] += u64::from(b);
        }
        for i in p.x.xvec.ones() {
            x1[i] += 1;
            for (j, &b) in zbits.iter().enumerate() {
                both[i * m + j] += u64::from(b);
            }
        }
    }
    let t = data.len() as f64;
    let (mut max, mut sum) = (0.0f64, 0.0);
    for i in 0..n {
        for j in 0..m {
            let px = x1[i] as f64 / t;
            let pz = z1[j] as f64 / t;
            let pxz = both[i * m + j] as f64 / t;
            let denom = (px * (1.0 - px) * pz * (1.0 - pz)).sqrt();
            let c = if denom == 0.0 {
                0.0
            } else {
                ((pxz - px * pz) / denom).abs()
            };
            max = max.max(c);
            sum += c;
        }
    }
    (max, sum / (n * m) as f64)
}

pub fn run(a: &ProbeArgs, r: &mut Resolver, rng: Rng) -> Result<(Value, Vec<Check>), CliError> {
    let c = &a.common;
    if c.k.is_some() {
        return Err(CliError::Config(
            "probe-hardness takes --pairs, not --k".into(),
        ));
    }
    let default_grid = match c.n {
        Some(n) => n.to_string(),
        None => "12,24,48".to_owned(),
    };
    let grid_s = r.require("grid", a.grid.clone(), default_grid)?;
    let grid = parse_grid(&grid_s)?;
    let theta: Option<f64> = r.get("theta", c.theta, None)?;
    let trials = trials(r, c, 100)?;
    let pairs = r.require("pairs", a.pairs, 50usize)?;
    let lw = LowWeightConfig {
        max_weight: r.require(
            "max_weight",
            a.max_weight,
            LowWeightConfig::default().max_weight,
        )?,
        budget: r.require("budget", a.budget, LowWeightConfig::default().budget)?,
        ..LowWeightConfig::default()
    };
    let gauss = GaussConfig {
        trials: r.require("gauss_trials", a.gauss_trials, 1000u64)?,
        ..GaussConfig::default()
    };
    let probe_points = r.require("probe_points", a.probe_points, 100_000usize)?;
    if pairs == 0 || probe_points == 0 {
        return Err(CliError::Config(
            "pairs and probe_points must be at least 1".into(),
        ));
    }
    r.finish()?;

    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &n in &grid {
        let p = TaskParams::with_noise(n, theta.unwrap_or(TaskParams::default_theta(n)), pairs)?;
        let base = rng.derive("n", n as u64);
        let lw = LowWeightConfig {
            max_weight: lw.max_weight.min(n),
            ..lw
        };
        let candidates = candidate_count(n, lw.max_weight);
        let over_budget = candidates > u128::from(lw.budget);
        let outcomes: Vec<(bool, bool)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = base.derive("trial", t);
                let secret = sample_zeta(&p, &mut rng);
                let yz = project_yz(&sample_dataset(&p, &secret, pairs, &mut rng)?)?;
                let low = if over_budget {
                    false
                } else {
                    match lowweight_attack(&yz, n, &lw) {
                        Ok(found) => found.is_some_and(|s| s == secret),
                        Err(Error::BudgetExceeded { .. }) => false,
                        Err(e) => return Err(e),
                    }
                };
                let g = gauss_attack(&yz, n, &gauss, &mut rng)?.is_some_and(|s| s == secret);
                Ok((low, g))
            })
            .collect::<Result<_, Error>>()?;
        let low = Proportion::from_flags(outcomes.iter().map(|o| o.0));
        let gauss_rate = Proportion::from_flags(outcomes.iter().map(|o| o.1));

        let mut prng = base.derive("xz-probe", 0);
        let secret = sample_zeta(&p, &mut prng);
        let probe = sample_dataset(&p, &secret, probe_points, &mut prng)?;
        let (max_corr, mean_corr) = xz_correlation(&probe, n);

        if n <= 12 {
            checks.push(Check::at_least(
                &format!("lowweight success at n={n}"),
                low.rate,
                0.9,
            ));
        }
        if n >= 48 {
            checks.push(Check::at_most(
                &format!("lowweight success at n={n}"),
                low.rate,
                0.05,
            ));
        }
        checks.push(Check::at_most(
            &format!("x/z correlation at n={n}"),
            max_corr,
            0.02,
        ));
        rows.push(json!({
            "n": n,
            "theta": p.theta,
            "lowweight": {
                "candidates": u64::try_from(candidates).unwrap_or(u64::MAX),
                "budget_exhausted": if over_budget { trials } else { 0 },
                "success": to_json(&low)?,
            },
            "gauss": { "success": to_json(&gauss_rate)? },
            "xz_probe": {
                "points": probe_points,
                "max_abs_correlation": max_corr,
                "mean_abs_correlation": mean_corr,
            },
        }));
    }
    Ok((json!({ "grid": rows }), checks))
}
