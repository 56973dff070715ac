use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use msep_core::gf2::Rng;
use msep_core::learner::{empirical_risk, learn_amu, Loss};
use msep_core::stats::Proportion;
use msep_core::taskgen::{io, project_yz, sample_dataset, sample_zeta, Secret};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::gen_data::sidecar_path;
use super::{mean, task_params, to_json, trials};
use crate::config::{LearnArgs, Resolver};
use crate::report::Check;
use crate::CliError;

#[derive(Serialize)]
struct TrialRow {
    trial: u64,
    recovered: bool,
    l0_risk: f64,
    l01_risk: f64,
    min_bin_size: u64,
    empty_bins: usize,
    tied_bins: usize,
}

pub fn run(a: &LearnArgs, r: &mut Resolver, rng: Rng) -> Result<(Value, Vec<Check>), CliError> {
    let data: Option<std::path::PathBuf> = r.get("data", a.data.clone(), None)?;
    match data {
        Some(path) => from_file(a, r, &path),
        None => fresh_trials(a, r, rng),
    }
}

fn fresh_trials(
    a: &LearnArgs,
    r: &mut Resolver,
    rng: Rng,
) -> Result<(Value, Vec<Check>), CliError> {
    let p = task_params(r, &a.common, 32)?;
    let trials = trials(r, &a.common, 100)?;
    let test_points = r.require("test_points", a.test_points, 10_000usize)?;
    if test_points == 0 {
        return Err(CliError::Config("test_points must be at least 1".into()));
    }
    r.finish()?;

    let rows: Vec<TrialRow> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng.derive("trial", t);
            let secret = sample_zeta(&p, &mut rng);
            let train = sample_dataset(&p, &secret, p.k, &mut rng)?;
            let (h, stats) = learn_amu(&train, p.n)?;
            let test = project_yz(&sample_dataset(&p, &secret, test_points, &mut rng)?)?;
            Ok(TrialRow {
                trial: t,
                recovered: h.matches(&secret),
                l0_risk: empirical_risk(&h, &test, Loss::L0)?,
                l01_risk: empirical_risk(&h, &test, Loss::L01)?,
                min_bin_size: stats.min_bin_size,
                empty_bins: stats.empty_bins.len(),
                tied_bins: stats.tied_bins.len(),
            })
        })
        .collect::<Result<_, msep_core::Error>>()?;

    let recovery = Proportion::from_flags(rows.iter().map(|r| r.recovered));
    let rec_l0: Vec<f64> = rows
        .iter()
        .filter(|r| r.recovered)
        .map(|r| r.l0_risk)
        .collect();
    let rec_l01: Vec<f64> = rows
        .iter()
        .filter(|r| r.recovered)
        .map(|r| r.l01_risk)
        .collect();
    let all_l0: Vec<f64> = rows.iter().map(|r| r.l0_risk).collect();
    let mean_rec_l0 = mean(&rec_l0);
    let checks = vec![
        Check::at_least("recovery rate", recovery.rate, 0.95),
        Check::within(
            "l0 risk of recovered hypotheses",
            mean_rec_l0.unwrap_or(f64::NAN),
            p.theta,
            0.03,
        ),
    ];
    let results = json!({
        "mode": "fresh",
        "recovery": to_json(&recovery)?,
        "mean_l0_risk_recovered": mean_rec_l0,
        "mean_l01_risk_recovered": mean(&rec_l01),
        "mean_l0_risk": mean(&all_l0),
        "min_bin_size": rows.iter().map(|r| r.min_bin_size).min(),
        "trials": to_json(&rows)?,
    });
    Ok((results, checks))
}

fn from_file(
    a: &LearnArgs,
    r: &mut Resolver,
    path: &Path,
) -> Result<(Value, Vec<Check>), CliError> {
    let c = &a.common;
    if c.n.is_some() || c.theta.is_some() || c.k.is_some() || c.trials.is_some() {
        return Err(CliError::Config(
            "--n/--theta/--k/--trials conflict with --data".into(),
        ));
    }
    let test_points = r.require("test_points", a.test_points, 10_000usize)?;
    r.finish()?;

    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let (header, data) = io::read_dataset(&mut BufReader::new(file))?;
    if data.len() < 2 {
        return Err(CliError::Config("dataset needs at least 2 records".into()));
    }
    // The tail of the file is held out for the risk estimate.
    let test = test_points.min(data.len() / 10).max(1);
    let (train, held) = data.split_at(data.len() - test);
    let (h, stats) = learn_amu(train, header.n)?;
    let held = project_yz(held)?;

    let planted = planted_digest(path)?;
    let learned = Secret::new(h.w_hat.clone()).digest_hex();
    let recovered = planted.as_ref().map(|d| *d == learned);
    let l0 = empirical_risk(&h, &held, Loss::L0)?;
    let mut checks = vec![];
    if let Some(rec) = recovered {
        checks.push(Check::holds("recovered planted secret", rec));
    }
    let results = json!({
        "mode": "file",
        "n": header.n,
        "theta": header.theta,
        "count": header.count,
        "train_points": train.len(),
        "test_points": held.len(),
        "planted_digest": planted,
        "learned_digest": learned,
        "recovered": recovered,
        "l0_risk": l0,
        "l01_risk": empirical_risk(&h, &held, Loss::L01)?,
        "vote_stats": {
            "min_bin_size": stats.min_bin_size,
            "empty_bins": stats.empty_bins,
            "tied_bins": stats.tied_bins,
            "total_votes": stats.total_votes(),
        },
    });
    Ok((results, checks))
}

fn planted_digest(dataset: &Path) -> Result<Option<String>, CliError> {
    let side = sidecar_path(dataset);
    let text = match std::fs::read_to_string(&side) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(CliError::Io(format!("{}: {e}", side.display()))),
    };
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", side.display())))?;
    Ok(v.get("secret_digest")
        .and_then(Value::as_str)
        .map(str::to_owned))
}
