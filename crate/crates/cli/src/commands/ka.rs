use msep_core::gf2::Rng;
use msep_core::learner::AmuLearner;
use msep_core::protocol::{run_ka_keys, KaConfig};
use msep_core::stats::Proportion;
use msep_core::taskgen::LpnTask;
use msep_core::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::ba::decision_rule;
use super::{mean, task_params, to_json, trials};
use crate::config::{KaArgs, Resolver};
use crate::report::Check;
use crate::CliError;

pub fn run(a: &KaArgs, r: &mut Resolver, rng: Rng) -> Result<(Value, Vec<Check>), CliError> {
    let c = &a.common;
    let params = task_params(r, c, 32)?;
    let runs = trials(r, c, 20)?;
    let rule = decision_rule(r, c, a.rule)?;
    let cfg = KaConfig {
        k: params.k,
        m_sessions: r.require("m_sessions", a.m_sessions, 128usize)?,
        key_len: r.require("key_len", a.key_len, 64usize)?,
        rule,
    };
    r.finish()?;

    let task = LpnTask::new(params)?;
    let outcomes: Vec<(bool, usize)> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rrng = rng.derive("run", i);
            let res = run_ka_keys(&task, &AmuLearner, &cfg, &mut rrng)?;
            Ok((res.keys_equal(), res.raw_errors))
        })
        .collect::<Result<_, Error>>()?;

    let equal = Proportion::from_flags(outcomes.iter().map(|o| o.0));
    let errors: Vec<f64> = outcomes.iter().map(|o| o.1 as f64).collect();
    let rows: Vec<Value> = outcomes
        .iter()
        .enumerate()
        .map(|(i, (eq, e))| json!({ "run": i, "keys_equal": eq, "raw_errors": e }))
        .collect();
    let checks = vec![Check::at_least("key equality", equal.rate, 0.95)];
    let results = json!({
        "rule": to_json(&rule)?,
        "m_sessions": cfg.m_sessions,
        "key_len": cfg.key_len,
        "key_equality": to_json(&equal)?,
        "mean_raw_errors": mean(&errors),
        "runs": rows,
    });
    Ok((results, checks))
}
