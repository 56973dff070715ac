use msep_core::gf2::Rng;
use msep_core::learner::AmuLearner;
use msep_core::protocol::{
    run_ba_session, run_ba_session_socket, BaSummary, CoinFlipEavesdropper, DecisionRule,
    Eavesdropper, LowWeightEavesdropper,
};
use msep_core::stats::Proportion;
use msep_core::taskgen::LpnTask;
use msep_core::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{task_params, to_json, trials};
use crate::config::{enum_knob, BaArgs, CommonArgs, Resolver, RuleArg, TransportArg};
use crate::report::Check;
use crate::CliError;

pub(super) fn decision_rule(
    r: &mut Resolver,
    c: &CommonArgs,
    rule: Option<RuleArg>,
) -> Result<DecisionRule, CliError> {
    let rule = enum_knob(r, "rule", rule, RuleArg::Threshold)?;
    let tau = r.require("tau", c.tau, DecisionRule::DEFAULT_TAU)?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(CliError::Config(format!("tau {tau} outside [0, 1]")));
    }
    Ok(match rule {
        RuleArg::Exact => DecisionRule::Exact,
        RuleArg::Threshold => DecisionRule::Threshold(tau),
    })
}

struct Row {
    b_a: bool,
    b_b: bool,
    disagreement: f64,
    coin_right: bool,
    lowweight_right: bool,
}

pub fn run(a: &BaArgs, r: &mut Resolver, rng: Rng) -> Result<(Value, Vec<Check>), CliError> {
    let c = &a.common;
    let params = task_params(r, c, 32)?;
    let sessions = trials(r, c, 200)?;
    let rule = decision_rule(r, c, a.rule)?;
    let transport = enum_knob(r, "transport", a.transport, TransportArg::Memory)?;
    r.finish()?;

    let task = LpnTask::new(params)?;
    let learner = AmuLearner;
    let lowweight = LowWeightEavesdropper::default();
    let base = rng.derive("ba", 0);
    let rows: Vec<(msep_core::protocol::SessionResult, Row)> = (0..sessions)
        .into_par_iter()
        .map(|i| {
            let mut srng = base.derive("session", i);
            let (res, transcript) = match transport {
                TransportArg::Memory => {
                    run_ba_session(&task, &learner, params.k, rule, i, &mut srng)?
                }
                TransportArg::Socket => {
                    run_ba_session_socket(&task, &learner, params.k, rule, i, &mut srng)?
                }
            };
            let mut arng = base.derive("adversary", i);
            let coin = CoinFlipEavesdropper.guess(&task, &transcript, &mut arng)?;
            let low = lowweight.guess(&task, &transcript, &mut arng)?;
            let row = Row {
                b_a: res.b_a,
                b_b: res.b_b,
                disagreement: res.alice_disagreement,
                coin_right: coin == res.b_b,
                lowweight_right: low == res.b_b,
            };
            Ok((res, row))
        })
        .collect::<Result<_, Error>>()?;

    let results: Vec<_> = rows.iter().map(|(res, _)| *res).collect();
    let summary = BaSummary::from_results(&results);
    let coin = Proportion::from_flags(rows.iter().map(|(_, r)| r.coin_right));
    let low = Proportion::from_flags(rows.iter().map(|(_, r)| r.lowweight_right));
    let session_rows: Vec<Value> = rows
        .iter()
        .map(|(res, r)| {
            json!({
                "session_id": res.session_id,
                "b_a": r.b_a,
                "b_b": r.b_b,
                "disagreement": r.disagreement,
            })
        })
        .collect();

    let checks = vec![
        Check::at_least("agreement", summary.agreement.rate, 0.9),
        Check::at_least("Pr[b_A=1 | b_B=1]", summary.alice_one_given_one.rate, 0.9),
        Check::at_least("Pr[b_A=0 | b_B=0]", summary.alice_zero_given_zero.rate, 0.9),
    ];
    let results = json!({
        "transport": match transport {
            TransportArg::Memory => "memory",
            TransportArg::Socket => "socket",
        },
        "rule": to_json(&rule)?,
        "summary": to_json(&summary)?,
        "adversaries": [
            { "adversary": "coin-flip", "accuracy": to_json(&coin)? },
            { "adversary": "lowweight", "accuracy": to_json(&low)? },
        ],
        "sessions": session_rows,
    });
    Ok((results, checks))
}
