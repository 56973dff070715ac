use msep_core::gf2::{self, BitVec, Rng};
use msep_core::reductions::{
    distinguisher_advantage, hybrid_advantage, predictor_pmu, AgreementOracle,
    ConstantDistinguisher, LabelCheckOracle, PlantedAwareCheat, RandomUnimodal, ReductionBudget,
};
use msep_core::stats::Proportion;
use msep_core::taskgen::{BimodalTask, ParityTask, SecretMode};
use msep_core::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{task_params, to_json, trials};
use crate::config::{ReduceArgs, Resolver};
use crate::report::Check;
use crate::CliError;

const HYBRID_N: usize = 32;

/// Predictor accuracy over `trials` fresh `(train, target)` draws, with the
/// label-check oracle and with a constant distinguisher.
fn pmu_accuracy(
    task: &ParityTask,
    w: &BitVec,
    k: usize,
    trials: u64,
    rng: &Rng,
) -> Result<(Proportion, Proportion), Error> {
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng.derive("pmu", t);
            let train = (0..k)
                .map(|_| {
                    let (_, y) = task.sample_unlabeled(&mut rng)?;
                    let l = task.label(w, &y, &mut rng)?;
                    Ok((y, l))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let (_, target) = task.sample_unlabeled(&mut rng)?;
            let truth = gf2::inner(&target, w)?;
            let oracle = LabelCheckOracle {
                target: target.clone(),
                truth: |y: &BitVec| gf2::inner(y, w),
            };
            let exact = predictor_pmu(&oracle, task, &train, &target, &mut rng)?;
            let constant = predictor_pmu(
                &ConstantDistinguisher(false),
                task,
                &train,
                &target,
                &mut rng,
            )?;
            Ok((exact == truth, constant == truth))
        })
        .collect::<Result<_, Error>>()?;
    Ok((
        Proportion::from_flags(outcomes.iter().map(|o| o.0)),
        Proportion::from_flags(outcomes.iter().map(|o| o.1)),
    ))
}

pub fn run(a: &ReduceArgs, r: &mut Resolver, rng: Rng) -> Result<(Value, Vec<Check>), CliError> {
    let c = &a.common;
    let params = task_params(r, c, 16)?;
    let runs = trials(r, c, 200)?;
    let budget = ReductionBudget::new(
        r.require("t_budget", a.t_budget, 20u64)?,
        r.require("m", a.m, params.k)?,
    )?;
    let hybrid_k = r.require("hybrid_k", a.hybrid_k, 8usize)?;
    let hybrid_trials = r.require("hybrid_trials", a.hybrid_trials, 2000u64)?;
    let pmu_trials = r.require("pmu_trials", a.pmu_trials, 10_000u64)?;
    if hybrid_k == 0 || hybrid_trials == 0 || pmu_trials == 0 {
        return Err(CliError::Config(
            "hybrid_k, hybrid_trials and pmu_trials must be at least 1".into(),
        ));
    }
    r.finish()?;

    let runs = runs as usize;
    let mut arng = rng.derive("advantage", 0);
    let cheat = distinguisher_advantage(
        |s| PlantedAwareCheat::new(s.clone(), params.theta),
        params,
        budget,
        SecretMode::UniformSecret,
        runs,
        &mut arng,
    )?;
    let random = distinguisher_advantage(
        |_| RandomUnimodal,
        params,
        budget,
        SecretMode::UniformSecret,
        runs,
        &mut arng,
    )?;

    let task = ParityTask::new(HYBRID_N, 0.0)?;
    let mut hrng = rng.derive("hybrid", 0);
    let w = task.sample_concept(&mut hrng);
    let oracle = AgreementOracle {
        truth: |y: &BitVec| gf2::inner(y, &w),
        threshold: 0.75,
    };
    let table = hybrid_advantage(&oracle, &task, &w, hybrid_k, hybrid_trials, &mut hrng)?;
    let (exact, constant) =
        pmu_accuracy(&task, &w, hybrid_k, pmu_trials, &rng.derive("predictor", 0))?;

    let checks = vec![
        Check::at_least("planted-aware cheat advantage", cheat.advantage, 0.9),
        Check::at_most("random learner |advantage|", random.advantage.abs(), 0.05),
        Check::holds(
            "telescoped sum equals end-to-end gap",
            table.telescoped_sum() == table.end_to_end,
        ),
        Check::at_least(
            "predictor accuracy with label-check oracle",
            exact.rate,
            1.0,
        ),
        Check::within(
            "predictor accuracy with constant distinguisher",
            constant.rate,
            0.5,
            0.02,
        ),
    ];
    let results = json!({
        "budget": {
            "t_budget": budget.t_budget,
            "m": budget.m,
            "p_eval": budget.p_eval(),
            "threshold": budget.threshold(),
        },
        "advantage": {
            "planted_aware_cheat": to_json(&cheat)?,
            "random": to_json(&random)?,
        },
        "hybrid": {
            "n": HYBRID_N,
            "k": table.k,
            "trials": table.trials,
            "rates": table.rates,
            "diffs": table.diffs,
            "mean_diff": table.mean_diff,
            "end_to_end": table.end_to_end,
            "telescoped_sum": table.telescoped_sum(),
        },
        "predictor": {
            "train_size": hybrid_k,
            "label_check_oracle": to_json(&exact)?,
            "constant": to_json(&constant)?,
        },
    });
    Ok((results, checks))
}
