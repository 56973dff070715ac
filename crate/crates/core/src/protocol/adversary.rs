use rayon::prelude::*;
use serde::Serialize;

use super::{run_ba_session, DecisionRule, Transcript};
use crate::error::{Error, Result};
use crate::gf2::Rng;
use crate::learner::{candidate_count, lowweight_attack, BimodalLearner, LowWeightConfig};
use crate::stats::Proportion;
use crate::taskgen::{BimodalTask, LpnTask};

/// A passive adversary guessing `b_B` from the transcript alone.
pub trait Eavesdropper<T: BimodalTask>: Sync {
    fn name(&self) -> &'static str;
    fn guess(&self, task: &T, transcript: &Transcript, rng: &mut Rng) -> Result<bool>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CoinFlipEavesdropper;

impl<T: BimodalTask> Eavesdropper<T> for CoinFlipEavesdropper {
    fn name(&self) -> &'static str {
        "coin-flip"
    }

    fn guess(&self, _: &T, _: &Transcript, rng: &mut Rng) -> Result<bool> {
        Ok(rng.bit())
    }
}

/// Reads the first `max_pairs` pairs `(Y_i, z_i)` as an LPN instance in the
/// concept and runs the low-weight search on them: guesses 1 iff a
/// consistent low-weight secret is found. Falls back to a coin flip when the
/// search would exceed its budget.
#[derive(Clone, Copy, Debug)]
pub struct LowWeightEavesdropper {
    pub cfg: LowWeightConfig,
    pub max_pairs: usize,
}

impl Default for LowWeightEavesdropper {
    fn default() -> Self {
        Self {
            cfg: LowWeightConfig::default(),
            max_pairs: 200,
        }
    }
}

impl Eavesdropper<LpnTask> for LowWeightEavesdropper {
    fn name(&self) -> &'static str {
        "lowweight"
    }

    fn guess(&self, _: &LpnTask, transcript: &Transcript, rng: &mut Rng) -> Result<bool> {
        // Same outcome as the attack's own budget check, without decoding.
        if candidate_count(transcript.params.n, self.cfg.max_weight) > u128::from(self.cfg.budget) {
            return Ok(rng.bit());
        }
        let (msg1, msg2) = transcript.decode::<LpnTask>()?;
        let pairs: Vec<_> = msg1
            .ys
            .into_iter()
            .zip(msg2.labels)
            .take(self.max_pairs)
            .collect();
        match lowweight_attack(&pairs, msg1.n, &self.cfg) {
            Ok(found) => Ok(found.is_some()),
            Err(Error::BudgetExceeded { .. }) => Ok(rng.bit()),
            Err(e) => Err(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdversaryReport {
    pub adversary: String,
    pub sessions: u64,
    /// Fraction of sessions where the guess equals `b_B`.
    pub accuracy: Proportion,
    /// Honest-party agreement over the same sessions.
    pub agreement: Proportion,
}

/// Runs `sessions` sessions and scores the adversary, which sees only each
/// session's [`Transcript`], against Bob's bit.
#[allow(clippy::too_many_arguments)]
pub fn adversary_harness<T, L, E>(
    task: &T,
    learner: &L,
    adversary: &E,
    k: usize,
    rule: DecisionRule,
    sessions: u64,
    rng: &mut Rng,
) -> Result<AdversaryReport>
where
    T: BimodalTask,
    L: BimodalLearner<T>,
    E: Eavesdropper<T>,
{
    if sessions == 0 {
        return Err(Error::InvalidParams("sessions must be at least 1".into()));
    }
    let base = rng.split("adversary-harness", 0);
    let outcomes: Vec<(bool, bool)> = (0..sessions)
        .into_par_iter()
        .map(|i| {
            let mut r = base.derive("session", i);
            let (res, transcript) = run_ba_session(task, learner, k, rule, i, &mut r)?;
            let mut adv_rng = base.derive("adversary", i);
            let guess = adversary.guess(task, &transcript, &mut adv_rng)?;
            Ok((guess == res.b_b, res.agree()))
        })
        .collect::<Result<_>>()?;
    Ok(AdversaryReport {
        adversary: adversary.name().to_owned(),
        sessions,
        accuracy: Proportion::from_flags(outcomes.iter().map(|o| o.0)),
        agreement: Proportion::from_flags(outcomes.iter().map(|o| o.1)),
    })
}
