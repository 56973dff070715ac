use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::gf2::{self, BitVec, Rng};
use crate::learner::{gauss_attack, predict, GaussConfig, Hypothesis};
use crate::stats::Proportion;
use crate::taskgen::{
    apply_psi, sample_dlpn_revealed, sample_zeta, DlpnView, LabelZ, ModalityY, Secret, SecretMode,
    TaskParams, World,
};

/// Finite stand-ins for the polynomial budgets of the reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionBudget {
    /// Plays the role of `t(n)`.
    pub t_budget: u64,
    /// Training blocks handed to the learner.
    pub m: usize,
}

impl ReductionBudget {
    pub fn new(t_budget: u64, m: usize) -> Result<Self> {
        if t_budget == 0 || m == 0 {
            return Err(Error::InvalidParams(
                "reduction budgets must be positive".into(),
            ));
        }
        Ok(Self { t_budget, m })
    }

    /// `t_budget = 20`, `m = k`.
    pub fn default_for(params: &TaskParams) -> Self {
        Self {
            t_budget: 20,
            m: params.k,
        }
    }

    /// Fresh evaluation blocks, `t_budget³`.
    pub fn p_eval(&self) -> usize {
        (self.t_budget * self.t_budget * self.t_budget) as usize
    }

    /// Accept when the evaluation disagreement is at most `1/2 - 1/(2 t)`.
    pub fn threshold(&self) -> f64 {
        0.5 - 1.0 / (2.0 * self.t_budget as f64)
    }
}

/// A learner that sees only `(Y, z)` pairs.
pub trait UnimodalLearner: Sync {
    fn name(&self) -> &'static str;
    fn train(&self, pairs: &[(ModalityY, LabelZ)], n: usize, rng: &mut Rng) -> Result<Hypothesis>;
}

/// Outputs a uniformly random secret estimate.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomUnimodal;

impl UnimodalLearner for RandomUnimodal {
    fn name(&self) -> &'static str {
        "random"
    }

    fn train(&self, _: &[(ModalityY, LabelZ)], n: usize, rng: &mut Rng) -> Result<Hypothesis> {
        Ok(Hypothesis::new(gf2::uniform_vec(n, rng)))
    }
}

/// Runs the elimination attack on the first `max_pairs` pairs; falls back to
/// a random estimate when it finds nothing.
#[derive(Clone, Copy, Debug)]
pub struct GaussUnimodal {
    pub cfg: GaussConfig,
    pub max_pairs: usize,
}

impl Default for GaussUnimodal {
    fn default() -> Self {
        Self {
            cfg: GaussConfig::default(),
            max_pairs: 64,
        }
    }
}

impl UnimodalLearner for GaussUnimodal {
    fn name(&self) -> &'static str {
        "gauss"
    }

    fn train(&self, pairs: &[(ModalityY, LabelZ)], n: usize, rng: &mut Rng) -> Result<Hypothesis> {
        let used = &pairs[..pairs.len().min(self.max_pairs)];
        match gauss_attack(used, n, &self.cfg, rng)? {
            Some(s) => Ok(Hypothesis::new(s.into_inner())),
            None => RandomUnimodal.train(pairs, n, rng),
        }
    }
}

/// Test oracle that is handed a DLPN secret `s`. It learns only when the
/// training inputs look planted under `s`, i.e. when the residuals
/// `yvec ⊕ s·Y` are sparse; otherwise it guesses at random.
///
/// In the uniform world the harness hands it a decoy secret from the same
/// distribution, so its inputs never reveal the world directly.
#[derive(Clone, Debug)]
pub struct PlantedAwareCheat {
    pub secret: Secret,
    pub theta: f64,
    pub attack: GaussUnimodal,
}

impl PlantedAwareCheat {
    pub fn new(secret: Secret, theta: f64) -> Self {
        Self {
            secret,
            theta,
            attack: GaussUnimodal::default(),
        }
    }

    /// Whether the mean residual weight is closer to the planted mean
    /// `nθ + 1 - 2θ` than to the uniform mean `n/2`.
    pub fn looks_planted(&self, pairs: &[(ModalityY, LabelZ)], n: usize) -> Result<bool> {
        check_dim("cheat secret length", n, self.secret.w().len())?;
        if pairs.is_empty() {
            return Err(Error::EmptyInput("no training pairs"));
        }
        let mut total = 0usize;
        for (y, _) in pairs {
            let mut r = gf2::row_times_matrix(self.secret.w(), &y.a)?;
            r.xor_assign(&y.yvec)?;
            total += r.weight();
        }
        let mean = total as f64 / pairs.len() as f64;
        let planted = n as f64 * self.theta + 1.0 - 2.0 * self.theta;
        Ok(mean < (planted + n as f64 / 2.0) / 2.0)
    }
}

impl UnimodalLearner for PlantedAwareCheat {
    fn name(&self) -> &'static str {
        "planted-aware-cheat"
    }

    fn train(&self, pairs: &[(ModalityY, LabelZ)], n: usize, rng: &mut Rng) -> Result<Hypothesis> {
        if self.looks_planted(pairs, n)? {
            self.attack.train(pairs, n, rng)
        } else {
            RandomUnimodal.train(pairs, n, rng)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistinguisherRun {
    pub disagreement: f64,
    pub threshold: f64,
    pub output: bool,
}

/// The distinguisher built from a unimodal learner: it cuts the instance into
/// `n`-column blocks `(Y_i, y_i)`, negates one random bit of every `y_i`,
/// labels the blocks with a freshly drawn `ψ_w`, trains on the first `m`
/// blocks and tests on the next `t_budget³`.
#[derive(Clone, Debug)]
pub struct DlpnDistinguisher<L> {
    pub learner: L,
    pub params: TaskParams,
    pub budget: ReductionBudget,
}

pub fn build_dlpn_distinguisher<L: UnimodalLearner>(
    learner: L,
    params: TaskParams,
    budget: ReductionBudget,
) -> DlpnDistinguisher<L> {
    DlpnDistinguisher {
        learner,
        params,
        budget,
    }
}

impl<L: UnimodalLearner> DlpnDistinguisher<L> {
    pub fn required_columns(&self) -> usize {
        (self.budget.m + self.budget.p_eval()) * self.params.n
    }

    pub fn decide(&self, view: DlpnView<'_>, rng: &mut Rng) -> Result<bool> {
        self.run(view, rng).map(|r| r.output)
    }

    pub fn run(&self, view: DlpnView<'_>, rng: &mut Rng) -> Result<DistinguisherRun> {
        let n = self.params.n;
        check_dim("instance rows", n, view.a.rows())?;
        check_dim("instance q length", view.a.cols(), view.q.len())?;
        if view.a.cols() < self.required_columns() {
            return Err(Error::InvalidParams(format!(
                "instance has {} columns, need {}",
                view.a.cols(),
                self.required_columns()
            )));
        }
        let w = sample_zeta(&self.params, rng);
        let block = |i: usize, rng: &mut Rng| -> Result<(ModalityY, LabelZ)> {
            let a = view.a.column_block(i * n, n)?;
            let mut yvec: BitVec = view.q.slice(i * n, n)?;
            yvec.flip(rng.below(n));
            let y = ModalityY { a, yvec };
            let z = apply_psi(&self.params, &w, &y, rng)?;
            Ok((y, z))
        };
        let m = self.budget.m;
        let train = (0..m).map(|i| block(i, rng)).collect::<Result<Vec<_>>>()?;
        let h = self.learner.train(&train, n, rng)?;
        drop(train);
        let p_eval = self.budget.p_eval();
        let mut wrong = 0usize;
        for i in m..m + p_eval {
            let (y, z) = block(i, rng)?;
            wrong += predict(&h, &y)?.hamming(&z)?;
        }
        let disagreement = wrong as f64 / (p_eval * (n + 1)) as f64;
        let threshold = self.budget.threshold();
        Ok(DistinguisherRun {
            disagreement,
            threshold,
            output: disagreement <= threshold,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdvantageReport {
    pub planted: Proportion,
    pub uniform: Proportion,
    /// `Pr[1 | planted] - Pr[1 | uniform]`.
    pub advantage: f64,
}

/// Runs the distinguisher on `runs` fresh instances per world.
///
/// `make_learner` receives the planted secret in the planted world and a decoy
/// drawn from the same distribution in the uniform world.
pub fn distinguisher_advantage<L, F>(
    make_learner: F,
    params: TaskParams,
    budget: ReductionBudget,
    secret_mode: SecretMode,
    runs: usize,
    rng: &mut Rng,
) -> Result<AdvantageReport>
where
    L: UnimodalLearner,
    F: Fn(&Secret) -> L + Sync,
{
    if runs == 0 {
        return Err(Error::InvalidParams("runs must be at least 1".into()));
    }
    let base = rng.split("advantage", 0);
    let n = params.n;
    let cols = (budget.m + budget.p_eval()) * n;
    let rate = |world: World, tag: &str| -> Result<Proportion> {
        let flags = (0..runs)
            .into_par_iter()
            .map(|r| {
                let mut rng = base.derive(tag, r as u64);
                let (inst, planted) =
                    sample_dlpn_revealed(n, cols, params.theta, secret_mode, world, &mut rng)?;
                let secret = match planted {
                    Some(s) => s,
                    None => match secret_mode {
                        SecretMode::UniformSecret => Secret::new(gf2::uniform_vec(n, &mut rng)),
                        SecretMode::BernoulliSecret => {
                            Secret::new(gf2::bernoulli_vec(n, params.theta, &mut rng)?)
                        }
                    },
                };
                let d = build_dlpn_distinguisher(make_learner(&secret), params, budget);
                d.decide(inst.view(), &mut rng)
            })
            .collect::<Result<Vec<bool>>>()?;
        Ok(Proportion::from_flags(flags))
    };
    let planted = rate(World::Planted, "planted")?;
    let uniform = rate(World::Uniform, "uniform")?;
    Ok(AdvantageReport {
        planted,
        uniform,
        advantage: planted.rate - uniform.rate,
    })
}
