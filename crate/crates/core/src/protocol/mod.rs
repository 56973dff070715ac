//! Two-message bit agreement between Alice (who learns from both modalities)
//! and Bob (who holds a fresh concept or none), repetition into a raw key,
//! and Toeplitz privacy amplification.
//!
//! Each session is a single-threaded exchange over a [`Transport`]; batches
//! run sessions concurrently on streams derived per session index.

mod adversary;
mod extract;
mod wire;

use std::mem::discriminant;
use std::os::unix::net::UnixStream;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gf2::{self, BitVec, Rng};
use crate::learner::BimodalLearner;
use crate::stats::{lag1_autocorrelation, Proportion};
use crate::taskgen::{BimodalTask, LabelSpace};

pub use adversary::{
    adversary_harness, AdversaryReport, CoinFlipEavesdropper, Eavesdropper, LowWeightEavesdropper,
};
pub use extract::toeplitz_extract;
pub use wire::{
    encode_frame, expect_frame, memory_pair, parse_frame, read_frame, MemoryTransport, Msg1, Msg2,
    SeedMsg, StreamTransport, Transport, MAX_FRAME_LEN, TAG_EXTRACTOR_SEED, TAG_MSG1, TAG_MSG2,
};

/// Both messages of a session, decoded.
pub type Decoded<T> = (Msg1<<T as BimodalTask>::Y>, Msg2<<T as BimodalTask>::Label>);

/// How Alice turns her held-out prediction into a bit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "tau", rename_all = "snake_case")]
pub enum DecisionRule {
    /// 1 iff the prediction equals the held-out label.
    Exact,
    /// 1 iff the normalized Hamming disagreement is at most `tau`.
    Threshold(f64),
}

impl DecisionRule {
    pub const DEFAULT_TAU: f64 = 0.25;

    /// `Exact` for binary labels, `Threshold(0.25)` for vector labels.
    pub fn default_for(space: LabelSpace) -> Self {
        match space {
            LabelSpace::Binary => Self::Exact,
            LabelSpace::Vector { .. } => Self::Threshold(Self::DEFAULT_TAU),
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Self::Threshold(t) if !(0.0..=1.0).contains(&t) => {
                Err(Error::InvalidParams(format!("tau {t} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamsEcho {
    pub n: usize,
    pub theta: f64,
    pub k: usize,
    pub label_space: LabelSpace,
}

impl ParamsEcho {
    pub fn of<T: BimodalTask>(task: &T, k: usize) -> Self {
        Self {
            n: task.dim(),
            theta: task.theta(),
            k,
            label_space: task.label_space(),
        }
    }
}

/// Everything an eavesdropper sees of one session: the two frames exactly as
/// they crossed the wire, plus public metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub session_id: u64,
    pub params: ParamsEcho,
    pub msg1: Vec<u8>,
    pub msg2: Vec<u8>,
}

impl Transcript {
    pub fn wire_bytes(&self) -> Vec<u8> {
        [self.msg1.as_slice(), self.msg2.as_slice()].concat()
    }

    pub fn decode<T: BimodalTask>(&self) -> Result<Decoded<T>> {
        Ok((Msg1::from_frame(&self.msg1)?, Msg2::from_frame(&self.msg2)?))
    }
}

/// Alice between her two moves.
pub struct AliceState<T: BimodalTask> {
    k: usize,
    xs: Vec<T::X>,
    ys: Vec<T::Y>,
}

impl<T: BimodalTask> AliceState<T> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn xs(&self) -> &[T::X] {
        &self.xs
    }
}

/// Draws `k + 1` pairs `(x_i, y_i)`; only the `y_i` are sent.
pub fn alice_round1<T: BimodalTask>(
    task: &T,
    k: usize,
    rng: &mut Rng,
) -> Result<(AliceState<T>, Msg1<T::Y>)> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    let mut xs = Vec::with_capacity(k + 1);
    let mut ys = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        let (x, y) = task.sample_unlabeled(rng)?;
        xs.push(x);
        ys.push(y);
    }
    let msg = Msg1 {
        n: task.dim(),
        ys: ys.clone(),
    };
    Ok((AliceState { k, xs, ys }, msg))
}

/// Flips `b_B`; labels every sample under a fresh concept if it is 1, with
/// uniform labels otherwise.
pub fn bob_round2<T: BimodalTask>(
    task: &T,
    msg1: &Msg1<T::Y>,
    rng: &mut Rng,
) -> Result<(bool, Msg2<T::Label>)> {
    if msg1.n != task.dim() {
        return Err(Error::Protocol(format!(
            "Msg1 has n = {}, expected {}",
            msg1.n,
            task.dim()
        )));
    }
    if msg1.ys.len() < 2 {
        return Err(Error::Protocol(format!(
            "Msg1 carries {} samples, need at least 2",
            msg1.ys.len()
        )));
    }
    let b_b = rng.bit();
    let labels = if b_b {
        let concept = task.sample_concept(rng);
        msg1.ys
            .iter()
            .map(|y| task.label(&concept, y, rng))
            .collect::<Result<Vec<_>>>()?
    } else {
        msg1.ys.iter().map(|_| task.random_label(rng)).collect()
    };
    Ok((
        b_b,
        Msg2 {
            n: task.dim(),
            space: task.label_space(),
            labels,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AliceOutcome {
    pub b_a: bool,
    /// Disagreement of the prediction with the held-out label.
    pub disagreement: f64,
}

/// Trains on the first `k` labelled points and tests on the held-out one.
pub fn alice_finish<T, L>(
    task: &T,
    learner: &L,
    state: AliceState<T>,
    msg2: &Msg2<T::Label>,
    rule: DecisionRule,
    rng: &mut Rng,
) -> Result<AliceOutcome>
where
    T: BimodalTask,
    L: BimodalLearner<T>,
{
    rule.validate()?;
    let k = state.k;
    if msg2.labels.len() != k + 1 {
        return Err(Error::Protocol(format!(
            "Msg2 carries {} labels, expected {}",
            msg2.labels.len(),
            k + 1
        )));
    }
    if msg2.n != task.dim() || discriminant(&msg2.space) != discriminant(&task.label_space()) {
        return Err(Error::Protocol("Msg2 does not match the task".into()));
    }
    let model = learner.train(task, &state.xs[..k], &state.ys[..k], &msg2.labels[..k], rng)?;
    let predicted = learner.predict(task, &model, &state.ys[k], rng)?;
    let disagreement = task.disagreement(&predicted, &msg2.labels[k])?;
    let b_a = match rule {
        DecisionRule::Exact => predicted == msg2.labels[k],
        DecisionRule::Threshold(tau) => disagreement <= tau,
    };
    Ok(AliceOutcome { b_a, disagreement })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SessionResult {
    pub session_id: u64,
    pub b_a: bool,
    pub b_b: bool,
    pub alice_disagreement: f64,
    pub rule: DecisionRule,
}

impl SessionResult {
    pub fn agree(&self) -> bool {
        self.b_a == self.b_b
    }
}

/// Bob's whole role over a transport: receive Msg1, answer with Msg2.
pub fn bob_serve<T: BimodalTask, C: Transport>(
    task: &T,
    chan: &mut C,
    rng: &mut Rng,
) -> Result<bool> {
    let frame = chan.recv()?;
    let msg1 = Msg1::<T::Y>::from_frame(&frame)?;
    let (b_b, msg2) = bob_round2(task, &msg1, rng)?;
    chan.send(msg2.to_frame()?)?;
    Ok(b_b)
}

struct Session<'a, T, L> {
    task: &'a T,
    learner: &'a L,
    k: usize,
    rule: DecisionRule,
    session_id: u64,
}

impl<T: BimodalTask, L: BimodalLearner<T>> Session<'_, T, L> {
    fn open<C: Transport>(&self, chan: &mut C, rng: &mut Rng) -> Result<(AliceState<T>, Vec<u8>)> {
        let (state, msg1) = alice_round1(self.task, self.k, rng)?;
        let frame = msg1.to_frame()?;
        chan.send(frame.clone())?;
        Ok((state, frame))
    }

    fn close<C: Transport>(
        &self,
        chan: &mut C,
        state: AliceState<T>,
        msg1: Vec<u8>,
        b_b: impl FnOnce() -> Result<bool>,
        rng: &mut Rng,
    ) -> Result<(SessionResult, Transcript)> {
        let msg2 = chan.recv()?;
        let decoded = Msg2::<T::Label>::from_frame(&msg2)?;
        let out = alice_finish(self.task, self.learner, state, &decoded, self.rule, rng)?;
        let result = SessionResult {
            session_id: self.session_id,
            b_a: out.b_a,
            b_b: b_b()?,
            alice_disagreement: out.disagreement,
            rule: self.rule,
        };
        let transcript = Transcript {
            session_id: self.session_id,
            params: ParamsEcho::of(self.task, self.k),
            msg1,
            msg2,
        };
        Ok((result, transcript))
    }
}

fn party_streams(rng: &mut Rng, session_id: u64) -> (Rng, Rng) {
    (rng.split("alice", session_id), rng.split("bob", session_id))
}

/// One bit-agreement session over the in-process channel.
pub fn run_ba_session<T, L>(
    task: &T,
    learner: &L,
    k: usize,
    rule: DecisionRule,
    session_id: u64,
    rng: &mut Rng,
) -> Result<(SessionResult, Transcript)>
where
    T: BimodalTask,
    L: BimodalLearner<T>,
{
    let s = Session {
        task,
        learner,
        k,
        rule,
        session_id,
    };
    let (mut alice_rng, mut bob_rng) = party_streams(rng, session_id);
    let (mut alice, mut bob) = memory_pair();
    let (state, msg1) = s.open(&mut alice, &mut alice_rng)?;
    let b_b = bob_serve(task, &mut bob, &mut bob_rng)?;
    s.close(&mut alice, state, msg1, || Ok(b_b), &mut alice_rng)
}

/// Same as [`run_ba_session`], with Bob on his own thread behind a Unix
/// socket pair. Given the same `rng` both runners produce identical results.
pub fn run_ba_session_socket<T, L>(
    task: &T,
    learner: &L,
    k: usize,
    rule: DecisionRule,
    session_id: u64,
    rng: &mut Rng,
) -> Result<(SessionResult, Transcript)>
where
    T: BimodalTask,
    L: BimodalLearner<T>,
{
    let s = Session {
        task,
        learner,
        k,
        rule,
        session_id,
    };
    let (mut alice_rng, mut bob_rng) = party_streams(rng, session_id);
    let (a, b) = UnixStream::pair()?;
    std::thread::scope(|scope| {
        // Owned here so that an early return closes the socket and Bob exits.
        let mut alice = StreamTransport::new(a);
        let bob = scope.spawn(move || bob_serve(task, &mut StreamTransport::new(b), &mut bob_rng));
        let (state, msg1) = s.open(&mut alice, &mut alice_rng)?;
        let join = || {
            bob.join()
                .map_err(|_| Error::Protocol("Bob's thread panicked".into()))?
        };
        s.close(&mut alice, state, msg1, join, &mut alice_rng)
    })
}

/// Runs `sessions` independent sessions in parallel; session `i` draws from
/// a stream derived from index `i`. Transcripts are not kept.
pub fn run_ba_batch<T, L>(
    task: &T,
    learner: &L,
    k: usize,
    rule: DecisionRule,
    sessions: u64,
    rng: &mut Rng,
) -> Result<Vec<SessionResult>>
where
    T: BimodalTask,
    L: BimodalLearner<T>,
{
    let base = rng.split("ba-batch", 0);
    (0..sessions)
        .into_par_iter()
        .map(|i| {
            let mut r = base.derive("session", i);
            run_ba_session(task, learner, k, rule, i, &mut r).map(|(res, _)| res)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaSummary {
    pub sessions: u64,
    pub agreement: Proportion,
    pub bob_ones: Proportion,
    /// `Pr[b_A = 1 | b_B = 1]`.
    pub alice_one_given_one: Proportion,
    /// `Pr[b_A = 0 | b_B = 0]`.
    pub alice_zero_given_zero: Proportion,
    pub mean_disagreement_given_one: f64,
    pub mean_disagreement_given_zero: f64,
    pub bob_lag1_autocorrelation: f64,
}

impl BaSummary {
    pub fn from_results(results: &[SessionResult]) -> Self {
        let ones: Vec<&SessionResult> = results.iter().filter(|r| r.b_b).collect();
        let zeros: Vec<&SessionResult> = results.iter().filter(|r| !r.b_b).collect();
        let mean = |rs: &[&SessionResult]| {
            if rs.is_empty() {
                0.0
            } else {
                rs.iter().map(|r| r.alice_disagreement).sum::<f64>() / rs.len() as f64
            }
        };
        let bobs: Vec<bool> = results.iter().map(|r| r.b_b).collect();
        Self {
            sessions: results.len() as u64,
            agreement: Proportion::from_flags(results.iter().map(SessionResult::agree)),
            bob_ones: Proportion::from_flags(bobs.iter().copied()),
            alice_one_given_one: Proportion::from_flags(ones.iter().map(|r| r.b_a)),
            alice_zero_given_zero: Proportion::from_flags(zeros.iter().map(|r| !r.b_a)),
            mean_disagreement_given_one: mean(&ones),
            mean_disagreement_given_zero: mean(&zeros),
            bob_lag1_autocorrelation: lag1_autocorrelation(&bobs),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KaConfig {
    pub k: usize,
    pub m_sessions: usize,
    pub key_len: usize,
    pub rule: DecisionRule,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KaResult {
    #[serde(serialize_with = "ser_bits")]
    pub key_a: BitVec,
    #[serde(serialize_with = "ser_bits")]
    pub key_b: BitVec,
    /// Positions where Alice's and Bob's raw bits differ.
    pub raw_errors: usize,
    #[serde(serialize_with = "ser_bits")]
    pub seed: BitVec,
}

fn ser_bits<S: serde::Serializer>(v: &BitVec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl KaResult {
    pub fn keys_equal(&self) -> bool {
        self.key_a == self.key_b
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KaTranscript {
    pub sessions: Vec<Transcript>,
    pub seed_frame: Vec<u8>,
}

/// Repeats bit agreement `m_sessions` times and hashes both raw keys with a
/// shared Toeplitz matrix whose seed Alice publishes. There is no
/// reconciliation step, so any raw-bit error shows up as a key mismatch
/// unless it falls in the extractor's kernel.
pub fn run_ka<T, L>(
    task: &T,
    learner: &L,
    cfg: &KaConfig,
    rng: &mut Rng,
) -> Result<(KaResult, KaTranscript)>
where
    T: BimodalTask,
    L: BimodalLearner<T>,
{
    let (res, sessions, seed_frame) = ka_inner(task, learner, cfg, true, rng)?;
    Ok((
        res,
        KaTranscript {
            sessions,
            seed_frame,
        },
    ))
}

/// [`run_ka`] without retaining the session transcripts.
pub fn run_ka_keys<T, L>(task: &T, learner: &L, cfg: &KaConfig, rng: &mut Rng) -> Result<KaResult>
where
    T: BimodalTask,
    L: BimodalLearner<T>,
{
    ka_inner(task, learner, cfg, false, rng).map(|(r, _, _)| r)
}

fn ka_inner<T, L>(
    task: &T,
    learner: &L,
    cfg: &KaConfig,
    keep: bool,
    rng: &mut Rng,
) -> Result<(KaResult, Vec<Transcript>, Vec<u8>)>
where
    T: BimodalTask,
    L: BimodalLearner<T>,
{
    if cfg.m_sessions == 0 {
        return Err(Error::InvalidParams("m_sessions must be at least 1".into()));
    }
    if cfg.key_len > cfg.m_sessions {
        return Err(Error::InvalidParams(format!(
            "key_len {} exceeds the {} raw bits",
            cfg.key_len, cfg.m_sessions
        )));
    }
    let base = rng.split("ka", 0);
    let runs: Vec<(SessionResult, Option<Transcript>)> = (0..cfg.m_sessions as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = base.derive("session", i);
            let (res, t) = run_ba_session(task, learner, cfg.k, cfg.rule, i, &mut r)?;
            Ok((res, keep.then_some(t)))
        })
        .collect::<Result<_>>()?;
    let raw_a = BitVec::from_bools(&runs.iter().map(|(r, _)| r.b_a).collect::<Vec<_>>());
    let raw_b = BitVec::from_bools(&runs.iter().map(|(r, _)| r.b_b).collect::<Vec<_>>());
    let raw_errors = gf2::xor_add(&raw_a, &raw_b)?.weight();

    let mut seed_rng = base.derive("extractor-seed", 0);
    let seed_len = SeedMsg::seed_len(cfg.m_sessions, cfg.key_len);
    let msg = SeedMsg {
        raw_len: cfg.m_sessions,
        out_len: cfg.key_len,
        seed: gf2::uniform_vec(seed_len, &mut seed_rng),
    };
    let (mut alice, mut bob) = memory_pair();
    let seed_frame = msg.to_frame()?;
    alice.send(seed_frame.clone())?;
    let bob_msg = SeedMsg::from_frame(&bob.recv()?)?;
    check_dim("raw key length", cfg.m_sessions, bob_msg.raw_len)?;

    let key_a = toeplitz_extract(&raw_a, &msg.seed, cfg.key_len)?;
    let key_b = toeplitz_extract(&raw_b, &bob_msg.seed, bob_msg.out_len)?;
    let transcripts = runs.into_iter().filter_map(|(_, t)| t).collect();
    Ok((
        KaResult {
            key_a,
            key_b,
            raw_errors,
            seed: msg.seed,
        },
        transcripts,
        seed_frame,
    ))
}

#[cfg(test)]
mod tests;
