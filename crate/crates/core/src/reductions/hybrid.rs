use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::Rng;
use crate::taskgen::{BimodalTask, LabelSpace};

/// Decides from a labelled transcript `(y_p, label_p)`.
pub trait TranscriptDistinguisher<T: BimodalTask>: Sync {
    fn decide(&self, task: &T, transcript: &[(T::Y, T::Label)], rng: &mut Rng) -> Result<bool>;
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantDistinguisher(pub bool);

impl<T: BimodalTask> TranscriptDistinguisher<T> for ConstantDistinguisher {
    fn decide(&self, _: &T, _: &[(T::Y, T::Label)], _: &mut Rng) -> Result<bool> {
        Ok(self.0)
    }
}

/// Oracle handed the noise-free labelling `truth` and a target `y*`: outputs 0
/// iff every slot holding `y*` carries the correct label.
pub struct LabelCheckOracle<Y, F> {
    pub target: Y,
    pub truth: F,
}

impl<T, F> TranscriptDistinguisher<T> for LabelCheckOracle<T::Y, F>
where
    T: BimodalTask,
    F: Fn(&T::Y) -> Result<T::Label> + Sync,
{
    fn decide(&self, _: &T, transcript: &[(T::Y, T::Label)], _: &mut Rng) -> Result<bool> {
        for (y, label) in transcript {
            if *y == self.target && *label != (self.truth)(y)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Oracle that outputs 1 iff at least a `threshold` fraction of the labels
/// agree with the noise-free labelling.
pub struct AgreementOracle<F> {
    pub truth: F,
    pub threshold: f64,
}

impl<T, F> TranscriptDistinguisher<T> for AgreementOracle<F>
where
    T: BimodalTask,
    F: Fn(&T::Y) -> Result<T::Label> + Sync,
{
    fn decide(&self, _: &T, transcript: &[(T::Y, T::Label)], _: &mut Rng) -> Result<bool> {
        if transcript.is_empty() {
            return Err(Error::EmptyInput("empty transcript"));
        }
        let mut agree = 0usize;
        for (y, label) in transcript {
            agree += usize::from(*label == (self.truth)(y)?);
        }
        Ok(agree as f64 >= self.threshold * transcript.len() as f64)
    }
}

/// With probability `eps` defers to `inner`, otherwise outputs a fair coin;
/// scales any advantage of `inner` by `eps`.
#[derive(Clone, Debug)]
pub struct GradedDistinguisher<D> {
    pub inner: D,
    pub eps: f64,
}

impl<T: BimodalTask, D: TranscriptDistinguisher<T>> TranscriptDistinguisher<T>
    for GradedDistinguisher<D>
{
    fn decide(&self, task: &T, transcript: &[(T::Y, T::Label)], rng: &mut Rng) -> Result<bool> {
        if rng.unit() < self.eps {
            self.inner.decide(task, transcript, rng)
        } else {
            Ok(rng.bit())
        }
    }
}

/// A draw from `H_j`: `k + 1` fresh points, real labels before position `j`
/// and uniform labels from `j` on.
pub fn sample_hybrid<T: BimodalTask>(
    j: usize,
    k: usize,
    task: &T,
    concept: &T::Concept,
    rng: &mut Rng,
) -> Result<Vec<(T::Y, T::Label)>> {
    if j > k + 1 {
        return Err(Error::InvalidParams(format!(
            "hybrid index {j} exceeds k + 1 = {}",
            k + 1
        )));
    }
    (0..=k)
        .map(|p| {
            let (_, y) = task.sample_unlabeled(rng)?;
            let label = if p < j {
                task.label(concept, &y, rng)?
            } else {
                task.random_label(rng)
            };
            Ok((y, label))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PmuTrace {
    pub j: usize,
    pub b_j: bool,
    pub d_output: bool,
    pub prediction: bool,
}

/// The predictor built from a transcript distinguisher; see
/// [`predictor_pmu_traced`].
pub fn predictor_pmu<T, D>(
    d: &D,
    task: &T,
    train: &[(T::Y, T::Label)],
    target: &T::Y,
    rng: &mut Rng,
) -> Result<bool>
where
    T: BimodalTask,
    D: TranscriptDistinguisher<T>,
{
    predictor_pmu_traced(d, task, train, target, rng).map(|t| t.prediction)
}

/// Picks `j` uniformly in `[0, k]`, fills slots `p < j` with labelled
/// training points, slot `j` with the target and a uniform bit `b_j`, and the
/// remaining slots with training points under uniform labels. Predicts
/// `D(s') ⊕ b_j`.
pub fn predictor_pmu_traced<T, D>(
    d: &D,
    task: &T,
    train: &[(T::Y, T::Label)],
    target: &T::Y,
    rng: &mut Rng,
) -> Result<PmuTrace>
where
    T: BimodalTask,
    D: TranscriptDistinguisher<T>,
{
    if task.label_space() != LabelSpace::Binary {
        return Err(Error::Unsupported("predictor needs a binary label space"));
    }
    let k = train.len();
    let j = rng.below(k + 1);
    let b_j = rng.bit();
    let mut s = Vec::with_capacity(k + 1);
    s.extend(train[..j].iter().cloned());
    let slot = task
        .bit_label(b_j)
        .ok_or(Error::Unsupported("predictor needs a binary label space"))?;
    s.push((target.clone(), slot));
    for (y, _) in &train[j..] {
        s.push((y.clone(), task.random_label(rng)));
    }
    let d_output = d.decide(task, &s, rng)?;
    Ok(PmuTrace {
        j,
        b_j,
        d_output,
        prediction: d_output ^ b_j,
    })
}

/// Per-`j` acceptance counts of a distinguisher over `H_0 … H_{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HybridTable {
    pub k: usize,
    pub trials: u64,
    /// `accept_counts[j]` = number of trials where `D(H_j) = 1`.
    pub accept_counts: Vec<u64>,
    pub rates: Vec<f64>,
    /// `rates[j] - rates[j-1]` for `j = 1..=k+1`.
    pub diffs: Vec<f64>,
    pub mean_diff: f64,
    pub end_to_end: f64,
}

impl HybridTable {
    fn from_counts(k: usize, trials: u64, accept_counts: Vec<u64>) -> Self {
        let t = trials as f64;
        let rates: Vec<f64> = accept_counts.iter().map(|&c| c as f64 / t).collect();
        let diffs: Vec<f64> = accept_counts
            .windows(2)
            .map(|w| (w[1] as i64 - w[0] as i64) as f64 / t)
            .collect();
        let end = accept_counts[k + 1] as i64 - accept_counts[0] as i64;
        Self {
            k,
            trials,
            end_to_end: end as f64 / t,
            mean_diff: end as f64 / t / (k + 1) as f64,
            accept_counts,
            rates,
            diffs,
        }
    }

    /// Sum of the successive differences, computed on the shared integer
    /// counts so that it equals [`HybridTable::end_to_end`] exactly.
    pub fn telescoped_sum(&self) -> f64 {
        let total: i64 = self
            .accept_counts
            .windows(2)
            .map(|w| w[1] as i64 - w[0] as i64)
            .sum();
        total as f64 / self.trials as f64
    }
}

/// Estimates `Pr[D(H_j) = 1]` for every `j` in `[0, k + 1]` from `trials`
/// independent draws each.
pub fn hybrid_advantage<T, D>(
    d: &D,
    task: &T,
    concept: &T::Concept,
    k: usize,
    trials: u64,
    rng: &mut Rng,
) -> Result<HybridTable>
where
    T: BimodalTask,
    D: TranscriptDistinguisher<T>,
{
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let base = rng.split("hybrid", 0);
    let counts = (0..=k + 1)
        .map(|j| {
            let tag = format!("H{j}");
            let hits = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = base.derive(&tag, t);
                    let s = sample_hybrid(j, k, task, concept, &mut rng)?;
                    d.decide(task, &s, &mut rng).map(u64::from)
                })
                .collect::<Result<Vec<u64>>>()?;
            Ok(hits.into_iter().sum())
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(HybridTable::from_counts(k, trials, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{self, BitVec};
    use crate::taskgen::{LpnTask, ParityTask, TaskParams};

    #[test]
    fn hybrid_endpoints() {
        let task = ParityTask::new(16, 0.0).unwrap();
        let mut rng = Rng::new(1, "hyb", 0);
        let w = task.sample_concept(&mut rng);
        let all_real = sample_hybrid(11, 10, &task, &w, &mut rng).unwrap();
        assert_eq!(all_real.len(), 11);
        assert!(all_real
            .iter()
            .all(|(y, l)| *l == gf2::inner(y, &w).unwrap()));
        assert!(sample_hybrid(12, 10, &task, &w, &mut rng).is_err());
    }

    #[test]
    fn hybrid_position_agreement() {
        let task = ParityTask::new(16, 0.0).unwrap();
        let mut rng = Rng::new(2, "hyb", 0);
        let w = task.sample_concept(&mut rng);
        let (k, j) = (5, 3);
        let mut agree = [0usize; 6];
        let draws = 10_000;
        for _ in 0..draws {
            let s = sample_hybrid(j, k, &task, &w, &mut rng).unwrap();
            for (p, (y, l)) in s.iter().enumerate() {
                agree[p] += usize::from(*l == gf2::inner(y, &w).unwrap());
            }
        }
        for (p, &a) in agree.iter().enumerate() {
            let rate = a as f64 / draws as f64;
            if p < j {
                assert_eq!(a, draws);
            } else {
                assert!((rate - 0.5).abs() < 0.02, "p={p} rate={rate}");
            }
        }
        // j = 0 is all uniform
        let zero: f64 = (0..2000)
            .map(|_| {
                let s = sample_hybrid(0, 4, &task, &w, &mut rng).unwrap();
                s.iter()
                    .filter(|(y, l)| *l == gf2::inner(y, &w).unwrap())
                    .count() as f64
                    / 5.0
            })
            .sum::<f64>()
            / 2000.0;
        assert!((zero - 0.5).abs() < 0.02, "{zero}");
    }

    #[test]
    fn predictor_rejects_vector_labels() {
        let task = LpnTask::new(TaskParams::new(8).unwrap()).unwrap();
        let mut rng = Rng::new(3, "pmu", 0);
        let (_, y) = task.sample_unlabeled(&mut rng).unwrap();
        let err =
            predictor_pmu(&ConstantDistinguisher(false), &task, &[], &y, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn constant_distinguisher_has_flat_table() {
        let task = ParityTask::new(8, 0.0).unwrap();
        let mut rng = Rng::new(4, "flat", 0);
        let w = task.sample_concept(&mut rng);
        let t = hybrid_advantage(&ConstantDistinguisher(true), &task, &w, 6, 50, &mut rng).unwrap();
        assert_eq!(t.accept_counts, vec![50; 8]);
        assert!(t.diffs.iter().all(|&d| d == 0.0));
        assert_eq!(t.telescoped_sum(), 0.0);
    }

    #[test]
    fn label_check_oracle_semantics() {
        let task = ParityTask::new(4, 0.0).unwrap();
        let w: BitVec = "1100".parse().unwrap();
        let target: BitVec = "1000".parse().unwrap();
        let oracle = LabelCheckOracle {
            target: target.clone(),
            truth: |y: &BitVec| gf2::inner(y, &w),
        };
        let mut rng = Rng::new(5, "o", 0);
        let other: BitVec = "0011".parse().unwrap();
        let good = vec![(other.clone(), true), (target.clone(), true)];
        let bad = vec![(other, false), (target, false)];
        assert!(
            !TranscriptDistinguisher::<ParityTask>::decide(&oracle, &task, &good, &mut rng)
                .unwrap()
        );
        assert!(
            TranscriptDistinguisher::<ParityTask>::decide(&oracle, &task, &bad, &mut rng).unwrap()
        );
    }
}
