//! Learners over the generic task interface, used by the protocol and the
//! reductions.

use super::{learn_amu_pairs, predict, Hypothesis};
use crate::error::{check_dim, Error, Result};
use crate::gf2::{self, BitVec, Rng};
use crate::taskgen::{BimodalTask, LabelSpace, LabelZ, LpnTask, ModalityY, ParityTask};

/// A learner that trains on both modalities and predicts from the second.
pub trait BimodalLearner<T: BimodalTask>: Sync {
    type Model: Send + Sync;

    fn name(&self) -> &'static str;

    fn train(
        &self,
        task: &T,
        xs: &[T::X],
        ys: &[T::Y],
        labels: &[T::Label],
        rng: &mut Rng,
    ) -> Result<Self::Model>;

    fn predict(&self, task: &T, model: &Self::Model, y: &T::Y, rng: &mut Rng) -> Result<T::Label>;
}

fn check_lengths(xs: usize, ys: usize, labels: usize) -> Result<()> {
    check_dim("ys vs xs", xs, ys)?;
    check_dim("labels vs xs", xs, labels)?;
    if xs == 0 {
        return Err(Error::EmptyInput("training set"));
    }
    Ok(())
}

/// The majority-vote learner.
#[derive(Clone, Copy, Debug, Default)]
pub struct AmuLearner;

impl BimodalLearner<LpnTask> for AmuLearner {
    type Model = Hypothesis;

    fn name(&self) -> &'static str {
        "amu"
    }

    fn train(
        &self,
        task: &LpnTask,
        xs: &[crate::taskgen::ModalityX],
        ys: &[ModalityY],
        labels: &[LabelZ],
        _rng: &mut Rng,
    ) -> Result<Hypothesis> {
        check_lengths(xs.len(), ys.len(), labels.len())?;
        learn_amu_pairs(xs.iter().zip(labels), task.dim()).map(|(h, _)| h)
    }

    fn predict(
        &self,
        _task: &LpnTask,
        h: &Hypothesis,
        y: &ModalityY,
        _rng: &mut Rng,
    ) -> Result<LabelZ> {
        predict(h, y)
    }
}

/// Ignores the data and outputs uniform labels.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomLearner;

impl<T: BimodalTask> BimodalLearner<T> for RandomLearner {
    type Model = ();

    fn name(&self) -> &'static str {
        "random"
    }

    fn train(
        &self,
        _: &T,
        xs: &[T::X],
        ys: &[T::Y],
        labels: &[T::Label],
        _: &mut Rng,
    ) -> Result<()> {
        check_lengths(xs.len(), ys.len(), labels.len())
    }

    fn predict(&self, task: &T, _: &(), _: &T::Y, rng: &mut Rng) -> Result<T::Label> {
        Ok(task.random_label(rng))
    }
}

/// Solves the parity task by elimination over `(y, label)` equations. Exact
/// when the task is noise-free; free variables are set to 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct ParityElimLearner;

impl ParityElimLearner {
    pub fn solve(n: usize, ys: &[BitVec], labels: &[bool]) -> Result<BitVec> {
        check_dim("labels vs ys", ys.len(), labels.len())?;
        // Reduced row echelon form: each stored row owns one pivot column and
        // no other stored row has that column set.
        let mut rows: Vec<(BitVec, bool, usize)> = Vec::with_capacity(n);
        for (y, &b) in ys.iter().zip(labels) {
            if rows.len() == n {
                break;
            }
            check_dim("equation length", n, y.len())?;
            let mut row = y.clone();
            let mut rhs = b;
            for (r, rb, p) in &rows {
                if row.get(*p) {
                    row.xor_assign(r)?;
                    rhs ^= rb;
                }
            }
            let Some(pivot) = row.ones().next() else {
                continue;
            };
            for (r, rb, _) in rows.iter_mut() {
                if r.get(pivot) {
                    r.xor_assign(&row)?;
                    *rb ^= rhs;
                }
            }
            rows.push((row, rhs, pivot));
        }
        let mut w = BitVec::zeros(n);
        for (_, rhs, pivot) in rows {
            w.set(pivot, rhs);
        }
        Ok(w)
    }
}

impl BimodalLearner<ParityTask> for ParityElimLearner {
    type Model = BitVec;

    fn name(&self) -> &'static str {
        "parity-elim"
    }

    fn train(
        &self,
        task: &ParityTask,
        xs: &[BitVec],
        ys: &[BitVec],
        labels: &[bool],
        _rng: &mut Rng,
    ) -> Result<BitVec> {
        check_lengths(xs.len(), ys.len(), labels.len())?;
        Self::solve(task.dim(), ys, labels)
    }

    fn predict(&self, _: &ParityTask, w: &BitVec, y: &BitVec, _: &mut Rng) -> Result<bool> {
        gf2::inner(y, w)
    }
}

/// For binary-label tasks: holds out a validation slice and negates the inner
/// learner's predictions when its validation error exceeds `0.5 + margin`.
#[derive(Clone, Copy, Debug)]
pub struct NegatingLearner<L> {
    pub inner: L,
    pub margin: f64,
    /// Fraction of the training set held out for validation.
    pub holdout: f64,
}

impl<L> NegatingLearner<L> {
    pub fn new(inner: L) -> Self {
        Self {
            inner,
            margin: 0.05,
            holdout: 0.25,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NegatingModel<M> {
    pub inner: M,
    pub negate: bool,
    pub validation_error: f64,
}

impl<T, L> BimodalLearner<T> for NegatingLearner<L>
where
    T: BimodalTask,
    L: BimodalLearner<T>,
{
    type Model = NegatingModel<L::Model>;

    fn name(&self) -> &'static str {
        "negating"
    }

    fn train(
        &self,
        task: &T,
        xs: &[T::X],
        ys: &[T::Y],
        labels: &[T::Label],
        rng: &mut Rng,
    ) -> Result<Self::Model> {
        if task.label_space() != LabelSpace::Binary {
            return Err(Error::Unsupported("negation needs a binary label space"));
        }
        check_lengths(xs.len(), ys.len(), labels.len())?;
        let v = ((xs.len() as f64 * self.holdout).ceil() as usize).clamp(1, xs.len());
        let cut = xs.len() - v;
        if cut == 0 {
            return Err(Error::EmptyInput("nothing left to train on after holdout"));
        }
        let model = self
            .inner
            .train(task, &xs[..cut], &ys[..cut], &labels[..cut], rng)?;
        let mut wrong = 0usize;
        for (y, label) in ys[cut..].iter().zip(&labels[cut..]) {
            let guess = self.inner.predict(task, &model, y, rng)?;
            wrong += usize::from(guess != *label);
        }
        let validation_error = wrong as f64 / v as f64;
        Ok(NegatingModel {
            inner: model,
            negate: validation_error > 0.5 + self.margin,
            validation_error,
        })
    }

    fn predict(&self, task: &T, model: &Self::Model, y: &T::Y, rng: &mut Rng) -> Result<T::Label> {
        let label = self.inner.predict(task, &model.inner, y, rng)?;
        if !model.negate {
            return Ok(label);
        }
        let bit = task
            .label_bit(&label)
            .ok_or(Error::Unsupported("negation needs a binary label space"))?;
        task.bit_label(!bit)
            .ok_or(Error::Unsupported("negation needs a binary label space"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgen::TaskParams;

    fn parity_data(
        task: &ParityTask,
        count: usize,
        seed: u64,
    ) -> (BitVec, Vec<BitVec>, Vec<BitVec>, Vec<bool>) {
        let mut rng = Rng::new(seed, "parity-data", 0);
        let w = task.sample_concept(&mut rng);
        let (mut xs, mut ys, mut ls) = (vec![], vec![], vec![]);
        for _ in 0..count {
            let (x, y) = task.sample_unlabeled(&mut rng).unwrap();
            ls.push(task.label(&w, &y, &mut rng).unwrap());
            xs.push(x);
            ys.push(y);
        }
        (w, xs, ys, ls)
    }

    #[test]
    fn parity_elimination_recovers_secret() {
        let task = ParityTask::new(32, 0.0).unwrap();
        let (w, xs, ys, ls) = parity_data(&task, 100, 1);
        let mut rng = Rng::new(1, "t", 0);
        let model = ParityElimLearner
            .train(&task, &xs, &ys, &ls, &mut rng)
            .unwrap();
        assert_eq!(model, w);
    }

    #[test]
    fn parity_elimination_handles_dependent_rows() {
        let ys: Vec<BitVec> = ["110", "011", "101", "001"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        // w = 101: labels 1, 1, 0, 1
        let w = ParityElimLearner::solve(3, &ys, &[true, true, false, true]).unwrap();
        assert_eq!(w, "101".parse().unwrap());
    }

    /// Always predicts the complement of the elimination learner.
    struct Inverted;

    impl BimodalLearner<ParityTask> for Inverted {
        type Model = BitVec;
        fn name(&self) -> &'static str {
            "inverted"
        }
        fn train(
            &self,
            t: &ParityTask,
            xs: &[BitVec],
            ys: &[BitVec],
            ls: &[bool],
            r: &mut Rng,
        ) -> Result<BitVec> {
            ParityElimLearner.train(t, xs, ys, ls, r)
        }
        fn predict(&self, _: &ParityTask, w: &BitVec, y: &BitVec, _: &mut Rng) -> Result<bool> {
            Ok(!gf2::inner(y, w)?)
        }
    }

    #[test]
    fn negation_repairs_an_inverted_learner() {
        let task = ParityTask::new(16, 0.0).unwrap();
        let (w, xs, ys, ls) = parity_data(&task, 200, 2);
        let mut rng = Rng::new(2, "t", 0);
        let learner = NegatingLearner::new(Inverted);
        let model = learner.train(&task, &xs, &ys, &ls, &mut rng).unwrap();
        assert!(model.negate);
        assert_eq!(model.validation_error, 1.0);
        for y in &ys {
            assert_eq!(
                learner.predict(&task, &model, y, &mut rng).unwrap(),
                gf2::inner(y, &w).unwrap()
            );
        }
        let honest = NegatingLearner::new(ParityElimLearner);
        assert!(!honest.train(&task, &xs, &ys, &ls, &mut rng).unwrap().negate);
    }

    #[test]
    fn negation_is_unsupported_for_vector_labels() {
        let task = LpnTask::new(TaskParams::new(8).unwrap()).unwrap();
        let mut rng = Rng::new(3, "t", 0);
        let w = task.sample_concept(&mut rng);
        let (x, y) = task.sample_unlabeled(&mut rng).unwrap();
        let z = task.label(&w, &y, &mut rng).unwrap();
        let err = NegatingLearner::new(AmuLearner)
            .train(&task, &[x], &[y], &[z], &mut rng)
            .unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn amu_learner_matches_direct_call() {
        let p = TaskParams::with_noise(12, 0.05, 1728).unwrap();
        let task = LpnTask::new(p).unwrap();
        let mut rng = Rng::new(4, "amu", 0);
        let w = task.sample_concept(&mut rng);
        let (mut xs, mut ys, mut zs) = (vec![], vec![], vec![]);
        for _ in 0..p.k {
            let (x, y) = task.sample_unlabeled(&mut rng).unwrap();
            zs.push(task.label(&w, &y, &mut rng).unwrap());
            xs.push(x);
            ys.push(y);
        }
        let h = AmuLearner.train(&task, &xs, &ys, &zs, &mut rng).unwrap();
        let (direct, _) = learn_amu_pairs(xs.iter().zip(&zs), 12).unwrap();
        assert_eq!(h, direct);
        assert!(AmuLearner
            .train(&task, &xs[..2], &ys, &zs, &mut rng)
            .is_err());
    }
}
