use serde::Serialize;

use super::io::WireCodec;
use super::{
    apply_phi, apply_psi, sample_chi, sample_zeta, LabelZ, ModalityX, ModalityY, Secret, TaskParams,
};
use crate::error::{check_dim, Error, Result};
use crate::gf2::{self, bernoulli_bit, BitVec, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelSpace {
    Binary,
    Vector { bits: usize },
}

/// A task family: a concept distribution plus a joint distribution of the two
/// modalities, with labels computed from the second modality only.
///
/// Protocol and reduction code is generic over this trait so that other
/// separations can be plugged in.
pub trait BimodalTask: Sync {
    type X: Clone + Send + Sync;
    type Y: Clone + PartialEq + Send + Sync + WireCodec;
    type Label: Clone + PartialEq + Send + Sync + WireCodec;
    type Concept: Send + Sync;

    fn dim(&self) -> usize;
    fn label_space(&self) -> LabelSpace;
    /// Noise rate, echoed in transcripts and reports.
    fn theta(&self) -> f64;
    fn sample_concept(&self, rng: &mut Rng) -> Self::Concept;
    /// Draws `(x, y)`; the concept is not an input, since the party sampling
    /// the modalities never holds it.
    fn sample_unlabeled(&self, rng: &mut Rng) -> Result<(Self::X, Self::Y)>;
    fn label(&self, concept: &Self::Concept, y: &Self::Y, rng: &mut Rng) -> Result<Self::Label>;
    /// A label drawn uniformly from the label space.
    fn random_label(&self, rng: &mut Rng) -> Self::Label;
    /// Fraction of label coordinates that differ.
    fn disagreement(&self, predicted: &Self::Label, actual: &Self::Label) -> Result<f64>;

    /// The bit of a binary label; `None` for vector label spaces.
    fn label_bit(&self, _label: &Self::Label) -> Option<bool> {
        None
    }

    /// The label with value `bit`; `None` for vector label spaces.
    fn bit_label(&self, _bit: bool) -> Option<Self::Label> {
        None
    }
}

/// The LPN-based task with `(n + 1)`-bit labels.
#[derive(Clone, Copy, Debug)]
pub struct LpnTask {
    pub params: TaskParams,
}

impl LpnTask {
    pub fn new(params: TaskParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }
}

impl BimodalTask for LpnTask {
    type X = ModalityX;
    type Y = ModalityY;
    type Label = LabelZ;
    type Concept = Secret;

    fn dim(&self) -> usize {
        self.params.n
    }

    fn theta(&self) -> f64 {
        self.params.theta
    }

    fn label_space(&self) -> LabelSpace {
        LabelSpace::Vector {
            bits: self.params.n + 1,
        }
    }

    fn sample_concept(&self, rng: &mut Rng) -> Secret {
        sample_zeta(&self.params, rng)
    }

    fn sample_unlabeled(&self, rng: &mut Rng) -> Result<(ModalityX, ModalityY)> {
        let x = sample_chi(&self.params, rng);
        let y = apply_phi(&self.params, &x, rng)?;
        Ok((x, y))
    }

    fn label(&self, concept: &Secret, y: &ModalityY, rng: &mut Rng) -> Result<LabelZ> {
        apply_psi(&self.params, concept, y, rng)
    }

    fn random_label(&self, rng: &mut Rng) -> LabelZ {
        LabelZ {
            zvec: gf2::uniform_vec(self.params.n, rng),
            zbit: rng.bit(),
        }
    }

    fn disagreement(&self, predicted: &LabelZ, actual: &LabelZ) -> Result<f64> {
        check_dim("label length", self.params.n, predicted.zvec.len())?;
        Ok(predicted.hamming(actual)? as f64 / (self.params.n + 1) as f64)
    }
}

/// Extension: the LPN task with only the `zbit` coordinate as label, giving a
/// binary label space.
#[derive(Clone, Copy, Debug)]
pub struct ZbitTask {
    pub inner: LpnTask,
}

impl BimodalTask for ZbitTask {
    type X = ModalityX;
    type Y = ModalityY;
    type Label = bool;
    type Concept = Secret;

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    fn label_space(&self) -> LabelSpace {
        LabelSpace::Binary
    }

    fn sample_concept(&self, rng: &mut Rng) -> Secret {
        self.inner.sample_concept(rng)
    }

    fn sample_unlabeled(&self, rng: &mut Rng) -> Result<(ModalityX, ModalityY)> {
        self.inner.sample_unlabeled(rng)
    }

    fn label(&self, concept: &Secret, y: &ModalityY, rng: &mut Rng) -> Result<bool> {
        let p = &self.inner.params;
        check_dim("secret length", p.n, concept.w().len())?;
        check_dim("yvec length", p.n, y.yvec.len())?;
        Ok(gf2::inner(&y.yvec, concept.w())? ^ bernoulli_bit(p.threshold(), rng))
    }

    fn random_label(&self, rng: &mut Rng) -> bool {
        rng.bit()
    }

    fn disagreement(&self, predicted: &bool, actual: &bool) -> Result<f64> {
        Ok(f64::from(u8::from(predicted != actual)))
    }

    fn label_bit(&self, label: &bool) -> Option<bool> {
        Some(*label)
    }

    fn bit_label(&self, bit: bool) -> Option<bool> {
        Some(bit)
    }
}

/// Toy binary task: `x` uniform in `{0,1}^n`, `y = x`, label `⟨y, w⟩ ⊕ Ber(θ)`
/// with `w` uniform. Learnable from either modality by elimination when
/// `θ = 0`.
#[derive(Clone, Copy, Debug)]
pub struct ParityTask {
    pub n: usize,
    pub theta: f64,
}

impl ParityTask {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("parity task needs n >= 1".into()));
        }
        gf2::bernoulli_vec(0, theta, &mut Rng::new(0, "validate", 0))?;
        Ok(Self { n, theta })
    }

    fn threshold(&self) -> u64 {
        gf2::bernoulli_threshold(self.theta).expect("validated theta")
    }
}

impl BimodalTask for ParityTask {
    type X = BitVec;
    type Y = BitVec;
    type Label = bool;
    type Concept = BitVec;

    fn dim(&self) -> usize {
        self.n
    }

    fn theta(&self) -> f64 {
        self.theta
    }

    fn label_space(&self) -> LabelSpace {
        LabelSpace::Binary
    }

    fn sample_concept(&self, rng: &mut Rng) -> BitVec {
        gf2::uniform_vec(self.n, rng)
    }

    fn sample_unlabeled(&self, rng: &mut Rng) -> Result<(BitVec, BitVec)> {
        let x = gf2::uniform_vec(self.n, rng);
        Ok((x.clone(), x))
    }

    fn label(&self, concept: &BitVec, y: &BitVec, rng: &mut Rng) -> Result<bool> {
        Ok(gf2::inner(y, concept)? ^ bernoulli_bit(self.threshold(), rng))
    }

    fn random_label(&self, rng: &mut Rng) -> bool {
        rng.bit()
    }

    fn disagreement(&self, predicted: &bool, actual: &bool) -> Result<f64> {
        Ok(f64::from(u8::from(predicted != actual)))
    }

    fn label_bit(&self, label: &bool) -> Option<bool> {
        Some(*label)
    }

    fn bit_label(&self, bit: bool) -> Option<bool> {
        Some(bit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lpn_task_labels_match_direct_sampler() {
        let p = TaskParams::new(12).unwrap();
        let task = LpnTask::new(p).unwrap();
        let mut rng = Rng::new(1, "task", 0);
        let w = task.sample_concept(&mut rng);
        let (_, y) = task.sample_unlabeled(&mut rng).unwrap();
        let a = task.label(&w, &y, &mut Rng::new(1, "lab", 0)).unwrap();
        let b = apply_psi(&p, &w, &y, &mut Rng::new(1, "lab", 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(task.label_space(), LabelSpace::Vector { bits: 13 });
        assert_eq!(task.disagreement(&a, &a).unwrap(), 0.0);
        assert!(task.label_bit(&a).is_none());
    }

    #[test]
    fn random_labels_are_balanced() {
        let task = LpnTask::new(TaskParams::new(31).unwrap()).unwrap();
        let mut rng = Rng::new(2, "rand-label", 0);
        let zero = LabelZ {
            zvec: BitVec::zeros(31),
            zbit: false,
        };
        let total: f64 = (0..2000)
            .map(|_| {
                task.disagreement(&task.random_label(&mut rng), &zero)
                    .unwrap()
            })
            .sum();
        let mean = total / 2000.0;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn parity_task_noise_free_labels() {
        let task = ParityTask::new(10, 0.0).unwrap();
        let mut rng = Rng::new(3, "parity", 0);
        let w = task.sample_concept(&mut rng);
        for _ in 0..50 {
            let (x, y) = task.sample_unlabeled(&mut rng).unwrap();
            assert_eq!(x, y);
            assert_eq!(
                task.label(&w, &y, &mut rng).unwrap(),
                gf2::inner(&y, &w).unwrap()
            );
        }
        assert_eq!(task.bit_label(true), Some(true));
        assert!(ParityTask::new(4, 0.7).is_err());
    }

    #[test]
    fn zbit_task_matches_lpn_zbit_when_noise_free() {
        let p = TaskParams::with_noise(9, 0.0, 10).unwrap();
        let lpn = LpnTask::new(p).unwrap();
        let task = ZbitTask { inner: lpn };
        let mut rng = Rng::new(4, "zbit", 0);
        let w = task.sample_concept(&mut rng);
        let (_, y) = task.sample_unlabeled(&mut rng).unwrap();
        let full = lpn.label(&w, &y, &mut rng).unwrap();
        assert_eq!(task.label(&w, &y, &mut rng).unwrap(), full.zbit);
    }
}
