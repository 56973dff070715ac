//! The majority-vote bimodal learner, risk estimation and unimodal attack
//! probes.
//!
//! Each datapoint `(x, y, z)` casts one vote `α = ⟨xvec, zvec⟩ ⊕ zbit` for
//! coordinate `idx` of the secret. Expanding the labels,
//! `α = w_idx ⊕ ⟨xvec, b'⟩ ⊕ ⟨b, w⟩ ⊕ b''`, so the vote is correct with
//! probability `(1 + (1 - 2θ²)^(2n) (1 - 2θ)) / 2`.

mod attacks;
mod generic;

pub use attacks::{candidate_count, gauss_attack, lowweight_attack, GaussConfig, LowWeightConfig};
pub use generic::{
    AmuLearner, BimodalLearner, NegatingLearner, NegatingModel, ParityElimLearner, RandomLearner,
};

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::gf2::{self, BitVec};
use crate::stats::Proportion;
use crate::taskgen::{DataPoint, LabelZ, ModalityX, ModalityY, Secret};

/// Learned secret estimate; predicts `(A·ŵ, ⟨yvec, ŵ⟩)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypothesis {
    pub w_hat: BitVec,
}

impl Hypothesis {
    pub fn new(w_hat: BitVec) -> Self {
        Self { w_hat }
    }

    pub fn n(&self) -> usize {
        self.w_hat.len()
    }

    pub fn matches(&self, secret: &Secret) -> bool {
        &self.w_hat == secret.w()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VoteStats {
    pub ones: Vec<u64>,
    pub zeros: Vec<u64>,
    pub min_bin_size: u64,
    /// Bins that received no votes; their coordinate defaults to 0.
    pub empty_bins: Vec<usize>,
    /// Bins whose vote was tied; resolved to 0.
    pub tied_bins: Vec<usize>,
}

impl VoteStats {
    pub fn bin_size(&self, i: usize) -> u64 {
        self.ones[i] + self.zeros[i]
    }

    pub fn total_votes(&self) -> u64 {
        self.ones.iter().sum::<u64>() + self.zeros.iter().sum::<u64>()
    }

    pub fn has_empty_bins(&self) -> bool {
        !self.empty_bins.is_empty()
    }
}

fn vote(x: &ModalityX, z: &LabelZ) -> Result<bool> {
    Ok(gf2::inner(&x.xvec, &z.zvec)? ^ z.zbit)
}

/// Runs the learner on a full dataset.
pub fn learn_amu(dataset: &[DataPoint], n: usize) -> Result<(Hypothesis, VoteStats)> {
    learn_amu_pairs(dataset.iter().map(|p| (&p.x, &p.z)), n)
}

/// Runs the learner on `(x, z)` pairs; the second modality is never needed.
pub fn learn_amu_pairs<'a, I>(pairs: I, n: usize) -> Result<(Hypothesis, VoteStats)>
where
    I: IntoIterator<Item = (&'a ModalityX, &'a LabelZ)>,
{
    if n == 0 {
        return Err(Error::InvalidParams("n must be positive".into()));
    }
    let mut ones = vec![0u64; n];
    let mut zeros = vec![0u64; n];
    let mut seen = 0usize;
    for (x, z) in pairs {
        check_dim("xvec length", n, x.xvec.len())?;
        check_dim("zvec length", n, z.zvec.len())?;
        if x.idx >= n {
            return Err(Error::IndexOutOfRange {
                index: x.idx,
                len: n,
            });
        }
        if vote(x, z)? {
            ones[x.idx] += 1;
        } else {
            zeros[x.idx] += 1;
        }
        seen += 1;
    }
    if seen == 0 {
        return Err(Error::EmptyInput("learner dataset"));
    }
    let mut w_hat = BitVec::zeros(n);
    let mut empty_bins = Vec::new();
    let mut tied_bins = Vec::new();
    for i in 0..n {
        match (ones[i] + zeros[i], ones[i].cmp(&zeros[i])) {
            (0, _) => empty_bins.push(i),
            (_, std::cmp::Ordering::Greater) => w_hat.set(i, true),
            (_, std::cmp::Ordering::Equal) => tied_bins.push(i),
            _ => {}
        }
    }
    let min_bin_size = (0..n).map(|i| ones[i] + zeros[i]).min().unwrap_or(0);
    Ok((
        Hypothesis { w_hat },
        VoteStats {
            ones,
            zeros,
            min_bin_size,
            empty_bins,
            tied_bins,
        },
    ))
}

/// Fraction of votes that equal the secret coordinate they vote on.
pub fn vote_agreement<'a, I>(pairs: I, secret: &Secret) -> Result<Proportion>
where
    I: IntoIterator<Item = (&'a ModalityX, &'a LabelZ)>,
{
    let w = secret.w();
    let (mut good, mut total) = (0u64, 0u64);
    for (x, z) in pairs {
        if x.idx >= w.len() {
            return Err(Error::IndexOutOfRange {
                index: x.idx,
                len: w.len(),
            });
        }
        good += u64::from(vote(x, z)? == w.get(x.idx));
        total += 1;
    }
    if total == 0 {
        return Err(Error::EmptyInput("no votes"));
    }
    Ok(Proportion::new(good, total))
}

/// Noise-free label `(A·ŵ, ⟨yvec, ŵ⟩)`.
pub fn predict(h: &Hypothesis, y: &ModalityY) -> Result<LabelZ> {
    check_dim("yvec length", h.n(), y.yvec.len())?;
    Ok(LabelZ {
        zvec: gf2::matrix_times_col(&y.a, &h.w_hat)?,
        zbit: gf2::inner(&y.yvec, &h.w_hat)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Per-coordinate disagreement over the `n + 1` label bits.
    L0,
    /// Exact-match indicator.
    L01,
}

impl std::str::FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l0" => Ok(Loss::L0),
            "l01" => Ok(Loss::L01),
            other => Err(Error::InvalidParams(format!("unknown loss {other:?}"))),
        }
    }
}

pub fn point_loss(predicted: &LabelZ, actual: &LabelZ, loss: Loss) -> Result<f64> {
    let d = predicted.hamming(actual)?;
    Ok(match loss {
        Loss::L0 => d as f64 / predicted.bits() as f64,
        Loss::L01 => f64::from(u8::from(d > 0)),
    })
}

pub fn empirical_risk(h: &Hypothesis, test: &[(ModalityY, LabelZ)], loss: Loss) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyInput("risk over an empty test set"));
    }
    let mut total = 0.0;
    for (y, z) in test {
        total += point_loss(&predict(h, y)?, z, loss)?;
    }
    Ok(total / test.len() as f64)
}
