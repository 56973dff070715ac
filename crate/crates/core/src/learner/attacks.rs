//! Unimodal attacks: they see only `(Y, z)` pairs and try to recover `w`.

use itertools::Itertools;
use rand::seq::index;

use crate::error::{check_dim, Error, Result};
use crate::gf2::{self, BitMatrix, BitVec, Rng};
use crate::taskgen::{LabelZ, ModalityY, Secret};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowWeightConfig {
    pub max_weight: usize,
    /// Maximum number of candidate secrets to score.
    pub budget: u64,
    /// Accept the best candidate only if its disagreement is below
    /// `0.5 · (1 - margin)`.
    pub margin: f64,
}

impl Default for LowWeightConfig {
    fn default() -> Self {
        Self {
            max_weight: 6,
            budget: 1 << 20,
            margin: 0.1,
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// Number of candidates of weight at most `max_weight`.
pub fn candidate_count(n: usize, max_weight: usize) -> u128 {
    (0..=max_weight)
        .map(|w| binomial(n, w))
        .fold(0u128, u128::saturating_add)
}

/// Exhaustive search over low-weight secrets, scored by the disagreement of
/// `A·ŵ` with `zvec` summed over all pairs.
///
/// The candidate count is checked against the budget before any work is done.
pub fn lowweight_attack(
    pairs: &[(ModalityY, LabelZ)],
    n: usize,
    cfg: &LowWeightConfig,
) -> Result<Option<Secret>> {
    if cfg.max_weight > n {
        return Err(Error::InvalidParams(format!(
            "max_weight {} exceeds n = {n}",
            cfg.max_weight
        )));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyInput("attack needs at least one pair"));
    }
    let needed = candidate_count(n, cfg.max_weight);
    if needed > cfg.budget as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            budget: cfg.budget,
        });
    }

    let words = n.div_ceil(64);
    // cols[(p * n + j) * words ..] = column j of A_p; targets[p * words ..] = zvec_p
    let mut cols = Vec::with_capacity(pairs.len() * n * words);
    let mut targets = Vec::with_capacity(pairs.len() * words);
    for (y, z) in pairs {
        check_dim("A rows", n, y.a.rows())?;
        check_dim("A cols", n, y.a.cols())?;
        check_dim("zvec length", n, z.zvec.len())?;
        let t = y.a.transpose();
        for j in 0..n {
            cols.extend_from_slice(t.row_words(j));
        }
        targets.extend_from_slice(z.zvec.words());
    }

    let mut acc = vec![0u64; words];
    let mut score = |support: &[usize], cutoff: u64| -> u64 {
        let mut total = 0u64;
        for p in 0..pairs.len() {
            acc.copy_from_slice(&targets[p * words..(p + 1) * words]);
            for &j in support {
                let c = &cols[(p * n + j) * words..(p * n + j + 1) * words];
                for (a, b) in acc.iter_mut().zip(c) {
                    *a ^= b;
                }
            }
            total += acc.iter().map(|w| u64::from(w.count_ones())).sum::<u64>();
            if total > cutoff {
                return total;
            }
        }
        total
    };

    let mut best: Option<(u64, Vec<usize>)> = None;
    for weight in 0..=cfg.max_weight {
        for support in (0..n).combinations(weight) {
            let cutoff = best.as_ref().map_or(u64::MAX, |(s, _)| *s);
            let s = score(&support, cutoff);
            if s < cutoff {
                best = Some((s, support));
            }
        }
    }
    let (best_score, support) = best.expect("at least the zero candidate is scored");
    let normalized = best_score as f64 / (pairs.len() * n) as f64;
    if normalized < 0.5 * (1.0 - cfg.margin) {
        let mut w = BitVec::zeros(n);
        for j in support {
            w.set(j, true);
        }
        Ok(Some(Secret::new(w)))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaussConfig {
    pub trials: u64,
    /// Held-out equations used to validate a candidate.
    pub validation: usize,
}

impl Default for GaussConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            validation: 1024,
        }
    }
}

/// Information-set decoding: solve `n` random equations by elimination,
/// hoping all of them are noise-free, and validate on held-out equations.
///
/// Every pair contributes the `n` rows of `A` (right-hand sides `zvec`) and
/// `yvec` (right-hand side `zbit`). A candidate is accepted when its held-out
/// mismatches sit at least eight standard deviations below `V/2`, where `V` is
/// the validation size. Singular draws count as spent trials.
pub fn gauss_attack(
    pairs: &[(ModalityY, LabelZ)],
    n: usize,
    cfg: &GaussConfig,
    rng: &mut Rng,
) -> Result<Option<Secret>> {
    let mut coeffs = Vec::with_capacity(pairs.len() * (n + 1));
    let mut rhs = Vec::with_capacity(pairs.len() * (n + 1));
    for (y, z) in pairs {
        check_dim("A rows", n, y.a.rows())?;
        check_dim("yvec length", n, y.yvec.len())?;
        check_dim("zvec length", n, z.zvec.len())?;
        for r in 0..n {
            coeffs.push(y.a.row(r));
            rhs.push(z.zvec.get(r));
        }
        coeffs.push(y.yvec.clone());
        rhs.push(z.zbit);
    }
    let total = coeffs.len();
    if total < 2 * n {
        return Err(Error::InvalidParams(format!(
            "gauss attack needs at least {} equations, got {total}",
            2 * n
        )));
    }

    let v = cfg.validation.min(total / 2).max(1);
    let held_out = index::sample(rng, total, v).into_vec();
    let mut is_held = vec![false; total];
    for &i in &held_out {
        is_held[i] = true;
    }
    let pool: Vec<usize> = (0..total).filter(|&i| !is_held[i]).collect();
    let accept = (v as f64 / 2.0 - 4.0 * (v as f64).sqrt()).floor().max(0.0) as usize;

    for _ in 0..cfg.trials {
        let chosen = index::sample(rng, pool.len(), n);
        let rows: Vec<BitVec> = chosen.iter().map(|i| coeffs[pool[i]].clone()).collect();
        let b = BitVec::from_bools(&chosen.iter().map(|i| rhs[pool[i]]).collect::<Vec<_>>());
        let Some(w) = gf2::solve_square(&BitMatrix::from_rows(&rows)?, &b)? else {
            continue;
        };
        let mut mismatches = 0;
        for &i in &held_out {
            if gf2::inner(&coeffs[i], &w)? != rhs[i] {
                mismatches += 1;
                if mismatches > accept {
                    break;
                }
            }
        }
        if mismatches <= accept {
            return Ok(Some(Secret::new(w)));
        }
    }
    Ok(None)
}
