//! Bit-packed linear algebra over Z_2 and the samplers built on it.
//!
//! Everything here is deterministic: given the same [`Rng`] stream the
//! samplers return identical values on every platform.

mod bitvec;
mod matrix;
mod rng;

pub use bitvec::BitVec;
pub use matrix::BitMatrix;
pub use rng::Rng;

use rand::RngCore;

use crate::error::{check_dim, Error, Result};
#[cfg(test)]
use bitvec::tail_mask;
use bitvec::words_for;

/// `u ⊕ v`.
pub fn xor_add(u: &BitVec, v: &BitVec) -> Result<BitVec> {
    let mut out = u.clone();
    out.xor_assign(v)?;
    Ok(out)
}

/// Parity of `u AND v`.
pub fn inner(u: &BitVec, v: &BitVec) -> Result<bool> {
    check_dim("inner product operand length", u.len(), v.len())?;
    Ok(parity_and(u.words(), v.words()))
}

#[inline]
pub(crate) fn parity_and(a: &[u64], b: &[u64]) -> bool {
    let acc = a.iter().zip(b).fold(0u64, |acc, (x, y)| acc ^ (x & y));
    acc.count_ones() & 1 == 1
}

/// `x · A` for a row vector `x` (1×n) and `A` (n×m): XOR of the rows of `A`
/// selected by the set bits of `x`.
pub fn row_times_matrix(x: &BitVec, a: &BitMatrix) -> Result<BitVec> {
    check_dim("row vector length vs matrix rows", a.rows(), x.len())?;
    let mut out = BitVec::zeros(a.cols());
    for i in x.ones() {
        out.xor_words_unchecked(a.row_words(i));
    }
    Ok(out)
}

/// `Y · w` for a column vector `w` (m×1) and `Y` (n×m).
pub fn matrix_times_col(y: &BitMatrix, w: &BitVec) -> Result<BitVec> {
    check_dim("column vector length vs matrix cols", y.cols(), w.len())?;
    let mut out = BitVec::zeros(y.rows());
    for r in 0..y.rows() {
        if parity_and(y.row_words(r), w.words()) {
            out.set(r, true);
        }
    }
    Ok(out)
}

/// Threshold such that a uniform `u64` draw below it has probability `theta`
/// (exact to 2^-64).
pub(crate) fn bernoulli_threshold(theta: f64) -> Result<u64> {
    if !(0.0..0.5).contains(&theta) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    // theta < 0.5, so theta * 2^64 < 2^63 fits without saturation.
    Ok((theta * 18_446_744_073_709_551_616.0) as u64)
}

/// I.i.d. Ber(theta) bits.
pub fn bernoulli_vec(len: usize, theta: f64, rng: &mut Rng) -> Result<BitVec> {
    let threshold = bernoulli_threshold(theta)?;
    Ok(bernoulli_with_threshold(len, threshold, rng))
}

pub(crate) fn bernoulli_with_threshold(len: usize, threshold: u64, rng: &mut Rng) -> BitVec {
    let mut words = vec![0u64; words_for(len)];
    for i in 0..len {
        if rng.next_u64() < threshold {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    BitVec::from_words(len, words).expect("word count matches length")
}

pub(crate) fn bernoulli_bit(threshold: u64, rng: &mut Rng) -> bool {
    rng.next_u64() < threshold
}

pub fn uniform_vec(len: usize, rng: &mut Rng) -> BitVec {
    let words = (0..words_for(len)).map(|_| rng.next_u64()).collect();
    BitVec::from_words(len, words).expect("word count matches length")
}

pub fn uniform_matrix(rows: usize, cols: usize, rng: &mut Rng) -> BitMatrix {
    let data = (0..rows * words_for(cols))
        .map(|_| rng.next_u64())
        .collect();
    BitMatrix::from_raw(rows, cols, data)
}

/// Standard basis vector `e^(i)` of length `n`, 0-based.
pub fn basis_vec(i: usize, n: usize) -> Result<BitVec> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let mut v = BitVec::zeros(n);
    v.set(i, true);
    Ok(v)
}

/// 1 iff strictly more ones than zeros. Ties go to 0.
pub fn majority(bits: &[bool]) -> Result<bool> {
    if bits.is_empty() {
        return Err(Error::EmptyBin);
    }
    let ones = bits.iter().filter(|&&b| b).count();
    Ok(2 * ones > bits.len())
}

/// Solves the square system `A w = b` by Gaussian elimination. Returns `None`
/// when `A` is singular.
pub fn solve_square(a: &BitMatrix, b: &BitVec) -> Result<Option<BitVec>> {
    let n = a.rows();
    check_dim("system must be square", n, a.cols())?;
    check_dim("right-hand side length", n, b.len())?;
    // Augmented rows: n coefficient bits followed by the rhs bit.
    let width = n + 1;
    let mut rows: Vec<BitVec> = (0..n)
        .map(|r| {
            let mut row = BitVec::zeros(width);
            row.xor_words_unchecked(a.row_words(r));
            if b.get(r) {
                row.set(n, true);
            }
            row
        })
        .collect();

    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| rows[r].get(col)) else {
            return Ok(None);
        };
        rows.swap(col, pivot);
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != col && row.get(col) {
                row.xor_words_unchecked(pivot_row.words());
            }
        }
    }
    let mut w = BitVec::zeros(n);
    for (r, row) in rows.iter().enumerate() {
        if row.get(n) {
            w.set(r, true);
        }
    }
    Ok(Some(w))
}

#[cfg(test)]
fn debug_check_tail(v: &BitVec) -> bool {
    v.words()
        .last()
        .is_none_or(|w| w & !tail_mask(v.len()) == 0)
}
