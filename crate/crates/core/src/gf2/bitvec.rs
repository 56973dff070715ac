use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, Error, Result};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Mask selecting the live bits of the last word of a `len`-bit vector.
#[inline]
pub(crate) fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Dense vector over Z_2.
///
/// Bit `j` lives in word `j / 64` at position `j % 64` (LSB first). Bits at
/// positions `>= len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Builds a vector from packed words, clearing anything past `len`.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Result<Self> {
        check_dim("word count", words_for(len), words.len())?;
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(Self { len, words })
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// # Panics
    /// Panics if `i >= len`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    /// # Panics
    /// Panics if `i >= len`.
    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    /// # Panics
    /// Panics if `i >= len`.
    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + bit)
            })
        })
    }

    pub fn xor_assign(&mut self, other: &Self) -> Result<()> {
        check_dim("xor operand length", self.len, other.len)?;
        xor_words(&mut self.words, &other.words);
        Ok(())
    }

    pub(crate) fn xor_words_unchecked(&mut self, words: &[u64]) {
        xor_words(&mut self.words, words);
    }

    /// Copies bits `[start, start + len)` into a new vector.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len {
            return Err(Error::IndexOutOfRange {
                index: start + len,
                len: self.len,
            });
        }
        let mut out = Self::zeros(len);
        extract_bits(&self.words, start, &mut out.words);
        if let Some(last) = out.words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(out)
    }

    /// Serializes as `ceil(len/8)` bytes, bit `j` at byte `j/8`, position `j%8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        self.write_bytes(&mut out);
        out
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        pack_words(self.len, &self.words, out)
    }

    /// Inverse of [`BitVec::to_bytes`]. Rejects set padding bits.
    pub fn from_bytes(len: usize, bytes: &[u8]) -> Result<Self> {
        let mut words = vec![0u64; words_for(len)];
        unpack_bytes(len, bytes, &mut words)?;
        Ok(Self { len, words })
    }
}

/// Appends the byte encoding of a `len`-bit vector stored in `words`.
pub(crate) fn pack_words(len: usize, words: &[u64], out: &mut Vec<u8>) {
    let mut left = len.div_ceil(8);
    for w in words {
        let take = left.min(8);
        out.extend_from_slice(&w.to_le_bytes()[..take]);
        left -= take;
    }
}

/// Fills the zeroed `words` of a `len`-bit vector from its byte encoding.
pub(crate) fn unpack_bytes(len: usize, bytes: &[u8], words: &mut [u64]) -> Result<()> {
    check_dim("byte count", len.div_ceil(8), bytes.len())?;
    for (w, chunk) in words.iter_mut().zip(bytes.chunks(8)) {
        let mut buf = [0u8; 8];
        buf[..chunk.len()].copy_from_slice(chunk);
        *w = u64::from_le_bytes(buf);
    }
    if let Some(last) = words.last() {
        if last & !tail_mask(len) != 0 {
            return Err(Error::Format("nonzero padding bits".into()));
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (a, b) in dst.iter_mut().zip(src) {
        *a ^= b;
    }
}

/// Writes bits `[start, start + 64 * dst.len())` of `src` into `dst`; bits past
/// the end of `src` read as zero.
pub(crate) fn extract_bits(src: &[u64], start: usize, dst: &mut [u64]) {
    let first = start / WORD_BITS;
    let shift = start % WORD_BITS;
    for (k, out) in dst.iter_mut().enumerate() {
        let lo = src.get(first + k).copied().unwrap_or(0);
        *out = if shift == 0 {
            lo
        } else {
            let hi = src.get(first + k + 1).copied().unwrap_or(0);
            (lo >> shift) | (hi << (WORD_BITS - shift))
        };
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

/// Parses strings such as `"1011"`, index 0 first.
impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Format(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
    }
}
