use super::bitvec::{
    extract_bits, pack_words, tail_mask, unpack_bytes, words_for, BitVec, WORD_BITS,
};
use crate::error::{check_dim, Error, Result};

/// Row-major matrix over Z_2; each row is packed like a [`BitVec`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[BitVec]) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            check_dim("matrix row length", cols, r.len())?;
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    /// Builds a matrix from row-major packed words; padding bits are cleared.
    pub(crate) fn from_raw(rows: usize, cols: usize, mut data: Vec<u64>) -> Self {
        let stride = words_for(cols);
        debug_assert_eq!(data.len(), rows * stride);
        if stride > 0 {
            let mask = tail_mask(cols);
            for r in 0..rows {
                data[r * stride + stride - 1] &= mask;
            }
        }
        Self {
            rows,
            cols,
            stride,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitVec {
        BitVec::from_words(self.cols, self.row_words(i).to_vec())
            .expect("row stride matches column count")
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "({r},{c}) out of range");
        (self.row_words(r)[c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "({r},{c}) out of range");
        let stride = self.stride;
        let word = &mut self.data[r * stride + c / WORD_BITS];
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for (wi, &word) in self.row_words(r).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let c = wi * WORD_BITS + w.trailing_zeros() as usize;
                    w &= w - 1;
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Columns `[start, start + width)` as a `rows × width` matrix.
    pub fn column_block(&self, start: usize, width: usize) -> Result<Self> {
        if start + width > self.cols {
            return Err(Error::IndexOutOfRange {
                index: start + width,
                len: self.cols,
            });
        }
        let mut out = Self::zeros(self.rows, width);
        let mask = tail_mask(width);
        for r in 0..self.rows {
            let src = &self.data[r * self.stride..(r + 1) * self.stride];
            let dst = out.row_words_mut(r);
            extract_bits(src, start, dst);
            if let Some(last) = dst.last_mut() {
                *last &= mask;
            }
        }
        Ok(out)
    }

    /// Row-major bytes, each row as `ceil(cols/8)` LSB-first bytes.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        for r in 0..self.rows {
            pack_words(self.cols, self.row_words(r), out);
        }
    }

    pub fn from_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Result<Self> {
        let row_bytes = cols.div_ceil(8);
        check_dim("matrix byte count", rows * row_bytes, bytes.len())?;
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            unpack_bytes(
                cols,
                &bytes[r * row_bytes..(r + 1) * row_bytes],
                m.row_words_mut(r),
            )?;
        }
        Ok(m)
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        write!(f, "]")
    }
}
