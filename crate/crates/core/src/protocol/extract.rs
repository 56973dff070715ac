use crate::error::{check_dim, Error, Result};
use crate::gf2::{self, BitVec};

/// `T · raw` over GF(2), where `T` is the `out_len × |raw|` Toeplitz matrix
/// `T[i][j] = seed[i - j + |raw| - 1]`. The seed has `|raw| + out_len - 1`
/// bits (none when `out_len = 0`).
pub fn toeplitz_extract(raw: &BitVec, seed: &BitVec, out_len: usize) -> Result<BitVec> {
    let l = raw.len();
    if out_len > l {
        return Err(Error::InvalidParams(format!(
            "extractor output {out_len} exceeds raw length {l}"
        )));
    }
    if out_len == 0 {
        return Ok(BitVec::zeros(0));
    }
    let s = l + out_len - 1;
    check_dim("extractor seed length", s, seed.len())?;
    // Row i is seed reversed, starting at out_len - 1 - i.
    let mut rev = BitVec::zeros(s);
    for t in seed.ones() {
        rev.set(s - 1 - t, true);
    }
    let mut out = BitVec::zeros(out_len);
    for i in 0..out_len {
        let row = rev.slice(out_len - 1 - i, l)?;
        out.set(i, gf2::inner(&row, raw)?);
    }
    Ok(out)
}
