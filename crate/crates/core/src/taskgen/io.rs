//! Fixed-size binary layouts and the dataset file format.
//!
//! Bit vectors are `ceil(n/8)` bytes, LSB-first; integers are little-endian.
//! Dataset file: `"MSEP" | version u16 | n u32 | theta f64 | count u64`, then
//! `count` records `xvec | idx u32 | A | yvec | zvec | zbit u8`.

use std::io::{BufRead, Read, Write};

use serde::Serialize;

use super::{DataPoint, LabelZ, ModalityX, ModalityY, TaskParams};
use crate::error::{check_dim, Error, Result};
use crate::gf2::{BitMatrix, BitVec};

pub const DATASET_MAGIC: &[u8; 4] = b"MSEP";
pub const DATASET_VERSION: u16 = 1;
/// Largest dimension accepted when reading untrusted input.
pub const MAX_WIRE_DIM: usize = 1 << 16;

/// Values with a fixed-length encoding determined by the dimension `n`.
pub trait WireCodec: Sized {
    fn encoded_len(n: usize) -> usize;
    fn encode(&self, out: &mut Vec<u8>);
    /// Decodes exactly `encoded_len(n)` bytes.
    fn decode(n: usize, bytes: &[u8]) -> Result<Self>;
}

fn vec_bytes(n: usize) -> usize {
    n.div_ceil(8)
}

impl WireCodec for BitVec {
    fn encoded_len(n: usize) -> usize {
        vec_bytes(n)
    }

    fn encode(&self, out: &mut Vec<u8>) {
        self.write_bytes(out)
    }

    fn decode(n: usize, bytes: &[u8]) -> Result<Self> {
        BitVec::from_bytes(n, bytes)
    }
}

impl WireCodec for bool {
    fn encoded_len(_n: usize) -> usize {
        1
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.push(u8::from(*self));
    }

    fn decode(_n: usize, bytes: &[u8]) -> Result<Self> {
        check_dim("bit byte count", 1, bytes.len())?;
        match bytes[0] {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(Error::Format(format!("bit byte {b:#04x}"))),
        }
    }
}

impl WireCodec for ModalityX {
    fn encoded_len(n: usize) -> usize {
        vec_bytes(n) + 4
    }

    fn encode(&self, out: &mut Vec<u8>) {
        self.xvec.write_bytes(out);
        out.extend_from_slice(&(self.idx as u32).to_le_bytes());
    }

    fn decode(n: usize, bytes: &[u8]) -> Result<Self> {
        check_dim("x record length", Self::encoded_len(n), bytes.len())?;
        let (v, rest) = bytes.split_at(vec_bytes(n));
        let idx = u32::from_le_bytes(rest.try_into().expect("4 bytes")) as usize;
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
        Ok(Self {
            xvec: BitVec::from_bytes(n, v)?,
            idx,
        })
    }
}

impl WireCodec for ModalityY {
    fn encoded_len(n: usize) -> usize {
        (n + 1) * vec_bytes(n)
    }

    fn encode(&self, out: &mut Vec<u8>) {
        self.a.write_bytes(out);
        self.yvec.write_bytes(out);
    }

    fn decode(n: usize, bytes: &[u8]) -> Result<Self> {
        check_dim("y record length", Self::encoded_len(n), bytes.len())?;
        let (a, y) = bytes.split_at(n * vec_bytes(n));
        Ok(Self {
            a: BitMatrix::from_bytes(n, n, a)?,
            yvec: BitVec::from_bytes(n, y)?,
        })
    }
}

impl WireCodec for LabelZ {
    fn encoded_len(n: usize) -> usize {
        vec_bytes(n) + 1
    }

    fn encode(&self, out: &mut Vec<u8>) {
        self.zvec.write_bytes(out);
        out.push(u8::from(self.zbit));
    }

    fn decode(n: usize, bytes: &[u8]) -> Result<Self> {
        check_dim("z record length", Self::encoded_len(n), bytes.len())?;
        let (z, bit) = bytes.split_at(vec_bytes(n));
        Ok(Self {
            zvec: BitVec::from_bytes(n, z)?,
            zbit: bool::decode(n, bit)?,
        })
    }
}

impl WireCodec for DataPoint {
    fn encoded_len(n: usize) -> usize {
        ModalityX::encoded_len(n) + ModalityY::encoded_len(n) + LabelZ::encoded_len(n)
    }

    fn encode(&self, out: &mut Vec<u8>) {
        self.x.encode(out);
        self.y.encode(out);
        self.z.encode(out);
    }

    fn decode(n: usize, bytes: &[u8]) -> Result<Self> {
        check_dim("record length", Self::encoded_len(n), bytes.len())?;
        let (x, rest) = bytes.split_at(ModalityX::encoded_len(n));
        let (y, z) = rest.split_at(ModalityY::encoded_len(n));
        Ok(Self {
            x: ModalityX::decode(n, x)?,
            y: ModalityY::decode(n, y)?,
            z: LabelZ::decode(n, z)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetHeader {
    pub n: usize,
    pub theta: f64,
    pub count: u64,
}

pub fn write_dataset<W: Write>(out: &mut W, params: &TaskParams, data: &[DataPoint]) -> Result<()> {
    let n = params.n;
    let mut buf = Vec::with_capacity(22);
    buf.extend_from_slice(DATASET_MAGIC);
    buf.extend_from_slice(&DATASET_VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    buf.extend_from_slice(&params.theta.to_le_bytes());
    buf.extend_from_slice(&(data.len() as u64).to_le_bytes());
    out.write_all(&buf)?;
    let mut rec = Vec::with_capacity(DataPoint::encoded_len(n));
    for p in data {
        check_dim("datapoint dimension", n, p.x.xvec.len())?;
        rec.clear();
        p.encode(&mut rec);
        out.write_all(&rec)?;
    }
    Ok(())
}

pub fn read_dataset<R: Read>(input: &mut R) -> Result<(DatasetHeader, Vec<DataPoint>)> {
    let mut head = [0u8; 26];
    input.read_exact(&mut head)?;
    if &head[..4] != DATASET_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != DATASET_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(head[6..10].try_into().expect("4 bytes")) as usize;
    let theta = f64::from_le_bytes(head[10..18].try_into().expect("8 bytes"));
    let count = u64::from_le_bytes(head[18..26].try_into().expect("8 bytes"));
    if n == 0 || n > MAX_WIRE_DIM {
        return Err(Error::Format(format!("dimension {n} out of range")));
    }
    let mut rec = vec![0u8; DataPoint::encoded_len(n)];
    let mut data = Vec::new();
    for _ in 0..count {
        input.read_exact(&mut rec)?;
        data.push(DataPoint::decode(n, &rec)?);
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after last record".into()));
    }
    Ok((DatasetHeader { n, theta, count }, data))
}

#[derive(Serialize)]
struct JsonRecord {
    xvec: String,
    idx: usize,
    a: Vec<String>,
    yvec: String,
    zvec: String,
    zbit: u8,
}

/// Debug export: one JSON object per line with hex-encoded bit fields.
pub fn write_jsonl<W: Write>(out: &mut W, data: &[DataPoint]) -> Result<()> {
    for p in data {
        let rec = JsonRecord {
            xvec: hex::encode(p.x.xvec.to_bytes()),
            idx: p.x.idx,
            a: (0..p.y.a.rows())
                .map(|r| hex::encode(p.y.a.row(r).to_bytes()))
                .collect(),
            yvec: hex::encode(p.y.yvec.to_bytes()),
            zvec: hex::encode(p.z.zvec.to_bytes()),
            zbit: u8::from(p.z.zbit),
        };
        serde_json::to_writer(&mut *out, &rec).map_err(|e| Error::Format(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Number of lines in a JSONL export; used by round-trip checks.
pub fn count_jsonl_lines<R: BufRead>(input: R) -> Result<usize> {
    let mut count = 0;
    for line in input.lines() {
        if !line?.trim().is_empty() {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Rng;
    use crate::taskgen::{sample_dataset, sample_zeta};
    use proptest::prelude::*;

    fn fixture(n: usize, count: usize, seed: u64) -> (TaskParams, Vec<DataPoint>) {
        let p = TaskParams::with_noise(n, 0.2, count).unwrap();
        let mut rng = Rng::new(seed, "io", 0);
        let s = sample_zeta(&p, &mut rng);
        let d = sample_dataset(&p, &s, count, &mut rng).unwrap();
        (p, d)
    }

    #[test]
    fn header_layout_is_pinned() {
        let (p, d) = fixture(9, 2, 1);
        let mut buf = Vec::new();
        write_dataset(&mut buf, &p, &d).unwrap();
        assert_eq!(&buf[..4], b"MSEP");
        assert_eq!(&buf[4..6], &[1, 0]);
        assert_eq!(&buf[6..10], &[9, 0, 0, 0]);
        assert_eq!(&buf[10..18], &0.2f64.to_le_bytes());
        assert_eq!(&buf[18..26], &[2, 0, 0, 0, 0, 0, 0, 0]);
        // record: 2 + 4 + 9*2 + 2 + 2 + 1
        assert_eq!(DataPoint::encoded_len(9), 29);
        assert_eq!(buf.len(), 26 + 2 * 29);
        // idx field sits right after the two xvec bytes
        assert_eq!(&buf[28..32], &(d[0].x.idx as u32).to_le_bytes());
    }

    #[test]
    fn rejects_corruption() {
        let (p, d) = fixture(8, 3, 2);
        let mut buf = Vec::new();
        write_dataset(&mut buf, &p, &d).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_dataset(&mut bad.as_slice()).is_err());
        let mut truncated = buf.clone();
        truncated.pop();
        assert!(read_dataset(&mut truncated.as_slice()).is_err());
        let mut trailing = buf.clone();
        trailing.push(0);
        assert!(read_dataset(&mut trailing.as_slice()).is_err());
        let mut bad_bit = buf.clone();
        *bad_bit.last_mut().unwrap() = 7;
        assert!(read_dataset(&mut bad_bit.as_slice()).is_err());
    }

    #[test]
    fn jsonl_has_one_line_per_point() {
        let (_, d) = fixture(12, 5, 3);
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &d).unwrap();
        assert_eq!(count_jsonl_lines(buf.as_slice()).unwrap(), 5);
        let first: serde_json::Value =
            serde_json::from_str(std::str::from_utf8(&buf).unwrap().lines().next().unwrap())
                .unwrap();
        assert_eq!(first["idx"], d[0].x.idx);
        assert_eq!(first["a"].as_array().unwrap().len(), 12);
        assert_eq!(first["xvec"], hex::encode(d[0].x.xvec.to_bytes()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn dataset_round_trip(n in 2usize..70, count in 1usize..6, seed in any::<u64>()) {
            let (p, d) = fixture(n, count, seed);
            let mut buf = Vec::new();
            write_dataset(&mut buf, &p, &d).unwrap();
            let (h, back) = read_dataset(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(h, DatasetHeader { n, theta: 0.2, count: count as u64 });
            prop_assert_eq!(back, d);
        }
    }
}
