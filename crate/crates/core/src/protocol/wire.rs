//! Length-prefixed frames: `len u32 BE | tag u8 | payload`, where `len`
//! counts the tag and the payload. Payload integers are little-endian and
//! records use the taskgen binary layout.

use std::io::{Read, Write};
use std::sync::mpsc;

use crate::error::{check_dim, Error, Result};
use crate::gf2::BitVec;
use crate::taskgen::io::{WireCodec, MAX_WIRE_DIM};
use crate::taskgen::LabelSpace;

pub const TAG_MSG1: u8 = 1;
pub const TAG_MSG2: u8 = 2;
pub const TAG_EXTRACTOR_SEED: u8 = 3;

/// Upper bound on `len`; larger frames are rejected before allocation.
pub const MAX_FRAME_LEN: usize = 1 << 30;

pub fn encode_frame(tag: u8, payload: &[u8]) -> Result<Vec<u8>> {
    let len = payload.len() + 1;
    if len > MAX_FRAME_LEN {
        return Err(Error::Protocol(format!(
            "frame of {len} bytes exceeds limit"
        )));
    }
    let mut out = Vec::with_capacity(len + 4);
    out.extend_from_slice(&(len as u32).to_be_bytes());
    out.push(tag);
    out.extend_from_slice(payload);
    Ok(out)
}

/// Splits a complete frame into `(tag, payload)`.
pub fn parse_frame(frame: &[u8]) -> Result<(u8, &[u8])> {
    if frame.len() < 5 {
        return Err(Error::Protocol(format!(
            "frame of {} bytes is too short",
            frame.len()
        )));
    }
    let len = u32::from_be_bytes(frame[..4].try_into().unwrap()) as usize;
    if len != frame.len() - 4 {
        return Err(Error::Protocol(format!(
            "frame length field {len} does not match {} bytes",
            frame.len() - 4
        )));
    }
    Ok((frame[4], &frame[5..]))
}

/// Payload of a frame that must carry `tag`.
pub fn expect_frame(frame: &[u8], tag: u8) -> Result<&[u8]> {
    let (got, payload) = parse_frame(frame)?;
    if got != tag {
        return Err(Error::Protocol(format!(
            "expected frame tag {tag}, got {got}"
        )));
    }
    Ok(payload)
}

/// Reads one complete frame, header included.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Vec<u8>> {
    let mut head = [0u8; 4];
    r.read_exact(&mut head)?;
    let len = u32::from_be_bytes(head) as usize;
    if len == 0 || len > MAX_FRAME_LEN {
        return Err(Error::Protocol(format!("bad frame length {len}")));
    }
    let mut frame = vec![0u8; len + 4];
    frame[..4].copy_from_slice(&head);
    r.read_exact(&mut frame[4..])?;
    Ok(frame)
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Protocol(format!("{v} does not fit in u32")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.0.len() < n {
            return Err(Error::Protocol("truncated payload".into()));
        }
        let (head, rest) = self.0.split_at(n);
        self.0 = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn dim(&mut self) -> Result<usize> {
        let n = self.u32()?;
        if n == 0 || n > MAX_WIRE_DIM {
            return Err(Error::Protocol(format!("dimension {n} out of range")));
        }
        Ok(n)
    }

    fn records<V: WireCodec>(&mut self, n: usize, count: usize) -> Result<Vec<V>> {
        let size = V::encoded_len(n);
        if count.checked_mul(size) != Some(self.0.len()) {
            return Err(Error::Protocol(format!(
                "{count} records of {size} bytes do not fill {} payload bytes",
                self.0.len()
            )));
        }
        self.0
            .chunks_exact(size.max(1))
            .take(count)
            .map(|rec| V::decode(n, rec).map_err(|e| Error::Protocol(e.to_string())))
            .collect()
    }
}

/// Alice's first message: the `k + 1` second-modality samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Msg1<Y> {
    pub n: usize,
    pub ys: Vec<Y>,
}

impl<Y: WireCodec> Msg1<Y> {
    /// Payload: `n u32 | count u32 | records`.
    pub fn to_frame(&self) -> Result<Vec<u8>> {
        let mut p = Vec::with_capacity(8 + self.ys.len() * Y::encoded_len(self.n));
        put_u32(&mut p, self.n)?;
        put_u32(&mut p, self.ys.len())?;
        for y in &self.ys {
            y.encode(&mut p);
        }
        encode_frame(TAG_MSG1, &p)
    }

    pub fn from_frame(frame: &[u8]) -> Result<Self> {
        let mut c = Cursor(expect_frame(frame, TAG_MSG1)?);
        let n = c.dim()?;
        let count = c.u32()?;
        let ys = c.records(n, count)?;
        Ok(Self { n, ys })
    }
}

const KIND_VECTOR: u8 = 0;
const KIND_BIT: u8 = 1;

/// Bob's reply: one label per sample of [`Msg1`].
#[derive(Clone, Debug, PartialEq)]
pub struct Msg2<L> {
    pub n: usize,
    pub space: LabelSpace,
    pub labels: Vec<L>,
}

impl<L: WireCodec> Msg2<L> {
    /// Payload: `kind u8 | n u32 | count u32 | records`, kind 0 for vector
    /// labels and 1 for single bits.
    pub fn to_frame(&self) -> Result<Vec<u8>> {
        let mut p = Vec::with_capacity(9 + self.labels.len() * L::encoded_len(self.n));
        p.push(match self.space {
            LabelSpace::Vector { .. } => KIND_VECTOR,
            LabelSpace::Binary => KIND_BIT,
        });
        put_u32(&mut p, self.n)?;
        put_u32(&mut p, self.labels.len())?;
        for l in &self.labels {
            l.encode(&mut p);
        }
        encode_frame(TAG_MSG2, &p)
    }

    pub fn from_frame(frame: &[u8]) -> Result<Self> {
        let mut c = Cursor(expect_frame(frame, TAG_MSG2)?);
        let kind = c.u8()?;
        let n = c.dim()?;
        let space = match kind {
            KIND_VECTOR => LabelSpace::Vector { bits: n + 1 },
            KIND_BIT => LabelSpace::Binary,
            k => return Err(Error::Protocol(format!("unknown label kind {k}"))),
        };
        let count = c.u32()?;
        let labels = c.records(n, count)?;
        Ok(Self { n, space, labels })
    }
}

/// The public extractor seed: `raw_len u32 | out_len u32 | seed bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedMsg {
    pub raw_len: usize,
    pub out_len: usize,
    pub seed: BitVec,
}

impl SeedMsg {
    pub fn seed_len(raw_len: usize, out_len: usize) -> usize {
        if out_len == 0 {
            0
        } else {
            raw_len + out_len - 1
        }
    }

    pub fn to_frame(&self) -> Result<Vec<u8>> {
        check_dim(
            "extractor seed length",
            Self::seed_len(self.raw_len, self.out_len),
            self.seed.len(),
        )?;
        let mut p = Vec::new();
        put_u32(&mut p, self.raw_len)?;
        put_u32(&mut p, self.out_len)?;
        self.seed.write_bytes(&mut p);
        encode_frame(TAG_EXTRACTOR_SEED, &p)
    }

    pub fn from_frame(frame: &[u8]) -> Result<Self> {
        let mut c = Cursor(expect_frame(frame, TAG_EXTRACTOR_SEED)?);
        let raw_len = c.u32()?;
        let out_len = c.u32()?;
        let len = Self::seed_len(raw_len, out_len);
        let seed = BitVec::from_bytes(len, c.0).map_err(|e| Error::Protocol(e.to_string()))?;
        Ok(Self {
            raw_len,
            out_len,
            seed,
        })
    }
}

/// One end of a reliable, in-order, authenticated link carrying whole frames.
pub trait Transport {
    fn send(&mut self, frame: Vec<u8>) -> Result<()>;
    fn recv(&mut self) -> Result<Vec<u8>>;
}

/// In-process endpoint; see [`memory_pair`].
pub struct MemoryTransport {
    tx: mpsc::Sender<Vec<u8>>,
    rx: mpsc::Receiver<Vec<u8>>,
}

/// Two connected in-process endpoints. Sends never block.
pub fn memory_pair() -> (MemoryTransport, MemoryTransport) {
    let (tx_a, rx_b) = mpsc::channel();
    let (tx_b, rx_a) = mpsc::channel();
    (
        MemoryTransport { tx: tx_a, rx: rx_a },
        MemoryTransport { tx: tx_b, rx: rx_b },
    )
}

impl Transport for MemoryTransport {
    fn send(&mut self, frame: Vec<u8>) -> Result<()> {
        parse_frame(&frame)?;
        self.tx
            .send(frame)
            .map_err(|_| Error::Protocol("peer hung up".into()))
    }

    fn recv(&mut self) -> Result<Vec<u8>> {
        self.rx
            .recv()
            .map_err(|_| Error::Protocol("peer hung up".into()))
    }
}

/// Frames over any byte stream, such as a Unix socket.
pub struct StreamTransport<S> {
    stream: S,
}

impl<S: Read + Write> StreamTransport<S> {
    pub fn new(stream: S) -> Self {
        Self { stream }
    }
}

impl<S: Read + Write> Transport for StreamTransport<S> {
    fn send(&mut self, frame: Vec<u8>) -> Result<()> {
        parse_frame(&frame)?;
        self.stream.write_all(&frame)?;
        self.stream.flush()?;
        Ok(())
    }

    fn recv(&mut self) -> Result<Vec<u8>> {
        read_frame(&mut self.stream)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Rng;
    use crate::taskgen::{BimodalTask, LpnTask, TaskParams};

    #[test]
    fn frame_header_layout() {
        let f = encode_frame(TAG_MSG2, &[0xaa, 0xbb]).unwrap();
        assert_eq!(f, vec![0, 0, 0, 3, 2, 0xaa, 0xbb]);
        assert_eq!(parse_frame(&f).unwrap(), (2, &[0xaa, 0xbb][..]));
        assert!(parse_frame(&f[..6]).is_err());
        assert!(expect_frame(&f, TAG_MSG1).is_err());
    }

    #[test]
    fn msg1_layout_and_round_trip() {
        let task = LpnTask::new(TaskParams::with_noise(9, 0.1, 3).unwrap()).unwrap();
        let mut rng = Rng::new(1, "wire", 0);
        let ys: Vec<_> = (0..3)
            .map(|_| task.sample_unlabeled(&mut rng).unwrap().1)
            .collect();
        let m = Msg1 { n: 9, ys };
        let f = m.to_frame().unwrap();
        // A is 9 rows of 2 bytes, yvec 2 bytes
        let rec = 9 * 2 + 2;
        assert_eq!(f.len(), 4 + 1 + 8 + 3 * rec);
        assert_eq!(&f[5..13], &[9, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(Msg1::from_frame(&f).unwrap(), m);

        let mut bad = f.clone();
        bad.pop();
        assert!(Msg1::<crate::taskgen::ModalityY>::from_frame(&bad).is_err());
        let mut bad = f.clone();
        *bad.last_mut().unwrap() = 0xff; // padding bits set
        assert!(Msg1::<crate::taskgen::ModalityY>::from_frame(&bad).is_err());
        let mut bad = f;
        bad[5] = 0;
        assert!(Msg1::<crate::taskgen::ModalityY>::from_frame(&bad).is_err());
    }

    #[test]
    fn msg2_kinds() {
        let bits = Msg2 {
            n: 4,
            space: LabelSpace::Binary,
            labels: vec![true, false, true],
        };
        let f = bits.to_frame().unwrap();
        assert_eq!(&f[4..], &[2, 1, 4, 0, 0, 0, 3, 0, 0, 0, 1, 0, 1]);
        assert_eq!(Msg2::from_frame(&f).unwrap(), bits);
        let mut bad = f;
        bad[5] = 7;
        assert!(Msg2::<bool>::from_frame(&bad).is_err());
    }

    #[test]
    fn seed_message_round_trip() {
        let mut rng = Rng::new(2, "seed", 0);
        let s = SeedMsg {
            raw_len: 10,
            out_len: 4,
            seed: crate::gf2::uniform_vec(13, &mut rng),
        };
        assert_eq!(SeedMsg::from_frame(&s.to_frame().unwrap()).unwrap(), s);
        let empty = SeedMsg {
            raw_len: 10,
            out_len: 0,
            seed: BitVec::zeros(0),
        };
        assert_eq!(
            SeedMsg::from_frame(&empty.to_frame().unwrap()).unwrap(),
            empty
        );
    }

    #[test]
    fn stream_transport_over_socket() {
        let (a, b) = std::os::unix::net::UnixStream::pair().unwrap();
        let (mut a, mut b) = (StreamTransport::new(a), StreamTransport::new(b));
        let f = encode_frame(TAG_MSG1, &[1, 2, 3]).unwrap();
        a.send(f.clone()).unwrap();
        assert_eq!(b.recv().unwrap(), f);
        assert!(a.send(vec![0, 0, 0, 9, 1]).is_err());
    }
}
