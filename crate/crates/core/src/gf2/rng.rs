use rand::{Error as RandError, Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Seeded random stream identified by `(master_seed, domain_tag, stream_index)`.
///
/// The output is a pure function of that triple. Work that runs concurrently
/// must draw from distinct streams, obtained with [`Rng::derive`] or
/// [`Rng::split`]; a stream is never shared between threads.
#[derive(Clone, Debug)]
pub struct Rng {
    master_seed: u64,
    domain_tag: String,
    stream_index: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(master_seed: u64, domain_tag: &str, stream_index: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"msep-rng-v1");
        h.update(master_seed.to_le_bytes());
        h.update((domain_tag.len() as u64).to_le_bytes());
        h.update(domain_tag.as_bytes());
        h.update(stream_index.to_le_bytes());
        let seed: [u8; 32] = h.finalize().into();
        Self {
            master_seed,
            domain_tag: domain_tag.to_owned(),
            stream_index,
            inner: ChaCha8Rng::from_seed(seed),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn domain_tag(&self) -> &str {
        &self.domain_tag
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Child stream that depends only on this stream's identity, not on how
    /// much of it has been consumed.
    pub fn derive(&self, tag: &str, index: u64) -> Rng {
        let child_tag = format!("{}#{}/{}", self.domain_tag, self.stream_index, tag);
        Rng::new(self.master_seed, &child_tag, index)
    }

    /// Child stream keyed by the next draw of this stream, so repeated splits
    /// give fresh children.
    pub fn split(&mut self, tag: &str, index: u64) -> Rng {
        let nonce = self.inner.next_u64();
        let child_tag = format!("{}#{}/{}", self.domain_tag, self.stream_index, tag);
        Rng::new(nonce, &child_tag, index)
    }

    #[inline]
    pub fn bit(&mut self) -> bool {
        self.inner.next_u64() >> 63 == 1
    }

    /// Uniform integer in `[0, bound)`.
    #[inline]
    pub fn below(&mut self, bound: usize) -> usize {
        self.inner.gen_range(0..bound)
    }

    /// Uniform real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.gen()
    }
}

impl RngCore for Rng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), RandError> {
        self.inner.try_fill_bytes(dest)
    }
}
