//! Samplers for the bimodal task `μ = (χ, η, ζ)` built on low-noise LPN.
//!
//! A datapoint is `(x, y, z)` where
//! - `x = (xvec, idx)`: `xvec ~ Ber(θ)^n`, `idx` uniform in `[0, n)`;
//! - `y = φ(x) = (A, xvec·A ⊕ b ⊕ e^(idx))` with `A` uniform n×n and `b ~ Ber(θ)^n`;
//! - `z = ψ_w(y) = (A·w ⊕ b', yvec·w ⊕ b'')` with the planted `w ~ Ber(θ)^n`.
//!
//! `η` is a point mass on `φ`, so only `ζ` (the choice of `w`) is random per task.

mod dlpn;
pub mod io;
mod task;

pub use dlpn::{sample_dlpn, sample_dlpn_revealed, DlpnInstance, DlpnView, SecretMode, World};
pub use io::WireCodec;
pub use task::{BimodalTask, LabelSpace, LpnTask, ParityTask, ZbitTask};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{check_dim, Error, Result};
use crate::gf2::{
    self, bernoulli_bit, bernoulli_threshold, bernoulli_with_threshold, row_times_matrix,
    uniform_matrix, BitMatrix, BitVec, Rng,
};

/// Knobs of the task family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TaskParams {
    /// Dimension.
    pub n: usize,
    /// Noise rate; defaults to `n^-0.5`. Zero is accepted as an explicit
    /// noise-free override.
    pub theta: f64,
    /// Training-set size; defaults to `n^3`.
    pub k: usize,
}

impl TaskParams {
    /// Default parameters: `θ = n^-0.5`, `k = n^3`. Requires `n >= 5` so that
    /// the default `θ` is below one half.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_noise(n, Self::default_theta(n), n.saturating_pow(3))
    }

    pub fn with_noise(n: usize, theta: f64, k: usize) -> Result<Self> {
        let p = Self { n, theta, k };
        p.validate()?;
        Ok(p)
    }

    pub fn with_theta(self, theta: f64) -> Result<Self> {
        Self::with_noise(self.n, theta, self.k)
    }

    pub fn with_k(self, k: usize) -> Result<Self> {
        Self::with_noise(self.n, self.theta, k)
    }

    pub fn default_theta(n: usize) -> f64 {
        (n as f64).powf(-0.5)
    }

    /// Reduced training size `ceil(c · n² · ln n)` for fast runs.
    pub fn reduced_k(n: usize, c: f64) -> usize {
        let nf = n as f64;
        (c * nf * nf * nf.ln()).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!(
                "n = {} (need n >= 2)",
                self.n
            )));
        }
        if !(0.0..0.5).contains(&self.theta) {
            return Err(Error::ThetaOutOfRange(self.theta));
        }
        if self.k < 1 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn threshold(&self) -> u64 {
        bernoulli_threshold(self.theta).expect("validated theta")
    }
}

/// First modality: `(xvec, idx)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModalityX {
    pub xvec: BitVec,
    pub idx: usize,
}

/// Second modality: `(A, yvec)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModalityY {
    pub a: BitMatrix,
    pub yvec: BitVec,
}

/// Label `(zvec, zbit)`, an `n + 1` bit vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelZ {
    pub zvec: BitVec,
    pub zbit: bool,
}

impl LabelZ {
    pub fn bits(&self) -> usize {
        self.zvec.len() + 1
    }

    /// Number of coordinates where the two labels differ.
    pub fn hamming(&self, other: &LabelZ) -> Result<usize> {
        check_dim("label length", self.zvec.len(), other.zvec.len())?;
        let diff = gf2::xor_add(&self.zvec, &other.zvec)?.weight();
        Ok(diff + usize::from(self.zbit != other.zbit))
    }
}

/// The planted concept `w` behind `ψ_w`.
#[derive(Clone, PartialEq, Eq)]
pub struct Secret {
    w: BitVec,
}

impl Secret {
    pub fn new(w: BitVec) -> Self {
        Self { w }
    }

    pub fn w(&self) -> &BitVec {
        &self.w
    }

    pub fn into_inner(self) -> BitVec {
        self.w
    }

    /// SHA-256 of the packed secret; lets reports refer to a secret without
    /// revealing it.
    pub fn digest_hex(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.w.len() as u64).to_le_bytes());
        h.update(self.w.to_bytes());
        hex::encode(h.finalize())
    }
}

impl std::fmt::Debug for Secret {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Secret(len={}, digest={})",
            self.w.len(),
            &self.digest_hex()[..12]
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataPoint {
    pub x: ModalityX,
    pub y: ModalityY,
    pub z: LabelZ,
}

/// Noise terms of one sample; only visible to in-crate tests.
#[cfg_attr(not(test), allow(dead_code))]
#[derive(Clone, Debug)]
pub(crate) struct NoiseTrace {
    pub b: BitVec,
    pub b_prime: BitVec,
    pub b_dprime: bool,
}

pub fn sample_chi(params: &TaskParams, rng: &mut Rng) -> ModalityX {
    let idx = rng.below(params.n);
    let xvec = bernoulli_with_threshold(params.n, params.threshold(), rng);
    ModalityX { xvec, idx }
}

pub fn apply_phi(params: &TaskParams, x: &ModalityX, rng: &mut Rng) -> Result<ModalityY> {
    apply_phi_traced(params, x, rng).map(|(y, _)| y)
}

fn apply_phi_traced(
    params: &TaskParams,
    x: &ModalityX,
    rng: &mut Rng,
) -> Result<(ModalityY, BitVec)> {
    let n = params.n;
    check_dim("xvec length", n, x.xvec.len())?;
    if x.idx >= n {
        return Err(Error::IndexOutOfRange {
            index: x.idx,
            len: n,
        });
    }
    let a = uniform_matrix(n, n, rng);
    let b = bernoulli_with_threshold(n, params.threshold(), rng);
    let mut yvec = row_times_matrix(&x.xvec, &a)?;
    yvec.xor_assign(&b)?;
    yvec.flip(x.idx);
    Ok((ModalityY { a, yvec }, b))
}

pub fn sample_zeta(params: &TaskParams, rng: &mut Rng) -> Secret {
    Secret::new(bernoulli_with_threshold(params.n, params.threshold(), rng))
}

pub fn apply_psi(
    params: &TaskParams,
    secret: &Secret,
    y: &ModalityY,
    rng: &mut Rng,
) -> Result<LabelZ> {
    apply_psi_traced(params, secret, y, rng).map(|(z, _, _)| z)
}

fn apply_psi_traced(
    params: &TaskParams,
    secret: &Secret,
    y: &ModalityY,
    rng: &mut Rng,
) -> Result<(LabelZ, BitVec, bool)> {
    let n = params.n;
    check_dim("secret length", n, secret.w.len())?;
    check_dim("Y rows", n, y.a.rows())?;
    check_dim("yvec length", n, y.yvec.len())?;
    let threshold = params.threshold();
    let b_prime = bernoulli_with_threshold(n, threshold, rng);
    let b_dprime = bernoulli_bit(threshold, rng);
    let mut zvec = gf2::matrix_times_col(&y.a, &secret.w)?;
    zvec.xor_assign(&b_prime)?;
    let zbit = gf2::inner(&y.yvec, &secret.w)? ^ b_dprime;
    Ok((LabelZ { zvec, zbit }, b_prime, b_dprime))
}

/// One datapoint `(x, φ(x), ψ_w(φ(x)))`.
pub fn sample_point(params: &TaskParams, secret: &Secret, rng: &mut Rng) -> Result<DataPoint> {
    sample_point_traced(params, secret, rng).map(|(p, _)| p)
}

pub(crate) fn sample_point_traced(
    params: &TaskParams,
    secret: &Secret,
    rng: &mut Rng,
) -> Result<(DataPoint, NoiseTrace)> {
    let x = sample_chi(params, rng);
    let (y, b) = apply_phi_traced(params, &x, rng)?;
    let (z, b_prime, b_dprime) = apply_psi_traced(params, secret, &y, rng)?;
    Ok((
        DataPoint { x, y, z },
        NoiseTrace {
            b,
            b_prime,
            b_dprime,
        },
    ))
}

const DATASET_CHUNK: usize = 2048;

/// `count` i.i.d. points under a fixed secret.
///
/// The work is cut into fixed-size chunks, each drawing from its own stream
/// (`stream_index` = chunk id), so the result does not depend on the number of
/// worker threads.
pub fn sample_dataset(
    params: &TaskParams,
    secret: &Secret,
    count: usize,
    rng: &mut Rng,
) -> Result<Vec<DataPoint>> {
    params.validate()?;
    if count == 0 {
        return Err(Error::EmptyInput("dataset count must be at least 1"));
    }
    check_dim("secret length", params.n, secret.w.len())?;
    let base = rng.split("dataset", 0);
    let chunks = count.div_ceil(DATASET_CHUNK);
    let parts: Vec<Vec<DataPoint>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut chunk_rng = base.derive("chunk", c as u64);
            let len = DATASET_CHUNK.min(count - c * DATASET_CHUNK);
            (0..len)
                .map(|_| sample_point(params, secret, &mut chunk_rng))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Drops the first modality, keeping order.
pub fn project_yz(dataset: &[DataPoint]) -> Result<Vec<(ModalityY, LabelZ)>> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("projection of an empty dataset"));
    }
    Ok(dataset.iter().map(|p| (p.y.clone(), p.z.clone())).collect())
}

/// Drops the second modality, keeping order.
pub fn project_xz(dataset: &[DataPoint]) -> Result<Vec<(ModalityX, LabelZ)>> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("projection of an empty dataset"));
    }
    Ok(dataset.iter().map(|p| (p.x.clone(), p.z.clone())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{inner, matrix_times_col, xor_add};

    fn noise_free(n: usize) -> TaskParams {
        TaskParams::with_noise(n, 0.0, n * n).unwrap()
    }

    #[test]
    fn params_defaults_and_validation() {
        let p = TaskParams::new(16).unwrap();
        assert_eq!(p.theta, 0.25);
        assert_eq!(p.k, 4096);
        assert!(TaskParams::new(4).is_err()); // θ = 0.5
        assert!(TaskParams::with_noise(1, 0.1, 1).is_err());
        assert!(TaskParams::with_noise(8, 0.1, 0).is_err());
        assert!(TaskParams::with_noise(8, 0.5, 1).is_err());
        assert_eq!(
            TaskParams::reduced_k(32, 8.0),
            (8.0 * 1024.0 * 32f64.ln()).ceil() as usize
        );
    }

    #[test]
    fn chi_noise_free_keeps_uniform_index() {
        let p = noise_free(16);
        let mut rng = Rng::new(1, "test/chi0", 0);
        let mut counts = [0usize; 16];
        for _ in 0..10_000 {
            let x = sample_chi(&p, &mut rng);
            assert!(x.xvec.is_zero());
            counts[x.idx] += 1;
        }
        // Chernoff with λ = 625, t = 100: per-index failure < 1.5e-3.
        assert!(
            counts.iter().all(|&c| (525..=725).contains(&c)),
            "{counts:?}"
        );
    }

    #[test]
    fn chi_index_and_weight_statistics() {
        let p = TaskParams::new(16).unwrap();
        let mut rng = Rng::new(2, "test/chi", 0);
        let mut counts = [0usize; 16];
        let mut weight = 0usize;
        for _ in 0..10_000 {
            let x = sample_chi(&p, &mut rng);
            counts[x.idx] += 1;
            weight += x.xvec.weight();
        }
        assert!(
            counts.iter().all(|&c| (525..=725).contains(&c)),
            "{counts:?}"
        );
        // mean weight 4, sd of the mean sqrt(16·0.25·0.75/1e4) ≈ 0.017.
        let mean = weight as f64 / 1e4;
        assert!((mean - 4.0).abs() <= 0.15, "{mean}");
    }

    #[test]
    fn phi_noise_free_is_basis_vector() {
        let p = noise_free(12);
        let mut rng = Rng::new(3, "test/phi0", 0);
        for _ in 0..100 {
            let x = sample_chi(&p, &mut rng);
            let y = apply_phi(&p, &x, &mut rng).unwrap();
            assert_eq!(y.yvec, gf2::basis_vec(x.idx, 12).unwrap());
        }
    }

    #[test]
    fn phi_residual_is_bernoulli_noise() {
        let p = TaskParams::new(16).unwrap();
        let mut rng = Rng::new(4, "test/phi", 0);
        let trials = 10_000;
        let mut total = 0usize;
        for _ in 0..trials {
            let x = sample_chi(&p, &mut rng);
            let y = apply_phi(&p, &x, &mut rng).unwrap();
            let mut r = xor_add(&y.yvec, &row_times_matrix(&x.xvec, &y.a).unwrap()).unwrap();
            r.flip(x.idx);
            total += r.weight();
        }
        let mean = total as f64 / trials as f64;
        let sd = (16.0 * 0.25 * 0.75 / trials as f64).sqrt();
        assert!((mean - 4.0).abs() <= 3.0 * sd, "{mean}");
    }

    #[test]
    fn phi_is_deterministic_and_checks_dims() {
        let p = TaskParams::new(9).unwrap();
        let x = sample_chi(&p, &mut Rng::new(5, "x", 0));
        let a = apply_phi(&p, &x, &mut Rng::new(5, "phi", 0)).unwrap();
        let b = apply_phi(&p, &x, &mut Rng::new(5, "phi", 0)).unwrap();
        assert_eq!(a, b);
        let bad = ModalityX {
            xvec: BitVec::zeros(8),
            idx: 0,
        };
        assert!(apply_phi(&p, &bad, &mut Rng::new(5, "phi", 0)).is_err());
    }

    #[test]
    fn zeta_statistics() {
        let p0 = noise_free(30);
        assert!(sample_zeta(&p0, &mut Rng::new(6, "z", 0)).w().is_zero());
        let p = TaskParams::new(100).unwrap();
        let mut rng = Rng::new(6, "zeta", 0);
        let total: usize = (0..1000)
            .map(|_| sample_zeta(&p, &mut rng).w().weight())
            .sum();
        let mean = total as f64 / 1000.0;
        assert!((mean - 10.0).abs() <= 1.0, "{mean}");
        assert_eq!(
            sample_zeta(&p, &mut Rng::new(6, "zz", 0)),
            sample_zeta(&p, &mut Rng::new(6, "zz", 0))
        );
    }

    #[test]
    fn psi_examples() {
        let p = TaskParams::new(16).unwrap();
        let p0 = noise_free(16);
        let mut rng = Rng::new(7, "psi", 0);
        let secret = sample_zeta(&p, &mut rng);
        let x = sample_chi(&p, &mut rng);
        let y = apply_phi(&p, &x, &mut rng).unwrap();
        let z = apply_psi(&p0, &secret, &y, &mut rng).unwrap();
        assert_eq!(z.zvec, matrix_times_col(&y.a, secret.w()).unwrap());

        let zero = Secret::new(BitVec::zeros(16));
        let z = apply_psi(&p0, &zero, &y, &mut rng).unwrap();
        assert!(z.zvec.is_zero() && !z.zbit);

        let mut total = 0usize;
        for _ in 0..10_000 {
            let z = apply_psi(&p, &secret, &y, &mut rng).unwrap();
            total += xor_add(&z.zvec, &matrix_times_col(&y.a, secret.w()).unwrap())
                .unwrap()
                .weight();
        }
        let mean = total as f64 / 1e4;
        let sd = (16.0 * 0.25 * 0.75 / 1e4f64).sqrt();
        assert!((mean - 4.0).abs() <= 3.0 * sd, "{mean}");
    }

    #[test]
    fn dataset_requires_positive_count() {
        let p = TaskParams::new(8).unwrap();
        let s = sample_zeta(&p, &mut Rng::new(8, "s", 0));
        assert!(matches!(
            sample_dataset(&p, &s, 0, &mut Rng::new(8, "d", 0)),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn dataset_is_deterministic_and_thread_count_independent() {
        let p = TaskParams::new(10).unwrap();
        let s = sample_zeta(&p, &mut Rng::new(9, "s", 0));
        let a = sample_dataset(&p, &s, 5000, &mut Rng::new(9, "d", 0)).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b = pool
            .install(|| sample_dataset(&p, &s, 5000, &mut Rng::new(9, "d", 0)))
            .unwrap();
        assert_eq!(a.len(), 5000);
        assert_eq!(a, b);
    }

    #[test]
    fn noise_free_reconstruction_identity() {
        let p = noise_free(16);
        let mut rng = Rng::new(10, "recon", 0);
        let secret = sample_zeta(&TaskParams::new(16).unwrap(), &mut rng);
        let data = sample_dataset(&p, &secret, 1000, &mut rng).unwrap();
        for pt in &data {
            assert_eq!(pt.z.zvec, matrix_times_col(&pt.y.a, secret.w()).unwrap());
            let mut lhs = row_times_matrix(&pt.x.xvec, &pt.y.a).unwrap();
            lhs.flip(pt.x.idx);
            assert_eq!(pt.z.zbit, inner(&lhs, secret.w()).unwrap());
        }
    }

    /// `⟨xvec, zvec⟩ ⊕ zbit = w_idx ⊕ ⟨xvec, b'⟩ ⊕ ⟨b, w⟩ ⊕ b''`, bit-exactly.
    #[test]
    fn vote_identity_with_visible_noise() {
        let p = TaskParams::new(20).unwrap();
        let mut rng = Rng::new(11, "vote-identity", 0);
        let secret = sample_zeta(&p, &mut rng);
        for _ in 0..2000 {
            let (pt, noise) = sample_point_traced(&p, &secret, &mut rng).unwrap();
            let lhs = inner(&pt.x.xvec, &pt.z.zvec).unwrap() ^ pt.z.zbit;
            let rhs = secret.w().get(pt.x.idx)
                ^ inner(&pt.x.xvec, &noise.b_prime).unwrap()
                ^ inner(&noise.b, secret.w()).unwrap()
                ^ noise.b_dprime;
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn projections_preserve_order() {
        let p = TaskParams::new(6).unwrap();
        let mut rng = Rng::new(12, "proj", 0);
        let s = sample_zeta(&p, &mut rng);
        let data = sample_dataset(&p, &s, 3, &mut rng).unwrap();
        let yz = project_yz(&data).unwrap();
        let xz = project_xz(&data).unwrap();
        assert_eq!(yz.len(), 3);
        assert_eq!(xz.len(), 3);
        // Hand-built tuples from the fixture.
        let expected_yz: Vec<_> = data.iter().map(|d| (d.y.clone(), d.z.clone())).collect();
        assert_eq!(yz, expected_yz);
        let rebuilt: Vec<DataPoint> = xz
            .into_iter()
            .zip(yz)
            .map(|((x, z), (y, _))| DataPoint { x, y, z })
            .collect();
        assert_eq!(rebuilt, data);
        assert!(project_yz(&[]).is_err());
        assert!(project_xz(&[]).is_err());
    }
}
