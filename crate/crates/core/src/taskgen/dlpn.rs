use serde::Serialize;

use super::Secret;
use crate::error::{Error, Result};
use crate::gf2::{
    bernoulli_vec, row_times_matrix, uniform_matrix, uniform_vec, BitMatrix, BitVec, Rng,
};

/// Which distribution a DLPN instance came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum World {
    Planted,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SecretMode {
    UniformSecret,
    /// Secret drawn from the noise distribution `Ber(θ)^n`.
    BernoulliSecret,
}

/// An `(A, q)` pair with `A` n×m. The world label is kept for harnesses only;
/// distinguishers receive a [`DlpnView`].
#[derive(Clone, Debug)]
pub struct DlpnInstance {
    a: BitMatrix,
    q: BitVec,
    world: World,
    secret_mode: SecretMode,
}

/// What a distinguisher is allowed to see.
#[derive(Clone, Copy, Debug)]
pub struct DlpnView<'a> {
    pub a: &'a BitMatrix,
    pub q: &'a BitVec,
}

impl DlpnInstance {
    pub fn view(&self) -> DlpnView<'_> {
        DlpnView {
            a: &self.a,
            q: &self.q,
        }
    }

    pub fn world(&self) -> World {
        self.world
    }

    pub fn secret_mode(&self) -> SecretMode {
        self.secret_mode
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn m(&self) -> usize {
        self.a.cols()
    }
}

pub fn sample_dlpn(
    n: usize,
    m: usize,
    theta: f64,
    secret_mode: SecretMode,
    world: World,
    rng: &mut Rng,
) -> Result<DlpnInstance> {
    sample_dlpn_revealed(n, m, theta, secret_mode, world, rng).map(|(inst, _)| inst)
}

/// Like [`sample_dlpn`] but also returns the planted secret (`None` in the
/// uniform world). For test oracles and harnesses only.
pub fn sample_dlpn_revealed(
    n: usize,
    m: usize,
    theta: f64,
    secret_mode: SecretMode,
    world: World,
    rng: &mut Rng,
) -> Result<(DlpnInstance, Option<Secret>)> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParams(format!("DLPN dims {n}x{m}")));
    }
    let a = uniform_matrix(n, m, rng);
    let (q, secret) = match world {
        World::Planted => {
            let x = match secret_mode {
                SecretMode::UniformSecret => uniform_vec(n, rng),
                SecretMode::BernoulliSecret => bernoulli_vec(n, theta, rng)?,
            };
            let mut q = row_times_matrix(&x, &a)?;
            q.xor_assign(&bernoulli_vec(m, theta, rng)?)?;
            (q, Some(Secret::new(x)))
        }
        World::Uniform => {
            // validate theta even though it is unused here
            bernoulli_vec(0, theta, rng)?;
            (uniform_vec(m, rng), None)
        }
    };
    Ok((
        DlpnInstance {
            a,
            q,
            world,
            secret_mode,
        },
        secret,
    ))
}
