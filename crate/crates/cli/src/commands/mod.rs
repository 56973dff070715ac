mod ba;
mod gen_data;
mod ka;
mod learn;
mod probe;
mod reduce;

use msep_core::gf2::Rng;
use msep_core::taskgen::TaskParams;
use serde_json::Value;

use crate::config::{Command, CommonArgs, Resolver};
use crate::report::Report;
use crate::CliError;

pub fn dispatch(cmd: &Command) -> Result<Report, CliError> {
    let mut r = Resolver::new(cmd.common().config.as_deref())?;
    let seed = resolve_seed(&mut r, cmd.common())?;
    let rng = Rng::new(seed, &format!("msep/{}", cmd.name()), 0);
    let (results, checks) = match cmd {
        Command::GenData(a) => gen_data::run(a, &mut r, rng)?,
        Command::Learn(a) => learn::run(a, &mut r, rng)?,
        Command::ProbeHardness(a) => probe::run(a, &mut r, rng)?,
        Command::Ba(a) => ba::run(a, &mut r, rng)?,
        Command::Ka(a) => ka::run(a, &mut r, rng)?,
        Command::Reduce(a) => reduce::run(a, &mut r, rng)?,
    };
    Ok(Report {
        command: cmd.name().to_owned(),
        params: r.echo,
        results,
        checks,
    })
}

fn resolve_seed(r: &mut Resolver, c: &CommonArgs) -> Result<u64, CliError> {
    let seed = r.get("seed", c.seed, None)?;
    match seed {
        Some(s) => Ok(s),
        None if c.strict_seed => Err(CliError::Config(
            "--strict-seed requires an explicit seed".into(),
        )),
        None => r.require("seed", None, 0),
    }
}

/// `n`, then `theta` (default `n^-0.5`) and `k` (default `n^3`).
fn task_params(r: &mut Resolver, c: &CommonArgs, default_n: usize) -> Result<TaskParams, CliError> {
    let n: usize = r.require("n", c.n, default_n)?;
    let theta = r.require("theta", c.theta, TaskParams::default_theta(n))?;
    let k = r.require("k", c.k, n.saturating_pow(3))?;
    Ok(TaskParams::with_noise(n, theta, k)?)
}

fn trials(r: &mut Resolver, c: &CommonArgs, default: u64) -> Result<u64, CliError> {
    let t = r.require("trials", c.trials, default)?;
    if t == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    Ok(t)
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))
}

/// Mean of a slice, `None` when empty.
fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}
