use std::path::{Path, PathBuf};

use msep_core::gf2::Rng;
use msep_core::taskgen::{io, sample_dataset, sample_zeta};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::task_params;
use crate::config::{GenDataArgs, Resolver};
use crate::report::Check;
use crate::CliError;

/// `<dataset>.json`.
pub fn sidecar_path(dataset: &Path) -> PathBuf {
    let mut s = dataset.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn run(
    a: &GenDataArgs,
    r: &mut Resolver,
    mut rng: Rng,
) -> Result<(Value, Vec<Check>), CliError> {
    let p = task_params(r, &a.common, 32)?;
    let out = a
        .common
        .out
        .clone()
        .ok_or_else(|| CliError::Config("gen-data needs --out <dataset path>".into()))?;
    r.finish()?;

    let secret = sample_zeta(&p, &mut rng);
    let data = sample_dataset(&p, &secret, p.k, &mut rng)?;
    let mut bytes = Vec::new();
    io::write_dataset(&mut bytes, &p, &data)?;
    let sha = hex::encode(Sha256::digest(&bytes));
    std::fs::write(&out, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;

    let sidecar = json!({
        "n": p.n,
        "theta": p.theta,
        "k": p.k,
        "seed": r.echo.get("seed"),
        "count": data.len(),
        "secret_digest": secret.digest_hex(),
        "dataset_sha256": sha,
    });
    let side = sidecar_path(&out);
    let text =
        serde_json::to_string_pretty(&sidecar).map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(&side, text + "\n")
        .map_err(|e| CliError::Io(format!("{}: {e}", side.display())))?;

    let results = json!({
        "dataset": out.display().to_string(),
        "sidecar": side.display().to_string(),
        "count": data.len(),
        "bytes": bytes.len(),
        "secret_digest": secret.digest_hex(),
        "dataset_sha256": sha,
    });
    let checks = vec![Check::holds("record count equals k", data.len() == p.k)];
    Ok((results, checks))
}
