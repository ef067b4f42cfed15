use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use cdkit::{CurvatureProfile, FiniteMmSpace, OneDimMmSpace, VerificationReport};
use serde::de::DeserializeOwned;

/// A space file holds either a one-dimensional or a finite space; the keys decide.
pub enum AnySpace {
    Line(OneDimMmSpace),
    Finite(FiniteMmSpace),
}

fn read_json<T: DeserializeOwned>(flag: &str, path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("--{flag}: cannot read {}", path.display()))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| field_error(flag, path, e))
}

/// Names the offending field, e.g. `--space: x.json: field "kappa.samples": ...`.
fn field_error(
    flag: &str,
    path: &Path,
    e: serde_path_to_error::Error<serde_json::Error>,
) -> anyhow::Error {
    let field = e.path().to_string();
    if field == "." {
        anyhow!("--{flag}: {}: {}", path.display(), e.inner())
    } else {
        anyhow!(
            "--{flag}: {}: field \"{field}\": {}",
            path.display(),
            e.inner()
        )
    }
}

pub fn load_profile(flag: &str, path: &Path) -> Result<CurvatureProfile> {
    read_json(flag, path)
}

pub fn load_line(flag: &str, path: &Path) -> Result<OneDimMmSpace> {
    match load_space(flag, path)? {
        AnySpace::Line(s) => Ok(s),
        AnySpace::Finite(_) => {
            bail!("--{flag}: expected a one-dimensional space (keys L, density, kappa, N)")
        }
    }
}

pub fn load_finite(flag: &str, path: &Path) -> Result<FiniteMmSpace> {
    match load_space(flag, path)? {
        AnySpace::Finite(s) => Ok(s),
        AnySpace::Line(_) => bail!("--{flag}: expected a finite space (keys dist, weights, kappa)"),
    }
}

pub fn load_space(flag: &str, path: &Path) -> Result<AnySpace> {
    let value: serde_json::Value = read_json(flag, path)?;
    if value.get("dist").is_some() {
        let s = serde_path_to_error::deserialize(value).map_err(|e| field_error(flag, path, e))?;
        Ok(AnySpace::Finite(s))
    } else {
        let s = serde_path_to_error::deserialize(value).map_err(|e| field_error(flag, path, e))?;
        Ok(AnySpace::Line(s))
    }
}

/// Temp file in the target directory, then rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).with_context(|| format!("--out: cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Prints the summary line and writes `<name>.json` / `<name>.csv` when an output
/// directory is set.
pub fn emit(report: &VerificationReport, out: Option<&Path>) -> Result<bool> {
    println!(
        "{}: {} (worst scaled slack {:e}, tol {:e}, {} rows, {:.0} ms)",
        report.name,
        if report.pass { "PASS" } else { "FAIL" },
        report.worst_slack,
        report.tolerance.tol,
        report.details.len(),
        report.runtime_ms
    );
    if let Some(dir) = out {
        write_atomic(
            &dir.join(format!("{}.json", report.name)),
            &report.to_json(),
        )?;
        write_atomic(&dir.join(format!("{}.csv", report.name)), &report.to_csv())?;
    }
    Ok(report.pass)
}
