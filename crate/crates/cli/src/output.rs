//! Files written by `solve`, `validate` and `reproduce`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::pipeline::{BoundReport, Solution, SolveOutput, Validation};

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable value");
    s.push('\n');
    s
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

pub fn write_bound(dir: &Path, bound: &BoundReport) -> CliResult<Vec<PathBuf>> {
    ensure_dir(dir)?;
    Ok(vec![write(dir, "bound.json", &json(bound))?])
}

/// `certificate.json`, `metadata.json`, `curve.csv`, `solution.csv` and, for
/// the Nyström solver, `nodes.csv`.
pub fn write_solution(dir: &Path, solved: &SolveOutput) -> CliResult<Vec<PathBuf>> {
    let mut files = write_bound(dir, &solved.bound)?;
    files.push(write(dir, "certificate.json", &json(&solved.certificate))?);
    files.push(write(dir, "metadata.json", &json(&solved.metadata()))?);
    files.push(write(dir, "curve.csv", &solved.curve_csv())?);
    files.push(write(dir, "solution.csv", &solved.solution_csv())?);
    if let Solution::Fredholm { function, .. } = &solved.solution {
        files.push(write(dir, "nodes.csv", &function.nodes_csv())?);
    }
    Ok(files)
}

/// `validation.csv` and `validation.json`.
pub fn write_validation(dir: &Path, validation: &Validation) -> CliResult<Vec<PathBuf>> {
    ensure_dir(dir)?;
    Ok(vec![
        write(dir, "validation.csv", &validation.to_csv())?,
        write(dir, "validation.json", &json(validation))?,
    ])
}
