//! Config-driven runner for `oneparticle` scenarios.

pub mod build;
pub mod config;
pub mod error;
pub mod run;
pub mod svg;

pub use config::{ScenarioConfig, ScenarioKind};
pub use error::CliError;
pub use run::{run, Artifacts, RunOptions};

use std::path::{Path, PathBuf};

/// Writes `<dir>/<scenario>.csv` and, when present, `<dir>/<scenario>.svg`.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let stem = artifacts.scenario.name();
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv, &artifacts.csv)?;
    let mut written = vec![csv];
    if let Some(svg) = &artifacts.svg {
        let path = dir.join(format!("{stem}.svg"));
        std::fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}
