use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::studies;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Simulate,
    EnergyStudy,
    ConvergeSpace,
    ConvergeTime,
    ExpMoment,
}

impl StudyKind {
    pub fn csv_name(self) -> &'static str {
        match self {
            StudyKind::Simulate => "simulate.csv",
            StudyKind::EnergyStudy => "energy.csv",
            StudyKind::ConvergeSpace => "converge_space.csv",
            StudyKind::ConvergeTime => "converge_time.csv",
            StudyKind::ExpMoment => "exp_moment.csv",
        }
    }
}

/// Everything needed to reproduce a run: the resolved configuration (noise
/// files inlined), the code version and the derived quantities.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub study: StudyKind,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
    pub derived: serde_json::Value,
}

impl RunManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub csv: String,
    pub manifest: RunManifest,
}

impl StudyOutput {
    /// Writes the CSV and `manifest.json` into `dir`, returning both paths.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv = dir.join(self.manifest.study.csv_name());
        std::fs::write(&csv, &self.csv).map_err(|e| Error::io(&csv, e))?;
        let man = dir.join("manifest.json");
        std::fs::write(&man, self.manifest.to_json()?).map_err(|e| Error::io(&man, e))?;
        Ok((csv, man))
    }
}

pub fn run_study(kind: StudyKind, cfg: &ExperimentConfig) -> Result<StudyOutput> {
    let mut resolved = cfg.clone();
    resolved.noise = cfg.noise.inlined()?;
    let (csv, derived, warnings) = match kind {
        StudyKind::Simulate => {
            let s = studies::simulate(&resolved)?;
            (s.to_csv(), serde_json::to_value(&s)?, s.warnings)
        }
        StudyKind::EnergyStudy => {
            let s = studies::energy_study(&resolved)?;
            (s.to_csv(), serde_json::to_value(&s)?, s.warnings)
        }
        StudyKind::ConvergeSpace => {
            let s = studies::spatial_convergence(&resolved)?;
            (s.to_csv(), serde_json::to_value(&s)?, s.warnings)
        }
        StudyKind::ConvergeTime => {
            let s = studies::temporal_convergence(&resolved)?;
            (s.to_csv(), serde_json::to_value(&s)?, s.warnings)
        }
        StudyKind::ExpMoment => {
            let s = studies::exp_moment_study(&resolved)?;
            (s.to_csv(), serde_json::to_value(&s)?, s.warnings)
        }
    };
    Ok(StudyOutput {
        csv,
        manifest: RunManifest {
            study: kind,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config: resolved,
            warnings,
            derived,
        },
    })
}

/// Re-runs the study recorded in `manifest`, optionally with a different
/// worker count (which does not change the results).
pub fn rerun(manifest: &RunManifest, workers: Option<usize>) -> Result<StudyOutput> {
    let mut cfg = manifest.config.clone();
    if let Some(w) = workers {
        cfg.mc.workers = w;
    }
    run_study(manifest.study, &cfg)
}
