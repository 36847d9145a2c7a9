use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{SchemeConfig, Solver};
use crate::nonlinearity::{CubicPolynomial, Potential};
use crate::qwiener::NoiseSpectrum;
use crate::spectral::{ModeIndex, PhaseState, SpectralField};

/// Full study configuration, read from TOML (`[model]`, `[noise]`,
/// `[scheme]`, `[mc]`, `[output]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dim: usize,
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default = "one")]
    pub c3: f64,
    /// Lyapunov shift `C₁`; defaults to the smallest value making `V₁ ≥ 0`.
    #[serde(default)]
    pub c1_shift: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "InitialData::zero")]
    pub u0: InitialData,
    #[serde(default = "InitialData::zero")]
    pub v0: InitialData,
}

fn one() -> f64 {
    1.0
}

/// Initial datum, projected onto the retained modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialData {
    /// Constant function (projected in closed form).
    Constant(f64),
    /// Explicit sine coefficients.
    Modes(Vec<ModeAmplitude>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeAmplitude {
    pub k: usize,
    #[serde(default)]
    pub l: Option<usize>,
    pub amplitude: f64,
}

impl InitialData {
    fn zero() -> Self {
        InitialData::Constant(0.0)
    }

    pub fn project(&self, dim: usize, n: usize) -> Result<SpectralField> {
        match self {
            InitialData::Constant(c) => SpectralField::constant(dim, n, *c),
            InitialData::Modes(modes) => {
                let mut f = SpectralField::zeros(dim, n)?;
                for m in modes {
                    let mode = match (dim, m.l) {
                        (1, None) => ModeIndex::One(m.k),
                        (2, Some(l)) => ModeIndex::Two(m.k, l),
                        _ => {
                            return Err(Error::config(format!(
                                "initial mode {m:?} does not match dim = {dim}"
                            )))
                        }
                    };
                    if m.k == 0 || mode.max_component() == 0 {
                        return Err(Error::config("mode indices start at 1"));
                    }
                    // Modes beyond the truncation are dropped by P_N.
                    if mode.max_component() <= n {
                        f.set(mode, f.get(mode)? + m.amplitude)?;
                    }
                }
                Ok(f)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    Zero,
    Power1d,
    #[default]
    Power2d,
    /// Spectrum file on disk.
    File,
    /// Spectrum-file text stored inline (used in manifests).
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub family: NoiseFamily,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub table: Option<String>,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Cap on materialized finest-level paths (temporal studies).
    #[serde(default = "default_max_path_bytes")]
    pub max_path_bytes: u64,
}

fn default_max_path_bytes() -> u64 {
    1 << 30
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            family: NoiseFamily::Power2d,
            p: Some(3.0),
            path: None,
            table: None,
            beta: None,
            max_path_bytes: default_max_path_bytes(),
        }
    }
}

impl NoiseConfig {
    pub fn spectrum(&self, dim: usize) -> Result<NoiseSpectrum> {
        let p = || {
            self.p
                .ok_or_else(|| Error::config("noise.p is required for power-law spectra"))
        };
        let s = match self.family {
            NoiseFamily::Zero => NoiseSpectrum::zero(dim)?,
            NoiseFamily::Power1d => NoiseSpectrum::power1d(p()?)?,
            NoiseFamily::Power2d => NoiseSpectrum::power2d(p()?)?,
            NoiseFamily::File => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::config("noise.path is required for family = \"file\""))?;
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                NoiseSpectrum::parse_table(&text)?
            }
            NoiseFamily::Table => {
                let text = self
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::config("noise.table is required for family = \"table\""))?;
                NoiseSpectrum::parse_table(text)?
            }
        };
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        Ok(match self.beta {
            Some(b) => s.with_beta(b),
            None => s,
        })
    }

    /// Replaces a file reference by its contents so the config is
    /// self-contained.
    pub fn inlined(&self) -> Result<Self> {
        let mut out = self.clone();
        if self.family == NoiseFamily::File {
            let path = self
                .path
                .as_ref()
                .ok_or_else(|| Error::config("noise.path is required for family = \"file\""))?;
            out.table = Some(std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?);
            out.family = NoiseFamily::Table;
            out.path = None;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub h_list: Option<Vec<f64>>,
    #[serde(default)]
    pub h_ref: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub n_ref: Option<usize>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "one")]
    pub guard_iteration1: f64,
    #[serde(default = "one")]
    pub guard_iteration2: f64,
    /// `p` of the reported `(E‖e‖^p)^{1/p}` error statistic; 1 is the plain
    /// Monte Carlo mean.
    #[serde(default = "default_error_moment")]
    pub error_moment: u32,
}

fn default_tol() -> f64 {
    SchemeConfig::DEFAULT_TOL
}

fn default_max_iter() -> usize {
    SchemeConfig::DEFAULT_MAX_ITER
}

fn default_error_moment() -> u32 {
    1
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            h: None,
            h_list: None,
            h_ref: None,
            n: None,
            n_list: None,
            n_ref: None,
            solver: Solver::Iteration1,
            tol: default_tol(),
            max_iter: default_max_iter(),
            epsilon: None,
            guard_iteration1: 1.0,
            guard_iteration2: 1.0,
            error_moment: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Weights `c` of the exponential-moment study.
    #[serde(default = "default_exp_c")]
    pub exp_c: Vec<f64>,
    /// Horizons of the exponential-moment study; empty means `[T]`.
    #[serde(default)]
    pub exp_horizons: Vec<f64>,
}

fn default_trajectories() -> usize {
    1
}

fn default_workers() -> usize {
    1
}

fn default_exp_c() -> Vec<f64> {
    vec![1.0]
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trajectories: default_trajectories(),
            seed: 0,
            workers: default_workers(),
            exp_c: default_exp_c(),
            exp_horizons: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Times at which states are compared/recorded; must be multiples of
    /// every step size in use.
    #[serde(default)]
    pub sample_times: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    /// The reference model: `dv = Δu dt − u³ dt + dW` on the unit square,
    /// `u(0) = 0`, `v(0) = 1`, `η_{k,l} = 1/(k³ + l³)`, `T = 1`, with
    /// desk-scale discretization defaults.
    pub fn reference_model() -> Self {
        Self {
            model: ModelConfig {
                dim: 2,
                c0: 0.0,
                c1: 0.0,
                c2: 0.0,
                c3: 1.0,
                c1_shift: None,
                horizon: 1.0,
                u0: InitialData::Constant(0.0),
                v0: InitialData::Constant(1.0),
            },
            noise: NoiseConfig::default(),
            scheme: SchemeSection {
                h: Some(1.0 / 64.0),
                n: Some(16),
                h_list: Some(vec![0.25, 0.125, 0.0625, 0.03125, 0.015625]),
                h_ref: Some(1.0 / 512.0),
                n_list: Some(vec![8, 16, 32]),
                n_ref: Some(64),
                ..SchemeSection::default()
            },
            mc: McConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Structural checks that do not depend on the study being run.
    pub fn validate(&self) -> Result<()> {
        crate::spectral::check_dim(self.model.dim)?;
        self.poly()?;
        if !(self.model.horizon.is_finite() && self.model.horizon > 0.0) {
            return Err(Error::config("model.T must be positive"));
        }
        if self.mc.trajectories == 0 {
            return Err(Error::config("mc.trajectories must be at least 1"));
        }
        if self.mc.workers == 0 {
            return Err(Error::config("mc.workers must be at least 1"));
        }
        if !(1..=8).contains(&self.scheme.error_moment) {
            return Err(Error::config("scheme.error_moment must be in 1..=8"));
        }
        if self.noise.family != NoiseFamily::File {
            self.noise.spectrum(self.model.dim)?;
        }
        Ok(())
    }

    pub fn poly(&self) -> Result<CubicPolynomial> {
        let m = &self.model;
        CubicPolynomial::new(m.c0, m.c1, m.c2, m.c3)
    }

    pub fn potential(&self) -> Result<Potential> {
        let poly = self.poly()?;
        match self.model.c1_shift {
            Some(c) => Potential::with_shift(poly, c),
            None => Potential::new(poly),
        }
    }

    pub fn spectrum(&self) -> Result<NoiseSpectrum> {
        self.noise.spectrum(self.model.dim)
    }

    pub fn initial_state(&self, n: usize) -> Result<PhaseState> {
        let dim = self.model.dim;
        PhaseState::new(self.model.u0.project(dim, n)?, self.model.v0.project(dim, n)?)
    }

    pub fn scheme_config(&self, h: f64, n: usize) -> Result<SchemeConfig> {
        let s = &self.scheme;
        let cfg = SchemeConfig {
            h,
            n,
            horizon: self.model.horizon,
            solver: s.solver,
            tol: s.tol,
            max_iter: s.max_iter,
            epsilon: s.epsilon,
            guard_iteration1: s.guard_iteration1,
            guard_iteration2: s.guard_iteration2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn require_h(&self) -> Result<f64> {
        self.scheme
            .h
            .ok_or_else(|| Error::config("scheme.h is required for this study"))
    }

    pub fn require_n(&self) -> Result<usize> {
        self.scheme
            .n
            .ok_or_else(|| Error::config("scheme.n is required for this study"))
    }

    /// Number of dyadic halvings of `T` giving `h`, if any.
    pub fn dyadic_level(&self, h: f64) -> Result<u32> {
        let ratio = self.model.horizon / h;
        let level = ratio.log2().round();
        if !(h > 0.0) || !(0.0..=40.0).contains(&level) || (ratio - level.exp2()).abs() > 1e-9 * ratio {
            return Err(Error::config(format!(
                "h = {h} is not T / 2^l for T = {}",
                self.model.horizon
            )));
        }
        Ok(level as u32)
    }

    /// Sample steps at step size `h`: configured times, or `default`
    /// evenly spaced fractions of `T` when `None` (every step if `default`
    /// is 0).
    pub fn sample_steps(&self, h: f64, default: usize) -> Result<Vec<usize>> {
        let total = (self.model.horizon / h).round() as usize;
        match &self.output.sample_times {
            Some(times) => times
                .iter()
                .map(|&t| {
                    let m = t / h;
                    if !(0.0..=total as f64 + 1e-9).contains(&m) || (m - m.round()).abs() > 1e-9 * m.max(1.0) {
                        Err(Error::config(format!("sample time {t} is not a multiple of h = {h} in [0, T]")))
                    } else {
                        Ok(m.round() as usize)
                    }
                })
                .collect(),
            None if default == 0 => Ok((0..=total).collect()),
            None => {
                if total % default != 0 {
                    return Err(Error::config(format!(
                        "T/h = {total} steps do not split into {default} sample intervals"
                    )));
                }
                Ok((1..=default).map(|i| i * total / default).collect())
            }
        }
    }

    /// CLI-style overrides.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        trajectories: Option<usize>,
        workers: Option<usize>,
        out: Option<PathBuf>,
    ) {
        if let Some(s) = seed {
            self.mc.seed = s;
        }
        if let Some(t) = trajectories {
            self.mc.trajectories = t;
        }
        if let Some(w) = workers {
            self.mc.workers = w;
        }
        if let Some(o) = out {
            self.output.dir = Some(o);
        }
    }
}
