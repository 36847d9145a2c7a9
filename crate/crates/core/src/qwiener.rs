//! Q-Wiener increments in the truncated sine basis.
//!
//! The covariance operator `Q` is diagonal in the sine basis with
//! eigenvalues `η_k`, so the coefficient of `e_k` in an increment over a
//! step of length `h` is `N(0, η_k h)`, independently across modes and
//! steps.
//!
//! # Reproducibility
//!
//! Every draw is a pure function of `(seed, trajectory, fine step, mode)`:
//!
//! * the ChaCha8 key is `seed.to_le_bytes() ‖ trajectory.to_le_bytes() ‖
//!   b"stochwave-qwiener"[..16]`;
//! * the ChaCha stream id is the fine step index;
//! * modes are enumerated in square shells (`max(k, l) = 1, 2, …`), so the
//!   modes retained at truncation `N` are always the first `N^d` entries and
//!   runs at different `N` see the same Brownian coefficients;
//! * normals are Box–Muller pairs: two consecutive `u64` words give
//!   `u₁ = (w₁ >> 11 + 1)·2⁻⁵³ ∈ (0, 1]`, `u₂ = (w₂ >> 11)·2⁻⁵³`, and
//!   `ρ = √(−2 ln u₁)`; mode `2i` takes `ρ cos 2πu₂`, mode `2i + 1` takes
//!   `ρ sin 2πu₂`.
//!
//! Coarse increments are built by pairwise summation over the dyadic tree,
//! so a level-`ℓ` increment is bit-for-bit the sum of its two level-`ℓ+1`
//! children.

use std::f64::consts::PI;

use ndarray::Array2;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{check_dim, ModeIndex, SpectralField};

const KEY_TAG: &[u8; 16] = b"stochwave-qwiene";

/// Per-mode variances of the noise covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum SpectrumFamily {
    Zero,
    /// `η_k = k^{-p}`.
    Power1d { p: f64 },
    /// `η_{k,l} = 1 / (k^p + l^p)`.
    Power2d { p: f64 },
    /// Explicit table; unlisted modes have zero variance.
    Table { entries: Vec<(ModeIndex, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpectrum {
    dim: usize,
    family: SpectrumFamily,
    /// User-supplied regularity tag (largest β with `Σ λ^{β-1} η < ∞`).
    beta: Option<f64>,
}

impl NoiseSpectrum {
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            family: SpectrumFamily::Zero,
            beta: None,
        })
    }

    pub fn power1d(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::config(format!("power1d exponent must be positive, got {p}")));
        }
        Ok(Self {
            dim: 1,
            family: SpectrumFamily::Power1d { p },
            beta: None,
        })
    }

    pub fn power2d(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::config(format!("power2d exponent must be positive, got {p}")));
        }
        Ok(Self {
            dim: 2,
            family: SpectrumFamily::Power2d { p },
            beta: None,
        })
    }

    pub fn from_table(dim: usize, mut entries: Vec<(ModeIndex, f64)>) -> Result<Self> {
        check_dim(dim)?;
        for (mode, eta) in &entries {
            if mode.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: mode.dim(),
                });
            }
            if !(eta.is_finite() && *eta >= 0.0) {
                return Err(Error::config(format!("variance for {mode:?} must be finite and >= 0")));
            }
        }
        entries.sort_by_key(|(m, _)| sort_key(*m));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::config("duplicate mode in spectrum table"));
        }
        Ok(Self {
            dim,
            family: SpectrumFamily::Table { entries },
            beta: None,
        })
    }

    /// Parses the plain-text spectrum format: one mode per line,
    /// `k eta` (d = 1) or `k l eta` (d = 2). Blank lines and `#` comments are
    /// ignored; the dimension is taken from the first data line.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::SpectrumParse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let this_dim = match tokens.len() {
                2 => 1,
                3 => 2,
                n => return Err(err(format!("expected 2 or 3 fields, found {n}"))),
            };
            if *dim.get_or_insert(this_dim) != this_dim {
                return Err(err("mixed 1D and 2D entries".into()));
            }
            let index = |tok: &str| -> Result<usize> {
                match tok.parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k),
                    _ => Err(err(format!("mode index `{tok}` must be an integer >= 1"))),
                }
            };
            let eta_tok = tokens[tokens.len() - 1];
            let eta: f64 = eta_tok
                .parse()
                .map_err(|_| err(format!("variance `{eta_tok}` is not a number")))?;
            if !(eta.is_finite() && eta >= 0.0) {
                return Err(err(format!("variance {eta} must be finite and non-negative")));
            }
            let mode = if this_dim == 1 {
                ModeIndex::One(index(tokens[0])?)
            } else {
                ModeIndex::Two(index(tokens[0])?, index(tokens[1])?)
            };
            entries.push((mode, eta));
        }
        let dim = dim.ok_or(Error::SpectrumParse {
            line: 0,
            msg: "no entries".into(),
        })?;
        Self::from_table(dim, entries).map_err(|e| Error::SpectrumParse {
            line: 0,
            msg: e.to_string(),
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn family(&self) -> &SpectrumFamily {
        &self.family
    }

    pub fn is_zero(&self) -> bool {
        match &self.family {
            SpectrumFamily::Zero => true,
            SpectrumFamily::Table { entries } => entries.iter().all(|(_, e)| *e == 0.0),
            _ => false,
        }
    }

    /// `η` for one mode; zero outside the spectrum's dimension.
    pub fn eta(&self, mode: ModeIndex) -> f64 {
        match (&self.family, mode) {
            (SpectrumFamily::Zero, _) => 0.0,
            (SpectrumFamily::Power1d { p }, ModeIndex::One(k)) => (k as f64).powf(-p),
            (SpectrumFamily::Power2d { p }, ModeIndex::Two(k, l)) => {
                1.0 / ((k as f64).powf(*p) + (l as f64).powf(*p))
            }
            (SpectrumFamily::Table { entries }, m) => entries
                .binary_search_by_key(&sort_key(m), |(e, _)| sort_key(*e))
                .map(|i| entries[i].1)
                .unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Variances laid out like the coefficients of a `(dim, n)` field.
    pub fn eta_table(&self, n: usize) -> Array2<f64> {
        let rows = if self.dim == 1 { 1 } else { n };
        Array2::from_shape_fn((rows, n), |(i, j)| {
            if self.dim == 1 {
                self.eta(ModeIndex::One(j + 1))
            } else {
                self.eta(ModeIndex::Two(i + 1, j + 1))
            }
        })
    }
}

fn sort_key(m: ModeIndex) -> (usize, usize) {
    match m {
        ModeIndex::One(k) => (k, 0),
        ModeIndex::Two(k, l) => (k, l),
    }
}

/// `Tr((P_N Q^{1/2})(P_N Q^{1/2})*) = Σ_{modes ≤ N} η`.
pub fn trace_truncated(spectrum: &NoiseSpectrum, n: usize) -> f64 {
    spectrum.eta_table(n).sum()
}

/// Storage slots of the first `n^d` modes in shell order.
fn shell_order(dim: usize, n: usize) -> Vec<(usize, usize)> {
    if dim == 1 {
        return (0..n).map(|k| (0, k)).collect();
    }
    let mut order = Vec::with_capacity(n * n);
    for s in 1..=n {
        for l in 1..=s {
            order.push((s - 1, l - 1));
        }
        for k in 1..s {
            order.push((k - 1, s - 1));
        }
    }
    order
}

#[inline]
fn unit_open_closed(w: u64) -> f64 {
    ((w >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

#[inline]
fn unit_closed_open(w: u64) -> f64 {
    (w >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Fills `out` with standard normals from the current stream position.
fn fill_normals(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for pair in out.chunks_mut(2) {
        let u1 = unit_open_closed(rng.next_u64());
        let u2 = unit_closed_open(rng.next_u64());
        let rho = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        pair[0] = rho * c;
        if pair.len() > 1 {
            pair[1] = rho * s;
        }
    }
}

/// Anything that can hand the integrator the increment of step `m`.
pub trait IncrementSource {
    fn dim(&self) -> usize;
    fn n(&self) -> usize;
    fn increment(&self, step: usize, h: f64) -> Result<SpectralField>;
}

/// Deterministic, dyadically refinable source of Q-Wiener increments for
/// one trajectory.
#[derive(Debug, Clone)]
pub struct PathGenerator {
    seed: u64,
    trajectory: u64,
    spectrum: NoiseSpectrum,
    n: usize,
    finest_level: u32,
    horizon: f64,
    /// `√(η h_fine)` in coefficient layout.
    fine_std: Array2<f64>,
    order: Vec<(usize, usize)>,
    zero: bool,
}

impl PathGenerator {
    pub fn new(
        seed: u64,
        trajectory: u64,
        spectrum: NoiseSpectrum,
        n: usize,
        finest_level: u32,
        horizon: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("truncation N must be at least 1"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::config(format!("horizon must be positive, got {horizon}")));
        }
        if finest_level > 40 {
            return Err(Error::LevelOutOfRange {
                level: finest_level,
                finest: 40,
            });
        }
        let h_fine = horizon / (1u64 << finest_level) as f64;
        let fine_std = spectrum.eta_table(n).mapv(|eta| (eta * h_fine).sqrt());
        let zero = fine_std.iter().all(|&s| s == 0.0);
        Ok(Self {
            seed,
            trajectory,
            n,
            finest_level,
            horizon,
            fine_std,
            order: shell_order(spectrum.dim(), n),
            zero,
            spectrum,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trajectory(&self) -> u64 {
        self.trajectory
    }

    pub fn spectrum(&self) -> &NoiseSpectrum {
        &self.spectrum
    }

    pub fn finest_level(&self) -> u32 {
        self.finest_level
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step_size(&self, level: u32) -> f64 {
        self.horizon / (1u64 << level) as f64
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.trajectory.to_le_bytes());
        key[16..].copy_from_slice(KEY_TAG);
        key
    }

    /// Increment over fine step `m`, i.e. `[m h_fine, (m + 1) h_fine]`.
    pub fn fine_increment(&self, m: u64) -> Result<SpectralField> {
        let steps = 1u64 << self.finest_level;
        if m >= steps {
            return Err(Error::config(format!("fine step {m} beyond {steps} steps")));
        }
        let mut field = SpectralField::zeros(self.spectrum.dim(), self.n)?;
        if self.zero {
            return Ok(field);
        }
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(m);
        rng.set_word_pos(0);
        let mut z = vec![0.0; self.order.len()];
        fill_normals(&mut rng, &mut z);
        let coeffs = field.coeffs_mut();
        for (&slot, zi) in self.order.iter().zip(&z) {
            coeffs[slot] = self.fine_std[slot] * zi;
        }
        Ok(field)
    }

    /// Level whose step size equals `h`.
    pub fn level_of(&self, h: f64) -> Result<u32> {
        let misaligned = || Error::MisalignedStep {
            h,
            finest: self.step_size(self.finest_level),
        };
        if !(h.is_finite() && h > 0.0) {
            return Err(misaligned());
        }
        let ratio = self.horizon / h;
        let level = ratio.log2().round();
        if !(0.0..=self.finest_level as f64).contains(&level) {
            return Err(misaligned());
        }
        let level = level as u32;
        if (self.step_size(level) - h).abs() > 1e-12 * h {
            return Err(misaligned());
        }
        Ok(level)
    }

    fn tree_sum(&self, level: u32, index: u64) -> Result<SpectralField> {
        if level == self.finest_level {
            return self.fine_increment(index);
        }
        let mut left = self.tree_sum(level + 1, 2 * index)?;
        let right = self.tree_sum(level + 1, 2 * index + 1)?;
        left.add_scaled(1.0, &right);
        Ok(left)
    }

    /// Increment of step `m` at step size `h`, where `h = T / 2^ℓ` for some
    /// `ℓ ≤ L`. Coarse increments are tree sums of fine ones.
    pub fn sample_increment(&self, m: usize, h: f64) -> Result<SpectralField> {
        let level = self.level_of(h)?;
        let steps = 1u64 << level;
        if m as u64 >= steps {
            return Err(Error::config(format!("step {m} beyond {steps} steps at h = {h}")));
        }
        self.tree_sum(level, m as u64)
    }

    /// Materializes the increments at `level`, generated at the finest level
    /// and summed pairwise. `max_bytes` caps the finest-level buffer.
    pub fn aggregate(&self, level: u32, max_bytes: u64) -> Result<IncrementStream> {
        if level > self.finest_level {
            return Err(Error::LevelOutOfRange {
                level,
                finest: self.finest_level,
            });
        }
        let steps = 1u64 << self.finest_level;
        let needed = steps * self.fine_std.len() as u64 * 8;
        if needed > max_bytes {
            return Err(Error::PathTooLarge {
                needed,
                cap: max_bytes,
            });
        }
        let increments = (0..steps)
            .map(|m| self.fine_increment(m))
            .collect::<Result<Vec<_>>>()?;
        let fine = IncrementStream {
            level: self.finest_level,
            h: self.step_size(self.finest_level),
            increments,
        };
        fine.coarsen(level)
    }
}

impl IncrementSource for PathGenerator {
    fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    fn n(&self) -> usize {
        self.n
    }

    fn increment(&self, step: usize, h: f64) -> Result<SpectralField> {
        self.sample_increment(step, h)
    }
}

/// Increments of one trajectory at a fixed dyadic level.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementStream {
    level: u32,
    h: f64,
    increments: Vec<SpectralField>,
}

impl IncrementStream {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn increments(&self) -> &[SpectralField] {
        &self.increments
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// Pairwise-sums down to `level`.
    pub fn coarsen(&self, level: u32) -> Result<IncrementStream> {
        if level > self.level {
            return Err(Error::LevelOutOfRange {
                level,
                finest: self.level,
            });
        }
        let mut current = self.increments.clone();
        let mut h = self.h;
        for _ in level..self.level {
            current = current
                .chunks(2)
                .map(|pair| {
                    let mut sum = pair[0].clone();
                    sum.add_scaled(1.0, &pair[1]);
                    sum
                })
                .collect();
            h *= 2.0;
        }
        Ok(IncrementStream {
            level,
            h,
            increments: current,
        })
    }
}

impl IncrementSource for IncrementStream {
    fn dim(&self) -> usize {
        self.increments.first().map_or(1, |f| f.dim())
    }

    fn n(&self) -> usize {
        self.increments.first().map_or(0, |f| f.n())
    }

    fn increment(&self, step: usize, h: f64) -> Result<SpectralField> {
        if (h - self.h).abs() > 1e-12 * self.h {
            return Err(Error::MisalignedStep { h, finest: self.h });
        }
        self.increments
            .get(step)
            .cloned()
            .ok_or_else(|| Error::config(format!("step {step} beyond stream of {}", self.len())))
    }
}

/// Source of zero increments (deterministic runs).
#[derive(Debug, Clone, Copy)]
pub struct NoNoise {
    pub dim: usize,
    pub n: usize,
}

impl IncrementSource for NoNoise {
    fn dim(&self) -> usize {
        self.dim
    }

    fn n(&self) -> usize {
        self.n
    }

    fn increment(&self, _step: usize, _h: f64) -> Result<SpectralField> {
        SpectralField::zeros(self.dim, self.n)
    }
}
