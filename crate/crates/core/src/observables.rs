//! Energies, Lebesgue norms, the phase-space error metric and the
//! exponential-moment statistic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{Nonlinearity, Potential};
use crate::spectral::{PhaseState, SineTransform, SpectralField};

/// Lyapunov energy `V₁ = ½‖u‖²_{Ḣ¹} + ½‖v‖²_{L²} + F(u) + C₁` and its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub v1: f64,
    pub kinetic: f64,
    pub elastic: f64,
    /// `F(u) + C₁`.
    pub potential: f64,
}

/// Quadrature context for one `(dim, N)`.
#[derive(Debug, Clone)]
pub struct Observables {
    potential: Potential,
    nonlinearity: Nonlinearity,
    /// `G₆ = 8N`, alias-free for sixth powers.
    fine: SineTransform,
}

impl Observables {
    pub fn new(potential: Potential, dim: usize, n: usize) -> Result<Self> {
        Ok(Self {
            potential,
            nonlinearity: Nonlinearity::new(potential.poly, dim, n)?,
            fine: SineTransform::new(dim, n, 8 * n)?,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn energy_v1(&self, state: &PhaseState, t: f64) -> Result<EnergyRecord> {
        let kinetic = 0.5 * state.v.sobolev_norm_sq(0.0);
        let elastic = 0.5 * state.u.sobolev_norm_sq(1.0);
        let potential =
            self.nonlinearity.potential_integral(&state.u)? + self.potential.c1_shift;
        Ok(EnergyRecord {
            t,
            v1: kinetic + elastic + potential,
            kinetic,
            elastic,
            potential,
        })
    }

    /// `‖u‖_{L^p}` for `p ∈ {2, 4, 6, ∞}`. `p = ∞` is the maximum over the
    /// `8N` grid nodes, a lower bound of the true supremum.
    pub fn lp_norm(&self, field: &SpectralField, p: f64) -> Result<f64> {
        if p == 2.0 {
            return Ok(field.l2_norm());
        }
        if p == 4.0 {
            let t = self.nonlinearity.transform();
            let grid = t.synthesize(field)?;
            let s = grid.fold(0.0, |acc, &x| acc + (x * x) * (x * x));
            return Ok((s * t.cell_volume()).powf(0.25));
        }
        if p == 6.0 {
            let grid = self.fine.synthesize(field)?;
            let s = grid.fold(0.0, |acc, &x| acc + (x * x * x).powi(2));
            return Ok((s * self.fine.cell_volume()).powf(1.0 / 6.0));
        }
        if p == f64::INFINITY {
            let grid = self.fine.synthesize(field)?;
            return Ok(grid.fold(0.0f64, |acc, &x| acc.max(x.abs())));
        }
        Err(Error::UnsupportedExponent(p))
    }
}

/// `‖u‖_{L^p}` with transforms built for the field's own truncation.
pub fn lp_norm(field: &SpectralField, p: f64) -> Result<f64> {
    Observables::new(Potential::zero(), field.dim(), field.n())?.lp_norm(field, p)
}

/// `(‖u_a − u_b‖²_{L²} + ‖v_a − v_b‖²_{Ḣ⁻¹})^{1/2}`. States with different
/// truncations are compared as functions: the coarser one is zero-padded.
pub fn theorem_error(a: &PhaseState, b: &PhaseState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let n = a.n().max(b.n());
    let pa;
    let pb;
    let (a, b) = if a.n() == b.n() {
        (a, b)
    } else {
        pa = a.project(n)?;
        pb = b.project(n)?;
        (&pa, &pb)
    };
    let du = &a.u - &b.u;
    let dv = &a.v - &b.v;
    Ok((du.sobolev_norm_sq(0.0) + dv.sobolev_norm_sq(-1.0)).sqrt())
}

/// Monte Carlo estimate of `E exp(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub samples: usize,
    /// `log` of the sample mean; finite even when `estimate` overflows.
    pub log_mean: f64,
    pub estimate: f64,
    pub stderr: f64,
}

/// Sample mean and standard error of `exp(c h Σᵢ ‖uᵢ‖²_{L⁶})` across
/// trajectories, given the per-trajectory sums. The exponentials are scaled
/// by the largest exponent before summation.
pub fn exp_moment(sums: &[f64], c: f64, h: f64) -> Result<MomentEstimate> {
    if sums.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::config(format!("exponent weight c must be >= 0, got {c}")));
    }
    let n = sums.len();
    let xs: Vec<f64> = sums.iter().map(|s| c * h * s).collect();
    let shift = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::config("non-finite exponent in moment sample"));
    }
    let scaled: Vec<f64> = xs.iter().map(|x| (x - shift).exp()).collect();
    let mean_scaled = scaled.iter().sum::<f64>() / n as f64;
    let var_scaled = if n > 1 {
        scaled.iter().map(|s| (s - mean_scaled).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let log_mean = shift + mean_scaled.ln();
    let scale = shift.exp();
    Ok(MomentEstimate {
        samples: n,
        log_mean,
        estimate: log_mean.exp(),
        stderr: scale * (var_scaled / n as f64).sqrt(),
    })
}
