//! Splitting averaged-vector-field time stepping.
//!
//! One step from `(u_m, v_m)`:
//!
//! 1. deterministic AVF substep, implicit in `(u_{m+1}, v̄_{m+1})`:
//!    `u_{m+1} = u_m + h (v̄_{m+1} + v_m)/2`,
//!    `v̄_{m+1} = v_m + h Λ_N u_{m+½} − h P_N ∫₀¹ f(u_m + θ(u_{m+1} − u_m)) dθ`;
//! 2. stochastic kick `v_{m+1} = v̄_{m+1} + P_N δW_m`.
//!
//! The implicit substep is solved by fixed-point iteration on the midpoint
//! `w = u_{m+½}`:
//!
//! ```text
//! w^{k+1}  = 𝕄(h)⁻¹ (u_m + h/2 v_m − h²/4 g^k)
//! u^{k+1}  = 2 w^{k+1} − u_m
//! v̄^{k+1} = v_m + h Λ_N w^{k+1} − h g^k
//! g^k      = P_N ∫₀¹ f(u_m + θ(u^k − u_m)) dθ
//! ```
//!
//! with `𝕄(h) = I − Λ_N h²/4` diagonal in the sine basis. The tamed variant
//! drops `g^k` whenever `‖u^k‖_{Ḣ¹} + ‖u_m‖_{Ḣ¹} > 1/ε`.

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{CubicPolynomial, Nonlinearity};
use crate::qwiener::IncrementSource;
use crate::spectral::{eigenvalue_table, PhaseState, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    /// Plain fixed-point iteration.
    #[default]
    Iteration1,
    /// Fixed-point iteration with the `1/ε` taming indicator.
    Iteration2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub h: f64,
    pub n: usize,
    pub horizon: f64,
    pub solver: Solver,
    pub tol: f64,
    pub max_iter: usize,
    /// Taming radius for [`Solver::Iteration2`]; `None` means `h^{1/4}`.
    pub epsilon: Option<f64>,
    /// Warn when `h² λ_N^{d/3}` exceeds this.
    pub guard_iteration1: f64,
    /// Warn when `h / ε⁴` exceeds this.
    pub guard_iteration2: f64,
}

impl SchemeConfig {
    pub const DEFAULT_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_ITER: usize = 100;

    pub fn new(h: f64, n: usize, horizon: f64) -> Self {
        Self {
            h,
            n,
            horizon,
            solver: Solver::Iteration1,
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            epsilon: None,
            guard_iteration1: 1.0,
            guard_iteration2: 1.0,
        }
    }

    pub fn with_solver(mut self, solver: Solver) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::config(msg));
        if !(self.h.is_finite() && self.h > 0.0) {
            return bad(format!("step size h must be positive, got {}", self.h));
        }
        if self.n == 0 {
            return bad("truncation N must be at least 1".into());
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if let Some(eps) = self.epsilon {
            if !(eps.is_finite() && eps > 0.0) {
                return bad(format!("epsilon must be positive, got {eps}"));
            }
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon T must be positive, got {}", self.horizon));
        }
        let steps = self.horizon / self.h;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return bad(format!("T = {} is not a multiple of h = {}", self.horizon, self.h));
        }
        Ok(())
    }

    /// Number of steps `M = T / h`.
    pub fn steps(&self) -> usize {
        (self.horizon / self.h).round() as usize
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or_else(|| self.h.powf(0.25))
    }

    /// `h² λ_N^{d/3}` with `λ_N = d π² N²` the largest retained eigenvalue.
    pub fn coupling_iteration1(&self, dim: usize) -> f64 {
        let lambda_n = std::f64::consts::PI.powi(2) * (dim * self.n * self.n) as f64;
        self.h * self.h * lambda_n.powf(dim as f64 / 3.0)
    }

    pub fn coupling_iteration2(&self) -> f64 {
        self.h / self.epsilon().powi(4)
    }

    /// Step-size couplings outside their configured bounds.
    pub fn guard_warnings(&self, dim: usize) -> Vec<String> {
        let mut out = Vec::new();
        match self.solver {
            Solver::Iteration1 => {
                let c = self.coupling_iteration1(dim);
                if c > self.guard_iteration1 * (1.0 + 1e-12) {
                    out.push(format!(
                        "h^2 lambda_N^(d/3) = {c:.3e} exceeds {} (N = {}, h = {})",
                        self.guard_iteration1, self.n, self.h
                    ));
                }
            }
            Solver::Iteration2 => {
                let c = self.coupling_iteration2();
                // The default epsilon sits exactly on the bound; ignore rounding.
                if c > self.guard_iteration2 * (1.0 + 1e-12) {
                    out.push(format!(
                        "h / epsilon^4 = {c:.3e} exceeds {} (h = {}, epsilon = {})",
                        self.guard_iteration2,
                        self.h,
                        self.epsilon()
                    ));
                }
            }
        }
        out
    }
}

/// Per-mode 2×2 matrix of `𝔹⁻¹(h)𝔸(h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CayleyFactor {
    /// `M = 1 + λh²/4`.
    pub m: f64,
    pub matrix: [[f64; 2]; 2],
}

impl CayleyFactor {
    pub fn new(lambda: f64, h: f64) -> Self {
        let m = 1.0 + lambda * h * h / 4.0;
        let diag = 2.0 / m - 1.0;
        Self {
            m,
            matrix: [[diag, h / m], [-lambda * h / m, diag]],
        }
    }

    pub fn determinant(&self) -> f64 {
        let a = self.matrix;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    #[inline]
    pub fn apply(&self, u: f64, v: f64) -> (f64, f64) {
        let a = self.matrix;
        (a[0][0] * u + a[0][1] * v, a[1][0] * u + a[1][1] * v)
    }
}

fn per_mode(
    state: &PhaseState,
    mut map: impl FnMut(f64, f64, f64) -> (f64, f64),
) -> PhaseState {
    let lambda = eigenvalue_table(state.dim(), state.n());
    let mut out = state.clone();
    Zip::from(out.u.coeffs_mut())
        .and(out.v.coeffs_mut())
        .and(&lambda)
        .for_each(|u, v, &l| {
            let (a, b) = map(l, *u, *v);
            *u = a;
            *v = b;
        });
    out
}

/// Linear part of one step, `𝔹⁻¹(h)𝔸(h) X`.
pub fn cayley_step(state: &PhaseState, h: f64) -> PhaseState {
    per_mode(state, |l, u, v| CayleyFactor::new(l, h).apply(u, v))
}

/// `𝔹⁻¹(h) X`.
pub fn cayley_half(state: &PhaseState, h: f64) -> PhaseState {
    per_mode(state, |l, u, v| {
        let m = 1.0 + l * h * h / 4.0;
        ((u + 0.5 * h * v) / m, (-0.5 * l * h * u + v) / m)
    })
}

/// Exact linear wave group `E(t)` restricted to the retained modes.
pub fn exact_group(state: &PhaseState, t: f64) -> PhaseState {
    per_mode(state, |l, u, v| {
        let w = l.sqrt();
        let (s, c) = (w * t).sin_cos();
        (c * u + s / w * v, -w * s * u + c * v)
    })
}

/// `v ← v̄ + P_N δW`; `u` is passed through untouched.
pub fn stochastic_kick(u: SpectralField, v_bar: SpectralField, increment: &SpectralField) -> Result<PhaseState> {
    let mut v = v_bar;
    let inc;
    let inc = if increment.n() == v.n() {
        increment
    } else {
        inc = increment.project(v.n())?;
        &inc
    };
    v.same_shape(inc)?;
    v.add_scaled(1.0, inc);
    PhaseState::new(u, v)
}

/// Result of the deterministic substep.
#[derive(Debug, Clone)]
pub struct DetStep {
    pub u_next: SpectralField,
    pub v_bar: SpectralField,
    pub iterations: usize,
    /// Last successive-iterate distance.
    pub residual: f64,
    /// `‖u^{k+1} − u^k‖_{L²} + ‖v̄^{k+1} − v̄^k‖_{Ḣ⁻¹}` per iteration.
    pub distances: Vec<f64>,
    /// Whether the taming indicator dropped the nonlinearity at any iterate.
    pub taming_fired: bool,
}

/// Per-step diagnostics kept by [`SplittingAvf::integrate`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepDiagnostics {
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    pub taming_fired: usize,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub samples: Vec<(usize, PhaseState)>,
    pub final_state: PhaseState,
    pub diagnostics: StepDiagnostics,
}

/// One-step map of the splitting AVF scheme at fixed `(dim, N, h)`.
#[derive(Debug, Clone)]
pub struct SplittingAvf {
    config: SchemeConfig,
    dim: usize,
    nonlinearity: Nonlinearity,
    lambda: Array2<f64>,
    m_inv: Array2<f64>,
    linear: bool,
}

impl SplittingAvf {
    pub fn new(config: SchemeConfig, poly: CubicPolynomial, dim: usize) -> Result<Self> {
        config.validate()?;
        let lambda = eigenvalue_table(dim, config.n);
        let h = config.h;
        let m_inv = lambda.mapv(|l| 1.0 / (1.0 + l * h * h / 4.0));
        Ok(Self {
            config,
            dim,
            nonlinearity: Nonlinearity::new(poly, dim, config.n)?,
            lambda,
            m_inv,
            linear: poly.is_zero(),
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_state(&self, state: &PhaseState) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: state.dim(),
            });
        }
        if state.n() != self.config.n {
            return Err(Error::TruncationMismatch {
                expected: self.config.n,
                found: state.n(),
            });
        }
        Ok(())
    }

    /// Deterministic AVF substep starting the iteration at `u^0 = u_m`.
    pub fn avf_det_step(&self, state: &PhaseState) -> Result<DetStep> {
        self.avf_det_step_from(state, &state.u)
    }

    /// Deterministic AVF substep from an arbitrary first iterate `u^0`
    /// (`v̄^0 = v_m`).
    pub fn avf_det_step_from(&self, state: &PhaseState, u_init: &SpectralField) -> Result<DetStep> {
        self.check_state(state)?;
        state.u.same_shape(u_init)?;
        let h = self.config.h;
        let quarter_h2 = 0.25 * h * h;
        let (u_m, v_m) = (&state.u, &state.v);

        let mut rhs = u_m.clone();
        rhs.add_scaled(0.5 * h, v_m);

        let tamed = self.config.solver == Solver::Iteration2;
        let radius = 1.0 / self.config.epsilon();
        let u_m_h1 = if tamed { u_m.sobolev_norm(1.0) } else { 0.0 };
        let grid_m = if self.linear {
            None
        } else {
            Some(self.nonlinearity.grid(u_m)?)
        };

        let mut u_k = u_init.clone();
        let mut v_k = v_m.clone();
        let mut distances = Vec::new();
        let mut taming_fired = false;

        for iteration in 1..=self.config.max_iter {
            let g = match &grid_m {
                None => None,
                Some(gm) => {
                    if tamed && u_k.sobolev_norm(1.0) + u_m_h1 > radius {
                        taming_fired = true;
                        None
                    } else {
                        let gk = self.nonlinearity.grid(&u_k)?;
                        Some(self.nonlinearity.galerkin_avf_grids(gm, &gk)?)
                    }
                }
            };

            let mut w = rhs.clone();
            if let Some(g) = &g {
                w.add_scaled(-quarter_h2, g);
            }
            Zip::from(w.coeffs_mut())
                .and(&self.m_inv)
                .for_each(|x, &mi| *x *= mi);

            let mut u_next = w.scaled(2.0);
            u_next.add_scaled(-1.0, u_m);

            let mut v_next = v_m.clone();
            Zip::from(v_next.coeffs_mut())
                .and(w.coeffs())
                .and(&self.lambda)
                .for_each(|v, &wi, &l| *v -= h * l * wi);
            if let Some(g) = &g {
                v_next.add_scaled(-h, g);
            }

            let d = (&u_next - &u_k).l2_norm() + (&v_next - &v_k).sobolev_norm(-1.0);
            distances.push(d);
            u_k = u_next;
            v_k = v_next;

            if !d.is_finite() {
                break;
            }
            if self.linear || d < self.config.tol {
                return Ok(DetStep {
                    u_next: u_k,
                    v_bar: v_k,
                    iterations: iteration,
                    residual: d,
                    distances,
                    taming_fired,
                });
            }
        }
        Err(Error::NonConvergence {
            iterations: distances.len(),
            residual: distances.last().copied().unwrap_or(f64::NAN),
        })
    }

    /// Full splitting step: AVF substep followed by the noise kick.
    pub fn step(&self, state: &PhaseState, increment: &SpectralField) -> Result<(PhaseState, DetStep)> {
        let det = self.avf_det_step(state)?;
        let next = stochastic_kick(det.u_next.clone(), det.v_bar.clone(), increment)?;
        Ok((next, det))
    }

    /// Runs `M = T/h` steps, calling `observer(m, X_m)` for `m = 0..=M`.
    pub fn integrate_with(
        &self,
        x0: &PhaseState,
        noise: &dyn IncrementSource,
        observer: &mut dyn FnMut(usize, &PhaseState) -> Result<()>,
    ) -> Result<(PhaseState, StepDiagnostics)> {
        self.check_state(x0)?;
        let steps = self.config.steps();
        let h = self.config.h;
        let mut diag = StepDiagnostics::default();
        let mut state = x0.clone();
        observer(0, &state)?;
        for m in 0..steps {
            let wrap = |e: Error| Error::Step {
                step: m,
                source: Box::new(e),
            };
            let increment = noise.increment(m, h).map_err(wrap)?;
            let (next, det) = self.step(&state, &increment).map_err(wrap)?;
            diag.iterations.push(det.iterations);
            diag.residuals.push(det.residual);
            diag.taming_fired += usize::from(det.taming_fired);
            state = next;
            observer(m + 1, &state)?;
        }
        Ok((state, diag))
    }

    /// Runs the trajectory and keeps the states at `sample_steps`.
    pub fn integrate(
        &self,
        x0: &PhaseState,
        noise: &dyn IncrementSource,
        sample_steps: &[usize],
    ) -> Result<TrajectoryRecord> {
        let mut samples = Vec::with_capacity(sample_steps.len());
        let (final_state, diagnostics) = self.integrate_with(x0, noise, &mut |m, s| {
            if sample_steps.contains(&m) {
                samples.push((m, s.clone()));
            }
            Ok(())
        })?;
        Ok(TrajectoryRecord {
            samples,
            final_state,
            diagnostics,
        })
    }
}
