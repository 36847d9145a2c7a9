//! Cubic drift `f(u) = c₃u³ + c₂u² + c₁u + c₀`, its potential and the
//! averaged-vector-field chord average, plus their Galerkin projections.
//!
//! Nonlinear projections go through the collocation grid `G = 4N`: the cubic
//! and quartic terms of a degree-`N` sine polynomial carry wavenumbers at
//! most `4N < 2G`, so the rectangle rule reproduces the exact inner products
//! for the odd part of `f`. The constant `c₀` is projected in closed form.

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SineTransform, SpectralField};

/// Volume of the unit interval / square.
pub const DOMAIN_VOLUME: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicPolynomial {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CubicPolynomial {
    pub fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let p = Self::unchecked(c0, c1, c2, c3);
        p.validate()?;
        Ok(p)
    }

    /// Skips the `c₃ > 0` check. Only meant for linear (`f ≡ 0`) runs.
    pub fn unchecked(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        Self { c0, c1, c2, c3 }
    }

    /// `f(u) = u³ − u`.
    pub fn cubic_minus_linear() -> Self {
        Self::unchecked(0.0, -1.0, 0.0, 1.0)
    }

    /// `f(u) = u³`.
    pub fn pure_cubic() -> Self {
        Self::unchecked(0.0, 0.0, 0.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.c0, self.c1, self.c2, self.c3]
            .iter()
            .all(|c| c.is_finite());
        if !finite || self.c3 <= 0.0 {
            return Err(Error::LeadingCoefficient(self.c3));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.c1 == 0.0 && self.c2 == 0.0 && self.c3 == 0.0
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        ((self.c3 * u + self.c2) * u + self.c1) * u + self.c0
    }

    /// Antiderivative density `F̃(u) = c₃u⁴/4 + c₂u³/3 + c₁u²/2 + c₀u`.
    #[inline]
    pub fn density(&self, u: f64) -> f64 {
        (((self.c3 / 4.0 * u + self.c2 / 3.0) * u + self.c1 / 2.0) * u + self.c0) * u
    }

    /// `∫₀¹ f(a + θ(b − a)) dθ` in closed form.
    #[inline]
    pub fn avf_average(&self, a: f64, b: f64) -> f64 {
        let (a2, b2, ab) = (a * a, b * b, a * b);
        self.c3 * (a + b) * (a2 + b2) / 4.0
            + self.c2 * ((a2 + b2) + ab) / 3.0
            + self.c1 * (a + b) / 2.0
            + self.c0
    }

    /// Minimum of `F̃` over the real line.
    pub fn density_min(&self) -> f64 {
        quartic_min(self.c3 / 4.0, self.c2 / 3.0, self.c1 / 2.0, self.c0)
    }
}

/// `f(u)` pointwise.
pub fn eval_f(poly: &CubicPolynomial, u: f64) -> f64 {
    poly.eval(u)
}

/// `F̃(u)` pointwise.
pub fn eval_f_density(poly: &CubicPolynomial, u: f64) -> f64 {
    poly.density(u)
}

pub fn avf_average(poly: &CubicPolynomial, a: f64, b: f64) -> f64 {
    poly.avf_average(a, b)
}

/// Real roots of `a x³ + b x² + c x + d` with `a > 0`.
fn cubic_real_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let p = |x: f64| ((a * x + b) * x + c) * x + d;
    let bound = 1.0 + [b, c, d].iter().map(|k| (k / a).abs()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * bound {
            break;
        }
    }
    let r = 0.5 * (lo + hi);
    // Deflate: a x³ + … = (x − r)(a x² + q1 x + q0).
    let q1 = b + a * r;
    let q0 = c + q1 * r;
    let mut roots = vec![r];
    let disc = q1 * q1 - 4.0 * a * q0;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let t = -0.5 * (q1 + q1.signum() * sq);
        if t != 0.0 {
            roots.push(t / a);
            roots.push(q0 / t);
        } else {
            roots.push(0.0);
        }
    }
    // Newton polish.
    let dp = |x: f64| (3.0 * a * x + 2.0 * b) * x + c;
    for x in roots.iter_mut() {
        for _ in 0..3 {
            let d = dp(*x);
            if d != 0.0 {
                *x -= p(*x) / d;
            }
        }
    }
    roots
}

/// `min_x q4 x⁴ + q3 x³ + q2 x² + q1 x` for `q4 > 0`.
fn quartic_min(q4: f64, q3: f64, q2: f64, q1: f64) -> f64 {
    let q = |x: f64| (((q4 * x + q3) * x + q2) * x + q1) * x;
    cubic_real_roots(4.0 * q4, 3.0 * q3, 2.0 * q2, q1)
        .into_iter()
        .map(q)
        .fold(0.0f64.min(q(0.0)), f64::min)
}

/// Constants of `a₁‖u‖⁴_{L⁴} − b₁ ≤ F(u) ≤ a₂‖u‖⁴_{L⁴} + b₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBounds {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl GrowthBounds {
    /// Pointwise bounds with `a₁ = c₃/8`, `a₂ = c₃/2`, integrated over the
    /// domain.
    fn of(poly: &CubicPolynomial) -> Self {
        let a1 = poly.c3 / 8.0;
        let a2 = poly.c3 / 2.0;
        // b1 = max (a1 u⁴ − F̃) = −min (F̃ − a1 u⁴)
        let lower = quartic_min(poly.c3 / 4.0 - a1, poly.c2 / 3.0, poly.c1 / 2.0, poly.c0);
        // b2 = max (F̃ − a2 u⁴) = −min (a2 u⁴ − F̃)
        let upper = quartic_min(a2 - poly.c3 / 4.0, -poly.c2 / 3.0, -poly.c1 / 2.0, -poly.c0);
        Self {
            a1,
            a2,
            b1: (-lower).max(0.0) * DOMAIN_VOLUME,
            b2: (-upper).max(0.0) * DOMAIN_VOLUME,
        }
    }
}

/// Potential functional `F(u) = ∫ F̃(u)` together with the Lyapunov shift
/// `C₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub poly: CubicPolynomial,
    pub c1_shift: f64,
    pub bounds: GrowthBounds,
}

impl Potential {
    /// Uses `C₁ = |𝒪| max(0, −min F̃)`, so `F + C₁ ≥ 0`.
    pub fn new(poly: CubicPolynomial) -> Result<Self> {
        poly.validate()?;
        let c1_shift = DOMAIN_VOLUME * (-poly.density_min()).max(0.0);
        Ok(Self {
            poly,
            c1_shift,
            bounds: GrowthBounds::of(&poly),
        })
    }

    pub fn with_shift(poly: CubicPolynomial, c1_shift: f64) -> Result<Self> {
        let mut p = Self::new(poly)?;
        p.c1_shift = c1_shift;
        Ok(p)
    }

    /// Zero potential for linear runs.
    pub fn zero() -> Self {
        Self {
            poly: CubicPolynomial::unchecked(0.0, 0.0, 0.0, 0.0),
            c1_shift: 0.0,
            bounds: GrowthBounds {
                a1: 0.0,
                a2: 0.0,
                b1: 0.0,
                b2: 0.0,
            },
        }
    }
}

/// Galerkin projections of the nonlinear terms at one truncation.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    poly: CubicPolynomial,
    transform: SineTransform,
    /// `P_N 1`.
    unit: SpectralField,
}

impl Nonlinearity {
    /// Collocation grid with `G = 4N` points per direction.
    pub fn new(poly: CubicPolynomial, dim: usize, n: usize) -> Result<Self> {
        Ok(Self {
            poly,
            transform: SineTransform::new(dim, n, 4 * n)?,
            unit: SpectralField::constant(dim, n, 1.0)?,
        })
    }

    pub fn poly(&self) -> &CubicPolynomial {
        &self.poly
    }

    pub fn transform(&self) -> &SineTransform {
        &self.transform
    }

    pub fn grid(&self, u: &SpectralField) -> Result<Array2<f64>> {
        self.transform.synthesize(u)
    }

    /// Sine projection of `odd + even + c₀`, where `odd` is a cubic/linear
    /// grid expression and `even` a quadratic one.
    fn finish(&self, odd: &Array2<f64>, even: Option<&Array2<f64>>) -> Result<SpectralField> {
        let mut out = self.transform.analyze(odd)?;
        if let Some(even) = even {
            out.add_scaled(1.0, &self.transform.analyze_even(even)?);
        }
        if self.poly.c0 != 0.0 {
            out.add_scaled(self.poly.c0, &self.unit);
        }
        Ok(out)
    }

    /// `P_N f(u)`.
    pub fn galerkin_f(&self, u: &SpectralField) -> Result<SpectralField> {
        let p = self.poly;
        let grid = self.grid(u)?;
        let odd = grid.mapv(|x| (p.c3 * x * x + p.c1) * x);
        let even = (p.c2 != 0.0).then(|| grid.mapv(|x| p.c2 * x * x));
        self.finish(&odd, even.as_ref())
    }

    /// `P_N ∫₀¹ f(a + θ(b − a)) dθ`.
    pub fn galerkin_avf(&self, a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
        a.same_shape(b)?;
        let ga = self.grid(a)?;
        let gb = self.grid(b)?;
        self.galerkin_avf_grids(&ga, &gb)
    }

    /// Same as [`Self::galerkin_avf`] from precomputed grid values.
    pub fn galerkin_avf_grids(&self, ga: &Array2<f64>, gb: &Array2<f64>) -> Result<SpectralField> {
        let p = self.poly;
        let mut odd = Array2::zeros(ga.dim());
        Zip::from(&mut odd).and(ga).and(gb).for_each(|o, &a, &b| {
            *o = p.c3 * (a + b) * (a * a + b * b) / 4.0 + p.c1 * (a + b) / 2.0;
        });
        let even = (p.c2 != 0.0).then(|| {
            let mut e = Array2::zeros(ga.dim());
            Zip::from(&mut e)
                .and(ga)
                .and(gb)
                .for_each(|o, &a, &b| *o = p.c2 * ((a * a + b * b) + a * b) / 3.0);
            e
        });
        self.finish(&odd, even.as_ref())
    }

    /// `F(u) = ∫ F̃(u)`: rectangle rule for the `u⁴` and `u²` terms (exact on
    /// the grid), `⟨P_N u², u⟩` for `u³` and `⟨P_N 1, u⟩` for `u`.
    pub fn potential_integral(&self, u: &SpectralField) -> Result<f64> {
        let grid = self.grid(u)?;
        self.potential_integral_grid(&grid, u)
    }

    fn potential_integral_grid(&self, grid: &Array2<f64>, u: &SpectralField) -> Result<f64> {
        let p = self.poly;
        let body = grid.fold(0.0, |acc, &x| {
            let x2 = x * x;
            acc + (p.c3 / 4.0 * x2 + p.c1 / 2.0) * x2
        });
        let mut total = body * self.transform.cell_volume() + p.c0 * self.unit.dot(u);
        if p.c2 != 0.0 {
            let sq = self.transform.analyze_even(&grid.mapv(|x| x * x))?;
            total += p.c2 / 3.0 * sq.dot(u);
        }
        Ok(total)
    }
}
