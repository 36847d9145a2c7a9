//! Sine spectral basis on the unit interval / unit square.
//!
//! Basis functions are the orthonormal Dirichlet eigenfunctions
//! `e_k(x) = √2 sin(kπx)` in one dimension and
//! `e_{k,l}(x, y) = 2 sin(kπx) sin(lπy)` in two, so the `L²` norm of a field
//! is the Euclidean norm of its coefficients. Eigenvalues of `-Δ` are
//! `π²k²` and `π²(k² + l²)`.
//!
//! Coefficients live in an `N × N` array for `d = 2` (entry `[k-1, l-1]`)
//! and in a `1 × N` array for `d = 1`, which lets both dimensions share the
//! separable transform code.

use std::f64::consts::{PI, SQRT_2};
use std::ops::{Add, Mul, Sub};

use ndarray::{s, Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Dirichlet eigenmode, 1-based in every direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeIndex {
    One(usize),
    Two(usize, usize),
}

impl ModeIndex {
    pub fn dim(&self) -> usize {
        match self {
            ModeIndex::One(_) => 1,
            ModeIndex::Two(..) => 2,
        }
    }

    /// Largest component.
    pub fn max_component(&self) -> usize {
        match *self {
            ModeIndex::One(k) => k,
            ModeIndex::Two(k, l) => k.max(l),
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            ModeIndex::One(k) => k >= 1,
            ModeIndex::Two(k, l) => k >= 1 && l >= 1,
        }
    }

    fn slot(&self) -> (usize, usize) {
        match *self {
            ModeIndex::One(k) => (0, k - 1),
            ModeIndex::Two(k, l) => (k - 1, l - 1),
        }
    }
}

/// Dirichlet Laplacian eigenvalue `π² Σ kᵢ²`.
pub fn eigenvalue(mode: ModeIndex) -> f64 {
    let sq = match mode {
        ModeIndex::One(k) => (k * k) as f64,
        ModeIndex::Two(k, l) => (k * k + l * l) as f64,
    };
    PI * PI * sq
}

/// Eigenvalues laid out like the coefficient array of a `(dim, n)` field.
pub fn eigenvalue_table(dim: usize, n: usize) -> Array2<f64> {
    let rows = if dim == 1 { 1 } else { n };
    Array2::from_shape_fn((rows, n), |(i, j)| {
        if dim == 1 {
            eigenvalue(ModeIndex::One(j + 1))
        } else {
            eigenvalue(ModeIndex::Two(i + 1, j + 1))
        }
    })
}

pub fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::Dimension(dim))
    }
}

fn coeff_shape(dim: usize, n: usize) -> (usize, usize) {
    if dim == 1 {
        (1, n)
    } else {
        (n, n)
    }
}

/// `⟨1, √2 sin(kπ·)⟩ = √2 (1 − (−1)^k) / (kπ)`.
fn constant_projection_1d(k: usize) -> f64 {
    if k % 2 == 1 {
        2.0 * SQRT_2 / (k as f64 * PI)
    } else {
        0.0
    }
}

/// Real sine-basis coefficients of one scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    dim: usize,
    n: usize,
    coeffs: Array2<f64>,
}

impl SpectralField {
    pub fn zeros(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        if n == 0 {
            return Err(Error::config("truncation N must be at least 1"));
        }
        Ok(Self {
            dim,
            n,
            coeffs: Array2::zeros(coeff_shape(dim, n)),
        })
    }

    /// Builds a field from a row-major coefficient vector (`N` entries for
    /// `d = 1`, `N²` for `d = 2`).
    pub fn from_vec(dim: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        let shape = coeff_shape(dim, n);
        if values.len() != shape.0 * shape.1 || n == 0 {
            return Err(Error::GridShape {
                expected: shape,
                found: (1, values.len()),
            });
        }
        let coeffs = Array2::from_shape_vec(shape, values).expect("shape checked");
        Ok(Self { dim, n, coeffs })
    }

    pub fn from_array(dim: usize, coeffs: Array2<f64>) -> Result<Self> {
        check_dim(dim)?;
        let n = coeffs.ncols();
        let shape = coeff_shape(dim, n);
        if coeffs.dim() != shape || n == 0 {
            return Err(Error::GridShape {
                expected: shape,
                found: coeffs.dim(),
            });
        }
        Ok(Self { dim, n, coeffs })
    }

    /// A single basis function scaled by `amplitude`.
    pub fn mode(dim: usize, n: usize, mode: ModeIndex, amplitude: f64) -> Result<Self> {
        let mut field = Self::zeros(dim, n)?;
        field.set(mode, amplitude)?;
        Ok(field)
    }

    /// `P_N` of the constant function `value`, computed from the closed-form
    /// inner products rather than by quadrature.
    pub fn constant(dim: usize, n: usize, value: f64) -> Result<Self> {
        let mut field = Self::zeros(dim, n)?;
        if dim == 1 {
            for k in 1..=n {
                field.coeffs[[0, k - 1]] = value * constant_projection_1d(k);
            }
        } else {
            for k in 1..=n {
                for l in 1..=n {
                    field.coeffs[[k - 1, l - 1]] =
                        value * constant_projection_1d(k) * constant_projection_1d(l);
                }
            }
        }
        Ok(field)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &Array2<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<f64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<f64> {
        self.coeffs
    }

    fn check_mode(&self, mode: ModeIndex) -> Result<()> {
        if mode.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: mode.dim(),
            });
        }
        if !mode.is_valid() || mode.max_component() > self.n {
            return Err(Error::config(format!(
                "mode {mode:?} outside 1..={}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn get(&self, mode: ModeIndex) -> Result<f64> {
        self.check_mode(mode)?;
        Ok(self.coeffs[mode.slot()])
    }

    pub fn set(&mut self, mode: ModeIndex, value: f64) -> Result<()> {
        self.check_mode(mode)?;
        self.coeffs[mode.slot()] = value;
        Ok(())
    }

    /// Iterates `(mode, coefficient)` pairs in storage order.
    pub fn modes(&self) -> impl Iterator<Item = (ModeIndex, f64)> + '_ {
        let dim = self.dim;
        self.coeffs.indexed_iter().map(move |((i, j), &c)| {
            let mode = if dim == 1 {
                ModeIndex::One(j + 1)
            } else {
                ModeIndex::Two(i + 1, j + 1)
            };
            (mode, c)
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.n != other.n {
            return Err(Error::TruncationMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// `L²` inner product (plain coefficient dot product).
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.coeffs.dim(), other.coeffs.dim());
        Zip::from(&self.coeffs)
            .and(&other.coeffs)
            .fold(0.0, |acc, a, b| acc + a * b)
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `‖u‖_{Ḣʳ} = (Σ λ_kʳ û_k²)^{1/2}`.
    pub fn sobolev_norm(&self, r: f64) -> f64 {
        self.sobolev_norm_sq(r).sqrt()
    }

    pub fn sobolev_norm_sq(&self, r: f64) -> f64 {
        if r == 0.0 {
            return self.dot(self);
        }
        self.modes()
            .map(|(mode, c)| eigenvalue(mode).powf(r) * c * c)
            .sum()
    }

    /// Truncation `P_{N'}`. Asking for more modes than stored zero-pads.
    pub fn project(&self, n_new: usize) -> Result<Self> {
        let mut out = Self::zeros(self.dim, n_new)?;
        let m = n_new.min(self.n);
        if self.dim == 1 {
            out.coeffs
                .slice_mut(s![.., ..m])
                .assign(&self.coeffs.slice(s![.., ..m]));
        } else {
            out.coeffs
                .slice_mut(s![..m, ..m])
                .assign(&self.coeffs.slice(s![..m, ..m]));
        }
        Ok(out)
    }

    /// Point evaluation of the truncated sine series. `point` holds `dim`
    /// coordinates.
    pub fn eval(&self, point: &[f64]) -> f64 {
        let sines = |x: f64| -> Vec<f64> {
            (1..=self.n)
                .map(|k| SQRT_2 * (k as f64 * PI * x).sin())
                .collect()
        };
        if self.dim == 1 {
            let sx = sines(point[0]);
            self.coeffs.row(0).iter().zip(&sx).map(|(c, s)| c * s).sum()
        } else {
            let sx = sines(point[0]);
            let sy = sines(point[1]);
            let mut acc = 0.0;
            for (i, row) in self.coeffs.rows().into_iter().enumerate() {
                let inner: f64 = row.iter().zip(&sy).map(|(c, s)| c * s).sum();
                acc += sx[i] * inner;
            }
            acc
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            dim: self.dim,
            n: self.n,
            coeffs: &self.coeffs * a,
        }
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.coeffs.dim(), other.coeffs.dim());
        self.coeffs.scaled_add(a, &other.coeffs);
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        debug_assert_eq!(self.coeffs.dim(), rhs.coeffs.dim());
        SpectralField {
            dim: self.dim,
            n: self.n,
            coeffs: &self.coeffs + &rhs.coeffs,
        }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        debug_assert_eq!(self.coeffs.dim(), rhs.coeffs.dim());
        SpectralField {
            dim: self.dim,
            n: self.n,
            coeffs: &self.coeffs - &rhs.coeffs,
        }
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;

    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scaled(self)
    }
}

/// Position/velocity pair `X = (u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub u: SpectralField,
    pub v: SpectralField,
}

impl PhaseState {
    pub fn new(u: SpectralField, v: SpectralField) -> Result<Self> {
        u.same_shape(&v)?;
        Ok(Self { u, v })
    }

    pub fn zeros(dim: usize, n: usize) -> Result<Self> {
        Ok(Self {
            u: SpectralField::zeros(dim, n)?,
            v: SpectralField::zeros(dim, n)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn n(&self) -> usize {
        self.u.n()
    }

    /// `‖X‖²_{ℍʳ} = ‖u‖²_{Ḣʳ} + ‖v‖²_{Ḣʳ⁻¹}`.
    pub fn phase_norm_sq(&self, r: f64) -> f64 {
        self.u.sobolev_norm_sq(r) + self.v.sobolev_norm_sq(r - 1.0)
    }

    pub fn phase_norm(&self, r: f64) -> f64 {
        self.phase_norm_sq(r).sqrt()
    }

    pub fn project(&self, n_new: usize) -> Result<Self> {
        Ok(Self {
            u: self.u.project(n_new)?,
            v: self.v.project(n_new)?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// Separable sine transform between `N` coefficients per direction and the
/// interior collocation nodes `x_j = j/G`, `j = 1..G-1`.
///
/// Grids are `1 × (G-1)` for `d = 1` and `(G-1) × (G-1)` for `d = 2`.
/// `analyze` applies the rectangle rule with weight `1/G` per direction,
/// which is exact for products whose wavenumbers stay below `2G`.
///
/// That covers odd products of sine polynomials (which are sine series), but
/// not even ones such as `u²`: those are cosine series and go through
/// [`SineTransform::analyze_even`] instead.
#[derive(Debug, Clone)]
pub struct SineTransform {
    dim: usize,
    n: usize,
    g: usize,
    /// `basis[j-1, k-1] = √2 sin(kπ j/G)`.
    basis: Array2<f64>,
    /// Cosine analysis up to wavenumber `2N` followed by the exact
    /// cosine-to-sine projection, cell weight included.
    even: Array2<f64>,
}

impl SineTransform {
    pub fn new(dim: usize, n: usize, g: usize) -> Result<Self> {
        check_dim(dim)?;
        if g <= n {
            return Err(Error::GridTooSmall { grid: g, modes: n });
        }
        let basis = Array2::from_shape_fn((g - 1, n), |(j, k)| {
            let x = (j + 1) as f64 / g as f64;
            SQRT_2 * ((k + 1) as f64 * PI * x).sin()
        });
        Ok(Self {
            dim,
            n,
            g,
            basis,
            even: even_projection(n, g),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid_size(&self) -> usize {
        self.g
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        if self.dim == 1 {
            (1, self.g - 1)
        } else {
            (self.g - 1, self.g - 1)
        }
    }

    /// Rectangle-rule weight `G^{-d}`.
    pub fn cell_volume(&self) -> f64 {
        (self.g as f64).powi(-(self.dim as i32))
    }

    pub fn synthesize(&self, field: &SpectralField) -> Result<Array2<f64>> {
        self.check_field(field)?;
        let c = field.coeffs();
        Ok(if self.dim == 1 {
            c.dot(&self.basis.t())
        } else {
            self.basis.dot(c).dot(&self.basis.t())
        })
    }

    pub fn analyze(&self, grid: &Array2<f64>) -> Result<SpectralField> {
        if grid.dim() != self.grid_shape() {
            return Err(Error::GridShape {
                expected: self.grid_shape(),
                found: grid.dim(),
            });
        }
        let w = self.cell_volume();
        let coeffs = if self.dim == 1 {
            grid.dot(&self.basis) * w
        } else {
            self.basis.t().dot(grid).dot(&self.basis) * w
        };
        SpectralField::from_array(self.dim, coeffs)
    }

    /// Sine coefficients of a grid function that is a quadratic form in
    /// degree-`N` sine polynomials (a cosine series up to wavenumber `2N`).
    /// Exact when `G > 2N`.
    pub fn analyze_even(&self, grid: &Array2<f64>) -> Result<SpectralField> {
        if grid.dim() != self.grid_shape() {
            return Err(Error::GridShape {
                expected: self.grid_shape(),
                found: grid.dim(),
            });
        }
        let coeffs = if self.dim == 1 {
            grid.dot(&self.even)
        } else {
            self.even.t().dot(grid).dot(&self.even)
        };
        SpectralField::from_array(self.dim, coeffs)
    }

    /// Rectangle-rule integral of a grid function over the domain.
    pub fn integrate(&self, grid: &Array2<f64>) -> f64 {
        grid.sum() * self.cell_volume()
    }

    fn check_field(&self, field: &SpectralField) -> Result<()> {
        if field.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: field.dim(),
            });
        }
        if field.n() != self.n {
            return Err(Error::TruncationMismatch {
                expected: self.n,
                found: field.n(),
            });
        }
        Ok(())
    }
}

/// `even[j-1, k-1] = Σ_m w_m cos(mπ j/G) ⟨cos(mπ·), e_k⟩` for
/// `m = 0..=min(2N, G-1)`, with `w_0 = 1/G` and `w_m = 2/G` otherwise.
fn even_projection(n: usize, g: usize) -> Array2<f64> {
    let m_max = (2 * n).min(g - 1);
    // ⟨cos(mπ·), √2 sin(kπ·)⟩ = √2 k (1 − (−1)^{k+m}) / (π (k² − m²)).
    let inner = Array2::from_shape_fn((m_max + 1, n), |(m, k)| {
        let k = k + 1;
        if (k + m) % 2 == 0 {
            0.0
        } else {
            let (kf, mf) = (k as f64, m as f64);
            2.0 * SQRT_2 * kf / (PI * (kf * kf - mf * mf))
        }
    });
    let cosines = Array2::from_shape_fn((g - 1, m_max + 1), |(j, m)| {
        let w = if m == 0 { 1.0 } else { 2.0 } / g as f64;
        w * (m as f64 * PI * (j + 1) as f64 / g as f64).cos()
    });
    cosines.dot(&inner)
}

/// Evaluates `field` on the interior nodes of a `G`-point grid.
pub fn synthesize(field: &SpectralField, g: usize) -> Result<Array2<f64>> {
    SineTransform::new(field.dim(), field.n(), g)?.synthesize(field)
}

/// Discrete sine analysis of interior-node samples onto `n` modes. The grid
/// size `G` is inferred from the sample count.
pub fn analyze(grid: &Array2<f64>, dim: usize, n: usize) -> Result<SpectralField> {
    check_dim(dim)?;
    let (rows, cols) = grid.dim();
    let expected_rows = if dim == 1 { 1 } else { cols };
    if rows != expected_rows {
        return Err(Error::GridShape {
            expected: (expected_rows, cols),
            found: (rows, cols),
        });
    }
    SineTransform::new(dim, n, cols + 1)?.analyze(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field_from(dim: usize, n: usize, seed: &[f64]) -> SpectralField {
        let len = if dim == 1 { n } else { n * n };
        let vals = (0..len).map(|i| seed[i % seed.len()] * (1.0 + i as f64).recip()).collect();
        SpectralField::from_vec(dim, n, vals).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        assert!((eigenvalue(ModeIndex::One(1)) - 9.869_604_401_089_358).abs() < 1e-12);
        assert!((eigenvalue(ModeIndex::One(3)) - 9.0 * PI * PI).abs() < 1e-12);
        assert!((eigenvalue(ModeIndex::Two(1, 2)) - 49.348_022_005_446_79).abs() < 1e-10);
    }

    #[test]
    fn eigenvalues_sorted_start_at_dim_pi_sq() {
        for dim in [1, 2] {
            let mut vals: Vec<f64> = eigenvalue_table(dim, 12).iter().copied().collect();
            vals.sort_by(f64::total_cmp);
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            assert!((vals[0] - PI * PI * dim as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn synthesize_point_values() {
        let e1 = SpectralField::mode(1, 4, ModeIndex::One(1), 1.0).unwrap();
        let grid = synthesize(&e1, 8).unwrap();
        // x_4 = 0.5
        assert!((grid[[0, 3]] - SQRT_2).abs() < 1e-14);

        let e2 = SpectralField::mode(1, 4, ModeIndex::One(2), 1.0).unwrap();
        let grid = synthesize(&e2, 8).unwrap();
        // x_2 = 0.25
        assert!((grid[[0, 1]] - SQRT_2).abs() < 1e-14);

        let zero = SpectralField::zeros(2, 3).unwrap();
        assert!(synthesize(&zero, 12).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn grid_must_exceed_truncation() {
        let f = SpectralField::zeros(1, 8).unwrap();
        assert!(matches!(synthesize(&f, 8), Err(Error::GridTooSmall { .. })));
        assert!(synthesize(&f, 9).is_ok());
    }

    #[test]
    fn even_projection_of_square() {
        // 2 sin²(πx) = 1 − cos(2πx); its sine coefficients are
        // −8√2 / (π k (k² − 4)) for odd k.
        for (dim, n) in [(1, 6), (2, 5)] {
            let t = SineTransform::new(dim, n, 4 * n).unwrap();
            let mode = if dim == 1 { ModeIndex::One(1) } else { ModeIndex::Two(1, 1) };
            let e1 = SpectralField::mode(dim, n, mode, 1.0).unwrap();
            let sq = t.analyze_even(&t.synthesize(&e1).unwrap().mapv(|x| x * x)).unwrap();
            let c = |k: usize| {
                let k = k as f64;
                if k as usize % 2 == 0 {
                    0.0
                } else {
                    -8.0 * SQRT_2 / (PI * k * (k * k - 4.0))
                }
            };
            for (m, v) in sq.modes() {
                let want = match m {
                    ModeIndex::One(k) => c(k),
                    ModeIndex::Two(k, l) => c(k) * c(l),
                };
                assert!((v - want).abs() < 1e-13, "{m:?}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn analyze_rejects_bad_shape() {
        let grid = Array2::<f64>::zeros((3, 7));
        assert!(matches!(analyze(&grid, 2, 4), Err(Error::GridShape { .. })));
        assert!(matches!(analyze(&grid, 3, 4), Err(Error::Dimension(3))));
        let t = SineTransform::new(1, 4, 16).unwrap();
        assert!(t.analyze(&Array2::zeros((1, 14))).is_err());
    }

    #[test]
    fn analyze_kills_nyquist_samples() {
        let g = 16;
        let grid = Array2::from_shape_fn((1, g - 1), |(_, j)| {
            (g as f64 * PI * (j + 1) as f64 / g as f64).sin()
        });
        let f = analyze(&grid, 1, g - 1).unwrap();
        assert!(f.coeffs().iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn analyze_cube_of_first_mode() {
        // sin³θ = (3 sinθ − sin3θ)/4, so e₁³ = 2√2 sin³ = 1.5 e₁ − 0.5 e₃.
        let n = 5;
        let t = SineTransform::new(1, n, 4 * n).unwrap();
        let e1 = SpectralField::mode(1, n, ModeIndex::One(1), 1.0).unwrap();
        let cube = t.synthesize(&e1).unwrap().mapv(|x| x * x * x);
        let f = t.analyze(&cube).unwrap();
        for (mode, c) in f.modes() {
            let want = match mode {
                ModeIndex::One(1) => 1.5,
                ModeIndex::One(3) => -0.5,
                _ => 0.0,
            };
            assert!((c - want).abs() < 1e-13, "{mode:?}: {c}");
        }
    }

    #[test]
    fn sobolev_examples() {
        let e1 = SpectralField::mode(1, 4, ModeIndex::One(1), 1.0).unwrap();
        assert!((e1.sobolev_norm(0.0) - 1.0).abs() < 1e-15);
        assert!((e1.sobolev_norm(1.0) - PI).abs() < 1e-14);
        let e2 = SpectralField::mode(1, 4, ModeIndex::One(2), 2.0).unwrap();
        // 2·(4π²)^{-1/2} = 1/π
        assert!((e2.sobolev_norm(-1.0) - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn project_examples() {
        let e3 = SpectralField::mode(1, 6, ModeIndex::One(3), 1.0).unwrap();
        let p = e3.project(2).unwrap();
        assert_eq!(p.n(), 2);
        assert!(p.coeffs().iter().all(|&c| c == 0.0));
        let padded = e3.project(8).unwrap();
        assert_eq!(padded.get(ModeIndex::One(3)).unwrap(), 1.0);
    }

    #[test]
    fn constant_projection_matches_quadrature() {
        // High-resolution midpoint rule for ⟨1, e_k⟩.
        let f = SpectralField::constant(1, 7, 1.0).unwrap();
        let m = 200_000;
        for (mode, c) in f.modes() {
            let ModeIndex::One(k) = mode else { unreachable!() };
            let q: f64 = (0..m)
                .map(|i| SQRT_2 * (k as f64 * PI * (i as f64 + 0.5) / m as f64).sin())
                .sum::<f64>()
                / m as f64;
            assert!((c - q).abs() < 1e-9, "k = {k}: {c} vs {q}");
        }
        let f2 = SpectralField::constant(2, 3, 2.0).unwrap();
        let want = 2.0 * (2.0 * SQRT_2 / PI).powi(2);
        assert!((f2.get(ModeIndex::Two(1, 1)).unwrap() - want).abs() < 1e-14);
        assert_eq!(f2.get(ModeIndex::Two(2, 1)).unwrap(), 0.0);
    }

    #[test]
    fn phase_state_requires_matching_shapes() {
        let u = SpectralField::zeros(1, 4).unwrap();
        let v = SpectralField::zeros(1, 5).unwrap();
        assert!(PhaseState::new(u.clone(), v).is_err());
        let w = SpectralField::zeros(2, 4).unwrap();
        assert!(PhaseState::new(u, w).is_err());
    }

    #[test]
    fn eval_agrees_with_grid() {
        let f = field_from(2, 4, &[0.3, -1.2, 0.7]);
        let grid = synthesize(&f, 16).unwrap();
        let v = f.eval(&[3.0 / 16.0, 11.0 / 16.0]);
        assert!((grid[[2, 10]] - v).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn parseval(vals in proptest::collection::vec(-5.0f64..5.0, 36)) {
            let f = SpectralField::from_vec(2, 6, vals.clone()).unwrap();
            let sum: f64 = vals.iter().map(|x| x * x).sum();
            prop_assert!((f.sobolev_norm(0.0).powi(2) - sum).abs() <= 1e-12 * sum.max(1.0));
        }

        #[test]
        fn analyze_inverts_synthesize(
            dim in 1usize..=2,
            n in 1usize..=9,
            extra in 1usize..=20,
            seed in proptest::collection::vec(-3.0f64..3.0, 1..8),
        ) {
            let f = field_from(dim, n, &seed);
            let g = n + extra;
            let back = analyze(&synthesize(&f, g).unwrap(), dim, n).unwrap();
            let err = (&back - &f).l2_norm();
            prop_assert!(err < 1e-12, "err = {err}");
        }

        #[test]
        fn projection_is_idempotent_contraction(
            vals in proptest::collection::vec(-5.0f64..5.0, 64),
            n_new in 1usize..=8,
        ) {
            let f = SpectralField::from_vec(2, 8, vals).unwrap();
            let p = f.project(n_new).unwrap();
            prop_assert_eq!(&p.project(n_new).unwrap(), &p);
            for r in [-1.0, 0.0, 1.0, 2.0] {
                prop_assert!(p.sobolev_norm(r) <= f.sobolev_norm(r) * (1.0 + 1e-14));
            }
        }

        #[test]
        fn sobolev_norm_is_homogeneous(
            vals in proptest::collection::vec(-5.0f64..5.0, 10),
            a in -4.0f64..4.0,
            r in -1.0f64..2.0,
        ) {
            let f = SpectralField::from_vec(1, 10, vals).unwrap();
            let lhs = f.scaled(a).sobolev_norm(r);
            let rhs = a.abs() * f.sobolev_norm(r);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }
}
