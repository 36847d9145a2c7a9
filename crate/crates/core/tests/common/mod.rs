//! Independent oracles shared by the integration tests: adaptive
//! Gauss–Kronrod quadrature and direct sine-series evaluation.

#![allow(dead_code)]

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, SQRT_2};

use stochwave::spectral::{ModeIndex, PhaseState, SpectralField};

// Kronrod 15-point nodes (non-negative half) and weights; the Gauss 7-point
// rule uses the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7-15 panel: the Kronrod values and the QUADPACK error
/// estimate (max over components) and a flag for estimates at the roundoff floor.
fn gk15(f: &mut dyn FnMut(f64) -> Vec<f64>, a: f64, b: f64) -> (Vec<f64>, f64, bool) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut fv = Vec::with_capacity(15);
    fv.push((WGK[7], Some(WG[3]), f(c)));
    for i in 0..7 {
        let wg = (i % 2 == 1).then(|| WG[i / 2]);
        fv.push((WGK[i], wg, f(c - r * XGK[i])));
        fv.push((WGK[i], wg, f(c + r * XGK[i])));
    }
    let m = fv[0].2.len();
    let mut k = vec![0.0; m];
    let mut err = 0.0f64;
    let mut floor = 0.0f64;
    for j in 0..m {
        let (mut rk, mut rg, mut rabs) = (0.0, 0.0, 0.0);
        for (wk, wg, v) in &fv {
            rk += wk * v[j];
            rabs += wk * v[j].abs();
            if let Some(wg) = wg {
                rg += wg * v[j];
            }
        }
        let mean = 0.5 * rk;
        let asc = fv.iter().map(|(wk, _, v)| wk * (v[j] - mean).abs()).sum::<f64>() * r.abs();
        let mut e = ((rk - rg) * r).abs();
        if asc != 0.0 && e != 0.0 {
            e = asc * (200.0 * e / asc).powf(1.5).min(1.0);
        }
        let fl = 50.0 * f64::EPSILON * rabs * r.abs();
        e = e.max(fl);
        k[j] = rk * r;
        err = err.max(e);
        floor = floor.max(fl);
    }
    (k, err, err <= floor)
}

/// Adaptive vector-valued Gauss–Kronrod 7-15 on `[a, b]`.
pub fn integrate(f: &mut dyn FnMut(f64) -> Vec<f64>, a: f64, b: f64, tol: f64) -> Vec<f64> {
    fn rec(f: &mut dyn FnMut(f64) -> Vec<f64>, a: f64, b: f64, tol: f64, depth: u32) -> Vec<f64> {
        let (val, err, at_floor) = gk15(f, a, b);
        if err <= tol || at_floor || depth >= 12 {
            return val;
        }
        let m = 0.5 * (a + b);
        let left = rec(f, a, m, tol * 0.5, depth + 1);
        let right = rec(f, m, b, tol * 0.5, depth + 1);
        left.iter().zip(&right).map(|(l, r)| l + r).collect()
    }
    rec(f, a, b, tol, 0)
}

/// Iterated adaptive quadrature over the unit square.
pub fn integrate2(f: &mut dyn FnMut(f64, f64) -> Vec<f64>, tol: f64) -> Vec<f64> {
    integrate(
        &mut |x| integrate(&mut |y| f(x, y), 0.0, 1.0, tol),
        0.0,
        1.0,
        tol,
    )
}

/// `∫_Ω g(x) e_k(x) dx` for every retained mode `k`, in `modes()` order.
pub fn project(dim: usize, n: usize, g: &dyn Fn(&[f64]) -> f64, tol: f64) -> Vec<f64> {
    if dim == 1 {
        integrate(
            &mut |x| {
                let gx = g(&[x]);
                (1..=n).map(|k| gx * SQRT_2 * (k as f64 * PI * x).sin()).collect()
            },
            0.0,
            1.0,
            tol,
        )
    } else {
        integrate2(
            &mut |x, y| {
                let gx = g(&[x, y]);
                let sx: Vec<f64> = (1..=n).map(|k| SQRT_2 * (k as f64 * PI * x).sin()).collect();
                let sy: Vec<f64> = (1..=n).map(|l| SQRT_2 * (l as f64 * PI * y).sin()).collect();
                let mut out = Vec::with_capacity(n * n);
                for a in &sx {
                    for b in &sy {
                        out.push(gx * a * b);
                    }
                }
                out
            },
            tol,
        )
    }
}

/// Direct evaluation of the sine series, independent of the grid transform.
pub fn eval(field: &SpectralField, p: &[f64]) -> f64 {
    field
        .modes()
        .map(|(m, c)| {
            c * match m {
                ModeIndex::One(k) => SQRT_2 * (k as f64 * PI * p[0]).sin(),
                ModeIndex::Two(k, l) => 2.0 * (k as f64 * PI * p[0]).sin() * (l as f64 * PI * p[1]).sin(),
            }
        })
        .sum()
}

/// Deterministic uniform source for test data.
pub struct Uniform(ChaCha8Rng);

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform on `[lo, hi)`.
    pub fn next(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * u
    }

    pub fn index(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    /// Random field with coefficients `amp · U(−1, 1) / max(k, l)^decay`.
    pub fn field(&mut self, dim: usize, n: usize, amp: f64, decay: f64) -> SpectralField {
        let mut f = SpectralField::zeros(dim, n).unwrap();
        let modes: Vec<ModeIndex> = f.modes().map(|(m, _)| m).collect();
        for m in modes {
            let w = (m.max_component() as f64).powf(-decay);
            f.set(m, amp * w * self.next(-1.0, 1.0)).unwrap();
        }
        f
    }

    pub fn state(&mut self, dim: usize, n: usize, amp: f64) -> PhaseState {
        let u = self.field(dim, n, amp, 2.0);
        let v = self.field(dim, n, amp, 1.0);
        PhaseState::new(u, v).unwrap()
    }
}
