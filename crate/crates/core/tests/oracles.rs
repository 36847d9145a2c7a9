//! Observables and Galerkin projections against adaptive quadrature.

mod common;

use common::Uniform;
use proptest::prelude::*;
use stochwave::nonlinearity::{CubicPolynomial, Nonlinearity, Potential};
use stochwave::observables::{lp_norm, Observables};
use stochwave::spectral::{ModeIndex, SpectralField};

#[test]
fn quadrature_self_check() {
    let pi = std::f64::consts::PI;
    let v = common::integrate(&mut |x| vec![x.sin(), x.powi(6)], 0.0, pi, 1e-14);
    assert!((v[0] - 2.0).abs() < 1e-14);
    assert!((v[1] - pi.powi(7) / 7.0).abs() < 1e-10);
    let w = common::integrate2(&mut |x, y| vec![x * y * y], 1e-14);
    assert!((w[0] - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn lp_norms_match_quadrature() {
    let mut rng = Uniform::new(3);
    for i in 0..20 {
        let dim = 1 + i % 2;
        let n = rng.index(1, 8);
        let u = rng.field(dim, n, 1.0, 1.0);
        for p in [4.0, 6.0] {
            let g = |x: &[f64]| common::eval(&u, x).abs().powf(p);
            let q = if dim == 1 {
                common::integrate(&mut |x| vec![g(&[x])], 0.0, 1.0, 1e-13)[0]
            } else {
                common::integrate2(&mut |x, y| vec![g(&[x, y])], 1e-13)[0]
            };
            let got = lp_norm(&u, p).unwrap();
            assert!((got - q.powf(1.0 / p)).abs() < 1e-8, "dim {dim} N {n} p {p}: {got} vs {}", q.powf(1.0 / p));
        }
    }
}

#[test]
fn potential_matches_quadrature() {
    let mut rng = Uniform::new(5);
    for i in 0..20 {
        let dim = 1 + i % 2;
        let n = rng.index(1, 8);
        let poly = CubicPolynomial::new(
            rng.next(-1.0, 1.0),
            rng.next(-1.0, 1.0),
            rng.next(-1.0, 1.0),
            rng.next(0.5, 2.0),
        )
        .unwrap();
        let u = rng.field(dim, n, 1.0, 1.0);
        let g = |x: &[f64]| poly.density(common::eval(&u, x));
        let q = if dim == 1 {
            common::integrate(&mut |x| vec![g(&[x])], 0.0, 1.0, 1e-13)[0]
        } else {
            common::integrate2(&mut |x, y| vec![g(&[x, y])], 1e-13)[0]
        };
        let got = Nonlinearity::new(poly, dim, n).unwrap().potential_integral(&u).unwrap();
        assert!((got - q).abs() < 1e-10, "{got} vs {q}");
    }
}

#[test]
fn energy_of_single_mode() {
    // V₁ of (e₁, 0) in 1D with f = u³ − u: π²/2 + ∫(e₁⁴/4 − e₁²/2) + 1/4.
    let obs = Observables::new(Potential::new(CubicPolynomial::cubic_minus_linear()).unwrap(), 1, 4).unwrap();
    let e1 = SpectralField::mode(1, 4, ModeIndex::One(1), 1.0).unwrap();
    let x = stochwave::spectral::PhaseState::new(e1, SpectralField::zeros(1, 4).unwrap()).unwrap();
    let pi = std::f64::consts::PI;
    let want = pi * pi / 2.0 + 1.5 / 4.0 - 0.5 + 0.25;
    assert!((obs.energy_v1(&x, 0.0).unwrap().v1 - want).abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn discrete_gradient_identity(
        seed in any::<u64>(),
        dim in 1usize..=2,
        n in 1usize..=12,
        c in prop::array::uniform3(-2.0..2.0f64),
        c3 in 0.1..3.0f64,
    ) {
        let mut rng = Uniform::new(seed);
        let poly = CubicPolynomial::new(c[0], c[1], c[2], c3).unwrap();
        let nl = Nonlinearity::new(poly, dim, n).unwrap();
        let a = rng.field(dim, n, 1.5, 1.0);
        let b = rng.field(dim, n, 1.5, 1.0);
        let lhs = nl.galerkin_avf(&a, &b).unwrap().dot(&(&b - &a));
        let rhs = nl.potential_integral(&b).unwrap() - nl.potential_integral(&a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
    }
}
