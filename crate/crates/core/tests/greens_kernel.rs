use std::f64::consts::PI;

use approx::assert_relative_eq;
use homopolymer::greens_kernel::{
    free_resolvent_kernel, heat_kernel, modified_bessel_k, shell_heat_kernel, shell_resolvent, zero_energy_coefficient,
    zero_energy_kernels,
};
use homopolymer::quadrature::GaussLegendre;
use homopolymer::Dimension;
use proptest::prelude::*;

/// `K_ν(z) = ∫₀^∞ e^{−z cosh u} cosh(νu) du` by the trapezoidal rule, which
/// converges geometrically for this analytic, doubly decaying integrand.
fn k_quadrature(nu: f64, z: f64) -> f64 {
    let h: f64 = 1.0 / 64.0;
    let mut sum = 0.5 * (-z).exp();
    let mut u = h;
    loop {
        let term = (-z * u.cosh()).exp() * (nu * u).cosh();
        sum += term;
        if term < 1e-300 || u > 40.0 {
            break;
        }
        u += h;
    }
    sum * h
}

// Frozen from `k_quadrature` (agrees with published tables to all digits shown).
const K_TABLE: [(f64, f64, f64); 4] = [
    (0.5, 0.924_419_071_227_665_9, 1.656_441_120_003_300_9),
    (1.0, 0.421_024_438_240_708_33, 0.601_907_230_197_234_57),
    (2.0, 0.113_893_872_749_533_44, 0.139_865_881_816_522_43),
    (5.0, 0.003_691_098_334_042_594_3, 0.004_044_613_445_452_164_2),
];

#[test]
fn k0_k1_match_frozen_quadrature_oracle() {
    for (z, k0, k1) in K_TABLE {
        assert_relative_eq!(k_quadrature(0.0, z), k0, max_relative = 1e-13);
        assert_relative_eq!(k_quadrature(1.0, z), k1, max_relative = 1e-13);
        assert!((modified_bessel_k(0.0, z).unwrap() - k0).abs() < 1e-10 * k0.max(1e-3), "K0({z})");
        assert!((modified_bessel_k(1.0, z).unwrap() - k1).abs() < 1e-10 * k1.max(1e-3), "K1({z})");
    }
}

#[test]
fn half_integer_orders_are_elementary() {
    for z in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let half = (PI / (2.0 * z)).sqrt() * (-z).exp();
        assert_relative_eq!(modified_bessel_k(0.5, z).unwrap(), half, max_relative = 4.0 * f64::EPSILON);
        assert_relative_eq!(
            modified_bessel_k(1.5, z).unwrap(),
            half * (1.0 + 1.0 / z),
            max_relative = 4.0 * f64::EPSILON
        );
        assert_relative_eq!(modified_bessel_k(0.5, z).unwrap(), k_quadrature(0.5, z), max_relative = 1e-12);
    }
}

#[test]
fn zero_energy_normalization_is_unit_flux() {
    for d in [Dimension::THREE, Dimension::FOUR, Dimension::FIVE] {
        let a = zero_energy_coefficient(d).unwrap();
        assert_relative_eq!(0.5 * d.sphere_area() * (d.as_f64() - 2.0) * a, 1.0, max_relative = 1e-15);
    }
    let (p, q) = zero_energy_kernels(Dimension::FOUR, 1.0).unwrap();
    assert_relative_eq!(p, 1.0 / (2.0 * PI * PI), max_relative = 1e-15);
    assert_relative_eq!(q, -1.0 / (4.0 * PI * PI), max_relative = 1e-15);
    let (p3, q3) = zero_energy_kernels(Dimension::THREE, 2.0).unwrap();
    assert_relative_eq!(p3, 1.0 / (4.0 * PI), max_relative = 1e-15);
    assert_relative_eq!(q3, -1.0 / (2f64.sqrt() * PI), max_relative = 1e-15);
}

/// `−∫₀^∞ e^{−λt} p₀(t, r) dt`, by Gauss–Legendre after `t = e^u`.
fn resolvent_by_laplace(d: Dimension, lambda: f64, r: f64) -> f64 {
    let gl = GaussLegendre::new(64);
    let breaks: Vec<f64> = (-40..=12).map(|k| k as f64).collect();
    -gl.integrate_panels(&breaks, |u| {
        let t = u.exp();
        t * (-lambda * t).exp() * heat_kernel(d, t, r).unwrap()
    })
}

#[test]
fn resolvent_is_laplace_transform_of_heat_kernel() {
    for d in 1..=5 {
        let d = Dimension::new(d).unwrap();
        for (lambda, r) in [(0.5, 0.3), (0.02, 1.0), (2.0, 2.5)] {
            let exact = free_resolvent_kernel(d, lambda, r).unwrap();
            assert_relative_eq!(resolvent_by_laplace(d, lambda, r), exact, max_relative = 1e-9);
        }
    }
}

/// `∫_{S^{d−1}} f(|rω₀ − sω|) dω = |S^{d−2}| ∫₀^π f(√(r² + s² − 2rs cos θ)) sin^{d−2}θ dθ`.
fn polar_shell(d: Dimension, r: f64, s: f64, f: impl Fn(f64) -> f64) -> f64 {
    let dd = d.get();
    let lower = match dd {
        2 => 2.0,
        3 => 2.0 * PI,
        4 => 4.0 * PI,
        5 => 2.0 * PI * PI,
        _ => unreachable!(),
    };
    let gl = GaussLegendre::new(96);
    let breaks: Vec<f64> = (0..=8).map(|k| PI * k as f64 / 8.0).collect();
    lower
        * gl.integrate_panels(&breaks, |th| {
            let dist = (r * r + s * s - 2.0 * r * s * th.cos()).max(0.0).sqrt();
            f(dist) * th.sin().powi(dd as i32 - 2)
        })
}

#[test]
fn shell_resolvent_matches_polar_angle_quadrature() {
    for d in 2..=5 {
        let d = Dimension::new(d).unwrap();
        for (lambda, r, s) in [(0.3, 0.4, 1.3), (1.0, 2.0, 0.7), (0.05, 0.2, 0.9)] {
            let oracle = polar_shell(d, r, s, |x| -free_resolvent_kernel(d, lambda, x).unwrap());
            assert_relative_eq!(shell_resolvent(d, lambda, r, s).unwrap(), oracle, max_relative = 1e-10);
        }
        if d.get() >= 3 {
            let oracle = polar_shell(d, 0.5, 1.5, |x| -free_resolvent_kernel(d, 0.0, x).unwrap());
            assert_relative_eq!(shell_resolvent(d, 0.0, 0.5, 1.5).unwrap(), oracle, max_relative = 1e-10);
        }
    }
}

#[test]
fn shell_heat_kernel_matches_polar_angle_quadrature() {
    for d in 2..=5 {
        let d = Dimension::new(d).unwrap();
        for (t, r, s) in [(0.5, 0.4, 1.3), (2.0, 3.0, 0.1), (0.1, 1.0, 1.0)] {
            let oracle = polar_shell(d, r, s, |x| heat_kernel(d, t, x).unwrap());
            assert_relative_eq!(shell_heat_kernel(d, t, r, s).unwrap(), oracle, max_relative = 1e-10);
        }
    }
}

proptest! {
    #[test]
    fn resolvent_negative_and_decreasing_in_magnitude(d in 1u32..=5, lambda in 0.01f64..5.0, r in 0.05f64..5.0) {
        let d = Dimension::new(d).unwrap();
        let a = free_resolvent_kernel(d, lambda, r).unwrap();
        let b = free_resolvent_kernel(d, lambda, r * 1.1).unwrap();
        prop_assert!(a < 0.0);
        prop_assert!(b > a);
    }

    #[test]
    fn shell_resolvent_symmetric_and_monotone_in_lambda(d in 3u32..=5, r in 0.05f64..3.0, s in 0.05f64..3.0, lambda in 0.0f64..2.0) {
        let d = Dimension::new(d).unwrap();
        let a = shell_resolvent(d, lambda, r, s).unwrap();
        prop_assert!((a - shell_resolvent(d, lambda, s, r).unwrap()).abs() <= 1e-14 * a);
        prop_assert!(shell_resolvent(d, lambda + 0.1, r, s).unwrap() < a);
    }
}
