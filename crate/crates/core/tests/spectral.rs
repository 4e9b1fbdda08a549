//! Spectral solver against transcendental matching conditions for the
//! spherical well, which are independent of the Nyström discretization.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use homopolymer::birman_schwinger::{critical_beta, lambda0, BirmanSchwinger, Resolution};
use homopolymer::greens_kernel::modified_bessel_k;
use homopolymer::quadrature::GaussLegendre;
use homopolymer::{Dimension, Profile, RadialPotential};
use proptest::prelude::*;

/// First zero of J₀.
const J0_ZERO: f64 = 2.404_825_557_695_773;

fn well(d: Dimension) -> RadialPotential {
    RadialPotential::unit_well(d)
}

fn solver(d: Dimension) -> BirmanSchwinger {
    BirmanSchwinger::new(well(d), Resolution::default()).unwrap()
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    assert!(f_lo * f(hi) < 0.0, "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// λ₀ for the d = 3 well: `k cot k = −κ`, `k² = 2(β − λ)`, `κ² = 2λ`, with
/// the ground state on the branch `k ∈ (π/2, π)`.
fn lambda0_d3(beta: f64) -> f64 {
    let k_hi = (2.0 * beta).sqrt().min(PI) - 1e-14;
    let k = bisect(PI / 2.0, k_hi, |k| {
        let l = beta - 0.5 * k * k;
        k / k.tan() + (2.0 * l).sqrt()
    });
    beta - 0.5 * k * k
}

/// λ₀ for the d = 5 well: `k sin k / (sin k / k − cos k) = −κ²/(1 + κ)`.
fn lambda0_d5(beta: f64) -> f64 {
    bisect(1e-14, beta - 1e-14, |l| {
        let k = (2.0 * (beta - l)).sqrt();
        let kappa = (2.0 * l).sqrt();
        k * k.sin() / (k.sin() / k - k.cos()) + kappa * kappa / (1.0 + kappa)
    })
}

fn bessel_j(nu: i32, x: f64) -> f64 {
    let mut term = (0.5 * x).powi(nu) / (1..=nu).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..60 {
        term *= -0.25 * x * x / (f64::from(m) * f64::from(m + nu));
        sum += term;
    }
    sum
}

/// λ₀ for the d = 4 well: `k J₀(k)/J₁(k) = −κ K₀(κ)/K₁(κ)`.
fn lambda0_d4(beta: f64) -> f64 {
    bisect(1e-12, beta - 1e-12, |l| {
        let k = (2.0 * (beta - l)).sqrt();
        let kappa = (2.0 * l).sqrt();
        let lhs = k * bessel_j(0, k) / bessel_j(1, k);
        lhs + kappa * modified_bessel_k(0.0, kappa).unwrap() / modified_bessel_k(1.0, kappa).unwrap()
    })
}

#[test]
fn critical_couplings_match_bessel_zeros() {
    let cases = [
        (Dimension::THREE, PI * PI / 8.0),
        (Dimension::FOUR, 0.5 * J0_ZERO * J0_ZERO),
        (Dimension::FIVE, PI * PI / 2.0),
    ];
    for (d, exact) in cases {
        let cb = critical_beta(&well(d), Resolution::new(16)).unwrap();
        assert_relative_eq!(cb.value, exact, max_relative = 1e-11);
        assert!(cb.error_estimate < 1e-10);
    }
}

#[test]
fn critical_coupling_self_converges() {
    let v = well(Dimension::THREE);
    let coarse = critical_beta(&v, Resolution::new(32)).unwrap().value;
    let fine = critical_beta(&v, Resolution::new(256)).unwrap().value;
    assert!((coarse - fine).abs() < 1e-6 * fine);
}

#[test]
fn critical_coupling_scales_with_height_and_radius() {
    let d = Dimension::THREE;
    let tall = RadialPotential::new(d, Profile::Well, 1.0, 4.0).unwrap();
    let wide = RadialPotential::new(d, Profile::Well, 2.0, 1.0).unwrap();
    let base = PI * PI / 8.0;
    assert_relative_eq!(critical_beta(&tall, Resolution::default()).unwrap().value, base / 4.0, max_relative = 1e-11);
    assert_relative_eq!(critical_beta(&wide, Resolution::default()).unwrap().value, base / 4.0, max_relative = 1e-11);
}

#[test]
fn lambda0_matches_matching_conditions() {
    let v3 = well(Dimension::THREE);
    assert_relative_eq!(lambda0_d3(2.0), 0.203_550_741_8, max_relative = 1e-9);
    for beta in [2.0, 1.5 * PI * PI / 8.0, 8.0] {
        assert_relative_eq!(lambda0(&v3, beta, Resolution::default()).unwrap(), lambda0_d3(beta), max_relative = 1e-9);
    }
    let b5 = 1.2 * PI * PI / 2.0;
    assert_relative_eq!(solver(Dimension::FIVE).lambda0(b5).unwrap(), lambda0_d5(b5), max_relative = 1e-9);
    let b4 = 1.2 * 0.5 * J0_ZERO * J0_ZERO;
    assert_relative_eq!(solver(Dimension::FOUR).lambda0(b4).unwrap(), lambda0_d4(b4), max_relative = 1e-8);
}

#[test]
fn lambda0_vanishes_below_critical_and_is_positive_in_low_dimension() {
    let s = solver(Dimension::THREE);
    assert_eq!(s.lambda0(1.0).unwrap(), 0.0);
    let s1 = solver(Dimension::ONE);
    let l = s1.lambda0(0.01).unwrap();
    // d = 1: λ₀ ≈ (β∫v)²/2 for weak coupling, ∫v = 2.
    assert!(l > 0.0);
    assert_relative_eq!(l, 0.5 * 0.02f64.powi(2), max_relative = 0.05);
}

/// Constants of the d = 3 well from the zero-energy state `ψ ∝ sin(πr/2)/r`
/// inside and `1/r` outside: γ = 128/(√2 π⁴) and c₃ = 1/(γ²β_cr⁴) = 1/2.
#[test]
fn d3_scaling_constants_have_closed_forms() {
    let s = solver(Dimension::THREE);
    let c = s.scaling_constants().unwrap();
    let gamma = 128.0 / (2f64.sqrt() * PI.powi(4));
    assert_relative_eq!(c.gamma.unwrap(), gamma, max_relative = 1e-10);
    assert_relative_eq!(c.c_d, 0.5, max_relative = 1e-10);
    assert_relative_eq!(c.c1, 4.0 * PI / 3.0, max_relative = 1e-14);

    // κ fixes the normalization ∫(β_cr v ψ)² e^{|x|²} dx = 1.
    let beta_cr = PI * PI / 8.0;
    let gl = GaussLegendre::new(40);
    let shape = |r: f64| if r == 0.0 { PI / 2.0 } else { (PI * r / 2.0).sin() / r };
    let norm2 = 4.0 * PI * gl.integrate(0.0, 1.0, |r| (beta_cr * shape(r)).powi(2) * (r * r).exp() * r * r);
    let scale = 1.0 / norm2.sqrt();
    let mass = 4.0 * PI * scale * gl.integrate(0.0, 1.0, |r| shape(r) * r * r);
    let kappa = 1.0 / ((2.0 * PI).sqrt() * beta_cr * mass);
    assert_relative_eq!(c.kappa.unwrap(), kappa, max_relative = 1e-9);
}

/// c₅ = 1/3 and c₄ = 1 follow from expanding the matching conditions at the
/// first zero; the solver's constants must reproduce the oracle slopes.
#[test]
fn d4_d5_constants_match_oracle_slopes() {
    let c5 = solver(Dimension::FIVE).scaling_constants().unwrap().c_d;
    assert_relative_eq!(c5, 1.0 / 3.0, max_relative = 1e-8);
    let b = PI * PI / 2.0;
    let delta = 1e-6 * b;
    assert_relative_eq!(lambda0_d5(b + delta) / delta, 1.0 / 3.0, max_relative = 5e-3);

    let c4 = solver(Dimension::FOUR).scaling_constants().unwrap().c_d;
    assert_relative_eq!(c4, 1.0, max_relative = 1e-8);
}

#[test]
fn d3_eigenfunction_matches_closed_form() {
    let s = solver(Dimension::THREE);
    let beta = 2.0;
    let ef = s.eigenfunction(beta).unwrap();
    let l = lambda0_d3(beta);
    assert_relative_eq!(ef.lambda0, l, max_relative = 1e-9);
    let (k, kappa) = ((2.0 * (beta - l)).sqrt(), (2.0 * l).sqrt());
    let shape = |r: f64| {
        if r == 0.0 {
            k
        } else if r <= 1.0 {
            (k * r).sin() / r
        } else {
            k.sin() * (-kappa * (r - 1.0)).exp() / r
        }
    };
    let psi0 = s.eigenfunction_at(&ef, 0.0);
    for r in [0.25, 0.5, 0.9, 1.5, 3.0, 6.0] {
        assert_relative_eq!(s.eigenfunction_at(&ef, r) / psi0, shape(r) / shape(0.0), max_relative = 1e-8);
    }
    // Unit L² norm: 4π ∫ (A·shape)² r² dr = 1.
    let gl = GaussLegendre::new(40);
    let inside = gl.integrate(0.0, 1.0, |r| (shape(r) * r).powi(2));
    let outside = k.sin().powi(2) / (2.0 * kappa);
    let a = psi0 / shape(0.0);
    assert_relative_eq!(4.0 * PI * a * a * (inside + outside), 1.0, max_relative = 1e-8);
}

/// φ_β(0) = 1/cos q − 1 with q = √(2β) for the d = 3 well.
#[test]
fn subcritical_corrector_matches_closed_form() {
    let s = solver(Dimension::THREE);
    for frac in [0.5, 0.9, 0.99] {
        let beta = frac * PI * PI / 8.0;
        let q = (2.0 * beta).sqrt();
        let phi = s.phi_beta(beta).unwrap();
        assert_relative_eq!(s.phi_at(&phi, 0.0), 1.0 / q.cos() - 1.0, max_relative = 1e-8);
        // Outside the well φ = B/r with B = tan q / q − 1.
        assert_relative_eq!(s.phi_at(&phi, 2.0), (q.tan() / q - 1.0) / 2.0, max_relative = 1e-8);
    }
    assert!(s.phi_beta(PI * PI / 8.0).is_err());
}

#[test]
fn solve_summary_serializes() {
    let s = solver(Dimension::THREE);
    let sol = s.solve(&[2.0, 3.0], vec![0.0, 0.5, 1.0, 2.0]).unwrap();
    assert_eq!(sol.lambda0_table.len(), 2);
    let psi = sol.psi_grid.as_ref().unwrap();
    assert!(psi.value.windows(2).all(|w| w[1] < w[0]));
    let json = serde_json::to_value(&sol).unwrap();
    assert!(json["beta_cr"].as_f64().unwrap() > 1.23);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda0_increasing_in_beta(b in 1.3f64..6.0, step in 0.05f64..1.0) {
        let s = solver(Dimension::THREE);
        prop_assert!(s.lambda0(b + step).unwrap() > s.lambda0(b).unwrap());
    }

    #[test]
    fn principal_eigenvector_is_positive(lambda in 0.0f64..3.0, d in 3u32..=5) {
        let s = BirmanSchwinger::new(well(Dimension::new(d).unwrap()), Resolution::new(24)).unwrap();
        let (mu, h) = s.principal(lambda).unwrap();
        prop_assert!(mu > 0.0);
        prop_assert!(h.iter().all(|&x| x > 0.0) || h.iter().all(|&x| x < 0.0));
    }

    #[test]
    fn bump_critical_coupling_exceeds_well(radius in 0.5f64..2.0) {
        let d = Dimension::THREE;
        let w = RadialPotential::new(d, Profile::Well, radius, 1.0).unwrap();
        let b = RadialPotential::new(d, Profile::Bump, radius, 1.0).unwrap();
        let res = Resolution::new(24);
        prop_assert!(critical_beta(&b, res).unwrap().value > critical_beta(&w, res).unwrap().value);
    }
}
