use std::f64::consts::PI;

use approx::assert_relative_eq;
use homopolymer::birman_schwinger::{BirmanSchwinger, Resolution};
use homopolymer::critical_process::{drift_field, g_log_mass, CriticalKernel, Vec3};
use homopolymer::feynman_kac_pde::{grid_critical_beta, Boundary, FeynmanKac, OutputPlan, PdeConfig, RadialGrid, Spacing};
use homopolymer::path_sampler::{endpoint_density, radial_law_masses, sample_paths, SamplerParams};
use homopolymer::{Dimension, RadialPotential};
use proptest::prelude::*;

const D3: Dimension = Dimension::THREE;

/// κψ(0) of the unit well, `1/(4√(2π))`: the origin mass `4πκψ(0)` equals √(π/2).
const KAPPA_PSI0_UNIT_WELL: f64 = 0.099_735_570_100_358_17;

fn kappa_psi0() -> f64 {
    let bs = BirmanSchwinger::new(RadialPotential::unit_well(D3), Resolution::default()).unwrap();
    let gs = bs.ground_state().unwrap();
    bs.kappa(&gs).unwrap() * bs.ground_state_field(&gs, vec![0.0]).value[0]
}

fn kernel() -> CriticalKernel {
    CriticalKernel::new(KAPPA_PSI0_UNIT_WELL)
}

/// Adaptive Simpson on [a, b].
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rule(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn go(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = rule(fa, flm, fm, m - a);
        let right = rule(fm, frm, fb, b - m);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        go(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + go(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    go(f, a, b, fa, fm, fb, rule(fa, fm, fb, b - a), tol, 50)
}

#[test]
fn kappa_psi0_matches_closed_form() {
    assert_relative_eq!(KAPPA_PSI0_UNIT_WELL, 1.0 / (4.0 * (2.0 * PI).sqrt()), max_relative = 1e-15);
    assert_relative_eq!(kappa_psi0(), KAPPA_PSI0_UNIT_WELL, max_relative = 1e-9);
}

/// At criticality `Z_{β_cr,T}(0)/√T` approaches the origin mass `4πκψ(0)`
/// with an O(T^{−1/2}) correction, which one Richardson step removes.
#[test]
fn critical_partition_growth_matches_origin_mass() {
    let v = RadialPotential::unit_well(D3);
    let grid = RadialGrid::stretched(D3, Spacing::new(0.01, 2.0, 1.03, 5.0), 700.0).unwrap();
    let beta = grid_critical_beta(&v, &grid).unwrap();
    let fk = FeynmanKac::new(&v, beta, PdeConfig::new(grid).with_boundary(Boundary::Exterior)).unwrap();
    let z = fk.partition_function(&OutputPlan::new(vec![400.0, 1600.0])).unwrap().series(0).to_vec();
    let extrapolated = 2.0 * z[1] / 40.0 - z[0] / 20.0;
    assert_relative_eq!(extrapolated, 4.0 * PI * kappa_psi0(), max_relative = 1e-3);
}

#[test]
fn log_mass_matches_quadrature_of_kernel() {
    for t in [0.0, 0.5] {
        let tau: f64 = 1.0 - t;
        for r in [0.1, 1.0, 3.0] {
            // 4πρ² times the radial term of p̄, with one factor of ρ cancelled.
            let f = |rho: f64| 4.0 * PI * rho * (2.0 * PI).powf(-1.5) / (r * tau.sqrt()) * (-(r + rho).powi(2) / (2.0 * tau)).exp();
            let excess: f64 = (0..80).map(|k| simpson(&f, 0.5 * k as f64, 0.5 * (k + 1) as f64, 1e-15)).sum();
            let oracle = excess.ln_1p();
            let g = g_log_mass(t, r).unwrap();
            assert!((g - oracle).abs() < 1e-10, "g({t}, {r}) = {g}, quadrature {oracle}");
        }
    }
}

#[test]
fn drift_is_radial_derivative_of_log_mass() {
    let h = 1e-5;
    for t in [0.0, 0.4, 0.9] {
        for r in [0.05, 0.3, 1.0, 2.5] {
            let fd = (g_log_mass(t, r + h).unwrap() - g_log_mass(t, r - h).unwrap()) / (2.0 * h);
            let b = drift_field(t, r).unwrap();
            assert!((fd - b).abs() < 1e-6 * b.abs().max(1e-3), "t = {t}, r = {r}");
        }
    }
}

#[test]
fn drift_is_minus_one_over_r_near_origin() {
    for t in [0.0, 0.5, 0.9] {
        for r in [1e-3, 1e-4, 1e-6] {
            assert!((r * drift_field(t, r).unwrap() + 1.0).abs() < 1e-3, "t = {t}, r = {r}");
        }
    }
}

#[test]
fn transition_density_is_normalized() {
    let k = kernel();
    for (s, t) in [(0.0, 0.2), (0.0, 1.0), (0.4, 0.6), (0.7, 1.0)] {
        for ry in [0.0, 0.05, 0.5, 2.0, 5.0] {
            let n = k.normalization(s, t, ry).unwrap();
            assert!((n - 1.0).abs() < 1e-6, "s = {s}, t = {t}, |y| = {ry}: {n}");
        }
    }
}

#[test]
fn transition_density_approaches_its_value_at_the_final_time() {
    let k = kernel();
    let (y, x): (Vec3, Vec3) = ([0.4, 0.0, 0.3], [-0.2, 0.9, 0.1]);
    let at_one = k.critical_q(0.3, 1.0, &y, &x).unwrap();
    let near = k.critical_q(0.3, 1.0 - 1e-10, &y, &x).unwrap();
    assert!((at_one - near).abs() < 1e-8 * at_one);
}

#[test]
fn chapman_kolmogorov_holds() {
    let k = kernel();
    let points: [Vec3; 3] = [[0.0; 3], [0.6, -0.3, 0.2], [0.0, 1.5, 0.0]];
    for triple in [(0.0, 0.3, 0.7), (0.2, 0.5, 1.0)] {
        for x1 in &points {
            for x3 in &points[1..] {
                let lhs = k.chapman_kolmogorov(triple, x1, x3).unwrap();
                let rhs = k.critical_q(triple.0, triple.2, x1, x3).unwrap();
                assert!((lhs - rhs).abs() < 1e-4, "{triple:?} {x1:?} {x3:?}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn fokker_planck_residual_shrinks_fourfold() {
    let k = kernel();
    let (ts, rs) = ([0.3, 0.6, 0.85], [0.3, 1.0, 2.0]);
    let coarse = k.fokker_planck_residual(0.1, 1.0, &ts, &rs, 1e-3).unwrap();
    let fine = k.fokker_planck_residual(0.1, 1.0, &ts, &rs, 5e-4).unwrap();
    assert!(fine < 1e-3);
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

/// At β_cr, `x(T)/√T` under the polymer measure approaches the law of the
/// limiting process at t = 1, which is `Q(0, 1, 0, ·)`.
#[test]
fn critical_endpoint_histogram_matches_limit_law() {
    let horizon = 20.0;
    let v = RadialPotential::unit_well(D3);
    let e = sample_paths(&v, SamplerParams::new(D3, PI * PI / 8.0, horizon, 1000, 100_000, 1)).unwrap();
    let unit_edges: Vec<f64> = (0..=16).map(|k| 0.25 * k as f64).collect();
    let edges: Vec<f64> = unit_edges.iter().map(|x| x * horizon.sqrt()).collect();
    let hist = endpoint_density(&e, &edges, None).unwrap();
    let k = kernel();
    let law = radial_law_masses(D3, &unit_edges, &[], 1.0, |r| {
        if r == 0.0 {
            0.0
        } else {
            k.critical_q(0.0, 1.0, &[0.0; 3], &[r, 0.0, 0.0]).unwrap()
        }
    })
    .unwrap();
    assert!(law[16].abs() < 1e-3);
    let tv = hist.total_variation(&law).unwrap();
    assert!(tv < 0.07, "TV = {tv}, ESS = {}", hist.ess);
    assert!(hist.ess > 100.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transition_density_nonnegative(s in 0.0f64..0.9, dt in 0.01f64..0.1, y in prop::array::uniform3(-3.0f64..3.0), x in prop::array::uniform3(-3.0f64..3.0)) {
        let t = (s + dt).min(1.0);
        prop_assert!(kernel().critical_q(s, t, &y, &x).unwrap() >= 0.0);
    }

    #[test]
    fn log_mass_decreases_in_radius(t in 0.0f64..0.99, r in 0.01f64..5.0) {
        let a = g_log_mass(t, r).unwrap();
        prop_assert!(a > 0.0 || a == 0.0 && r > 1.0);
        prop_assert!(g_log_mass(t, r * 1.1).unwrap() <= a);
    }
}
