use std::f64::consts::PI;

use proptest::prelude::*;
use spinwalk::density::density_general;
use spinwalk::model::{canonical_spin_state, SpinLabel};
use spinwalk::observables::{
    eta, eta_bar, eta_bar_quadrature, mean_x, mean_x_asymptotic, spread_velocity, variance_x,
};
use spinwalk::propagator::{evolve, GridConfig};
use spinwalk::Params;

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Direct quadrature of the defining integral over ξ ∈ [−6, 6].
fn eta_oracle(omega_t: f64, alpha: f64) -> f64 {
    let tau = omega_t / alpha;
    let f = |xi: f64| {
        let s2 = alpha * alpha + xi * xi;
        (-2.0 * xi * xi).exp() * (xi * xi + alpha * alpha * (s2.sqrt() * tau).cos()) / s2
    };
    let nodes = 20_000 + (omega_t * 400.0) as usize;
    (2.0 / PI).sqrt() * simpson(f, -6.0, 6.0, nodes)
}

fn erfc_oracle(z: f64) -> f64 {
    // Continued fraction evaluated bottom-up, fine for z ≥ 1.
    let mut f = z;
    for n in (1..400).rev() {
        f = z + n as f64 / 2.0 / f;
    }
    (-z * z).exp() / (PI.sqrt() * f)
}

#[test]
fn eta_examples() {
    assert_eq!(eta(0.0f64, 0.7).unwrap(), 1.0);
    let wt = 0.01f64;
    assert!((eta(wt, 0.5).unwrap() - (1.0 - wt * wt / 2.0)).abs() < 1e-8);
    for (wt, alpha) in [(1.0, 0.3), (5.0, 1.0), (20.0, 3.0), (40.0, 0.5)] {
        let got = eta(wt, alpha).unwrap();
        assert!((got - eta_oracle(wt, alpha)).abs() < 1e-8, "eta({wt}, {alpha}) = {got}");
    }
}

#[test]
fn eta_bar_examples() {
    assert_eq!(eta_bar(0.0f64), 1.0);
    assert!((eta_bar(0.1f64) - (1.0 - (2.0 * PI).sqrt() * 0.1)).abs() < 5e-2);
    // Closed form with an independently evaluated complementary error function.
    let closed = 1.0 - (2.0 * PI).sqrt() * 2f64.exp() * erfc_oracle(2f64.sqrt());
    assert!((eta_bar(1.0f64) - closed).abs() < 1e-12);
    assert!((eta_bar(1.0f64) - 0.15730).abs() < 5e-5);
    assert!((eta_bar(10.0f64) / 2.5e-3 - 1.0).abs() < 0.1);
    for alpha in [0.05f64, 0.5, 1.0, 4.0, 8.0, 20.0] {
        let q = eta_bar_quadrature(alpha).unwrap();
        assert!((q - eta_bar(alpha)).abs() < 1e-9, "alpha = {alpha}");
    }
}

#[test]
fn eta_bar_decreases() {
    let values: Vec<f64> = (0..=200).map(|k| eta_bar(k as f64 * 0.05)).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn eta_matches_spin_expectation_of_evolved_state() {
    let state = canonical_spin_state(SpinLabel::ZPlus, 1, None).unwrap();
    for alpha in [0.3, 1.0, 3.0] {
        let params = Params::from_alpha(alpha).unwrap();
        for wt in [1.0, 5.0, 20.0] {
            let t = wt / params.omega();
            let grid = GridConfig::new(4096, 16.0).unwrap();
            let jz = evolve(&state, t, &grid, &params).unwrap().mean_jz();
            let want = eta(wt, alpha).unwrap();
            assert!((jz / 0.5 - want).abs() < 1e-6, "alpha {alpha}, wt {wt}: {} vs {want}", jz / 0.5);
        }
    }
}

#[test]
fn mean_position_limits() {
    let frozen = Params::from_alpha(0.0).unwrap();
    assert_eq!(mean_x(7.0, 1, &frozen).unwrap(), 3.5);
    assert_eq!(mean_x(7.0, -3, &frozen).unwrap(), -10.5);

    let params = Params::from_alpha(0.6).unwrap();
    let t = 200.0 / params.omega();
    let exact = mean_x(t, 1, &params).unwrap();
    let asym = mean_x_asymptotic(t, 1, &params);
    let drift = 0.5 * t * eta_bar(0.6);
    assert!((exact - asym).abs() < 0.05 * (asym - drift).abs(), "{exact} vs {asym}");
}

#[test]
fn mean_position_matches_evolved_density() {
    let params = Params::from_alpha(0.8).unwrap();
    let state = canonical_spin_state(SpinLabel::ZPlus, 1, None).unwrap();
    let t = 30.0;
    let profile = density_general(&state, t, &GridConfig::for_time(&params, t, 1), &params).unwrap();
    assert!((profile.mean() - mean_x(t, 1, &params).unwrap()).abs() < 1e-6);
}

#[test]
fn variance_limits_and_moment_oracle() {
    let params = Params::from_alpha(1.0).unwrap();
    assert_eq!(variance_x(0.0, 1, 1, &params).unwrap(), 1.0);
    let frozen = Params::from_alpha(0.0).unwrap();
    assert_eq!(variance_x(50.0, 1, 1, &frozen).unwrap(), 1.0);

    for (twice_j, label, twice_m) in [(1, SpinLabel::ZPlus, 1), (2, SpinLabel::ZPlus, 2), (3, SpinLabel::ZMinus, -3)] {
        let state = canonical_spin_state(label, twice_j, None).unwrap();
        for t in [3.0, 25.0, 80.0] {
            let grid = GridConfig::for_time(&params, t, twice_j);
            let profile = density_general(&state, t, &grid, &params).unwrap();
            let want = profile.variance();
            let got = variance_x(t, twice_j, twice_m, &params).unwrap();
            assert!((got / want - 1.0).abs() < 1e-6, "2J={twice_j}, t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn spread_velocity_small_and_zero() {
    assert!((spread_velocity(0.0f64).unwrap() - 0.5).abs() < 1e-8);
    let v10 = spread_velocity(10.0f64).unwrap();
    assert!((v10 / (3f64.sqrt() / 800.0) - 1.0).abs() < 0.1);
    let vs: Vec<f64> = (0..=40).map(|k| spread_velocity(k as f64 * 0.25).unwrap()).collect();
    assert!(vs.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn one_minus_two_eta_bar_floor_holds_for_weak_coupling() {
    let alpha = 0.1f64;
    let floor = 1.0 - 2.0 * eta_bar(alpha);
    for k in 0..=4000 {
        let e = eta(k as f64 * 0.05 * 2.0 * PI, alpha).unwrap();
        assert!(e >= floor - 1e-6 && e <= 1.0 + 1e-9);
    }
}

// η = ⟨cos²θ⟩ + ⟨sin²θ cos Ωt⟩ is bounded below by ⟨cos²θ⟩ − ⟨sin²θ⟩.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eta_stays_in_its_band(alpha in 0.01f64..6.0, wt in 0.0f64..300.0) {
        let e = eta(wt, alpha).unwrap();
        let floor = 2.0 * eta_bar(alpha) - 1.0;
        prop_assert!(e <= 1.0 + 1e-9 && e >= floor - 1e-9, "eta = {}, floor = {}", e, floor);
    }

    #[test]
    fn mean_position_is_bracketed(alpha in 0.02f64..5.0, wt in 0.1f64..300.0) {
        let params = Params::from_alpha(alpha).unwrap();
        let t = wt / params.omega();
        let ratio = mean_x(t, 1, &params).unwrap() / (0.5 * t);
        prop_assert!(ratio <= 1.0 + 1e-9 && ratio >= 2.0 * eta_bar(alpha) - 1.0 - 1e-9);
    }
}
