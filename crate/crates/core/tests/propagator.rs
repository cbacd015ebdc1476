use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use spinwalk::model::{canonical_spin_state, gaussian_packet_momentum, mixing, SpinLabel, SpinState};
use spinwalk::propagator::{evolve, propagator_general, propagator_half, to_position, GridConfig};
use spinwalk::{Complex64, Params};

type C = Complex<f64>;

/// `J_y` and `J_z` for spin `twice_j/2`, basis ascending in `M`, built from
/// the ladder operator.
fn spin_matrices(twice_j: u32) -> (DMatrix<C>, DMatrix<C>) {
    let n = twice_j as usize + 1;
    let j = twice_j as f64 / 2.0;
    let m = |k: usize| k as f64 - j;
    let mut raise = DMatrix::<C>::zeros(n, n);
    for k in 0..n - 1 {
        raise[(k + 1, k)] = C::new((j * (j + 1.0) - m(k) * (m(k) + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let jy = (&raise - &lower) * C::new(0.0, -0.5);
    let jz = DMatrix::from_fn(n, n, |r, c| if r == c { C::new(m(r), 0.0) } else { C::new(0.0, 0.0) });
    (jy, jz)
}

fn hamiltonian(p: f64, twice_j: u32, params: &Params) -> DMatrix<C> {
    let (jy, jz) = spin_matrices(twice_j);
    jy * C::new(params.omega(), 0.0) + jz * C::new(params.v() * p, 0.0)
}

/// `exp(−iHt)` through the Hermitian eigendecomposition.
fn oracle_propagator(p: f64, t: f64, twice_j: u32, params: &Params) -> DMatrix<C> {
    let eig = hamiltonian(p, twice_j, params).symmetric_eigen();
    let phases = DMatrix::from_fn(eig.eigenvalues.len(), eig.eigenvalues.len(), |r, c| {
        if r == c {
            C::from_polar(1.0, -eig.eigenvalues[r] * t)
        } else {
            C::new(0.0, 0.0)
        }
    });
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

fn distance(u: &spinwalk::Unitary, oracle: &DMatrix<C>) -> f64 {
    let n = u.dim();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let a = u.get(r, c);
            let b = oracle[(r, c)];
            worst = worst.max((a.re - b.re).hypot(a.im - b.im));
        }
    }
    worst
}

#[test]
fn identity_at_time_zero() {
    let params = Params::from_alpha(0.7).unwrap();
    for twice_j in 1..=4 {
        let u = propagator_general(1.3, 0.0, twice_j, &params).unwrap();
        // Built from an eigendecomposition, so exact only up to rounding.
        assert!(u.max_distance(&spinwalk::Unitary::identity(twice_j as usize + 1)) < 1e-13);
    }
    assert!(propagator_half(1.3, 0.0, &params).max_distance(&spinwalk::Unitary::identity(2)) < 1e-15);
}

#[test]
fn frozen_spin_is_a_pure_phase() {
    let params = Params::from_alpha(0.0).unwrap();
    let (p, t) = (0.8, 2.5);
    let u = propagator_half(p, t, &params);
    let lo = Complex64::from_polar(1.0, 0.5 * p * t);
    let hi = Complex64::from_polar(1.0, -0.5 * p * t);
    assert!((u.get(0, 0) - lo).norm() < 1e-15);
    assert!((u.get(1, 1) - hi).norm() < 1e-15);
    assert_eq!(u.get(0, 1).norm(), 0.0);
}

#[test]
fn spin_one_generator_spectrum() {
    let params = Params::from_alpha(1.4).unwrap();
    for p in [-2.0, 0.0, 0.3, 5.0] {
        let mut vals: Vec<f64> = hamiltonian(p, 2, &params).symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        let big_omega = mixing(p, &params).big_omega;
        for (got, want) in vals.iter().zip([-big_omega, 0.0, big_omega]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}

#[test]
fn evolve_at_time_zero_copies_the_initial_state() {
    let params = Params::from_alpha(0.5).unwrap();
    let grid = GridConfig::new(1024, 16.0).unwrap();
    let state = canonical_spin_state(SpinLabel::YPlus, 1, None).unwrap();
    let ms = evolve(&state, 0.0, &grid, &params).unwrap();
    for k in 0..grid.n() {
        let phi = gaussian_packet_momentum(grid.momentum(k), 1.0);
        for (m, c) in state.coeffs().iter().enumerate() {
            assert_eq!(ms.at(k)[m], *c * phi);
        }
    }
}

#[test]
fn initial_position_amplitudes_are_gaussian() {
    let params = Params::from_alpha(0.5).unwrap();
    let grid = GridConfig::new(1024, 16.0).unwrap();
    let state = canonical_spin_state(SpinLabel::YPlus, 1, None).unwrap();
    let ms = evolve(&state, 0.0, &grid, &params).unwrap();
    let pos = to_position(&ms);
    let scale = (2.0 * std::f64::consts::PI).sqrt().powf(-0.5);
    for j in 0..grid.n() {
        let x = pos.x(j);
        let envelope = scale * (-x * x / 4.0).exp();
        for (m, c) in state.coeffs().iter().enumerate() {
            assert!((pos.psi[j * 2 + m] - *c * envelope).norm() < 1e-8, "x = {x}");
        }
    }
    assert!((pos.norm() - ms.norm()).abs() < 1e-10);
}

#[test]
fn frozen_spin_keeps_its_momentum_profile_and_drifts() {
    let params = Params::from_alpha(0.0).unwrap();
    let t = 40.0;
    let grid = GridConfig::for_time(&params, t, 1);
    let state = canonical_spin_state(SpinLabel::ZPlus, 1, None).unwrap();
    let ms = evolve(&state, t, &grid, &params).unwrap();
    for k in 0..grid.n() {
        let phi = gaussian_packet_momentum(grid.momentum(k), 1.0);
        assert!((ms.at(k)[1].norm() - phi).abs() < 1e-14);
    }
    let pos = to_position(&ms);
    let density = pos.density();
    let peak = (0..density.len()).max_by(|&a, &b| density[a].total_cmp(&density[b])).unwrap();
    assert!((pos.x(peak) - t / 2.0).abs() <= grid.dx());
}

#[test]
fn spin_one_splits_into_three_packets() {
    let params = Params::from_alpha(0.0).unwrap();
    let t = 30.0;
    let third = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let state = SpinState::new(2, vec![third; 3]).unwrap();
    let grid = GridConfig::for_time(&params, t, 2);
    let profile = spinwalk::density::density_general(&state, t, &grid, &params).unwrap();
    for centre in [-t, 0.0, t] {
        let mass = profile.mass_between(centre - 8.0, centre + 8.0);
        assert!((mass - 1.0 / 3.0).abs() < 1e-6, "packet at {centre}: {mass}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn half_propagator_matches_matrix_exponential(p in -20.0f64..20.0, t in 0.0f64..200.0, alpha in 0.0f64..5.0) {
        let params = Params::from_alpha(alpha).unwrap();
        let u = propagator_half(p, t, &params);
        prop_assert!(u.unitarity_defect() < 1e-14);
        prop_assert!(distance(&u, &oracle_propagator(p, t, 1, &params)) < 1e-12);
    }

    #[test]
    fn general_propagator_matches_matrix_exponential(
        p in -10.0f64..10.0,
        t in 0.0f64..50.0,
        alpha in 0.0f64..3.0,
        twice_j in 1u32..=5,
    ) {
        let params = Params::from_alpha(alpha).unwrap();
        let u = propagator_general(p, t, twice_j, &params).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-12);
        prop_assert!(distance(&u, &oracle_propagator(p, t, twice_j, &params)) < 1e-10);
        if twice_j == 1 {
            prop_assert!(u.max_distance(&propagator_half(p, t, &params)) < 1e-12);
        }
    }

    #[test]
    fn propagators_compose(p in -10.0f64..10.0, t1 in 0.0f64..30.0, t2 in 0.0f64..30.0, alpha in 0.0f64..3.0) {
        let params = Params::from_alpha(alpha).unwrap();
        let joint = propagator_half(p, t1 + t2, &params);
        let split = propagator_half(p, t2, &params).matmul(&propagator_half(p, t1, &params));
        prop_assert!(joint.max_distance(&split) < 1e-12);
    }

    #[test]
    fn mixing_angle_is_on_the_unit_circle(p in -1e3f64..1e3, alpha in 0.0f64..100.0) {
        let params = Params::from_alpha(alpha).unwrap();
        let m = mixing(p, &params);
        prop_assert!((m.cos_theta.powi(2) + m.sin_theta.powi(2) - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evolution_preserves_norm(t in 0.0f64..60.0, alpha in 0.0f64..3.0, twice_j in 1u32..=3) {
        let params = Params::from_alpha(alpha).unwrap();
        let state = canonical_spin_state(SpinLabel::YPlus, twice_j, None).unwrap();
        let grid = GridConfig::for_time(&params, t, twice_j);
        let before = evolve(&state, 0.0, &grid, &params).unwrap().norm();
        let after = evolve(&state, t, &grid, &params).unwrap();
        prop_assert!((after.norm() - before).abs() < 1e-10);
        prop_assert!((to_position(&after).norm() - after.norm()).abs() < 1e-10);
    }
}
