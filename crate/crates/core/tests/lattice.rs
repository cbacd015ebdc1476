use std::f64::consts::FRAC_1_SQRT_2;

use proptest::prelude::*;
use spinwalk::lattice::{continuum_comparison, kolmogorov_distance, LatticeState};
use spinwalk::model::{canonical_spin_state, SpinLabel};
use spinwalk::{Complex64, Params};

/// Brute-force walk on a dense array: shift the `+` component
/// right and the `−` component left, then apply `(1/√2)[[1, −1], [1, 1]]`.
fn reference_walk(coin: [Complex64; 2], steps: usize) -> Vec<f64> {
    let width = 2 * steps + 1;
    let mut plus = vec![Complex64::new(0.0, 0.0); width];
    let mut minus = plus.clone();
    plus[steps] = coin[0];
    minus[steps] = coin[1];
    for _ in 0..steps {
        let mut np = vec![Complex64::new(0.0, 0.0); width];
        let mut nm = np.clone();
        for k in 0..width {
            if k + 1 < width {
                np[k + 1] = plus[k];
            }
            if k > 0 {
                nm[k - 1] = minus[k];
            }
        }
        for k in 0..width {
            let (a, b) = (np[k], nm[k]);
            plus[k] = (a - b) * FRAC_1_SQRT_2;
            minus[k] = (a + b) * FRAC_1_SQRT_2;
        }
    }
    plus.iter().zip(&minus).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
}

fn symmetric_coin() -> [Complex64; 2] {
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, FRAC_1_SQRT_2)]
}

#[test]
fn matches_reference_walk() {
    for coin in [symmetric_coin(), [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]] {
        let mut walk = LatticeState::at_origin(coin).unwrap();
        walk.advance(60);
        let dist = walk.position_distribution();
        let reference = reference_walk(coin, 60);
        for (k, want) in reference.iter().enumerate() {
            let n = k as i64 - 60;
            assert!((dist.prob(n) - want).abs() < 1e-14, "site {n}");
        }
    }
}

#[test]
fn single_step_and_support() {
    let mut walk = LatticeState::at_origin([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    assert_eq!(walk.position_distribution().prob(0), 1.0);
    walk.step();
    let [a, b] = walk.amplitude(1);
    assert!((a.re - FRAC_1_SQRT_2).abs() < 1e-15 && (b.re - FRAC_1_SQRT_2).abs() < 1e-15);
    assert!((walk.norm_sqr() - 1.0).abs() < 1e-15);
    walk.advance(29);
    let dist = walk.position_distribution();
    for k in 0..dist.probs.len() {
        if dist.site(k).abs() > 30 {
            assert_eq!(dist.probs[k], 0.0);
        }
    }
}

#[test]
fn symmetric_coin_after_one_hundred_steps() {
    let mut walk = LatticeState::<f64>::symmetric();
    walk.advance(100);
    let dist = walk.position_distribution();
    assert!(dist.asymmetry() < 1e-10);
    assert!(dist.mean().abs() < 1e-10);
    assert!((dist.total() - 1.0).abs() < 1e-12);
    let peak = dist.right_peak().unwrap();
    assert!((60..=75).contains(&peak), "peak at {peak}");
}

#[test]
fn long_walk_stays_unitary_and_ballistic() {
    let mut walk = LatticeState::<f64>::symmetric();
    walk.advance(2000);
    let early = walk.position_distribution().std_dev() / 2000.0;
    walk.advance(2000);
    let late = walk.position_distribution().std_dev() / 4000.0;
    assert!((late / early - 1.0).abs() < 0.01, "{early} vs {late}");
    walk.advance(6000);
    assert!((walk.norm_sqr() - 1.0).abs() < 1e-9);
}

#[test]
fn polarised_coin_is_lopsided() {
    let mut walk = LatticeState::at_origin([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    walk.advance(100);
    assert!(walk.position_distribution().asymmetry() > 1e-3);
}

#[test]
fn distance_of_identical_distributions() {
    let p = [0.1f64, 0.2, 0.3, 0.4];
    assert_eq!(kolmogorov_distance(&p, &p).unwrap(), 0.0);
    assert!((kolmogorov_distance(&[1.0f64, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn continuum_side_does_not_depend_on_step_count() {
    let p = Params::from_alpha(0.02).unwrap();
    let state = canonical_spin_state(SpinLabel::YPlus, 1, None).unwrap();
    let t = 200.0;
    let coarse = continuum_comparison(100, t, &p, &state).unwrap();
    let fine = continuum_comparison(200, t, &p, &state).unwrap();
    assert_eq!(coarse.continuum_front_speed, fine.continuum_front_speed);
    assert!((fine.dt - coarse.dt / 2.0).abs() < 1e-15);
    // The Hadamard front runs at 1/√2 of the hop speed, the slowly precessing
    // continuum front at one half.
    assert!((fine.lattice_front_speed - FRAC_1_SQRT_2).abs() < 0.05);
    assert!((fine.continuum_front_speed - 0.5).abs() < 0.05);
    assert!(fine.kolmogorov > 0.0 && fine.kolmogorov < 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norm_is_conserved(re in -1.0f64..1.0, im in -1.0f64..1.0, phase in 0.0f64..6.3, steps in 1usize..300) {
        let r = (re * re + im * im).sqrt().max(1e-3);
        let (a, b) = (Complex64::new(re, im) / r * FRAC_1_SQRT_2, Complex64::from_polar(FRAC_1_SQRT_2, phase));
        let mut walk = LatticeState::at_origin([a, b]).unwrap();
        walk.advance(steps);
        prop_assert!((walk.norm_sqr() - 1.0).abs() < 1e-12);
        let dist = walk.position_distribution();
        prop_assert!((dist.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn only_the_symmetric_coin_is_even(phase in 0.0f64..6.28) {
        let coin = [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::from_polar(FRAC_1_SQRT_2, phase)];
        let mut walk = LatticeState::at_origin(coin).unwrap();
        walk.advance(100);
        let even = walk.position_distribution().asymmetry() < 1e-10;
        let symmetric = (phase - std::f64::consts::FRAC_PI_2).abs() < 1e-9;
        prop_assert_eq!(even, symmetric);
    }
}
