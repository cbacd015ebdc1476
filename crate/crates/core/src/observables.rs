//! Spin and position expectation values for a packet prepared in a `J_z`
//! eigenstate `|M⟩`.
//!
//! Every observable is an average over the Gaussian momentum distribution
//! (see [`crate::moments`]).  Dimensionless variables: `ξ = σp`,
//! `s = √(α² + ξ²)` (so that `Ω = vs/σ`) and `τ = vt/σ = ωt/α`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{mixing, PhysicalParams};
use crate::moments::{gaussian_average, MomentTolerance};
use crate::specfun::erfcx;
use crate::{Error, Real, Result};

/// Precession vectors `e_u(p, t)` and their time integrals `T_u(p, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecessionVectors<T> {
    pub e_x: T,
    pub e_y: T,
    pub e_z: T,
    pub t_x: T,
    pub t_y: T,
    pub t_z: T,
}

/// Heisenberg-picture `J_z(t) = e_x J_x + e_y J_y + e_z J_z`; the position
/// operator picks up `v(T_x J_x + T_y J_y + T_z J_z)`.
pub fn precession_vectors<T: Real>(p: T, t: T, params: &PhysicalParams<T>) -> PrecessionVectors<T> {
    let mix = mixing(p, params);
    if mix.degenerate {
        return PrecessionVectors {
            e_x: T::zero(),
            e_y: T::zero(),
            e_z: T::one(),
            t_x: T::zero(),
            t_y: T::zero(),
            t_z: t,
        };
    }
    let (c, s) = (mix.cos_theta, mix.sin_theta);
    let big = mix.big_omega;
    let (sin_wt, cos_wt) = (big * t).sin_cos();
    let half = (big * t / T::lit(2.0)).sin();
    let one_minus_cos = T::lit(2.0) * half * half;
    PrecessionVectors {
        e_x: -s * sin_wt,
        e_y: s * c * one_minus_cos,
        e_z: c * c + s * s * cos_wt,
        t_x: -s * one_minus_cos / big,
        t_y: s * c * (t - sin_wt / big),
        t_z: c * c * t + s * s * sin_wt / big,
    }
}

/// Sampled function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub label: String,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(label: impl Into<String>, times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::param("series", "times and values differ in length"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("series", "times must be strictly increasing"));
        }
        Ok(Self {
            times,
            values,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn c<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

fn tol<T: Real>() -> MomentTolerance<T> {
    MomentTolerance::observables()
}

/// Long-time average `η̄(α) = 1 − √(2π) α e^{2α²}(1 − Φ(√2 α))`.
pub fn eta_bar<T: Real>(alpha: T) -> T {
    if alpha == T::zero() {
        return T::one();
    }
    let z = T::SQRT_2() * alpha;
    T::one() - T::TAU().sqrt() * alpha * erfcx(z)
}

/// `⟨cos²θ⟩ = ⟨ξ²/s²⟩` by quadrature; equals [`eta_bar`].
pub fn eta_bar_quadrature<T: Real>(alpha: T) -> Result<T> {
    Ok(gaussian_average(alpha, T::zero(), |xi, s| xi * xi / (s * s), tol())?.re)
}

/// Evaluates `η(t) = ⟨J_z⟩(t)/⟨J_z⟩(0)` repeatedly at one `α`.
#[derive(Debug, Clone, Copy)]
pub struct Eta<T> {
    alpha: T,
    static_part: T,
}

impl<T: Real> Eta<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha >= T::zero()) || !alpha.is_finite() {
            return Err(Error::param("alpha", format!("must be non-negative and finite, got {alpha}")));
        }
        let static_part = if alpha == T::zero() {
            T::one()
        } else {
            eta_bar_quadrature(alpha)?
        };
        Ok(Self { alpha, static_part })
    }

    /// `η` at precession phase `ωt`.
    pub fn at(&self, omega_t: T) -> Result<T> {
        if self.alpha == T::zero() || omega_t == T::zero() {
            return Ok(T::one());
        }
        let alpha = self.alpha;
        let a2 = c(alpha * alpha);
        let tau = omega_t.abs() / alpha;
        let osc = gaussian_average(alpha, tau, |_, s| a2 / (s * s), tol())?;
        Ok(self.static_part + osc.re)
    }
}

/// `η(t) = √(2/π) ∫ e^{-2ξ²} (ξ² + α² cos(sτ))/s² dξ` at phase `ωt`.
pub fn eta<T: Real>(omega_t: T, alpha: T) -> Result<T> {
    Eta::new(alpha)?.at(omega_t)
}

/// `η` over many phases, evaluated in parallel.
pub fn eta_series<T: Real>(alpha: T, omega_ts: &[T]) -> Result<Vec<T>> {
    let eval = Eta::new(alpha)?;
    omega_ts.par_iter().map(|&wt| eval.at(wt)).collect()
}

/// Saddle-point form `η̄ + (2α/√(ωt)) cos(ωt + π/4)`, meaningful for
/// `ωt ≳ 20`.
pub fn eta_asymptotic<T: Real>(omega_t: T, alpha: T) -> T {
    if alpha == T::zero() {
        return T::one();
    }
    eta_bar(alpha) + T::lit(2.0) * alpha / omega_t.sqrt() * (omega_t + T::FRAC_PI_4()).cos()
}

fn check_m(twice_j: u32, twice_m: i32) -> Result<()> {
    if twice_j == 0 {
        return Err(Error::param("j", "spin must be at least 1/2"));
    }
    let tj = twice_j as i32;
    if twice_m.abs() > tj || (twice_m - tj) % 2 != 0 {
        return Err(Error::param("m", format!("2M = {twice_m} is not valid for 2J = {twice_j}")));
    }
    Ok(())
}

/// `⟨x⟩(t)` for the initial state `ψ(x) ⊗ |M⟩`, `M = twice_m / 2`:
/// `Mvt [η̄ + (1/τ) ⟨α² sin(sτ)/s³⟩]`.
pub fn mean_x<T: Real>(t: T, twice_m: i32, params: &PhysicalParams<T>) -> Result<T> {
    let m = T::from_i32(twice_m).unwrap() / T::lit(2.0);
    let alpha = params.alpha();
    let tau = params.tau(t);
    if alpha == T::zero() || t == T::zero() {
        return Ok(m * params.v() * t);
    }
    let drift = eta_bar_quadrature(alpha)?;
    let a2 = c(alpha * alpha);
    let osc = gaussian_average(alpha, tau.abs(), |_, s| a2 / (s * s * s), tol())?;
    Ok(m * params.v() * t * (drift + osc.im / tau.abs()))
}

/// Asymptotic `Mvt [η̄ + 2α (ωt)^{-3/2} sin(ωt + π/4)]`.
pub fn mean_x_asymptotic<T: Real>(t: T, twice_m: i32, params: &PhysicalParams<T>) -> T {
    let m = T::from_i32(twice_m).unwrap() / T::lit(2.0);
    let alpha = params.alpha();
    let wt = params.omega_t(t);
    if alpha == T::zero() {
        return m * params.v() * t;
    }
    m * params.v() * t * (eta_bar(alpha) + T::lit(2.0) * alpha / wt.powf(T::lit(1.5)) * (wt + T::FRAC_PI_4()).sin())
}

/// `Δx²(t)` for the initial state `ψ(x) ⊗ |M⟩` of spin `J`:
/// `σ² + v² [½(J(J+1) − M²) ⟨T_x² + T_y²⟩ + M² (⟨T_z²⟩ − ⟨T_z⟩²)]`.
pub fn variance_x<T: Real>(t: T, twice_j: u32, twice_m: i32, params: &PhysicalParams<T>) -> Result<T> {
    check_m(twice_j, twice_m)?;
    let sigma2 = params.sigma() * params.sigma();
    let alpha = params.alpha();
    if t == T::zero() || alpha == T::zero() {
        return Ok(sigma2);
    }
    let j = T::from_u32(twice_j).unwrap() / T::lit(2.0);
    let m = T::from_i32(twice_m).unwrap() / T::lit(2.0);
    let transverse = T::lit(0.5) * (j * (j + T::one()) - m * m);
    let tau = params.tau(t).abs();
    let (tc, a2, a4) = (c(tau), c(alpha * alpha), c(alpha.powi(4)));
    let half = c(T::lit(0.5));
    let i = Complex::new(T::zero(), T::one());
    let avg = |nu: T, f: &(dyn Fn(Complex<T>, Complex<T>) -> Complex<T> + Sync)| gaussian_average(alpha, nu, f, tol());

    // (vT_x/σ)² + (vT_y/σ)², grouped by frequency 0, τ and 2τ.
    let xy0 = avg(T::zero(), &|xi, s| {
        let s2 = s * s;
        a2 * (c(T::lit(1.5)) + xi * xi * tc * tc + half * xi * xi / s2) / (s2 * s2)
    })?
    .re;
    let xy1 = avg(tau, &|xi, s| {
        let s4 = s * s * s * s;
        c(T::lit(-2.0)) * a2 / s4 + i * c(T::lit(2.0)) * a2 * xi * xi * tc / (s4 * s)
    })?
    .re;
    let xy2 = avg(tau + tau, &|xi, s| {
        let s2 = s * s;
        half * a2 * (c(T::one()) - xi * xi / s2) / (s2 * s2)
    })?
    .re;

    // vT_z/σ = ξ²τ/s² + α² sin(sτ)/s³
    let z_mean = avg(T::zero(), &|xi, s| xi * xi * tc / (s * s))?.re + avg(tau, &|_, s| a2 / (s * s * s))?.im;
    let z2_static = avg(T::zero(), &|xi, s| {
        let s2 = s * s;
        xi * xi * xi * xi * tc * tc / (s2 * s2) + half * a4 / (s2 * s2 * s2)
    })?
    .re;
    let z2_1 = avg(tau, &|xi, s| c(T::lit(2.0)) * a2 * xi * xi * tc / (s * s * s * s * s))?.im;
    let z2_2 = avg(tau + tau, &|_, s| -half * a4 / (s * s * s * s * s * s))?.re;
    let z_var = z2_static + z2_1 + z2_2 - z_mean * z_mean;

    Ok(sigma2 * (T::one() + transverse * (xy0 + xy1 + xy2) + m * m * z_var))
}

/// `⟨cos⁴θ⟩ = ⟨ξ⁴/s⁴⟩` by quadrature.
pub fn cos4_average<T: Real>(alpha: T) -> Result<T> {
    Ok(gaussian_average(alpha, T::zero(), |xi, s| (xi * xi / (s * s)).powi(2), tol())?.re)
}

/// `V(α) = ½ ⟨cos⁴θ⟩^{1/2}`.
pub fn spread_velocity<T: Real>(alpha: T) -> Result<T> {
    Ok(T::lit(0.5) * cos4_average(alpha)?.sqrt())
}

/// Long-time `Δx/(vt)` of a spin-½ packet with `⟨x⟩ = 0`, such as the
/// `J_y` eigenstate: `(J·T)² = |T|²/4` for spin ½ and `|T|²/t² → cos²θ`,
/// so the slope is `½ ⟨cos²θ⟩^{1/2} = ½ η̄^{1/2}`.
pub fn ballistic_slope_half<T: Real>(alpha: T) -> T {
    T::lit(0.5) * eta_bar(alpha).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precession_at_origin() {
        let params = PhysicalParams::<f64>::from_alpha(0.7).unwrap();
        let pv = precession_vectors(0.3, 0.0, &params);
        assert_eq!((pv.e_x, pv.e_y, pv.e_z), (0.0, 0.0, 1.0));
        assert_eq!((pv.t_x, pv.t_y, pv.t_z), (0.0, 0.0, 0.0));
        let free = PhysicalParams::<f64>::from_alpha(0.0).unwrap();
        let pv = precession_vectors(1.3, 2.5, &free);
        assert_eq!(pv.e_z, 1.0);
        assert!((pv.t_z - 2.5).abs() < 1e-15);
    }

    #[test]
    fn series_rejects_unsorted_times() {
        assert!(TimeSeries::new("x", vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
        assert!(TimeSeries::new("x", vec![0.0, 1.0], vec![0.0; 3]).is_err());
        assert!(TimeSeries::new("x", vec![0.0, 1.0], vec![0.0; 2]).is_ok());
    }

    #[test]
    fn eta_trivial_values() {
        assert_eq!(eta(0.0, 0.8).unwrap(), 1.0);
        assert_eq!(eta(12.0, 0.0).unwrap(), 1.0);
        assert_eq!(eta_bar(0.0f64), 1.0);
        assert_eq!(eta_asymptotic(50.0, 0.0f64), 1.0);
    }

    #[test]
    fn bad_quantum_numbers_are_rejected() {
        let params = PhysicalParams::<f64>::from_alpha(1.0).unwrap();
        assert!(variance_x(1.0, 1, 2, &params).is_err());
        assert!(variance_x(1.0, 2, 1, &params).is_err());
        assert!(variance_x(1.0, 0, 0, &params).is_err());
    }
}
