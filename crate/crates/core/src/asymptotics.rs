//! Closed-form approximations: the convolution kernel that turns the free
//! packet into the small-`α` density, and the Gaussian large-`α` density.
//!
//! Positions here are dimensionless, `X = x/σ`, and `τ = vt/σ`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::density::{DensityMethod, DensityProfile, UniformGrid};
use crate::model::PhysicalParams;
use crate::quadrature::{integrate_composite, Refinement, MAX_NODES};
use crate::specfun::{bessel_j0, bessel_j1, bessel_k1, hankel2_1};
use crate::{Error, Real, Result};

// e^{-36} is below 1e-15.
const WINDOW: f64 = 12.0;

fn check_kernel_args<T: Real>(x: T, t: T, params: &PhysicalParams<T>) -> Result<()> {
    if !(params.alpha() > T::zero()) {
        return Err(Error::param("alpha", "kernel needs alpha > 0"));
    }
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::param("t", format!("kernel needs t > 0, got {t}")));
    }
    if x == T::zero() || !x.is_finite() {
        return Err(Error::param("X", "kernel is singular at X = 0"));
    }
    Ok(())
}

/// `f(X) = (1/2π)∫₀^∞ exp(i(kX − α²τ/(4k))) dk`.
///
/// For `X < 0` this is `−(α/4)√(τ/|X|) H₁⁽²⁾(α√(τ|X|))`; for `X > 0` the
/// same integral gives `(iα/2π)√(τ/X) K₁(α√(τX))`, which decays
/// exponentially instead of oscillating.
pub fn kernel_f<T: Real>(x: T, t: T, params: &PhysicalParams<T>) -> Result<Complex<T>> {
    check_kernel_args(x, t, params)?;
    let alpha = params.alpha();
    let tau = params.tau(t);
    let z = alpha * (tau * x.abs()).sqrt();
    let pre = (tau / x.abs()).sqrt();
    if x < T::zero() {
        Ok(hankel2_1(z)? * (-alpha / T::lit(4.0) * pre))
    } else {
        let k = bessel_k1(z)?;
        Ok(Complex::new(T::zero(), alpha / T::TAU() * pre * k))
    }
}

/// Which approximation of the full kernel `F` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelForm {
    /// `f(X) − f(X + τ/2)`.
    #[default]
    TwoTerm,
    /// `f(X)` alone.
    FOnly,
}

/// Approximate kernel `F(X, t)`; see [`KernelForm`].
#[allow(non_snake_case)]
pub fn kernel_F<T: Real>(x: T, t: T, params: &PhysicalParams<T>, form: KernelForm) -> Result<Complex<T>> {
    let first = kernel_f(x, t, params)?;
    match form {
        KernelForm::FOnly => Ok(first),
        KernelForm::TwoTerm => {
            let shifted = x + params.tau(t) / T::lit(2.0);
            Ok(first - kernel_f(shifted, t, params)?)
        }
    }
}

/// Regular part of the real-space kernel that acts on the forward-moving
/// component: `−(α/2)√(τ/|X|) J₁(α√(τ|X|))` behind the packet (`X < 0`),
/// zero ahead of it.  The full kernel is this plus `δ(X)`.
pub fn kernel_wake<T: Real>(x: T, t: T, params: &PhysicalParams<T>) -> T {
    let alpha = params.alpha();
    let tau = params.tau(t);
    if x > T::zero() {
        return T::zero();
    }
    let a = alpha * tau.sqrt();
    if x == T::zero() {
        return -a * a / T::lit(4.0);
    }
    let u = (-x).sqrt();
    -a / (T::lit(2.0) * u) * bessel_j1(a * u)
}

/// The two evaluations offered by [`density_small_alpha_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmallAlphaForm {
    /// Free packet convolved with `δ + wake`, separately for both moving
    /// components: `P = |ψ₊(X)|² + |ψ₊(−X)|²`.
    #[default]
    CausalWake,
    /// `(α²/(16(2π)^{3/2})) |∫ e^{−¼(X−X′−τ/2)²} H₁⁽²⁾(α√(τ|X′|)) dX′|²`.
    SingleHankel,
}

impl SmallAlphaForm {
    fn method(self) -> DensityMethod {
        match self {
            SmallAlphaForm::CausalWake => DensityMethod::SmallAlphaHankel,
            SmallAlphaForm::SingleHankel => DensityMethod::SmallAlphaSingleHankel,
        }
    }
}

/// Small-`α` density, accurate for `α ≲ 0.3`.
pub fn density_small_alpha<T: Real>(grid: &UniformGrid<T>, t: T, params: &PhysicalParams<T>) -> Result<DensityProfile<T>> {
    density_small_alpha_with(grid, t, params, SmallAlphaForm::CausalWake)
}

pub fn density_small_alpha_with<T: Real>(
    grid: &UniformGrid<T>,
    t: T,
    params: &PhysicalParams<T>,
    form: SmallAlphaForm,
) -> Result<DensityProfile<T>> {
    if !(params.alpha() > T::zero()) {
        return Err(Error::param("alpha", "small-alpha density needs alpha > 0"));
    }
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::param("t", format!("must be positive and finite, got {t}")));
    }
    let sigma = params.sigma();
    let tau = params.tau(t);
    let a = params.alpha() * tau.sqrt();
    let values: Vec<T> = (0..grid.len)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i) / sigma;
            match form {
                SmallAlphaForm::CausalWake => {
                    let ahead = forward_amplitude(x, tau, a)?;
                    let behind = forward_amplitude(-x, tau, a)?;
                    let norm = T::lit(2.0).powf(T::lit(1.5)) * T::PI().sqrt() * sigma;
                    Ok((ahead * ahead + behind * behind) / norm)
                }
                SmallAlphaForm::SingleHankel => {
                    let mut g = Complex::new(T::zero(), T::zero());
                    for sgn in [T::one(), -T::one()] {
                        g = g + hankel_convolution(x, tau, a, sgn)?;
                    }
                    let pre = params.alpha() * params.alpha() / (T::lit(16.0) * T::TAU().powf(T::lit(1.5)));
                    Ok(pre * g.norm_sqr() / sigma)
                }
            }
        })
        .collect::<Result<_>>()?;
    DensityProfile::new(*grid, values, t, params, form.method())
}

/// Range of `u ≥ 0` where the window `e^{−¼(u² − c)²}` is not negligible.
fn window_range<T: Real>(center: T) -> Option<(T, T)> {
    let w = T::lit(WINDOW);
    if center + w <= T::zero() {
        return None;
    }
    let lo = (center - w).max(T::zero()).sqrt();
    Some((lo, (center + w).sqrt()))
}

fn panels_for<T: Real>(lo: T, hi: T, a: T) -> usize {
    let osc = (a * (hi - lo) / T::PI()).ceil().f64() as usize;
    let window = (hi * hi - lo * lo).ceil().f64() as usize;
    8 + osc + window
}

fn integrate_window<T, V, F>(f: F, lo: T, hi: T, a: T, op: &'static str) -> Result<V>
where
    T: Real,
    V: crate::quadrature::QuadValue<T>,
    F: Fn(T) -> V + Sync,
{
    let refine = Refinement {
        initial_panels: panels_for(lo, hi, a),
        abs_tol: T::lit(1e-12),
        rel_tol: T::lit(1e-10),
        max_nodes: MAX_NODES,
    };
    let res = integrate_composite(f, lo, hi, &refine);
    if !res.converged {
        return Err(Error::numerical(op, format!("no convergence (estimated error {:e})", res.est_error)));
    }
    Ok(res.value)
}

/// Real amplitude of the forward-moving component, up to the factor
/// `(2^{3/4} π^{1/4} σ^{1/2})^{-1}`.  With `X′ = −u²` the wake integral
/// `∫ e^{−¼(X−X′−τ/2)²} W(X′) dX′` becomes `∫₀^∞ e^{−¼(X+u²−τ/2)²}(−a J₁(au)) du`.
fn forward_amplitude<T: Real>(x: T, tau: T, a: T) -> Result<T> {
    let shift = x - tau / T::lit(2.0);
    let direct = (-shift * shift / T::lit(4.0)).exp();
    let Some((lo, hi)) = window_range(-shift) else {
        return Ok(direct);
    };
    let wake = integrate_window(
        |u: T| {
            let d = shift + u * u;
            -(-d * d / T::lit(4.0)).exp() * a * bessel_j1(a * u)
        },
        lo,
        hi,
        a,
        "density_small_alpha",
    )?;
    Ok(direct + wake)
}

/// `∫ e^{−¼(X − X′ − τ/2)²} H₁⁽²⁾(α√(τ|X′|)) dX′` over one sign of `X′`,
/// with `X′ = sgn·u²` so that `H₁⁽²⁾(au)·2u` stays bounded at `u = 0`.
fn hankel_convolution<T: Real>(x: T, tau: T, a: T, sgn: T) -> Result<Complex<T>> {
    let shift = x - tau / T::lit(2.0);
    let Some((lo, hi)) = window_range(sgn * shift) else {
        return Ok(Complex::new(T::zero(), T::zero()));
    };
    let value: Complex<T> = integrate_window(
        |u: T| {
            if u <= T::zero() {
                // H₁⁽²⁾(au)·2u → 4i/(πa).
                return Complex::new(T::zero(), T::lit(4.0) / (T::PI() * a));
            }
            let d = shift - sgn * u * u;
            let h = hankel2_1(a * u).unwrap_or(Complex::new(T::nan(), T::nan()));
            h * ((-d * d / T::lit(4.0)).exp() * T::lit(2.0) * u)
        },
        lo,
        hi,
        a,
        "density_small_alpha",
    )?;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::numerical("density_small_alpha", "Hankel function evaluation failed"));
    }
    Ok(value)
}

/// Positions of the wake minima behind the forward front,
/// `x_k = σ(τ/2 − (j_{1,k}/(α√τ))²)`, for the first `count` zeros of `J₁`.
pub fn satellite_minima<T: Real>(t: T, params: &PhysicalParams<T>, count: usize) -> Vec<T> {
    let tau = params.tau(t);
    let a = params.alpha() * tau.sqrt();
    bessel_j1_zeros::<T>(count)
        .into_iter()
        .map(|z| params.sigma() * (tau / T::lit(2.0) - (z / a) * (z / a)))
        .collect()
}

/// Positive zeros of `J₁` by Newton from McMahon's estimate.
pub fn bessel_j1_zeros<T: Real>(count: usize) -> Vec<T> {
    (1..=count)
        .map(|k| {
            let beta = (T::from_usize_lossy(k) + T::lit(0.25)) * T::PI();
            let mut z = beta - T::lit(3.0) / (T::lit(8.0) * beta);
            for _ in 0..50 {
                let j1 = bessel_j1(z);
                let dj1 = bessel_j0(z) - j1 / z;
                let step = j1 / dj1;
                z = z - step;
                if step.abs() <= T::epsilon() * z * T::lit(4.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

/// `Δ(t) = σ √(1 + (v²t/(4σ²ω))²)`.
pub fn large_alpha_width<T: Real>(t: T, params: &PhysicalParams<T>) -> Result<T> {
    if !(params.omega() > T::zero()) {
        return Err(Error::param("omega", "large-alpha width needs omega > 0"));
    }
    let s = params.sigma();
    let r = params.v() * params.v() * t / (T::lit(4.0) * s * s * params.omega());
    Ok(s * (T::one() + r * r).sqrt())
}

/// Gaussian density of width [`large_alpha_width`], accurate for `α ≳ 3`.
pub fn density_large_alpha<T: Real>(grid: &UniformGrid<T>, t: T, params: &PhysicalParams<T>) -> Result<DensityProfile<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::param("t", format!("must be non-negative and finite, got {t}")));
    }
    let width = large_alpha_width(t, params)?;
    let norm = T::one() / (T::TAU().sqrt() * width);
    let values = grid
        .points()
        .into_iter()
        .map(|x| norm * (-x * x / (T::lit(2.0) * width * width)).exp())
        .collect();
    DensityProfile::new(*grid, values, t, params, DensityMethod::LargeAlphaGaussian)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j1_zeros_are_zeros() {
        let zeros = bessel_j1_zeros::<f64>(5);
        assert!((zeros[0] - 3.831_705_970_207_512).abs() < 1e-12);
        for z in zeros {
            assert!(bessel_j1(z).abs() < 1e-13);
        }
    }

    #[test]
    fn width_starts_at_sigma() {
        let params = crate::model::make_params(5.0, 1.0, 2.0).unwrap();
        assert_eq!(large_alpha_width(0.0, &params).unwrap(), 2.0);
    }

    #[test]
    fn wake_is_continuous_at_the_origin() {
        let params = PhysicalParams::<f64>::from_alpha(0.1).unwrap();
        let at0 = kernel_wake(0.0, 20.0, &params);
        let near = kernel_wake(-1e-10, 20.0, &params);
        assert!((at0 - near).abs() < 1e-9);
        assert_eq!(kernel_wake(1.0, 20.0, &params), 0.0);
    }

    #[test]
    fn kernel_rejects_origin() {
        let params = PhysicalParams::<f64>::from_alpha(0.1).unwrap();
        assert!(kernel_f(0.0, 1.0, &params).is_err());
    }
}
