//! Averages over the Gaussian momentum distribution of the initial packet,
//! `⟨A⟩ = √(2/π) ∫ e^{-2ξ²} A(ξ) dξ`, with `ξ = σp` and `s = √(α² + ξ²)`.
//!
//! Oscillating factors `e^{iνs}` are handled by moving the half-line
//! `ξ ∈ [0, ∞)` onto the ray `ξ = x(1 + iκ)`.  Between the ray and the real
//! axis the integrand is analytic (the branch points `±iα` lie outside the
//! sector), `Im s > 0` on the ray turns the oscillation into decay, and the
//! Gaussian still decays as `e^{-2(1-κ²)x²}`.  The cost therefore stays flat
//! as `ν` grows, where a real-axis rule needs nodes in proportion to `ν`.

use num_complex::Complex;

use crate::quadrature::{integrate_composite, Refinement, MAX_NODES};
use crate::{Error, Real, Result};

const RAY_SLOPE: f64 = 0.5;
// ln(1e18), plus slack for amplitudes that grow polynomially.
const GAUSS_EXPONENT: f64 = 45.0;
const DAMPING_EXPONENT: f64 = 45.0;

/// Convergence targets for [`gaussian_average`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTolerance<T> {
    pub abs: T,
    pub rel: T,
}

impl<T: Real> MomentTolerance<T> {
    /// Defaults for scalar observables.
    pub fn observables() -> Self {
        Self {
            abs: T::lit(1e-13),
            rel: T::lit(1e-11),
        }
    }
}

/// `⟨A(ξ, s) e^{iνs}⟩` for an amplitude even in `ξ`, real on the real axis
/// and analytic in `ξ` and `s`.  `ν ≥ 0`.
///
/// The real part of the result is the average against `cos(νs)`, the
/// imaginary part against `sin(νs)`.
pub fn gaussian_average<T, F>(alpha: T, nu: T, amp: F, tol: MomentTolerance<T>) -> Result<Complex<T>>
where
    T: Real,
    F: Fn(Complex<T>, Complex<T>) -> Complex<T> + Sync,
{
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("must be non-negative and finite, got {alpha}")));
    }
    if !(nu >= T::zero()) || !nu.is_finite() {
        return Err(Error::param("frequency", format!("must be non-negative and finite, got {nu}")));
    }
    let kappa = if nu > T::zero() { T::lit(RAY_SLOPE) } else { T::zero() };
    let dir = Complex::new(T::one(), kappa);
    let alpha2 = Complex::new(alpha * alpha, T::zero());
    let i = Complex::new(T::zero(), T::one());

    let decay = T::lit(2.0) * (T::one() - kappa * kappa);
    let mut x_max = (T::lit(GAUSS_EXPONENT) / decay).sqrt();
    if nu > T::zero() {
        let damping = |x: T| nu * (alpha2 + (dir * x).powi(2)).sqrt().im;
        if damping(x_max) > T::lit(DAMPING_EXPONENT) {
            let (mut lo, mut hi) = (T::zero(), x_max);
            for _ in 0..100 {
                let mid = (lo + hi) / T::lit(2.0);
                if damping(mid) > T::lit(DAMPING_EXPONENT) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            x_max = hi;
        }
    }

    let scale = if alpha > T::zero() { alpha.min(T::one()) } else { T::one() };
    let v_max = (x_max / scale).asinh();
    let nu_c = Complex::new(nu, T::zero());
    let integrand = |v: T| {
        let x = scale * v.sinh();
        let xi = dir * x;
        let s = (alpha2 + xi * xi).sqrt();
        let jac = dir * (scale * v.cosh());
        (xi * xi * T::lit(-2.0) + i * nu_c * s).exp() * amp(xi, s) * jac
    };
    let refine = Refinement {
        initial_panels: 16,
        abs_tol: tol.abs,
        rel_tol: tol.rel,
        max_nodes: MAX_NODES,
    };
    let res = integrate_composite(integrand, T::zero(), v_max, &refine);
    if !res.converged {
        return Err(Error::numerical(
            "gaussian_average",
            format!(
                "no convergence at alpha={alpha}, nu={nu} (estimated error {:e} with {} nodes)",
                res.est_error, res.nodes_used
            ),
        ));
    }
    let norm = T::lit(2.0) * (T::lit(2.0) / T::PI()).sqrt();
    Ok(res.value * norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> MomentTolerance<f64> {
        MomentTolerance::observables()
    }

    #[test]
    fn unit_amplitude_is_normalised() {
        for alpha in [0.0, 1e-3, 0.5, 7.0] {
            let avg = gaussian_average(alpha, 0.0, |_, _| Complex::new(1.0, 0.0), tol()).unwrap();
            assert!((avg.re - 1.0).abs() < 1e-12 && avg.im.abs() < 1e-14, "alpha={alpha}: {avg}");
        }
    }

    #[test]
    fn second_moment_is_a_quarter() {
        let avg = gaussian_average(0.3, 0.0, |xi, _| xi * xi, tol()).unwrap();
        assert!((avg.re - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fourier_factor_matches_closed_form_when_alpha_vanishes() {
        // α = 0: s = |ξ|, so the real part is the Gaussian characteristic
        // function at ν.
        let nu: f64 = 7.3;
        let avg = gaussian_average(0.0, nu, |_, _| Complex::new(1.0, 0.0), tol()).unwrap();
        let exact_re = (-nu * nu / 8.0).exp();
        assert!((avg.re - exact_re).abs() < 1e-12, "{} vs {}", avg.re, exact_re);
    }
}
