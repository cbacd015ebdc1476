//! Error function and integer-order Bessel functions of real argument.
//!
//! Bessel functions use their power series up to [`SERIES_LIMIT`] and the
//! Hankel asymptotic expansion beyond it.  The crossover sits where the
//! smallest asymptotic term drops below `1e-11` relative, while the series
//! cancellation still costs less than three digits.

use num_complex::Complex;

use crate::{Error, Real, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 13.0;
const ERF_SERIES_LIMIT: f64 = 3.0;

/// `Φ(z) = (2/√π) ∫₀^z e^{-u²} du`.
pub fn probability_integral<T: Real>(z: T) -> T {
    if z.is_nan() {
        return z;
    }
    let a = z.abs();
    let value = if a < T::lit(ERF_SERIES_LIMIT) {
        erf_series(a)
    } else {
        T::one() - erfc_continued_fraction(a) * (-a * a).exp()
    };
    if z < T::zero() {
        -value
    } else {
        value
    }
}

/// `1 − Φ(z)`.
pub fn erfc<T: Real>(z: T) -> T {
    if z < T::lit(ERF_SERIES_LIMIT) {
        T::one() - probability_integral(z)
    } else {
        erfc_continued_fraction(z) * (-z * z).exp()
    }
}

/// Scaled complement `e^{z²}(1 − Φ(z))`, finite for all large `z`.
pub fn erfcx<T: Real>(z: T) -> T {
    if z < T::zero() {
        let a = -z;
        T::lit(2.0) * (a * a).exp() - erfcx(a)
    } else if z < T::lit(ERF_SERIES_LIMIT) {
        (z * z).exp() * (T::one() - erf_series(z))
    } else {
        erfc_continued_fraction(z)
    }
}

// e^{-z²} Σ 2ⁿ z^{2n+1} / (2n+1)!!  has positive terms only.
fn erf_series<T: Real>(z: T) -> T {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = T::zero();
    loop {
        n = n + T::one();
        term = term * T::lit(2.0) * z2 / (T::lit(2.0) * n + T::one());
        sum = sum + term;
        if term <= sum * T::epsilon() * T::lit(0.25) {
            break;
        }
    }
    T::lit(2.0) / T::PI().sqrt() * (-z2).exp() * sum
}

// e^{z²} erfc(z) = 1 / (√π (z + ½/(z + 1/(z + 3/2/(z + …))))), modified Lentz.
fn erfc_continued_fraction<T: Real>(z: T) -> T {
    let tiny = T::min_positive_value().sqrt();
    let mut f = z;
    let mut c = z;
    let mut d = T::zero();
    for n in 1..500 {
        let a = T::from_i32(n).unwrap() / T::lit(2.0);
        d = z + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = z + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    T::one() / (T::PI().sqrt() * f)
}

/// Bessel function `J₀`.
pub fn bessel_j0<T: Real>(x: T) -> T {
    let a = x.abs();
    if a <= T::lit(SERIES_LIMIT) {
        series_j(0, a)
    } else {
        hankel_asymptotic(0, a).0
    }
}

/// Bessel function `J₁` (odd in `x`).
pub fn bessel_j1<T: Real>(x: T) -> T {
    let a = x.abs();
    let value = if a <= T::lit(SERIES_LIMIT) {
        series_j(1, a)
    } else {
        hankel_asymptotic(1, a).0
    };
    if x < T::zero() {
        -value
    } else {
        value
    }
}

/// Bessel function `Y₀`, defined for `x > 0`.
pub fn bessel_y0<T: Real>(x: T) -> Result<T> {
    check_positive(x, "bessel_y0")?;
    Ok(if x <= T::lit(SERIES_LIMIT) {
        series_y0(x)
    } else {
        hankel_asymptotic(0, x).1
    })
}

/// Bessel function `Y₁`, defined for `x > 0`.
pub fn bessel_y1<T: Real>(x: T) -> Result<T> {
    check_positive(x, "bessel_y1")?;
    Ok(if x <= T::lit(SERIES_LIMIT) {
        series_y1(x)
    } else {
        hankel_asymptotic(1, x).1
    })
}

/// `H₁⁽²⁾(x) = J₁(x) − i Y₁(x)` for `x > 0`.
pub fn hankel2_1<T: Real>(x: T) -> Result<Complex<T>> {
    check_positive(x, "hankel2_1")?;
    Ok(Complex::new(bessel_j1(x), -bessel_y1(x)?))
}

/// Modified Bessel function `K₁` for `x > 0`.
///
/// Trapezoid rule on `∫₀^∞ e^{-x cosh t} cosh t dt`; the integrand is entire
/// and decays doubly exponentially, so the rule converges geometrically.
pub fn bessel_k1<T: Real>(x: T) -> Result<T> {
    check_positive(x, "bessel_k1")?;
    if x > T::lit(700.0) {
        return Ok(T::zero());
    }
    let h = T::lit(0.05);
    let mut sum = (-x).exp() * T::lit(0.5);
    let mut k = 1;
    loop {
        let t = h * T::from_i32(k).unwrap();
        let ch = t.cosh();
        let term = (-x * ch).exp() * ch;
        sum = sum + term;
        if term < sum * T::epsilon() * T::lit(1e-3) || k > 100_000 {
            break;
        }
        k += 1;
    }
    Ok(sum * h)
}

fn check_positive<T: Real>(x: T, op: &'static str) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param("x", format!("{op} needs a positive finite argument, got {x}")))
    }
}

// (x/2)^n Σ (−x²/4)^k / (k! (k+n)!)
fn series_j<T: Real>(n: u32, x: T) -> T {
    let q = x * x / T::lit(4.0);
    let mut term = if n == 0 { T::one() } else { x / T::lit(2.0) };
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term = -term * q / (T::from_u32(k).unwrap() * T::from_u32(k + n).unwrap());
        sum = sum + term;
        if term.abs() <= T::epsilon() * T::lit(1e-3) && T::from_u32(k).unwrap() > x {
            break;
        }
    }
    sum
}

fn series_y0<T: Real>(x: T) -> T {
    let q = x * x / T::lit(4.0);
    let mut power = T::one();
    let mut harmonic = T::zero();
    let mut sum = T::zero();
    let mut k = 0u32;
    loop {
        k += 1;
        let kf = T::from_u32(k).unwrap();
        power = -power * q / (kf * kf);
        harmonic = harmonic + T::one() / kf;
        let term = -power * harmonic;
        sum = sum + term;
        if term.abs() <= T::epsilon() * T::lit(1e-3) && kf > x {
            break;
        }
    }
    let log_term = (x / T::lit(2.0)).ln() + T::lit(EULER_GAMMA);
    T::lit(2.0) / T::PI() * (log_term * series_j(0, x) + sum)
}

fn series_y1<T: Real>(x: T) -> T {
    let q = x * x / T::lit(4.0);
    let gamma = T::lit(EULER_GAMMA);
    // ψ(k+1) + ψ(k+2) with ψ(m+1) = −γ + H_m
    let mut h_k = T::zero();
    let mut power = x / T::lit(2.0);
    let mut sum = power * (T::one() - gamma - gamma);
    let mut k = 0u32;
    loop {
        k += 1;
        let kf = T::from_u32(k).unwrap();
        h_k = h_k + T::one() / kf;
        let h_k1 = h_k + T::one() / (kf + T::one());
        power = -power * q / (kf * (kf + T::one()));
        let term = power * (h_k + h_k1 - gamma - gamma);
        sum = sum + term;
        if term.abs() <= T::epsilon() * T::lit(1e-3) && kf > x {
            break;
        }
    }
    T::lit(2.0) / T::PI() * (x / T::lit(2.0)).ln() * series_j(1, x)
        - T::lit(2.0) / (T::PI() * x)
        - sum / T::PI()
}

// Returns (J_n, Y_n) from the Hankel expansion.
fn hankel_asymptotic<T: Real>(n: u32, x: T) -> (T, T) {
    let mu = T::from_u32(4 * n * n).unwrap();
    let mut a = T::one();
    let mut p = T::one();
    let mut q = T::zero();
    let mut last = T::infinity();
    for k in 1..60u32 {
        let kf = T::from_u32(k).unwrap();
        let odd = T::from_u32(2 * k - 1).unwrap();
        a = a * (mu - odd * odd) / (kf * T::lit(8.0) * x);
        if a.abs() >= last {
            break;
        }
        last = a.abs();
        match k % 4 {
            1 => q = q + a,
            2 => p = p - a,
            3 => q = q - a,
            _ => p = p + a,
        }
        if a.abs() < T::epsilon() * T::lit(1e-2) {
            break;
        }
    }
    let phase = x - (T::from_u32(n).unwrap() / T::lit(2.0) + T::lit(0.25)) * T::PI();
    let (s, c) = phase.sin_cos();
    let amp = (T::lit(2.0) / (T::PI() * x)).sqrt();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn erf_basics() {
        assert_eq!(probability_integral(0.0f64), 0.0);
        assert!((probability_integral(2f64.sqrt()) - 0.954_499_736).abs() < 1e-9);
        assert!((probability_integral(10.0f64) - 1.0).abs() < 1e-16);
        assert!((probability_integral(-0.7f64) + probability_integral(0.7f64)).abs() < 1e-16);
    }

    #[test]
    fn erfcx_is_continuous_across_branch() {
        let below = erfcx(ERF_SERIES_LIMIT - 1e-12);
        let above = erfcx(ERF_SERIES_LIMIT + 1e-12);
        assert_relative_eq!(below, above, max_relative = 1e-11);
        // large-z law 1/(z√π)
        let z = 1e4f64;
        assert_relative_eq!(erfcx(z), 1.0 / (z * std::f64::consts::PI.sqrt()), max_relative = 1e-8);
    }

    #[test]
    fn bessel_branches_meet() {
        let x = SERIES_LIMIT;
        let (j0a, y0a) = hankel_asymptotic(0, x);
        let (j1a, y1a) = hankel_asymptotic(1, x);
        assert!((series_j(0, x) - j0a).abs() < 1e-11);
        assert!((series_j(1, x) - j1a).abs() < 1e-11);
        assert!((series_y0(x) - y0a).abs() < 1e-11);
        assert!((series_y1(x) - y1a).abs() < 1e-11);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_y1(0.0f64).is_err());
        assert!(bessel_y1(-1.0f64).is_err());
        assert!(hankel2_1(0.0f64).is_err());
        assert!(bessel_k1(0.0f64).is_err());
        assert_eq!(bessel_j1(0.0f64), 0.0);
    }
}
