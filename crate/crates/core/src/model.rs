//! Physical parameters, spin states and the momentum-dependent mixing angle.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::linalg::{spin_jx, symmetric_eigen};
use crate::{Error, Real, Result};

/// Field strength, drift speed and packet width, with `ħ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams<T> {
    omega: T,
    v: T,
    sigma: T,
    alpha: T,
}

/// Validates `(ω, v, σ)` and derives `α = σω/v`.
pub fn make_params<T: Real>(omega: T, v: T, sigma: T) -> Result<PhysicalParams<T>> {
    if omega.is_nan() || v.is_nan() || sigma.is_nan() {
        return Err(Error::param("params", "NaN input"));
    }
    if !(v > T::zero()) || v.is_infinite() {
        return Err(Error::param("v", format!("must be positive and finite, got {v}")));
    }
    if !(sigma > T::zero()) || sigma.is_infinite() {
        return Err(Error::param("sigma", format!("must be positive and finite, got {sigma}")));
    }
    if omega < T::zero() || omega.is_infinite() {
        return Err(Error::param("omega", format!("must be non-negative and finite, got {omega}")));
    }
    Ok(PhysicalParams {
        omega,
        v,
        sigma,
        alpha: sigma * omega / v,
    })
}

impl<T: Real> PhysicalParams<T> {
    /// Natural units `σ = v = 1`, so that `ω = α`.
    pub fn from_alpha(alpha: T) -> Result<Self> {
        make_params(alpha, T::one(), T::one())
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn v(&self) -> T {
        self.v
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `2π/ω`, or `None` without a field.
    pub fn larmor_period(&self) -> Option<T> {
        (self.omega > T::zero()).then(|| T::TAU() / self.omega)
    }

    /// Time of flight across the initial packet, `σ/v`.
    pub fn flight_time(&self) -> T {
        self.sigma / self.v
    }

    /// Dimensionless precession phase `ωt`.
    pub fn omega_t(&self, t: T) -> T {
        self.omega * t
    }

    /// Dimensionless drift `τ = vt/σ`.
    pub fn tau(&self, t: T) -> T {
        self.v * t / self.sigma
    }

    /// Time corresponding to `n` Larmor periods.
    pub fn periods(&self, n: T) -> Result<T> {
        self.larmor_period()
            .map(|period| n * period)
            .ok_or_else(|| Error::param("time", "Larmor periods are undefined when omega = 0"))
    }
}

/// Momentum-dependent precession frequency and mixing angle of the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngle<T> {
    pub cos_theta: T,
    pub sin_theta: T,
    pub big_omega: T,
    /// Set at `ω = 0, p = 0`, where `Ω = 0` and the angle is a convention.
    pub degenerate: bool,
}

/// `Ω(p) = √(ω² + v²p²)`, `cos θ = vp/Ω`, `sin θ = ω/Ω`.
pub fn mixing<T: Real>(p: T, params: &PhysicalParams<T>) -> MixingAngle<T> {
    let vp = params.v * p;
    let big_omega = params.omega.hypot(vp);
    if big_omega == T::zero() {
        return MixingAngle {
            cos_theta: T::zero(),
            sin_theta: T::one(),
            big_omega,
            degenerate: true,
        };
    }
    MixingAngle {
        cos_theta: vp / big_omega,
        sin_theta: params.omega / big_omega,
        big_omega,
        degenerate: false,
    }
}

/// Momentum amplitude of the initial packet, normalised so `∫|φ|² dp = 1`.
pub fn gaussian_packet_momentum<T: Real>(p: T, sigma: T) -> T {
    let norm = (T::lit(2.0) * sigma / T::TAU().sqrt()).sqrt();
    norm * (-(sigma * p) * (sigma * p)).exp()
}

/// Position amplitude of the initial packet, `(√(2π)σ)^{-1/2} e^{-x²/4σ²}`.
pub fn gaussian_packet_position<T: Real>(x: T, sigma: T) -> T {
    let z = x / sigma;
    (-(z * z) / T::lit(4.0)).exp() / (T::TAU().sqrt() * sigma).sqrt()
}

/// Named initial spin preparations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinLabel {
    ZPlus,
    ZMinus,
    YPlus,
    Custom,
}

impl std::str::FromStr for SpinLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z_plus" => Ok(SpinLabel::ZPlus),
            "z_minus" => Ok(SpinLabel::ZMinus),
            "y_plus" => Ok(SpinLabel::YPlus),
            "custom" => Ok(SpinLabel::Custom),
            other => Err(Error::param(
                "state",
                format!("unknown label `{other}` (expected z_plus, z_minus, y_plus or custom)"),
            )),
        }
    }
}

impl std::fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpinLabel::ZPlus => "z_plus",
            SpinLabel::ZMinus => "z_minus",
            SpinLabel::YPlus => "y_plus",
            SpinLabel::Custom => "custom",
        })
    }
}

/// Normalised spin state over the `J_z` eigenbasis.
///
/// `J` is stored doubled so the dimension `2J + 1` is exact; coefficient `k`
/// belongs to `M = −J + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState<T> {
    twice_j: u32,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpinState<T> {
    /// Builds a state from coefficients ordered `M = −J…+J`.
    pub fn new(twice_j: u32, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if twice_j == 0 {
            return Err(Error::param("j", "spin must be at least 1/2"));
        }
        if coeffs.len() != twice_j as usize + 1 {
            return Err(Error::param(
                "coeffs",
                format!("expected {} coefficients for 2J = {twice_j}, got {}", twice_j + 1, coeffs.len()),
            ));
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr().f64()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::param("coeffs", format!("state is not normalised (norm {norm})")));
        }
        Ok(Self { twice_j, coeffs })
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    pub fn j(&self) -> T {
        T::from_u32(self.twice_j).unwrap() / T::lit(2.0)
    }

    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// `M` belonging to coefficient index `k`.
    pub fn m_value(&self, k: usize) -> T {
        T::from_usize_lossy(k) - self.j()
    }

    /// Coefficient `c_M` for `M = twice_m / 2`.
    pub fn amplitude(&self, twice_m: i32) -> Option<Complex<T>> {
        let k = twice_m + self.twice_j as i32;
        if k < 0 || k % 2 != 0 {
            return None;
        }
        self.coeffs.get((k / 2) as usize).copied()
    }

    /// `Σ|c_M|²`.
    pub fn norm_sqr(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨J_z⟩`.
    pub fn mean_jz(&self) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| self.m_value(k) * c.norm_sqr())
            .sum()
    }
}

/// Standard initial spin states.
///
/// `y_plus` is the `J_y = +J` eigenstate with its `M = +J` component real and
/// positive; for spin ½ this is `(c₊, c₋) = (1/√2, i/√2)`.
pub fn canonical_spin_state<T: Real>(
    label: SpinLabel,
    twice_j: u32,
    custom: Option<&[Complex<T>]>,
) -> Result<SpinState<T>> {
    if twice_j == 0 {
        return Err(Error::param("j", "spin must be at least 1/2"));
    }
    let n = twice_j as usize + 1;
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); n];
    match label {
        SpinLabel::ZPlus => coeffs[n - 1] = Complex::new(T::one(), T::zero()),
        SpinLabel::ZMinus => coeffs[0] = Complex::new(T::one(), T::zero()),
        SpinLabel::YPlus => {
            // J_y = W J_x W† with W = diag(e^{-iπM/2}).
            let (_, vecs) = symmetric_eigen(n, &spin_jx::<T>(twice_j));
            let j = T::from_u32(twice_j).unwrap() / T::lit(2.0);
            for (k, c) in coeffs.iter_mut().enumerate() {
                let m = T::from_usize_lossy(k) - j;
                *c = Complex::from_polar(vecs[k * n + (n - 1)], -T::FRAC_PI_2() * m);
            }
            let top = coeffs[n - 1];
            let phase = top.conj() / top.norm();
            for c in &mut coeffs {
                *c = *c * phase;
            }
        }
        SpinLabel::Custom => {
            let given = custom.ok_or_else(|| Error::param("coeffs", "custom state needs coefficients"))?;
            return SpinState::new(twice_j, given.to_vec());
        }
    }
    SpinState::new(twice_j, coeffs)
}
