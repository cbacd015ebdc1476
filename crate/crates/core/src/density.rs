//! Position densities `P(x, t) = Σ_M |ψ_M(x, t)|²`, their entropy and peak
//! structure.
//!
//! Two independent routes: [`density_symmetric`] integrates the three
//! Fourier integrals of the spin-½ `J_y` eigenstate directly, and
//! [`density_general`] evolves any spin state on a momentum grid and
//! transforms back with an FFT.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::model::{PhysicalParams, SpinState};
use crate::propagator::{evolve, to_position, GridConfig};
use crate::quadrature::{integrate_fourier_batch, pairwise_sum, QuadratureSpec};
use crate::{Error, Real, Result};

/// Edge mass above which an FFT profile is rejected.
pub const EDGE_MASS_LIMIT: f64 = 1e-6;
/// Fraction of the box (on each side) watched for escaping probability.
pub const EDGE_FRACTION: f64 = 0.05;
/// Default prominence threshold relative to the maximum.
pub const DEFAULT_PROMINENCE: f64 = 0.02;
/// Default target error of the quadrature route.
pub const DENSITY_TARGET_ERR: f64 = 1e-8;

/// Uniform grid `x_i = start + i·step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid<T> {
    pub start: T,
    pub step: T,
    pub len: usize,
}

impl<T: Real> UniformGrid<T> {
    pub fn new(start: T, step: T, len: usize) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() || !start.is_finite() || len == 0 {
            return Err(Error::param("x_grid", format!("invalid grid start={start} step={step} len={len}")));
        }
        Ok(Self { start, step, len })
    }

    /// Grid over `[-half_width, half_width]` with its points placed
    /// symmetrically about zero.
    pub fn symmetric(half_width: T, step: T) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::param("x_grid", "half width must be positive"));
        }
        let half = (half_width / step).ceil().f64() as usize;
        Self::new(-step * T::from_usize_lossy(half), step, 2 * half + 1)
    }

    /// `±(vt/2 + 10σ)` at eight points per `σ`.
    pub fn default_for(t: T, params: &PhysicalParams<T>) -> Self {
        let half = params.v() * t.abs() / T::lit(2.0) + T::lit(10.0) * params.sigma();
        Self::symmetric(half, params.sigma() / T::lit(8.0)).expect("valid default grid")
    }

    /// The position grid belonging to an FFT momentum grid.
    pub fn from_fft(grid: &GridConfig<T>) -> Self {
        Self {
            start: grid.position(0),
            step: grid.dx(),
            len: grid.n(),
        }
    }

    pub fn x(&self, i: usize) -> T {
        self.start + self.step * T::from_usize_lossy(i)
    }

    pub fn end(&self) -> T {
        self.x(self.len - 1)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.len).map(|i| self.x(i)).collect()
    }

    /// Contiguous sub-grid of points with `|x| ≤ half_width`.
    pub fn window(&self, half_width: T) -> Option<(usize, Self)> {
        let first = (0..self.len).find(|&i| self.x(i).abs() <= half_width)?;
        let last = (first..self.len).take_while(|&i| self.x(i).abs() <= half_width).last()?;
        Some((
            first,
            Self {
                start: self.x(first),
                step: self.step,
                len: last - first + 1,
            },
        ))
    }
}

/// How a profile was computed; the names appear in CSV metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    Quadrature,
    Fft,
    SmallAlphaHankel,
    SmallAlphaSingleHankel,
    LargeAlphaGaussian,
}

impl DensityMethod {
    pub fn name(self) -> &'static str {
        match self {
            DensityMethod::Quadrature => "quadrature",
            DensityMethod::Fft => "fft",
            DensityMethod::SmallAlphaHankel => "small_alpha_hankel",
            DensityMethod::SmallAlphaSingleHankel => "small_alpha_single_hankel",
            DensityMethod::LargeAlphaGaussian => "large_alpha_gaussian",
        }
    }
}

/// Sampled density with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile<T> {
    pub grid: UniformGrid<T>,
    pub values: Vec<T>,
    pub t: T,
    pub alpha: T,
    pub sigma: T,
    pub method: DensityMethod,
    /// `|∫P dx − 1|` by the trapezoid rule on the grid.
    pub norm_residual: T,
    /// Set when values below `-1e-12` had to be zeroed.
    pub clipped: bool,
}

impl<T: Real> DensityProfile<T> {
    pub fn new(
        grid: UniformGrid<T>,
        mut values: Vec<T>,
        t: T,
        params: &PhysicalParams<T>,
        method: DensityMethod,
    ) -> Result<Self> {
        if values.len() != grid.len {
            return Err(Error::param("values", "length differs from the grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("density", "non-finite density value"));
        }
        let mut clipped = false;
        for v in &mut values {
            if *v < T::zero() {
                clipped |= *v < T::lit(-1e-12);
                *v = T::zero();
            }
        }
        let mut profile = Self {
            grid,
            values,
            t,
            alpha: params.alpha(),
            sigma: params.sigma(),
            method,
            norm_residual: T::zero(),
            clipped,
        };
        profile.norm_residual = (profile.norm() - T::one()).abs();
        Ok(profile)
    }

    pub fn x(&self, i: usize) -> T {
        self.grid.x(i)
    }

    pub fn x_over_sigma(&self, i: usize) -> T {
        self.grid.x(i) / self.sigma
    }

    /// Trapezoid `∫ f(x) P(x) dx`.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        let n = self.values.len();
        let terms: Vec<T> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let w = if i == 0 || i + 1 == n { T::lit(0.5) } else { T::one() };
                w * *p * f(self.grid.x(i))
            })
            .collect();
        pairwise_sum(&terms) * self.grid.step
    }

    pub fn norm(&self) -> T {
        self.integrate(|_| T::one())
    }

    pub fn mean(&self) -> T {
        self.integrate(|x| x) / self.norm()
    }

    /// `⟨x²⟩ − ⟨x⟩²`.
    pub fn variance(&self) -> T {
        let mean = self.mean();
        self.integrate(|x| (x - mean) * (x - mean)) / self.norm()
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// Trapezoid mass on `[a, b]` restricted to grid points.
    pub fn mass_between(&self, a: T, b: T) -> T {
        self.integrate(|x| if x >= a && x <= b { T::one() } else { T::zero() })
    }

    /// Largest `|P(x_i) − P(−x_i)|` over mirrored grid points.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.grid.len {
            let x = self.grid.x(i);
            let mirror = ((-x - self.grid.start) / self.grid.step).round();
            if mirror < T::zero() {
                continue;
            }
            let k = mirror.f64() as usize;
            if k >= self.grid.len || (self.grid.x(k) + x).abs() > self.grid.step * T::lit(1e-6) {
                continue;
            }
            worst = worst.max((self.values[i] - self.values[k]).abs());
        }
        worst
    }

    /// `Σ|P − Q| dx` between profiles sampled on the same lattice of
    /// points; values outside either grid count as zero.
    pub fn l1_distance(&self, other: &Self) -> Result<T> {
        let step = self.grid.step;
        if ((other.grid.step - step) / step).abs() > T::lit(1e-9) {
            return Err(Error::param("profile", "grids have different spacing"));
        }
        let shift = (other.grid.start - self.grid.start) / step;
        let offset = shift.round();
        if (shift - offset).abs() > T::lit(1e-6) {
            return Err(Error::param("profile", "grids are not aligned"));
        }
        let offset = offset.f64() as i64;
        let lo = 0i64.min(offset);
        let hi = (self.grid.len as i64).max(offset + other.grid.len as i64);
        let mut diffs = Vec::with_capacity((hi - lo) as usize);
        for k in lo..hi {
            let a = if k >= 0 && (k as usize) < self.grid.len { self.values[k as usize] } else { T::zero() };
            let j = k - offset;
            let b = if j >= 0 && (j as usize) < other.grid.len { other.values[j as usize] } else { T::zero() };
            diffs.push((a - b).abs());
        }
        Ok(pairwise_sum(&diffs) * step)
    }

    /// Sub-profile on the points with `|x| ≤ half_width`.
    pub fn window(&self, half_width: T) -> Option<Self> {
        let (first, grid) = self.grid.window(half_width)?;
        let mut out = self.clone();
        out.values = self.values[first..first + grid.len].to_vec();
        out.grid = grid;
        Some(out)
    }
}

/// The three integrals `I₁, I₂, I₃` of the symmetric spin-½ state, divided
/// by `√π` and without the Gaussian factor.
fn symmetric_integrands<T: Real>(alpha: T, half_tau: T) -> impl Fn(T) -> [Complex<T>; 3] + Sync {
    let inv_sqrt_pi = T::one() / T::PI().sqrt();
    move |xi: T| {
        let s = (alpha * alpha + xi * xi).sqrt();
        let (sn, cs) = (s * half_tau).sin_cos();
        // sin(sτ/2)/s stays finite as s → 0.
        let sinc = if s > T::zero() { sn / s } else { half_tau };
        [
            Complex::new(alpha * sinc * inv_sqrt_pi, T::zero()),
            Complex::new(xi * sinc * inv_sqrt_pi, T::zero()),
            Complex::new(cs * inv_sqrt_pi, T::zero()),
        ]
    }
}

/// Density of the spin-½ `J_y` eigenstate `(c₊, c₋) = (1/√2, i/√2)` from
/// `P = (√(2π)σ)^{-1} Σ_r |I_r|²`, with
/// `I₁ = (α/√π)∫ e^{-ξ²+iξX} sin(sτ/2)/s`,
/// `I₂ = (1/√π)∫ e^{-ξ²+iξX} ξ sin(sτ/2)/s`,
/// `I₃ = (1/√π)∫ e^{-ξ²+iξX} cos(sτ/2)`.
pub fn density_symmetric<T: Real>(grid: &UniformGrid<T>, t: T, params: &PhysicalParams<T>) -> Result<DensityProfile<T>> {
    density_symmetric_with(grid, t, params, T::lit(DENSITY_TARGET_ERR))
}

/// [`density_symmetric`] with an explicit quadrature target.
pub fn density_symmetric_with<T: Real>(
    grid: &UniformGrid<T>,
    t: T,
    params: &PhysicalParams<T>,
    target_abs_err: T,
) -> Result<DensityProfile<T>> {
    let values = symmetric_values(grid, t, params, target_abs_err)?;
    DensityProfile::new(*grid, values, t, params, DensityMethod::Quadrature)
}

fn symmetric_values<T: Real>(grid: &UniformGrid<T>, t: T, params: &PhysicalParams<T>, target: T) -> Result<Vec<T>> {
    let alpha = params.alpha();
    if !(alpha > T::zero()) {
        return Err(Error::param("alpha", "the quadrature route needs alpha > 0; use limit_density_alpha0"));
    }
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::param("t", format!("must be non-negative and finite, got {t}")));
    }
    let sigma = params.sigma();
    let half_tau = params.tau(t) / T::lit(2.0);
    let spec = QuadratureSpec::new(T::one(), half_tau, target);
    let batch = integrate_fourier_batch(
        symmetric_integrands(alpha, half_tau),
        &spec,
        grid.start / sigma,
        grid.step / sigma,
        grid.len,
    )?;
    if !batch.converged {
        let (worst, err) = batch.worst();
        return Err(Error::numerical(
            "density_symmetric",
            format!("quadrature did not converge; worst point x={} (error {err:e})", grid.x(worst)),
        ));
    }
    let norm = T::one() / (T::TAU().sqrt() * sigma);
    Ok(batch
        .values
        .iter()
        .map(|v| norm * v.iter().map(|z| z.norm_sqr()).sum::<T>())
        .collect())
}

/// Rough number of integrand evaluations [`density_symmetric`] needs; used
/// to decide whether the quadrature route is affordable.
pub fn symmetric_cost<T: Real>(grid: &UniformGrid<T>, t: T, params: &PhysicalParams<T>) -> f64 {
    let reach = grid.start.abs().max(grid.end().abs()) / params.sigma();
    let spec = QuadratureSpec::new(T::one(), params.tau(t) / T::lit(2.0) + reach, T::lit(DENSITY_TARGET_ERR));
    3.0 * spec.initial_nodes() as f64 * grid.len as f64
}

/// Density of any spin state by momentum-space evolution and FFT.
///
/// Fails with [`Error::DriftOutOfBox`] when more than [`EDGE_MASS_LIMIT`] of
/// the probability sits in the outer [`EDGE_FRACTION`] of the box.
pub fn density_general<T: Real>(
    state: &SpinState<T>,
    t: T,
    grid: &GridConfig<T>,
    params: &PhysicalParams<T>,
) -> Result<DensityProfile<T>> {
    let amps = to_position(&evolve(state, t, grid, params)?);
    let values = amps.density();
    let xgrid = UniformGrid::from_fft(grid);
    let profile = DensityProfile::new(xgrid, values, t, params, DensityMethod::Fft)?;
    let edge = T::lit(1.0 - 2.0 * EDGE_FRACTION) * (grid.position(grid.n() - 1) - grid.position(0)) / T::lit(2.0);
    let inner = profile.mass_between(-edge, edge);
    let edge_mass = (profile.norm() - inner).f64();
    if edge_mass > EDGE_MASS_LIMIT {
        return Err(Error::DriftOutOfBox {
            edge_mass,
            limit: EDGE_MASS_LIMIT,
        });
    }
    Ok(profile)
}

/// `α → 0` limit: point masses `|c_M|²` moving with velocities `Mv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaMixture<T> {
    pub velocities: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> DeltaMixture<T> {
    pub fn positions(&self, t: T) -> Vec<T> {
        self.velocities.iter().map(|v| *v * t).collect()
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }
}

/// Components with zero weight are dropped.
pub fn limit_density_alpha0<T: Real>(state: &SpinState<T>, v: T) -> DeltaMixture<T> {
    let mut velocities = Vec::new();
    let mut weights = Vec::new();
    for (k, c) in state.coeffs().iter().enumerate() {
        let w = c.norm_sqr();
        if w > T::zero() {
            velocities.push(state.m_value(k) * v);
            weights.push(w);
        }
    }
    DeltaMixture { velocities, weights }
}

/// `S = −∫ P ln P dx` by the trapezoid rule on the profile's own grid.
pub fn shannon_entropy<T: Real>(profile: &DensityProfile<T>) -> T {
    let floor = T::lit(1e-300);
    let n = profile.values.len();
    let terms: Vec<T> = profile
        .values
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if p < floor {
                return T::zero();
            }
            let w = if i == 0 || i + 1 == n { T::lit(0.5) } else { T::one() };
            -w * p * p.ln()
        })
        .collect();
    pairwise_sum(&terms) * profile.grid.step
}

/// `P(0, t)` of the symmetric spin-½ state.
pub fn central_density<T: Real>(t: T, params: &PhysicalParams<T>) -> Result<T> {
    let grid = UniformGrid::new(T::zero(), params.sigma(), 1)?;
    Ok(symmetric_values(&grid, t, params, T::lit(1e-12))?[0])
}

/// Local maxima whose prominence is at least the given fraction of the
/// profile maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakCensus<T> {
    pub count: usize,
    pub locations: Vec<T>,
    pub heights: Vec<T>,
    pub prominences: Vec<T>,
}

impl<T: Real> PeakCensus<T> {
    /// Peaks with `x > 0`.
    pub fn positive(&self) -> Vec<T> {
        self.locations.iter().copied().filter(|x| *x > T::zero()).collect()
    }
}

/// Peak positions are refined by parabolic interpolation.  Prominence of
/// a peak is its height above the higher of the two lowest
/// points separating it from taller ground (or the grid ends).
pub fn peak_census<T: Real>(profile: &DensityProfile<T>, threshold: T) -> PeakCensus<T> {
    let v = &profile.values;
    let n = v.len();
    let cut = threshold * profile.max_value();
    let mut census = PeakCensus {
        count: 0,
        locations: Vec::new(),
        heights: Vec::new(),
        prominences: Vec::new(),
    };
    let mut i = 0;
    while i < n {
        let rising = i == 0 || v[i] > v[i - 1];
        if !rising {
            i += 1;
            continue;
        }
        // Walk over a plateau.
        let mut end = i;
        while end + 1 < n && v[end + 1] == v[i] {
            end += 1;
        }
        let falling = end + 1 == n || v[end + 1] < v[i];
        let height = v[i];
        if falling && height >= cut && height > T::zero() {
            let mut left_min = height;
            let mut k = i;
            while k > 0 {
                k -= 1;
                if v[k] > height {
                    break;
                }
                left_min = left_min.min(v[k]);
            }
            let mut right_min = height;
            let mut k = end;
            while k + 1 < n {
                k += 1;
                if v[k] > height {
                    break;
                }
                right_min = right_min.min(v[k]);
            }
            let prominence = height - left_min.max(right_min);
            if prominence >= cut {
                let mid = (i + end) / 2;
                let x = if i == end && i > 0 && i + 1 < n {
                    // Vertex of the parabola through the peak and its neighbours.
                    let curvature = v[i - 1] - T::lit(2.0) * v[i] + v[i + 1];
                    let offset = (v[i - 1] - v[i + 1]) / (T::lit(2.0) * curvature);
                    profile.x(i) + profile.grid.step * offset
                } else if (i + end) % 2 == 0 {
                    profile.x(mid)
                } else {
                    (profile.x(mid) + profile.x(mid + 1)) / T::lit(2.0)
                };
                census.locations.push(x);
                census.heights.push(height);
                census.prominences.push(prominence);
            }
        }
        i = end + 1;
    }
    census.count = census.locations.len();
    census
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_profile(sigma: f64) -> DensityProfile<f64> {
        let params = crate::model::make_params(1.0, 1.0, sigma).unwrap();
        let grid = UniformGrid::symmetric(14.0 * sigma, sigma / 16.0).unwrap();
        let values = grid
            .points()
            .iter()
            .map(|x| (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma))
            .collect();
        DensityProfile::new(grid, values, 0.0, &params, DensityMethod::Quadrature).unwrap()
    }

    #[test]
    fn gaussian_entropy_and_peak() {
        for sigma in [0.5, 1.0, 3.0] {
            let prof = gaussian_profile(sigma);
            let exact = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma).ln();
            assert!((shannon_entropy(&prof) - exact).abs() < 1e-6);
            let census = peak_census(&prof, DEFAULT_PROMINENCE);
            assert_eq!(census.count, 1);
            assert!(census.locations[0].abs() < 1e-12);
        }
    }

    #[test]
    fn plateau_peak_reports_midpoint() {
        let params = PhysicalParams::<f64>::from_alpha(1.0).unwrap();
        let grid = UniformGrid::new(0.0, 1.0, 7).unwrap();
        let values = vec![0.0, 1.0, 2.0, 2.0, 1.0, 0.5, 0.0];
        let prof = DensityProfile::new(grid, values, 0.0, &params, DensityMethod::Fft).unwrap();
        let census = peak_census(&prof, 0.1);
        assert_eq!(census.locations, vec![2.5]);
        assert_eq!(census.prominences, vec![2.0]);
    }

    #[test]
    fn small_bump_on_a_slope_has_small_prominence() {
        let params = PhysicalParams::<f64>::from_alpha(1.0).unwrap();
        let grid = UniformGrid::new(0.0, 1.0, 6).unwrap();
        let values = vec![0.0, 10.0, 5.0, 5.1, 5.0, 0.0];
        let prof = DensityProfile::new(grid, values, 0.0, &params, DensityMethod::Fft).unwrap();
        let census = peak_census(&prof, 0.02);
        assert_eq!(census.count, 1);
        let loose = peak_census(&prof, 0.005);
        assert_eq!(loose.count, 2);
        assert!((loose.prominences[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn l1_distance_of_shifted_grids() {
        let params = PhysicalParams::<f64>::from_alpha(1.0).unwrap();
        let a = DensityProfile::new(UniformGrid::new(0.0, 0.5, 4).unwrap(), vec![1.0; 4], 0.0, &params, DensityMethod::Fft).unwrap();
        let b = DensityProfile::new(UniformGrid::new(1.0, 0.5, 4).unwrap(), vec![1.0; 4], 0.0, &params, DensityMethod::Fft).unwrap();
        // overlap of two points, two unmatched points on each side
        assert!((a.l1_distance(&b).unwrap() - 4.0 * 0.5).abs() < 1e-15);
        assert_eq!(a.l1_distance(&a).unwrap(), 0.0);
        let misaligned = DensityProfile::new(UniformGrid::new(0.25, 0.5, 4).unwrap(), vec![1.0; 4], 0.0, &params, DensityMethod::Fft).unwrap();
        assert!(a.l1_distance(&misaligned).is_err());
    }

    #[test]
    fn delta_mixture_weights() {
        let y = crate::model::canonical_spin_state::<f64>(crate::model::SpinLabel::YPlus, 1, None).unwrap();
        let mix = limit_density_alpha0(&y, 2.0);
        assert_eq!(mix.velocities, vec![-1.0, 1.0]);
        assert!((mix.weights[0] - 0.5).abs() < 1e-15 && (mix.weights[1] - 0.5).abs() < 1e-15);
        assert_eq!(mix.positions(3.0), vec![-3.0, 3.0]);
    }
}
