//! Exact evolution in the momentum representation and reconstruction of
//! the position-space amplitudes.
//!
//! At fixed momentum the generator is `G(p) = ωJ_y + vpJ_z`.  Since
//! `J_y = W J_x W†` with `W = diag(e^{-iπM/2})`, the matrix `ωJ_x + vpJ_z`
//! is real, symmetric and tridiagonal; its eigenvalues are `MΩ(p)`.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::linalg::{spin_jx, symmetric_eigen};
use crate::model::{gaussian_packet_momentum, mixing, PhysicalParams, SpinState};
use crate::{Error, Real, Result};

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix<T> {
    dim: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> UnitaryMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for k in 0..dim {
            entries[k * dim + k] = Complex::new(T::one(), T::zero());
        }
        Self { dim, entries }
    }

    pub fn from_entries(dim: usize, entries: Vec<Complex<T>>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = self.entries.clone();
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        Self { dim: n, entries }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim;
        assert_eq!(n, other.dim);
        let mut entries = vec![Complex::new(T::zero(), T::zero()); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                for c in 0..n {
                    entries[r * n + c] = entries[r * n + c] + a * other.entries[k * n + c];
                }
            }
        }
        Self { dim: n, entries }
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim;
        (0..n)
            .map(|r| (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, c| acc + self.entries[r * n + c] * v[c]))
            .collect()
    }

    /// Largest entry of `|U†U − 1|`.
    pub fn unitarity_defect(&self) -> T {
        let prod = self.adjoint().matmul(self);
        let n = self.dim;
        let mut worst = T::zero();
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { T::one() } else { T::zero() };
                worst = worst.max((prod.entries[r * n + c] - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }

    /// Largest entry of `|A − B|`.
    pub fn max_distance(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }
}

/// Spin-½ propagator `cos(Ωt/2) − i sin(Ωt/2)(cos θ σ_z + sin θ σ_y)`,
/// rows and columns ordered `(M = −½, M = +½)`.
pub fn propagator_half<T: Real>(p: T, t: T, params: &PhysicalParams<T>) -> UnitaryMatrix<T> {
    let mix = mixing(p, params);
    if mix.degenerate {
        return UnitaryMatrix::identity(2);
    }
    let (s, c) = (mix.big_omega * t / T::lit(2.0)).sin_cos();
    let sc = s * mix.cos_theta;
    let ss = s * mix.sin_theta;
    UnitaryMatrix {
        dim: 2,
        entries: vec![
            Complex::new(c, sc),
            Complex::new(ss, T::zero()),
            Complex::new(-ss, T::zero()),
            Complex::new(c, -sc),
        ],
    }
}

/// Propagator for spin `J = twice_j / 2`, basis ordered `M = −J…+J`.
pub fn propagator_general<T: Real>(p: T, t: T, twice_j: u32, params: &PhysicalParams<T>) -> Result<UnitaryMatrix<T>> {
    if twice_j == 0 {
        return Err(Error::param("j", "spin must be at least 1/2"));
    }
    let gen = Generator::new(twice_j, params);
    Ok(gen.propagator(p, t))
}

// Precomputed pieces of the generator shared by all grid points.
struct Generator<T> {
    n: usize,
    omega_jx: Vec<T>,
    m_values: Vec<T>,
    w: Vec<Complex<T>>,
    v: T,
}

impl<T: Real> Generator<T> {
    fn new(twice_j: u32, params: &PhysicalParams<T>) -> Self {
        let n = twice_j as usize + 1;
        let j = T::from_u32(twice_j).unwrap() / T::lit(2.0);
        let m_values: Vec<T> = (0..n).map(|k| T::from_usize_lossy(k) - j).collect();
        let omega_jx = spin_jx::<T>(twice_j).into_iter().map(|x| x * params.omega()).collect();
        let w = m_values
            .iter()
            .map(|&m| Complex::from_polar(T::one(), -T::FRAC_PI_2() * m))
            .collect();
        Self {
            n,
            omega_jx,
            m_values,
            w,
            v: params.v(),
        }
    }

    fn propagator(&self, p: T, t: T) -> UnitaryMatrix<T> {
        let n = self.n;
        let mut a = self.omega_jx.clone();
        for k in 0..n {
            a[k * n + k] = self.v * p * self.m_values[k];
        }
        let (vals, vecs) = symmetric_eigen(n, &a);
        let phases: Vec<Complex<T>> = vals.iter().map(|&l| Complex::from_polar(T::one(), -l * t)).collect();
        let mut entries = vec![Complex::new(T::zero(), T::zero()); n * n];
        for r in 0..n {
            for c in 0..n {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    acc = acc + phases[k] * (vecs[r * n + k] * vecs[c * n + k]);
                }
                entries[r * n + c] = self.w[r] * self.w[c].conj() * acc;
            }
        }
        UnitaryMatrix { dim: n, entries }
    }
}

/// Momentum grid `p_k = −p_max + k·dp`, `dp = 2p_max/n`, with `n` a power
/// of two.  The matching position grid has spacing `π/p_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig<T> {
    n: usize,
    p_max: T,
}

impl<T: Real> GridConfig<T> {
    pub fn new(n: usize, p_max: T) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::param("n", format!("grid size must be a power of two >= 16, got {n}")));
        }
        if !(p_max > T::zero()) || !p_max.is_finite() {
            return Err(Error::param("p_max", format!("must be positive, got {p_max}")));
        }
        Ok(Self { n, p_max })
    }

    /// 4096 points up to `|p| = 16/σ`.
    pub fn default_for(params: &PhysicalParams<T>) -> Self {
        Self {
            n: 4096,
            p_max: T::lit(16.0) / params.sigma(),
        }
    }

    /// Default momentum cutoff with enough points that the fastest
    /// component (`|M| = J`) stays clear of the outer 5% of the box up to
    /// time `t`.
    pub fn for_time(params: &PhysicalParams<T>, t: T, twice_j: u32) -> Self {
        let base = Self::default_for(params);
        let j = T::from_u32(twice_j).unwrap() / T::lit(2.0);
        let reach = j * params.v() * t.abs() + T::lit(14.0) * params.sigma();
        let half_box = reach / T::lit(0.9);
        let cells = (T::lit(2.0) * half_box / base.dx()).ceil().f64() as usize;
        Self {
            n: cells.next_power_of_two().max(base.n),
            p_max: base.p_max,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p_max(&self) -> T {
        self.p_max
    }

    pub fn dp(&self) -> T {
        T::lit(2.0) * self.p_max / T::from_usize_lossy(self.n)
    }

    pub fn dx(&self) -> T {
        T::PI() / self.p_max
    }

    pub fn momentum(&self, k: usize) -> T {
        -self.p_max + self.dp() * T::from_usize_lossy(k)
    }

    pub fn position(&self, j: usize) -> T {
        (T::from_usize_lossy(j) - T::from_usize_lossy(self.n / 2)) * self.dx()
    }

    /// Checks that the grid samples the initial packet finely enough.
    pub fn check_resolves(&self, sigma: T) -> Result<()> {
        if self.dp() * sigma > T::lit(0.125) {
            return Err(Error::GridResolution(format!(
                "dp = {} exceeds 1/(8 sigma) = {}",
                self.dp(),
                T::lit(0.125) / sigma
            )));
        }
        if self.p_max * sigma < T::lit(8.0) {
            return Err(Error::GridResolution(format!(
                "p_max = {} is below 8/sigma = {}",
                self.p_max,
                T::lit(8.0) / sigma
            )));
        }
        Ok(())
    }
}

/// Spinor amplitudes on the momentum grid, point-major.
#[derive(Debug, Clone)]
pub struct MomentumSpinor<T> {
    pub grid: GridConfig<T>,
    pub twice_j: u32,
    pub amps: Vec<Complex<T>>,
    pub t: T,
}

impl<T: Real> MomentumSpinor<T> {
    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    /// Amplitudes at grid point `k`.
    pub fn at(&self, k: usize) -> &[Complex<T>] {
        let d = self.dim();
        &self.amps[k * d..(k + 1) * d]
    }

    /// `Σ_p Σ_M |amp|² dp`.
    pub fn norm(&self) -> T {
        let sq: Vec<T> = self.amps.iter().map(|a| a.norm_sqr()).collect();
        crate::quadrature::pairwise_sum(&sq) * self.grid.dp()
    }

    /// `⟨J_z⟩`.
    pub fn mean_jz(&self) -> T {
        let d = self.dim();
        let j = T::from_u32(self.twice_j).unwrap() / T::lit(2.0);
        let terms: Vec<T> = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| (T::from_usize_lossy(i % d) - j) * a.norm_sqr())
            .collect();
        crate::quadrature::pairwise_sum(&terms) * self.grid.dp()
    }
}

/// Applies `U(p, t)` pointwise to `φ(p) c_M`.
pub fn evolve<T: Real>(
    initial: &SpinState<T>,
    t: T,
    grid: &GridConfig<T>,
    params: &PhysicalParams<T>,
) -> Result<MomentumSpinor<T>> {
    grid.check_resolves(params.sigma())?;
    if !t.is_finite() {
        return Err(Error::param("t", format!("must be finite, got {t}")));
    }
    let d = initial.dim();
    let coeffs = initial.coeffs();
    let mut amps = vec![Complex::new(T::zero(), T::zero()); grid.n() * d];
    let general = (initial.twice_j() != 1).then(|| Generator::new(initial.twice_j(), params));
    amps.par_chunks_mut(d).enumerate().for_each(|(k, out)| {
        let p = grid.momentum(k);
        let phi = gaussian_packet_momentum(p, params.sigma());
        let start: Vec<Complex<T>> = coeffs.iter().map(|c| *c * phi).collect();
        if t == T::zero() {
            out.copy_from_slice(&start);
            return;
        }
        let u = match &general {
            Some(gen) => gen.propagator(p, t),
            None => propagator_half(p, t, params),
        };
        out.copy_from_slice(&u.apply(&start));
    });
    Ok(MomentumSpinor {
        grid: *grid,
        twice_j: initial.twice_j(),
        amps,
        t,
    })
}

/// Spinor amplitudes on the position grid `x_j = (j − n/2)·dx`, point-major.
#[derive(Debug, Clone)]
pub struct PositionAmplitudes<T> {
    pub grid: GridConfig<T>,
    pub twice_j: u32,
    pub psi: Vec<Complex<T>>,
    pub t: T,
}

impl<T: Real> PositionAmplitudes<T> {
    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    pub fn x(&self, j: usize) -> T {
        self.grid.position(j)
    }

    /// `Σ_M |ψ_M(x_j)|²` at every grid point.
    pub fn density(&self) -> Vec<T> {
        self.psi.chunks(self.dim()).map(|c| c.iter().map(|a| a.norm_sqr()).sum()).collect()
    }

    /// `Σ_x Σ_M |ψ|² dx`.
    pub fn norm(&self) -> T {
        crate::quadrature::pairwise_sum(&self.density()) * self.grid.dx()
    }
}

/// `ψ_M(x) = (2π)^{-1/2} Σ_p Φ_M(p) e^{ipx} dp` by one inverse FFT per
/// component.
pub fn to_position<T: Real>(ms: &MomentumSpinor<T>) -> PositionAmplitudes<T> {
    let n = ms.grid.n();
    let d = ms.dim();
    let mut planner = FftPlanner::<T>::new();
    let fft: Arc<dyn Fft<T>> = planner.plan_fft_inverse(n);
    let scale = ms.grid.dp() / T::TAU().sqrt();
    let mut psi = vec![Complex::new(T::zero(), T::zero()); n * d];
    // With p_k = (k − n/2)dp and x_j = (j − n/2)dx, e^{ip_k x_j} equals
    // (−1)^{j+k} e^{2πijk/n} whenever 4 divides n.
    let sign = |k: usize| if k % 2 == 0 { T::one() } else { -T::one() };
    for m in 0..d {
        let mut buf: Vec<Complex<T>> = (0..n).map(|k| ms.amps[k * d + m] * sign(k)).collect();
        fft.process(&mut buf);
        for (j, value) in buf.into_iter().enumerate() {
            psi[j * d + m] = value * (scale * sign(j));
        }
    }
    PositionAmplitudes {
        grid: ms.grid,
        twice_j: ms.twice_j,
        psi,
        t: ms.t,
    }
}
