//! Discrete-time Hadamard walk on the integer line.
//!
//! One step shifts the `+` coin component one site right and the `−`
//! component one site left, then mixes the coins with
//! `T = (1/√2)[[1, −1], [1, 1]]`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::density::{density_general, DensityProfile};
use crate::model::{PhysicalParams, SpinState};
use crate::propagator::GridConfig;
use crate::{Error, Real, Result};

/// Walk amplitudes on sites `−N..=N` with a dense array per coin state.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState<T> {
    half_width: usize,
    plus: Vec<Complex<T>>,
    minus: Vec<Complex<T>>,
    steps: usize,
}

impl<T: Real> LatticeState<T> {
    /// Walker at the origin with coin amplitudes `(c₊, c₋)`.
    pub fn at_origin(coin: [Complex<T>; 2]) -> Result<Self> {
        let norm = coin[0].norm_sqr() + coin[1].norm_sqr();
        if (norm - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::param("coin", format!("coin state must be normalised, |c|² = {norm}")));
        }
        Ok(Self {
            half_width: 0,
            plus: vec![coin[0]],
            minus: vec![coin[1]],
            steps: 0,
        })
    }

    /// Coin from a spin-½ state: `+` is `M = +½`.
    pub fn from_spin(state: &SpinState<T>) -> Result<Self> {
        if state.twice_j() != 1 {
            return Err(Error::param("spin", "the lattice walk needs a spin-1/2 state"));
        }
        let c = state.coeffs();
        Self::at_origin([c[1], c[0]])
    }

    /// The symmetric coin `(1, i)/√2`.
    pub fn symmetric() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self::at_origin([Complex::new(h, T::zero()), Complex::new(T::zero(), h)]).expect("normalised coin")
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Sites run from `-half_width` to `half_width`.
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    fn index(&self, n: i64) -> Option<usize> {
        let k = n + self.half_width as i64;
        (k >= 0 && (k as usize) < self.plus.len()).then_some(k as usize)
    }

    /// `(a₊, a₋)` at site `n`.
    pub fn amplitude(&self, n: i64) -> [Complex<T>; 2] {
        match self.index(n) {
            Some(k) => [self.plus[k], self.minus[k]],
            None => [Complex::new(T::zero(), T::zero()); 2],
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.plus.iter().chain(&self.minus).map(|a| a.norm_sqr()).sum()
    }

    fn grow(&mut self) {
        let zero = Complex::new(T::zero(), T::zero());
        let extra = self.half_width.max(16);
        let pad = vec![zero; extra];
        for arr in [&mut self.plus, &mut self.minus] {
            let mut grown = pad.clone();
            grown.extend_from_slice(arr);
            grown.extend_from_slice(&pad);
            *arr = grown;
        }
        self.half_width += extra;
    }

    /// One shift-then-coin step.
    pub fn step(&mut self) {
        if self.steps + 1 > self.half_width {
            self.grow();
        }
        let len = self.plus.len();
        let zero = Complex::new(T::zero(), T::zero());
        let h = T::FRAC_1_SQRT_2();
        // Shift in place: `+` moves right, `−` moves left.
        self.plus.rotate_right(1);
        self.plus[0] = zero;
        self.minus.rotate_left(1);
        self.minus[len - 1] = zero;
        for (p, m) in self.plus.iter_mut().zip(self.minus.iter_mut()) {
            let (a, b) = (*p, *m);
            *p = (a - b).scale(h);
            *m = (a + b).scale(h);
        }
        self.steps += 1;
    }

    pub fn advance(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    /// `P(n) = |a_{n,+}|² + |a_{n,−}|²` on sites `−steps..=steps`.
    pub fn position_distribution(&self) -> SiteDistribution<T> {
        let reach = self.steps as i64;
        let probs = (-reach..=reach)
            .map(|n| {
                let [p, m] = self.amplitude(n);
                p.norm_sqr() + m.norm_sqr()
            })
            .collect();
        SiteDistribution { first: -reach, probs }
    }
}

/// Probabilities on consecutive integer sites starting at `first`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteDistribution<T> {
    pub first: i64,
    pub probs: Vec<T>,
}

impl<T: Real> SiteDistribution<T> {
    pub fn site(&self, k: usize) -> i64 {
        self.first + k as i64
    }

    pub fn prob(&self, n: i64) -> T {
        let k = n - self.first;
        if k < 0 || k as usize >= self.probs.len() {
            T::zero()
        } else {
            self.probs[k as usize]
        }
    }

    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }

    pub fn mean(&self) -> T {
        self.moment(|n| n)
    }

    pub fn std_dev(&self) -> T {
        let mean = self.mean();
        self.moment(|n| (n - mean) * (n - mean)).sqrt()
    }

    fn moment<F: Fn(T) -> T>(&self, f: F) -> T {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| *p * f(T::from_i64(self.site(k)).unwrap()))
            .sum()
    }

    /// Largest `|P(n) − P(−n)|`.
    pub fn asymmetry(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| (*p - self.prob(-self.site(k))).abs())
            .fold(T::zero(), T::max)
    }

    /// Site of the largest probability among `n > 0`.
    pub fn right_peak(&self) -> Option<i64> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(k, _)| self.site(*k) > 0)
            .fold(None, |best: Option<(usize, T)>, (k, p)| match best {
                Some((_, q)) if q >= *p => best,
                _ => Some((k, *p)),
            })
            .map(|(k, _)| self.site(k))
    }
}

/// `sup |F_p − F_q|` for two distributions on the same support.
pub fn kolmogorov_distance<T: Real>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::param("distribution", "supports differ in length"));
    }
    let (mut cp, mut cq, mut worst) = (T::zero(), T::zero(), T::zero());
    for (a, b) in p.iter().zip(q) {
        cp = cp + *a;
        cq = cq + *b;
        worst = worst.max((cp - cq).abs());
    }
    Ok(worst)
}

/// Lattice walk against the continuum density at the same physical time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumReport<T> {
    pub steps: usize,
    /// Time step `Δt = t/steps`.
    pub dt: T,
    /// Lattice spacing `a = vΔt`.
    pub spacing: T,
    pub kolmogorov: T,
    /// Right-hand peak position divided by `t`.
    pub lattice_front_speed: T,
    pub continuum_front_speed: T,
}

/// Runs `steps` walk steps from the coin given by `state`, maps site `n`
/// to `x = n·a`, and compares cumulative distributions with the continuum
/// FFT density at time `t`.
pub fn continuum_comparison<T: Real>(
    steps: usize,
    t: T,
    params: &PhysicalParams<T>,
    state: &SpinState<T>,
) -> Result<ContinuumReport<T>> {
    if steps == 0 {
        return Err(Error::param("steps", "need at least one step"));
    }
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::param("t", format!("must be positive and finite, got {t}")));
    }
    let mut walk = LatticeState::from_spin(state)?;
    walk.advance(steps);
    let dist = walk.position_distribution();

    let grid = GridConfig::for_time(params, t, state.twice_j());
    let profile = density_general(state, t, &grid, params)?;
    let cdf = ContinuousCdf::new(&profile);

    let dt = t / T::from_usize_lossy(steps);
    let spacing = params.v() * dt;
    let mut lattice_cdf = T::zero();
    let mut kolmogorov = T::zero();
    for (k, p) in dist.probs.iter().enumerate() {
        let n = dist.site(k);
        // Only sites with the parity of the step count carry mass.
        if (n - steps as i64).rem_euclid(2) != 0 {
            continue;
        }
        let x = T::from_i64(n).unwrap() * spacing;
        let cont = cdf.at(x);
        kolmogorov = kolmogorov.max((cont - lattice_cdf).abs());
        lattice_cdf = lattice_cdf + *p;
        kolmogorov = kolmogorov.max((cont - lattice_cdf).abs());
    }

    let lattice_front = dist
        .right_peak()
        .map(|n| T::from_i64(n).unwrap() * spacing)
        .unwrap_or(T::zero());
    let continuum_front = (0..profile.values.len())
        .filter(|&i| profile.x(i) > T::zero())
        .fold(None, |best: Option<usize>, i| match best {
            Some(b) if profile.values[b] >= profile.values[i] => best,
            _ => Some(i),
        })
        .map(|i| profile.x(i))
        .unwrap_or(T::zero());

    Ok(ContinuumReport {
        steps,
        dt,
        spacing,
        kolmogorov,
        lattice_front_speed: lattice_front / t,
        continuum_front_speed: continuum_front / t,
    })
}

/// Trapezoid cumulative distribution of a profile, linear between points.
struct ContinuousCdf<T> {
    start: T,
    step: T,
    cumulative: Vec<T>,
}

impl<T: Real> ContinuousCdf<T> {
    fn new(profile: &DensityProfile<T>) -> Self {
        let step = profile.grid.step;
        let mut cumulative = Vec::with_capacity(profile.values.len());
        let mut acc = T::zero();
        cumulative.push(acc);
        for w in profile.values.windows(2) {
            acc = acc + (w[0] + w[1]) * step / T::lit(2.0);
            cumulative.push(acc);
        }
        Self {
            start: profile.grid.start,
            step,
            cumulative,
        }
    }

    fn at(&self, x: T) -> T {
        let pos = (x - self.start) / self.step;
        if pos <= T::zero() {
            return T::zero();
        }
        let last = self.cumulative.len() - 1;
        let k = pos.floor().f64() as usize;
        if k >= last {
            return self.cumulative[last];
        }
        let frac = pos - T::from_usize_lossy(k);
        self.cumulative[k] + (self.cumulative[k + 1] - self.cumulative[k]) * frac
    }
}
