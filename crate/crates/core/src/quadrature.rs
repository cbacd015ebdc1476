//! Composite Gauss–Legendre integration with node doubling, tuned for
//! Gaussian-weighted oscillatory integrands `∫ e^{-aξ²} g(ξ) dξ`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::{Error, Real, Result};

/// Points per Gauss–Legendre panel.
pub const PANEL_ORDER: usize = 10;
/// Hard cap on nodes in a single refinement level.
pub const MAX_NODES: usize = 1 << 20;
/// Minimum sampling density of the integrand's oscillation.
pub const NODES_PER_PERIOD: usize = 8;

const PARALLEL_PANELS: usize = 512;

/// Values the engine can integrate: scalars, complex numbers and small
/// arrays of complex numbers sharing one set of nodes.
pub trait QuadValue<T: Real>: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, w: T) -> Self;
    /// Largest component-wise absolute difference.
    fn distance(self, other: Self) -> T;
    /// Largest component-wise magnitude.
    fn magnitude(self) -> T;
}

impl<T: Real> QuadValue<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: T) -> Self {
        self * w
    }
    fn distance(self, other: Self) -> T {
        (self - other).abs()
    }
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Real> QuadValue<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: T) -> Self {
        self * w
    }
    fn distance(self, other: Self) -> T {
        (self - other).norm()
    }
    fn magnitude(self) -> T {
        self.norm()
    }
}

impl<T: Real, const N: usize> QuadValue<T> for [Complex<T>; N] {
    fn zero() -> Self {
        [Complex::new(T::zero(), T::zero()); N]
    }
    fn add(mut self, other: Self) -> Self {
        for (a, b) in self.iter_mut().zip(other) {
            *a = *a + b;
        }
        self
    }
    fn scale(mut self, w: T) -> Self {
        for a in &mut self {
            *a = *a * w;
        }
        self
    }
    fn distance(self, other: Self) -> T {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }
    fn magnitude(self) -> T {
        self.iter().map(|a| a.norm()).fold(T::zero(), T::max)
    }
}

/// Pairwise summation; the fixed recursion order makes results
/// bit-reproducible.
pub fn pairwise_sum<T: Real, V: QuadValue<T>>(values: &[V]) -> V {
    if values.len() <= 8 {
        return values.iter().fold(V::zero(), |acc, v| acc.add(*v));
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]).add(pairwise_sum(&values[mid..]))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = T::from_usize_lossy(n);
        for i in 0..(n + 1) / 2 {
            let guess = (T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
            let mut x = guess;
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite<V, F>(&self, f: &F, a: T, b: T, panels: usize) -> V
    where
        V: QuadValue<T>,
        F: Fn(T) -> V + Sync,
    {
        let h = (b - a) / T::from_usize_lossy(panels);
        let half = h / T::lit(2.0);
        let panel = |p: usize| {
            let mid = a + h * (T::from_usize_lossy(p) + T::lit(0.5));
            let mut acc = V::zero();
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc = acc.add(f(mid + half * *x).scale(*w));
            }
            acc.scale(half)
        };
        let sums: Vec<V> = if panels >= PARALLEL_PANELS {
            (0..panels).into_par_iter().map(panel).collect()
        } else {
            (0..panels).map(panel).collect()
        };
        pairwise_sum(&sums)
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize_lossy(n);
    let dp = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// Outcome of one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<V, T> {
    pub value: V,
    pub est_error: T,
    pub nodes_used: usize,
    pub converged: bool,
}

/// Doubling schedule for [`integrate_composite`].
#[derive(Debug, Clone, Copy)]
pub struct Refinement<T> {
    pub initial_panels: usize,
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_nodes: usize,
}

impl<T: Real> Refinement<T> {
    pub fn absolute(initial_panels: usize, abs_tol: T) -> Self {
        Self {
            initial_panels,
            abs_tol,
            rel_tol: T::zero(),
            max_nodes: MAX_NODES,
        }
    }
}

/// Integrates `f` over `[a, b]`, doubling the panel count until two
/// successive levels agree within `max(abs_tol, rel_tol·|Q|)`.
pub fn integrate_composite<T, V, F>(f: F, a: T, b: T, refine: &Refinement<T>) -> QuadratureResult<V, T>
where
    T: Real,
    V: QuadValue<T>,
    F: Fn(T) -> V + Sync,
{
    let rule = GaussLegendre::new(PANEL_ORDER);
    let mut panels = refine.initial_panels.max(1);
    let mut coarse = rule.composite(&f, a, b, panels);
    let mut est_error = T::infinity();
    loop {
        let fine_panels = panels * 2;
        if fine_panels * PANEL_ORDER > refine.max_nodes {
            return QuadratureResult {
                value: coarse,
                est_error,
                nodes_used: panels * PANEL_ORDER,
                converged: false,
            };
        }
        let fine: V = rule.composite(&f, a, b, fine_panels);
        est_error = fine.distance(coarse);
        let tol = refine.abs_tol.max(refine.rel_tol * fine.magnitude());
        if est_error <= tol {
            return QuadratureResult {
                value: fine,
                est_error,
                nodes_used: fine_panels * PANEL_ORDER,
                converged: true,
            };
        }
        coarse = fine;
        panels = fine_panels;
    }
}

/// Setup for `∫_{-L}^{L} e^{-aξ²} g(ξ) dξ` with `g` oscillating at up to
/// `oscillation_rate` radians per unit `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    pub weight_exponent: T,
    pub half_width: T,
    pub base_nodes: usize,
    pub oscillation_rate: T,
    pub target_abs_err: T,
}

impl<T: Real> QuadratureSpec<T> {
    /// Truncates where `e^{-aL²} = 1e-18`.
    pub fn new(weight_exponent: T, oscillation_rate: T, target_abs_err: T) -> Self {
        Self {
            weight_exponent,
            half_width: (T::lit(41.45) / weight_exponent).sqrt(),
            base_nodes: 64,
            oscillation_rate: oscillation_rate.abs(),
            target_abs_err,
        }
    }

    pub fn with_rate(mut self, rate: T) -> Self {
        self.oscillation_rate = rate.abs();
        self
    }

    /// Node count of the first level.
    pub fn initial_nodes(&self) -> usize {
        let periods = T::lit(2.0) * self.half_width * self.oscillation_rate / T::TAU();
        let by_period = (periods * T::from_usize_lossy(NODES_PER_PERIOD)).ceil().f64();
        let by_rate = (self.oscillation_rate * T::from_usize_lossy(NODES_PER_PERIOD)).ceil().f64();
        let wanted = by_period.max(by_rate).min(MAX_NODES as f64) as usize;
        wanted.max(self.base_nodes)
    }

    fn initial_panels(&self) -> usize {
        self.initial_nodes().div_ceil(PANEL_ORDER)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.weight_exponent > T::zero()
            && self.half_width > T::zero()
            && self.target_abs_err > T::zero()
            && self.oscillation_rate.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::param("quadrature", format!("invalid spec {self:?}")))
        }
    }
}

/// `∫_{-L}^{L} e^{-aξ²} g(ξ) dξ` with error estimated by node doubling.
/// Non-convergence within [`MAX_NODES`] is reported through `converged`.
pub fn integrate_gaussian_oscillatory<T, V, G>(g: G, spec: &QuadratureSpec<T>) -> QuadratureResult<V, T>
where
    T: Real,
    V: QuadValue<T>,
    G: Fn(T) -> V + Sync,
{
    let a = spec.weight_exponent;
    let f = |xi: T| g(xi).scale((-a * xi * xi).exp());
    let refine = Refinement::absolute(spec.initial_panels(), spec.target_abs_err);
    integrate_composite(f, -spec.half_width, spec.half_width, &refine)
}

/// Result of [`integrate_fourier_batch`].
#[derive(Debug, Clone)]
pub struct BatchResult<V, T> {
    pub values: Vec<V>,
    pub est_errors: Vec<T>,
    pub nodes_used: usize,
    pub converged: bool,
}

impl<V, T: Real> BatchResult<V, T> {
    /// Index and size of the largest error estimate.
    pub fn worst(&self) -> (usize, T) {
        self.est_errors
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::zero()), |best, (i, e)| if e > best.1 { (i, e) } else { best })
    }
}

/// `∫ e^{-aξ²} g(ξ) e^{iξX_j} dξ` on the uniform grid `X_j = x0 + j·dx`.
///
/// All outputs share one node set whose density follows the largest
/// `|X_j|` plus `spec.oscillation_rate`; the Fourier factor is advanced by
/// a complex rotation between neighbouring `X_j` and reseeded regularly.
pub fn integrate_fourier_batch<T, const N: usize, G>(
    g: G,
    spec: &QuadratureSpec<T>,
    x0: T,
    dx: T,
    count: usize,
) -> Result<BatchResult<[Complex<T>; N], T>>
where
    T: Real,
    G: Fn(T) -> [Complex<T>; N] + Sync,
{
    spec.validate()?;
    if count == 0 {
        return Ok(BatchResult {
            values: Vec::new(),
            est_errors: Vec::new(),
            nodes_used: 0,
            converged: true,
        });
    }
    let x_last = x0 + dx * T::from_usize_lossy(count - 1);
    let reach = x0.abs().max(x_last.abs());
    let spec = spec.with_rate(spec.oscillation_rate + reach);
    let rule = GaussLegendre::new(PANEL_ORDER);

    let mut panels = spec.initial_panels();
    let mut coarse = fourier_level(&rule, &g, &spec, panels, x0, dx, count);
    loop {
        let fine_panels = panels * 2;
        if fine_panels * PANEL_ORDER > MAX_NODES {
            let est_errors = vec![T::infinity(); count];
            return Ok(BatchResult {
                values: coarse,
                est_errors,
                nodes_used: panels * PANEL_ORDER,
                converged: false,
            });
        }
        let fine = fourier_level(&rule, &g, &spec, fine_panels, x0, dx, count);
        let est_errors: Vec<T> = fine.iter().zip(&coarse).map(|(f, c)| f.distance(*c)).collect();
        let worst = est_errors.iter().copied().fold(T::zero(), T::max);
        if worst <= spec.target_abs_err {
            return Ok(BatchResult {
                values: fine,
                est_errors,
                nodes_used: fine_panels * PANEL_ORDER,
                converged: true,
            });
        }
        coarse = fine;
        panels = fine_panels;
    }
}

const RESEED: usize = 64;

fn fourier_level<T, const N: usize, G>(
    rule: &GaussLegendre<T>,
    g: &G,
    spec: &QuadratureSpec<T>,
    panels: usize,
    x0: T,
    dx: T,
    count: usize,
) -> Vec<[Complex<T>; N]>
where
    T: Real,
    G: Fn(T) -> [Complex<T>; N] + Sync,
{
    let l = spec.half_width;
    let a = spec.weight_exponent;
    let h = (l + l) / T::from_usize_lossy(panels);
    let half = h / T::lit(2.0);
    let nodes: Vec<T> = (0..panels)
        .flat_map(|p| {
            let mid = -l + h * (T::from_usize_lossy(p) + T::lit(0.5));
            rule.nodes.iter().map(move |x| mid + half * *x)
        })
        .collect();
    let base: Vec<[Complex<T>; N]> = nodes
        .par_iter()
        .enumerate()
        .map(|(k, &xi)| {
            let w = rule.weights[k % PANEL_ORDER] * half * (-a * xi * xi).exp();
            g(xi).scale(w)
        })
        .collect();
    let rot: Vec<Complex<T>> = nodes.iter().map(|&xi| Complex::from_polar(T::one(), xi * dx)).collect();

    let blocks = count.div_ceil(RESEED);
    let per_block: Vec<Vec<[Complex<T>; N]>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * RESEED;
            let end = (start + RESEED).min(count);
            let xs = x0 + dx * T::from_usize_lossy(start);
            let mut cur: Vec<Complex<T>> = nodes.iter().map(|&xi| Complex::from_polar(T::one(), xi * xs)).collect();
            let mut out = Vec::with_capacity(end - start);
            for _ in start..end {
                let mut total = [Complex::new(T::zero(), T::zero()); N];
                let mut comp = [Complex::new(T::zero(), T::zero()); N];
                for (chunk_b, chunk_c) in base.chunks(PANEL_ORDER).zip(cur.chunks(PANEL_ORDER)) {
                    let mut panel = [Complex::new(T::zero(), T::zero()); N];
                    for (bv, c) in chunk_b.iter().zip(chunk_c) {
                        for r in 0..N {
                            panel[r] = panel[r] + bv[r] * *c;
                        }
                    }
                    for r in 0..N {
                        neumaier(&mut total[r], &mut comp[r], panel[r]);
                    }
                }
                for r in 0..N {
                    total[r] = total[r] + comp[r];
                }
                out.push(total);
                for (c, r) in cur.iter_mut().zip(&rot) {
                    *c = *c * *r;
                }
            }
            out
        })
        .collect();
    per_block.into_iter().flatten().collect()
}

fn neumaier<T: Real>(sum: &mut Complex<T>, comp: &mut Complex<T>, x: Complex<T>) {
    let step = |s: &mut T, c: &mut T, v: T| {
        let t = *s + v;
        if s.abs() >= v.abs() {
            *c = *c + ((*s - t) + v);
        } else {
            *c = *c + ((v - t) + *s);
        }
        *s = t;
    };
    step(&mut sum.re, &mut comp.re, x.re);
    step(&mut sum.im, &mut comp.im, x.im);
}

/// Trapezoid average of `f` over `[start, start + len]` with `samples`
/// equally spaced points.
pub fn time_average<T: Real, F: Fn(T) -> T>(f: F, start: T, len: T, samples: usize) -> Result<T> {
    if !(len > T::zero()) {
        return Err(Error::param("window_len", "must be positive"));
    }
    if samples < 1000 {
        return Err(Error::param("samples", format!("need at least 1000, got {samples}")));
    }
    let step = len / T::from_usize_lossy(samples - 1);
    let values: Vec<T> = (0..samples)
        .map(|k| {
            let w = if k == 0 || k == samples - 1 { T::lit(0.5) } else { T::one() };
            f(start + step * T::from_usize_lossy(k)) * w
        })
        .collect();
    Ok(pairwise_sum(&values) / T::from_usize_lossy(samples - 1))
}
