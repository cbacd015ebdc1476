use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use spinwalk::asymptotics::{density_large_alpha, density_small_alpha};
use spinwalk::density::{density_general, density_symmetric_with, shannon_entropy, UniformGrid};
use spinwalk::export::{write_lattice, write_profile, write_series, write_table, format_number};
use spinwalk::lattice::{continuum_comparison, LatticeState};
use spinwalk::model::{canonical_spin_state, make_params, SpinLabel};
use spinwalk::observables::{ballistic_slope_half, eta, eta_bar, mean_x, spread_velocity, variance_x};
use spinwalk::validation::{run_selected, ValidationOptions, CRITERIA};
use spinwalk::{Grid, Params, Profile, Series, Spin};

use crate::args::{
    DensityArgs, EntropyArgs, GridArgs, Method, ModelArgs, ObservablesArgs, Quantity, QrwArgs, SpinArgs, ValidateArgs,
};
use crate::config::{ensure_dir, parse_coeffs, parse_sweep, parse_time, parse_times, time_tag};
use crate::CliError;

fn model_params(m: &ModelArgs) -> Result<Params, CliError> {
    match (m.alpha, m.omega) {
        (Some(alpha), None) => {
            if !(alpha >= 0.0) || !alpha.is_finite() {
                return Err(CliError::Invalid(format!("alpha must be non-negative, got {alpha}")));
            }
            Ok(make_params(alpha * m.v / m.sigma, m.v, m.sigma)?)
        }
        (None, Some(omega)) => Ok(make_params(omega, m.v, m.sigma)?),
        _ => Err(CliError::Invalid("give exactly one of --alpha or --omega".into())),
    }
}

fn spin_state(label: &str, twice_j: u32, coeffs: Option<&str>) -> Result<(SpinLabel, Spin), CliError> {
    let label: SpinLabel = label.parse()?;
    let custom = coeffs.map(parse_coeffs).transpose()?;
    if custom.is_some() && label != SpinLabel::Custom {
        return Err(CliError::Invalid("coefficients are only used with the custom state".into()));
    }
    Ok((label, canonical_spin_state(label, twice_j, custom.as_deref())?))
}

fn spin_from_args(s: &SpinArgs) -> Result<(SpinLabel, Spin), CliError> {
    spin_state(&s.spin, s.twice_j, s.coeffs.as_deref())
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
fn write_atomic<F>(path: &Path, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<&mut tempfile::NamedTempFile>) -> spinwalk::Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| CliError::Runtime(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    {
        let mut out = BufWriter::new(&mut tmp);
        write(&mut out)?;
        out.flush().map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn fft_grid(params: &Params, t: f64, twice_j: u32, g: &GridArgs) -> Result<Grid, CliError> {
    let p_max = g.p_max / params.sigma();
    let n = match g.grid_n {
        Some(n) => n,
        None => {
            let reach = f64::from(twice_j) / 2.0 * params.v() * t + 14.0 * params.sigma();
            let dx = std::f64::consts::PI / p_max;
            ((2.0 * reach / 0.9 / dx).ceil() as usize).next_power_of_two().max(4096)
        }
    };
    let grid = Grid::new(n, p_max)?;
    grid.check_resolves(params.sigma())?;
    Ok(grid)
}

fn x_grid(params: &Params, t: f64, g: &GridArgs) -> Result<UniformGrid<f64>, CliError> {
    if !(g.points_per_sigma > 0.0) {
        return Err(CliError::Invalid("points-per-sigma must be positive".into()));
    }
    let sigma = params.sigma();
    let half = match g.x_max {
        Some(x) => x * sigma,
        None => params.v() * t / 2.0 + 10.0 * sigma,
    };
    Ok(UniformGrid::symmetric(half, sigma / g.points_per_sigma)?)
}

fn compute_density(
    label: SpinLabel,
    state: &Spin,
    t: f64,
    params: &Params,
    method: Method,
    g: &GridArgs,
) -> Result<Profile, CliError> {
    let symmetric = label == SpinLabel::YPlus && state.twice_j() == 1;
    let method = match method {
        Method::Auto if symmetric && params.alpha() > 0.0 => Method::Quadrature,
        Method::Auto => Method::Fft,
        m => m,
    };
    if method != Method::Fft && !symmetric {
        return Err(CliError::Invalid(format!(
            "method {method:?} only applies to the spin-1/2 y_plus state; use fft"
        )));
    }
    let profile = match method {
        Method::Fft => density_general(state, t, &fft_grid(params, t, state.twice_j(), g)?, params)?,
        Method::Quadrature => density_symmetric_with(&x_grid(params, t, g)?, t, params, g.tolerance)?,
        Method::SmallAlpha => density_small_alpha(&x_grid(params, t, g)?, t, params)?,
        Method::LargeAlpha | Method::Auto => density_large_alpha(&x_grid(params, t, g)?, t, params)?,
    };
    Ok(profile)
}

fn run_metadata(params: &Params, label: SpinLabel, state: &Spin) -> Value {
    json!({
        "omega": params.omega(),
        "v": params.v(),
        "spin": label.to_string(),
        "twice_j": state.twice_j(),
        "version": env!("CARGO_PKG_VERSION"),
    })
}

pub fn density(a: &DensityArgs) -> Result<(), CliError> {
    let params = model_params(&a.model)?;
    let (label, state) = spin_from_args(&a.spin)?;
    let times = parse_times(&a.times, &params)?;
    ensure_dir(&a.out.output)?;
    for (token, &t) in a.times.iter().zip(&times) {
        let profile = compute_density(label, &state, t, &params, a.method, &a.grid)?;
        let mut extra = run_metadata(&params, label, &state);
        extra["time"] = json!(token.trim());
        let path = a.out.output.join(format!("density_{}.csv", time_tag(token)));
        write_atomic(&path, |w| write_profile(w, &profile, &params, Some(&extra)))?;
    }
    Ok(())
}

pub fn entropy(a: &EntropyArgs) -> Result<(), CliError> {
    let params = model_params(&a.model)?;
    let (label, state) = spin_from_args(&a.spin)?;
    let times = parse_times(&a.times, &params)?;
    ensure_dir(&a.out.output)?;
    let entropies = times
        .iter()
        .map(|&t| Ok(shannon_entropy(&compute_density(label, &state, t, &params, a.method, &a.grid)?)))
        .collect::<Result<Vec<f64>, CliError>>()?;
    // ln t with t in flight times σ/v.
    let ratios = times
        .iter()
        .zip(&entropies)
        .map(|(&t, s)| {
            let log_t = (t / params.flight_time()).ln();
            if log_t > 0.0 {
                s / log_t
            } else {
                f64::NAN
            }
        })
        .collect();
    let s = Series::new("S", times.clone(), entropies)?;
    let r = Series::new("S_over_ln_t", times, ratios)?;
    let mut meta = run_metadata(&params, label, &state);
    meta["alpha"] = json!(params.alpha());
    meta["sigma"] = json!(params.sigma());
    meta["log_time_unit"] = json!("sigma/v");
    write_atomic(&a.out.output.join("entropy.csv"), |w| write_series(w, &[&s, &r], &meta))
}

pub fn observables(a: &ObservablesArgs) -> Result<(), CliError> {
    ensure_dir(&a.out.output)?;
    if let Some(sweep) = &a.sweep_alpha {
        let alphas = parse_sweep(sweep)?;
        let rows = alphas
            .par_iter()
            .map(|&alpha| Ok(vec![alpha, eta_bar(alpha), spread_velocity(alpha)?]))
            .collect::<spinwalk::Result<Vec<_>>>()?;
        let meta = json!({"sweep": sweep, "version": env!("CARGO_PKG_VERSION")});
        let rows = rows.into_iter().map(|r| r.into_iter().map(format_number).collect());
        return write_atomic(&a.out.output.join("observables_sweep.csv"), |w| {
            write_table(w, &meta, &["alpha", "eta_bar", "V"], rows)
        });
    }

    let params = model_params(&a.model)?;
    let alpha = params.alpha();
    let mut meta = json!({
        "alpha": alpha,
        "omega": params.omega(),
        "v": params.v(),
        "sigma": params.sigma(),
        "twice_j": a.twice_j,
        "twice_m": a.twice_m,
        "eta_bar": eta_bar(alpha),
        "version": env!("CARGO_PKG_VERSION"),
    });

    if a.quantity == Quantity::V {
        let v = spread_velocity(alpha)?;
        let small = 0.5 * (1.0 - 3.0 * (std::f64::consts::PI / 2.0).sqrt() * alpha * alpha);
        let large = if alpha > 0.0 { 3f64.sqrt() / (8.0 * alpha * alpha) } else { f64::INFINITY };
        let row = [alpha, v, small, large, ballistic_slope_half(alpha)];
        println!(
            "{}",
            json!({"alpha": alpha, "V": v, "small_alpha_law": small, "large_alpha_law": large, "half_sqrt_eta_bar": row[4]})
        );
        let rows = std::iter::once(row.iter().map(|x| format_number(*x)).collect());
        return write_atomic(&a.out.output.join("spread_velocity.csv"), |w| {
            write_table(w, &meta, &["alpha", "V", "small_alpha_law", "large_alpha_law", "half_sqrt_eta_bar"], rows)
        });
    }

    let (Some(tmax), Some(dt)) = (&a.tmax, &a.dt) else {
        return Err(CliError::Invalid("time series need --tmax and --dt".into()));
    };
    let tmax = parse_time(tmax, Some(&params))?;
    let dt = parse_time(dt, Some(&params))?;
    if !(dt > 0.0) {
        return Err(CliError::Invalid("--dt must be positive".into()));
    }
    let count = (tmax / dt + 1e-9).floor() as usize + 1;
    let times: Vec<f64> = (0..count).map(|k| k as f64 * dt).collect();
    meta["dt"] = json!(dt);

    let want = |q: Quantity| a.quantity == Quantity::All || a.quantity == q;
    let mut series = Vec::new();
    if want(Quantity::Eta) {
        let values = times
            .par_iter()
            .map(|&t| eta(params.omega_t(t), alpha))
            .collect::<spinwalk::Result<Vec<_>>>()?;
        series.push(Series::new("eta", times.clone(), values)?);
    }
    if want(Quantity::MeanX) {
        let values = times
            .par_iter()
            .map(|&t| mean_x(t, a.twice_m, &params))
            .collect::<spinwalk::Result<Vec<_>>>()?;
        series.push(Series::new("mean_x", times.clone(), values)?);
    }
    if want(Quantity::Dx) {
        let values = times
            .par_iter()
            .map(|&t| variance_x(t, a.twice_j, a.twice_m, &params).map(f64::sqrt))
            .collect::<spinwalk::Result<Vec<_>>>()?;
        series.push(Series::new("dx", times.clone(), values)?);
    }
    let refs: Vec<&Series> = series.iter().collect();
    write_atomic(&a.out.output.join("observables.csv"), |w| write_series(w, &refs, &meta))
}

pub fn qrw(a: &QrwArgs) -> Result<(), CliError> {
    if a.steps == 0 {
        return Err(CliError::Invalid("--steps must be at least 1".into()));
    }
    let (label, state) = spin_state(&a.coin, 1, a.coeffs.as_deref())?;
    ensure_dir(&a.out.output)?;
    let mut walk = LatticeState::from_spin(&state)?;
    walk.advance(a.steps);
    let dist = walk.position_distribution();
    let mut meta = json!({"steps": a.steps, "coin_init": label.to_string()});

    let mut spacing = 1.0;
    let mut report = None;
    if a.compare {
        let params = model_params(&a.model)?;
        let t = match &a.time {
            Some(token) => parse_time(token, Some(&params))?,
            None => a.steps as f64 * params.flight_time(),
        };
        let r = continuum_comparison(a.steps, t, &params, &state)?;
        spacing = r.spacing;
        meta["alpha"] = json!(params.alpha());
        meta["t"] = json!(t);
        report = Some(json!({
            "steps": r.steps,
            "t": t,
            "alpha": params.alpha(),
            "coin_init": label.to_string(),
            "dt": r.dt,
            "spacing": r.spacing,
            "kolmogorov_distance": r.kolmogorov,
            "lattice_front_speed": r.lattice_front_speed,
            "continuum_front_speed": r.continuum_front_speed,
        }));
    }
    meta["spacing"] = json!(spacing);
    write_atomic(&a.out.output.join("qrw.csv"), |w| write_lattice(w, &dist, spacing, &meta))?;
    if let Some(report) = report {
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
        write_atomic(&a.out.output.join("qrw_report.json"), |w| {
            writeln!(w, "{text}")?;
            Ok(())
        })?;
    }
    Ok(())
}

pub fn validate(a: &ValidateArgs) -> Result<(), CliError> {
    if let Some(tol) = a.tolerance {
        if !(tol >= 0.0) {
            return Err(CliError::Invalid("tolerance must be non-negative".into()));
        }
    }
    let ids: Vec<usize> = if a.criteria.is_empty() {
        (1..=CRITERIA).collect()
    } else {
        a.criteria.clone()
    };
    if let Some(bad) = ids.iter().find(|&&id| id == 0 || id > CRITERIA) {
        return Err(CliError::Invalid(format!("no criterion {bad}; valid numbers are 1 to {CRITERIA}")));
    }
    let opts = ValidationOptions {
        tolerance_override: a.tolerance,
    };
    let report = run_selected(&ids, opts);
    for c in &report.criteria {
        eprintln!("{}", c.summary());
    }
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    match &a.report {
        Some(path) => write_atomic(path, |w| {
            writeln!(w, "{text}")?;
            Ok(())
        })?,
        None => println!("{text}"),
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failed criteria: {:?}", report.failed_ids())))
    }
}
