//! Config files and the small text formats accepted on the command line.

use std::ffi::OsString;
use std::path::Path;

use spinwalk::{Complex64, Params};

use crate::CliError;

/// Inserts the flags from a `--config` file directly after the subcommand
/// so that flags given on the command line, which come later, win.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Invalid(format!("cannot read config file {}: {e}", path.display())))?;
    let flags = parse_config(&text)?;
    let Some(sub) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(args);
    };
    let at = sub + 2;
    let mut out = args[..at].to_vec();
    out.extend(flags.into_iter().map(OsString::from));
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<std::path::PathBuf> {
    let mut it = args.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(Into::into);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// `key = value` per line; `#` starts a comment.  Keys are flag names with
/// or without the leading dashes; `true`/`false` toggle switches.
pub fn parse_config(text: &str) -> Result<Vec<String>, CliError> {
    let mut flags = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("config line {}: expected key = value", k + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(CliError::Invalid(format!("config line {}: invalid key", k + 1)));
        }
        match value {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => flags.push(format!("--{key}={value}")),
        }
    }
    Ok(flags)
}

/// `2T` is two precession periods, `3F` three flight times `σ/v`, and a
/// bare number is a raw time.
pub fn parse_time(token: &str, params: Option<&Params>) -> Result<f64, CliError> {
    let token = token.trim();
    let bad = || CliError::Invalid(format!("invalid time `{token}`"));
    let (number, unit) = match token.chars().last() {
        Some('T') => (&token[..token.len() - 1], Some('T')),
        Some('F') => (&token[..token.len() - 1], Some('F')),
        _ => (token, None),
    };
    let value: f64 = number.trim().parse().map_err(|_| bad())?;
    if !value.is_finite() || value < 0.0 {
        return Err(CliError::Invalid(format!("time `{token}` must be non-negative")));
    }
    match unit {
        None => Ok(value),
        Some(u) => {
            let params = params.ok_or_else(|| CliError::Invalid(format!("time `{token}` needs model parameters")))?;
            match u {
                'T' => params
                    .larmor_period()
                    .map(|p| value * p)
                    .ok_or_else(|| CliError::Invalid("periods are undefined when omega = 0".into())),
                _ => Ok(value * params.flight_time()),
            }
        }
    }
}

/// Parses and checks a sorted list of times.
pub fn parse_times(tokens: &[String], params: &Params) -> Result<Vec<f64>, CliError> {
    let times = tokens
        .iter()
        .map(|t| parse_time(t, Some(params)))
        .collect::<Result<Vec<_>, _>>()?;
    if times.is_empty() {
        return Err(CliError::Invalid("no times given".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::Invalid("times must be sorted".into()));
    }
    Ok(times)
}

/// `re:im,re:im,...`; a bare number is real.
pub fn parse_coeffs(text: &str) -> Result<Vec<Complex64>, CliError> {
    text.split(',')
        .map(|pair| {
            let bad = || CliError::Invalid(format!("invalid coefficient `{pair}`"));
            let (re, im) = match pair.split_once(':') {
                Some((re, im)) => (re, im),
                None => (pair, "0"),
            };
            Ok(Complex64::new(
                re.trim().parse().map_err(|_| bad())?,
                im.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

/// `lo:hi:log:count` or `lo:hi:lin:count`.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Invalid(format!("invalid sweep `{text}`, expected lo:hi:log|lin:count"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, scale, count] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    if count < 2 || !(lo >= 0.0) || !(hi > lo) {
        return Err(bad());
    }
    let frac = |k: usize| k as f64 / (count - 1) as f64;
    match scale {
        "log" if lo > 0.0 => Ok((0..count).map(|k| lo * (hi / lo).powf(frac(k))).collect()),
        "lin" => Ok((0..count).map(|k| lo + (hi - lo) * frac(k)).collect()),
        _ => Err(bad()),
    }
}

/// File-name friendly form of a time token.
pub fn time_tag(token: &str) -> String {
    token
        .trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}
