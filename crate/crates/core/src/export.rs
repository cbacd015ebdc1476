//! CSV output: one `#`-prefixed line of JSON metadata, a header row, then
//! numbers written with 17 significant digits so that they round-trip.

use std::io::{BufRead, Write};

use serde_json::{json, Map, Value};

use crate::density::DensityProfile;
use crate::lattice::SiteDistribution;
use crate::model::PhysicalParams;
use crate::observables::TimeSeries;
use crate::{Error, Real, Result};

/// Round-trip representation of a number.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the metadata line, the header and the rows.
pub fn write_table<W, I>(out: &mut W, metadata: &Value, columns: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<String>>,
{
    let meta = serde_json::to_string(metadata).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out, "# {meta}")?;
    writeln!(out, "{}", columns.join(","))?;
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::Format(format!("row has {} fields, header has {}", row.len(), columns.len())));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn merge(mut base: Value, extra: Option<&Value>) -> Value {
    if let (Value::Object(map), Some(Value::Object(more))) = (&mut base, extra) {
        for (k, v) in more {
            map.insert(k.clone(), v.clone());
        }
    }
    base
}

fn number<T: Real>(x: T) -> Value {
    let x = x.f64();
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// `{alpha, t, t_over_T, method, norm_residual, sigma, clipped}`.
pub fn profile_metadata<T: Real>(profile: &DensityProfile<T>, params: &PhysicalParams<T>) -> Value {
    let t_over_period = params.larmor_period().map(|p| number(profile.t / p)).unwrap_or(Value::Null);
    json!({
        "alpha": number(profile.alpha),
        "t": number(profile.t),
        "t_over_T": t_over_period,
        "method": profile.method.name(),
        "norm_residual": number(profile.norm_residual),
        "sigma": number(profile.sigma),
        "clipped": profile.clipped,
    })
}

/// Columns `x, x_over_sigma, P`.
pub fn write_profile<W: Write, T: Real>(
    out: &mut W,
    profile: &DensityProfile<T>,
    params: &PhysicalParams<T>,
    extra: Option<&Value>,
) -> Result<()> {
    let meta = merge(profile_metadata(profile, params), extra);
    let rows = (0..profile.values.len()).map(|i| {
        vec![
            format_number(profile.x(i).f64()),
            format_number(profile.x_over_sigma(i).f64()),
            format_number(profile.values[i].f64()),
        ]
    });
    write_table(out, &meta, &["x", "x_over_sigma", "P"], rows)
}

/// Columns `t` followed by one column per series, named by its label.
pub fn write_series<W: Write, T: Real>(out: &mut W, series: &[&TimeSeries<T>], metadata: &Value) -> Result<()> {
    let Some(first) = series.first() else {
        return Err(Error::Format("no series to write".into()));
    };
    if series.iter().any(|s| s.times != first.times) {
        return Err(Error::Format("series do not share their time points".into()));
    }
    let mut columns = vec!["t"];
    columns.extend(series.iter().map(|s| s.label.as_str()));
    let rows = (0..first.len()).map(|i| {
        let mut row = vec![format_number(first.times[i].f64())];
        row.extend(series.iter().map(|s| format_number(s.values[i].f64())));
        row
    });
    write_table(out, metadata, &columns, rows)
}

/// Columns `n, x, P` with `x = n·spacing`.
pub fn write_lattice<W: Write, T: Real>(
    out: &mut W,
    dist: &SiteDistribution<T>,
    spacing: T,
    metadata: &Value,
) -> Result<()> {
    let rows = (0..dist.probs.len()).map(|k| {
        let n = dist.site(k);
        vec![
            n.to_string(),
            format_number(n as f64 * spacing.f64()),
            format_number(dist.probs[k].f64()),
        ]
    });
    write_table(out, metadata, &["n", "x", "P"], rows)
}

/// A parsed CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Reads a file written by this module.
pub fn read_table<R: BufRead>(input: R) -> Result<Table> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
    let json_text = first
        .strip_prefix('#')
        .ok_or_else(|| Error::Format("first line is not a metadata comment".into()))?;
    let metadata = match serde_json::from_str(json_text.trim()) {
        Ok(Value::Object(map)) => map,
        Ok(_) => return Err(Error::Format("metadata is not a JSON object".into())),
        Err(e) => return Err(Error::Format(format!("metadata: {e}"))),
    };
    let header = lines.next().ok_or_else(|| Error::Format("missing header".into()))??;
    let columns: Vec<String> = header.split(',').map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.starts_with('#') {
            return Err(Error::Format(format!("unexpected comment on data line {}", k + 1)));
        }
        let row = line
            .split(',')
            .map(|f| f.parse::<f64>().map_err(|e| Error::Format(format!("line {}: {e}", k + 3))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != columns.len() {
            return Err(Error::Format(format!("line {} has {} fields", k + 3, row.len())));
        }
        rows.push(row);
    }
    Ok(Table { metadata, columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_round_trip() {
        let meta = json!({"steps": 3, "coin_init": "y_plus"});
        let mut buf = Vec::new();
        write_table(&mut buf, &meta, &["a", "b"], vec![vec!["1".into(), format_number(0.1)]]).unwrap();
        let table = read_table(&buf[..]).unwrap();
        assert_eq!(Value::Object(table.metadata), meta);
        assert_eq!(table.rows, vec![vec![1.0, 0.1]]);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 1);
    }

    #[test]
    fn rejects_missing_metadata() {
        assert!(read_table("x,P\n1,2\n".as_bytes()).is_err());
    }
}
