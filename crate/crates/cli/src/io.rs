//! CSV ingestion and output.

use std::fs::File;
use std::path::Path;

use lipfit::curve::FitCurve;
use lipfit::domain::{Interval1D, Point, SampleSet};
use lipfit::lbbd::{CurveSource, LbbdCurve};

use crate::error::{CliError, CliResult};

/// Raw sample rows: `d` coordinates then a value.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSamples {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
}

fn open(path: &Path) -> CliResult<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))
}

fn parse_field(path: &Path, line: u64, column: &str, raw: &str) -> CliResult<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| CliError::Ingest(format!("{}: row {line}: column {column}: '{raw}' is not a number", path.display())))?;
    if !v.is_finite() {
        return Err(CliError::Ingest(format!("{}: row {line}: column {column} is not finite", path.display())));
    }
    Ok(v)
}

/// Reads every record of a numeric CSV whose header must equal `expected`.
/// Returned rows carry their 1-based line number in the file.
fn read_numeric(path: &Path, expected: &[String]) -> CliResult<Vec<(u64, Vec<f64>)>> {
    let mut rdr = open(path)?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != expected {
        return Err(CliError::Ingest(format!(
            "{}: header must be '{}', found '{}'",
            path.display(),
            expected.join(","),
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k as u64 + 2;
        let rec = rec.map_err(|e| CliError::Ingest(format!("{}: row {line}: {e}", path.display())))?;
        let vals = rec
            .iter()
            .zip(expected)
            .map(|(raw, col)| parse_field(path, line, col, raw))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push((line, vals));
    }
    Ok(rows)
}

fn sample_header(dim: usize) -> Vec<String> {
    if dim == 1 {
        vec!["x".into(), "y".into()]
    } else {
        (1..=dim).map(|k| format!("x{k}")).chain(["y".to_string()]).collect()
    }
}

/// Reads `x,y` or `x1,...,xd,y`. One-dimensional locations must be strictly
/// increasing; higher-dimensional locations must be distinct.
pub fn read_samples(path: &Path) -> CliResult<RawSamples> {
    let mut rdr = open(path)?;
    let width = rdr.headers().map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?.len();
    if width < 2 {
        return Err(CliError::Ingest(format!("{}: need at least one coordinate column and y", path.display())));
    }
    let dim = width - 1;
    let rows = read_numeric(path, &sample_header(dim))?;
    if rows.is_empty() {
        return Err(CliError::Ingest(format!("{}: no data rows", path.display())));
    }
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for (k, (line, vals)) in rows.iter().enumerate() {
        let p = vals[..dim].to_vec();
        if dim == 1 && k > 0 {
            let prev = points[k - 1][0];
            if p[0] == prev {
                return Err(CliError::Ingest(format!("{}: row {line}: duplicate x = {}", path.display(), p[0])));
            }
            if p[0] < prev {
                return Err(CliError::Ingest(format!("{}: row {line}: x = {} is not sorted (previous {prev})", path.display(), p[0])));
            }
        }
        if dim > 1 {
            if let Some(j) = points.iter().position(|q: &Vec<f64>| *q == p) {
                return Err(CliError::Ingest(format!("{}: row {line}: duplicate location of row {}", path.display(), j + 2)));
            }
        }
        points.push(p);
        ys.push(vals[dim]);
    }
    Ok(RawSamples { dim, points, ys })
}

impl RawSamples {
    /// Interval from the optional bounds, defaulting to the sample span.
    pub fn interval(&self, a: Option<f64>, b: Option<f64>) -> CliResult<Interval1D> {
        let xs: Vec<f64> = self.points.iter().map(|p| p[0]).collect();
        let a = a.unwrap_or(xs[0]);
        let b = b.unwrap_or(xs[xs.len() - 1]);
        let (a, b) = if a == b { (a, a + 1.0) } else { (a, b) };
        Interval1D::new(a, b).map_err(|e| CliError::Usage(format!("domain: {e}")))
    }

    pub fn to_set(&self, a: Option<f64>, b: Option<f64>) -> CliResult<SampleSet> {
        if self.dim == 1 {
            let xs = self.points.iter().map(|p| p[0]).collect();
            return Ok(SampleSet::new_1d(xs, self.ys.clone(), self.interval(a, b)?)?);
        }
        if a.is_some() || b.is_some() {
            return Err(CliError::Usage("--domain-a/--domain-b apply to one-dimensional input only".into()));
        }
        let points = self.points.iter().map(|p| Point::new(p.clone())).collect::<lipfit::Result<Vec<_>>>()?;
        Ok(SampleSet::new_nd(points, self.ys.clone(), None)?)
    }
}

/// Writes `header` and `rows` with shortest round-trip float formatting.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_curve(path: &Path, c: &LbbdCurve) -> CliResult<()> {
    write_csv(path, &["m", "gamma"], c.pairs().map(|(m, g)| vec![num(m), num(g)]))
}

/// Reads an `m,gamma` curve.
pub fn read_curve(path: &Path, periodic: bool) -> CliResult<LbbdCurve> {
    let rows = read_numeric(path, &["m".into(), "gamma".into()])?;
    let (m, g): (Vec<f64>, Vec<f64>) = rows.into_iter().map(|(_, v)| (v[0], v[1])).unzip();
    Ok(LbbdCurve::new(m, g, periodic, CurveSource::Imported)?)
}

/// One fitted-curve row; the band columns are empty without a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub x: f64,
    pub fit: f64,
    pub band: Option<(f64, f64)>,
}

pub const FIT_HEADER: [&str; 4] = ["x", "fit", "pef_lower", "pef_upper"];

pub fn write_fit(path: &Path, rows: &[FitRow]) -> CliResult<()> {
    write_csv(
        path,
        &FIT_HEADER,
        rows.iter().map(|r| {
            let (lo, hi) = r.band.map_or((String::new(), String::new()), |(l, u)| (num(l), num(u)));
            vec![num(r.x), num(r.fit), lo, hi]
        }),
    )
}

/// Reads a file written by [`write_fit`].
pub fn read_fit(path: &Path) -> CliResult<Vec<FitRow>> {
    let mut rdr = open(path)?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != FIT_HEADER {
        return Err(CliError::Ingest(format!("{}: header must be '{}'", path.display(), FIT_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k as u64 + 2;
        let rec = rec.map_err(|e| CliError::Ingest(format!("{}: row {line}: {e}", path.display())))?;
        let x = parse_field(path, line, "x", &rec[0])?;
        let fit = parse_field(path, line, "fit", &rec[1])?;
        let band = if rec[2].is_empty() && rec[3].is_empty() {
            None
        } else {
            Some((parse_field(path, line, "pef_lower", &rec[2])?, parse_field(path, line, "pef_upper", &rec[3])?))
        };
        out.push(FitRow { x, fit, band });
    }
    Ok(out)
}

/// External fits for `compare`: header `replicate,x,fit`, replicates
/// numbered from 0 and listed in order, `x` increasing within each.
pub fn read_external(path: &Path, domain: Interval1D) -> CliResult<Vec<FitCurve>> {
    let rows = read_numeric(path, &["replicate".into(), "x".into(), "fit".into()])?;
    let mut fits = Vec::new();
    let mut cur: Option<(usize, Vec<f64>, Vec<f64>)> = None;
    let finish = |c: (usize, Vec<f64>, Vec<f64>)| FitCurve::from_grid(domain, c.1, c.2);
    for (line, v) in rows {
        let r = v[0];
        if r < 0.0 || r.fract() != 0.0 {
            return Err(CliError::Ingest(format!("{}: row {line}: replicate must be a nonnegative integer", path.display())));
        }
        let r = r as usize;
        match &mut cur {
            Some((id, xs, fs)) if *id == r => {
                xs.push(v[1]);
                fs.push(v[2]);
            }
            _ => {
                if r != fits.len() + usize::from(cur.is_some()) {
                    return Err(CliError::Ingest(format!("{}: row {line}: replicate {r} out of order", path.display())));
                }
                if let Some(done) = cur.take() {
                    fits.push(finish(done)?);
                }
                cur = Some((r, vec![v[1]], vec![v[2]]));
            }
        }
    }
    if let Some(done) = cur {
        fits.push(finish(done)?);
    }
    Ok(fits)
}
