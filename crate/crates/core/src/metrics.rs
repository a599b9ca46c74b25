//! Losses between concrete curves, worst-case prediction errors over the
//! class `ALB(m, sigma)`, the point-wise error function and its ordering.
//!
//! For a function known to pass through the samples and to lie within
//! `sigma` of an `m`-Lipschitz function, the value at an unobserved `x` is
//! confined to
//!
//! ```text
//! [ max_i (y_i - m |x - x_i|) - sigma,  min_i (y_i + m |x - x_i|) + sigma ]
//! ```
//!
//! Every error measure here is a functional of that band and of the method's
//! estimate inside it.

use serde::{Deserialize, Serialize};

use crate::curve::{FitCurve, MethodId};
use crate::domain::{diam_of, Interval1D, LbbdPair, SampleSet};
use crate::error::{Error, Result};
use crate::fit::{self, augmented_points, envelope_1d, lipfit_envelope};

/// Relative slack accepted when checking that data fit a given (m, sigma).
pub const PAIR_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LossKind {
    Il,
    Spwl,
    Mpwl,
    Sspwl,
    Smpwl,
    Sil,
    Fspwl,
    Fmpwl,
    Fil,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "IL" => LossKind::Il,
            "SPWL" => LossKind::Spwl,
            "MPWL" => LossKind::Mpwl,
            "SSPWL" => LossKind::Sspwl,
            "SMPWL" => LossKind::Smpwl,
            "SIL" => LossKind::Sil,
            "FSPWL" => LossKind::Fspwl,
            "FMPWL" => LossKind::Fmpwl,
            "FIL" => LossKind::Fil,
            other => return Err(Error::Input(format!("unknown loss '{other}'"))),
        })
    }
}

/// Trapezoid rule over a (not necessarily uniform) grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}

/// Loss between a reference `truth` and an estimate `est`, both tabulated on
/// `grid` (which spans the domain). `ctx` supplies `m` for the F-variants.
pub fn loss(kind: LossKind, grid: &[f64], truth: &[f64], est: &[f64], ctx: Option<LbbdPair>) -> Result<f64> {
    if grid.len() < 2 || truth.len() != grid.len() || est.len() != grid.len() {
        return Err(Error::Input("loss needs both curves on a shared grid of at least two points".into()));
    }
    let volume = grid[grid.len() - 1] - grid[0];
    if !(volume > 0.0) {
        return Err(Error::Input("loss grid must be increasing".into()));
    }
    let abs_diff: Vec<f64> = truth.iter().zip(est).map(|(f, g)| (f - g).abs()).collect();
    let il = (trapezoid(grid, truth) - trapezoid(grid, est)).abs();
    let spwl = abs_diff.iter().fold(0.0, |a: f64, &b| a.max(b));
    let mpwl = trapezoid(grid, &abs_diff) / volume;
    let by_diam = |v: f64| {
        let d = diam_of(truth);
        if d > 0.0 {
            Ok(v / d)
        } else {
            Err(Error::Degenerate("standardized loss of a constant reference (diameter 0)".into()))
        }
    };
    let by_family = |v: f64| match ctx {
        None => Err(Error::Parameter("family-standardized loss needs an LB".into())),
        Some(p) if p.m > 0.0 => Ok(v / (volume * p.m)),
        Some(_) => Err(Error::Degenerate("family-standardized loss with LB 0".into())),
    };
    match kind {
        LossKind::Il => Ok(il),
        LossKind::Spwl => Ok(spwl),
        LossKind::Mpwl => Ok(mpwl),
        LossKind::Sil => by_diam(il),
        LossKind::Sspwl => by_diam(spwl),
        LossKind::Smpwl => by_diam(mpwl),
        LossKind::Fil => by_family(il),
        LossKind::Fspwl => by_family(spwl),
        LossKind::Fmpwl => by_family(mpwl),
    }
}

/// Largest amount by which any pair violates `|y_i - y_j| <= m d_ij + 2 sigma`.
fn pair_violation(pts: &[(f64, f64)], pair: LbbdPair) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..pts.len() {
        for j in 0..i {
            let v = (pts[i].1 - pts[j].1).abs() - pair.m * (pts[i].0 - pts[j].0).abs() - 2.0 * pair.sigma;
            worst = worst.max(v);
        }
    }
    worst
}

fn value_scale(ys: &[f64]) -> f64 {
    1.0 + ys.iter().fold(0.0f64, |a, y| a.max(y.abs()))
}

/// Error unless some member of `ALB(m, sigma)` (periodic class when
/// `periodic`) passes through the samples.
pub fn check_pair(s: &SampleSet, pair: LbbdPair, periodic: bool) -> Result<()> {
    let violation = if s.dim() == 1 {
        pair_violation(&augmented_points(s, periodic)?, pair)
    } else {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..s.len() {
            for j in 0..i {
                let v = (s.ys()[i] - s.ys()[j]).abs() - pair.m * s.dist(i, j) - 2.0 * pair.sigma;
                worst = worst.max(v);
            }
        }
        worst
    };
    if violation > PAIR_SLACK * value_scale(s.ys()) {
        return Err(Error::Infeasible(format!(
            "data exceed |y_i - y_j| <= m d_ij + 2 sigma by {violation:e} for m = {}, sigma = {}",
            pair.m, pair.sigma
        )));
    }
    Ok(())
}

/// Half-width of the admissible band at `x`: the worst-case error of the
/// envelope midpoint. Zero at sample locations.
pub fn pef_envelope(s: &SampleSet, pair: LbbdPair, x: &[f64]) -> Result<f64> {
    if s.sample_index(x).is_some() {
        return Ok(0.0);
    }
    let env = lipfit_envelope(s, pair.m, x)?;
    clamp_width(env.half_width() + pair.sigma, s.ys(), x)
}

fn clamp_width(w: f64, ys: &[f64], x: &[f64]) -> Result<f64> {
    if w < -PAIR_SLACK * value_scale(ys) {
        return Err(Error::Infeasible(format!("admissible band is empty at x = {x:?} (half-width {w:e})")));
    }
    Ok(w.max(0.0))
}

/// Worst-case absolute error at `x` (off the samples) of an estimate `value`,
/// given the admissible band built from `pts`.
#[inline]
fn band_error(pts: &[(f64, f64)], pair: LbbdPair, x: f64, value: f64) -> (f64, f64, f64) {
    let env = envelope_1d(pts, pair.m, x);
    let hi = env.upper + pair.sigma;
    let lo = env.lower - pair.sigma;
    ((hi - value).max(value - lo), hi - value, value - lo)
}

/// Closed-form errors on one gap between consecutive samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentErrors {
    pub dspwe: f64,
    pub die: f64,
    pub spwe: f64,
    /// True when `|m*| <= m`.
    pub within_bound: bool,
}

/// Worst-case errors of NN, LI or Lipfit between consecutive samples `a`, `b`.
pub fn segment_errors(a: (f64, f64), b: (f64, f64), pair: LbbdPair, method: MethodId) -> Result<SegmentErrors> {
    let LbbdPair { m, sigma } = pair;
    if !(m > 0.0) {
        return Err(Error::Parameter(format!("segment errors need a positive LB, got {m}")));
    }
    if !(a.0 < b.0) {
        return Err(Error::Input("segment endpoints must satisfy x_a < x_b".into()));
    }
    let dx = b.0 - a.0;
    let dy = b.1 - a.1;
    let slope = (dy / dx).abs();
    let spwe = m * dx / 2.0 + sigma;
    let method = method.base();
    if !matches!(method, MethodId::Nn | MethodId::Li | MethodId::Lipfit) {
        return Err(Error::Input(format!("closed forms exist for nn, li and lipfit, not {method}")));
    }
    if slope <= m {
        let delta = (dx - (dy / m).abs()) / 2.0;
        let dspwe = match method {
            MethodId::Nn => m * dx / 2.0 + sigma,
            MethodId::Li => delta * (m + slope) + sigma,
            _ => delta * m + sigma,
        };
        let die = (m * m - slope * slope) / (4.0 * m) * dx * dx + sigma * dx;
        Ok(SegmentErrors { dspwe, die, spwe, within_bound: true })
    } else {
        let delta = dx * (slope - m) / 2.0;
        if sigma < delta - PAIR_SLACK * (1.0 + a.1.abs().max(b.1.abs())) {
            return Err(Error::Infeasible(format!(
                "slope {slope} between samples needs sigma >= {delta}, got {sigma}"
            )));
        }
        let dspwe = match method {
            MethodId::Nn => m * dx / 2.0 + sigma,
            MethodId::Li => sigma,
            _ => (sigma - delta).max(0.0),
        };
        Ok(SegmentErrors { dspwe, die: (sigma - delta).max(0.0) * dx, spwe, within_bound: false })
    }
}

/// Errors restricted to one piece of the domain partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub lo: f64,
    pub hi: f64,
    pub dspwe: f64,
    pub die: f64,
    pub spwe: f64,
    pub ie: f64,
    /// Closed forms for gaps between consecutive samples (NN, LI, Lipfit).
    pub closed_form: Option<SegmentErrors>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateErrors {
    pub dspwe: f64,
    pub die: f64,
    pub spwe: f64,
    pub ie: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub method: MethodId,
    pub pair: LbbdPair,
    pub periodic: bool,
    pub grid_n: usize,
    pub per_segment: Vec<SegmentReport>,
    pub aggregate: AggregateErrors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ErrorKind {
    Dspwe,
    Die,
    Spwe,
    Ie,
}

impl ErrorKind {
    pub fn pick(self, a: &AggregateErrors) -> f64 {
        match self {
            ErrorKind::Dspwe => a.dspwe,
            ErrorKind::Die => a.die,
            ErrorKind::Spwe => a.spwe,
            ErrorKind::Ie => a.ie,
        }
    }
}

impl std::str::FromStr for ErrorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "DSPWE" => ErrorKind::Dspwe,
            "DIE" => ErrorKind::Die,
            "SPWE" => ErrorKind::Spwe,
            "IE" => ErrorKind::Ie,
            other => return Err(Error::Input(format!("unknown error measure '{other}'"))),
        })
    }
}

pub const DEFAULT_GRID_N: usize = 10_000;
pub const MIN_GRID_N: usize = 1_000;

/// The method's estimate off the samples, as a closure over `x`.
enum Estimate<'a> {
    Midpoint,
    Curve(&'a FitCurve),
}

/// Worst-case non-data-informed error over a stretch of width `w` measured
/// from the nearest sample, inside a gap of total length `gap` bounded by
/// samples on both sides (`two_sided`) or open at the far end.
fn uninformed(pair: LbbdPair, w: f64, gap: f64, two_sided: bool) -> (f64, f64) {
    let LbbdPair { m, sigma } = pair;
    if !two_sided {
        return (m * w + sigma, m * w * w / 2.0 + sigma * w);
    }
    let half = gap / 2.0;
    if w <= half {
        (m * w + sigma, m * w * w / 2.0 + sigma * w)
    } else {
        let tail = gap - w;
        (m * half + sigma, m * (half * half - tail * tail / 2.0) + sigma * w)
    }
}

/// Worst-case errors of `method` for `(m, sigma)` over the declared interval.
///
/// Point-wise errors are evaluated on a uniform grid of about `grid_n` points
/// spread over the pieces of the partition at the samples; integrals use the
/// trapezoid rule. SPWE and IE are exact.
pub fn error_report(
    s: &SampleSet,
    pair: LbbdPair,
    method: MethodId,
    periodic: bool,
    grid_n: usize,
) -> Result<ErrorReport> {
    let periodic = periodic || method.is_periodic();
    let base = method.base();
    let curve;
    let estimate = match base {
        MethodId::Lipfit => Estimate::Midpoint,
        MethodId::External => return Err(Error::Input("use error_report_for_curve for external fits".into())),
        _ => {
            let m = if pair.m > 0.0 { Some(pair.m) } else { None };
            let as_periodic = match (base, periodic) {
                (MethodId::Nn, true) => MethodId::Pnn,
                (MethodId::Li, true) => MethodId::Pli,
                (other, _) => other,
            };
            curve = fit::fit_method(s, as_periodic, m)?;
            Estimate::Curve(&curve)
        }
    };
    report_inner(s, pair, method, periodic, grid_n, estimate)
}

/// Like [`error_report`] for an arbitrary fitted curve (e.g. an external fit).
pub fn error_report_for_curve(
    s: &SampleSet,
    pair: LbbdPair,
    curve: &FitCurve,
    periodic: bool,
    grid_n: usize,
) -> Result<ErrorReport> {
    report_inner(s, pair, curve.method(), periodic, grid_n, Estimate::Curve(curve))
}

fn report_inner(
    s: &SampleSet,
    pair: LbbdPair,
    method: MethodId,
    periodic: bool,
    grid_n: usize,
    estimate: Estimate<'_>,
) -> Result<ErrorReport> {
    if s.dim() != 1 {
        return Err(Error::Input("error reports are defined for one-dimensional samples".into()));
    }
    if grid_n < MIN_GRID_N {
        return Err(Error::Input(format!("grid_n must be at least {MIN_GRID_N}, got {grid_n}")));
    }
    check_pair(s, pair, periodic)?;
    let iv = s.interval()?;
    let pts = augmented_points(s, periodic)?;
    let xs = s.xs();
    let n = xs.len();
    let wrap_gap = iv.len() - (xs[n - 1] - xs[0]);

    let mut edges = vec![iv.a];
    edges.extend(xs.iter().copied().filter(|&x| x > iv.a && x < iv.b));
    edges.push(iv.b);

    let mut per_segment = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let k = xs.partition_point(|&x| x <= lo);
        let interior = k >= 1 && k < n;
        let (spwe, ie) = if interior {
            let gap = hi - lo;
            (pair.m * gap / 2.0 + pair.sigma, pair.m * gap * gap / 4.0 + pair.sigma * gap)
        } else if !periodic {
            uninformed(pair, hi - lo, hi - lo, false)
        } else {
            uninformed(pair, hi - lo, wrap_gap, true)
        };
        let closed_form = match method.base() {
            MethodId::Nn | MethodId::Li | MethodId::Lipfit if interior && pair.m > 0.0 => Some(segment_errors(
                (xs[k - 1], s.ys()[k - 1]),
                (xs[k], s.ys()[k]),
                pair,
                method.base(),
            )?),
            _ => None,
        };
        let (dspwe, die) = dense_segment(&pts, pair, iv, lo, hi, grid_n, &estimate);
        per_segment.push(SegmentReport { lo, hi, dspwe, die, spwe, ie, closed_form });
    }
    let aggregate = AggregateErrors {
        dspwe: per_segment.iter().fold(0.0, |a, r| a.max(r.dspwe)),
        die: per_segment.iter().map(|r| r.die).sum(),
        spwe: per_segment.iter().fold(0.0, |a, r| a.max(r.spwe)),
        ie: per_segment.iter().map(|r| r.ie).sum(),
    };
    Ok(ErrorReport { method, pair, periodic, grid_n, per_segment, aggregate })
}

/// Sup of the point-wise error and worst-case integral error on `[lo, hi]`,
/// evaluated off the samples (one-sided limits at the ends). The grid is
/// split at the estimate's piece boundaries so jumps are never straddled.
fn dense_segment(
    pts: &[(f64, f64)],
    pair: LbbdPair,
    iv: Interval1D,
    lo: f64,
    hi: f64,
    grid_n: usize,
    estimate: &Estimate<'_>,
) -> (f64, f64) {
    let mut breaks = vec![lo];
    if let Estimate::Curve(c) = estimate {
        breaks.extend(c.pieces().iter().map(|p| p.span().1).filter(|&x| x > lo && x < hi));
    }
    breaks.push(hi);
    let share = ((grid_n as f64) * (hi - lo) / iv.len()).ceil() as usize;
    let total = share.max(16);
    let mut sup = 0.0f64;
    let (mut above, mut below) = (0.0, 0.0);
    for w in breaks.windows(2) {
        let (s_lo, s_hi) = (w[0], w[1]);
        let count = ((total as f64 * (s_hi - s_lo) / (hi - lo)).ceil() as usize).max(2) + 1;
        let h = (s_hi - s_lo) / (count - 1) as f64;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..count {
            let x = if i == count - 1 { s_hi } else { s_lo + h * i as f64 };
            let value = match estimate {
                Estimate::Midpoint => envelope_1d(pts, pair.m, x).midpoint(),
                Estimate::Curve(c) if i == 0 => c.eval_right_limit(x),
                Estimate::Curve(c) => c.eval_piece(x),
            };
            let (err, up, down) = band_error(pts, pair, x, value);
            sup = sup.max(err);
            if let Some((pu, pd)) = prev {
                above += 0.5 * h * (pu + up);
                below += 0.5 * h * (pd + down);
            }
            prev = Some((up, down));
        }
    }
    (sup, above.max(below).max(0.0))
}

/// Point-wise worst-case error profile of `method` on `grid` (off-sample
/// values; the profile is zero at exact sample locations). Lipfit is scored
/// as the midpoint of the admissible band.
pub fn pef_profile(
    s: &SampleSet,
    pair: LbbdPair,
    method: MethodId,
    periodic: bool,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let periodic = periodic || method.is_periodic();
    let curve = match method.base() {
        MethodId::Lipfit => None,
        base => {
            let as_periodic = match (base, periodic) {
                (MethodId::Nn, true) => MethodId::Pnn,
                (MethodId::Li, true) => MethodId::Pli,
                (other, _) => other,
            };
            Some(fit::fit_method(s, as_periodic, if pair.m > 0.0 { Some(pair.m) } else { None })?)
        }
    };
    profile_inner(s, pair, periodic, grid, curve.as_ref())
}

/// Like [`pef_profile`] for an arbitrary fitted curve.
pub fn pef_profile_for_curve(
    s: &SampleSet,
    pair: LbbdPair,
    curve: &FitCurve,
    periodic: bool,
    grid: &[f64],
) -> Result<Vec<f64>> {
    profile_inner(s, pair, periodic || curve.method().is_periodic(), grid, Some(curve))
}

fn profile_inner(
    s: &SampleSet,
    pair: LbbdPair,
    periodic: bool,
    grid: &[f64],
    curve: Option<&FitCurve>,
) -> Result<Vec<f64>> {
    check_pair(s, pair, periodic)?;
    let pts = augmented_points(s, periodic)?;
    grid.iter()
        .map(|&x| {
            if s.sample_index(&[x]).is_some() {
                return Ok(0.0);
            }
            let value = match curve {
                None => envelope_1d(&pts, pair.m, x).midpoint(),
                Some(c) => c.eval(x)?,
            };
            clamp_width(band_error(&pts, pair, x, value).0, s.ys(), &[x])
        })
        .collect()
}

/// Outcome of comparing two point-wise error profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PwOrder {
    /// First profile is everywhere no larger (and somewhere smaller).
    Dominates,
    /// First profile is everywhere no smaller (and somewhere larger).
    Dominated,
    /// Both relations hold.
    Equal,
    Incomparable,
}

/// Point-wise comparison of two error profiles on the same grid, with
/// tolerance `1e-12`.
pub fn pw_dominates(e1: &[f64], e2: &[f64]) -> Result<PwOrder> {
    if e1.len() != e2.len() {
        return Err(Error::Input(format!("profiles have {} and {} points", e1.len(), e2.len())));
    }
    const TOL: f64 = 1e-12;
    let le = e1.iter().zip(e2).all(|(a, b)| *a <= b + TOL);
    let ge = e1.iter().zip(e2).all(|(a, b)| *a + TOL >= *b);
    Ok(match (le, ge) {
        (true, true) => PwOrder::Equal,
        (true, false) => PwOrder::Dominates,
        (false, true) => PwOrder::Dominated,
        (false, false) => PwOrder::Incomparable,
    })
}

impl PwOrder {
    /// `e1 <=_pw e2`.
    pub fn first_le(self) -> bool {
        matches!(self, PwOrder::Dominates | PwOrder::Equal)
    }
}
