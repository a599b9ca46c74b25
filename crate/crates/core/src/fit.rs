//! Approximation methods: AVG, NN, PNN, LI, PLI, Lipfit and PLipfit.
//!
//! Lipfit estimates `f(x)` by the midpoint of the tightest Lipschitz
//! envelopes through the data,
//!
//! ```text
//! lower(x) = max_i (y_i - m |x - x_i|),   upper(x) = min_i (y_i + m |x - x_i|),
//! ```
//!
//! which is optimal point-wise for any bound deviation. In one dimension the
//! midpoint between two consecutive samples has a closed form (see
//! [`lipfit_segment`]); elsewhere the envelope is evaluated directly.

use serde::{Deserialize, Serialize};

use crate::curve::{FitCurve, MethodId, PiecewiseLinearFn};
use crate::domain::{euclid, Interval1D, SampleSet};
use crate::error::{Error, Result};

/// Lower and upper Lipschitz envelopes at a query point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePair {
    pub lower: f64,
    pub upper: f64,
}

impl EnvelopePair {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// `(upper - lower) / 2`; negative when the data are inconsistent with the
    /// bound used to build the envelope.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

/// Envelopes of all samples at `x` (any dimension). `m >= 0`.
pub fn lipfit_envelope(s: &SampleSet, m: f64, x: &[f64]) -> Result<EnvelopePair> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::Parameter(format!("LB must be finite and nonnegative, got {m}")));
    }
    if x.len() != s.dim() {
        return Err(Error::Input(format!("query has dimension {}, samples have {}", x.len(), s.dim())));
    }
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for (i, &y) in s.ys().iter().enumerate() {
        let r = m * euclid(x, s.x(i));
        lower = lower.max(y - r);
        upper = upper.min(y + r);
    }
    Ok(EnvelopePair { lower, upper })
}

/// One-dimensional envelope over explicit `(x, y)` points.
pub(crate) fn envelope_1d(pts: &[(f64, f64)], m: f64, x: f64) -> EnvelopePair {
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for &(xi, yi) in pts {
        let r = m * (x - xi).abs();
        lower = lower.max(yi - r);
        upper = upper.min(yi + r);
    }
    EnvelopePair { lower, upper }
}

/// The samples of a 1-d set as `(x, y)` pairs, augmented for periodic methods
/// with `(x_n - (b - a), y_n)` in front and `(x_1 + (b - a), y_1)` at the back.
/// An augmented copy landing exactly on an existing sample is dropped.
pub fn augmented_points(s: &SampleSet, periodic: bool) -> Result<Vec<(f64, f64)>> {
    let xs = s.xs();
    let ys = s.ys();
    let mut pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    if periodic {
        let iv = s.interval()?;
        let n = pts.len();
        let front = (xs[n - 1] - iv.len(), ys[n - 1]);
        let back = (xs[0] + iv.len(), ys[0]);
        if front.0 < xs[0] {
            pts.insert(0, front);
        }
        if back.0 > xs[n - 1] {
            pts.push(back);
        }
    }
    Ok(pts)
}

fn pinned_of(s: &SampleSet) -> Vec<(f64, f64)> {
    s.xs().iter().copied().zip(s.ys().iter().copied()).collect()
}

fn require_1d(s: &SampleSet) -> Result<Interval1D> {
    if s.dim() != 1 {
        return Err(Error::Input("method is defined for one-dimensional samples only".into()));
    }
    s.interval()
}

/// Constant fit at the sample mean; samples are pinned.
pub fn avg_fit(s: &SampleSet) -> Result<FitCurve> {
    let iv = require_1d(s)?;
    let mean = s.ys().iter().sum::<f64>() / s.len() as f64;
    FitCurve::new(
        iv,
        vec![PiecewiseLinearFn::constant(iv.a, iv.b, mean)?],
        pinned_of(s),
        MethodId::Avg,
        false,
    )
}

/// Nearest-neighbour steps over the (possibly augmented) points, clipped to
/// the domain. A piece owns its right endpoint, so ties go to the left point.
fn step_curve(s: &SampleSet, periodic: bool, method: MethodId) -> Result<FitCurve> {
    let iv = require_1d(s)?;
    let pts = augmented_points(s, periodic)?;
    let mut pieces = Vec::with_capacity(pts.len());
    let mut lo = iv.a;
    for (k, &(_, y)) in pts.iter().enumerate() {
        let hi = if k + 1 < pts.len() { (0.5 * (pts[k].0 + pts[k + 1].0)).min(iv.b) } else { iv.b };
        if hi > lo {
            pieces.push(PiecewiseLinearFn::constant(lo, hi, y)?);
            lo = hi;
        }
        if lo >= iv.b {
            break;
        }
    }
    FitCurve::new(iv, pieces, pinned_of(s), method, periodic)
}

pub fn nn_fit(s: &SampleSet) -> Result<FitCurve> {
    step_curve(s, false, MethodId::Nn)
}

pub fn pnn_fit(s: &SampleSet) -> Result<FitCurve> {
    step_curve(s, true, MethodId::Pnn)
}

/// Linear interpolation through the (possibly augmented) points, constant
/// beyond the outermost ones, clipped to the domain.
fn linear_curve(s: &SampleSet, periodic: bool, method: MethodId) -> Result<FitCurve> {
    let iv = require_1d(s)?;
    let pts = augmented_points(s, periodic)?;
    let at = |x: f64| -> f64 {
        let k = pts.partition_point(|p| p.0 < x);
        if k == 0 {
            pts[0].1
        } else if k == pts.len() {
            pts[pts.len() - 1].1
        } else if pts[k].0 == x {
            pts[k].1
        } else {
            let (x0, y0) = pts[k - 1];
            let (x1, y1) = pts[k];
            y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
        }
    };
    let mut knots = vec![iv.a];
    knots.extend(pts.iter().map(|p| p.0).filter(|&x| x > iv.a && x < iv.b));
    knots.push(iv.b);
    let values = knots.iter().map(|&x| at(x)).collect();
    FitCurve::new(iv, vec![PiecewiseLinearFn::new(knots, values)?], pinned_of(s), method, periodic)
}

pub fn li_fit(s: &SampleSet) -> Result<FitCurve> {
    linear_curve(s, false, MethodId::Li)
}

pub fn pli_fit(s: &SampleSet) -> Result<FitCurve> {
    linear_curve(s, true, MethodId::Pli)
}

/// Which closed form governs a Lipfit segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentCase {
    /// `|m*| <= m`: the fit runs A -> F -> G -> B with flat ends.
    WithinBound,
    /// `|m*| > m`: the fit is the single line F -> G, jumping at A and B.
    ExceedsBound,
}

/// Lipfit on the open interval between consecutive samples `a` and `b`.
///
/// The returned function spans `[x_a, x_b]`; its end values are the one-sided
/// limits, which differ from `y_a`, `y_b` in the second case.
pub fn lipfit_segment(a: (f64, f64), b: (f64, f64), m: f64) -> Result<(PiecewiseLinearFn, SegmentCase)> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Parameter(format!("Lipfit needs a positive LB, got {m}")));
    }
    let (xa, ya) = a;
    let (xb, yb) = b;
    if !(xa < xb) {
        return Err(Error::Input(format!("segment endpoints must satisfy x_a < x_b, got {xa}, {xb}")));
    }
    let dx = xb - xa;
    let dy = yb - ya;
    let slope = dy / dx;
    if slope.abs() <= m {
        let delta = 0.5 * (dx - (dy / m).abs());
        let (xf, xg) = (xa + delta, xb - delta);
        let mut knots = vec![xa];
        let mut values = vec![ya];
        if xf > xa && xf < xb {
            knots.push(xf);
            values.push(ya);
        }
        if xg > knots[knots.len() - 1] && xg < xb {
            knots.push(xg);
            values.push(yb);
        }
        knots.push(xb);
        values.push(yb);
        Ok((PiecewiseLinearFn::new(knots, values)?, SegmentCase::WithinBound))
    } else {
        let shift = 0.5 * dx * (slope.abs() - m) * slope.signum();
        let f = PiecewiseLinearFn::new(vec![xa, xb], vec![ya + shift, yb - shift])?;
        Ok((f, SegmentCase::ExceedsBound))
    }
}

/// Are all adjacent slopes of the points within `m`?
fn m_consistent(pts: &[(f64, f64)], m: f64) -> bool {
    pts.windows(2).all(|w| (w[1].1 - w[0].1).abs() <= m * (w[1].0 - w[0].0))
}

/// Index `k` with `pts[k - 1].0 <= lo` and `pts[k].0 >= hi`, when `[lo, hi]`
/// lies inside one gap of the sorted points.
fn bracket(pts: &[(f64, f64)], lo: f64, hi: f64) -> Option<usize> {
    let k = pts.partition_point(|p| p.0 <= lo);
    (k >= 1 && k < pts.len() && pts[k].0 >= hi).then_some(k)
}

/// Value on `[lo, hi]` outside the sample span: the nearest sample value.
fn end_value(pts: &[(f64, f64)], lo: f64) -> f64 {
    if lo < pts[0].0 {
        pts[0].1
    } else {
        pts[pts.len() - 1].1
    }
}

/// `f` restricted to `[lo, hi]`, a sub-interval of its span.
fn restrict(f: &PiecewiseLinearFn, lo: f64, hi: f64) -> Result<PiecewiseLinearFn> {
    let mut knots = vec![lo];
    knots.extend(f.knots().iter().copied().filter(|&k| k > lo && k < hi));
    knots.push(hi);
    let values = knots.iter().map(|&x| f.eval_unchecked(x)).collect();
    PiecewiseLinearFn::new(knots, values)
}

/// Lipfit (or PLipfit when `periodic`) over the declared interval.
///
/// Each gap between consecutive (augmented) samples uses the two-point closed
/// form of [`lipfit_segment`]; outside the sample span the fit is flat at the
/// nearest sample value. For m-consistent data the whole fit equals the
/// midpoint of the envelope over all samples.
pub fn lipfit_fit(s: &SampleSet, m: f64, periodic: bool) -> Result<FitCurve> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Parameter(format!("Lipfit needs a positive LB, got {m}")));
    }
    let iv = require_1d(s)?;
    let pts = augmented_points(s, periodic)?;
    let mut pieces = Vec::with_capacity(pts.len() + 1);
    let mut edges: Vec<f64> = vec![iv.a];
    edges.extend(pts.iter().map(|p| p.0).filter(|&x| x > iv.a && x < iv.b));
    edges.push(iv.b);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        match bracket(&pts, lo, hi) {
            Some(k) => {
                let seg = lipfit_segment(pts[k - 1], pts[k], m)?.0;
                pieces.push(if pts[k - 1].0 == lo && pts[k].0 == hi { seg } else { restrict(&seg, lo, hi)? });
            }
            None => {
                let v = end_value(&pts, lo);
                pieces.push(PiecewiseLinearFn::new(vec![lo, hi], vec![v, v])?);
            }
        }
    }
    let method = if periodic { MethodId::Plipfit } else { MethodId::Lipfit };
    FitCurve::new(iv, pieces, pinned_of(s), method, periodic)
}

/// [`lipfit_fit`] plus a check that every knot agrees with the brute-force
/// envelope midpoint of the nearest one or two samples, and with the envelope
/// over all samples when the data are m-consistent.
pub fn lipfit_fit_checked(s: &SampleSet, m: f64, periodic: bool) -> Result<FitCurve> {
    let fit = lipfit_fit(s, m, periodic)?;
    let pts = augmented_points(s, periodic)?;
    let global = m_consistent(&pts, m);
    let scale = 1.0 + s.ys().iter().fold(0.0f64, |a, y| a.max(y.abs()));
    for piece in fit.pieces() {
        let (lo, hi) = piece.span();
        let local: &[(f64, f64)] = match bracket(&pts, lo, hi) {
            Some(k) => &pts[k - 1..=k],
            None if lo < pts[0].0 => &pts[..1],
            None => &pts[pts.len() - 1..],
        };
        let probes = piece
            .knots()
            .iter()
            .copied()
            .chain(piece.knots().windows(2).map(|w| 0.5 * (w[0] + w[1])));
        for x in probes {
            // Nudge off the samples so the probe sees the open-gap value.
            let xq = x.clamp(lo + 1e-12 * (hi - lo), hi - 1e-12 * (hi - lo));
            let got = piece.eval_unchecked(xq);
            let mut wants = vec![envelope_1d(local, m, xq).midpoint()];
            if global {
                wants.push(envelope_1d(&pts, m, xq).midpoint());
            }
            for want in wants {
                if (want - got).abs() > 1e-9 * scale {
                    return Err(Error::Consistency(format!(
                        "Lipfit closed form {got} differs from envelope midpoint {want} at x = {xq}"
                    )));
                }
            }
        }
    }
    Ok(fit)
}

/// Fit with any in-repo method. `m` is required by the Lipfit variants.
pub fn fit_method(s: &SampleSet, method: MethodId, m: Option<f64>) -> Result<FitCurve> {
    let need_m = || m.ok_or_else(|| Error::Parameter(format!("method {method} requires an LB")));
    match method {
        MethodId::Avg => avg_fit(s),
        MethodId::Nn => nn_fit(s),
        MethodId::Pnn => pnn_fit(s),
        MethodId::Li => li_fit(s),
        MethodId::Pli => pli_fit(s),
        MethodId::Lipfit => lipfit_fit(s, need_m()?, false),
        MethodId::Plipfit => lipfit_fit(s, need_m()?, true),
        MethodId::External => Err(Error::Input("external fits are loaded, not computed".into())),
    }
}
