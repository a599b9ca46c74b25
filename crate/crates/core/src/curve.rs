//! Piecewise-linear functions and fitted curves.

use serde::{Deserialize, Serialize};

use crate::domain::Interval1D;
use crate::error::{Error, Result};

/// A continuous piecewise-linear function given by its knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearFn {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearFn {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Input("a piecewise-linear function needs at least two knots".into()));
        }
        if knots.len() != values.len() {
            return Err(Error::Input(format!(
                "{} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Input("knots and values must be finite".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("knots must be strictly increasing".into()));
        }
        Ok(PiecewiseLinearFn { knots, values })
    }

    /// Constant function on `[lo, hi]`.
    pub fn constant(lo: f64, hi: f64, value: f64) -> Result<Self> {
        PiecewiseLinearFn::new(vec![lo, hi], vec![value, value])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn span(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Value at `x`; exact stored value at a knot, linear interpolation between.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.span();
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain { x, lo, hi });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match self.knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => self.values[i],
            Err(i) => {
                let i = i.clamp(1, self.knots.len() - 1);
                let (x0, x1) = (self.knots[i - 1], self.knots[i]);
                let (y0, y1) = (self.values[i - 1], self.values[i]);
                y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
            }
        }
    }

    /// Largest adjacent slope magnitude, which is the Lipschitz constant.
    pub fn lip(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| ((v[1] - v[0]) / (k[1] - k[0])).abs())
            .fold(0.0, f64::max)
    }
}

/// Value of `f` at `x`.
pub fn eval_pl(f: &PiecewiseLinearFn, x: f64) -> Result<f64> {
    f.eval(x)
}

/// Approximation methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodId {
    Avg,
    Nn,
    Pnn,
    Li,
    Pli,
    Lipfit,
    Plipfit,
    External,
}

impl MethodId {
    pub fn is_periodic(self) -> bool {
        matches!(self, MethodId::Pnn | MethodId::Pli | MethodId::Plipfit)
    }

    /// The non-periodic counterpart (`Pnn -> Nn`, ...).
    pub fn base(self) -> MethodId {
        match self {
            MethodId::Pnn => MethodId::Nn,
            MethodId::Pli => MethodId::Li,
            MethodId::Plipfit => MethodId::Lipfit,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Avg => "avg",
            MethodId::Nn => "nn",
            MethodId::Pnn => "pnn",
            MethodId::Li => "li",
            MethodId::Pli => "pli",
            MethodId::Lipfit => "lipfit",
            MethodId::Plipfit => "plipfit",
            MethodId::External => "external",
        }
    }
}

impl std::str::FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "avg" => MethodId::Avg,
            "nn" => MethodId::Nn,
            "pnn" => MethodId::Pnn,
            "li" => MethodId::Li,
            "pli" => MethodId::Pli,
            "lipfit" => MethodId::Lipfit,
            "plipfit" => MethodId::Plipfit,
            "external" => MethodId::External,
            other => return Err(Error::Input(format!("unknown method '{other}'"))),
        })
    }
}

impl std::fmt::Display for MethodId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A fitted one-dimensional function.
///
/// The pieces tile the domain; a piece owns its right endpoint, the first
/// piece also owns `a`. Values stored at sample locations override the
/// pieces, so a curve may jump at a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitCurve {
    domain: Interval1D,
    pieces: Vec<PiecewiseLinearFn>,
    pinned: Vec<(f64, f64)>,
    method: MethodId,
    periodic: bool,
}

impl FitCurve {
    pub fn new(
        domain: Interval1D,
        pieces: Vec<PiecewiseLinearFn>,
        mut pinned: Vec<(f64, f64)>,
        method: MethodId,
        periodic: bool,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Input("a fit curve needs at least one piece".into()));
        }
        if pieces[0].span().0 != domain.a || pieces[pieces.len() - 1].span().1 != domain.b {
            return Err(Error::Input("pieces must start at a and end at b".into()));
        }
        if pieces.windows(2).any(|w| w[0].span().1 != w[1].span().0) {
            return Err(Error::Input("pieces must tile the domain without gaps".into()));
        }
        pinned.sort_by(|p, q| p.0.total_cmp(&q.0));
        if pinned.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Input("duplicate pinned location".into()));
        }
        if pinned.iter().any(|&(x, y)| !domain.contains(x) || !y.is_finite()) {
            return Err(Error::Input("pinned values must be finite and inside the domain".into()));
        }
        Ok(FitCurve { domain, pieces, pinned, method, periodic })
    }

    /// A curve defined by grid values (linear in between), e.g. a fit
    /// produced by an external smoother.
    pub fn from_grid(domain: Interval1D, xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let f = PiecewiseLinearFn::new(xs, values)?;
        FitCurve::new(domain, vec![f], Vec::new(), MethodId::External, false)
    }

    pub fn domain(&self) -> Interval1D {
        self.domain
    }

    pub fn method(&self) -> MethodId {
        self.method
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn pieces(&self) -> &[PiecewiseLinearFn] {
        &self.pieces
    }

    pub fn pinned(&self) -> &[(f64, f64)] {
        &self.pinned
    }

    /// Value at `x`: the pinned value when `x` is exactly a sample location,
    /// otherwise the owning piece.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::Domain { x, lo: self.domain.a, hi: self.domain.b });
        }
        if let Ok(i) = self.pinned.binary_search_by(|p| p.0.total_cmp(&x)) {
            return Ok(self.pinned[i].1);
        }
        Ok(self.eval_piece(x))
    }

    /// Piece value ignoring pinned samples (the one-sided limit convention).
    pub(crate) fn eval_piece(&self, x: f64) -> f64 {
        let idx = self.pieces.partition_point(|p| p.span().1 < x);
        self.pieces[idx.min(self.pieces.len() - 1)].eval_unchecked(x)
    }

    /// Limit of the pieces from the right of `x`.
    pub(crate) fn eval_right_limit(&self, x: f64) -> f64 {
        let idx = self.pieces.partition_point(|p| p.span().1 <= x);
        self.pieces[idx.min(self.pieces.len() - 1)].eval_unchecked(x)
    }

    pub fn eval_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Value of the fitted curve at `x`.
pub fn eval_fit(c: &FitCurve, x: f64) -> Result<f64> {
    c.eval(x)
}
