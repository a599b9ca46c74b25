//! LB-BD trade-off curves.
//!
//! For samples `(x_i, y_i)` and a Lipschitz bound `m`, `gamma(m)` is the
//! smallest bound deviation `sigma` such that some `m`-Lipschitz `g` stays
//! within `sigma` of every sample; `gamma_inverse(sigma)` swaps the roles.
//! Both are computed by linear programs over residuals `r = y - g(x)`:
//!
//! * the general engine works in any dimension with one row per ordered pair
//!   of samples;
//! * the fast engine is one-dimensional and parameterises `g` as a
//!   piecewise-linear function with knots at the samples, which needs only
//!   `O(n)` rows.
//!
//! Periodic curves use the circle metric on `[a, b]` (general engine) or an
//! extra wrap-segment slope row (fast engine).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::PiecewiseLinearFn;
use crate::domain::{diam_of, lip_of_samples, Interval1D, SampleSet};
use crate::error::{Error, Result};
use crate::fit::li_fit;
use crate::lp::{dot, minmax_affine_to_lp, solve_lp, AffineExpr, LinearProgram, LpStatus, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL};

/// Tolerance for the shape checks on a computed curve, relative to `1 + diam(y)`.
pub const CURVE_TOL: f64 = 1e-8;

const BISECT_TOL: f64 = 1e-12;
const BISECT_MAX_ITER: usize = 200;

/// Which backend produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveSource {
    GeneralLp,
    Fast1d,
    Analytic,
    /// Read from a file.
    Imported,
}

/// LP formulation used by [`lbbd_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    General,
    Fast,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "general" => Ok(Engine::General),
            "fast" => Ok(Engine::Fast),
            other => Err(Error::Input(format!("unknown engine '{other}' (expected general or fast)"))),
        }
    }
}

/// `gamma` tabulated on an increasing grid of bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LbbdCurve {
    pub m_grid: Vec<f64>,
    pub gamma: Vec<f64>,
    pub periodic: bool,
    pub source: CurveSource,
}

impl LbbdCurve {
    /// Checks lengths, grid order and signs; shape is left to
    /// [`check_curve_properties`].
    pub fn new(m_grid: Vec<f64>, gamma: Vec<f64>, periodic: bool, source: CurveSource) -> Result<Self> {
        validate_grid(&m_grid)?;
        if gamma.len() != m_grid.len() {
            return Err(Error::Input(format!("{} grid points but {} gamma values", m_grid.len(), gamma.len())));
        }
        if gamma.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::Input("gamma values must be finite and nonnegative".into()));
        }
        Ok(LbbdCurve { m_grid, gamma, periodic, source })
    }

    pub fn len(&self) -> usize {
        self.m_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_grid.is_empty()
    }

    /// `(m, gamma(m))` in grid order.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.m_grid.iter().copied().zip(self.gamma.iter().copied())
    }

    /// Linear interpolation between grid points, constant beyond either end.
    pub fn gamma_at(&self, m: f64) -> f64 {
        let k = self.m_grid.partition_point(|&g| g < m);
        if k == 0 {
            self.gamma[0]
        } else if k == self.m_grid.len() {
            self.gamma[k - 1]
        } else {
            let (m0, m1) = (self.m_grid[k - 1], self.m_grid[k]);
            let (g0, g1) = (self.gamma[k - 1], self.gamma[k]);
            g0 + (g1 - g0) * ((m - m0) / (m1 - m0))
        }
    }
}

fn validate_grid(m_grid: &[f64]) -> Result<()> {
    if m_grid.len() < 2 {
        return Err(Error::Input("an m grid needs at least two points".into()));
    }
    if m_grid.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::Input("m grid values must be finite and nonnegative".into()));
    }
    if m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input("m grid must be strictly increasing".into()));
    }
    Ok(())
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be finite and nonnegative, got {v}")))
    }
}

/// Distance used by the pairwise rows: Euclidean, or the circle metric on the
/// declared interval for periodic one-dimensional data.
fn pair_dist(s: &SampleSet, i: usize, j: usize, period: Option<f64>) -> f64 {
    let d = s.dist(i, j);
    match period {
        Some(len) => d.min(len - d).max(0.0),
        None => d,
    }
}

fn period_of(s: &SampleSet, periodic: bool) -> Result<Option<f64>> {
    if !periodic {
        return Ok(None);
    }
    if s.dim() != 1 {
        return Err(Error::Input("periodic curves need one-dimensional samples".into()));
    }
    Ok(Some(s.interval()?.len()))
}

fn optimum(lp: &LinearProgram) -> Result<f64> {
    let v = solve_lp(lp, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL)?.optimum()?;
    Ok(v.max(0.0))
}

/// As [`optimum`], but an infeasible program (periodic end samples that no
/// slope can reconcile) yields `+inf`.
fn optimum_or_inf(lp: &LinearProgram) -> Result<f64> {
    let sol = solve_lp(lp, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL)?;
    if sol.status == LpStatus::Infeasible {
        return Ok(f64::INFINITY);
    }
    Ok(sol.optimum()?.max(0.0))
}

/// `gamma(m)` from the pairwise epigraph LP (any dimension).
///
/// Variables are the residuals `r_1..r_n` and the epigraph height `t`;
/// rows are `+-r_i <= t` and `(y_i - r_i) - (y_j - r_j) <= m d_ij` for every
/// ordered pair.
pub fn gamma_general(s: &SampleSet, m: f64, periodic: bool) -> Result<f64> {
    match general_lp(s, m, periodic)? {
        Some(lp) => optimum(&lp),
        None => Ok(0.0),
    }
}

/// The program behind [`gamma_general`]; `None` below two samples.
pub fn general_lp(s: &SampleSet, m: f64, periodic: bool) -> Result<Option<LinearProgram>> {
    check_nonneg("m", m)?;
    let period = period_of(s, periodic)?;
    let n = s.len();
    if n < 2 {
        return Ok(None);
    }
    let ys = s.ys();
    let unit = |k: usize, v: f64| {
        let mut c = vec![0.0; n];
        c[k] = v;
        c
    };
    let terms: Vec<AffineExpr> = (0..n).map(|i| AffineExpr::new(unit(i, 1.0), 0.0)).collect();
    let mut extra = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut c = unit(i, -1.0);
            c[j] = 1.0;
            extra.push(AffineExpr::new(c, ys[i] - ys[j] - m * pair_dist(s, i, j, period)));
        }
    }
    minmax_affine_to_lp(&terms, &extra).map(Some)
}

/// `gamma^{-1}(sigma)` from the pairwise LP: minimise the largest pairwise
/// slope of `y - r` subject to `|r_i| <= sigma`; `+inf` when infeasible.
pub fn gamma_inverse_general(s: &SampleSet, sigma: f64, periodic: bool) -> Result<f64> {
    check_nonneg("sigma", sigma)?;
    let period = period_of(s, periodic)?;
    let n = s.len();
    if n < 2 {
        return Ok(0.0);
    }
    let ys = s.ys();
    let mut terms = Vec::with_capacity(n * (n - 1) / 2);
    let mut extra = Vec::with_capacity(2 * n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pair_dist(s, i, j, period);
            let mut c = vec![0.0; n];
            c[i] = 1.0;
            c[j] = -1.0;
            if d > 0.0 {
                c.iter_mut().for_each(|v| *v /= d);
                terms.push(AffineExpr::new(c, (ys[j] - ys[i]) / d));
            } else {
                // Coincident on the circle: the adjusted values must agree.
                let neg: Vec<f64> = c.iter().map(|v| -v).collect();
                extra.push(AffineExpr::new(c, ys[j] - ys[i]));
                extra.push(AffineExpr::new(neg, ys[i] - ys[j]));
            }
        }
    }
    for i in 0..n {
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        extra.push(AffineExpr::new(c.clone(), -sigma));
        c[i] = -1.0;
        extra.push(AffineExpr::new(c, -sigma));
    }
    if terms.is_empty() {
        terms.push(AffineExpr::new(vec![0.0; n], 0.0));
    }
    optimum_or_inf(&minmax_affine_to_lp(&terms, &extra)?)
}

/// The fast one-dimensional model `h(x) = c_0 + sum_j m_j 1{x > x_j} (x - x_j)`
/// with knots at the first `n - 1` samples.
///
/// Parameters are `beta = (c_0, m_1, ..., m_{n-1})`; the `m_j` are slope
/// increments, so the slope of `h` on `(x_k, x_{k+1})` is `m_1 + ... + m_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FastModel1D {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major `n x n` design matrix.
    design: Vec<f64>,
}

impl FastModel1D {
    pub fn new(s: &SampleSet) -> Result<Self> {
        if s.dim() != 1 {
            return Err(Error::Input("the fast engine needs one-dimensional samples".into()));
        }
        let xs = s.xs().to_vec();
        let n = xs.len();
        let mut design = vec![0.0; n * n];
        for i in 0..n {
            design[i * n] = 1.0;
            for j in 1..n {
                if i >= j {
                    design[i * n + j] = xs[i] - xs[j - 1];
                }
            }
        }
        Ok(FastModel1D { xs, ys: s.ys().to_vec(), design })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    /// Row `i` of the design matrix.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.design[i * n..(i + 1) * n]
    }

    /// `X beta`, the model values at the samples.
    pub fn fitted(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|i| dot(self.row(i), beta)).collect()
    }

    /// `r = y - X beta`.
    pub fn residuals(&self, beta: &[f64]) -> Vec<f64> {
        self.fitted(beta).iter().zip(&self.ys).map(|(h, y)| y - h).collect()
    }

    /// Slope of `h` on each gap: cumulative sums of the increments.
    pub fn slopes(&self, beta: &[f64]) -> Vec<f64> {
        beta[1..]
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }

    /// `h` evaluated directly from its defining sum.
    pub fn h(&self, beta: &[f64], x: f64) -> f64 {
        let mut v = beta[0];
        for j in 1..self.n() {
            let xj = self.xs[j - 1];
            if x > xj {
                v += beta[j] * (x - xj);
            }
        }
        v
    }

    /// `h` as a piecewise-linear function over the sample span.
    pub fn to_piecewise(&self, beta: &[f64]) -> Result<PiecewiseLinearFn> {
        PiecewiseLinearFn::new(self.xs.clone(), self.fitted(beta))
    }

    /// Coefficients (over `beta`) of the cumulative slope on gap `k`.
    fn slope_row(&self, k: usize) -> Vec<f64> {
        let n = self.n();
        let mut c = vec![0.0; n];
        c[1..=k + 1].iter_mut().for_each(|v| *v = 1.0);
        c
    }

    /// Coefficients of `h(x_1) - h(x_n)` and the wrap-gap length.
    fn wrap_row(&self, period: f64) -> (Vec<f64>, f64) {
        let n = self.n();
        let c = self.row(0).iter().zip(self.row(n - 1)).map(|(a, b)| a - b).collect();
        (c, period - (self.xs[n - 1] - self.xs[0]))
    }
}

fn wrap_is_degenerate(gap: f64, period: f64) -> bool {
    gap <= 1e-12 * period
}

fn neg(c: &[f64]) -> Vec<f64> {
    c.iter().map(|v| -v).collect()
}

/// `gamma(m)` from the fast one-dimensional LP.
pub fn gamma_fast_1d(s: &SampleSet, m: f64, periodic: bool) -> Result<f64> {
    match fast_lp(s, m, periodic)? {
        Some(lp) => optimum(&lp),
        None => Ok(0.0),
    }
}

/// The program behind [`gamma_fast_1d`]; `None` below two samples.
pub fn fast_lp(s: &SampleSet, m: f64, periodic: bool) -> Result<Option<LinearProgram>> {
    check_nonneg("m", m)?;
    let period = period_of(s, periodic)?;
    let model = FastModel1D::new(s)?;
    let n = model.n();
    if n < 2 {
        return Ok(None);
    }
    let terms: Vec<AffineExpr> = (0..n).map(|i| AffineExpr::new(neg(model.row(i)), model.ys[i])).collect();
    let mut extra = Vec::with_capacity(2 * n);
    for k in 0..n - 1 {
        let c = model.slope_row(k);
        extra.push(AffineExpr::new(neg(&c), -m));
        extra.push(AffineExpr::new(c, -m));
    }
    if let Some(len) = period {
        let (c, gap) = model.wrap_row(len);
        let bound = if wrap_is_degenerate(gap, len) { 0.0 } else { m * gap };
        extra.push(AffineExpr::new(neg(&c), -bound));
        extra.push(AffineExpr::new(c, -bound));
    }
    minmax_affine_to_lp(&terms, &extra).map(Some)
}

/// `gamma^{-1}(sigma)` from the fast one-dimensional LP: minimise the largest
/// slope magnitude of `h` subject to `|y_i - h(x_i)| <= sigma`.
pub fn gamma_inverse_fast_1d(s: &SampleSet, sigma: f64, periodic: bool) -> Result<f64> {
    check_nonneg("sigma", sigma)?;
    let period = period_of(s, periodic)?;
    let model = FastModel1D::new(s)?;
    let n = model.n();
    if n < 2 {
        return Ok(0.0);
    }
    let mut terms: Vec<AffineExpr> = (0..n - 1).map(|k| AffineExpr::new(model.slope_row(k), 0.0)).collect();
    let mut extra = Vec::with_capacity(2 * n + 2);
    for i in 0..n {
        let x = model.row(i);
        extra.push(AffineExpr::new(neg(x), model.ys[i] - sigma));
        extra.push(AffineExpr::new(x.to_vec(), -model.ys[i] - sigma));
    }
    if let Some(len) = period {
        let (c, gap) = model.wrap_row(len);
        if wrap_is_degenerate(gap, len) {
            extra.push(AffineExpr::new(neg(&c), 0.0));
            extra.push(AffineExpr::new(c, 0.0));
        } else {
            terms.push(AffineExpr::new(c.iter().map(|v| v / gap).collect(), 0.0));
        }
    }
    optimum_or_inf(&minmax_affine_to_lp(&terms, &extra)?)
}

/// `gamma(m)` with the chosen engine.
pub fn gamma(s: &SampleSet, m: f64, periodic: bool, engine: Engine) -> Result<f64> {
    match engine {
        Engine::General => gamma_general(s, m, periodic),
        Engine::Fast => gamma_fast_1d(s, m, periodic),
    }
}

/// The program behind [`gamma`] for the chosen engine.
pub fn gamma_lp(s: &SampleSet, m: f64, periodic: bool, engine: Engine) -> Result<Option<LinearProgram>> {
    match engine {
        Engine::General => general_lp(s, m, periodic),
        Engine::Fast => fast_lp(s, m, periodic),
    }
}

/// `gamma^{-1}(sigma)` with the chosen engine.
pub fn gamma_inverse(s: &SampleSet, sigma: f64, periodic: bool, engine: Engine) -> Result<f64> {
    match engine {
        Engine::General => gamma_inverse_general(s, sigma, periodic),
        Engine::Fast => gamma_inverse_fast_1d(s, sigma, periodic),
    }
}

/// Smallest bound at which `gamma` vanishes: adjacent slopes, plus the wrap
/// slope for periodic data (infinite when the end samples coincide on the
/// circle with different values).
pub fn curve_lip(s: &SampleSet, periodic: bool) -> Result<f64> {
    let lip = lip_of_samples(s).value;
    if !periodic || s.len() < 2 {
        return Ok(lip);
    }
    let iv = s.interval()?;
    let xs = s.xs();
    let ys = s.ys();
    let n = xs.len();
    let gap = iv.len() - (xs[n - 1] - xs[0]);
    let dy = (ys[n - 1] - ys[0]).abs();
    let wrap = if wrap_is_degenerate(gap, iv.len()) {
        if dy == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        dy / gap
    };
    Ok(lip.max(wrap))
}

/// Zero followed by 51 geometric points from `lip / 100` to `1.05 lip`.
pub fn default_m_grid(s: &SampleSet, periodic: bool) -> Result<Vec<f64>> {
    let mut lip = curve_lip(s, periodic)?;
    if !lip.is_finite() {
        lip = lip_of_samples(s).value;
    }
    if !(lip > 0.0) {
        return Ok(vec![0.0, 1.0]);
    }
    let (lo, hi) = (lip / 100.0, 1.05 * lip);
    let ratio = (hi / lo).powf(1.0 / 50.0);
    let mut grid = vec![0.0];
    grid.extend((0..=50).map(|k| if k == 50 { hi } else { lo * ratio.powi(k) }));
    Ok(grid)
}

/// `gamma` on every grid point (in parallel, results in grid order), then the
/// shape checks of [`check_curve_properties`].
pub fn lbbd_curve(s: &SampleSet, m_grid: &[f64], periodic: bool, engine: Engine) -> Result<LbbdCurve> {
    validate_grid(m_grid)?;
    if engine == Engine::Fast && s.dim() != 1 {
        return Err(Error::Input("the fast engine needs one-dimensional samples".into()));
    }
    let gamma: Vec<f64> = m_grid
        .par_iter()
        .map(|&m| self::gamma(s, m, periodic, engine))
        .collect::<Result<_>>()?;
    let source = match engine {
        Engine::General => CurveSource::GeneralLp,
        Engine::Fast => CurveSource::Fast1d,
    };
    let curve = LbbdCurve::new(m_grid.to_vec(), gamma, periodic, source)?;
    let report = check_curve_properties(&curve, Some(s))?;
    if !report.ok() {
        return Err(Error::Consistency(format!("LB-BD curve failed its shape checks: {}", report.violations.join("; "))));
    }
    Ok(curve)
}

/// Outcome of the shape checks on a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub monotone: bool,
    pub convex: bool,
    /// `gamma(0) = diam(y) / 2`; `None` when 0 is not on the grid or no samples are given.
    pub start_identity: Option<bool>,
    /// `gamma(m) = 0` for grid points `m >= lip`; `None` when no such point exists.
    pub end_identity: Option<bool>,
    pub violations: Vec<String>,
}

impl CurveReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `c` is non-increasing and convex on its grid, and (given the
/// samples it came from) the identities at `m = 0` and `m >= lip`. Violations
/// are reported, never raised.
pub fn check_curve_properties(c: &LbbdCurve, context: Option<&SampleSet>) -> Result<CurveReport> {
    let scale = 1.0 + context.map_or_else(|| diam_of(&c.gamma), |s| diam_of(s.ys()));
    let tol = CURVE_TOL * scale;
    let mut violations = Vec::new();

    let mut monotone = true;
    for (k, w) in c.gamma.windows(2).enumerate() {
        if w[1] > w[0] + tol {
            monotone = false;
            violations.push(format!("gamma increases from m = {} to m = {}", c.m_grid[k], c.m_grid[k + 1]));
        }
    }

    let mut convex = true;
    for k in 1..c.len().saturating_sub(1) {
        let (m0, m1, m2) = (c.m_grid[k - 1], c.m_grid[k], c.m_grid[k + 1]);
        let w = (m2 - m1) / (m2 - m0);
        let chord = w * c.gamma[k - 1] + (1.0 - w) * c.gamma[k + 1];
        if c.gamma[k] > chord + tol {
            convex = false;
            violations.push(format!("gamma is above its chord at m = {m1}"));
        }
    }

    let mut start_identity = None;
    let mut end_identity = None;
    if let Some(s) = context {
        if c.m_grid[0] == 0.0 {
            let expect = 0.5 * diam_of(s.ys());
            let hold = (c.gamma[0] - expect).abs() <= tol;
            if !hold {
                violations.push(format!("gamma(0) = {} but diam/2 = {expect}", c.gamma[0]));
            }
            start_identity = Some(hold);
        }
        let lip = curve_lip(s, c.periodic)?;
        let past: Vec<usize> = (0..c.len()).filter(|&k| c.m_grid[k] >= lip).collect();
        if !past.is_empty() {
            let hold = past.iter().all(|&k| c.gamma[k] <= tol);
            if !hold {
                violations.push(format!("gamma does not vanish for m >= lip = {lip}"));
            }
            end_identity = Some(hold);
        }
    }
    Ok(CurveReport { monotone, convex, start_identity, end_identity, violations })
}

/// Functions with a known LB-BD curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AnalyticShape {
    /// A line of slope magnitude `slope` over the interval.
    Linear { slope: f64 },
    /// A symmetric vee (or tent) with slope magnitude `slope` on each half.
    Vee { slope: f64 },
    /// `sin(2 pi x)` on `[0, 1]`.
    Sine,
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    // Invariant: f(lo) >= 0 >= f(hi).
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= BISECT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sine_root(sigma: f64) -> f64 {
    use std::f64::consts::PI;
    bisect(0.25, 0.5, |x| (2.0 * PI * x).sin() - 2.0 * PI * (x - 0.5) * (2.0 * PI * x).cos() - sigma)
}

fn check_sine_interval(iv: Interval1D) -> Result<()> {
    if iv != Interval1D::unit() {
        return Err(Error::Parameter("the analytic sine curve is defined on [0, 1] only".into()));
    }
    Ok(())
}

/// Closed-form or root-found `gamma^{-1}(sigma)`.
pub fn analytic_gamma_inv(shape: AnalyticShape, iv: Interval1D, sigma: f64) -> Result<f64> {
    check_nonneg("sigma", sigma)?;
    match shape {
        AnalyticShape::Linear { slope } => Ok((slope.abs() - 2.0 * sigma / iv.len()).max(0.0)),
        AnalyticShape::Vee { slope } => Ok((slope.abs() - 4.0 * sigma / iv.len()).max(0.0)),
        AnalyticShape::Sine => {
            check_sine_interval(iv)?;
            if sigma >= 1.0 {
                return Ok(0.0);
            }
            let x = sine_root(sigma);
            Ok((2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * x).cos()).abs())
        }
    }
}

/// Closed-form or root-found `gamma(m)`.
pub fn analytic_gamma(shape: AnalyticShape, iv: Interval1D, m: f64) -> Result<f64> {
    check_nonneg("m", m)?;
    match shape {
        AnalyticShape::Linear { slope } => Ok(0.5 * (slope.abs() - m).max(0.0) * iv.len()),
        AnalyticShape::Vee { slope } => Ok(0.25 * (slope.abs() - m).max(0.0) * iv.len()),
        AnalyticShape::Sine => {
            check_sine_interval(iv)?;
            if m >= 2.0 * std::f64::consts::PI {
                return Ok(0.0);
            }
            // gamma^{-1} is decreasing on [0, 1]; find sigma with gamma^{-1}(sigma) = m.
            let inv = |sigma: f64| analytic_gamma_inv(AnalyticShape::Sine, iv, sigma).unwrap_or(0.0);
            Ok(bisect(0.0, 1.0, |sigma| inv(sigma) - m))
        }
    }
}

/// An analytic curve on a grid.
pub fn analytic_curve(shape: AnalyticShape, iv: Interval1D, m_grid: &[f64]) -> Result<LbbdCurve> {
    let gamma = m_grid.iter().map(|&m| analytic_gamma(shape, iv, m)).collect::<Result<_>>()?;
    LbbdCurve::new(m_grid.to_vec(), gamma, false, CurveSource::Analytic)
}

/// `gamma` on a fine sample set and on a coarse subset, with the sup distance
/// between the fine values and linear interpolation of the coarse ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBound {
    pub gamma_fine: f64,
    pub gamma_coarse: f64,
    pub li_gap: f64,
}

/// Largest deviation of the fine values from LI of the subset `idx`.
pub fn li_gap(fine: &SampleSet, idx: &[usize]) -> Result<f64> {
    let coarse = fine.subset(idx)?;
    let li = li_fit(&coarse)?;
    let mut gap = 0.0f64;
    for (x, y) in fine.xs().iter().zip(fine.ys()) {
        gap = gap.max((li.eval(*x)? - y).abs());
    }
    Ok(gap)
}

/// Both gammas and the LI gap; errors if `0 <= gamma_fine - gamma_coarse <= li_gap`
/// fails beyond solver tolerance.
pub fn grid_gamma_bound(fine: &SampleSet, coarse: &[usize], m: f64) -> Result<GridBound> {
    let gamma_fine = gamma_fast_1d(fine, m, false)?;
    let gamma_coarse = gamma_fast_1d(&fine.subset(coarse)?, m, false)?;
    let li_gap = li_gap(fine, coarse)?;
    let tol = CURVE_TOL * (1.0 + diam_of(fine.ys()));
    let diff = gamma_fine - gamma_coarse;
    if diff < -tol || diff > li_gap + tol {
        return Err(Error::Consistency(format!(
            "grid sandwich failed: gamma_fine - gamma_coarse = {diff:e}, li_gap = {li_gap:e}"
        )));
    }
    Ok(GridBound { gamma_fine, gamma_coarse, li_gap })
}

/// Greedy refinement: start from the end samples and keep adding the sample
/// farthest from the current linear interpolant until every sample is within
/// `sigma_budget`.
pub fn select_subgrid(fine: &SampleSet, sigma_budget: f64) -> Result<Vec<usize>> {
    if !(sigma_budget > 0.0 && sigma_budget.is_finite()) {
        return Err(Error::Parameter(format!("budget must be positive, got {sigma_budget}")));
    }
    if fine.dim() != 1 {
        return Err(Error::Input("subgrid selection needs one-dimensional samples".into()));
    }
    let n = fine.len();
    if n <= 2 {
        return Ok((0..n).collect());
    }
    let xs = fine.xs();
    let ys = fine.ys();
    let deviation = |lo: usize, hi: usize| -> (f64, usize) {
        let mut best = (0.0f64, lo);
        for k in lo + 1..hi {
            let w = (xs[k] - xs[lo]) / (xs[hi] - xs[lo]);
            let d = (ys[lo] + w * (ys[hi] - ys[lo]) - ys[k]).abs();
            if d > best.0 {
                best = (d, k);
            }
        }
        best
    };
    let mut chosen = vec![0, n - 1];
    // (deviation, argmax) per gap between consecutive chosen indices.
    let mut gaps = vec![deviation(0, n - 1)];
    loop {
        let (g, &(d, k)) = gaps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(b.0.cmp(&a.0)))
            .expect("at least one gap");
        if d <= sigma_budget {
            break;
        }
        let (lo, hi) = (chosen[g], chosen[g + 1]);
        chosen.insert(g + 1, k);
        gaps.splice(g..=g, [deviation(lo, k), deviation(k, hi)]);
    }
    Ok(chosen)
}
