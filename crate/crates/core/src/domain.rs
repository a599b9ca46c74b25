//! Domain types shared by every module: points, intervals, sample sets and
//! (LB, BD) pairs, plus the two scalar summaries every method leans on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of a `d`-dimensional domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Input("point must have at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("point coordinates must be finite".into()));
        }
        Ok(Point(coords))
    }

    pub fn scalar(x: f64) -> Self {
        Point(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// Euclidean distance between two coordinate slices of equal length.
#[inline]
pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// A closed interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval1D {
    pub a: f64,
    pub b: f64,
}

impl Interval1D {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Input(format!("interval bounds must be finite, got [{a}, {b}]")));
        }
        if a >= b {
            return Err(Error::Input(format!("interval requires a < b, got [{a}, {b}]")));
        }
        Ok(Interval1D { a, b })
    }

    pub fn unit() -> Self {
        Interval1D { a: 0.0, b: 1.0 }
    }

    /// Length `b - a`, the volume of the domain.
    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// `n >= 2` equally spaced points from `a` to `b` inclusive.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "grid needs at least two points");
        let h = self.len() / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.b } else { self.a + h * i as f64 })
            .collect()
    }
}

/// Where the samples live: an interval (d = 1) or an axis-aligned box (d > 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Interval(Interval1D),
    Box(Vec<(f64, f64)>),
}

/// Observed locations `x_1..x_n` with values `y_1..y_n` over a declared domain.
///
/// Coordinates are stored flat (`n * d` reals). For `d = 1` the locations are
/// strictly increasing and contained in the declared interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    dim: usize,
    coords: Vec<f64>,
    ys: Vec<f64>,
    domain: Domain,
}

impl SampleSet {
    /// One-dimensional samples on `domain`. `xs` must be strictly increasing.
    pub fn new_1d(xs: Vec<f64>, ys: Vec<f64>, domain: Interval1D) -> Result<Self> {
        check_values(&xs, &ys)?;
        for (i, w) in xs.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::Input(format!(
                    "sample locations must be strictly increasing (index {}: {} >= {})",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        if xs[0] < domain.a || xs[xs.len() - 1] > domain.b {
            return Err(Error::Input(format!(
                "sample locations must lie within [{}, {}]",
                domain.a, domain.b
            )));
        }
        Ok(SampleSet { dim: 1, coords: xs, ys, domain: Domain::Interval(domain) })
    }

    /// Samples in `d >= 1` dimensions. When `bbox` is `None` the bounding box
    /// of the points is used.
    pub fn new_nd(points: Vec<Point>, ys: Vec<f64>, bbox: Option<Vec<(f64, f64)>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Input("sample set must contain at least one point".into()));
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::Input("all points must share one dimension".into()));
        }
        if dim == 0 {
            return Err(Error::Input("points must have at least one coordinate".into()));
        }
        if ys.len() != points.len() {
            return Err(Error::Input(format!(
                "{} locations but {} values",
                points.len(),
                ys.len()
            )));
        }
        let coords: Vec<f64> = points.iter().flat_map(|p| p.0.iter().copied()).collect();
        if ys.iter().chain(&coords).any(|v| !v.is_finite()) {
            return Err(Error::Input("coordinates and values must be finite".into()));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::Input(format!("duplicate sample location at index {i}")));
                }
            }
        }
        let bbox = match bbox {
            Some(b) => {
                if b.len() != dim || b.iter().any(|(lo, hi)| !(lo < hi)) {
                    return Err(Error::Input("bounding box must have lo < hi in every axis".into()));
                }
                b
            }
            None => (0..dim)
                .map(|k| {
                    let col = points.iter().map(|p| p.0[k]);
                    let lo = col.clone().fold(f64::INFINITY, f64::min);
                    let hi = col.fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi)
                })
                .collect(),
        };
        if dim == 1 {
            let mut order: Vec<usize> = (0..ys.len()).collect();
            order.sort_by(|&i, &j| coords[i].total_cmp(&coords[j]));
            let xs = order.iter().map(|&i| coords[i]).collect();
            let ys = order.iter().map(|&i| ys[i]).collect();
            return SampleSet::new_1d(xs, ys, Interval1D::new(bbox[0].0, bbox[0].1)?);
        }
        Ok(SampleSet { dim, coords, ys, domain: Domain::Box(bbox) })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Coordinates of sample `i`.
    pub fn x(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Sample locations of a one-dimensional set.
    ///
    /// # Panics
    /// If the set is not one-dimensional.
    pub fn xs(&self) -> &[f64] {
        assert_eq!(self.dim, 1, "xs() is only defined for one-dimensional samples");
        &self.coords
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// The declared interval of a one-dimensional set.
    pub fn interval(&self) -> Result<Interval1D> {
        match &self.domain {
            Domain::Interval(iv) => Ok(*iv),
            Domain::Box(_) => Err(Error::Input("operation requires one-dimensional samples".into())),
        }
    }

    /// Distance between samples `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        euclid(self.x(i), self.x(j))
    }

    /// Same locations and domain with new values.
    pub fn with_values(&self, ys: Vec<f64>) -> Result<Self> {
        if ys.len() != self.len() {
            return Err(Error::Input(format!("expected {} values, got {}", self.len(), ys.len())));
        }
        if ys.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("values must be finite".into()));
        }
        Ok(SampleSet { ys, ..self.clone() })
    }

    /// The samples at the given (increasing) indices, keeping the domain.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        if idx.is_empty() {
            return Err(Error::Input("subset must be nonempty".into()));
        }
        if idx.windows(2).any(|w| w[0] >= w[1]) || idx[idx.len() - 1] >= self.len() {
            return Err(Error::Input("subset indices must be increasing and in range".into()));
        }
        let coords = idx.iter().flat_map(|&i| self.x(i).iter().copied()).collect();
        let ys = idx.iter().map(|&i| self.ys[i]).collect();
        Ok(SampleSet { dim: self.dim, coords, ys, domain: self.domain.clone() })
    }

    /// Index of the sample stored at exactly `x`, if any.
    pub fn sample_index(&self, x: &[f64]) -> Option<usize> {
        if self.dim == 1 {
            return self.coords.binary_search_by(|v| v.total_cmp(&x[0])).ok();
        }
        (0..self.len()).find(|&i| self.x(i) == x)
    }
}

fn check_values(xs: &[f64], ys: &[f64]) -> Result<()> {
    if ys.is_empty() {
        return Err(Error::Input("sample set must contain at least one point".into()));
    }
    if xs.len() != ys.len() {
        return Err(Error::Input(format!("{} locations but {} values", xs.len(), ys.len())));
    }
    if let Some(i) = xs.iter().chain(ys).position(|v| !v.is_finite()) {
        return Err(Error::Input(format!("non-finite entry at position {}", i % xs.len())));
    }
    Ok(())
}

/// A Lipschitz bound `m` together with a bound deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbbdPair {
    pub m: f64,
    pub sigma: f64,
}

impl LbbdPair {
    pub fn new(m: f64, sigma: f64) -> Result<Self> {
        if !(m.is_finite() && sigma.is_finite()) || m < 0.0 || sigma < 0.0 {
            return Err(Error::Parameter(format!(
                "LB and BD must be finite and nonnegative, got m = {m}, sigma = {sigma}"
            )));
        }
        Ok(LbbdPair { m, sigma })
    }
}

/// Smallest Lipschitz constant consistent with the samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipBound {
    pub value: f64,
    /// Fewer than two samples: no pair constrains the bound.
    pub degenerate: bool,
}

/// `max |y_i - y_j| / ||x_i - x_j||` over all pairs. Sorted 1-d data only
/// needs adjacent pairs.
pub fn lip_of_samples(s: &SampleSet) -> LipBound {
    let n = s.len();
    if n < 2 {
        return LipBound { value: 0.0, degenerate: true };
    }
    let ys = s.ys();
    let value = if s.dim() == 1 {
        let xs = s.xs();
        (1..n)
            .map(|i| (ys[i] - ys[i - 1]).abs() / (xs[i] - xs[i - 1]))
            .fold(0.0, f64::max)
    } else {
        let mut best = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                best = best.max((ys[i] - ys[j]).abs() / s.dist(i, j));
            }
        }
        best
    };
    LipBound { value, degenerate: false }
}

/// `max - min` of a nonempty list.
pub fn diam_of(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}
