//! Seeded generators for test functions and sampling designs.
//!
//! All randomness comes from ChaCha8 keyed by a 64-bit seed, with the stream
//! id selecting independent sub-sequences, so a seed reproduces the same
//! draws on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::PiecewiseLinearFn;
use crate::domain::{Interval1D, SampleSet};
use crate::error::{Error, Result};

/// Rejection sampling gives up after this many redraws.
pub const MAX_REDRAWS: usize = 10_000;

/// The generator for `(seed, stream)`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Seed of replicate `i` under a master seed.
pub fn derive_seed(seed: u64, i: u64) -> u64 {
    rng(seed, i.wrapping_add(1 << 40)).next_u64()
}

/// Parameters of a random piecewise-linear function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub interval: Interval1D,
    /// Number of break points.
    pub k: usize,
    /// Lipschitz bound of the generated function.
    pub m: f64,
    /// Half-width of the uniform deviations added to samples.
    pub sigma: f64,
    /// Break points are at least `min_spacing_factor * (b - a)` apart.
    pub min_spacing_factor: f64,
    pub periodic: bool,
    pub seed: u64,
}

impl GeneratorConfig {
    /// A validated configuration with the default spacing factor `1 / (k + 2)`.
    pub fn new(interval: Interval1D, k: usize, m: f64, sigma: f64, periodic: bool, seed: u64) -> Result<Self> {
        let cfg = GeneratorConfig {
            interval,
            k,
            m,
            sigma,
            min_spacing_factor: 1.0 / (k as f64 + 2.0),
            periodic,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("LB must be positive, got {}", self.m)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("BD must be nonnegative, got {}", self.sigma)));
        }
        let f = self.min_spacing_factor;
        if !(f >= 0.0 && f * (self.k as f64 + 1.0) < 1.0) {
            return Err(Error::Config(format!(
                "spacing factor {f} is unattainable with {} break points",
                self.k
            )));
        }
        Ok(())
    }
}

/// `k` sorted break points in the open interval, consecutive ones at least
/// the configured spacing apart.
fn draw_breaks(cfg: &GeneratorConfig, r: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let iv = cfg.interval;
    let gap = cfg.min_spacing_factor * iv.len();
    for _ in 0..MAX_REDRAWS {
        let mut t: Vec<f64> = (0..cfg.k).map(|_| iv.a + iv.len() * r.gen::<f64>()).collect();
        t.sort_by(f64::total_cmp);
        let spaced = t.windows(2).all(|w| w[1] - w[0] >= gap);
        let inside = t.iter().all(|&x| x > iv.a && x < iv.b);
        if spaced && inside {
            return Ok(t);
        }
    }
    Err(Error::Config(format!("no break points with spacing {gap} after {MAX_REDRAWS} draws")))
}

/// Random `f` in the piecewise-linear class with `Lip(f) <= m`: `k` break
/// points, `k + 1` slopes uniform on `[-m, m]`, `f(a)` uniform on `[0, 1]`.
pub fn gen_pl(cfg: &GeneratorConfig) -> Result<PiecewiseLinearFn> {
    cfg.validate()?;
    if cfg.periodic {
        return Err(Error::Config("gen_pl draws non-periodic functions; use gen_ppl".into()));
    }
    let iv = cfg.interval;
    let mut r = rng(cfg.seed, 0);
    let breaks = draw_breaks(cfg, &mut r)?;
    let mut knots = vec![iv.a];
    knots.extend(&breaks);
    knots.push(iv.b);
    let mut values = vec![r.gen::<f64>()];
    for w in knots.windows(2) {
        let slope = r.gen_range(-cfg.m..=cfg.m);
        let last = values[values.len() - 1];
        values.push(last + slope * (w[1] - w[0]));
    }
    PiecewiseLinearFn::new(knots, values)
}

/// Random periodic `f` with `f(a) = f(b)` and slopes (including the segment
/// that wraps from the last break point round to the first) within `[-m, m]`.
/// Draws whose wrap slope exceeds `m` are rejected.
pub fn gen_ppl(cfg: &GeneratorConfig) -> Result<PiecewiseLinearFn> {
    cfg.validate()?;
    if !cfg.periodic {
        return Err(Error::Config("gen_ppl draws periodic functions; use gen_pl".into()));
    }
    let iv = cfg.interval;
    let mut r = rng(cfg.seed, 0);
    if cfg.k <= 1 {
        // A periodic piecewise-linear function with at most one break is constant.
        let breaks = draw_breaks(cfg, &mut r)?;
        let c = r.gen::<f64>();
        let mut knots = vec![iv.a];
        knots.extend(&breaks);
        knots.push(iv.b);
        let n = knots.len();
        return PiecewiseLinearFn::new(knots, vec![c; n]);
    }
    for _ in 0..MAX_REDRAWS {
        let t = draw_breaks(cfg, &mut r)?;
        let mut vals = vec![r.gen::<f64>()];
        for w in t.windows(2) {
            let slope = r.gen_range(-cfg.m..=cfg.m);
            let last = vals[vals.len() - 1];
            vals.push(last + slope * (w[1] - w[0]));
        }
        let k = t.len();
        let wrap_len = t[0] + iv.len() - t[k - 1];
        let wrap = (vals[0] - vals[k - 1]) / wrap_len;
        if wrap.abs() > cfg.m {
            continue;
        }
        let end = vals[0] - wrap * (t[0] - iv.a);
        let mut knots = vec![iv.a];
        knots.extend(&t);
        knots.push(iv.b);
        let mut values = vec![end];
        values.extend(&vals);
        values.push(end);
        return PiecewiseLinearFn::new(knots, values);
    }
    Err(Error::Config(format!("no draw met the wrap-slope bound after {MAX_REDRAWS} attempts")))
}

/// [`gen_ppl`] or [`gen_pl`] according to `cfg.periodic`.
pub fn generate(cfg: &GeneratorConfig) -> Result<PiecewiseLinearFn> {
    if cfg.periodic {
        gen_ppl(cfg)
    } else {
        gen_pl(cfg)
    }
}

/// Samples `f(x) + e` with `e` i.i.d. uniform on `[-sigma, sigma]`, over the
/// span of `f`.
pub fn add_deviation(f: &PiecewiseLinearFn, sigma: f64, xs: &[f64], seed: u64) -> Result<SampleSet> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("BD must be nonnegative, got {sigma}")));
    }
    let (a, b) = f.span();
    let mut r = rng(seed, 1);
    let mut ys = Vec::with_capacity(xs.len());
    for &x in xs {
        let e = if sigma > 0.0 { r.gen_range(-sigma..=sigma) } else { 0.0 };
        ys.push(f.eval(x)? + e);
    }
    SampleSet::new_1d(xs.to_vec(), ys, Interval1D::new(a, b)?)
}

/// Sub-intervals tiling the domain, each with a number of uniform draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    pub strata: Vec<(f64, f64)>,
    pub per_stratum: Vec<usize>,
    pub seed: u64,
}

impl SamplingScheme {
    pub fn new(strata: Vec<(f64, f64)>, per_stratum: Vec<usize>, seed: u64) -> Result<Self> {
        if strata.is_empty() || strata.len() != per_stratum.len() {
            return Err(Error::Config("each stratum needs exactly one count".into()));
        }
        if strata.iter().any(|&(lo, hi)| !(lo < hi && lo.is_finite() && hi.is_finite())) {
            return Err(Error::Config("strata must be nonempty finite intervals".into()));
        }
        if strata.windows(2).any(|w| w[0].1 != w[1].0) {
            return Err(Error::Config("strata must tile the domain in order".into()));
        }
        Ok(SamplingScheme { strata, per_stratum, seed })
    }

    /// `counts.len()` equal-width strata over `iv`.
    pub fn equal(iv: Interval1D, counts: &[usize], seed: u64) -> Result<Self> {
        let k = counts.len();
        if k == 0 {
            return Err(Error::Config("at least one stratum is required".into()));
        }
        let edges: Vec<f64> = (0..=k)
            .map(|i| if i == k { iv.b } else { iv.a + iv.len() * i as f64 / k as f64 })
            .collect();
        let strata = edges.windows(2).map(|w| (w[0], w[1])).collect();
        SamplingScheme::new(strata, counts.to_vec(), seed)
    }

    pub fn total(&self) -> usize {
        self.per_stratum.iter().sum()
    }
}

/// Sorted union of uniform draws from every stratum. Coincident draws are
/// redrawn so the locations are distinct.
pub fn stratified_sample(scheme: &SamplingScheme) -> Result<Vec<f64>> {
    let mut r = rng(scheme.seed, 2);
    let mut xs = Vec::with_capacity(scheme.total());
    for (&(lo, hi), &count) in scheme.strata.iter().zip(&scheme.per_stratum) {
        let mut drawn: Vec<f64> = Vec::with_capacity(count);
        let mut attempts = 0;
        while drawn.len() < count {
            attempts += 1;
            if attempts > MAX_REDRAWS + count {
                return Err(Error::Config(format!("cannot draw {count} distinct points in [{lo}, {hi}]")));
            }
            let x = lo + (hi - lo) * r.gen::<f64>();
            if !drawn.contains(&x) && !xs.contains(&x) {
                drawn.push(x);
            }
        }
        xs.extend(drawn);
    }
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

/// Centred moving average with an odd window that shrinks symmetrically near
/// the ends.
pub fn moving_average(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window % 2 == 0 || window > values.len() {
        return Err(Error::Parameter(format!(
            "window must be odd and at most {}, got {window}",
            values.len()
        )));
    }
    let n = values.len();
    let half = window / 2;
    Ok((0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            values[i - h..=i + h].iter().sum::<f64>() / (2 * h + 1) as f64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::lip_of_samples;

    fn cfg(k: usize, periodic: bool, seed: u64) -> GeneratorConfig {
        GeneratorConfig::new(Interval1D::unit(), k, 10.0, 1.0, periodic, seed).unwrap()
    }

    fn dense_lip(f: &PiecewiseLinearFn) -> f64 {
        let xs = Interval1D::unit().grid(10_000);
        let ys = xs.iter().map(|&x| f.eval(x).unwrap()).collect();
        lip_of_samples(&SampleSet::new_1d(xs, ys, Interval1D::unit()).unwrap()).value
    }

    #[test]
    fn single_line_when_no_breaks() {
        let f = gen_pl(&cfg(0, false, 3)).unwrap();
        assert_eq!(f.knots(), &[0.0, 1.0]);
        assert!(f.lip() <= 10.0);
    }

    #[test]
    fn generated_functions_respect_the_bound() {
        for seed in 0..50 {
            let f = gen_pl(&cfg(5, false, seed)).unwrap();
            assert_eq!(f.knots().len(), 7);
            assert!(dense_lip(&f) <= 10.0 + 1e-12);
            let gaps = f.knots()[1..6].windows(2).all(|w| w[1] - w[0] >= 1.0 / 7.0);
            assert!(gaps);
            let p = gen_ppl(&cfg(5, true, seed)).unwrap();
            let v = p.values();
            assert_eq!(v[0], v[v.len() - 1]);
            assert!(dense_lip(&p) <= 10.0 + 1e-12);
        }
    }

    #[test]
    fn seeds_reproduce() {
        assert_eq!(gen_pl(&cfg(5, false, 9)).unwrap(), gen_pl(&cfg(5, false, 9)).unwrap());
        assert_ne!(gen_pl(&cfg(5, false, 9)).unwrap(), gen_pl(&cfg(5, false, 10)).unwrap());
        assert_eq!(gen_ppl(&cfg(5, true, 4)).unwrap(), gen_ppl(&cfg(5, true, 4)).unwrap());
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(GeneratorConfig::new(Interval1D::unit(), 3, 0.0, 1.0, false, 0).is_err());
        let mut c = cfg(5, false, 0);
        c.min_spacing_factor = 0.2;
        assert!(gen_pl(&c).is_err());
        let mut tight = cfg(9, false, 0);
        tight.min_spacing_factor = 0.099;
        assert!(matches!(gen_pl(&tight), Err(Error::Config(_))));
        assert!(gen_pl(&cfg(2, true, 0)).is_err());
    }

    #[test]
    fn deviations_stay_within_sigma() {
        let f = PiecewiseLinearFn::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let xs = Interval1D::unit().grid(100_000);
        let s = add_deviation(&f, 0.3, &xs, 5).unwrap();
        let worst = s.ys().iter().fold(0.0f64, |a, y| a.max(y.abs()));
        assert!(worst <= 0.3 && worst > 0.29);
        let exact = add_deviation(&f, 0.0, &xs[..10], 5).unwrap();
        assert!(exact.ys().iter().all(|&y| y == 0.0));
    }

    #[test]
    fn stratified_schemes() {
        let iv = Interval1D::unit();
        let xs = stratified_sample(&SamplingScheme::equal(iv, &[2, 2, 2, 2], 1).unwrap()).unwrap();
        assert_eq!(xs.len(), 8);
        for q in 0..4 {
            let lo = q as f64 / 4.0;
            assert_eq!(xs.iter().filter(|&&x| x >= lo && x < lo + 0.25).count(), 2);
        }
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        let dense = SamplingScheme::equal(iv, &[10, 10, 10, 10], 1).unwrap();
        assert_eq!(stratified_sample(&dense).unwrap().len(), 40);
        let local = SamplingScheme::equal(iv, &[50, 1, 1, 1], 1).unwrap();
        let ls = stratified_sample(&local).unwrap();
        assert_eq!(ls.len(), 53);
        assert_eq!(ls, stratified_sample(&local).unwrap());
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average(&[2.0; 6], 3).unwrap(), vec![2.0; 6]);
        let v = [1.0, 5.0, 2.0];
        assert_eq!(moving_average(&v, 1).unwrap(), v.to_vec());
        let line: Vec<f64> = (0..9).map(|i| 2.0 * i as f64 + 1.0).collect();
        let smooth = moving_average(&line, 5).unwrap();
        for (a, b) in smooth.iter().zip(&line) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(moving_average(&line, 4).is_err());
        assert!(moving_average(&line, 11).is_err());
    }
}
