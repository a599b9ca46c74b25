//! Seeded Monte-Carlo comparison of approximation methods: draw a function
//! with a known LB, sample it with uniform deviations, fit every method and
//! summarise the mean point-wise loss against the truth by its quartiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{FitCurve, MethodId};
use crate::domain::Interval1D;
use crate::error::{Error, Result};
use crate::fit::fit_method;
use crate::metrics::{loss, LossKind};
use crate::simgen::{add_deviation, derive_seed, generate, stratified_sample, GeneratorConfig, SamplingScheme};

/// A method on the roster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub label: String,
    pub method: MethodId,
    /// LB passed to Lipfit as a multiple of the generating LB.
    pub m_scale: f64,
}

impl RosterEntry {
    pub fn new(label: &str, method: MethodId, m_scale: f64) -> Self {
        RosterEntry { label: label.to_string(), method, m_scale }
    }
}

/// `lipfit`, `lipfit.big` (LB x 10), `lipfit.sm` (LB / 10), `li`, `nn`, `avg`.
pub fn default_roster() -> Vec<RosterEntry> {
    vec![
        RosterEntry::new("lipfit", MethodId::Lipfit, 1.0),
        RosterEntry::new("lipfit.big", MethodId::Lipfit, 10.0),
        RosterEntry::new("lipfit.sm", MethodId::Lipfit, 0.1),
        RosterEntry::new("li", MethodId::Li, 1.0),
        RosterEntry::new("nn", MethodId::Nn, 1.0),
        RosterEntry::new("avg", MethodId::Avg, 1.0),
    ]
}

/// Which curve the fits are scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    /// The generated piecewise-linear function.
    DeviationFree,
    /// The generated function plus independent uniform deviations at every grid point.
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub interval: Interval1D,
    /// Break points of the generated functions.
    pub k: usize,
    pub m: f64,
    pub sigma: f64,
    pub periodic: bool,
    /// Draws per equal-width stratum.
    pub strata: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    /// Points of the evaluation grid.
    pub grid_n: usize,
    pub truth: Truth,
    pub roster: Vec<RosterEntry>,
}

impl CompareConfig {
    /// Defaults: `[0, 1]`, `k = 5`, `LB = 10`, two draws from each quarter,
    /// 300 replicates, a 2001-point grid and the default roster.
    pub fn new(sigma: f64, seed: u64) -> Self {
        CompareConfig {
            interval: Interval1D::unit(),
            k: 5,
            m: 10.0,
            sigma,
            periodic: false,
            strata: vec![2, 2, 2, 2],
            replicates: 300,
            seed,
            grid_n: 2001,
            truth: Truth::DeviationFree,
            roster: default_roster(),
        }
    }
}

/// Quartiles of one method's losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub label: String,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResult {
    pub config: CompareConfig,
    pub summaries: Vec<MethodSummary>,
    /// `losses[r][j]`: replicate `r`, roster entry `j` (externals last).
    pub losses: Vec<Vec<f64>>,
}

impl CompareResult {
    pub fn summary(&self, label: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.label == label)
    }
}

/// Fits supplied from outside, one per replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalFits {
    pub label: String,
    pub fits: Vec<FitCurve>,
}

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Losses of every roster method (then every external fit) on replicate `r`.
fn replicate(cfg: &CompareConfig, r: usize, externals: &[ExternalFits]) -> Result<Vec<f64>> {
    let seed = derive_seed(cfg.seed, r as u64);
    let gen = GeneratorConfig::new(cfg.interval, cfg.k, cfg.m, cfg.sigma, cfg.periodic, seed)?;
    let f = generate(&gen)?;
    let xs = stratified_sample(&SamplingScheme::equal(cfg.interval, &cfg.strata, seed)?)?;
    let samples = add_deviation(&f, cfg.sigma, &xs, seed)?;
    let grid = cfg.interval.grid(cfg.grid_n);
    let mut truth = grid.iter().map(|&x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    if cfg.truth == Truth::Target {
        let wiggle = add_deviation(&f, cfg.sigma, &grid, seed ^ 0x5eed)?;
        truth = wiggle.ys().to_vec();
    }
    let mut out = Vec::with_capacity(cfg.roster.len() + externals.len());
    let score = |fit: &FitCurve| -> Result<f64> {
        let est = fit.eval_many(&grid)?;
        loss(LossKind::Mpwl, &grid, &truth, &est, None)
    };
    for entry in &cfg.roster {
        let method = if cfg.periodic { periodic_variant(entry.method) } else { entry.method };
        let fit = fit_method(&samples, method, Some(cfg.m * entry.m_scale))?;
        out.push(score(&fit)?);
    }
    for ext in externals {
        out.push(score(&ext.fits[r])?);
    }
    Ok(out)
}

fn periodic_variant(method: MethodId) -> MethodId {
    match method {
        MethodId::Nn => MethodId::Pnn,
        MethodId::Li => MethodId::Pli,
        MethodId::Lipfit => MethodId::Plipfit,
        other => other,
    }
}

/// Runs all replicates (in parallel, each from its own derived seed) and
/// summarises the losses per method.
pub fn run_compare(cfg: &CompareConfig, externals: &[ExternalFits]) -> Result<CompareResult> {
    if cfg.replicates == 0 {
        return Err(Error::Config("at least one replicate is required".into()));
    }
    if cfg.grid_n < 2 {
        return Err(Error::Config("evaluation grid needs at least two points".into()));
    }
    if cfg.roster.is_empty() && externals.is_empty() {
        return Err(Error::Config("nothing to compare".into()));
    }
    if let Some(e) = externals.iter().find(|e| e.fits.len() != cfg.replicates) {
        return Err(Error::Config(format!(
            "external fit '{}' has {} replicates, expected {}",
            e.label,
            e.fits.len(),
            cfg.replicates
        )));
    }
    let losses: Vec<Vec<f64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| replicate(cfg, r, externals))
        .collect::<Result<_>>()?;
    let labels = cfg.roster.iter().map(|e| e.label.clone()).chain(externals.iter().map(|e| e.label.clone()));
    let summaries = labels
        .enumerate()
        .map(|(j, label)| {
            let mut col: Vec<f64> = losses.iter().map(|row| row[j]).collect();
            col.sort_by(f64::total_cmp);
            MethodSummary {
                label,
                q25: quantile(&col, 0.25),
                q50: quantile(&col, 0.5),
                q75: quantile(&col, 0.75),
                mean: col.iter().sum::<f64>() / col.len() as f64,
            }
        })
        .collect();
    Ok(CompareResult { config: cfg.clone(), summaries, losses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
    }

    #[test]
    fn small_run_is_deterministic_and_ordered() {
        let mut cfg = CompareConfig::new(0.5, 11);
        cfg.replicates = 12;
        cfg.grid_n = 401;
        let a = run_compare(&cfg, &[]).unwrap();
        let b = run_compare(&cfg, &[]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.summaries.len(), 6);
        for s in &a.summaries {
            assert!(s.q25 <= s.q50 && s.q50 <= s.q75);
        }
        assert!(a.summary("lipfit").unwrap().q50 < a.summary("avg").unwrap().q50);
    }

    #[test]
    fn external_fits_must_cover_every_replicate() {
        let mut cfg = CompareConfig::new(0.5, 1);
        cfg.replicates = 2;
        let flat = FitCurve::from_grid(Interval1D::unit(), vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let short = ExternalFits { label: "flat".into(), fits: vec![flat.clone()] };
        assert!(run_compare(&cfg, &[short]).is_err());
        let ok = ExternalFits { label: "flat".into(), fits: vec![flat.clone(), flat] };
        let r = run_compare(&cfg, &[ok]).unwrap();
        assert!(r.summary("flat").is_some());
    }
}
