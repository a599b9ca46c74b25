//! Sparse-series workflow: LB-BD curves from complete reference series,
//! prediction error minimisation on a three-sample target, and a report of
//! `(IE, DIE); (SPWE, DSPWE[LI], DSPWE[Lipfit])` for the ordinary and the
//! periodic families.
//!
//! The synthetic stand-in has a reference site (a smoothed periodic
//! pattern plus daily deviations), a target site (the reference plus a
//! slowly varying periodic difference) and their difference process.

use serde::{Deserialize, Serialize};

use crate::curve::MethodId;
use crate::domain::{Interval1D, LbbdPair, SampleSet};
use crate::error::{Error, Result};
use crate::lbbd::{default_m_grid, lbbd_curve, Engine, LbbdCurve};
use crate::metrics::{ErrorKind, DEFAULT_GRID_N};
use crate::pem::pem_select_with;
use crate::simgen::{add_deviation, gen_ppl, moving_average, GeneratorConfig};

/// Minimised errors for one family, each over the same curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBlock {
    pub periodic: bool,
    pub ie: f64,
    pub die: f64,
    pub spwe: f64,
    pub dspwe_li: f64,
    pub dspwe_lipfit: f64,
    /// Pair minimising `DSPWE[Lipfit]`.
    pub pair: LbbdPair,
}

impl ErrorBlock {
    /// `(IE, DIE); (SPWE, DSPWE[LI], DSPWE[Lipfit])`.
    pub fn render(&self) -> String {
        format!(
            "({:.3}, {:.3}); ({:.3}, {:.3}, {:.3})",
            self.ie, self.die, self.spwe, self.dspwe_li, self.dspwe_lipfit
        )
    }
}

/// Minimised errors of the samples `s` against `curve`.
pub fn error_block(s: &SampleSet, curve: &LbbdCurve, periodic: bool, grid_n: usize) -> Result<ErrorBlock> {
    let run = |kind, method| pem_select_with(s, curve, kind, method, periodic, grid_n);
    let best = run(ErrorKind::Dspwe, MethodId::Lipfit)?;
    Ok(ErrorBlock {
        periodic,
        ie: run(ErrorKind::Ie, MethodId::Lipfit)?.upsilon,
        die: run(ErrorKind::Die, MethodId::Lipfit)?.upsilon,
        spwe: run(ErrorKind::Spwe, MethodId::Lipfit)?.upsilon,
        dspwe_li: run(ErrorKind::Dspwe, MethodId::Li)?.upsilon,
        dspwe_lipfit: best.upsilon,
        pair: best.chosen,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowConfig {
    /// Points of each complete series over one period `[0, 1)`.
    pub n_dense: usize,
    /// Break points and LB of the reference pattern.
    pub k: usize,
    pub m: f64,
    /// Half-width of the daily deviations.
    pub sigma: f64,
    /// Centred moving-average window (odd) applied to the complete series.
    pub window: usize,
    /// Break points and LB of the difference pattern.
    pub diff_k: usize,
    pub diff_m: f64,
    /// Locations of the three sparse observations.
    pub sample_at: Vec<f64>,
    pub seed: u64,
    pub grid_n: usize,
}

impl WorkflowConfig {
    pub fn new(seed: u64) -> Self {
        WorkflowConfig {
            n_dense: 120,
            k: 5,
            m: 10.0,
            sigma: 0.5,
            window: 5,
            diff_k: 3,
            diff_m: 2.0,
            sample_at: vec![0.3, 0.55, 0.9],
            seed,
            grid_n: DEFAULT_GRID_N,
        }
    }
}

/// One row of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowRow {
    pub process: String,
    /// Series the curve was computed from.
    pub curve_from: String,
    pub alb: ErrorBlock,
    pub palb: ErrorBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowReport {
    pub config: WorkflowConfig,
    pub rows: Vec<WorkflowRow>,
}

impl WorkflowReport {
    /// Every block has `DSPWE[Lipfit] <= DSPWE[LI]`.
    pub fn lipfit_never_worse(&self) -> bool {
        self.rows
            .iter()
            .flat_map(|r| [&r.alb, &r.palb])
            .all(|b| b.dspwe_lipfit <= b.dspwe_li)
    }
}

/// Complete series of the three processes on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSites {
    pub reference: SampleSet,
    pub target: SampleSet,
    pub difference: SampleSet,
}

fn dense_series(cfg: &WorkflowConfig, k: usize, m: f64, seed: u64) -> Result<Vec<f64>> {
    let iv = Interval1D::unit();
    let gen = GeneratorConfig::new(iv, k, m, cfg.sigma, true, seed)?;
    let f = gen_ppl(&gen)?;
    let xs = dense_grid(cfg.n_dense);
    let noisy = add_deviation(&f, cfg.sigma, &xs, seed)?;
    moving_average(noisy.ys(), cfg.window)
}

fn dense_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

/// Builds the reference, target and difference series.
pub fn synthetic_sites(cfg: &WorkflowConfig) -> Result<SyntheticSites> {
    if cfg.n_dense < 3 {
        return Err(Error::Config("complete series need at least three points".into()));
    }
    let iv = Interval1D::unit();
    let xs = dense_grid(cfg.n_dense);
    let reference = dense_series(cfg, cfg.k, cfg.m, cfg.seed)?;
    let diff_gen = GeneratorConfig::new(iv, cfg.diff_k, cfg.diff_m, 0.0, true, cfg.seed.wrapping_add(1))?;
    let diff = gen_ppl(&diff_gen)?;
    let local = dense_series(cfg, cfg.k, cfg.m, cfg.seed.wrapping_add(2))?;
    let local_mean = local.iter().sum::<f64>() / local.len() as f64;
    // Target: reference pattern, shifted by the difference, with a damped
    // copy of its own centred deviations.
    let target: Vec<f64> = xs
        .iter()
        .zip(&reference)
        .zip(&local)
        .map(|((&x, &r), &own)| Ok(r + diff.eval(x)? + 0.25 * (own - local_mean)))
        .collect::<Result<_>>()?;
    let difference: Vec<f64> = target.iter().zip(&reference).map(|(t, r)| t - r).collect();
    let make = |ys: Vec<f64>| SampleSet::new_1d(xs.clone(), ys, iv);
    Ok(SyntheticSites { reference: make(reference)?, target: make(target)?, difference: make(difference)? })
}

/// The complete series at the sparse locations (nearest grid point).
pub fn sparse_samples(dense: &SampleSet, at: &[f64]) -> Result<SampleSet> {
    let xs = dense.xs();
    let mut idx: Vec<usize> = at
        .iter()
        .map(|&t| {
            (0..xs.len())
                .min_by(|&i, &j| (xs[i] - t).abs().total_cmp(&(xs[j] - t).abs()))
                .expect("nonempty series")
        })
        .collect();
    idx.sort_unstable();
    idx.dedup();
    dense.subset(&idx)
}

fn curve_of(dense: &SampleSet, periodic: bool) -> Result<LbbdCurve> {
    let grid = default_m_grid(dense, periodic)?;
    lbbd_curve(dense, &grid, periodic, Engine::Fast)
}

fn row(process: &str, curve_from: &str, sparse: &SampleSet, dense: &SampleSet, grid_n: usize) -> Result<WorkflowRow> {
    Ok(WorkflowRow {
        process: process.to_string(),
        curve_from: curve_from.to_string(),
        alb: error_block(sparse, &curve_of(dense, false)?, false, grid_n)?,
        palb: error_block(sparse, &curve_of(dense, true)?, true, grid_n)?,
    })
}

/// Runs the workflow end to end. Rows: each process against its own curve,
/// then the target against the reference curve.
pub fn run_workflow(cfg: &WorkflowConfig) -> Result<WorkflowReport> {
    let sites = synthetic_sites(cfg)?;
    let sparse = |d: &SampleSet| sparse_samples(d, &cfg.sample_at);
    let rows = vec![
        row("reference", "reference", &sparse(&sites.reference)?, &sites.reference, cfg.grid_n)?,
        row("target", "target", &sparse(&sites.target)?, &sites.target, cfg.grid_n)?,
        row("difference", "difference", &sparse(&sites.difference)?, &sites.difference, cfg.grid_n)?,
        row("target", "reference", &sparse(&sites.target)?, &sites.reference, cfg.grid_n)?,
    ];
    Ok(WorkflowReport { config: cfg.clone(), rows })
}
