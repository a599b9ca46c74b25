//! Prediction error minimisation: pick the `(m, gamma(m))` pair on an LB-BD
//! curve whose worst-case prediction error for the observed locations is
//! smallest. That minimum is `Upsilon`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::MethodId;
use crate::domain::{LbbdPair, SampleSet};
use crate::error::{Error, Result};
use crate::lbbd::LbbdCurve;
use crate::metrics::{error_report, ErrorKind, DEFAULT_GRID_N};

/// One audited grid point; `error` is `None` when the samples do not fit the pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PemAudit {
    pub m: f64,
    pub gamma: f64,
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PemResult {
    pub chosen: LbbdPair,
    pub upsilon: f64,
    pub error_kind: ErrorKind,
    pub method: MethodId,
    pub periodic: bool,
    pub per_m: Vec<PemAudit>,
}

fn check_method(method: MethodId) -> Result<()> {
    match method.base() {
        MethodId::Nn | MethodId::Li | MethodId::Lipfit => Ok(()),
        other => Err(Error::Input(format!("prediction error minimisation supports nn, li and lipfit, not {other}"))),
    }
}

/// Evaluates `kind` at every curve point (in parallel) and returns the
/// minimiser; ties go to the smallest `m`. Pairs the samples violate are
/// skipped.
pub fn pem_select_with(
    s: &SampleSet,
    curve: &LbbdCurve,
    kind: ErrorKind,
    method: MethodId,
    periodic: bool,
    grid_n: usize,
) -> Result<PemResult> {
    check_method(method)?;
    if curve.is_empty() {
        return Err(Error::Input("curve has no points".into()));
    }
    let per_m: Vec<PemAudit> = curve
        .m_grid
        .par_iter()
        .zip(curve.gamma.par_iter())
        .map(|(&m, &gamma)| {
            let pair = LbbdPair::new(m, gamma)?;
            match error_report(s, pair, method, periodic, grid_n) {
                Ok(r) => Ok(PemAudit { m, gamma, error: Some(kind.pick(&r.aggregate)) }),
                Err(Error::Infeasible(_)) => Ok(PemAudit { m, gamma, error: None }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(usize, f64)> = None;
    for (k, a) in per_m.iter().enumerate() {
        if let Some(e) = a.error {
            if best.map_or(true, |(_, b)| e < b) {
                best = Some((k, e));
            }
        }
    }
    let Some((k, upsilon)) = best else {
        return Err(Error::Infeasible("no pair on the curve is consistent with the samples".into()));
    };
    Ok(PemResult {
        chosen: LbbdPair::new(per_m[k].m, per_m[k].gamma)?,
        upsilon,
        error_kind: kind,
        method,
        periodic,
        per_m,
    })
}

/// [`pem_select_with`] on the default error grid.
pub fn pem_select(
    s: &SampleSet,
    curve: &LbbdCurve,
    kind: ErrorKind,
    method: MethodId,
    periodic: bool,
) -> Result<PemResult> {
    pem_select_with(s, curve, kind, method, periodic, DEFAULT_GRID_N)
}

/// `Upsilon` alone.
pub fn upsilon_only(s: &SampleSet, curve: &LbbdCurve, kind: ErrorKind, method: MethodId, periodic: bool) -> Result<f64> {
    Ok(pem_select(s, curve, kind, method, periodic)?.upsilon)
}
