//! Dense, deterministic simplex solver for the small linear programs that
//! arise from min-max (epigraph) formulations.
//!
//! Problems are stated as `min c'z  s.t.  A z <= b` with `z` free. They are
//! solved through the standard-form dual `min b'l  s.t.  A'l = -c, l >= 0`,
//! whose tableau has one row per primal variable. The primal optimum is the
//! vector of simplex multipliers of the final dual basis.
//!
//! Pivoting uses the most negative reduced cost (lowest index on ties) and
//! falls back to Bland's rule after a run of degenerate pivots, so every solve
//! is a fixed sequence of floating-point operations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FEAS_TOL: f64 = 1e-9;
pub const DEFAULT_OPT_TOL: f64 = 1e-8;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 200_000;

/// `min c'z` subject to `A z <= b`, `z` free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    c: Vec<f64>,
    /// Row-major `rows x c.len()`.
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LinearProgram {
    pub fn new(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let p = c.len();
        if a.len() != b.len() {
            return Err(Error::Input(format!("{} constraint rows but {} right-hand sides", a.len(), b.len())));
        }
        if let Some(i) = a.iter().position(|row| row.len() != p) {
            return Err(Error::Input(format!("constraint row {i} has length {}, expected {p}", a[i].len())));
        }
        let a: Vec<f64> = a.into_iter().flatten().collect();
        LinearProgram::from_dense(c, a, b)
    }

    /// Build from a flat row-major matrix.
    pub fn from_dense(c: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::Input("linear program needs at least one variable".into()));
        }
        if a.len() != b.len() * c.len() {
            return Err(Error::Input(format!(
                "constraint matrix has {} entries, expected {} x {}",
                a.len(),
                b.len(),
                c.len()
            )));
        }
        if c.iter().chain(&a).chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::Input("linear program entries must be finite".into()));
        }
        Ok(LinearProgram { c, a, b })
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.c.len();
        &self.a[i * p..(i + 1) * p]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    /// Largest violation `max_i (A_i z - b_i)`, or 0 when feasible.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        (0..self.num_rows())
            .map(|i| dot(self.row(i), z) - self.b[i])
            .fold(0.0, f64::max)
    }

    /// Plain-text dump: an objective line then one line per constraint row.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# lp vars={} rows={}", self.num_vars(), self.num_rows());
        out.push_str("min");
        for v in &self.c {
            let _ = write!(out, " {v:e}");
        }
        out.push('\n');
        for i in 0..self.num_rows() {
            for (k, v) in self.row(i).iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v:e}");
            }
            let _ = writeln!(out, " <= {:e}", self.b[i]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Present iff `status == Optimal`.
    pub z: Option<Vec<f64>>,
    /// `c'z` at the optimum; `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
}

impl LpSolution {
    /// The optimal objective, or an error naming the status.
    pub fn optimum(&self) -> Result<f64> {
        match self.status {
            LpStatus::Optimal => Ok(self.objective),
            LpStatus::Infeasible => Err(Error::Lp("is infeasible".into())),
            LpStatus::Unbounded => Err(Error::Lp("is unbounded".into())),
        }
    }
}

/// Solve `lp` to optimality. `feas_tol` bounds the accepted row violation and
/// the phase-one residual; `opt_tol` bounds the accepted duality gap.
pub fn solve_lp(lp: &LinearProgram, feas_tol: f64, opt_tol: f64) -> Result<LpSolution> {
    solve_inner(lp, feas_tol, opt_tol, true)
}

fn solve_inner(lp: &LinearProgram, feas_tol: f64, opt_tol: f64, classify: bool) -> Result<LpSolution> {
    let p = lp.num_vars();
    let q = lp.num_rows();
    // Dual equality system M l = r with M = A' (p x q), r = -c.
    let mut tab = Tableau::new(lp, p, q);

    // Phase one: drive the artificials out.
    tab.set_phase_one_costs();
    tab.run(false)?;
    let infeas = tab.obj_value();
    let scale = 1.0 + lp.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if infeas > feas_tol * scale {
        // The dual is infeasible: the primal is unbounded or infeasible.
        let status = if classify && primal_feasible(lp, feas_tol, opt_tol)? {
            LpStatus::Unbounded
        } else {
            LpStatus::Infeasible
        };
        let objective = if status == LpStatus::Unbounded { f64::NEG_INFINITY } else { f64::INFINITY };
        return Ok(LpSolution { status, z: None, objective });
    }
    tab.evict_artificials();

    // Phase two on the true costs.
    tab.set_phase_two_costs(&lp.b);
    if tab.run(true)? == Outcome::Unbounded {
        // Dual unbounded below: no primal point satisfies A z <= b.
        return Ok(LpSolution { status: LpStatus::Infeasible, z: None, objective: f64::INFINITY });
    }

    let z = tab.multipliers(lp)?;
    let objective = dot(&lp.c, &z);
    let dual_objective = -tab.obj_value(); // primal value implied by the dual optimum
    let gap = (objective - dual_objective).abs();
    let obj_scale = 1.0 + objective.abs();
    if gap > opt_tol * obj_scale || lp.max_violation(&z) > feas_tol * (1.0 + norm_inf(&lp.b)) {
        return Err(Error::Lp(format!(
            "lost accuracy (duality gap {gap:e}, violation {:e})",
            lp.max_violation(&z)
        )));
    }
    Ok(LpSolution { status: LpStatus::Optimal, z: Some(z), objective })
}

/// Is `A z <= b` satisfiable? Decided by `min s  s.t.  A z - s <= b, -s <= 0`,
/// which is always feasible and bounded.
fn primal_feasible(lp: &LinearProgram, feas_tol: f64, opt_tol: f64) -> Result<bool> {
    let p = lp.num_vars();
    let q = lp.num_rows();
    let mut a = Vec::with_capacity((q + 1) * (p + 1));
    for i in 0..q {
        a.extend_from_slice(lp.row(i));
        a.push(-1.0);
    }
    a.extend(std::iter::repeat(0.0).take(p));
    a.push(-1.0);
    let mut b = lp.b.clone();
    b.push(0.0);
    let mut c = vec![0.0; p + 1];
    c[p] = 1.0;
    let aux = LinearProgram::from_dense(c, a, b)?;
    let sol = solve_inner(&aux, feas_tol, opt_tol, false)?;
    Ok(sol.status == LpStatus::Optimal && sol.objective <= feas_tol * (1.0 + norm_inf(&lp.b)))
}

#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

/// Dense tableau for `min d'w  s.t.  [M | I] w = r`, `w >= 0`, where the last
/// `p` columns are artificials.
struct Tableau {
    rows: usize,
    /// Structural columns (dual variables).
    nstruct: usize,
    width: usize,
    /// `rows x (width + 1)`, last column is the right-hand side.
    t: Vec<f64>,
    /// Reduced costs (`width` entries) followed by minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Row sign flips applied so that the right-hand side is nonnegative.
    flip: Vec<f64>,
    artificial_allowed: bool,
}

impl Tableau {
    fn new(lp: &LinearProgram, p: usize, q: usize) -> Self {
        let width = q + p;
        let stride = width + 1;
        let mut t = vec![0.0; p * stride];
        let mut flip = vec![1.0; p];
        for k in 0..p {
            let rhs = -lp.c[k];
            let s = if rhs < 0.0 { -1.0 } else { 1.0 };
            flip[k] = s;
            let row = &mut t[k * stride..(k + 1) * stride];
            for j in 0..q {
                row[j] = s * lp.a[j * p + k];
            }
            row[q + k] = 1.0;
            row[width] = s * rhs;
        }
        Tableau {
            rows: p,
            nstruct: q,
            width,
            t,
            cost: vec![0.0; width + 1],
            basis: (q..q + p).collect(),
            flip,
            artificial_allowed: true,
        }
    }

    fn stride(&self) -> usize {
        self.width + 1
    }

    fn obj_value(&self) -> f64 {
        -self.cost[self.width]
    }

    /// Reduced costs for `min sum(artificials)` at the all-artificial basis.
    fn set_phase_one_costs(&mut self) {
        let stride = self.stride();
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        for i in 0..self.rows {
            let row = &self.t[i * stride..(i + 1) * stride];
            for j in 0..self.nstruct {
                self.cost[j] -= row[j];
            }
            self.cost[self.width] -= row[self.width];
        }
    }

    /// Reduced costs for `min b'l` at the current basis.
    fn set_phase_two_costs(&mut self, b: &[f64]) {
        let stride = self.stride();
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        self.cost[..self.nstruct].copy_from_slice(b);
        for i in 0..self.rows {
            let bj = self.basis[i];
            let cb = if bj < self.nstruct { b[bj] } else { 0.0 };
            if cb != 0.0 {
                let row = &self.t[i * stride..(i + 1) * stride];
                for (c, v) in self.cost.iter_mut().zip(row) {
                    *c -= cb * v;
                }
            }
        }
        self.artificial_allowed = false;
    }

    /// Pivot basic artificials out where a structural column allows it; rows
    /// where none does are redundant and keep their artificial at zero.
    fn evict_artificials(&mut self) {
        let stride = self.stride();
        for i in 0..self.rows {
            if self.basis[i] < self.nstruct {
                continue;
            }
            let row = &self.t[i * stride..(i + 1) * stride];
            let mut best: Option<(usize, f64)> = None;
            for (j, v) in row[..self.nstruct].iter().enumerate() {
                if v.abs() > PIVOT_TOL && best.map_or(true, |(_, b)| v.abs() > b) {
                    best = Some((j, v.abs()));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(i, j);
            }
        }
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let limit = if self.artificial_allowed { self.width } else { self.nstruct };
        if bland {
            return (0..limit).find(|&j| self.cost[j] < -COST_TOL);
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..limit {
            let d = self.cost[j];
            if d < -COST_TOL && best.map_or(true, |(_, b)| d < b) {
                best = Some((j, d));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Minimum-ratio row; ties go to the row whose basic variable has the
    /// lowest index.
    fn leaving(&self, col: usize) -> Option<usize> {
        let stride = self.stride();
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.t[i * stride + col];
            if a > PIVOT_TOL {
                let ratio = self.t[i * stride + self.width] / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12 * (1.0 + br.abs())
                            || (ratio <= br + 1e-12 * (1.0 + br.abs()) && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let stride = self.stride();
        let piv = self.t[r * stride + col];
        {
            let row = &mut self.t[r * stride..(r + 1) * stride];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[col] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * stride);
        let (prow, after) = rest.split_at_mut(stride);
        for other in before.chunks_exact_mut(stride).chain(after.chunks_exact_mut(stride)) {
            let f = other[col];
            if f != 0.0 {
                for (o, pv) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * pv;
                }
                other[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (o, pv) in self.cost.iter_mut().zip(prow.iter()) {
                *o -= f * pv;
            }
            self.cost[col] = 0.0;
        }
        self.basis[r] = col;
    }

    fn run(&mut self, _phase_two: bool) -> Result<Outcome> {
        let stride = self.stride();
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_RUN;
            let Some(col) = self.entering(bland) else {
                return Ok(Outcome::Optimal);
            };
            let Some(row) = self.leaving(col) else {
                return Ok(Outcome::Unbounded);
            };
            let step = self.t[row * stride + self.width];
            if step.abs() <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(row, col);
        }
        Err(Error::Lp(format!("did not converge within {MAX_PIVOTS} pivots")))
    }

    /// Solve `B' pi = c_B` for the final basis with a fresh elimination.
    fn multipliers(&self, lp: &LinearProgram) -> Result<Vec<f64>> {
        let p = self.rows;
        // Column of basic variable `j` in the unflipped system.
        let mut bt = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        for (i, &j) in self.basis.iter().enumerate() {
            // Row i of B' is the column of basic variable j.
            if j < self.nstruct {
                bt[i * p..(i + 1) * p].copy_from_slice(lp.row(j));
                rhs[i] = lp.b[j];
            } else {
                let k = j - self.nstruct;
                bt[i * p + k] = self.flip[k];
                rhs[i] = 0.0;
            }
        }
        gauss_solve(&mut bt, &mut rhs, p).ok_or_else(|| Error::Lp("final basis is singular".into()))
    }
}

/// In-place Gaussian elimination with partial pivoting for a dense `n x n` system.
fn gauss_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax < 1e-300 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        let d = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / d;
            if f != 0.0 {
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k * n + j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k * n + k];
    }
    Some(x)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// An affine function `coeffs . z + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineExpr {
    pub coeffs: Vec<f64>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn new(coeffs: Vec<f64>, constant: f64) -> Self {
        AffineExpr { coeffs, constant }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        dot(&self.coeffs, z) + self.constant
    }
}

/// Epigraph form of `min_z max_k |term_k(z)|` subject to `extra_k(z) <= 0`.
///
/// The returned program has variables `(z, t)` with `t` last, rows
/// `term_k - t <= 0` and `-term_k - t <= 0` for every term (in that order),
/// then one row per extra constraint; the objective is `t`.
pub fn minmax_affine_to_lp(terms: &[AffineExpr], extra: &[AffineExpr]) -> Result<LinearProgram> {
    let Some(first) = terms.first() else {
        return Err(Error::Input("min-max needs at least one term".into()));
    };
    let nz = first.coeffs.len();
    if terms.iter().chain(extra).any(|e| e.coeffs.len() != nz) {
        return Err(Error::Input("all affine expressions must have the same variable count".into()));
    }
    let p = nz + 1;
    let rows = 2 * terms.len() + extra.len();
    let mut a = Vec::with_capacity(rows * p);
    let mut b = Vec::with_capacity(rows);
    for term in terms {
        a.extend_from_slice(&term.coeffs);
        a.push(-1.0);
        b.push(-term.constant);
        a.extend(term.coeffs.iter().map(|v| -v));
        a.push(-1.0);
        b.push(term.constant);
    }
    for e in extra {
        a.extend_from_slice(&e.coeffs);
        a.push(0.0);
        b.push(-e.constant);
    }
    let mut c = vec![0.0; p];
    c[nz] = 1.0;
    LinearProgram::from_dense(c, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> LpSolution {
        solve_lp(&LinearProgram::new(c, a, b).unwrap(), DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL).unwrap()
    }

    #[test]
    fn single_lower_bound() {
        let s = solve(vec![1.0], vec![vec![-1.0]], vec![-1.0]);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!((s.z.unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_lower_bounds() {
        let s = solve(vec![1.0, 1.0], vec![vec![-1.0, 0.0], vec![0.0, -1.0]], vec![-1.0, -2.0]);
        assert_eq!(s.status, LpStatus::Optimal);
        let z = s.z.unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] - 2.0).abs() < 1e-12);
        assert!((s.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn conflicting_bounds_are_infeasible() {
        // variables (r, t): r - t <= 0, -r - t <= 0, r <= -1, -r <= 0
        let s = solve(
            vec![0.0, 1.0],
            vec![vec![1.0, -1.0], vec![-1.0, -1.0], vec![1.0, 0.0], vec![-1.0, 0.0]],
            vec![0.0, 0.0, -1.0, 0.0],
        );
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(s.z.is_none());
    }

    #[test]
    fn unbounded_detected() {
        let s = solve(vec![1.0], vec![vec![1.0]], vec![3.0]);
        assert_eq!(s.status, LpStatus::Unbounded);
        let s = solve(vec![1.0, 0.0], vec![], vec![]);
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn zero_objective_without_rows() {
        let s = solve(vec![0.0, 0.0], vec![], vec![]);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        assert!(LinearProgram::new(vec![1.0], vec![vec![1.0, 2.0]], vec![1.0]).is_err());
        assert!(LinearProgram::new(vec![1.0], vec![vec![1.0]], vec![]).is_err());
        assert!(LinearProgram::new(vec![f64::NAN], vec![], vec![]).is_err());
    }

    #[test]
    fn epigraph_structure() {
        let lp = minmax_affine_to_lp(&[AffineExpr::new(vec![1.0], 0.0)], &[]).unwrap();
        assert_eq!(lp.num_vars(), 2);
        assert_eq!(lp.num_rows(), 2);
        assert_eq!(lp.row(0), &[1.0, -1.0]);
        assert_eq!(lp.row(1), &[-1.0, -1.0]);
        assert_eq!(lp.objective(), &[0.0, 1.0]);
    }

    #[test]
    fn dump_lists_every_row() {
        let lp = minmax_affine_to_lp(&[AffineExpr::new(vec![1.0, 0.0], 2.0)], &[AffineExpr::new(vec![0.0, 1.0], -1.0)])
            .unwrap();
        let text = lp.dump();
        assert_eq!(text.lines().count(), 2 + lp.num_rows());
        assert!(text.starts_with("# lp vars=3 rows=3"));
    }

    #[test]
    fn degenerate_minmax_solves() {
        // min max |z_i - y_i| with many redundant ordering rows.
        let ys = [0.0, 1.0, 0.5, 2.0, 2.0, 1.5];
        let n = ys.len();
        let terms: Vec<_> = (0..n)
            .map(|i| {
                let mut c = vec![0.0; n];
                c[i] = 1.0;
                AffineExpr::new(c, -ys[i])
            })
            .collect();
        // z nondecreasing
        let extra: Vec<_> = (1..n)
            .map(|i| {
                let mut c = vec![0.0; n];
                c[i - 1] = 1.0;
                c[i] = -1.0;
                AffineExpr::new(c, 0.0)
            })
            .collect();
        let lp = minmax_affine_to_lp(&terms, &extra).unwrap();
        let s = solve_lp(&lp, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL).unwrap();
        // best isotonic sup-fit: the violating pair (1.0, 0.5) forces 0.25
        assert!((s.objective - 0.25).abs() < 1e-10, "{}", s.objective);
    }
}
