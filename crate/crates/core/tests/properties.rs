//! Randomised invariants of the solver, the trade-off curve and the fits.

use lipfit::domain::{diam_of, lip_of_samples, Interval1D, SampleSet};
use lipfit::fit::{lipfit_envelope, lipfit_fit};
use lipfit::lbbd::{gamma_fast_1d, gamma_general, gamma_inverse_fast_1d, grid_gamma_bound, li_gap};
use lipfit::lp::{solve_lp, LinearProgram, LpStatus, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL};
use lipfit::metrics::pef_envelope;
use lipfit::LbbdPair;
use proptest::prelude::*;

const TOL: f64 = 1e-6;

/// Strictly increasing locations in `[0, len]` with both ends attained.
fn locations(n: usize, len: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n - 1).prop_map(move |gaps| {
        let total: f64 = gaps.iter().sum();
        let mut xs = vec![0.0];
        let mut acc = 0.0;
        for g in &gaps {
            acc += g;
            xs.push(len * acc / total);
        }
        *xs.last_mut().unwrap() = len;
        xs
    })
}

fn series(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    n.prop_flat_map(|n| (locations(n, 1.0), prop::collection::vec(-2.0f64..2.0, n)))
}

fn set_on(xs: Vec<f64>, ys: Vec<f64>, len: f64) -> SampleSet {
    SampleSet::new_1d(xs, ys, Interval1D::new(0.0, len).unwrap()).unwrap()
}

fn set(xs: &[f64], ys: &[f64]) -> SampleSet {
    set_on(xs.to_vec(), ys.to_vec(), 1.0)
}

/// Pairwise closed form of `gamma` for finite samples.
fn gamma_oracle(xs: &[f64], ys: &[f64], m: f64) -> f64 {
    let mut g = 0.0f64;
    for i in 0..xs.len() {
        for j in 0..i {
            g = g.max(((ys[i] - ys[j]).abs() - m * (xs[i] - xs[j]).abs()) / 2.0);
        }
    }
    g
}

fn gamma_inverse_oracle(xs: &[f64], ys: &[f64], sigma: f64) -> f64 {
    let mut m = 0.0f64;
    for i in 0..xs.len() {
        for j in 0..i {
            m = m.max(((ys[i] - ys[j]).abs() - 2.0 * sigma).max(0.0) / (xs[i] - xs[j]).abs());
        }
    }
    m
}

/// Solves the square system `a z = b` (`p <= 3`) by Gaussian elimination.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let p = b.len();
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..p {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..p {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..p).map(|i| b[i] / a[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (k - 1..n)
        .flat_map(|last| {
            subsets(last, k - 1).into_iter().map(move |mut s| {
                s.push(last);
                s
            })
        })
        .collect()
}

/// Smallest objective over all feasible vertices, `None` if none exist.
fn vertex_optimum(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let p = c.len();
    let mut best: Option<f64> = None;
    for rows in subsets(a.len(), p) {
        let sub_a = rows.iter().map(|&r| a[r].clone()).collect();
        let sub_b = rows.iter().map(|&r| b[r]).collect();
        let Some(z) = solve_square(sub_a, sub_b) else { continue };
        let feasible = a.iter().zip(b).all(|(row, &bi)| row.iter().zip(&z).map(|(u, v)| u * v).sum::<f64>() <= bi + 1e-7);
        if feasible {
            let obj: f64 = c.iter().zip(&z).map(|(u, v)| u * v).sum();
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
    }
    best
}

fn bounded_lp() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..=3, 1usize..=5).prop_flat_map(|(p, r)| {
        (
            prop::collection::vec(-3.0f64..3.0, p),
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, p), r),
            prop::collection::vec(-1.0f64..4.0, r),
        )
            .prop_map(move |(c, mut a, mut b)| {
                for k in 0..p {
                    let mut e = vec![0.0; p];
                    e[k] = 1.0;
                    a.push(e.clone());
                    b.push(5.0);
                    e[k] = -1.0;
                    a.push(e);
                    b.push(5.0);
                }
                (c, a, b)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn solver_matches_vertex_enumeration((c, a, b) in bounded_lp()) {
        let lp = LinearProgram::new(c.clone(), a.clone(), b.clone()).unwrap();
        let sol = solve_lp(&lp, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL).unwrap();
        match vertex_optimum(&c, &a, &b) {
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective - best).abs() <= 1e-6 * (1.0 + best.abs()), "{} vs {}", sol.objective, best);
                prop_assert!(lp.max_violation(sol.z.as_ref().unwrap()) <= 1e-7);
            }
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
        }
    }

    #[test]
    fn engines_match_pairwise_oracle((xs, ys) in series(2..=7), m in 0.0f64..20.0) {
        let s = set(&xs, &ys);
        let want = gamma_oracle(&xs, &ys, m);
        prop_assert!((gamma_fast_1d(&s, m, false).unwrap() - want).abs() <= TOL);
        prop_assert!((gamma_general(&s, m, false).unwrap() - want).abs() <= TOL);
    }

    #[test]
    fn inverse_matches_pairwise_oracle((xs, ys) in series(2..=7), sigma in 0.0f64..2.0) {
        let s = set(&xs, &ys);
        let want = gamma_inverse_oracle(&xs, &ys, sigma);
        prop_assert!((gamma_inverse_fast_1d(&s, sigma, false).unwrap() - want).abs() <= TOL * (1.0 + want));
    }

    #[test]
    fn domain_scaling((xs, ys) in series(2..=8), m in 0.0f64..20.0, k in prop::sample::select(vec![0.5f64, 2.0, 3.0])) {
        let base = gamma_fast_1d(&set(&xs, &ys), m / k, false).unwrap();
        let squeezed: Vec<f64> = xs.iter().map(|x| x / k).collect();
        let scaled = gamma_fast_1d(&set_on(squeezed, ys, 1.0 / k), m, false).unwrap();
        prop_assert!((scaled - base).abs() <= TOL, "{scaled} vs {base}");
    }

    #[test]
    fn value_scaling((xs, ys) in series(2..=8), m in 0.0f64..20.0, k in prop::sample::select(vec![-2.0f64, 0.5, 3.0])) {
        let base = gamma_fast_1d(&set(&xs, &ys), m / k.abs(), false).unwrap();
        let kys: Vec<f64> = ys.iter().map(|y| k * y).collect();
        let scaled = gamma_fast_1d(&set(&xs, &kys), m, false).unwrap();
        prop_assert!((scaled - k.abs() * base).abs() <= TOL, "{scaled} vs {}", k.abs() * base);
    }

    #[test]
    fn summation_bound(
        (xs, y1) in series(2..=8),
        seed in prop::collection::vec(-2.0f64..2.0, 8),
        m1 in 0.0f64..10.0,
        m2 in 0.0f64..10.0,
        s1 in 0.0f64..1.0,
        s2 in 0.0f64..1.0,
    ) {
        let y2: Vec<f64> = seed[..xs.len()].to_vec();
        let sum: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a + b).collect();
        let (f1, f2, f) = (set(&xs, &y1), set(&xs, &y2), set(&xs, &sum));
        let lhs = gamma_fast_1d(&f, m1 + m2, false).unwrap();
        let rhs = gamma_fast_1d(&f1, m1, false).unwrap() + gamma_fast_1d(&f2, m2, false).unwrap();
        prop_assert!(lhs <= rhs + TOL, "{lhs} > {rhs}");
        let lhs = gamma_inverse_fast_1d(&f, s1 + s2, false).unwrap();
        let rhs = gamma_inverse_fast_1d(&f1, s1, false).unwrap() + gamma_inverse_fast_1d(&f2, s2, false).unwrap();
        prop_assert!(lhs <= rhs + TOL * (1.0 + rhs), "{lhs} > {rhs}");
    }

    /// A perturbation whose values span at most `sigma` moves `gamma` by at
    /// most `sigma / 2`; a perturbation bounded by `sigma` in absolute value
    /// moves it by at most `sigma`.
    #[test]
    fn perturbation_bounds(
        (xs, ys) in series(2..=8),
        unit in prop::collection::vec(0.0f64..1.0, 8),
        shift in -1.0f64..1.0,
        sigma in 0.0f64..1.0,
    ) {
        let f = set(&xs, &ys);
        let band: Vec<f64> = ys.iter().zip(&unit).map(|(y, u)| y + shift + sigma * u).collect();
        let sym: Vec<f64> = ys.iter().zip(&unit).map(|(y, u)| y + sigma * (2.0 * u - 1.0)).collect();
        let (g_band, g_sym) = (set(&xs, &band), set(&xs, &sym));
        for m in [0.0, 0.5, 2.0, 5.0, 20.0] {
            let base = gamma_fast_1d(&f, m, false).unwrap();
            let d_band = (gamma_fast_1d(&g_band, m, false).unwrap() - base).abs();
            let d_sym = (gamma_fast_1d(&g_sym, m, false).unwrap() - base).abs();
            prop_assert!(d_band <= sigma / 2.0 + TOL, "m = {m}: {d_band} > {}", sigma / 2.0);
            prop_assert!(d_sym <= sigma + TOL, "m = {m}: {d_sym} > {sigma}");
        }
    }

    #[test]
    fn grid_sandwich(
        (xs, ys) in series(6..=24),
        keep in prop::collection::vec(any::<bool>(), 24),
        m in 0.0f64..15.0,
    ) {
        let fine = set(&xs, &ys);
        let n = xs.len();
        let idx: Vec<usize> = (0..n).filter(|&i| i == 0 || i == n - 1 || keep[i]).collect();
        let b = grid_gamma_bound(&fine, &idx, m).unwrap();
        let diff = b.gamma_fine - b.gamma_coarse;
        prop_assert!(diff >= -TOL && diff <= b.li_gap + TOL, "diff {diff}, gap {}", b.li_gap);
        prop_assert_eq!(b.li_gap, li_gap(&fine, &idx).unwrap());
    }

    #[test]
    fn endpoint_identities((xs, ys) in series(2..=8)) {
        let s = set(&xs, &ys);
        let lip = lip_of_samples(&s).value;
        prop_assert!((gamma_fast_1d(&s, 0.0, false).unwrap() - diam_of(&ys) / 2.0).abs() <= 1e-9);
        prop_assert!(gamma_fast_1d(&s, lip, false).unwrap() <= 1e-9);
        prop_assert!((gamma_inverse_fast_1d(&s, 0.0, false).unwrap() - lip).abs() <= 1e-9 * (1.0 + lip));
    }

    #[test]
    fn lipfit_interpolates_stays_in_envelope_and_keeps_bound((xs, ys) in series(2..=8), extra in 1.0f64..3.0) {
        let s = set(&xs, &ys);
        let m = extra * lip_of_samples(&s).value.max(0.1);
        let fit = lipfit_fit(&s, m, false).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert_eq!(fit.eval(*x).unwrap(), *y);
        }
        let grid = Interval1D::unit().grid(401);
        let vals = fit.eval_many(&grid).unwrap();
        for (x, v) in grid.iter().zip(&vals) {
            let env = lipfit_envelope(&s, m, &[*x]).unwrap();
            prop_assert!(env.lower - 1e-9 <= *v && *v <= env.upper + 1e-9);
            prop_assert!((v - env.midpoint()).abs() <= 1e-9 * (1.0 + v.abs()));
        }
        for w in grid.windows(2).zip(vals.windows(2)) {
            let (gx, gv) = w;
            prop_assert!((gv[1] - gv[0]).abs() <= m * (gx[1] - gx[0]) + 1e-9);
        }
        let sigma = gamma_fast_1d(&s, m, false).unwrap();
        let pair = LbbdPair::new(m, sigma).unwrap();
        for x in &grid {
            prop_assert!(pef_envelope(&s, pair, &[*x]).unwrap() >= 0.0);
        }
    }
}

#[test]
fn literal_half_sigma_reading_fails_for_symmetric_perturbations() {
    // f = (0, 0) and g = (sigma, -sigma) are within sigma of each other, yet
    // gamma(0) moves by the full sigma.
    let sigma = 0.3;
    let f = set(&[0.0, 1.0], &[0.0, 0.0]);
    let g = set(&[0.0, 1.0], &[sigma, -sigma]);
    let moved = gamma_fast_1d(&g, 0.0, false).unwrap() - gamma_fast_1d(&f, 0.0, false).unwrap();
    assert!((moved - sigma).abs() < 1e-12);
    assert!(moved > sigma / 2.0);
}

#[test]
fn members_with_off_sample_deviation_reach_pef_plus_sigma() {
    // g = sigma + min(x, 1 - x) is 1-Lipschitz and within sigma of the data;
    // f = g + sigma off the samples passes through them and stays within
    // sigma of g, yet sits sigma beyond the band edge at the midpoint.
    let sigma = 0.1;
    let s = set(&[0.0, 1.0], &[0.0, 0.0]);
    let pair = LbbdPair::new(1.0, sigma).unwrap();
    let f = |x: f64| if x == 0.0 || x == 1.0 { 0.0 } else { 2.0 * sigma + x.min(1.0 - x) };
    let lipfit = lipfit_fit(&s, 1.0, false).unwrap().eval(0.5).unwrap();
    let pef = pef_envelope(&s, pair, &[0.5]).unwrap();
    assert!(((f(0.5) - lipfit).abs() - (pef + sigma)).abs() < 1e-12);
}
