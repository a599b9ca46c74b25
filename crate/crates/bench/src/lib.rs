//! Deterministic inputs for the benchmarks under `benches/`.

use lipfit::domain::{Interval1D, SampleSet};

/// `n` irregularly spaced samples of a wiggly signal on `[0, 1]`.
pub fn wiggly_series(n: usize) -> SampleSet {
    assert!(n >= 2, "need at least two samples");
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            (t + 0.05 * (t * (1.0 - t)) * (17.0 * t).sin()).clamp(0.0, 1.0)
        })
        .collect();
    let ys = xs.iter().map(|x| (7.0 * x).sin() + 0.3 * (31.0 * x).cos()).collect();
    SampleSet::new_1d(xs, ys, Interval1D::unit()).expect("locations are increasing")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_is_valid() {
        for n in [2, 10, 80] {
            assert_eq!(wiggly_series(n).len(), n);
        }
    }
}
