//! Deterministic sample points and per-point dispatch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::report::CheckReport;
use crate::tensor::{ChartBox, TensorError};

/// Box used when a metric file gives no `domain`.
pub const DEFAULT_HALF_WIDTH: f64 = 1.0;

pub fn default_domain(dim: usize) -> ChartBox {
    ChartBox::cube(dim, DEFAULT_HALF_WIDTH)
}

/// `count` points uniform in `domain`, reproducible from `seed`.
pub fn sample_points(domain: &ChartBox, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            domain
                .lo
                .iter()
                .zip(&domain.hi)
                .map(|(&a, &b)| rng.gen_range(a..b))
                .collect()
        })
        .collect()
}

/// Runs `check` at every point in parallel and concatenates the reports in
/// point order. The first error (in point order) wins.
pub fn run_points<F>(points: &[Vec<f64>], check: F) -> Result<CheckReport, TensorError>
where
    F: Fn(&[f64], &mut CheckReport) -> Result<(), TensorError> + Sync,
{
    let parts: Vec<Result<CheckReport, TensorError>> = points
        .par_iter()
        .map(|p| {
            let mut r = CheckReport::new();
            check(p, &mut r).map(|_| r)
        })
        .collect();
    let mut out = CheckReport::new();
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_reproducible_and_inside() {
        let b = ChartBox::new(vec![-1.0, 0.0], vec![1.0, 5.0]).unwrap();
        let a = sample_points(&b, 50, 7);
        assert_eq!(a, sample_points(&b, 50, 7));
        assert_ne!(a, sample_points(&b, 50, 8));
        assert!(a.iter().all(|p| b.contains(p)));
    }
}
