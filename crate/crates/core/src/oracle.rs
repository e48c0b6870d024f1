//! Finite-difference oracle for the jet kernel.
//!
//! Raw partials `∂^α f` are approximated by tensor products of second-order
//! central stencils, one per axis, and improved by Richardson extrapolation
//! over the steps `h, h/2, h/4`. The result is compared with the coefficient read
//! off [`Expr::eval_jet`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{EvalError, Expr};
use crate::fuzz::{random_expr, FUZZ_HALF_WIDTH};
use crate::jet::MultiIndex;
use crate::report::CheckReport;
use crate::sampling::sample_points;
use crate::tensor::ChartBox;

/// Largest total degree the oracle handles.
pub const MAX_FD_ORDER: usize = 4;

/// Coarsest step of the Richardson sequence.
pub const FD_STEP: f64 = 4e-2;

/// Richardson levels: truncation error is `O(h^(2 + 2·levels))`.
pub const FD_LEVELS: usize = 2;

/// Relative agreement required between jet and Richardson partials.
pub const FD_TOLERANCE: f64 = 1e-5;

/// Offsets and weights of the second-order central stencil for `d^k/dx^k`.
fn stencil(k: u8) -> &'static [(i32, f64)] {
    match k {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => panic!("no stencil for derivative order {k}"),
    }
}

/// Tensor-product central difference of `f` at `point` for multi-index `alpha`.
pub fn central_partial<F>(f: &F, point: &[f64], alpha: &MultiIndex, h: f64) -> Result<f64, EvalError>
where
    F: Fn(&[f64]) -> Result<f64, EvalError>,
{
    let axes: Vec<&[(i32, f64)]> = alpha.exponents().iter().map(|&k| stencil(k)).collect();
    let mut idx = vec![0usize; axes.len()];
    let mut x = point.to_vec();
    let mut sum = 0.0;
    loop {
        let mut w = 1.0;
        for (a, s) in axes.iter().enumerate() {
            let (off, wt) = s[idx[a]];
            x[a] = point[a] + off as f64 * h;
            w *= wt;
        }
        sum += w * f(&x)?;
        let mut a = 0;
        loop {
            if a == axes.len() {
                return Ok(sum / h.powi(alpha.degree() as i32));
            }
            idx[a] += 1;
            if idx[a] < axes[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Richardson extrapolation of [`central_partial`] over steps
/// `h, h/2, …, h/2^levels`; each level removes the next even power of `h`.
pub fn richardson_partial<F>(
    f: &F,
    point: &[f64],
    alpha: &MultiIndex,
    h: f64,
    levels: usize,
) -> Result<f64, EvalError>
where
    F: Fn(&[f64]) -> Result<f64, EvalError>,
{
    let mut row = (0..=levels)
        .map(|k| central_partial(f, point, alpha, h / f64::powi(2.0, k as i32)))
        .collect::<Result<Vec<_>, _>>()?;
    for level in 1..=levels {
        let factor = f64::powi(4.0, level as i32);
        row = row.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
    }
    Ok(row[0])
}

/// `|a − b| / max(1, |b|)`.
pub fn relative_error(approx: f64, exact: f64) -> f64 {
    (approx - exact).abs() / exact.abs().max(1.0)
}

/// Compare every raw partial of degree ≤ `order` of `expr` at `point`.
/// Records one check per multi-index under `jet.fd.order<k>`.
pub fn fd_checks(
    expr: &Expr,
    point: &[f64],
    order: usize,
    report: &mut CheckReport,
) -> Result<(), EvalError> {
    assert!(order <= MAX_FD_ORDER, "finite-difference oracle supports order ≤ {MAX_FD_ORDER}");
    let jet = expr.eval_jet(point, order)?;
    let f = |x: &[f64]| expr.eval(x);
    for alpha in jet.multi_indices() {
        if alpha.degree() == 0 {
            continue;
        }
        let exact = jet.raw_partial(alpha).expect("index from the jet itself");
        let approx = richardson_partial(&f, point, alpha, FD_STEP, FD_LEVELS)?;
        let err = relative_error(approx, exact);
        let id = format!("jet.fd.order{}", alpha.degree());
        report.bound(&id, point, approx, exact, err, FD_TOLERANCE, format!("d^{alpha} of `{expr}`"));
    }
    Ok(())
}

/// The fuzzed corpus used by the oracle: `count` expressions in `dim`
/// coordinates, each parsed from [`random_expr`] text.
pub fn fuzz_corpus(count: usize, dim: usize, depth: usize, seed: u64) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Expr::parse(&random_expr(&mut rng, dim, depth)).expect("fuzzer emits valid text"))
        .collect()
}

/// Oracle run over a fuzzed corpus, `points` seeded points per expression
/// inside the fuzz box shrunk by the stencil reach.
pub fn fd_oracle_report(
    exprs: &[Expr],
    dim: usize,
    points: usize,
    order: usize,
    seed: u64,
) -> Result<CheckReport, EvalError> {
    let reach = 2.0 * FD_STEP;
    let w = FUZZ_HALF_WIDTH - reach;
    let domain = ChartBox { lo: vec![-w; dim], hi: vec![w; dim] };
    let mut report = CheckReport::new();
    for (k, e) in exprs.iter().enumerate() {
        for p in sample_points(&domain, points, seed.wrapping_add(k as u64)) {
            fd_checks(e, &p, order, &mut report)?;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_sin(x: &[f64]) -> Result<f64, EvalError> {
        Ok(x[0].exp() * x[1].sin())
    }

    #[test]
    fn stencils_are_exact_on_monomials() {
        // x^k / k! has k-th derivative 1; lower monomials are annihilated.
        for k in 0..=4u8 {
            let s = stencil(k);
            for m in 0..=k as i32 {
                let moment: f64 = s.iter().map(|&(o, w)| w * (o as f64).powi(m)).sum();
                let want = if m == k as i32 { (1..=k as i32).product::<i32>() as f64 } else { 0.0 };
                assert!((moment - want).abs() < 1e-12, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn mixed_partial_of_product() {
        let p = [0.3, 0.7];
        let alpha = MultiIndex::new(vec![2u8, 2]);
        let want = -(0.3f64).exp() * (0.7f64).sin();
        let got = richardson_partial(&exp_sin, &p, &alpha, FD_STEP, FD_LEVELS).unwrap();
        assert!(relative_error(got, want) < 1e-7, "{got} vs {want}");
    }

    #[test]
    fn richardson_beats_plain_central() {
        let p = [0.1, -0.4];
        let alpha = MultiIndex::new(vec![3u8, 1]);
        let want = (0.1f64).exp() * (-0.4f64).cos();
        let plain = central_partial(&exp_sin, &p, &alpha, FD_STEP).unwrap();
        let rich = richardson_partial(&exp_sin, &p, &alpha, FD_STEP, 1).unwrap();
        assert!((rich - want).abs() < 0.01 * (plain - want).abs());
    }

    #[test]
    fn oracle_flags_a_wrong_jet() {
        let e = Expr::parse("sin(x1) * x2").unwrap();
        let mut r = CheckReport::new();
        fd_checks(&e, &[0.2, 0.3], 3, &mut r).unwrap();
        assert!(r.passed());
        // Shifted function: same jet shape, wrong values.
        let f = |x: &[f64]| Ok(x[0].sin() * x[1] + x[0] * x[0] * x[1]);
        let alpha = MultiIndex::new(vec![2u8, 1]);
        let jet = e.eval_jet(&[0.2, 0.3], 3).unwrap();
        let fd = richardson_partial(&f, &[0.2, 0.3], &alpha, FD_STEP, FD_LEVELS).unwrap();
        assert!(relative_error(fd, jet.raw_partial(&alpha).unwrap()) > FD_TOLERANCE);
    }

    #[test]
    fn small_corpus_passes() {
        let corpus = fuzz_corpus(5, 2, 2, 1);
        let r = fd_oracle_report(&corpus, 2, 2, 3, 0).unwrap();
        assert!(r.passed(), "{}", r.render_text(true));
    }
}
