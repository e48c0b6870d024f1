//! Seeded generators for random expressions and random metrics.
//!
//! Generated text is always well-defined on the box `[-0.5, 0.5]^n`:
//! arguments of `log` and `sqrt` are bounded away from zero, and metric
//! perturbations are small enough that the metric stays diagonally
//! dominant there.

use rand::Rng;

use crate::tensor::MetricSpec;

/// Box on which fuzzed expressions and metrics are guaranteed valid.
pub const FUZZ_HALF_WIDTH: f64 = 0.5;

fn coeff<R: Rng>(rng: &mut R, max: f64) -> String {
    let v: f64 = rng.gen_range(-max..max);
    format!("{:.3}", v)
}

fn coord<R: Rng>(rng: &mut R, dim: usize) -> String {
    format!("x{}", rng.gen_range(1..=dim))
}

/// A random expression of bounded depth in `x1..x{dim}`.
pub fn random_expr<R: Rng>(rng: &mut R, dim: usize, depth: usize) -> String {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => coeff(rng, 2.0),
            _ => coord(rng, dim),
        };
    }
    let a = random_expr(rng, dim, depth - 1);
    match rng.gen_range(0..12) {
        0 => format!("({a}) + ({})", random_expr(rng, dim, depth - 1)),
        1 => format!("({a}) - ({})", random_expr(rng, dim, depth - 1)),
        2 | 3 => format!("({a}) * ({})", random_expr(rng, dim, depth - 1)),
        4 => format!("({a}) / (1.5 + sin({}))", random_expr(rng, dim, depth - 1)),
        5 => format!("exp(0.5*({a}))"),
        6 => format!("log(1 + ({a})^2)"),
        7 => format!("sin({a})"),
        8 => format!("cos({a})"),
        9 => format!("sqrt(2 + tanh({a}))"),
        10 => format!("atan({a}) + cosh(0.3*({a})) - sinh(0.2*({a}))"),
        _ => format!("({a})^{}", rng.gen_range(2..4)),
    }
}

/// A bounded smooth term in the fuzz box: polynomial or trigonometric.
fn small_term<R: Rng>(rng: &mut R, dim: usize) -> String {
    let c = coeff(rng, 0.25);
    let a = coord(rng, dim);
    let b = coord(rng, dim);
    let w: f64 = rng.gen_range(0.5..2.0);
    let p: f64 = rng.gen_range(-1.0..1.0);
    match rng.gen_range(0..5) {
        0 => format!("{c}*{a}*{b}"),
        1 => format!("{c}*sin({w:.3}*{a} + {p:.3})"),
        2 => format!("{c}*cos({w:.3}*{a} + {p:.3}*{b})"),
        3 => format!("{c}*{a}^2*{b}"),
        _ => format!("{c}*exp({p:.3}*{a})*{b}"),
    }
}

fn entry<R: Rng>(rng: &mut R, dim: usize, terms: usize) -> String {
    (0..terms)
        .map(|_| small_term(rng, dim))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Metric-file text for a generic `dim`-dimensional metric of the form
/// `δ + h(x)` with `|h_ij| < 0.5/dim` on the fuzz box (Gershgorin keeps it
/// positive definite there).
pub fn random_metric_text<R: Rng>(rng: &mut R, dim: usize) -> String {
    // |term| ≤ 0.25 on the box, two terms per entry.
    let scale = 1.0 / dim as f64;
    let mut s = format!("dim = {dim}\nmetric\n");
    for i in 1..=dim {
        for j in i..=dim {
            let h = entry(rng, dim, 2);
            if i == j {
                s.push_str(&format!("g[{i}][{j}] = 1 + {scale:.4}*({h})\n"));
            } else {
                s.push_str(&format!("g[{i}][{j}] = {scale:.4}*({h})\n"));
            }
        }
    }
    s.push_str(&format!("potential = {}\n", entry(rng, dim, 2)));
    s.push_str("lambda = 0\n");
    let lo = vec![format!("{}", -FUZZ_HALF_WIDTH); dim].join(", ");
    let hi = vec![format!("{}", FUZZ_HALF_WIDTH); dim].join(", ");
    s.push_str(&format!("domain = box({lo}, {hi})\n"));
    s
}

/// Parsed form of [`random_metric_text`].
pub fn random_metric<R: Rng>(rng: &mut R, dim: usize) -> MetricSpec {
    let text = random_metric_text(rng, dim);
    crate::metricfile::parse_metric_file(&text)
        .expect("fuzzer emits valid metric files")
}
