//! Quadrature of the integral identity
//!
//! ```text
//! ½ ∫ |C|² ψ(f) dV = −∫ C_kti,it f_k ψ(f) dV
//! ```
//!
//! on the cigar times a circle, where `ψ(f) = e^f φ(−f)` and `φ` is a
//! polynomial cutoff equal to 1 on `[0, s]` and 0 on `[2s, ∞)`. The circle
//! factor integrates exactly (nothing depends on `x1`), leaving a
//! tensor-product Gauss–Legendre rule on the `(x2, x3)` box that contains
//! the support `1 + x2² + x3² ≤ e^{2s}`.

use thiserror::Error;

use crate::report::CheckReport;
use crate::soliton::SolitonBundle;
use crate::tensor::{ChartBox, MetricSpec, TensorError};

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("cutoff threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("grid size must be a positive even number, got {0}")]
    BadGrid(usize),
    #[error("cutoff support escapes the quadrature box: psi = {psi:e} at {point:?}")]
    SupportEscapes { point: Vec<f64>, psi: f64 },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// `φ(t) = 1 − P((t − s)/s)` on `[s, 2s]` with
/// `P(u) = 35u⁴ − 84u⁵ + 70u⁶ − 20u⁷`, the degree-7 polynomial with
/// `P(0) = 0`, `P(1) = 1` and first three derivatives zero at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub s: f64,
}

pub const BUMP: [f64; 8] = [0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0];

pub fn make_cutoff(s: f64) -> Result<CutoffSpec, QuadError> {
    if s > 0.0 && s.is_finite() {
        Ok(CutoffSpec { s })
    } else {
        Err(QuadError::BadThreshold(s))
    }
}

/// `k`-th derivative of the bump polynomial at `u`.
fn poly_derivative(u: f64, k: usize) -> f64 {
    (k..BUMP.len())
        .map(|i| {
            let falling: f64 = (0..k).map(|j| (i - j) as f64).product();
            BUMP[i] * falling * u.powi((i - k) as i32)
        })
        .sum()
}

impl CutoffSpec {
    /// `k`-th derivative of `φ` at `t` (`k ≤ 3` is continuous).
    pub fn derivative(&self, t: f64, k: usize) -> f64 {
        let s = self.s;
        if t <= s {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        if t >= 2.0 * s {
            return 0.0;
        }
        let u = (t - s) / s;
        let d = poly_derivative(u, k) / s.powi(k as i32);
        if k == 0 {
            1.0 - d
        } else {
            -d
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    /// `ψ(f) = e^f φ(−f)`.
    pub fn psi(&self, f: f64) -> f64 {
        let p = self.phi(-f);
        if p == 0.0 {
            0.0
        } else {
            f.exp() * p
        }
    }

    /// Largest jump of `φ, φ', φ'', φ'''` across `s` and `2s`, comparing
    /// the polynomial piece at the knots with the constant pieces.
    pub fn continuity_defect(&self) -> f64 {
        let s = self.s;
        let mut worst = 0.0f64;
        for k in 0..=3 {
            let inner_left = poly_derivative(0.0, k) / s.powi(k as i32);
            let inner_right = poly_derivative(1.0, k) / s.powi(k as i32);
            let (left_const, right_const) = if k == 0 { (1.0, 0.0) } else { (0.0, 0.0) };
            let (at_s, at_2s) = if k == 0 {
                (1.0 - inner_left, 1.0 - inner_right)
            } else {
                (-inner_left, -inner_right)
            };
            worst = worst.max((at_s - left_const).abs()).max((at_2s - right_const).abs());
        }
        worst
    }

    /// Largest `φ'` over `samples` evenly spaced points of `[s, 2s]`.
    pub fn max_slope(&self, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| self.derivative(self.s * (1.0 + i as f64 / samples as f64), 1))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// The geometry being integrated: a 3-dimensional spec whose data do not
/// depend on `x1`, which is periodic with `period`, integrated over
/// `|x2|, |x3| ≤ half_width`.
#[derive(Debug, Clone)]
pub struct IntegralSetup {
    pub spec: MetricSpec,
    pub period: f64,
    pub half_width: f64,
    /// Integrand invariant under `(x2, x3) ↦ (±x2, ±x3)` and the swap.
    pub dihedral: bool,
}

/// Cigar × circle with the box fitted to the support of `ψ(f)` for threshold `s`.
pub fn cigar_circle_setup(period: f64, s: f64) -> Result<IntegralSetup, QuadError> {
    let entry = crate::zoo::cigar_cross_circle(period)
        .map_err(|e| TensorError::InvalidSpec(e.to_string()))?;
    let cutoff = make_cutoff(s)?;
    // A hair wider than the support circle so the boundary test is robust to rounding.
    let half_width = ((2.0 * cutoff.s).exp() - 1.0).sqrt() * (1.0 + 1e-9);
    // The cigar metric is global; widen the chart box to the quadrature box.
    let mut spec = entry.spec().unwrap().clone();
    spec.domain = Some(ChartBox::new(vec![0.0, -half_width, -half_width], vec![period, half_width, half_width])?);
    Ok(IntegralSetup {
        spec,
        period,
        half_width,
        dihedral: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub grid: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// Nodes where the pipeline actually ran (inside the support, after symmetry).
    pub evaluations: usize,
}

fn integrands(spec: &MetricSpec, cutoff: &CutoffSpec, x2: f64, x3: f64) -> Result<(f64, f64), QuadError> {
    let p = [0.0, x2, x3];
    let f = spec.potential.eval(&p).map_err(TensorError::from)?;
    let psi = cutoff.psi(f);
    if psi == 0.0 {
        return Ok((0.0, 0.0));
    }
    let b = SolitonBundle::from_spec(spec, &p, crate::soliton::FULL_SOLITON_ORDER)?;
    let (l, r) = b.pointwise_3d_sides()?;
    let g = b.curvature().geometry().g_at(0)?;
    let det = det3(&g.values());
    let vol = det.sqrt() * psi;
    Ok((l * vol, r * vol))
}

fn det3(m: &[f64]) -> f64 {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
}

/// Checks that `ψ(f)` vanishes on the boundary of the quadrature box.
pub fn check_support(setup: &IntegralSetup, cutoff: &CutoffSpec, samples: usize) -> Result<(), QuadError> {
    let w = setup.half_width;
    for i in 0..=samples {
        let t = -w + 2.0 * w * i as f64 / samples as f64;
        for (a, b) in [(t, w), (t, -w), (w, t), (-w, t)] {
            let p = [0.0, a, b];
            let f = setup.spec.potential.eval(&p).map_err(TensorError::from)?;
            let psi = cutoff.psi(f);
            if psi != 0.0 {
                return Err(QuadError::SupportEscapes { point: p.to_vec(), psi });
            }
        }
    }
    Ok(())
}

/// Largest `|ψ(f)|` over `count` deterministic points just outside the
/// quadrature box's inscribed disk, out to three times its radius.
pub fn exterior_psi_max(setup: &IntegralSetup, cutoff: &CutoffSpec, count: usize) -> Result<f64, QuadError> {
    let mut worst = 0.0f64;
    for k in 0..count {
        let t = (k as f64 + 0.5) / count as f64;
        let r = setup.half_width * (1.0 + 2.0 * t);
        let a = 2.399963229728653 * k as f64; // golden angle
        let p = [0.0, r * a.cos(), r * a.sin()];
        let f = setup.spec.potential.eval(&p).map_err(TensorError::from)?;
        worst = worst.max(cutoff.psi(f).abs());
    }
    Ok(worst)
}

/// Both sides of the identity on an `n × n` Gauss–Legendre grid.
pub fn integral_formula_check(setup: &IntegralSetup, cutoff: &CutoffSpec, n: usize) -> Result<IntegralResult, QuadError> {
    if n == 0 || (setup.dihedral && n % 2 == 1) {
        return Err(QuadError::BadGrid(n));
    }
    check_support(setup, cutoff, 4 * n)?;
    let (x, w) = gauss_legendre(n);
    let hw = setup.half_width;
    // (i, j, multiplicity) in node order.
    let mut jobs = Vec::new();
    if setup.dihedral {
        let half = n / 2;
        for i in half..n {
            for j in half..=i {
                jobs.push((i, j, if i == j { 4.0 } else { 8.0 }));
            }
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                jobs.push((i, j, 1.0));
            }
        }
    }
    use rayon::prelude::*;
    let parts: Vec<Result<(f64, f64, bool), QuadError>> = jobs
        .par_iter()
        .map(|&(i, j, mult)| {
            let (a, b) = (hw * x[i], hw * x[j]);
            let f = setup.spec.potential.eval(&[0.0, a, b]).map_err(TensorError::from)?;
            if cutoff.psi(f) == 0.0 {
                return Ok((0.0, 0.0, false));
            }
            let (l, r) = integrands(&setup.spec, cutoff, a, b)?;
            let ww = mult * w[i] * w[j] * hw * hw;
            Ok((l * ww, r * ww, true))
        })
        .collect();
    let (mut lhs, mut rhs, mut evals) = (0.0, 0.0, 0);
    for part in parts {
        let (l, r, e) = part?;
        lhs += l;
        rhs += r;
        evals += e as usize;
    }
    lhs *= setup.period;
    rhs *= setup.period;
    Ok(IntegralResult {
        grid: n,
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        evaluations: evals,
    })
}

/// Tolerance on `|lhs − rhs| / lhs` at the finest grid.
pub const RELATIVE_GAP_TOLERANCE: f64 = 1e-5;

/// Runs the grids in order and records positivity, the relative gap at the
/// finest grid, the refinement error estimates `|lhs_k − lhs_{k−1}|`, and
/// whether they decrease.
pub fn integral_report(
    setup: &IntegralSetup,
    cutoff: &CutoffSpec,
    grids: &[usize],
) -> Result<(CheckReport, Vec<IntegralResult>), QuadError> {
    let mut report = CheckReport::new();
    let p = [cutoff.s];
    report.compare(
        "quad.cutoff.continuity",
        &p,
        &[cutoff.continuity_defect()],
        &[0.0],
        1e-10,
        "phi and its first three derivatives continuous at s and 2s",
    );
    let slope = cutoff.max_slope(1000);
    report.bound("quad.cutoff.monotone", &p, slope, 0.0, slope.max(0.0), 0.0, "phi' <= 0 on [s, 2s]");

    let ext = exterior_psi_max(setup, cutoff, 100)?;
    report.bound(
        "quad.support_exterior",
        &p,
        ext,
        0.0,
        ext,
        0.0,
        "psi(f) = 0 at 100 points outside the support disk",
    );

    let results = grids
        .iter()
        .map(|&n| integral_formula_check(setup, cutoff, n))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &results {
        report.info(
            "quad.integral",
            &[r.grid as f64],
            r.lhs,
            r.rhs,
            format!("grid {0}x{0}, {1} pipeline evaluations", r.grid, r.evaluations),
        );
    }
    if let Some(fine) = results.last() {
        let g = [fine.grid as f64];
        report.exceeds("quad.lhs_positive", &g, fine.lhs, 0.0, "|C|^2 psi integral is positive");
        let rel = fine.gap / fine.lhs.abs();
        report.bound(
            "quad.relative_gap",
            &g,
            fine.lhs,
            fine.rhs,
            rel,
            RELATIVE_GAP_TOLERANCE,
            "|lhs - rhs| / lhs at the finest grid",
        );
    }
    let estimates: Vec<(usize, f64)> = results
        .windows(2)
        .map(|w| (w[1].grid, (w[1].lhs - w[0].lhs).abs()))
        .collect();
    for &(grid, e) in &estimates {
        report.info(
            "quad.error_estimate",
            &[grid as f64],
            e,
            e,
            "|lhs(grid) - lhs(previous grid)|",
        );
    }
    if let [.., prev, fine] = results.as_slice() {
        let rel = ((fine.lhs - prev.lhs).abs() / fine.lhs.abs()).max((fine.rhs - prev.rhs).abs() / fine.rhs.abs());
        report.bound(
            "quad.refinement_stability",
            &[fine.grid as f64],
            fine.lhs,
            prev.lhs,
            rel,
            RELATIVE_GAP_TOLERANCE,
            "each side changes by a relative amount below tolerance on the last refinement",
        );
    }
    for w in estimates.windows(2) {
        let ratio = w[1].1 / w[0].1;
        report.bound(
            "quad.refinement_decreases",
            &[w[1].0 as f64],
            w[1].1,
            w[0].1,
            ratio,
            1.0,
            "error estimate shrinks under refinement (ratio < 1)",
        );
    }
    Ok((report, results))
}
