//! Numerical profile of the rotationally symmetric steady soliton in
//! dimension 3.
//!
//! The metric is `dr² + φ(r)² g_{S²}` with potential `f(r)`. With
//! `A = Ric(∂r, ∂r)` and `B = Ric(e, e)` for a unit vector `e` tangent to
//! the spheres,
//!
//! ```text
//! A = −2φ''/φ,   B = −φ''/φ − (φ'² − 1)/φ²,
//! Hess f(∂r, ∂r) = f'',   Hess f(e, e) = (φ'/φ) f',
//! C(e, e, ∂r) = ½B' − ¼A' − (φ'/φ)(A − B),
//! ```
//!
//! and the steady equation `Ric + Hess f = 0` becomes
//!
//! ```text
//! φ'' = φ' f' − (φ'² − 1)/φ,    f'' = 2φ''/φ.
//! ```
//!
//! Regularity at the tip forces `φ = r + a₃r³ + a₅r⁵ + …`, `f' = b₁r + b₃r³ + …`
//! with `b₁ = 12a₃`; the scale is fixed by `R(0) = 36a₃ = 1`.
//!
//! The profile is checked on two independent paths:
//! 1. the closed-form warped-product expressions above, with derivatives of
//!    the stored samples taken by 8th-order central differences;
//! 2. Taylor series at a grid radius (Picard iteration of the ODE on
//!    univariate jets) composed into the Cartesian metric
//!    `g_ij = (φ²/r²) δ_ij + (1 − φ²/r²) x_i x_j / r²`, fed through the
//!    generic jet pipeline.

use thiserror::Error;

use crate::jet::{Jet, JetError};
use crate::report::{CheckReport, Tolerances};
use crate::soliton::{soliton_checks, SolitonBundle};
use crate::tensor::{metric_from_rows, Geometry, TensorError};

#[derive(Debug, Error)]
pub enum BryantError {
    #[error("invalid profile parameters: {0}")]
    InvalidParams(String),
    #[error("step size underflow at r = {r}")]
    StepUnderflow { r: f64 },
    #[error("shooting failure at r = {r}: {reason}")]
    ShootingFailure { r: f64, reason: String },
}

const A3: f64 = -1.0 / 36.0;
const A5: f64 = 87.0 / 50.0 * A3 * A3;
const B1: f64 = 12.0 * A3;
const B3: f64 = (40.0 * A5 - 12.0 * A3 * A3) / 3.0;

/// Extra nodes stored past `r_max` so that every reported node has a full
/// difference stencil, two levels deep.
const PAD: usize = 8;

/// State `(φ, φ', f', f)`.
type State = [f64; 4];

fn rhs(y: &State) -> State {
    let (phi, dphi, df) = (y[0], y[1], y[2]);
    let dd = dphi * df - (dphi * dphi - 1.0) / phi;
    [dphi, dd, 2.0 * dd / phi, df]
}

fn series(r: f64) -> State {
    let r2 = r * r;
    [
        r * (1.0 + r2 * (A3 + r2 * A5)),
        1.0 + r2 * (3.0 * A3 + 5.0 * A5 * r2),
        r * (B1 + B3 * r2),
        r2 * (B1 / 2.0 + B3 * r2 / 4.0),
    ]
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dp_step(y: &State, h: f64) -> (State, f64) {
    let mut k = [[0.0; 4]; 7];
    k[0] = rhs(y);
    for s in 1..7 {
        let mut ys = *y;
        for (i, v) in ys.iter_mut().enumerate() {
            for (j, kj) in k.iter().enumerate().take(s) {
                *v += h * A[s][j] * kj[i];
            }
        }
        k[s] = rhs(&ys);
    }
    let mut y5 = *y;
    let mut err = [0.0; 4];
    for i in 0..4 {
        for s in 0..7 {
            y5[i] += h * B5[s] * k[s][i];
            err[i] += h * (B5[s] - B4[s]) * k[s][i];
        }
    }
    (y5, err.iter().fold(0.0f64, |m, e| m.max(e.abs())))
}

/// Integrates from `r0` to `r1` with adaptive steps; `tol` bounds the local
/// error per step relative to `1 + |y|`.
fn integrate(mut y: State, r0: f64, r1: f64, h0: f64, tol: f64) -> Result<(State, f64), BryantError> {
    let mut r = r0;
    let mut h = h0.min(r1 - r0);
    while r < r1 {
        let last = r + h >= r1;
        let step = if last { r1 - r } else { h };
        let (y5, err) = dp_step(&y, step);
        let scale = 1.0 + y5.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ratio = err / (tol * scale);
        if !ratio.is_finite() || y5.iter().any(|v| !v.is_finite()) {
            h = step / 4.0;
        } else if ratio <= 1.0 {
            y = y5;
            r = if last { r1 } else { r + step };
            if y[0] <= 0.0 {
                return Err(BryantError::ShootingFailure {
                    r,
                    reason: format!("warping function reached {}", y[0]),
                });
            }
            let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                h = step * grow;
            } else {
                h = h.max(step * grow);
            }
        } else {
            h = step * (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h < 1e-14 * (1.0 + r) {
            return Err(BryantError::StepUnderflow { r });
        }
    }
    Ok((y, h))
}

/// Samples of `(φ, φ', f', f)` on the uniform grid `r_m = m·step`,
/// `m = 0..=nodes()+PAD`.
#[derive(Debug, Clone)]
pub struct BryantProfile {
    pub step: f64,
    pub r_max: f64,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub df: Vec<f64>,
    pub f: Vec<f64>,
}

/// Integrates the profile out to `r_max` on a grid of spacing `step`.
/// `shoot_tol` is the integrator's local error tolerance.
pub fn solve(r_max: f64, step: f64, shoot_tol: f64) -> Result<BryantProfile, BryantError> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(BryantError::InvalidParams(format!("r_max must be positive, got {r_max}")));
    }
    if !(step > 0.0 && step <= r_max / 4.0) {
        return Err(BryantError::InvalidParams(format!(
            "step must be positive and at most r_max/4, got {step}"
        )));
    }
    if !(shoot_tol > 0.0 && shoot_tol < 1e-3) {
        return Err(BryantError::InvalidParams(format!("shoot_tol must lie in (0, 1e-3), got {shoot_tol}")));
    }
    let m = (r_max / step).round() as usize;
    let total = m + PAD;
    let mut out = BryantProfile {
        step,
        r_max: m as f64 * step,
        phi: vec![0.0],
        dphi: vec![1.0],
        df: vec![0.0],
        f: vec![0.0],
    };
    // Leave the singular tip on the series; truncation there is O(r⁷).
    let r0 = (step * 1e-2).min(1e-3);
    let mut y = series(r0);
    let mut r = r0;
    let mut h = r0;
    for k in 1..=total {
        let target = k as f64 * step;
        let (y1, h1) = integrate(y, r, target, h, shoot_tol)?;
        y = y1;
        h = h1;
        r = target;
        out.phi.push(y[0]);
        out.dphi.push(y[1]);
        out.df.push(y[2]);
        out.f.push(y[3]);
    }
    Ok(out)
}

const FD8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

fn fd_derivative(values: impl Fn(isize) -> f64, m: isize, h: f64) -> f64 {
    let mut s = 0.0;
    for (k, c) in FD8.iter().enumerate() {
        let k = k as isize + 1;
        s += c * (values(m + k) - values(m - k));
    }
    s / h
}

fn odd(v: &[f64], m: isize) -> f64 {
    if m < 0 {
        -v[(-m) as usize]
    } else {
        v[m as usize]
    }
}

fn even(v: &[f64], m: isize) -> f64 {
    v[m.unsigned_abs()]
}

/// Closed-form warped-product quantities at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileNode {
    pub r: f64,
    pub ric_radial: f64,
    pub ric_tangential: f64,
    pub hess_radial: f64,
    pub hess_tangential: f64,
    pub cotton: f64,
    pub scalar: f64,
    pub grad_f_sq: f64,
}

/// `A`, `B` for a warped product given `φ, φ', φ''` (φ ≠ 0).
pub fn warped_ricci(phi: f64, dphi: f64, ddphi: f64) -> (f64, f64) {
    (-2.0 * ddphi / phi, -ddphi / phi - (dphi * dphi - 1.0) / (phi * phi))
}

/// `C(e, e, ∂r)` from `A, B`, their radial derivatives, and `φ'/φ`.
pub fn warped_cotton(a: f64, b: f64, da: f64, db: f64, log_dphi: f64) -> f64 {
    0.5 * db - 0.25 * da - log_dphi * (a - b)
}

impl BryantProfile {
    /// Index of the last reported node (`r_m ≤ r_max`).
    pub fn nodes(&self) -> usize {
        self.phi.len() - 1 - PAD
    }

    pub fn radius(&self, m: usize) -> f64 {
        m as f64 * self.step
    }

    fn ab(&self, m: isize) -> (f64, f64) {
        if m == 0 {
            // R(0) = 1 split evenly: A(0) = B(0) = 12a₃ · (−1) = 1/3.
            return (-12.0 * A3, -12.0 * A3);
        }
        let i = m.unsigned_abs();
        let ddphi = fd_derivative(|k| even(&self.dphi, k), i as isize, self.step);
        warped_ricci(self.phi[i], self.dphi[i], ddphi)
    }

    /// Warped-product quantities at node `m` (`1 ≤ m ≤ nodes()`).
    pub fn node(&self, m: usize) -> ProfileNode {
        let h = self.step;
        let mi = m as isize;
        let ddphi = fd_derivative(|k| even(&self.dphi, k), mi, h);
        let ddf = fd_derivative(|k| odd(&self.df, k), mi, h);
        let (phi, dphi, df) = (self.phi[m], self.dphi[m], self.df[m]);
        let (a, b) = warped_ricci(phi, dphi, ddphi);
        let da = fd_derivative(|k| self.ab(k).0, mi, h);
        let db = fd_derivative(|k| self.ab(k).1, mi, h);
        ProfileNode {
            r: self.radius(m),
            ric_radial: a,
            ric_tangential: b,
            hess_radial: ddf,
            hess_tangential: dphi / phi * df,
            cotton: warped_cotton(a, b, da, db, dphi / phi),
            scalar: a + 2.0 * b,
            grad_f_sq: df * df,
        }
    }

    /// `φ(r)/r` extrapolated to `r = 0` from the first two nodes.
    pub fn tip_ratio(&self) -> f64 {
        let q1 = self.phi[1] / self.step;
        let q2 = self.phi[2] / (2.0 * self.step);
        (4.0 * q1 - q2) / 3.0
    }

    /// Taylor coefficients of `φ` and `f` about node `m`, to `order`,
    /// obtained by Picard iteration of the ODE on univariate jets.
    pub fn taylor_at(&self, m: usize, order: usize) -> Result<(Vec<f64>, Vec<f64>), JetError> {
        if m == 0 {
            return Err(JetError::Pole);
        }
        let init = [self.phi[m], self.dphi[m], self.df[m], self.f[m]];
        let integrate = |j: &Jet, c0: f64| -> Result<Jet, JetError> {
            let mut c = vec![0.0; order + 1];
            c[0] = c0;
            for k in 0..order {
                c[k + 1] = j.coeffs()[k] / (k + 1) as f64;
            }
            Jet::from_coeffs(1, order, c)
        };
        let mut y: Vec<Jet> = init
            .iter()
            .map(|&v| Jet::constant(v, 1, order))
            .collect::<Result<_, _>>()?;
        let one = Jet::constant(1.0, 1, order)?;
        for _ in 0..=order {
            let (phi, dphi, df) = (&y[0], &y[1], &y[2]);
            let num = &(dphi * dphi) - &one;
            let dd = &(dphi * df) - &num.checked_div(phi)?;
            let ddf = dd.checked_div(phi)?.scale(2.0);
            y = vec![
                integrate(dphi, init[0])?,
                integrate(&dd, init[1])?,
                integrate(&ddf, init[2])?,
                integrate(df, init[3])?,
            ];
        }
        Ok((y[0].coeffs().to_vec(), y[3].coeffs().to_vec()))
    }

    /// The profile at node `m` as a Cartesian soliton bundle at
    /// `r_m · direction` (`direction` is normalized).
    pub fn cartesian_bundle(&self, m: usize, direction: [f64; 3], order: usize) -> Result<SolitonBundle, TensorError> {
        let (phi_s, f_s) = self.taylor_at(m, order)?;
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r0 = self.radius(m);
        let point: Vec<f64> = direction.iter().map(|v| v / norm * r0).collect();
        let (rows, rho) = warped_cartesian_rows(&phi_s, &point, order)?;
        let geo = Geometry::new(point.clone(), rows.0, rows.1)?;
        Ok(SolitonBundle::new(geo, rho.compose_series(&f_s), 0.0))
    }
}

type MetricPair = (crate::tensor::JetTensor, crate::tensor::JetTensor);

/// Cartesian metric jets of `dr² + φ(r)² g_{S²}` at `point`, where
/// `phi_series` holds the Taylor coefficients of `φ` about `|point|`.
/// Also returns the jet of `r = |x|`.
pub fn warped_cartesian_rows(phi_series: &[f64], point: &[f64], order: usize) -> Result<(MetricPair, Jet), TensorError> {
    let x: Vec<Jet> = (0..3)
        .map(|i| Jet::variable(i, point[i], 3, order))
        .collect::<Result<_, _>>()?;
    let mut rho2 = Jet::zero(3, order)?;
    for xi in &x {
        xi.mul_acc_into(xi, 1.0, &mut rho2);
    }
    let rho = rho2.sqrt()?;
    let phi = rho.compose_series(phi_series);
    let inv_r2 = rho2.recip()?;
    let q = &(&phi * &phi) * &inv_r2; // φ²/r²
    let one_minus = q.scale(-1.0).add_const(1.0);
    let rad = &one_minus * &inv_r2;
    let rows: Vec<Vec<Jet>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| {
                    let mut v = &rad * &(&x[i] * &x[j]);
                    if i == j {
                        v.add_scaled(&q, 1.0);
                    }
                    v
                })
                .collect()
        })
        .collect();
    Ok((metric_from_rows(rows, point)?, rho))
}

/// Radii (as fractions of `r_max`) where the Taylor path is exercised.
const TAYLOR_FRACTIONS: [f64; 4] = [0.05, 0.25, 0.6, 1.0];
const TAYLOR_DIRECTION: [f64; 3] = [0.48, 0.6, 0.64];

/// Tolerance for the finite-difference path; the default table applies to
/// the Taylor path.
pub const PROFILE_TOLERANCE: f64 = 1e-6;

/// Profile checks along the grid, the tip limit, and the Taylor-path
/// soliton suite at a few radii.
pub fn profile_report(profile: &BryantProfile, tol: &Tolerances) -> Result<CheckReport, TensorError> {
    let mut report = CheckReport::new();
    let t = tol.override_all.unwrap_or(PROFILE_TOLERANCE);
    for m in 1..=profile.nodes() {
        let nd = profile.node(m);
        let p = [nd.r];
        report.compare(
            "bryant.soliton",
            &p,
            &[nd.ric_radial, nd.ric_tangential],
            &[-nd.hess_radial, -nd.hess_tangential],
            t,
            "Ric + Hess f = 0 (radial, tangential)",
        );
        report.compare("bryant.cotton", &p, &[nd.cotton], &[0.0], t, "C(e, e, dr) = 0");
        report.compare(
            "bryant.hamilton",
            &p,
            &[nd.scalar + nd.grad_f_sq],
            &[1.0],
            t,
            "R + |grad f|^2 = R(0)",
        );
    }
    report.compare("bryant.tip_ratio", &[0.0], &[profile.tip_ratio()], &[1.0], t, "phi(r)/r -> 1 as r -> 0");
    let r1 = profile.node(1).scalar;
    let r2 = profile.node(2).scalar;
    report.compare(
        "bryant.scalar_at_tip",
        &[0.0],
        &[(4.0 * r1 - r2) / 3.0],
        &[1.0],
        t,
        "R(0) = 1 (extrapolated)",
    );

    let taylor_order = crate::soliton::FULL_SOLITON_ORDER;
    for frac in TAYLOR_FRACTIONS {
        let m = ((profile.nodes() as f64 * frac).round() as usize).clamp(1, profile.nodes());
        let b = profile.cartesian_bundle(m, TAYLOR_DIRECTION, taylor_order)?;
        let mut sub = CheckReport::new();
        soliton_checks(&b, tol, &mut sub)?;
        let c = b.curvature().cotton()?;
        let p = b.curvature().point().to_vec();
        let cmax = c.max_abs_value();
        report.compare("bryant.taylor.cotton_zero", &p, &c.values(), &vec![0.0; c.comps().len()], t, format!("|C| = {cmax:.3e}"));
        for mut rec in sub.records {
            rec.check_id = format!("bryant.taylor.{}", rec.check_id);
            report.records.push(rec);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_satisfies_ode_to_high_order() {
        // The truncated series leaves an ODE defect of order r⁵ (φ'') and
        // r⁴ (f'').
        for r in [1e-2, 2e-2] {
            let y = series(r);
            let d = rhs(&y);
            let r2 = r * r;
            let ddphi_series = r * (6.0 * A3 + 20.0 * A5 * r2);
            let ddf_series = B1 + 3.0 * B3 * r2;
            assert!((d[1] - ddphi_series).abs() < 1e-2 * r.powi(5));
            assert!((d[2] - ddf_series).abs() < 1e-2 * r.powi(4));
        }
    }

    #[test]
    fn cylinder_through_warped_formulas() {
        // φ ≡ √2, f = r²/4: A = 0, B = ½, Hess f = (½, 0) since φ' = 0,
        // so Ric + Hess f = ½ g and C = 0.
        let (a, b) = warped_ricci(2f64.sqrt(), 0.0, 0.0);
        assert_eq!(a, 0.0);
        assert!((b - 0.5).abs() < 1e-15);
        assert!((a + 0.5 - 0.5).abs() < 1e-15 && (b + 0.0 - 0.5).abs() < 1e-15);
        assert_eq!(warped_cotton(a, b, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn warped_formulas_match_jet_pipeline() {
        // φ = sin(r) + 0.1 r³ is not a soliton but exercises every term.
        let r0 = 0.8f64;
        let phi = |r: f64| r.sin() + 0.1 * r.powi(3);
        let d1 = |r: f64| r.cos() + 0.3 * r * r;
        let d2 = |r: f64| -r.sin() + 0.6 * r;
        let d3 = |r: f64| -r.cos() + 0.6;
        let d4 = |r: f64| r.sin();
        let order = 4;
        let mut series = vec![phi(r0), d1(r0), d2(r0) / 2.0, d3(r0) / 6.0, d4(r0) / 24.0];
        series.truncate(order + 1);
        let dir = [0.48, 0.6, 0.64];
        let point: Vec<f64> = dir.iter().map(|v| v * r0).collect();
        let ((g, gi), _) = warped_cartesian_rows(&series, &point, order).unwrap();
        let geo = Geometry::new(point.clone(), g, gi).unwrap();
        let b = crate::curvature::CurvatureBundle::new(geo);
        let ric = b.ricci().unwrap();
        let c = b.cotton().unwrap();
        let er: Vec<f64> = dir.to_vec();
        // Tangential vectors have length φ/r times their Euclidean length.
        let t0 = [0.8, 0.0, -0.6];
        let s = r0 / phi(r0);
        let et: Vec<f64> = t0.iter().map(|v| v * s).collect();
        let q2 = |a: &[f64], bb: &[f64]| {
            let mut v = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    v += ric.value(&[i, j]) * a[i] * bb[j];
                }
            }
            v
        };
        let (a_want, b_want) = warped_ricci(phi(r0), d1(r0), d2(r0));
        assert!((q2(&er, &er) - a_want).abs() < 1e-11, "{} {}", q2(&er, &er), a_want);
        assert!((q2(&et, &et) - b_want).abs() < 1e-11);
        // Cotton C(e_t, e_t, e_r).
        let mut cv = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    cv += c.value(&[i, j, k]) * et[i] * et[j] * er[k];
                }
            }
        }
        let da = {
            let (p, p1, p2, p3) = (phi(r0), d1(r0), d2(r0), d3(r0));
            -2.0 * (p3 * p - p2 * p1) / (p * p)
        };
        let db = {
            let (p, p1, p2, p3) = (phi(r0), d1(r0), d2(r0), d3(r0));
            -(p3 * p - p2 * p1) / (p * p) - (2.0 * p1 * p2 * p * p - (p1 * p1 - 1.0) * 2.0 * p * p1) / p.powi(4)
        };
        let want = warped_cotton(a_want, b_want, da, db, d1(r0) / phi(r0));
        assert!((cv - want).abs() < 1e-10, "{cv} vs {want}");
    }

    #[test]
    fn short_profile_passes() {
        let p = solve(2.0, 0.05, 1e-12).unwrap();
        // Two-node extrapolation leaves −4a₅h⁴ ≈ −3.4e-8.
        assert!((p.tip_ratio() - 1.0).abs() < 1e-7);
        let r = profile_report(&p, &Tolerances::default()).unwrap();
        assert!(r.passed(), "{}", r.failures().map(|x| format!("{} {:?} {:e}\n", x.check_id, x.point, x.residual)).collect::<String>());
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(solve(-1.0, 0.1, 1e-10), Err(BryantError::InvalidParams(_))));
        assert!(matches!(solve(1.0, 0.0, 1e-10), Err(BryantError::InvalidParams(_))));
        assert!(matches!(solve(1.0, 0.1, 1.0), Err(BryantError::InvalidParams(_))));
    }
}
