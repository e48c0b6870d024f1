//! Gradient Ricci soliton identities.
//!
//! A [`SolitonBundle`] adds the potential `f`, its gradient and Hessian,
//! and the three-tensor
//!
//! ```text
//! D_ijk = (f_k R_ij − f_j R_ik)/(n−2)
//!       + f_t (R_tk g_ij − R_tj g_ik)/((n−1)(n−2))
//!       − R (f_k g_ij − f_j g_ik)/((n−1)(n−2))
//! ```
//!
//! to a [`CurvatureBundle`]. Inputs need not be solitons: everything is
//! computed the same way and the residual checks simply fail, which is how
//! the negative controls run.

use std::cell::OnceCell;

use crate::curvature::{contract_leading_pair, CurvatureBundle};
use crate::jet::Jet;
use crate::report::{CheckReport, Tolerances};
use crate::tensor::{raise, Geometry, JetTensor, MetricSpec, Symmetry, TensorError};

/// Metric order needed for every soliton check, including the triple
/// divergence of `D`.
pub const FULL_SOLITON_ORDER: usize = 5;

#[derive(Debug)]
pub struct SolitonBundle {
    curv: CurvatureBundle,
    lambda: f64,
    f: JetTensor,
    grad: OnceCell<JetTensor>,
    grad_up: OnceCell<JetTensor>,
    hessian: OnceCell<JetTensor>,
    d: OnceCell<JetTensor>,
}

/// `v^a T_{..a..}` with `a` in `slot`: removes that slot.
fn dot_slot(v_up: &JetTensor, t: &JetTensor, slot: usize) -> Result<JetTensor, TensorError> {
    let n = t.dim();
    let order = t.order().min(v_up.order());
    let t = t.truncate(order)?;
    let v = v_up.truncate(order)?;
    let zero = Jet::zero(n, order)?;
    let mut full = vec![0usize; t.rank()];
    Ok(JetTensor::lower(n, t.rank() - 1, order, |idx| {
        full[..slot].copy_from_slice(&idx[..slot]);
        full[slot + 1..].copy_from_slice(&idx[slot..]);
        let mut acc = zero.clone();
        for a in 0..n {
            full[slot] = a;
            v.get(&[a]).mul_acc_into(t.get(&full), 1.0, &mut acc);
        }
        acc
    }))
}

impl SolitonBundle {
    /// Bundle for a closed-form spec at `point`, with metric and potential
    /// expanded to `order`.
    pub fn from_spec(spec: &MetricSpec, point: &[f64], order: usize) -> Result<SolitonBundle, TensorError> {
        let geo = Geometry::from_spec(spec, point, order)?;
        let f = spec.potential.eval_jet(point, order)?;
        Ok(SolitonBundle::new(geo, f, spec.lambda))
    }

    /// `f` must be expanded to the same order as the metric.
    pub fn new(geo: Geometry, f: Jet, lambda: f64) -> SolitonBundle {
        SolitonBundle {
            curv: CurvatureBundle::new(geo),
            lambda,
            f: JetTensor::scalar(f),
            grad: OnceCell::new(),
            grad_up: OnceCell::new(),
            hessian: OnceCell::new(),
            d: OnceCell::new(),
        }
    }

    pub fn curvature(&self) -> &CurvatureBundle {
        &self.curv
    }

    fn geo(&self) -> &Geometry {
        self.curv.geometry()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn potential(&self) -> &JetTensor {
        &self.f
    }

    /// `f_i`.
    pub fn gradient(&self) -> Result<&JetTensor, TensorError> {
        if let Some(v) = self.grad.get() {
            return Ok(v);
        }
        let v = self.geo().nabla(&self.f)?;
        Ok(self.grad.get_or_init(|| v))
    }

    fn gradient_up(&self) -> Result<&JetTensor, TensorError> {
        if let Some(v) = self.grad_up.get() {
            return Ok(v);
        }
        let v = raise(self.gradient()?, 0, &self.geo().g_inv)?;
        Ok(self.grad_up.get_or_init(|| v))
    }

    /// `f_ij`.
    pub fn hessian(&self) -> Result<&JetTensor, TensorError> {
        if let Some(v) = self.hessian.get() {
            return Ok(v);
        }
        let v = self
            .geo()
            .nabla(self.gradient()?)?
            .with_symmetries(vec![Symmetry::Symmetric(0, 1)]);
        Ok(self.hessian.get_or_init(|| v))
    }

    /// `R_ij + f_ij` and `λ g_ij`, at the point.
    pub fn soliton_sides(&self) -> Result<(Vec<f64>, Vec<f64>), TensorError> {
        let ric = self.curv.ricci()?;
        let h = self.hessian()?;
        let g = self.geo().g_at(0)?;
        let lhs = ric.values().iter().zip(h.values()).map(|(a, b)| a + b).collect();
        let rhs = g.values().iter().map(|v| self.lambda * v).collect();
        Ok((lhs, rhs))
    }

    /// Max-abs of `R_ij + f_ij − λ g_ij`.
    pub fn soliton_residual(&self) -> Result<f64, TensorError> {
        let (l, r) = self.soliton_sides()?;
        Ok(l.iter().zip(&r).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `R + |∇f|² − 2λf` as a jet.
    pub fn hamilton_quantity(&self) -> Result<JetTensor, TensorError> {
        let r = self.curv.scalar()?;
        let order = r.order();
        let g2 = self.geo().inner(self.gradient()?, self.gradient()?)?.truncate(order)?;
        let f = self.f.truncate(order)?;
        Ok(r.add_scaled(&g2, 1.0).add_scaled(&f, -2.0 * self.lambda))
    }

    /// The three-tensor `D_ijk`.
    pub fn tensor_d(&self) -> Result<&JetTensor, TensorError> {
        if let Some(v) = self.d.get() {
            return Ok(v);
        }
        let n = self.curv.dim();
        if n < 3 {
            return Err(TensorError::InvalidSpec(format!(
                "D tensor needs dimension >= 3, chart has {n}"
            )));
        }
        let ric = self.curv.ricci()?;
        let order = ric.order();
        let r = self.curv.scalar()?.as_scalar().clone();
        let df = self.gradient()?.truncate(order)?;
        let g = self.geo().g_at(order)?;
        let fric = dot_slot(self.gradient_up()?, ric, 0)?; // f^t R_tk
        let nf = n as f64;
        let a = 1.0 / (nf - 2.0);
        let b = 1.0 / ((nf - 1.0) * (nf - 2.0));
        let rb = r.scale(-b);
        let v = JetTensor::lower(n, 3, order, |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let mut v = df.get(&[k]) * ric.get(&[i, j]);
            df.get(&[j]).mul_acc_into(ric.get(&[i, k]), -1.0, &mut v);
            let mut v = v.scale(a);
            fric.get(&[k]).mul_acc_into(g.get(&[i, j]), b, &mut v);
            fric.get(&[j]).mul_acc_into(g.get(&[i, k]), -b, &mut v);
            let mut s = df.get(&[k]) * g.get(&[i, j]);
            df.get(&[j]).mul_acc_into(g.get(&[i, k]), -1.0, &mut s);
            rb.mul_acc_into(&s, 1.0, &mut v);
            v
        })
        .with_symmetries(vec![Symmetry::Antisymmetric(1, 2)]);
        Ok(self.d.get_or_init(|| v))
    }

    /// `½|C|²` and `−C_kti,it f_k` in dimension 3.
    pub fn pointwise_3d_sides(&self) -> Result<(f64, f64), TensorError> {
        let n = self.curv.dim();
        if n != 3 {
            return Err(TensorError::InvalidSpec(format!(
                "pointwise identity is stated in dimension 3, chart has {n}"
            )));
        }
        let c = self.curv.cotton()?;
        let geo = self.geo();
        let half_norm = 0.5 * geo.inner(c, c)?.as_scalar().value();
        let t = geo.divergence(c, 2)?; // C_kti,i at [k, t]
        let t = geo.divergence(&t, 1)?; // C_kti,it at [k]
        let rhs = -dot_slot(self.gradient_up()?, &t, 0)?.as_scalar().value();
        Ok((half_norm, rhs))
    }
}

fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

/// Soliton equation, lemma identities, D tensor invariants, the four
/// integrability conditions and (in dimension 3) the pointwise identity.
pub fn soliton_checks(
    b: &SolitonBundle,
    tol: &Tolerances,
    report: &mut CheckReport,
) -> Result<(), TensorError> {
    let curv = b.curvature();
    let geo = curv.geometry();
    let n = curv.dim();
    let nf = n as f64;
    let p = curv.point().to_vec();
    let order = geo.order();

    let (l, r) = b.soliton_sides()?;
    let id = "soliton.equation";
    let non_soliton = crate::report::hybrid_residual(&l, &r).2 > 1e-8;
    let warn = if non_soliton {
        " [warning: input is not a soliton at this point]"
    } else {
        ""
    };
    report.compare(id, &p, &l, &r, tol.get(id), format!("R_ij + f_ij = lambda g_ij{warn}"));

    // Δf + R = nλ
    let lap = geo.contract(b.hessian()?, 0, 1)?.as_scalar().value();
    let rs = curv.scalar()?.as_scalar().value();
    let id = "lemma.trace";
    report.compare(id, &p, &[lap + rs], &[nf * b.lambda()], tol.get(id), format!("Laplacian f + R = n lambda{warn}"));

    if order < 3 {
        report.skip("lemma.*", &p, "jet order too low");
        return Ok(());
    }
    // R_i = 2 f_t R_it
    let dr = curv.nabla_scalar()?;
    let fr = dot_slot(b.gradient_up()?, curv.ricci()?, 0)?.scale(2.0);
    let id = "lemma.scalar_gradient";
    report.compare(id, &p, &dr.values(), &fr.values(), tol.get(id), format!("R_i = 2 f_t R_it{warn}"));

    let h = b.hamilton_quantity()?;
    let dh = geo.nabla(&h)?;
    let id = "lemma.hamilton_gradient";
    report.compare(
        id,
        &p,
        &dh.values(),
        &zeros(n),
        tol.get(id),
        format!(
            "gradient of R + |grad f|^2 - 2 lambda f vanishes; c = {:.16e}{warn}",
            h.as_scalar().value()
        ),
    );
    report.info(
        "lemma.hamilton_constant",
        &p,
        h.as_scalar().value(),
        h.as_scalar().value(),
        "fitted c = R + |grad f|^2 - 2 lambda f at this point",
    );

    if n < 3 {
        report.skip("dtensor.*", &p, "needs dimension >= 3");
        report.skip("integrability.*", &p, "needs dimension >= 3");
        return Ok(());
    }

    let d = b.tensor_d()?;
    let dv = d.values();
    let id = "dtensor.skew";
    let mut swapped = Vec::with_capacity(dv.len());
    crate::tensor::for_each_index(n, 3, |ix| swapped.push(-d.value(&[ix[0], ix[2], ix[1]])));
    report.compare(id, &p, &dv, &swapped, tol.get(id), "D_ijk = -D_ikj");
    let mut traces = Vec::new();
    for (s, t) in [(0, 1), (0, 2), (1, 2)] {
        traces.extend(geo.contract(d, s, t)?.values());
    }
    let dmax = d.max_abs_value();
    let id = "dtensor.trace_free";
    report.compare(
        id,
        &p,
        &traces.iter().map(|v| v / (1.0 + dmax)).collect::<Vec<_>>(),
        &zeros(traces.len()),
        tol.get(id),
        format!("all traces of D vanish, |D| = {dmax:.3e}"),
    );

    // C_ijk + f_t W_tijk = D_ijk
    let c = curv.cotton()?;
    let fw = dot_slot(b.gradient_up()?, curv.weyl()?, 0)?;
    let lhs = c.add_scaled(&fw.truncate(c.order())?, 1.0);
    let id = "integrability.cotton_weyl";
    report.compare(id, &p, &lhs.values(), &dv, tol.get(id), format!("C_ijk + f_t W_tijk = D_ijk{warn}"));

    if order < 4 {
        report.skip("integrability.*", &p, "jet order too low");
        return Ok(());
    }
    // (n−2) B_ij − ((n−3)/(n−2)) f_t C_jit = D_ijk,k
    let bach = curv.bach()?;
    let fc = dot_slot(b.gradient_up()?, c, 2)?; // f_t C_jit at [j, i]
    let k = (nf - 3.0) / (nf - 2.0);
    let mut lhs = Vec::new();
    crate::tensor::for_each_index(n, 2, |ix| {
        lhs.push((nf - 2.0) * bach.value(ix) - k * fc.value(&[ix[1], ix[0]]));
    });
    let div_d = geo.divergence(d, 2)?; // D_ijk,k
    let id = "integrability.bach";
    report.compare(
        id,
        &p,
        &lhs,
        &div_d.values(),
        tol.get(id),
        format!("(n-2) B_ij - (n-3)/(n-2) f_t C_jit = D_ijk,k{warn}"),
    );

    // R_kt C_kti = (n−2) D_itk,tk
    let rc = curv.ricci_dot_cotton()?;
    let dd = geo.divergence(d, 1)?; // D_itk,t at [i, k]
    let dd = geo.divergence(&dd, 1)?; // D_itk,tk at [i]
    let id = "integrability.ricci_cotton";
    report.compare(
        id,
        &p,
        &rc.values(),
        &dd.scale(nf - 2.0).values(),
        tol.get(id),
        format!("R_kt C_kti = (n-2) D_itk,tk{warn}"),
    );

    if order < FULL_SOLITON_ORDER {
        report.skip("integrability.cotton_norm", &p, "jet order too low");
        report.skip("pointwise.*", &p, "jet order too low");
        return Ok(());
    }
    // ½|C|² + R_kt C_kti,i = (n−2) D_itk,tki
    let half_norm = 0.5 * geo.inner(c, c)?.as_scalar().value();
    let divc = geo.divergence(c, 2)?; // C_kti,i at [k, t]
    let ru = raise(&raise(curv.ricci()?, 0, &geo.g_inv)?, 1, &geo.g_inv)?;
    let rdc = contract_leading_pair(&ru, &divc)?
        .as_scalar()
        .value();
    let ddd = geo.divergence(&dd, 0)?.as_scalar().value();
    let id = "integrability.cotton_norm";
    report.compare(
        id,
        &p,
        &[half_norm + rdc],
        &[(nf - 2.0) * ddd],
        tol.get(id),
        format!("|C|^2/2 + R_kt C_kti,i = (n-2) D_itk,tki{warn}"),
    );

    if n == 3 {
        let (l, r) = b.pointwise_3d_sides()?;
        let id = "pointwise.cotton_norm";
        report.compare(id, &p, &[l], &[r], tol.get(id), format!("|C|^2/2 = -C_kti,it f_k{warn}"));
        let id = "pointwise.cotton_equals_d";
        report.compare(id, &p, &c.values(), &dv, tol.get(id), format!("C_ijk = D_ijk in dimension 3{warn}"));
    }
    Ok(())
}

/// [`soliton_checks`] at every point, plus a cross-point check that the
/// fitted Hamilton constant agrees with its value at the first point.
pub fn soliton_suite(
    spec: &MetricSpec,
    points: &[Vec<f64>],
    order: usize,
    tol: &Tolerances,
) -> Result<CheckReport, TensorError> {
    let mut report = crate::sampling::run_points(points, |p, report| {
        let b = SolitonBundle::from_spec(spec, p, order)?;
        soliton_checks(&b, tol, report)
    })?;
    let cs: Vec<(Vec<f64>, f64)> = report
        .find("lemma.hamilton_constant")
        .map(|r| (r.point.clone(), r.lhs_norm))
        .collect();
    if let Some((_, c0)) = cs.first().cloned() {
        for (p, c) in cs.iter().skip(1) {
            let id = "lemma.hamilton_constant_spread";
            report.compare(id, p, &[*c], &[c0], tol.get(id), format!("c agrees with first point, c0 = {c0:.16e}"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn diag(dim: usize, factor: &str, potential: &str, lambda: f64) -> MetricSpec {
        let d = Expr::parse(factor).unwrap();
        MetricSpec::new(
            dim,
            |i, j| if i == j { d.clone() } else { Expr::Num(0.0) },
            Expr::parse(potential).unwrap(),
            lambda,
            None,
        )
        .unwrap()
    }

    #[test]
    fn gaussian_hessian_is_exact() {
        let spec = diag(4, "1", "(x1^2+x2^2+x3^2+x4^2)/4", 0.5);
        let b = SolitonBundle::from_spec(&spec, &[0.3, 1.0, -2.0, 0.5], 5).unwrap();
        let h = b.hessian().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h.value(&[i, j]), if i == j { 0.5 } else { 0.0 });
            }
        }
        assert_eq!(b.soliton_residual().unwrap(), 0.0);
        assert!(b.tensor_d().unwrap().comps().iter().all(|j| j.max_abs() == 0.0));
        let mut r = CheckReport::new();
        soliton_checks(&b, &Tolerances::default(), &mut r).unwrap();
        assert!(r.passed());
        assert!(r.records.iter().all(|x| x.residual == 0.0), "{}", r.render_text(true));
    }

    #[test]
    fn cigar_hamilton_constant_is_four() {
        let spec = diag(2, "1/(1+x1^2+x2^2)", "-log(1+x1^2+x2^2)", 0.0);
        for p in [[0.0, 0.0], [0.5, -1.5]] {
            let b = SolitonBundle::from_spec(&spec, &p, 4).unwrap();
            assert!(b.soliton_residual().unwrap() < 1e-12);
            let h = b.hamilton_quantity().unwrap();
            assert!((h.as_scalar().value() - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_is_einstein() {
        let spec = diag(4, "4/(1+x1^2+x2^2+x3^2+x4^2)^2", "0", 3.0);
        let b = SolitonBundle::from_spec(&spec, &[0.2, 0.1, -0.3, 0.4], 5).unwrap();
        assert!(b.soliton_residual().unwrap() < 1e-10);
        assert!(b.tensor_d().unwrap().max_abs_value() == 0.0);
    }

    #[test]
    fn non_soliton_fails_equation() {
        let spec = diag(3, "1 + 0.2*x1^2", "x2", 0.0);
        let b = SolitonBundle::from_spec(&spec, &[0.5, 0.1, 0.2], 5).unwrap();
        let mut r = CheckReport::new();
        soliton_checks(&b, &Tolerances::default(), &mut r).unwrap();
        let rec = r.find("soliton.equation").next().unwrap();
        assert_eq!(rec.verdict, crate::report::Verdict::Fail);
        assert!(rec.note.contains("warning"));
    }

    #[test]
    fn pointwise_identity_needs_three_dimensions() {
        let spec = diag(4, "1", "0", 0.0);
        let b = SolitonBundle::from_spec(&spec, &[0.0; 4], 5).unwrap();
        assert!(b.pointwise_3d_sides().is_err());
    }
}
