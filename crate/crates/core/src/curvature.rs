//! Riemann, Ricci, Weyl, Cotton and Bach tensors and their divergences.
//!
//! Index conventions: `R_{ijkl} = g_{lm} R^m_{ijk}`, `R_{ik} = g^{jl} R_{ijkl}`,
//! which makes the round sphere positively curved. Derivative indices are
//! appended on the right, so `C_{ijk,l}` is stored at `[i, j, k, l]`.
//!
//! A [`CurvatureBundle`] computes each quantity lazily, at most once, and
//! tracks how much jet order is left: a metric of order `m` gives Riemann
//! at order `m - 2`, Cotton at `m - 3`, Bach at `m - 4`, and the scalar
//! divergences `div³C`, `div⁴W`, `div²B` at `m - 6`.

use std::cell::OnceCell;

use crate::jet::Jet;
use crate::report::{CheckReport, Tolerances};
use crate::tensor::{raise, Geometry, JetTensor, MetricSpec, Symmetry, TensorError, Variance};

/// Metric jet order needed to reach each quantity with at least a value.
pub mod required_order {
    pub const RIEMANN: usize = 2;
    pub const COTTON: usize = 3;
    pub const BACH: usize = 4;
    pub const BACH_DIVERGENCE: usize = 5;
    pub const HIGH_DIVERGENCES: usize = 6;
}

/// The three scalar divergences, plus the alternative contraction order
/// `∇_l∇_j∇_k∇_i W_{ikjl}` of the Weyl tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighDivergences {
    pub div4_weyl: f64,
    pub div4_weyl_alt: f64,
    pub div3_cotton: f64,
    pub div2_bach: f64,
}

/// Memoized curvature pipeline at one point.
#[derive(Debug)]
pub struct CurvatureBundle {
    geo: Geometry,
    riemann: OnceCell<JetTensor>,
    ricci: OnceCell<JetTensor>,
    scalar: OnceCell<JetTensor>,
    ricci_up: OnceCell<JetTensor>,
    weyl: OnceCell<JetTensor>,
    nabla_ricci: OnceCell<JetTensor>,
    nabla_scalar: OnceCell<JetTensor>,
    cotton: OnceCell<JetTensor>,
    div_cotton: OnceCell<JetTensor>,
    bach: OnceCell<JetTensor>,
    div_weyl: OnceCell<JetTensor>,
}

fn memo(
    cell: &OnceCell<JetTensor>,
    f: impl FnOnce() -> Result<JetTensor, TensorError>,
) -> Result<&JetTensor, TensorError> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = f()?;
    Ok(cell.get_or_init(|| v))
}

impl CurvatureBundle {
    pub fn new(geo: Geometry) -> CurvatureBundle {
        CurvatureBundle {
            geo,
            riemann: OnceCell::new(),
            ricci: OnceCell::new(),
            scalar: OnceCell::new(),
            ricci_up: OnceCell::new(),
            weyl: OnceCell::new(),
            nabla_ricci: OnceCell::new(),
            nabla_scalar: OnceCell::new(),
            cotton: OnceCell::new(),
            div_cotton: OnceCell::new(),
            bach: OnceCell::new(),
            div_weyl: OnceCell::new(),
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geo
    }

    pub fn point(&self) -> &[f64] {
        &self.geo.point
    }

    pub fn dim(&self) -> usize {
        self.geo.dim()
    }

    fn need(&self, what: &str, needed: usize) -> Result<(), TensorError> {
        if self.geo.order() < needed {
            Err(TensorError::InsufficientOrder {
                what: what.to_string(),
                needed,
                available: self.geo.order(),
            })
        } else {
            Ok(())
        }
    }

    fn g(&self, order: usize) -> JetTensor {
        self.geo.g_at(order).expect("metric order checked")
    }

    /// `R_{ijkl}`.
    pub fn riemann(&self) -> Result<&JetTensor, TensorError> {
        self.need("Riemann tensor", required_order::RIEMANN)?;
        memo(&self.riemann, || riemann(&self.geo))
    }

    /// `R_{ik}`.
    pub fn ricci(&self) -> Result<&JetTensor, TensorError> {
        let riem = self.riemann()?;
        memo(&self.ricci, || {
            Ok(self
                .geo
                .contract(riem, 1, 3)?
                .with_symmetries(vec![Symmetry::Symmetric(0, 1)]))
        })
    }

    /// Scalar curvature as a rank-0 tensor.
    pub fn scalar(&self) -> Result<&JetTensor, TensorError> {
        let ric = self.ricci()?;
        memo(&self.scalar, || self.geo.contract(ric, 0, 1))
    }

    /// `R^{ij}`.
    pub fn ricci_up(&self) -> Result<&JetTensor, TensorError> {
        let ric = self.ricci()?;
        memo(&self.ricci_up, || {
            raise(&raise(ric, 0, &self.geo.g_inv)?, 1, &self.geo.g_inv)
        })
    }

    /// Weyl tensor; identically zero for `n = 3`.
    pub fn weyl(&self) -> Result<&JetTensor, TensorError> {
        let n = self.dim();
        if n < 3 {
            return Err(TensorError::InvalidSpec(format!(
                "Weyl tensor needs dimension >= 3, chart has {n}"
            )));
        }
        let riem = self.riemann()?;
        let ric = self.ricci()?;
        let r = self.scalar()?.as_scalar().clone();
        memo(&self.weyl, || {
            let order = riem.order();
            let syms = vec![
                Symmetry::Antisymmetric(0, 1),
                Symmetry::Antisymmetric(2, 3),
            ];
            if n == 3 {
                return Ok(JetTensor::zeros(n, vec![Variance::Lower; 4], order)?.with_symmetries(syms));
            }
            let g = self.g(order);
            let a = 1.0 / (n as f64 - 2.0);
            let b = 1.0 / ((n as f64 - 1.0) * (n as f64 - 2.0));
            let rb = r.scale(b);
            Ok(JetTensor::lower(n, 4, order, |ix| {
                let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
                let mut w = riem.get(ix).clone();
                let mut s = ric.get(&[i, k]) * g.get(&[j, l]);
                ric.get(&[i, l]).mul_acc_into(g.get(&[j, k]), -1.0, &mut s);
                ric.get(&[j, l]).mul_acc_into(g.get(&[i, k]), 1.0, &mut s);
                ric.get(&[j, k]).mul_acc_into(g.get(&[i, l]), -1.0, &mut s);
                w.add_scaled(&s, -a);
                let mut gg = g.get(&[i, k]) * g.get(&[j, l]);
                g.get(&[i, l]).mul_acc_into(g.get(&[j, k]), -1.0, &mut gg);
                rb.mul_acc_into(&gg, 1.0, &mut w);
                w
            })
            .with_symmetries(syms))
        })
    }

    /// `R_{ij,k}`.
    pub fn nabla_ricci(&self) -> Result<&JetTensor, TensorError> {
        self.need("covariant derivative of Ricci", required_order::COTTON)?;
        let ric = self.ricci()?;
        memo(&self.nabla_ricci, || self.geo.nabla(ric))
    }

    /// `R_k`.
    pub fn nabla_scalar(&self) -> Result<&JetTensor, TensorError> {
        self.need("gradient of scalar curvature", required_order::COTTON)?;
        let r = self.scalar()?;
        memo(&self.nabla_scalar, || self.geo.nabla(r))
    }

    /// `C_{ijk} = R_{ij,k} - R_{ik,j} - (R_k g_{ij} - R_j g_{ik}) / (2(n-1))`.
    pub fn cotton(&self) -> Result<&JetTensor, TensorError> {
        let n = self.dim();
        if n < 3 {
            return Err(TensorError::InvalidSpec(format!(
                "Cotton tensor needs dimension >= 3, chart has {n}"
            )));
        }
        self.need("Cotton tensor", required_order::COTTON)?;
        let dric = self.nabla_ricci()?;
        let dr = self.nabla_scalar()?;
        memo(&self.cotton, || {
            let order = dric.order();
            let g = self.g(order);
            let c = 1.0 / (2.0 * (n as f64 - 1.0));
            Ok(JetTensor::lower(n, 3, order, |ix| {
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                let mut v = dric.get(&[i, j, k]) - dric.get(&[i, k, j]);
                dr.get(&[k]).mul_acc_into(g.get(&[i, j]), -c, &mut v);
                dr.get(&[j]).mul_acc_into(g.get(&[i, k]), c, &mut v);
                v
            })
            .with_symmetries(vec![Symmetry::Antisymmetric(1, 2)]))
        })
    }

    /// `C_{ijk,k}`, stored at `[i, j]`.
    pub fn div_cotton(&self) -> Result<&JetTensor, TensorError> {
        self.need("divergence of Cotton", required_order::BACH)?;
        let c = self.cotton()?;
        memo(&self.div_cotton, || self.geo.divergence(c, 2))
    }

    /// `W_{tikj,t}`, stored at `[i, k, j]`.
    pub fn div_weyl(&self) -> Result<&JetTensor, TensorError> {
        self.need("divergence of Weyl", required_order::COTTON)?;
        let w = self.weyl()?;
        memo(&self.div_weyl, || self.geo.divergence(w, 0))
    }

    /// Bach tensor: `(C_{jik,k} + R_{kl} W_{ikjl}) / (n-2)` for `n ≥ 4`,
    /// `C_{ijk,k}` for `n = 3`.
    pub fn bach(&self) -> Result<&JetTensor, TensorError> {
        let n = self.dim();
        self.need("Bach tensor", required_order::BACH)?;
        let dc = self.div_cotton()?;
        if n == 3 {
            return memo(&self.bach, || {
                Ok(dc.clone().with_symmetries(vec![Symmetry::Symmetric(0, 1)]))
            });
        }
        let w = self.weyl()?;
        let ric_up = self.ricci_up()?;
        memo(&self.bach, || {
            let order = dc.order();
            let w = w.truncate(order)?;
            let ru = ric_up.truncate(order)?;
            let s = 1.0 / (n as f64 - 2.0);
            Ok(JetTensor::lower(n, 2, order, |ix| {
                let (i, j) = (ix[0], ix[1]);
                let mut v = dc.get(&[j, i]).clone();
                for k in 0..n {
                    for l in 0..n {
                        ru.get(&[k, l]).mul_acc_into(w.get(&[i, k, j, l]), 1.0, &mut v);
                    }
                }
                v.scale(s)
            })
            .with_symmetries(vec![Symmetry::Symmetric(0, 1)]))
        })
    }

    /// `B_{ij,j}`.
    pub fn div_bach(&self) -> Result<JetTensor, TensorError> {
        self.need("divergence of Bach", required_order::BACH_DIVERGENCE)?;
        self.geo.divergence(self.bach()?, 1)
    }

    /// `R_{kt} C_{kti}`, indexed by `i`.
    pub fn ricci_dot_cotton(&self) -> Result<JetTensor, TensorError> {
        let c = self.cotton()?;
        let ru = self.ricci_up()?.truncate(c.order())?;
        contract_leading_pair(&ru, c)
    }

    /// `div⁴W`, `div³C`, `div²B` and the alternative `div⁴W` ordering.
    pub fn high_divergences(&self) -> Result<HighDivergences, TensorError> {
        let n = self.dim();
        self.need("fourth divergence of Weyl", required_order::HIGH_DIVERGENCES)?;
        // C_{ijk,kji}
        let t = self.div_cotton()?;
        let t = self.geo.divergence(t, 1)?;
        let div3_cotton = self.geo.divergence(&t, 0)?.as_scalar().value();
        // B_{ij,ji}
        let t = self.geo.divergence(self.bach()?, 1)?;
        let div2_bach = self.geo.divergence(&t, 0)?.as_scalar().value();
        let (div4_weyl, div4_weyl_alt) = if n >= 4 {
            // W_{tikj,t} at [i,k,j]: the order W_{ikjl,iljk} contracts the
            // original l (slot 2 here), then j, then k.
            let dw = self.div_weyl()?;
            let a = self.geo.divergence(dw, 2)?;
            let a = self.geo.divergence(&a, 1)?;
            let a = self.geo.divergence(&a, 0)?.as_scalar().value();
            // W_{ikjl,ikjl}: k, then j, then l.
            let b = self.geo.divergence(dw, 0)?;
            let b = self.geo.divergence(&b, 0)?;
            let b = self.geo.divergence(&b, 0)?.as_scalar().value();
            (a, b)
        } else {
            (0.0, 0.0)
        };
        Ok(HighDivergences {
            div4_weyl,
            div4_weyl_alt,
            div3_cotton,
            div2_bach,
        })
    }
}

/// `A^{ab} T_{ab...}` for an upper rank-2 `A`.
pub(crate) fn contract_leading_pair(a: &JetTensor, t: &JetTensor) -> Result<JetTensor, TensorError> {
    let n = t.dim();
    let order = t.order();
    let a = a.truncate(order)?;
    let zero = Jet::zero(n, order)?;
    let rest = t.rank() - 2;
    let mut full = vec![0usize; t.rank()];
    Ok(JetTensor::lower(n, rest, order, |idx| {
        full[2..].copy_from_slice(idx);
        let mut acc = zero.clone();
        for p in 0..n {
            for q in 0..n {
                full[0] = p;
                full[1] = q;
                a.get(&[p, q]).mul_acc_into(t.get(&full), 1.0, &mut acc);
            }
        }
        acc
    }))
}

/// `R_{ijkl}` from the connection.
pub fn riemann(geo: &Geometry) -> Result<JetTensor, TensorError> {
    let gamma = &geo.gamma;
    if gamma.order() < 1 {
        return Err(TensorError::InsufficientOrder {
            what: "Riemann tensor".to_string(),
            needed: required_order::RIEMANN,
            available: geo.order(),
        });
    }
    let n = geo.dim();
    let order = gamma.order() - 1;
    let gam = gamma.truncate(order)?;
    // dgam[a] = ∂_a Γ (flattened over [m, i, k])
    let dgam: Vec<Vec<Jet>> = (0..n)
        .map(|a| gamma.comps().iter().map(|c| c.partial(a)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let gi = |m: usize, i: usize, k: usize| (m * n + i) * n + k;
    // R^m_{ijk} = ∂_j Γ^m_{ik} − ∂_i Γ^m_{jk} + Γ^m_{jp} Γ^p_{ik} − Γ^m_{ip} Γ^p_{jk}
    let up = JetTensor::from_fn(
        n,
        vec![Variance::Lower, Variance::Lower, Variance::Lower, Variance::Upper],
        order,
        |ix| {
            let (i, j, k, m) = (ix[0], ix[1], ix[2], ix[3]);
            let mut v = &dgam[j][gi(m, i, k)] - &dgam[i][gi(m, j, k)];
            for p in 0..n {
                gam.comps()[gi(m, j, p)].mul_acc_into(&gam.comps()[gi(p, i, k)], 1.0, &mut v);
                gam.comps()[gi(m, i, p)].mul_acc_into(&gam.comps()[gi(p, j, k)], -1.0, &mut v);
            }
            v
        },
    );
    let g = geo.g_at(order)?;
    let zero = Jet::zero(n, order)?;
    Ok(JetTensor::lower(n, 4, order, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let mut v = zero.clone();
        for m in 0..n {
            g.get(&[l, m]).mul_acc_into(up.get(&[i, j, k, m]), 1.0, &mut v);
        }
        v
    })
    .with_symmetries(vec![
        Symmetry::Antisymmetric(0, 1),
        Symmetry::Antisymmetric(2, 3),
    ]))
}

fn values_of(t: &JetTensor, f: impl Fn(&[usize]) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.comps().len());
    crate::tensor::for_each_index(t.dim(), t.rank(), |ix| out.push(f(ix)));
    out
}

/// Runs every general-metric identity at the bundle's point and appends
/// the results to `report`. Quantities the jet order cannot reach, or the
/// dimension excludes, are recorded as SKIP.
pub fn identity_checks(
    b: &CurvatureBundle,
    tol: &Tolerances,
    report: &mut CheckReport,
) -> Result<(), TensorError> {
    let n = b.dim();
    let p = b.point().to_vec();
    let order = b.geometry().order();
    let nf = n as f64;

    let riem = b.riemann()?;
    let rv = |ix: &[usize]| riem.value(ix);
    let base = riem.values();
    let mut cmp = |id: &str, l: Vec<f64>, r: Vec<f64>, note: &str| {
        report.compare(id, &p, &l, &r, tol.get(id), note);
    };
    cmp(
        "riemann.antisym_first",
        base.clone(),
        values_of(riem, |ix| -rv(&[ix[1], ix[0], ix[2], ix[3]])),
        "R_ijkl = -R_jikl",
    );
    cmp(
        "riemann.antisym_last",
        base.clone(),
        values_of(riem, |ix| -rv(&[ix[0], ix[1], ix[3], ix[2]])),
        "R_ijkl = -R_ijlk",
    );
    cmp(
        "riemann.pair_swap",
        base.clone(),
        values_of(riem, |ix| rv(&[ix[2], ix[3], ix[0], ix[1]])),
        "R_ijkl = R_klij",
    );
    cmp(
        "bianchi.first",
        values_of(riem, |ix| rv(ix) + rv(&[ix[1], ix[2], ix[0], ix[3]])),
        values_of(riem, |ix| -rv(&[ix[2], ix[0], ix[1], ix[3]])),
        "R_ijkl + R_jkil + R_kijl = 0",
    );

    let ric = b.ricci()?;
    cmp(
        "ricci.symmetric",
        ric.values(),
        values_of(ric, |ix| ric.value(&[ix[1], ix[0]])),
        "R_ij = R_ji",
    );
    let r = b.scalar()?.as_scalar().value();
    let g0 = b.geometry().g_at(ric.order())?;
    if n == 2 {
        cmp(
            "ricci.half_scalar",
            ric.values(),
            values_of(ric, |ix| 0.5 * r * g0.value(ix)),
            "R_ij = R g_ij / 2 in dimension 2",
        );
    }

    if order >= required_order::COTTON {
        let dr = b.geometry().nabla(riem)?;
        let dv = |ix: &[usize]| dr.value(ix);
        cmp(
            "bianchi.second",
            values_of(&dr, |ix| dv(ix) + dv(&[ix[0], ix[1], ix[3], ix[4], ix[2]])),
            values_of(&dr, |ix| -dv(&[ix[0], ix[1], ix[4], ix[2], ix[3]])),
            "R_ijkl,m + R_ijlm,k + R_ijmk,l = 0",
        );
        let div_ric = b.geometry().divergence(b.ricci()?, 1)?;
        let half_dr = b.nabla_scalar()?.scale(0.5);
        cmp(
            "bianchi.contracted",
            div_ric.values(),
            half_dr.values(),
            "g^jk R_ij,k = R_i / 2",
        );
    } else {
        report.skip("bianchi.second", &p, "jet order too low");
    }

    if n < 3 {
        for id in ["weyl.*", "cotton.*", "bach.*"] {
            report.skip(id, &p, "needs dimension >= 3");
        }
        return Ok(());
    }

    let w = b.weyl()?;
    if n == 3 {
        report.compare("weyl.vanishes_3d", &p, &w.values(), &vec![0.0; w.comps().len()], tol.get("weyl.vanishes_3d"), "W = 0 in dimension 3");
    } else {
        let wv = |ix: &[usize]| w.value(ix);
        let wb = w.values();
        report.compare(
            "weyl.antisym",
            &p,
            &wb,
            &values_of(w, |ix| -wv(&[ix[1], ix[0], ix[2], ix[3]])),
            tol.get("weyl.antisym"),
            "W_ijkl = -W_jikl",
        );
        report.compare(
            "weyl.pair_swap",
            &p,
            &wb,
            &values_of(w, |ix| wv(&[ix[2], ix[3], ix[0], ix[1]])),
            tol.get("weyl.pair_swap"),
            "W_ijkl = W_klij",
        );
        let mut traces = Vec::new();
        for (a, c) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            traces.extend(b.geometry().contract(w, a, c)?.values());
        }
        // Scale the trace residual by |W| so it is relative to the tensor.
        let wmax = w.max_abs_value();
        report.compare(
            "weyl.trace_free",
            &p,
            &traces.iter().map(|t| t / (1.0 + wmax)).collect::<Vec<_>>(),
            &vec![0.0; traces.len()],
            tol.get("weyl.trace_free"),
            format!("all single traces vanish, |W| = {wmax:.3e}"),
        );
    }

    if order < required_order::COTTON {
        report.skip("cotton.*", &p, "jet order too low");
        return Ok(());
    }
    let c = b.cotton()?;
    let cv = |ix: &[usize]| c.value(ix);
    let cb = c.values();
    report.compare(
        "cotton.skew",
        &p,
        &cb,
        &values_of(c, |ix| -cv(&[ix[0], ix[2], ix[1]])),
        tol.get("cotton.skew"),
        "C_ijk = -C_ikj",
    );
    report.compare(
        "cotton.cyclic",
        &p,
        &values_of(c, |ix| cv(ix) + cv(&[ix[1], ix[2], ix[0]])),
        &values_of(c, |ix| -cv(&[ix[2], ix[0], ix[1]])),
        tol.get("cotton.cyclic"),
        "C_ijk + C_jki + C_kij = 0",
    );
    let mut traces = Vec::new();
    for (a, cc) in [(0, 1), (0, 2), (1, 2)] {
        traces.extend(b.geometry().contract(c, a, cc)?.values());
    }
    let cmax = c.max_abs_value();
    report.compare(
        "cotton.trace_free",
        &p,
        &traces.iter().map(|t| t / (1.0 + cmax)).collect::<Vec<_>>(),
        &vec![0.0; traces.len()],
        tol.get("cotton.trace_free"),
        format!("all traces vanish, |C| = {cmax:.3e}"),
    );
    if n >= 4 {
        let dw = b.div_weyl()?;
        let k = (nf - 2.0) / (nf - 3.0);
        report.compare(
            "cotton.weyl_divergence",
            &p,
            &cb,
            &values_of(c, |ix| k * dw.value(&[ix[0], ix[2], ix[1]])),
            tol.get("cotton.weyl_divergence"),
            "C_ijk = (n-2)/(n-3) W_tikj,t",
        );
        report.compare(
            "cotton.weyl_divergence_alt",
            &p,
            &cb,
            &values_of(c, |ix| -k * dw.value(ix)),
            tol.get("cotton.weyl_divergence_alt"),
            "C_ijk = -(n-2)/(n-3) W_tijk,t",
        );
    }

    if order < required_order::BACH {
        report.skip("cotton.divergence_free", &p, "jet order too low");
        report.skip("bach.*", &p, "jet order too low");
        return Ok(());
    }
    let d1 = b.geometry().divergence(c, 0)?;
    let dmax = d1.max_abs_value();
    report.compare(
        "cotton.divergence_free",
        &p,
        &d1.values(),
        &vec![0.0; d1.comps().len()],
        tol.get("cotton.divergence_free"),
        format!("C_ijk,i = 0, |div C| = {dmax:.3e}"),
    );

    let bt = b.bach()?;
    report.compare(
        "bach.symmetric",
        &p,
        &bt.values(),
        &values_of(bt, |ix| bt.value(&[ix[1], ix[0]])),
        tol.get("bach.symmetric"),
        "B_ij = B_ji",
    );
    let tr = b.geometry().contract(bt, 0, 1)?.as_scalar().value();
    let bmax = bt.max_abs_value();
    report.compare(
        "bach.trace_free",
        &p,
        &[tr / (1.0 + bmax)],
        &[0.0],
        tol.get("bach.trace_free"),
        format!("B_ii = 0, |B| = {bmax:.3e}"),
    );

    if order < required_order::BACH_DIVERGENCE {
        report.skip("bach.divergence", &p, "jet order too low");
        return Ok(());
    }
    let lhs = b.div_bach()?;
    let k = (nf - 4.0) / ((nf - 2.0) * (nf - 2.0));
    let rhs = b.ricci_dot_cotton()?.scale(k).truncate(lhs.order())?;
    report.compare(
        "bach.divergence",
        &p,
        &lhs.values(),
        &rhs.values(),
        tol.get("bach.divergence"),
        "B_ij,j = (n-4)/(n-2)^2 R_kt C_kti",
    );

    if order < required_order::HIGH_DIVERGENCES {
        report.skip("divergence.*", &p, "jet order too low");
        return Ok(());
    }
    let hd = b.high_divergences()?;
    if n >= 4 {
        let k = -(nf - 3.0) / (nf - 2.0);
        report.compare(
            "divergence.div3c_div4w",
            &p,
            &[hd.div4_weyl],
            &[k * hd.div3_cotton],
            tol.get("divergence.div3c_div4w"),
            "div4(W) = -(n-3)/(n-2) div3(C)",
        );
        report.info(
            "divergence.div4w_alt_order",
            &p,
            hd.div4_weyl,
            hd.div4_weyl_alt,
            "informational: W_ikjl,iljk vs W_ikjl,ikjl",
        );
    } else {
        report.compare(
            "divergence.div3c_div2b",
            &p,
            &[hd.div3_cotton],
            &[hd.div2_bach],
            tol.get("divergence.div3c_div2b"),
            "div3(C) = div2(B) in dimension 3",
        );
    }
    Ok(())
}

/// [`identity_checks`] at every point, with the metric expanded to `order`.
pub fn general_identity_suite(
    spec: &MetricSpec,
    points: &[Vec<f64>],
    order: usize,
    tol: &Tolerances,
) -> Result<CheckReport, TensorError> {
    crate::sampling::run_points(points, |p, report| {
        let b = CurvatureBundle::new(Geometry::from_spec(spec, p, order)?);
        identity_checks(&b, tol, report)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn conformal(dim: usize, factor: &str, potential: &str) -> MetricSpec {
        let d = Expr::parse(factor).unwrap();
        MetricSpec::new(
            dim,
            |i, j| if i == j { d.clone() } else { Expr::Num(0.0) },
            Expr::parse(potential).unwrap(),
            0.0,
            None,
        )
        .unwrap()
    }

    fn sphere(dim: usize) -> MetricSpec {
        let r2 = (1..=dim).map(|i| format!("x{i}^2")).collect::<Vec<_>>().join("+");
        conformal(dim, &format!("4/(1+{r2})^2"), "0")
    }

    fn bundle(spec: &MetricSpec, p: &[f64], order: usize) -> CurvatureBundle {
        CurvatureBundle::new(Geometry::from_spec(spec, p, order).unwrap())
    }

    #[test]
    fn flat_is_flat() {
        let spec = conformal(4, "1", "0");
        let b = bundle(&spec, &[0.1, 0.2, 0.3, 0.4], 6);
        assert!(b.riemann().unwrap().comps().iter().all(|j| j.max_abs() == 0.0));
        let hd = b.high_divergences().unwrap();
        assert_eq!(hd.div3_cotton, 0.0);
        assert_eq!(hd.div4_weyl, 0.0);
        assert_eq!(hd.div2_bach, 0.0);
    }

    #[test]
    fn sphere_has_positive_curvature() {
        // Unit S^4 at the origin: R = n(n-1) = 12.
        let b = bundle(&sphere(4), &[0.0; 4], 4);
        let r = b.scalar().unwrap().as_scalar().value();
        assert!((r - 12.0).abs() < 1e-12, "{r}");
        // Also away from the origin, and W = 0, B = 0.
        let b = bundle(&sphere(4), &[0.3, -0.2, 0.5, 0.1], 4);
        assert!((b.scalar().unwrap().as_scalar().value() - 12.0).abs() < 1e-11);
        assert!(b.weyl().unwrap().max_abs_value() < 1e-11);
        assert!(b.bach().unwrap().max_abs_value() < 1e-10);
    }

    #[test]
    fn cigar_scalar_curvature() {
        // 2D conformal oracle: g = e^{2u} δ with e^{2u} = 1/(1+r²), K = -e^{-2u} Δu,
        // u = -½ log(1+r²), Δu = -2/(1+r²)², so R = 2K = 4/(1+r²).
        let spec = conformal(2, "1/(1+x1^2+x2^2)", "-log(1+x1^2+x2^2)");
        for p in [[0.0, 0.0], [0.7, -1.2], [2.0, 1.0]] {
            let b = bundle(&spec, &p, 2);
            let r = b.scalar().unwrap().as_scalar().value();
            let want = 4.0 / (1.0 + p[0] * p[0] + p[1] * p[1]);
            assert!((r - want).abs() < 1e-12, "{r} vs {want}");
        }
    }

    #[test]
    fn order_errors() {
        let b = bundle(&sphere(4), &[0.0; 4], 3);
        assert!(b.cotton().is_ok());
        assert!(matches!(
            b.bach(),
            Err(TensorError::InsufficientOrder { needed: 4, available: 3, .. })
        ));
        assert!(matches!(
            b.high_divergences(),
            Err(TensorError::InsufficientOrder { needed: 6, .. })
        ));
    }

    #[test]
    fn weyl_vanishes_in_three_dimensions() {
        let spec = conformal(3, "1 + 0.1*sin(x1*x2) + 0.05*x3^2", "0");
        let b = bundle(&spec, &[0.2, 0.3, 0.1], 2);
        assert!(b.weyl().unwrap().comps().iter().all(|j| j.max_abs() == 0.0));
        let b2 = bundle(&conformal(2, "1", "0"), &[0.0, 0.0], 2);
        assert!(b2.weyl().is_err());
    }

    #[test]
    fn memoized_entries_are_reused() {
        let b = bundle(&sphere(3), &[0.1, 0.2, 0.3], 3);
        let a = b.cotton().unwrap() as *const JetTensor;
        let c = b.cotton().unwrap() as *const JetTensor;
        assert_eq!(a, c);
    }
}
