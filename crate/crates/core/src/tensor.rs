//! Jet-valued dense tensors on a coordinate chart.
//!
//! Components are stored row-major over `dim^rank` slots. Covariant
//! derivative slots are appended on the right, so `T_{ij,k}` lives at
//! index `[i, j, k]`.

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::jet::{Jet, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("metric is singular at {point:?}")]
    Singular { point: Vec<f64> },
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("{what} needs jet order {needed}, only {available} available (raise --order)")]
    InsufficientOrder {
        what: String,
        needed: usize,
        available: usize,
    },
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("slot variance does not allow this operation")]
    Variance,
    #[error("invalid metric spec: {0}")]
    InvalidSpec(String),
}

/// Coordinate box `lo ≤ x ≤ hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<ChartBox, TensorError> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(TensorError::InvalidSpec(format!(
                "domain box needs lo < hi componentwise, got {lo:?} / {hi:?}"
            )));
        }
        Ok(ChartBox { lo, hi })
    }

    pub fn cube(dim: usize, half_width: f64) -> ChartBox {
        ChartBox {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.lo.len()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| a <= x && x <= b)
    }
}

/// A metric with potential and soliton constant, in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    dim: usize,
    /// Upper triangle `i ≤ j`, row-major.
    components: Vec<Expr>,
    pub potential: Expr,
    pub lambda: f64,
    pub domain: Option<ChartBox>,
}

impl MetricSpec {
    /// `components(i, j)` is queried for `i ≤ j` only.
    pub fn new(
        dim: usize,
        mut components: impl FnMut(usize, usize) -> Expr,
        potential: Expr,
        lambda: f64,
        domain: Option<ChartBox>,
    ) -> Result<MetricSpec, TensorError> {
        if !(2..=5).contains(&dim) {
            return Err(TensorError::InvalidSpec(format!("dimension {dim} outside [2, 5]")));
        }
        let mut comps = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                comps.push(components(i, j));
            }
        }
        let used = comps
            .iter()
            .chain(std::iter::once(&potential))
            .map(Expr::min_dim)
            .max()
            .unwrap_or(0);
        if used > dim {
            return Err(TensorError::InvalidSpec(format!(
                "coordinate x{used} used in a {dim}-dimensional chart"
            )));
        }
        if let Some(b) = &domain {
            if b.lo.len() != dim {
                return Err(TensorError::InvalidSpec(format!(
                    "domain box has {} coordinates, chart dimension is {dim}",
                    b.lo.len()
                )));
            }
        }
        Ok(MetricSpec {
            dim,
            components: comps,
            potential,
            lambda,
            domain,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // Row i of the packed upper triangle starts at Σ_{r<i} (dim - r).
        let offset = (0..i).map(|r| self.dim - r).sum::<usize>();
        &self.components[offset + (j - i)]
    }

    /// Same geometry with every metric component multiplied by `factor`
    /// and `λ` divided by it; the potential is unchanged.
    pub fn scaled(&self, factor: f64) -> MetricSpec {
        let mut s = self.clone();
        s.components = self
            .components
            .iter()
            .map(|e| {
                if e.is_zero() {
                    e.clone()
                } else {
                    Expr::Mul(Box::new(Expr::Num(factor)), Box::new(e.clone()))
                }
            })
            .collect();
        s.lambda = self.lambda / factor;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Lower,
    Upper,
}

/// Declared symmetry between two slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

/// Dense tensor of jets sharing one `(dim, order)` shape.
#[derive(Debug, Clone, PartialEq)]
pub struct JetTensor {
    dim: usize,
    variance: Vec<Variance>,
    order: usize,
    comps: Vec<Jet>,
    symmetries: Vec<Symmetry>,
}

/// Calls `f` with every index tuple in `[0, dim)^rank`, row-major.
pub fn for_each_index(dim: usize, rank: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; rank];
    let total = dim.pow(rank as u32);
    for _ in 0..total {
        f(&idx);
        for s in (0..rank).rev() {
            idx[s] += 1;
            if idx[s] < dim {
                break;
            }
            idx[s] = 0;
        }
    }
}

impl JetTensor {
    pub fn from_fn(
        dim: usize,
        variance: Vec<Variance>,
        order: usize,
        mut f: impl FnMut(&[usize]) -> Jet,
    ) -> JetTensor {
        let rank = variance.len();
        let mut comps = Vec::with_capacity(dim.pow(rank as u32));
        for_each_index(dim, rank, |idx| {
            let j = f(idx);
            debug_assert!(j.dim() == dim && j.order() == order);
            comps.push(j);
        });
        JetTensor {
            dim,
            variance,
            order,
            comps,
            symmetries: Vec::new(),
        }
    }

    pub fn lower(dim: usize, rank: usize, order: usize, f: impl FnMut(&[usize]) -> Jet) -> JetTensor {
        JetTensor::from_fn(dim, vec![Variance::Lower; rank], order, f)
    }

    pub fn zeros(dim: usize, variance: Vec<Variance>, order: usize) -> Result<JetTensor, TensorError> {
        let z = Jet::zero(dim, order)?;
        Ok(JetTensor::from_fn(dim, variance, order, |_| z.clone()))
    }

    pub fn scalar(j: Jet) -> JetTensor {
        JetTensor {
            dim: j.dim(),
            variance: Vec::new(),
            order: j.order(),
            comps: vec![j],
            symmetries: Vec::new(),
        }
    }

    pub fn with_symmetries(mut self, s: Vec<Symmetry>) -> JetTensor {
        self.symmetries = s;
        self
    }

    pub fn symmetries(&self) -> &[Symmetry] {
        &self.symmetries
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn comps(&self) -> &[Jet] {
        &self.comps
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[self.flat(idx)]
    }

    /// The single component of a rank-0 tensor.
    pub fn as_scalar(&self) -> &Jet {
        &self.comps[0]
    }

    /// Component values at the expansion point.
    pub fn values(&self) -> Vec<f64> {
        self.comps.iter().map(Jet::value).collect()
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.get(idx).value()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, j| m.max(j.value().abs()))
    }

    pub fn truncate(&self, order: usize) -> Result<JetTensor, TensorError> {
        if order == self.order {
            return Ok(self.clone());
        }
        Ok(JetTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            order,
            comps: self
                .comps
                .iter()
                .map(|j| j.truncate(order))
                .collect::<Result<_, _>>()?,
            symmetries: self.symmetries.clone(),
        })
    }

    /// Reorders slots: slot `s` of the result is slot `perm[s]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> JetTensor {
        let r = self.rank();
        assert_eq!(perm.len(), r);
        let mut src = vec![0usize; r];
        let variance = perm.iter().map(|&p| self.variance[p]).collect();
        JetTensor::from_fn(self.dim, variance, self.order, |idx| {
            for s in 0..r {
                src[perm[s]] = idx[s];
            }
            self.get(&src).clone()
        })
    }

    pub fn scale(&self, s: f64) -> JetTensor {
        let mut t = self.clone();
        t.comps = self.comps.iter().map(|j| j.scale(s)).collect();
        t
    }

    /// `self + s * other`; shapes and orders must agree.
    pub fn add_scaled(&self, other: &JetTensor, s: f64) -> JetTensor {
        assert_eq!(self.variance, other.variance);
        assert_eq!(self.order, other.order);
        let mut t = self.clone();
        t.symmetries.clear();
        for (a, b) in t.comps.iter_mut().zip(&other.comps) {
            a.add_scaled(b, s);
        }
        t
    }

    /// Max over components of `|T - σ T∘swap|`, normalized by `1 + max|T|`.
    pub fn symmetry_residual(&self) -> f64 {
        let scale = 1.0 + self.max_abs_value();
        let mut worst = 0.0f64;
        for sym in &self.symmetries {
            let (a, b, sign) = match *sym {
                Symmetry::Symmetric(a, b) => (a, b, 1.0),
                Symmetry::Antisymmetric(a, b) => (a, b, -1.0),
            };
            for (flat, j) in self.comps.iter().enumerate() {
                let mut idx = self.unflat(flat);
                idx.swap(a, b);
                let other = self.value(&idx);
                worst = worst.max((j.value() - sign * other).abs());
            }
        }
        worst / scale
    }

    fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let r = self.rank();
        let mut idx = vec![0; r];
        for s in (0..r).rev() {
            idx[s] = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }
}

/// Upper-triangular Cholesky check on the constant part of `g`.
fn is_positive_definite(m: &[Vec<f64>]) -> bool {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = m[i][i] - s;
                if !(d > 0.0) {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

/// Inverse of a jet-valued matrix by Gauss–Jordan elimination, pivoting on
/// the constant terms.
pub fn invert_jet_matrix(m: &[Vec<Jet>]) -> Option<Vec<Vec<Jet>>> {
    let n = m.len();
    let zero = m[0][0].zeros_like();
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { zero.constant_like(1.0) } else { zero.clone() })
                .collect()
        })
        .collect();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |s, j| s.max(j.value().abs()));
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].value().abs().total_cmp(&a[y][col].value().abs()))?;
        if a[piv][col].value().abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let r = a[col][col].recip().ok()?;
        for j in 0..n {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            if factor.max_abs() == 0.0 {
                continue;
            }
            for j in 0..n {
                let mut t = a[row][j].clone();
                a[col][j].mul_acc_into(&factor, -1.0, &mut t);
                a[row][j] = t;
                let mut t = inv[row][j].clone();
                inv[col][j].mul_acc_into(&factor, -1.0, &mut t);
                inv[row][j] = t;
            }
        }
    }
    Some(inv)
}

/// Metric `g_ij` and inverse `g^ij` as jets of the given order at `point`.
pub fn metric_at(
    spec: &MetricSpec,
    point: &[f64],
    order: usize,
) -> Result<(JetTensor, JetTensor), TensorError> {
    let n = spec.dim();
    if point.len() != n {
        return Err(EvalError::PointLength { got: point.len(), dim: n }.into());
    }
    if let Some(b) = &spec.domain {
        if !b.contains(point) {
            return Err(TensorError::OutsideDomain { point: point.to_vec() });
        }
    }
    let mut rows: Vec<Vec<Jet>> = vec![Vec::with_capacity(n); n];
    for i in 0..n {
        for j in 0..n {
            let jet = if j < i {
                rows[j][i].clone()
            } else {
                spec.component(i, j).eval_jet(point, order)?
            };
            rows[i].push(jet);
        }
    }
    metric_from_rows(rows, point)
}

/// Assembles `(g, g^{-1})` from a symmetric jet matrix.
pub fn metric_from_rows(
    rows: Vec<Vec<Jet>>,
    point: &[f64],
) -> Result<(JetTensor, JetTensor), TensorError> {
    let n = rows.len();
    let order = rows[0][0].order();
    let values: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(Jet::value).collect())
        .collect();
    if !is_positive_definite(&values) {
        return Err(TensorError::NotPositiveDefinite { point: point.to_vec() });
    }
    let inv = invert_jet_matrix(&rows).ok_or_else(|| TensorError::Singular {
        point: point.to_vec(),
    })?;
    let g = JetTensor::lower(n, 2, order, |ix| rows[ix[0]][ix[1]].clone())
        .with_symmetries(vec![Symmetry::Symmetric(0, 1)]);
    // Symmetrize the inverse; elimination leaves rounding-level asymmetry.
    let g_inv = JetTensor::from_fn(n, vec![Variance::Upper; 2], order, |ix| {
        (&inv[ix[0]][ix[1]] + &inv[ix[1]][ix[0]]).scale(0.5)
    })
    .with_symmetries(vec![Symmetry::Symmetric(0, 1)]);
    Ok((g, g_inv))
}

fn need_order(what: &str, t: &JetTensor, needed: usize) -> Result<(), TensorError> {
    if t.order() < needed {
        Err(TensorError::InsufficientOrder {
            what: what.to_string(),
            needed,
            available: t.order(),
        })
    } else {
        Ok(())
    }
}

/// Levi-Civita connection `Γ^k_{ij}`, stored at slots `[k, i, j]`.
pub fn christoffel(g: &JetTensor, g_inv: &JetTensor) -> Result<JetTensor, TensorError> {
    need_order("Christoffel symbols", g, 1)?;
    let n = g.dim();
    let order = g.order() - 1;
    // dg[l][i][j] = ∂_l g_ij
    let mut dg = Vec::with_capacity(n);
    for l in 0..n {
        let mut m = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                m.push(g.get(&[i, j]).partial(l)?);
            }
        }
        dg.push(m);
    }
    let gi = g_inv.truncate(order)?;
    let zero = Jet::zero(n, order)?;
    // First kind: Γ_{ijl} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let first = |i: usize, j: usize, l: usize| -> Jet {
        let mut t = dg[i][j * n + l].clone();
        t.add_scaled(&dg[j][i * n + l], 1.0);
        t.add_scaled(&dg[l][i * n + j], -1.0);
        t.scale(0.5)
    };
    let mut firsts = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                firsts.push(first(i, j, l));
            }
        }
    }
    Ok(JetTensor::from_fn(
        n,
        vec![Variance::Upper, Variance::Lower, Variance::Lower],
        order,
        |ix| {
            let (k, i, j) = (ix[0], ix[1], ix[2]);
            let mut acc = zero.clone();
            for l in 0..n {
                gi.get(&[k, l]).mul_acc_into(&firsts[(i * n + j) * n + l], 1.0, &mut acc);
            }
            acc
        },
    )
    .with_symmetries(vec![Symmetry::Symmetric(1, 2)]))
}

/// `∇T`, with the derivative index appended as the last slot.
pub fn covariant_derivative(t: &JetTensor, gamma: &JetTensor) -> Result<JetTensor, TensorError> {
    need_order("covariant derivative", t, 1)?;
    let order = t.order() - 1;
    need_order("covariant derivative (connection)", gamma, order)?;
    let n = t.dim();
    let r = t.rank();
    let gam = gamma.truncate(order)?;
    let tt = t.truncate(order)?;
    let partials: Vec<Vec<Jet>> = (0..n)
        .map(|b| t.comps.iter().map(|c| c.partial(b)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let strides: Vec<usize> = (0..r).map(|s| n.pow((r - 1 - s) as u32)).collect();
    let mut variance = t.variance.clone();
    variance.push(Variance::Lower);
    let mut comps = Vec::with_capacity(t.comps.len() * n);
    for flat in 0..t.comps.len() {
        let idx = t.unflat(flat);
        for b in 0..n {
            let mut acc = partials[b][flat].clone();
            for s in 0..r {
                let base = flat - idx[s] * strides[s];
                for p in 0..n {
                    let other = &tt.comps[base + p * strides[s]];
                    match t.variance[s] {
                        Variance::Lower => {
                            gam.get(&[p, b, idx[s]]).mul_acc_into(other, -1.0, &mut acc)
                        }
                        Variance::Upper => {
                            gam.get(&[idx[s], b, p]).mul_acc_into(other, 1.0, &mut acc)
                        }
                    }
                }
            }
            comps.push(acc);
        }
    }
    Ok(JetTensor {
        dim: n,
        variance,
        order,
        comps,
        symmetries: t.symmetries.clone(),
    })
}

/// Trace over slots `a` and `b`, using `g^{-1}` for two lower slots and `g`
/// for two upper slots.
pub fn contract(
    t: &JetTensor,
    a: usize,
    b: usize,
    g: &JetTensor,
    g_inv: &JetTensor,
) -> Result<JetTensor, TensorError> {
    let r = t.rank();
    for s in [a, b] {
        if s >= r {
            return Err(TensorError::SlotOutOfRange { slot: s, rank: r });
        }
    }
    if a == b {
        return Err(TensorError::SlotOutOfRange { slot: b, rank: r });
    }
    let n = t.dim();
    let order = t.order();
    let metric = match (t.variance[a], t.variance[b]) {
        (Variance::Lower, Variance::Lower) => Some(g_inv.truncate(order)?),
        (Variance::Upper, Variance::Upper) => Some(g.truncate(order)?),
        _ => None,
    };
    let rest: Vec<usize> = (0..r).filter(|&s| s != a && s != b).collect();
    let variance = rest.iter().map(|&s| t.variance[s]).collect();
    let zero = Jet::zero(n, order)?;
    let mut full = vec![0usize; r];
    Ok(JetTensor::from_fn(n, variance, order, |idx| {
        for (k, &s) in rest.iter().enumerate() {
            full[s] = idx[k];
        }
        let mut acc = zero.clone();
        for p in 0..n {
            full[a] = p;
            match &metric {
                Some(m) => {
                    for q in 0..n {
                        full[b] = q;
                        let w = m.get(&[p, q]);
                        w.mul_acc_into(t.get(&full), 1.0, &mut acc);
                    }
                }
                None => {
                    full[b] = p;
                    acc.add_scaled(t.get(&full), 1.0);
                }
            }
        }
        acc
    }))
}

fn change_variance(
    t: &JetTensor,
    slot: usize,
    m: &JetTensor,
    from: Variance,
    to: Variance,
) -> Result<JetTensor, TensorError> {
    if slot >= t.rank() {
        return Err(TensorError::SlotOutOfRange { slot, rank: t.rank() });
    }
    if t.variance[slot] != from {
        return Err(TensorError::Variance);
    }
    let m = m.truncate(t.order())?;
    let n = t.dim();
    let mut variance = t.variance.clone();
    variance[slot] = to;
    let zero = Jet::zero(n, t.order())?;
    let mut src = vec![0usize; t.rank()];
    Ok(JetTensor::from_fn(n, variance, t.order(), |idx| {
        src.copy_from_slice(idx);
        let mut acc = zero.clone();
        for q in 0..n {
            src[slot] = q;
            m.get(&[idx[slot], q]).mul_acc_into(t.get(&src), 1.0, &mut acc);
        }
        acc
    }))
}

/// Raises a lower slot with `g^{-1}`.
pub fn raise(t: &JetTensor, slot: usize, g_inv: &JetTensor) -> Result<JetTensor, TensorError> {
    change_variance(t, slot, g_inv, Variance::Lower, Variance::Upper)
}

/// Lowers an upper slot with `g`.
pub fn lower(t: &JetTensor, slot: usize, g: &JetTensor) -> Result<JetTensor, TensorError> {
    change_variance(t, slot, g, Variance::Upper, Variance::Lower)
}

/// Metric, inverse and connection at one point, with the operations that
/// need all three.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub point: Vec<f64>,
    pub g: JetTensor,
    pub g_inv: JetTensor,
    pub gamma: JetTensor,
}

impl Geometry {
    pub fn new(point: Vec<f64>, g: JetTensor, g_inv: JetTensor) -> Result<Geometry, TensorError> {
        let gamma = christoffel(&g, &g_inv)?;
        Ok(Geometry {
            point,
            g,
            g_inv,
            gamma,
        })
    }

    pub fn from_spec(spec: &MetricSpec, point: &[f64], order: usize) -> Result<Geometry, TensorError> {
        let (g, g_inv) = metric_at(spec, point, order)?;
        Geometry::new(point.to_vec(), g, g_inv)
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Jet order of the metric.
    pub fn order(&self) -> usize {
        self.g.order()
    }

    pub fn nabla(&self, t: &JetTensor) -> Result<JetTensor, TensorError> {
        covariant_derivative(t, &self.gamma)
    }

    pub fn contract(&self, t: &JetTensor, a: usize, b: usize) -> Result<JetTensor, TensorError> {
        contract(t, a, b, &self.g, &self.g_inv)
    }

    /// `g^{ab} ∇_b T_{..a..}`: covariant derivative contracted against `slot`.
    pub fn divergence(&self, t: &JetTensor, slot: usize) -> Result<JetTensor, TensorError> {
        let d = self.nabla(t)?;
        let last = d.rank() - 1;
        self.contract(&d, slot, last)
    }

    /// Full contraction `A_{i..} B^{i..}` of two lower tensors of equal rank.
    pub fn inner(&self, a: &JetTensor, b: &JetTensor) -> Result<JetTensor, TensorError> {
        assert_eq!(a.rank(), b.rank());
        let order = a.order().min(b.order());
        let mut raised = b.truncate(order)?;
        for s in 0..raised.rank() {
            raised = raise(&raised, s, &self.g_inv)?;
        }
        let a = a.truncate(order)?;
        let mut acc = Jet::zero(self.dim(), order)?;
        for (x, y) in a.comps.iter().zip(&raised.comps) {
            x.mul_acc_into(y, 1.0, &mut acc);
        }
        Ok(JetTensor::scalar(acc))
    }

    /// Metric truncated to `order`.
    pub fn g_at(&self, order: usize) -> Result<JetTensor, TensorError> {
        self.g.truncate(order)
    }

    pub fn g_inv_at(&self, order: usize) -> Result<JetTensor, TensorError> {
        self.g_inv.truncate(order)
    }
}
