//! Truncated multivariate Taylor series ("jets").
//!
//! A [`Jet`] holds the Taylor coefficients `∂^α f(p) / α!` of a scalar
//! function at a point, for every multi-index `α` up to a fixed total
//! order. Arithmetic is closed over a fixed `(dim, order)` pair; the
//! per-pair layout (index ordering, multiplication table, derivative maps)
//! is built once and shared by every jet with that shape.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use thiserror::Error;

/// Largest supported number of variables.
pub const MAX_DIM: usize = 5;
/// Largest supported truncation order.
pub const MAX_ORDER: usize = 7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet dimension {0} outside [1, {MAX_DIM}]")]
    DimOutOfRange(usize),
    #[error("jet order {0} outside [0, {MAX_ORDER}]")]
    OrderOutOfRange(usize),
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("shape mismatch: ({0}, {1}) vs ({2}, {3})")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("division by a jet with zero constant term (pole)")]
    Pole,
    #[error("{func} undefined at constant term {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("multi-index degree {degree} exceeds jet order {order}")]
    DegreeExceeded { degree: usize, order: usize },
}

/// Exponent vector of a monomial `x^α`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(exponents: impl Into<Vec<u8>>) -> Self {
        MultiIndex(exponents.into())
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    /// `α! = Π α_i!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e as usize)).product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Number of coefficients of a jet, `C(dim + order, dim)`.
pub fn coeff_count(dim: usize, order: usize) -> usize {
    binomial(dim + order, dim)
}

/// Shared, immutable description of the coefficient layout for one
/// `(dim, order)` pair.
pub(crate) struct Layout {
    dim: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<Vec<u8>, usize>,
    mul_start: Vec<usize>,
    mul_rhs: Vec<u32>,
    mul_out: Vec<u32>,
    /// `deriv[axis][t] = (s, m)`: coefficient `t` of `∂_axis a` (one order
    /// lower) is `m * a[s]`.
    deriv: Vec<Vec<(u32, f64)>>,
}

/// Monomials of exact degree `deg` in `dim` variables, lexicographically
/// descending (first exponent largest first).
fn monomials_of_degree(dim: usize, deg: usize) -> Vec<Vec<u8>> {
    if dim == 1 {
        return vec![vec![deg as u8]];
    }
    let mut out = Vec::new();
    for first in (0..=deg).rev() {
        for mut tail in monomials_of_degree(dim - 1, deg - first) {
            tail.insert(0, first as u8);
            out.push(tail);
        }
    }
    out
}

impl Layout {
    fn build(dim: usize, order: usize) -> Layout {
        let mut indices = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(indices.len());
            indices.extend(monomials_of_degree(dim, d).into_iter().map(MultiIndex));
        }
        degree_start.push(indices.len());
        let lookup: HashMap<Vec<u8>, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, m)| (m.0.clone(), i))
            .collect();

        let mut mul_start = Vec::with_capacity(indices.len() + 1);
        let mut mul_rhs = Vec::new();
        let mut mul_out = Vec::new();
        let mut sum = vec![0u8; dim];
        for a in &indices {
            mul_start.push(mul_rhs.len());
            let room = order - a.degree();
            for (j, b) in indices[..degree_start[room + 1]].iter().enumerate() {
                for k in 0..dim {
                    sum[k] = a.0[k] + b.0[k];
                }
                mul_rhs.push(j as u32);
                mul_out.push(lookup[&sum] as u32);
            }
        }
        mul_start.push(mul_rhs.len());

        let lower_len = if order == 0 { 0 } else { degree_start[order] };
        let deriv = (0..dim)
            .map(|axis| {
                (0..lower_len)
                    .map(|t| {
                        let mut e = indices[t].0.clone();
                        e[axis] += 1;
                        (lookup[&e] as u32, e[axis] as f64)
                    })
                    .collect()
            })
            .collect();

        Layout {
            dim,
            order,
            indices,
            lookup,
            mul_start,
            mul_rhs,
            mul_out,
            deriv,
        }
    }

    fn len(&self) -> usize {
        self.indices.len()
    }
}

static LAYOUTS: [[OnceLock<Layout>; MAX_ORDER + 1]; MAX_DIM] =
    [const { [const { OnceLock::new() }; MAX_ORDER + 1] }; MAX_DIM];

fn layout(dim: usize, order: usize) -> Result<&'static Layout, JetError> {
    if dim == 0 || dim > MAX_DIM {
        return Err(JetError::DimOutOfRange(dim));
    }
    if order > MAX_ORDER {
        return Err(JetError::OrderOutOfRange(order));
    }
    Ok(LAYOUTS[dim - 1][order].get_or_init(|| Layout::build(dim, order)))
}

/// Scalar functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnaryFn {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
    Atan,
    Neg,
    Recip,
    PowI(i32),
    PowF(f64),
}

/// A truncated Taylor expansion of a scalar function at a point.
///
/// Coefficients are Taylor-normalized (`∂^α f / α!`) and stored densely in
/// graded-lexicographic order.
#[derive(Clone)]
pub struct Jet {
    layout: &'static Layout,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim())
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other) && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn constant(c: f64, dim: usize, order: usize) -> Result<Jet, JetError> {
        let layout = layout(dim, order)?;
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = c;
        Ok(Jet { layout, coeffs })
    }

    pub fn zero(dim: usize, order: usize) -> Result<Jet, JetError> {
        Jet::constant(0.0, dim, order)
    }

    /// The coordinate function `x_axis` expanded about `value`.
    pub fn variable(axis: usize, value: f64, dim: usize, order: usize) -> Result<Jet, JetError> {
        if axis >= dim {
            return Err(JetError::AxisOutOfRange { axis, dim });
        }
        let mut j = Jet::constant(value, dim, order)?;
        if order >= 1 {
            j.coeffs[1 + axis] = 1.0;
        }
        Ok(j)
    }

    /// Builds a jet from Taylor-normalized coefficients in layout order.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet, JetError> {
        let layout = layout(dim, order)?;
        if coeffs.len() != layout.len() {
            return Err(JetError::ShapeMismatch(dim, order, dim, coeffs.len()));
        }
        Ok(Jet { layout, coeffs })
    }

    /// A zero jet with the same shape as `self`.
    pub fn zeros_like(&self) -> Jet {
        Jet {
            layout: self.layout,
            coeffs: vec![0.0; self.layout.len()],
        }
    }

    /// A constant jet with the same shape as `self`.
    pub fn constant_like(&self, c: f64) -> Jet {
        let mut j = self.zeros_like();
        j.coeffs[0] = c;
        j
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Multi-indices in storage order.
    pub fn multi_indices(&self) -> &[MultiIndex] {
        &self.layout.indices
    }

    /// Constant term, i.e. the function value at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn same_shape(&self, other: &Jet) -> bool {
        std::ptr::eq(self.layout, other.layout)
    }

    fn check_shape(&self, other: &Jet) -> Result<(), JetError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(JetError::ShapeMismatch(
                self.dim(),
                self.order(),
                other.dim(),
                other.order(),
            ))
        }
    }

    fn index_of(&self, alpha: &MultiIndex) -> Result<usize, JetError> {
        if alpha.dim() != self.dim() {
            return Err(JetError::ShapeMismatch(self.dim(), self.order(), alpha.dim(), 0));
        }
        if alpha.degree() > self.order() {
            return Err(JetError::DegreeExceeded {
                degree: alpha.degree(),
                order: self.order(),
            });
        }
        Ok(self.layout.lookup[&alpha.0])
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn coeff(&self, alpha: &MultiIndex) -> Result<f64, JetError> {
        Ok(self.coeffs[self.index_of(alpha)?])
    }

    /// Raw partial derivative `∂^α f` at the expansion point.
    pub fn raw_partial(&self, alpha: &MultiIndex) -> Result<f64, JetError> {
        Ok(self.coeff(alpha)? * alpha.factorial())
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Result<Jet, JetError> {
        if order > self.order() {
            return Err(JetError::DegreeExceeded {
                degree: order,
                order: self.order(),
            });
        }
        if order == self.order() {
            return Ok(self.clone());
        }
        let layout = layout(self.dim(), order)?;
        Ok(Jet {
            layout,
            coeffs: self.coeffs[..layout.len()].to_vec(),
        })
    }

    /// `∂_axis` of the expansion; the result is one order lower.
    pub fn partial(&self, axis: usize) -> Result<Jet, JetError> {
        if axis >= self.dim() {
            return Err(JetError::AxisOutOfRange {
                axis,
                dim: self.dim(),
            });
        }
        if self.order() == 0 {
            return Err(JetError::OrderOutOfRange(0));
        }
        let layout = layout(self.dim(), self.order() - 1)?;
        let coeffs = self.layout.deriv[axis]
            .iter()
            .map(|&(s, m)| m * self.coeffs[s as usize])
            .collect();
        Ok(Jet { layout, coeffs })
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn checked_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        let mut out = self.zeros_like();
        self.mul_acc_into(other, 1.0, &mut out);
        Ok(out)
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        self.checked_mul(&other.recip()?)
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        Jet {
            layout: self.layout,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `out += scale * self * other` (truncated product). Shapes must match.
    pub fn mul_acc_into(&self, other: &Jet, scale: f64, out: &mut Jet) {
        assert!(
            self.same_shape(other) && self.same_shape(out),
            "jet shape mismatch in product"
        );
        let l = self.layout;
        let b = &other.coeffs;
        let o = &mut out.coeffs;
        for (i, &ai) in self.coeffs.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            let ai = ai * scale;
            let (s, e) = (l.mul_start[i], l.mul_start[i + 1]);
            for (&j, &k) in l.mul_rhs[s..e].iter().zip(&l.mul_out[s..e]) {
                o[k as usize] += ai * b[j as usize];
            }
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Jet, scale: f64) {
        assert!(self.same_shape(other), "jet shape mismatch in sum");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            layout: self.layout,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += c;
        j
    }

    /// `Σ_k series[k] h^k` by Horner's rule, where `h` is `self` with its
    /// constant term removed. `series` is the univariate Taylor expansion
    /// of some function about `self.value()`.
    pub fn compose_series(&self, series: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let top = series.len().min(self.order() + 1);
        if top == 0 {
            return self.zeros_like();
        }
        let mut acc = self.constant_like(series[top - 1]);
        for k in (0..top - 1).rev() {
            let mut next = self.constant_like(series[k]);
            acc.mul_acc_into(&h, 1.0, &mut next);
            acc = next;
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        self.unary(UnaryFn::Recip)
    }

    pub fn exp(&self) -> Jet {
        self.compose_series(&exp_series(self.value(), self.order()))
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        self.unary(UnaryFn::Log)
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.unary(UnaryFn::Sqrt)
    }

    pub fn powi(&self, k: i32) -> Result<Jet, JetError> {
        self.unary(UnaryFn::PowI(k))
    }

    /// Composition `fn ∘ self`.
    pub fn unary(&self, func: UnaryFn) -> Result<Jet, JetError> {
        let a0 = self.value();
        let k = self.order();
        let series = match func {
            UnaryFn::Exp => exp_series(a0, k),
            UnaryFn::Log => {
                if a0 <= 0.0 {
                    return Err(JetError::Domain { func: "log", value: a0 });
                }
                log_series(a0, k)
            }
            UnaryFn::Sin => trig_series(a0, k, false),
            UnaryFn::Cos => trig_series(a0, k, true),
            UnaryFn::Sinh => hyp_series(a0, k, false),
            UnaryFn::Cosh => hyp_series(a0, k, true),
            UnaryFn::Tanh => {
                let s = hyp_series(a0, k, false);
                let c = hyp_series(a0, k, true);
                series_mul(&s, &series_recip(&c))
            }
            UnaryFn::Sqrt => {
                if a0 <= 0.0 {
                    return Err(JetError::Domain { func: "sqrt", value: a0 });
                }
                binomial_series(a0, 0.5, k)
            }
            UnaryFn::Atan => {
                let q = [1.0 + a0 * a0, 2.0 * a0, 1.0];
                let mut q = q[..q.len().min(k + 1)].to_vec();
                q.resize(k + 1, 0.0);
                let d = series_recip(&q);
                let mut s = vec![a0.atan()];
                s.extend((1..=k).map(|i| d[i - 1] / i as f64));
                s
            }
            UnaryFn::Neg => return Ok(self.scale(-1.0)),
            UnaryFn::Recip => {
                if a0 == 0.0 {
                    return Err(JetError::Pole);
                }
                let mut s = Vec::with_capacity(k + 1);
                let mut t = 1.0 / a0;
                for _ in 0..=k {
                    s.push(t);
                    t *= -1.0 / a0;
                }
                s
            }
            UnaryFn::PowI(p) => return self.powi_impl(p),
            UnaryFn::PowF(r) => {
                if a0 <= 0.0 {
                    return Err(JetError::Domain { func: "powf", value: a0 });
                }
                return Ok(self.ln()?.scale(r).exp());
            }
        };
        Ok(self.compose_series(&series))
    }

    fn powi_impl(&self, p: i32) -> Result<Jet, JetError> {
        if p < 0 {
            return self.recip()?.powi_impl(-p);
        }
        let mut result = self.constant_like(1.0);
        let mut base = self.clone();
        let mut e = p as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }
}

fn exp_series(a0: f64, k: usize) -> Vec<f64> {
    let e = a0.exp();
    (0..=k).map(|i| e / factorial(i)).collect()
}

fn log_series(a0: f64, k: usize) -> Vec<f64> {
    let mut s = vec![a0.ln()];
    let mut p = 1.0;
    for i in 1..=k {
        p /= a0;
        let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        s.push(sign * p / i as f64);
    }
    s
}

fn trig_series(a0: f64, k: usize, cosine: bool) -> Vec<f64> {
    let (s, c) = a0.sin_cos();
    let cycle = if cosine { [c, -s, -c, s] } else { [s, c, -s, -c] };
    (0..=k).map(|i| cycle[i % 4] / factorial(i)).collect()
}

fn hyp_series(a0: f64, k: usize, cosh: bool) -> Vec<f64> {
    let (s, c) = (a0.sinh(), a0.cosh());
    (0..=k)
        .map(|i| {
            let even = i % 2 == 0;
            let v = if even == cosh { c } else { s };
            v / factorial(i)
        })
        .collect()
}

/// Coefficients of `(a0 + h)^r` in powers of `h`.
fn binomial_series(a0: f64, r: f64, k: usize) -> Vec<f64> {
    let mut s = Vec::with_capacity(k + 1);
    let mut binom = 1.0;
    for i in 0..=k {
        s.push(binom * a0.powf(r - i as f64));
        binom *= (r - i as f64) / (i as f64 + 1.0);
    }
    s
}

fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
        .collect()
}

fn series_recip(a: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; a.len()];
    r[0] = 1.0 / a[0];
    for k in 1..a.len() {
        let s: f64 = (1..=k).map(|j| a[j] * r[k - j]).sum();
        r[k] = -s / a[0];
    }
    r
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.checked_add(rhs).expect("jet shape mismatch")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.checked_sub(rhs).expect("jet shape mismatch")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.checked_mul(rhs).expect("jet shape mismatch")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mi(e: &[u8]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn constant_jets() {
        let j = Jet::constant(5.0, 2, 2).unwrap();
        assert_eq!(j.coeffs().len(), 6);
        assert_eq!(j.coeff(&mi(&[0, 0])).unwrap(), 5.0);
        assert!(j.coeffs()[1..].iter().all(|&c| c == 0.0));
        assert!(Jet::constant(0.0, 3, 1).unwrap().coeffs().iter().all(|&c| c == 0.0));
        let one = Jet::constant(1.0, 1, 7).unwrap();
        let x = Jet::variable(0, 0.3, 1, 7).unwrap();
        assert_eq!(&one * &x, x);
    }

    #[test]
    fn range_errors() {
        assert_eq!(Jet::constant(1.0, 0, 2), Err(JetError::DimOutOfRange(0)));
        assert_eq!(Jet::constant(1.0, 6, 2), Err(JetError::DimOutOfRange(6)));
        assert_eq!(Jet::constant(1.0, 2, 8), Err(JetError::OrderOutOfRange(8)));
        assert_eq!(
            Jet::variable(2, 0.0, 2, 1),
            Err(JetError::AxisOutOfRange { axis: 2, dim: 2 })
        );
    }

    #[test]
    fn coefficient_count_matches_binomial() {
        for dim in 1..=MAX_DIM {
            for order in 0..=MAX_ORDER {
                let j = Jet::zero(dim, order).unwrap();
                assert_eq!(j.coeffs().len(), coeff_count(dim, order));
            }
        }
        assert_eq!(coeff_count(5, 7), 792);
    }

    #[test]
    fn variables() {
        let x = Jet::variable(0, 3.0, 1, 2).unwrap();
        assert_eq!(x.coeffs(), &[3.0, 1.0, 0.0]);
        let y = Jet::variable(1, -2.0, 2, 1).unwrap();
        assert_eq!(y.coeff(&mi(&[0, 0])).unwrap(), -2.0);
        assert_eq!(y.coeff(&mi(&[0, 1])).unwrap(), 1.0);
        assert_eq!(y.coeff(&mi(&[1, 0])).unwrap(), 0.0);
        let sq = &x * &x;
        assert_eq!(sq.coeffs(), &[9.0, 6.0, 1.0]);
        assert_eq!(sq.raw_partial(&mi(&[2])).unwrap(), 2.0);
        assert_eq!(sq.raw_partial(&mi(&[0])).unwrap(), 9.0);
    }

    #[test]
    fn products_and_quotients() {
        let x = Jet::variable(0, 0.0, 1, 2).unwrap();
        let one = x.constant_like(1.0);
        let p = &(&one + &x) * &(&one - &x);
        assert_eq!(p.coeffs(), &[1.0, 0.0, -1.0]);

        let x3 = Jet::variable(0, 0.0, 1, 3).unwrap();
        let g = x3.constant_like(1.0).checked_div(&(&x3.constant_like(1.0) - &x3)).unwrap();
        assert_eq!(g.coeffs(), &[1.0, 1.0, 1.0, 1.0]);

        assert_eq!(x3.checked_div(&x3), Err(JetError::Pole));
        let mismatch = Jet::zero(1, 2).unwrap().checked_add(&x3);
        assert!(matches!(mismatch, Err(JetError::ShapeMismatch(..))));
    }

    #[test]
    fn unary_series() {
        let x = Jet::variable(0, 0.0, 1, 3).unwrap();
        let e = x.exp();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0];
        for (c, w) in e.coeffs().iter().zip(want) {
            assert!((c - w).abs() < 1e-15);
        }

        let x4 = Jet::variable(0, 0.0, 1, 4).unwrap();
        let l = (&x4 * &x4).add_const(1.0).ln().unwrap();
        let want = [0.0, 0.0, 1.0, 0.0, -0.5];
        for (c, w) in l.coeffs().iter().zip(want) {
            assert!((c - w).abs() < 1e-15, "{:?}", l.coeffs());
        }

        let four = Jet::constant(4.0, 2, 3).unwrap();
        assert_eq!(four.sqrt().unwrap(), Jet::constant(2.0, 2, 3).unwrap());

        let e5 = Jet::variable(0, 0.0, 1, 5).unwrap().exp();
        assert!((e5.raw_partial(&mi(&[5])).unwrap() - 1.0).abs() < 1e-13);
        assert!(matches!(
            e5.raw_partial(&mi(&[6])),
            Err(JetError::DegreeExceeded { .. })
        ));
    }

    #[test]
    fn domain_errors() {
        let z = Jet::variable(0, 0.0, 1, 2).unwrap();
        assert!(matches!(z.ln(), Err(JetError::Domain { func: "log", .. })));
        assert!(matches!(z.sqrt(), Err(JetError::Domain { func: "sqrt", .. })));
        assert!(matches!(z.unary(UnaryFn::PowF(0.5)), Err(JetError::Domain { .. })));
        assert_eq!(z.powi(-1), Err(JetError::Pole));
    }

    #[test]
    fn partial_lowers_order() {
        // f = x^2 y at (1, 2): ∂_x f = 2xy -> value 4, ∂_y(∂_x f) = 2x -> 2.
        let x = Jet::variable(0, 1.0, 2, 3).unwrap();
        let y = Jet::variable(1, 2.0, 2, 3).unwrap();
        let f = &(&x * &x) * &y;
        let fx = f.partial(0).unwrap();
        assert_eq!(fx.order(), 2);
        assert_eq!(fx.value(), 4.0);
        assert_eq!(fx.partial(1).unwrap().value(), 2.0);
    }

    #[test]
    fn trig_and_atan_values() {
        let x = Jet::variable(0, 0.7, 1, 4).unwrap();
        let s = x.unary(UnaryFn::Sin).unwrap();
        let c = x.unary(UnaryFn::Cos).unwrap();
        let one = &(&s * &s) + &(&c * &c);
        for (i, v) in one.coeffs().iter().enumerate() {
            let want = if i == 0 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-14);
        }
        // d/dx atan(x) = 1/(1+x^2)
        let a = x.unary(UnaryFn::Atan).unwrap();
        assert!((a.coeffs()[1] - 1.0 / (1.0 + 0.49)).abs() < 1e-15);
        // tanh' = 1 - tanh^2
        let t = x.unary(UnaryFn::Tanh).unwrap();
        assert!((t.coeffs()[1] - (1.0 - 0.7f64.tanh().powi(2))).abs() < 1e-15);
    }

    fn arb_jet(dim: usize, order: usize) -> impl Strategy<Value = Jet> {
        proptest::collection::vec(-1.0f64..1.0, coeff_count(dim, order))
            .prop_map(move |c| Jet::from_coeffs(dim, order, c).unwrap())
    }

    fn rel_close(a: &Jet, b: &Jet, tol: f64) -> bool {
        let scale = 1.0 + a.max_abs().max(b.max_abs());
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .all(|(x, y)| (x - y).abs() <= tol * scale)
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_jet(3, 4), b in arb_jet(3, 4), c in arb_jet(3, 4)) {
            prop_assert!(rel_close(&(&a * &b), &(&b * &a), 1e-13));
            prop_assert!(rel_close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-13));
            prop_assert!(rel_close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)), 1e-13));
        }

        #[test]
        fn division_inverts_multiplication(a in arb_jet(2, 5), b in arb_jet(2, 5), c0 in 1e-3f64..1.0, neg in any::<bool>()) {
            let mut a = a;
            let c0 = if neg { -c0 } else { c0 };
            let mut coeffs = a.coeffs().to_vec();
            coeffs[0] = c0;
            a = Jet::from_coeffs(2, 5, coeffs).unwrap();
            // Quotient coefficients grow like |c0|^{-order}; compare at that scale.
            let q = b.checked_div(&a).unwrap();
            let back = &a * &q;
            let scale = 1.0 + q.max_abs() * a.max_abs();
            for (x, y) in back.coeffs().iter().zip(b.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn exp_after_log_is_identity(a in arb_jet(2, 6), c0 in 0.5f64..3.0) {
            let mut coeffs = a.coeffs().to_vec();
            coeffs[0] = c0;
            let a = Jet::from_coeffs(2, 6, coeffs).unwrap();
            let back = a.ln().unwrap().exp();
            prop_assert!(rel_close(&back, &a, 1e-12));
        }
    }
}
