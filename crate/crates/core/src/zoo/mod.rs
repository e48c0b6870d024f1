//! Built-in witness manifolds with their known flags and constants.
//!
//! Names accepted by [`builtin`]:
//!
//! | name | geometry |
//! |---|---|
//! | `euclidean_gaussian(n, λ)`, `euclidean_gaussianN` | flat `ℝⁿ`, `f = λ|x|²/2` (default `λ = ½`) |
//! | `round_sphere(n)`, `round_sphereN` | unit `Sⁿ`, stereographic, `f = 0`, `λ = n − 1` |
//! | `cylinder_shrinker(n)`, `cylinder_shrinkerN` | `ℝ × Sⁿ⁻¹(r)`, `r² = 2(n − 2)`, `f = s²/4`, `λ = ½` |
//! | `cigar` | `(dx² + dy²)/(1 + x² + y²)`, `f = −log(1 + x² + y²)`, `λ = 0` |
//! | `cigar_cross_line` | `ds² +` cigar in `(x2, x3)` |
//! | `cigar_cross_circle(L)` | same, with `s` periodic of period `L` (default `2π`) |
//! | `bryant` | rotationally symmetric steady soliton, numerical profile |
//!
//! The line or circle coordinate is always `x1`.

pub mod bryant;

use std::fmt;

use thiserror::Error;

use crate::curvature::CurvatureBundle;
use crate::expr::Expr;
use crate::report::{CheckReport, Tolerances};
use crate::soliton::{soliton_suite, SolitonBundle};
use crate::tensor::{ChartBox, MetricSpec, TensorError};

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("unknown zoo entry `{0}`")]
    UnknownName(String),
    #[error("bad parameters for `{name}`: {message}")]
    BadParams { name: String, message: String },
    #[error("`{0}` has no closed form and cannot be exported")]
    NotClosedForm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolitonType {
    Shrinking,
    Steady,
    Expanding,
    /// `f` constant: the soliton equation reduces to `Ric = λg`.
    Einstein,
}

impl fmt::Display for SolitonType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolitonType::Shrinking => "shrinking",
            SolitonType::Steady => "steady",
            SolitonType::Expanding => "expanding",
            SolitonType::Einstein => "Einstein",
        })
    }
}

/// `None` means the flag does not apply (e.g. Cotton in dimension 2).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExpectedFlags {
    pub is_flat: Option<bool>,
    pub weyl_zero: Option<bool>,
    pub cotton_zero: Option<bool>,
    pub d_zero: Option<bool>,
}

/// Values at the chart origin `x = 0` (the tip, for the cigar family and
/// the Bryant profile).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KnownConstants {
    pub scalar_at_origin: Option<f64>,
    pub hamilton_c: Option<f64>,
    pub div3_cotton_at_origin: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum ZooGeometry {
    ClosedForm(MetricSpec),
    Bryant,
}

#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub name: String,
    pub geometry: ZooGeometry,
    pub soliton_type: SolitonType,
    pub flags: ExpectedFlags,
    pub constants: KnownConstants,
    /// `(axis, period)` for periodic coordinates.
    pub period: Option<(usize, f64)>,
}

impl ZooEntry {
    pub fn spec(&self) -> Option<&MetricSpec> {
        match &self.geometry {
            ZooGeometry::ClosedForm(s) => Some(s),
            ZooGeometry::Bryant => None,
        }
    }

    /// Name, type, flags and constants on one line each.
    pub fn describe(&self) -> String {
        let flag = |v: Option<bool>| match v {
            Some(true) => "yes",
            Some(false) => "no",
            None => "n/a",
        };
        let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x}"));
        format!(
            "name\t{}\ntype\t{}\nflat\t{}\nweyl_zero\t{}\ncotton_zero\t{}\nd_zero\t{}\nscalar_at_origin\t{}\nhamilton_c\t{}\ndiv3_cotton_at_origin\t{}\n",
            self.name,
            self.soliton_type,
            flag(self.flags.is_flat),
            flag(self.flags.weyl_zero),
            flag(self.flags.cotton_zero),
            flag(self.flags.d_zero),
            num(self.constants.scalar_at_origin),
            num(self.constants.hamilton_c),
            num(self.constants.div3_cotton_at_origin),
        )
    }
}

fn p(text: &str) -> Expr {
    Expr::parse(text).expect("zoo expressions are valid")
}

fn coords_sq(range: std::ops::RangeInclusive<usize>) -> String {
    range.map(|i| format!("x{i}^2")).collect::<Vec<_>>().join(" + ")
}

fn diag_spec(dim: usize, diag: impl Fn(usize) -> Expr, potential: Expr, lambda: f64, domain: ChartBox) -> MetricSpec {
    MetricSpec::new(
        dim,
        |i, j| if i == j { diag(i) } else { Expr::Num(0.0) },
        potential,
        lambda,
        Some(domain),
    )
    .expect("zoo specs are valid")
}

fn bad(name: &str, message: impl Into<String>) -> ZooError {
    ZooError::BadParams {
        name: name.to_string(),
        message: message.into(),
    }
}

fn check_dim(name: &str, n: usize, min: usize) -> Result<(), ZooError> {
    if n < min || n > 5 {
        Err(bad(name, format!("dimension {n} outside [{min}, 5]")))
    } else {
        Ok(())
    }
}

pub fn euclidean_gaussian(n: usize, lambda: f64) -> Result<ZooEntry, ZooError> {
    let name = "euclidean_gaussian";
    check_dim(name, n, 2)?;
    let potential = if lambda == 0.0 {
        Expr::Num(0.0)
    } else {
        p(&format!("{:?}*({})", lambda / 2.0, coords_sq(1..=n)))
    };
    let soliton_type = match lambda {
        l if l > 0.0 => SolitonType::Shrinking,
        l if l < 0.0 => SolitonType::Expanding,
        _ => SolitonType::Einstein,
    };
    let ge3 = (n >= 3).then_some(true);
    Ok(ZooEntry {
        name: format!("euclidean_gaussian({n}, {lambda})"),
        geometry: ZooGeometry::ClosedForm(diag_spec(n, |_| Expr::Num(1.0), potential, lambda, ChartBox::cube(n, 2.0))),
        soliton_type,
        flags: ExpectedFlags {
            is_flat: Some(true),
            weyl_zero: ge3,
            cotton_zero: ge3,
            d_zero: ge3,
        },
        constants: KnownConstants {
            scalar_at_origin: Some(0.0),
            hamilton_c: Some(0.0),
            div3_cotton_at_origin: (n >= 3).then_some(0.0),
        },
        period: None,
    })
}

pub fn round_sphere(n: usize) -> Result<ZooEntry, ZooError> {
    check_dim("round_sphere", n, 2)?;
    let factor = p(&format!("4/(1 + {})^2", coords_sq(1..=n)));
    let nf = n as f64;
    let ge3 = (n >= 3).then_some(true);
    Ok(ZooEntry {
        name: format!("round_sphere({n})"),
        geometry: ZooGeometry::ClosedForm(diag_spec(n, |_| factor.clone(), Expr::Num(0.0), nf - 1.0, ChartBox::cube(n, 2.0))),
        soliton_type: SolitonType::Einstein,
        flags: ExpectedFlags {
            is_flat: Some(false),
            weyl_zero: ge3,
            cotton_zero: ge3,
            d_zero: ge3,
        },
        constants: KnownConstants {
            scalar_at_origin: Some(nf * (nf - 1.0)),
            hamilton_c: Some(nf * (nf - 1.0)),
            div3_cotton_at_origin: (n >= 3).then_some(0.0),
        },
        period: None,
    })
}

/// `ℝ × Sⁿ⁻¹(r)` with `r² = 2(n − 2)`, so that `Ric = ½ g` on the sphere
/// factor; the sphere factor is stereographic in `x2..xn`.
pub fn cylinder_shrinker(n: usize) -> Result<ZooEntry, ZooError> {
    check_dim("cylinder_shrinker", n, 3)?;
    let nf = n as f64;
    let r2 = 2.0 * (nf - 2.0);
    let factor = p(&format!("{:?}/(1 + {})^2", 4.0 * r2, coords_sq(2..=n)));
    let mut lo = vec![-2.0; n];
    let mut hi = vec![2.0; n];
    lo[0] = -3.0;
    hi[0] = 3.0;
    // R = (n−1)(n−2)/r² = (n−1)/2; |∇f|² − 2λf = s²/4 − s²/4 = 0.
    let r = (nf - 1.0) / 2.0;
    Ok(ZooEntry {
        name: format!("cylinder_shrinker({n})"),
        geometry: ZooGeometry::ClosedForm(diag_spec(
            n,
            |i| if i == 0 { Expr::Num(1.0) } else { factor.clone() },
            p("x1^2/4"),
            0.5,
            ChartBox::new(lo, hi).unwrap(),
        )),
        soliton_type: SolitonType::Shrinking,
        flags: ExpectedFlags {
            is_flat: Some(false),
            weyl_zero: Some(true),
            cotton_zero: Some(true),
            d_zero: Some(true),
        },
        constants: KnownConstants {
            scalar_at_origin: Some(r),
            hamilton_c: Some(r),
            div3_cotton_at_origin: Some(0.0),
        },
        period: None,
    })
}

pub fn cigar() -> ZooEntry {
    ZooEntry {
        name: "cigar".to_string(),
        geometry: ZooGeometry::ClosedForm(diag_spec(
            2,
            |_| p("1/(1 + x1^2 + x2^2)"),
            p("-log(1 + x1^2 + x2^2)"),
            0.0,
            ChartBox::cube(2, 2.0),
        )),
        soliton_type: SolitonType::Steady,
        flags: ExpectedFlags {
            is_flat: Some(false),
            ..Default::default()
        },
        constants: KnownConstants {
            scalar_at_origin: Some(4.0),
            hamilton_c: Some(4.0),
            div3_cotton_at_origin: None,
        },
        period: None,
    }
}

fn cigar_product(name: String, s_range: (f64, f64), period: Option<f64>) -> ZooEntry {
    ZooEntry {
        name,
        geometry: ZooGeometry::ClosedForm(diag_spec(
            3,
            |i| {
                if i == 0 {
                    Expr::Num(1.0)
                } else {
                    p("1/(1 + x2^2 + x3^2)")
                }
            },
            p("-log(1 + x2^2 + x3^2)"),
            0.0,
            ChartBox::new(vec![s_range.0, -2.0, -2.0], vec![s_range.1, 2.0, 2.0]).unwrap(),
        )),
        soliton_type: SolitonType::Steady,
        flags: ExpectedFlags {
            is_flat: Some(false),
            weyl_zero: Some(true),
            cotton_zero: Some(false),
            d_zero: Some(false),
        },
        constants: KnownConstants {
            scalar_at_origin: Some(4.0),
            hamilton_c: Some(4.0),
            // R(O)³/8 with R(O) = 4.
            div3_cotton_at_origin: Some(8.0),
        },
        period: period.map(|l| (0, l)),
    }
}

pub fn cigar_cross_line() -> ZooEntry {
    cigar_product("cigar_cross_line".to_string(), (-1.0, 1.0), None)
}

pub fn cigar_cross_circle(period: f64) -> Result<ZooEntry, ZooError> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(bad("cigar_cross_circle", format!("period must be positive, got {period}")));
    }
    Ok(cigar_product(
        format!("cigar_cross_circle({period})"),
        (0.0, period),
        Some(period),
    ))
}

pub fn bryant_entry() -> ZooEntry {
    ZooEntry {
        name: "bryant".to_string(),
        geometry: ZooGeometry::Bryant,
        soliton_type: SolitonType::Steady,
        flags: ExpectedFlags {
            is_flat: Some(false),
            weyl_zero: Some(true),
            cotton_zero: Some(true),
            d_zero: Some(true),
        },
        constants: KnownConstants {
            scalar_at_origin: Some(1.0),
            hamilton_c: Some(1.0),
            div3_cotton_at_origin: Some(0.0),
        },
        period: None,
    }
}

/// A deliberate non-soliton: the `cigar_cross_line` metric with
/// `f = x1² + x2² + x3²`. Its Cotton tensor is nonzero but differs from the
/// `D` tensor built from this `f`, so the Cotton/Weyl/`D` condition fails.
pub fn negative_control() -> ZooEntry {
    let mut e = cigar_cross_line();
    e.name = "negative_control".to_string();
    if let ZooGeometry::ClosedForm(s) = &mut e.geometry {
        s.potential = p("x1^2 + x2^2 + x3^2");
    }
    e.constants = KnownConstants::default();
    e.flags = ExpectedFlags::default();
    e
}

/// Every built-in soliton with its default parameters.
pub fn all_names() -> Vec<&'static str> {
    vec![
        "euclidean_gaussian2",
        "euclidean_gaussian3",
        "euclidean_gaussian4",
        "euclidean_gaussian5",
        "round_sphere2",
        "round_sphere3",
        "round_sphere4",
        "round_sphere5",
        "cylinder_shrinker3",
        "cylinder_shrinker4",
        "cylinder_shrinker5",
        "cigar",
        "cigar_cross_line",
        "cigar_cross_circle",
        "bryant",
    ]
}

fn parse_args(name: &str, args: &str) -> Result<Vec<f64>, ZooError> {
    args.split(',')
        .map(|a| {
            let a = a.trim();
            a.parse::<f64>()
                .or_else(|_| Expr::parse(a).ok().and_then(|e| e.eval(&[]).ok()).ok_or(()))
                .map_err(|_| bad(name, format!("cannot read `{a}` as a number")))
        })
        .collect()
}

fn as_dim(name: &str, v: f64) -> Result<usize, ZooError> {
    if v.fract() == 0.0 && v >= 0.0 {
        Ok(v as usize)
    } else {
        Err(bad(name, format!("dimension must be an integer, got {v}")))
    }
}

/// Looks up an entry by name: either `family(args)` or `familyN` with the
/// dimension as a suffix.
pub fn builtin(name: &str) -> Result<ZooEntry, ZooError> {
    let name = name.trim();
    let (family, args) = match name.split_once('(') {
        Some((f, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| bad(f, "missing closing parenthesis"))?;
            (f.trim(), Some(parse_args(f, inner)?))
        }
        None => {
            let digits = name.trim_start_matches(|c: char| !c.is_ascii_digit());
            if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                let f = &name[..name.len() - digits.len()];
                (f, Some(vec![digits.parse::<f64>().unwrap()]))
            } else {
                (name, None)
            }
        }
    };
    let args = args.unwrap_or_default();
    let arity = |max: usize| {
        if args.len() > max {
            Err(bad(family, format!("expected at most {max} parameters, got {}", args.len())))
        } else {
            Ok(())
        }
    };
    match family {
        "euclidean_gaussian" => {
            arity(2)?;
            let n = as_dim(family, *args.first().unwrap_or(&4.0))?;
            euclidean_gaussian(n, *args.get(1).unwrap_or(&0.5))
        }
        "round_sphere" => {
            arity(1)?;
            round_sphere(as_dim(family, *args.first().unwrap_or(&4.0))?)
        }
        "cylinder_shrinker" => {
            arity(1)?;
            cylinder_shrinker(as_dim(family, *args.first().unwrap_or(&3.0))?)
        }
        "cigar" => {
            arity(0)?;
            Ok(cigar())
        }
        "cigar_cross_line" => {
            arity(0)?;
            Ok(cigar_cross_line())
        }
        "cigar_cross_circle" => {
            arity(1)?;
            cigar_cross_circle(*args.first().unwrap_or(&std::f64::consts::TAU))
        }
        "bryant" => {
            arity(0)?;
            Ok(bryant_entry())
        }
        "negative_control" => {
            arity(0)?;
            Ok(negative_control())
        }
        _ => Err(ZooError::UnknownName(name.to_string())),
    }
}

/// Metric-file text for a closed-form entry.
pub fn export(entry: &ZooEntry) -> Result<String, ZooError> {
    entry
        .spec()
        .map(crate::metricfile::print_metric_file)
        .ok_or_else(|| ZooError::NotClosedForm(entry.name.clone()))
}

/// Threshold above which a tensor counts as "nonzero" for a `false` flag.
pub const NONZERO_THRESHOLD: f64 = 1e-6;
/// Threshold below which a tensor counts as zero for a `true` flag.
pub const ZERO_THRESHOLD: f64 = 1e-9;

fn flag_check(
    report: &mut CheckReport,
    id: &str,
    expected: Option<bool>,
    maxima: &[(Vec<f64>, f64)],
    what: &str,
) {
    match expected {
        None => {}
        Some(true) => {
            for (p, m) in maxima {
                report.compare(id, p, &[*m], &[0.0], ZERO_THRESHOLD, format!("{what} vanishes"));
            }
        }
        Some(false) => {
            let (p, m) = maxima
                .iter()
                .cloned()
                .fold((vec![], f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            report.exceeds(id, &p, m, NONZERO_THRESHOLD, format!("{what} is not identically zero (largest sample)"));
        }
    }
}

/// Soliton suite at `points`, then the entry's expected flags over the
/// same points and its known constants at the origin.
pub fn verify_entry(
    entry: &ZooEntry,
    points: &[Vec<f64>],
    order: usize,
    tol: &Tolerances,
) -> Result<CheckReport, TensorError> {
    let spec = entry.spec().ok_or_else(|| {
        TensorError::InvalidSpec(format!("`{}` is verified through its profile", entry.name))
    })?;
    let mut report = soliton_suite(spec, points, order, tol)?;
    let n = spec.dim();

    let mut riem = Vec::new();
    let mut weyl = Vec::new();
    let mut cotton = Vec::new();
    let mut dten = Vec::new();
    for p in points {
        let b = SolitonBundle::from_spec(spec, p, order.min(4))?;
        let c = b.curvature();
        riem.push((p.clone(), c.riemann()?.max_abs_value()));
        if n >= 3 {
            weyl.push((p.clone(), c.weyl()?.max_abs_value()));
            cotton.push((p.clone(), c.cotton()?.max_abs_value()));
            dten.push((p.clone(), b.tensor_d()?.max_abs_value()));
        }
    }
    flag_check(&mut report, "zoo.flag.flat", entry.flags.is_flat, &riem, "Riemann tensor");
    flag_check(&mut report, "zoo.flag.weyl_zero", entry.flags.weyl_zero, &weyl, "Weyl tensor");
    flag_check(&mut report, "zoo.flag.cotton_zero", entry.flags.cotton_zero, &cotton, "Cotton tensor");
    flag_check(&mut report, "zoo.flag.d_zero", entry.flags.d_zero, &dten, "D tensor");

    let origin = vec![0.0; n];
    let k = &entry.constants;
    if k.scalar_at_origin.is_some() || k.hamilton_c.is_some() {
        let b = SolitonBundle::from_spec(spec, &origin, 3)?;
        if let Some(want) = k.scalar_at_origin {
            let got = b.curvature().scalar()?.as_scalar().value();
            let id = "zoo.constant.scalar_at_origin";
            report.compare(id, &origin, &[got], &[want], tol.get(id), format!("R(0) = {want}"));
        }
        if let Some(want) = k.hamilton_c {
            let got = b.hamilton_quantity()?.as_scalar().value();
            let id = "zoo.constant.hamilton_c";
            report.compare(id, &origin, &[got], &[want], tol.get(id), format!("c = {want}"));
        }
    }
    if let Some(want) = k.div3_cotton_at_origin {
        let b = CurvatureBundle::new(crate::tensor::Geometry::from_spec(spec, &origin, 6)?);
        let hd = b.high_divergences()?;
        let id = "zoo.constant.div3_cotton_at_origin";
        report.compare(id, &origin, &[hd.div3_cotton], &[want], tol.get(id), format!("div3(C)(0) = {want}"));
        if entry.flags.cotton_zero == Some(false) {
            let r = b.scalar()?.as_scalar().value();
            let id = "zoo.constant.div3_cotton_vs_scalar_cubed";
            report.compare(id, &origin, &[hd.div3_cotton], &[r * r * r / 8.0], tol.get(id), "div3(C)(0) = R(0)^3 / 8");
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for n in all_names() {
            let e = builtin(n).unwrap();
            assert!(!e.name.is_empty());
        }
        assert_eq!(builtin("round_sphere(3)").unwrap().spec().unwrap().dim(), 3);
        assert_eq!(builtin("euclidean_gaussian(3, -1)").unwrap().soliton_type, SolitonType::Expanding);
        assert_eq!(builtin("cigar_cross_circle(2*pi)").unwrap().period, Some((0, std::f64::consts::TAU)));
        assert!(matches!(builtin("torus"), Err(ZooError::UnknownName(_))));
        assert!(matches!(builtin("round_sphere9"), Err(ZooError::BadParams { .. })));
        assert!(matches!(builtin("cylinder_shrinker2"), Err(ZooError::BadParams { .. })));
        assert!(matches!(builtin("cigar(1)"), Err(ZooError::BadParams { .. })));
    }

    #[test]
    fn exports_parse_back() {
        for n in all_names() {
            let e = builtin(n).unwrap();
            match export(&e) {
                Ok(text) => {
                    let spec = crate::metricfile::parse_metric_file(&text).unwrap();
                    assert_eq!(&spec, e.spec().unwrap());
                }
                Err(ZooError::NotClosedForm(_)) => assert_eq!(n, "bryant"),
                Err(other) => panic!("{other}"),
            }
        }
    }

    #[test]
    fn cylinder_origin_constants() {
        let e = cylinder_shrinker(3).unwrap();
        let b = SolitonBundle::from_spec(e.spec().unwrap(), &[0.0, 0.0, 0.0], 3).unwrap();
        let ric = b.curvature().ricci().unwrap();
        let g = b.curvature().geometry().g_at(0).unwrap();
        // Ric/g eigenvalues (0, ½, ½).
        assert!(ric.value(&[0, 0]).abs() < 1e-13);
        for a in 1..3 {
            assert!((ric.value(&[a, a]) / g.value(&[a, a]) - 0.5).abs() < 1e-13);
        }
        assert!((b.hamilton_quantity().unwrap().as_scalar().value() - 1.0).abs() < 1e-13);
    }
}
