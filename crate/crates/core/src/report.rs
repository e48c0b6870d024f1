//! Named residual records and their verdicts.

use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "SKIP")]
    Skip,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub point: Vec<f64>,
    pub lhs_norm: f64,
    pub rhs_norm: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub note: String,
}

/// `max|l - r| / (1 + max(max|l|, max|r|))`, with the two max-norms.
pub fn hybrid_residual(lhs: &[f64], rhs: &[f64]) -> (f64, f64, f64) {
    assert_eq!(lhs.len(), rhs.len());
    let ln = lhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rn = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = lhs
        .iter()
        .zip(rhs)
        .fold(0.0f64, |m, (a, b)| {
            let d = (a - b).abs();
            if d.is_nan() || m.is_nan() { f64::NAN } else { m.max(d) }
        });
    let res = diff / (1.0 + ln.max(rn));
    (ln, rn, if res.is_nan() { f64::INFINITY } else { res })
}

/// Default per-check tolerances; anything not listed uses
/// [`DEFAULT_TOLERANCE`].
pub const TOLERANCE_TABLE: &[(&str, f64)] = &[
    ("riemann.", 1e-10),
    ("ricci.symmetric", 1e-11),
    ("ricci.half_scalar", 1e-10),
    ("bianchi.first", 1e-10),
    ("bianchi.", 1e-9),
    ("weyl.", 1e-10),
    ("cotton.", 1e-9),
    ("bach.divergence", 1e-8),
    ("bach.", 1e-9),
    ("divergence.div3c_div2b", 1e-8),
    ("soliton.equation", 1e-9),
    ("lemma.", 1e-9),
    ("dtensor.", 1e-10),
    ("pointwise.cotton_equals_d", 1e-9),
];

pub const DEFAULT_TOLERANCE: f64 = 1e-7;

/// Tolerance lookup with an optional global override.
#[derive(Debug, Clone, Copy, Default)]
pub struct Tolerances {
    pub override_all: Option<f64>,
}

impl Tolerances {
    pub fn get(&self, check_id: &str) -> f64 {
        if let Some(t) = self.override_all {
            return t;
        }
        TOLERANCE_TABLE
            .iter()
            .find(|(prefix, _)| check_id.starts_with(prefix))
            .map(|&(_, t)| t)
            .unwrap_or(DEFAULT_TOLERANCE)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub records: Vec<CheckRecord>,
}

impl CheckReport {
    pub fn new() -> Self {
        CheckReport::default()
    }

    /// Records a two-sided comparison.
    pub fn compare(
        &mut self,
        check_id: &str,
        point: &[f64],
        lhs: &[f64],
        rhs: &[f64],
        tolerance: f64,
        note: impl Into<String>,
    ) -> &CheckRecord {
        let (lhs_norm, rhs_norm, residual) = hybrid_residual(lhs, rhs);
        let verdict = if residual <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self.records.push(CheckRecord {
            check_id: check_id.to_string(),
            point: point.to_vec(),
            lhs_norm,
            rhs_norm,
            residual,
            tolerance,
            verdict,
            note: note.into(),
        });
        self.records.last().unwrap()
    }

    /// Records an assertion that `value` exceeds `threshold` (used for
    /// negative controls and non-vanishing checks).
    pub fn exceeds(
        &mut self,
        check_id: &str,
        point: &[f64],
        value: f64,
        threshold: f64,
        note: impl Into<String>,
    ) {
        self.records.push(CheckRecord {
            check_id: check_id.to_string(),
            point: point.to_vec(),
            lhs_norm: value,
            rhs_norm: threshold,
            residual: value,
            tolerance: threshold,
            verdict: if value > threshold { Verdict::Pass } else { Verdict::Fail },
            note: note.into(),
        });
    }

    /// Records a precomputed residual; passes iff `residual <= tolerance`.
    #[allow(clippy::too_many_arguments)]
    pub fn bound(
        &mut self,
        check_id: &str,
        point: &[f64],
        lhs_norm: f64,
        rhs_norm: f64,
        residual: f64,
        tolerance: f64,
        note: impl Into<String>,
    ) {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        self.records.push(CheckRecord {
            check_id: check_id.to_string(),
            point: point.to_vec(),
            lhs_norm,
            rhs_norm,
            residual,
            tolerance,
            verdict: if residual <= tolerance { Verdict::Pass } else { Verdict::Fail },
            note: note.into(),
        });
    }

    pub fn skip(&mut self, check_id: &str, point: &[f64], note: impl Into<String>) {
        self.records.push(CheckRecord {
            check_id: check_id.to_string(),
            point: point.to_vec(),
            lhs_norm: 0.0,
            rhs_norm: 0.0,
            residual: 0.0,
            tolerance: 0.0,
            verdict: Verdict::Skip,
            note: note.into(),
        });
    }

    /// Informational record: never fails. Unlike other records, `lhs_norm`
    /// and `rhs_norm` hold the signed values themselves.
    pub fn info(&mut self, check_id: &str, point: &[f64], lhs: f64, rhs: f64, note: impl Into<String>) {
        let (_, _, residual) = hybrid_residual(&[lhs], &[rhs]);
        self.records.push(CheckRecord {
            check_id: check_id.to_string(),
            point: point.to_vec(),
            lhs_norm: lhs,
            rhs_norm: rhs,
            residual,
            tolerance: 0.0,
            verdict: Verdict::Skip,
            note: note.into(),
        });
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.records.extend(other.records);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    /// Largest residual among non-skipped records whose id starts with `prefix`.
    pub fn max_residual(&self, prefix: &str) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| r.verdict != Verdict::Skip && r.check_id.starts_with(prefix))
            .map(|r| r.residual)
            .reduce(f64::max)
    }

    pub fn find(&self, check_id: &str) -> impl Iterator<Item = &CheckRecord> {
        let id = check_id.to_string();
        self.records.iter().filter(move |r| r.check_id == id)
    }

    /// Process exit status: 0 iff no record failed.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// Tab-separated text body, one record per line. Numbers use 17
    /// significant digits, or 6 with `human`.
    pub fn render_text(&self, human: bool) -> String {
        let num = |v: f64| {
            if human {
                format!("{v:.5e}")
            } else {
                format!("{v:.16e}")
            }
        };
        let mut out = String::new();
        for r in &self.records {
            let point = r.point.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",");
            let _ = writeln!(
                out,
                "{}\t{}\t[{}]\t{}\t{}\t{}\t{}\t{}",
                r.verdict.as_str(),
                r.check_id,
                point,
                num(r.lhs_norm),
                num(r.rhs_norm),
                num(r.residual),
                num(r.tolerance),
                r.note
            );
        }
        out
    }
}
