//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use solitonjet::curvature::{general_identity_suite, CurvatureBundle};
use solitonjet::fuzz::{random_metric, FUZZ_HALF_WIDTH};
use solitonjet::oracle::{fd_oracle_report, fuzz_corpus, FD_TOLERANCE};
use solitonjet::quad::{cigar_circle_setup, integral_report, make_cutoff, RELATIVE_GAP_TOLERANCE};
use solitonjet::report::{CheckRecord, CheckReport, Tolerances, Verdict};
use solitonjet::sampling::sample_points;
use solitonjet::soliton::{soliton_suite, SolitonBundle, FULL_SOLITON_ORDER};
use solitonjet::tensor::{ChartBox, Geometry};
use solitonjet::zoo::{self, bryant, negative_control};

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Outcome {
        Outcome { ok, detail: detail.into() }
    }
}

type Criterion = fn() -> Result<Outcome, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn checked<'a>(r: &'a CheckReport, prefix: &'a str) -> impl Iterator<Item = &'a CheckRecord> {
    r.records.iter().filter(move |x| x.verdict != Verdict::Skip && x.check_id.starts_with(prefix))
}

fn max_of<'a>(it: impl Iterator<Item = &'a CheckRecord>) -> (usize, f64) {
    it.fold((0, 0.0), |(n, m), x| (n + 1, if x.residual.is_nan() { f64::INFINITY } else { m.max(x.residual) }))
}

/// `max|lhs − rhs| / max(|lhs|, |rhs|)` recovered from a hybrid-residual record.
fn relative(x: &CheckRecord) -> f64 {
    let m = x.lhs_norm.max(x.rhs_norm);
    if m == 0.0 {
        0.0
    } else {
        x.residual * (1.0 + m) / m
    }
}

fn lemma_at_origin() -> Result<Outcome, String> {
    let entry = zoo::cigar_cross_line();
    let spec = entry.spec().unwrap();
    let b = CurvatureBundle::new(Geometry::from_spec(spec, &[0.0; 3], 7).map_err(err)?);
    let div3 = b.high_divergences().map_err(err)?.div3_cotton;
    let r = b.scalar().map_err(err)?.as_scalar().value();
    let lemma = (div3 - r.powi(3) / 8.0).abs();
    let scalar = (r - 4.0).abs();
    Ok(Outcome::new(
        lemma < 1e-6 && scalar < 1e-9,
        format!("div3(C) = {div3:.12}, R^3/8 = {:.12}, |R - 4| = {scalar:.2e}", r.powi(3) / 8.0),
    ))
}

fn integrability_on_zoo() -> Result<Outcome, String> {
    let tol = Tolerances::default();
    let mut worst = (String::new(), 0.0f64);
    let mut count = 0;
    for name in zoo::all_names() {
        let entry = zoo::builtin(name).map_err(err)?;
        let report = match entry.spec() {
            Some(spec) => {
                let pts = sample_points(spec.domain.as_ref().unwrap(), 20, 7);
                soliton_suite(spec, &pts, FULL_SOLITON_ORDER, &tol).map_err(err)?
            }
            None => {
                let profile = bryant::solve(10.0, 0.05, 1e-12).map_err(err)?;
                let mut r = bryant::profile_report(&profile, &tol).map_err(err)?;
                for rec in &mut r.records {
                    rec.check_id = rec.check_id.trim_start_matches("bryant.taylor.").to_string();
                }
                r
            }
        };
        let (n, m) = max_of(checked(&report, "integrability."));
        count += n;
        if m >= worst.1 {
            worst = (name.to_string(), m);
        }
    }
    let control = negative_control();
    let spec = control.spec().unwrap();
    let pts = sample_points(spec.domain.as_ref().unwrap(), 20, 7);
    let r = soliton_suite(spec, &pts, FULL_SOLITON_ORDER, &tol).map_err(err)?;
    let recs: Vec<_> = checked(&r, "integrability.cotton_weyl").collect();
    let control_min = recs.iter().map(|x| x.residual).fold(f64::INFINITY, f64::min);
    let control_fails = !recs.is_empty() && recs.iter().all(|x| x.verdict == Verdict::Fail);
    Ok(Outcome::new(
        worst.1 < 1e-7 && count > 0 && control_fails && control_min > 1e-3,
        format!(
            "{count} integrability checks, worst {:.2e} ({}); negative control min residual {control_min:.3e}",
            worst.1, worst.0
        ),
    ))
}

/// Fuzzed metric reports shared by the identity criteria.
fn fuzzed_reports(dim: usize, metrics: usize, points: usize, seed: u64) -> Result<Vec<CheckReport>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = FUZZ_HALF_WIDTH;
    let domain = ChartBox::new(vec![-w; dim], vec![w; dim]).map_err(err)?;
    (0..metrics as u64)
        .map(|k| {
            let spec = random_metric(&mut rng, dim);
            let pts = sample_points(&domain, points, seed * 1000 + k);
            general_identity_suite(&spec, &pts, 6, &Tolerances::default()).map_err(err)
        })
        .collect()
}

fn general_identities() -> Result<Outcome, String> {
    let mut worst = (String::new(), 0.0f64);
    let mut count = 0;
    let mut bach4 = (0, 0.0f64);
    for dim in [4, 5] {
        for r in fuzzed_reports(dim, 10, 5, dim as u64)? {
            for x in checked(&r, "") {
                count += 1;
                let v = if x.residual.is_nan() { f64::INFINITY } else { x.residual };
                if v >= worst.1 {
                    worst = (x.check_id.clone(), v);
                }
            }
            if dim == 4 {
                let (n, m) = max_of(checked(&r, "bach.divergence"));
                bach4 = (bach4.0 + n, bach4.1.max(m));
            }
        }
    }
    Ok(Outcome::new(
        worst.1 < 1e-8 && bach4.0 > 0 && bach4.1 < 1e-8,
        format!(
            "{count} checks on 20 metrics, worst {:.2e} ({}); n = 4 div B: {} checks, worst {:.2e}",
            worst.1, worst.0, bach4.0, bach4.1
        ),
    ))
}

fn cotton_weyl_proportionality() -> Result<Outcome, String> {
    let mut cw = (0, 0.0f64);
    let mut dd = (0, 0.0f64);
    for r in fuzzed_reports(4, 10, 3, 40)? {
        for x in checked(&r, "cotton.weyl_divergence") {
            if x.check_id == "cotton.weyl_divergence" {
                cw = (cw.0 + 1, cw.1.max(relative(x)));
            }
        }
        for x in checked(&r, "divergence.div3c_div4w") {
            dd = (dd.0 + 1, dd.1.max(relative(x)));
        }
    }
    Ok(Outcome::new(
        cw.0 > 0 && dd.0 > 0 && cw.1 < 1e-7 && dd.1 < 1e-7,
        format!(
            "C vs div W: {} points, worst relative {:.2e}; div3(C) vs div4(W): {} points, worst relative {:.2e}",
            cw.0, cw.1, dd.0, dd.1
        ),
    ))
}

fn pointwise_identity() -> Result<Outcome, String> {
    let entry = zoo::cigar_cross_line();
    let spec = entry.spec().unwrap();
    let pts = sample_points(spec.domain.as_ref().unwrap(), 20, 7);
    let mut worst = 0.0f64;
    let mut smallest_side = f64::INFINITY;
    for p in &pts {
        let b = SolitonBundle::from_spec(spec, p, FULL_SOLITON_ORDER).map_err(err)?;
        let (lhs, rhs) = b.pointwise_3d_sides().map_err(err)?;
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs())));
        if p[1].hypot(p[2]) > 1e-3 {
            smallest_side = smallest_side.min(lhs.abs().min(rhs.abs()));
        }
    }
    Ok(Outcome::new(
        worst < 1e-7 && smallest_side > 1e-8,
        format!("20 points, worst residual {worst:.2e}, smallest |side| {smallest_side:.3e}"),
    ))
}

fn integral_formula() -> Result<Outcome, String> {
    let setup = cigar_circle_setup(std::f64::consts::TAU, 1.0).map_err(err)?;
    let cutoff = make_cutoff(1.0).map_err(err)?;
    let (report, results) = integral_report(&setup, &cutoff, &[32, 64, 128]).map_err(err)?;
    let fine = results.last().unwrap();
    let rel = fine.gap / fine.lhs;
    let estimates: Vec<f64> = results.windows(2).map(|w| (w[1].lhs - w[0].lhs).abs()).collect();
    let decreasing = estimates.windows(2).all(|w| w[1] < w[0]);
    Ok(Outcome::new(
        fine.lhs > 0.0
            && rel < RELATIVE_GAP_TOLERANCE
            && decreasing
            && report.passed(),
        format!(
            "grid {}: lhs = {:.10}, rhs = {:.10}, relative gap {rel:.2e}; refinement changes {:.2e} -> {:.2e}",
            fine.grid, fine.lhs, fine.rhs, estimates[0], estimates[1]
        ),
    ))
}

fn bryant_profile() -> Result<Outcome, String> {
    let profile = bryant::solve(10.0, 0.05, 1e-12).map_err(err)?;
    let report = bryant::profile_report(&profile, &Tolerances::default()).map_err(err)?;
    let (ns, soliton) = max_of(checked(&report, "bryant.soliton"));
    let (nc, cotton) = max_of(checked(&report, "bryant.cotton"));
    let tip = (profile.tip_ratio() - 1.0).abs();
    Ok(Outcome::new(
        ns > 0 && nc > 0 && soliton < 1e-6 && cotton < 1e-6 && tip < 1e-6 && report.passed(),
        format!(
            "{} nodes to r = {}: soliton {soliton:.2e}, |C| {cotton:.2e}, |phi/r - 1| at tip {tip:.2e}",
            profile.nodes(),
            profile.r_max
        ),
    ))
}

fn jet_oracle() -> Result<Outcome, String> {
    let corpus = fuzz_corpus(50, 3, 3, 2024);
    let report = fd_oracle_report(&corpus, 3, 3, 4, 5).map_err(err)?;
    let (n, worst) = max_of(checked(&report, "jet.fd."));
    let order4 = checked(&report, "jet.fd.order4").count();
    Ok(Outcome::new(
        report.passed() && order4 > 0 && worst < FD_TOLERANCE,
        format!("50 expressions, {n} partials ({order4} of order 4), worst relative {worst:.2e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion, Option<Duration>); 8] = [
        ("1 divergence lemma at the cigar-line origin", lemma_at_origin, Some(Duration::from_secs(5))),
        ("2 integrability conditions on the zoo", integrability_on_zoo, Some(Duration::from_secs(60))),
        ("3 general curvature identities, fuzzed 4D/5D", general_identities, None),
        ("4 Cotton / Weyl-divergence proportionality", cotton_weyl_proportionality, None),
        ("5 pointwise 3D Cotton identity", pointwise_identity, None),
        ("6 integral formula on cigar x circle", integral_formula, Some(Duration::from_secs(30))),
        ("7 rotationally symmetric steady profile", bryant_profile, None),
        ("8 jet kernel finite-difference oracle", jet_oracle, None),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let t = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let elapsed = t.elapsed();
        let in_time = budget.is_none_or(|b| elapsed < b);
        let ok = outcome.ok && in_time;
        if !ok {
            failed += 1;
        }
        let budget_note = match budget {
            Some(b) if !in_time => format!(" [over budget {b:?}]"),
            _ => String::new(),
        };
        println!(
            "{} criterion {name}: {} ({:.2?}){budget_note}",
            if ok { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed
        );
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
