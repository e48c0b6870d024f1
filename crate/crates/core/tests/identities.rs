use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use solitonjet::curvature::{identity_checks, CurvatureBundle};
use solitonjet::fuzz::{random_metric, FUZZ_HALF_WIDTH};
use solitonjet::report::{CheckReport, Tolerances, Verdict};
use solitonjet::tensor::Geometry;

fn run(dim: usize, order: usize, seed: u64, points: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = random_metric(&mut rng, dim);
    let mut report = CheckReport::new();
    for _ in 0..points {
        let p: Vec<f64> = (0..dim)
            .map(|_| rng.gen_range(-FUZZ_HALF_WIDTH..FUZZ_HALF_WIDTH))
            .collect();
        let b = CurvatureBundle::new(Geometry::from_spec(&spec, &p, order).unwrap());
        identity_checks(&b, &Tolerances::default(), &mut report).unwrap();
    }
    report
}

#[test]
fn fuzzed_four_dimensional_metrics() {
    for seed in 0..3 {
        let r = run(4, 6, seed, 2);
        for rec in &r.records {
            eprintln!("{} {} {:.3e} {:.3e} {:.3e}", rec.verdict.as_str(), rec.check_id, rec.lhs_norm, rec.rhs_norm, rec.residual);
        }
        assert!(r.passed(), "{}", r.render_text(true));
        assert!(r.records.iter().any(|x| x.check_id == "divergence.div3c_div4w" && x.verdict == Verdict::Pass));
    }
}

#[test]
fn fuzzed_three_dimensional_metrics() {
    let r = run(3, 6, 11, 2);
    for rec in &r.records {
        eprintln!("{} {} {:.3e} {:.3e} {:.3e}", rec.verdict.as_str(), rec.check_id, rec.lhs_norm, rec.rhs_norm, rec.residual);
    }
    assert!(r.passed(), "{}", r.render_text(true));
}
