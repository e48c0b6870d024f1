use std::time::Instant;

use solitonjet::quad::{cigar_circle_setup, integral_report, make_cutoff};

#[test]
fn cigar_circle_integral_identity() {
    let t = Instant::now();
    let setup = cigar_circle_setup(std::f64::consts::TAU, 1.0).unwrap();
    let c = make_cutoff(1.0).unwrap();
    let (report, results) = integral_report(&setup, &c, &[32, 64, 128]).unwrap();
    for r in &results {
        eprintln!("{} lhs {:.16e} rhs {:.16e} gap {:e} evals {}", r.grid, r.lhs, r.rhs, r.gap, r.evaluations);
    }
    eprintln!("{}", report.render_text(true));
    eprintln!("elapsed {:?}", t.elapsed());
    assert!(report.passed());
}
