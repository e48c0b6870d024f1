use std::time::Instant;

use solitonjet::report::{Tolerances, Verdict};
use solitonjet::sampling::sample_points;
use solitonjet::soliton::soliton_suite;
use solitonjet::zoo::{all_names, builtin, negative_control, verify_entry};

#[test]
fn every_closed_form_entry_verifies() {
    for name in all_names() {
        let e = builtin(name).unwrap();
        let Some(spec) = e.spec() else { continue };
        let t = Instant::now();
        let pts = sample_points(spec.domain.as_ref().unwrap(), 20, 7);
        let r = verify_entry(&e, &pts, 5, &Tolerances::default()).unwrap();
        eprintln!(
            "{name}: {} records, integrability max {:e}, soliton max {:e}, {:?}",
            r.records.len(),
            r.max_residual("integrability.").unwrap_or(0.0),
            r.max_residual("soliton.").unwrap_or(0.0),
            t.elapsed()
        );
        assert!(r.passed(), "{name}\n{}", r.failures().map(|x| format!("{} {:?} {:e} {}\n", x.check_id, x.point, x.residual, x.note)).collect::<String>());
    }
}

#[test]
fn negative_control_fails_cotton_weyl_condition() {
    let e = negative_control();
    let spec = e.spec().unwrap();
    let pts = sample_points(spec.domain.as_ref().unwrap(), 20, 7);
    let r = soliton_suite(spec, &pts, 5, &Tolerances::default()).unwrap();
    let recs: Vec<_> = r.find("integrability.cotton_weyl").collect();
    let min = recs.iter().map(|x| x.residual).fold(f64::INFINITY, f64::min);
    eprintln!("negative control min residual {min:e}");
    assert!(recs.iter().all(|x| x.verdict == Verdict::Fail));
    assert!(min > 1e-3);
}
