use solitonjet::expr::Expr;
use solitonjet::oracle::{fd_oracle_report, fuzz_corpus};

#[test]
fn print_parse_round_trip_on_fuzzed_corpus() {
    let corpus = fuzz_corpus(60, 4, 4, 99);
    for e in &corpus {
        let printed = e.to_string();
        let again = Expr::parse(&printed).unwrap_or_else(|err| panic!("{printed}: {err}"));
        assert_eq!(&again, e, "{printed}");
        assert_eq!(again.to_string(), printed);
    }
}

#[test]
fn jet_partials_match_finite_differences_to_order_three() {
    let corpus = fuzz_corpus(40, 3, 3, 17);
    let report = fd_oracle_report(&corpus, 3, 4, 3, 17).unwrap();
    assert!(report.passed(), "{}", report.failures().map(|r| format!("{r:?}\n")).collect::<String>());
}

#[test]
fn jet_partials_match_finite_differences_to_order_four() {
    let corpus = fuzz_corpus(50, 3, 3, 2024);
    let report = fd_oracle_report(&corpus, 3, 3, 4, 5).unwrap();
    assert!(report.passed(), "{}", report.failures().map(|r| format!("{r:?}\n")).collect::<String>());
    assert!(report.records.iter().any(|r| r.check_id == "jet.fd.order4"));
}
