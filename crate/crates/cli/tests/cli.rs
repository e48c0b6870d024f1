use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_solitonjet"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field(line: &str, k: usize) -> String {
    line.split('\t').nth(k).unwrap().to_string()
}

#[test]
fn identities_on_cigar_cross_line_all_pass() {
    let o = run(&["identities", "--zoo", "cigar_cross_line", "--points", "20", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().count() > 20);
    assert!(text.lines().all(|l| l.starts_with("PASS") || l.starts_with("SKIP")));
}

#[test]
fn log_pole_reports_the_node() {
    let f = fixture("bad.metric");
    let o = run(&["identities", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("log(x1)"), "{err}");
    assert!(err.contains("log undefined"), "{err}");
}

#[test]
fn parse_errors_carry_the_line() {
    let dir = std::env::temp_dir().join("solitonjet-cli-parse");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.metric");
    std::fs::write(&path, "dim = 2\nmetric\ng[1][1] = 1 +\ng[2][2] = 1\n").unwrap();
    let o = run(&["identities", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn round_sphere_weyl_checks_pass() {
    let o = run(&["identities", "--zoo", "round_sphere4", "--points", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let weyl: Vec<_> = text.lines().filter(|l| l.contains("\tweyl.")).collect();
    assert!(!weyl.is_empty());
    assert!(weyl.iter().all(|l| l.starts_with("PASS")));
}

#[test]
fn nonsoliton_warns_and_fails() {
    let f = fixture("nonsoliton.metric");
    let o = run(&["soliton", f.to_str().unwrap(), "--points", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("warning"));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL\tsoliton.equation")));
}

#[test]
fn gaussian_soliton_has_zero_constant() {
    let o = run(&["soliton", "--zoo", "euclidean_gaussian4", "--points", "3", "--json"]);
    assert!(o.status.success());
    let mut saw_c = false;
    for line in stdout(&o).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_ne!(v["verdict"], "FAIL");
        if v["check_id"] == "zoo.constant.hamilton_c" {
            assert_eq!(v["lhs_norm"].as_f64().unwrap(), 0.0);
            saw_c = true;
        }
    }
    assert!(saw_c);
}

#[test]
fn cigar_reports_constant_four() {
    let o = run(&["soliton", "--zoo", "cigar", "--points", "3"]);
    assert!(o.status.success());
    let line = stdout(&o)
        .lines()
        .find(|l| l.contains("\tzoo.constant.hamilton_c\t"))
        .unwrap()
        .to_string();
    let c: f64 = field(&line, 3).parse().unwrap();
    assert!((c - 4.0).abs() < 1e-9);
}

#[test]
fn div_on_cigar_cross_line_gives_eight() {
    let o = run(&["div", "--zoo", "cigar_cross_line", "--at", "0,0,0", "--json"]);
    assert!(o.status.success());
    let records: Vec<serde_json::Value> =
        stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let get = |id: &str| {
        records.iter().find(|r| r["check_id"] == id).unwrap()["lhs_norm"].as_f64().unwrap()
    };
    assert!((get("div.div3_cotton") - 8.0).abs() < 1e-6);
    assert!((get("div.scalar_cubed_over_8") - 8.0).abs() < 1e-9);
}

#[test]
fn div_vanishes_on_flat_and_cylinder() {
    for (zoo, at) in [("euclidean_gaussian4", "1,1,1,1"), ("cylinder_shrinker3", "0,0,0.5")] {
        let o = run(&["div", "--zoo", zoo, "--at", at, "--json"]);
        assert!(o.status.success());
        for line in stdout(&o).lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            if v["check_id"] == "div.div3_cotton" {
                assert!(v["lhs_norm"].as_f64().unwrap().abs() < 1e-10, "{zoo}");
            }
        }
    }
}

#[test]
fn div_rejects_wrong_point_length() {
    let o = run(&["div", "--zoo", "cigar_cross_line", "--at", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("3 coordinates"));
}

#[test]
fn export_round_trips_through_the_checker() {
    let dir = std::env::temp_dir().join("solitonjet-cli-export");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ccl.metric");
    let o = run(&["export", "--zoo", "cigar_cross_line", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let from_file = run(&["soliton", path.to_str().unwrap(), "--points", "5", "--seed", "3"]);
    assert!(from_file.status.success(), "{}", stdout(&from_file));
    let again = run(&["export", "--zoo", "cigar_cross_line"]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&again));
}

#[test]
fn bryant_has_no_closed_form_export() {
    let o = run(&["export", "--zoo", "bryant"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let args = ["soliton", "--zoo", "cigar_cross_circle", "--points", "8", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["soliton", "--zoo", "cigar_cross_circle", "--points", "8", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn bryant_subcommand_passes() {
    let o = run(&["bryant", "--rmax", "10", "--step", "0.05"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("PASS\tbryant.soliton")));
}

#[test]
fn integral_subcommand_passes() {
    let o = run(&["integral", "--s", "1", "--grid", "64"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l.contains("\tquad.relative_gap\t")));
}

#[test]
fn loose_tolerance_override_is_applied() {
    let f = fixture("nonsoliton.metric");
    let o = run(&["soliton", f.to_str().unwrap(), "--points", "2", "--tol", "1e3"]);
    let text = stdout(&o);
    let line = text.lines().find(|l| l.contains("\tsoliton.equation\t")).unwrap();
    assert!(line.starts_with("PASS"));
    assert_eq!(field(line, 6).parse::<f64>().unwrap(), 1e3);
}

#[test]
fn list_names_every_entry() {
    let o = run(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["cigar_cross_line", "bryant", "round_sphere(4)"] {
        assert!(text.contains(name), "{name}");
    }
}
