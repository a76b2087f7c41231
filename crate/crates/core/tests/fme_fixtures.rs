use bcsec_core::fme::fixtures::{fixture, run_fixture, FIXTURES};
use bcsec_core::fme::{eliminate_all, parse_system, region_equal, remove_redundant, ComparisonMode};

#[test]
fn every_fixture_reproduces_its_region() {
    for f in FIXTURES {
        let run = run_fixture(f).unwrap();
        let failed: Vec<&str> = run.comparison.failures().map(|c| c.row.as_str()).collect();
        assert!(run.comparison.equal, "{}: rows without certificate: {failed:?}", f.name);
    }
}

#[test]
fn theorem1_plain_elimination_gives_three_rows() {
    let f = fixture("theorem1").unwrap();
    let sys = parse_system(f.system).unwrap();
    let out = eliminate_all(&sys, None).unwrap();
    assert_eq!(out.variables, vec!["R".to_string()]);
    assert_eq!(out.inequalities().count(), 3);
    assert_eq!(out.conditions().count(), 1);
    let shown = parse_system(include_str!("../fixtures/theorem1_three_rows.expected")).unwrap();
    assert!(region_equal(&out, &shown, &[], ComparisonMode::Exact).unwrap().equal);

    let reduced = remove_redundant(&out, &[]).unwrap();
    let text = reduced.to_text();
    assert_eq!(reduced.inequalities().count(), 2, "{text}");
    assert!(!text.contains("2*R"), "{text}");
}

#[test]
fn theorem1_third_row_needs_the_pmf_constraint() {
    let f = fixture("theorem1").unwrap();
    let mut sys = eliminate_all(&parse_system(f.system).unwrap(), None).unwrap();
    sys.assumptions.retain(|a| !a.rhs.terms.contains_key("I(V1,V2;Z|V0)"));
    // The mutual covering condition still relates the atoms, so drop it too.
    sys.rows.retain(|r| !r.is_condition());
    let reduced = remove_redundant(&sys, &[]).unwrap();
    assert_eq!(reduced.inequalities().count(), 3, "{}", reduced.to_text());
}

#[test]
fn certificates_are_emitted_for_every_row() {
    let run = run_fixture(fixture("theorem1").unwrap()).unwrap();
    for check in run.comparison.forward.iter().chain(&run.comparison.backward) {
        let cert = check.certificate.as_ref().unwrap();
        assert!(!cert.rows.is_empty() || !cert.assumptions.is_empty(), "{}", check.row);
    }
}

#[test]
fn stage_one_drops_the_numbered_rows() {
    let f = fixture("theorem2-stage1").unwrap();
    let run = run_fixture(f).unwrap();
    let text = run.reduced.to_text();
    for gone in ["2*R1 <", "R0 + 2*R1", "2*R0 + 2*R1", "2*Re <", "2*R0 + 2*Re"] {
        assert!(!text.lines().any(|l| l.starts_with(gone)), "{gone} survived:\n{text}");
    }
    assert_eq!(run.expected.inequalities().count(), 18);
    assert_eq!(run.reduced.inequalities().count(), 10, "{text}");
}

#[test]
fn fixture_files_round_trip() {
    for f in FIXTURES {
        for text in [f.system, f.expected] {
            let sys = parse_system(text).unwrap();
            assert_eq!(parse_system(&sys.to_text()).unwrap(), sys, "{}", f.name);
        }
    }
}

#[test]
fn fixtures_run_quickly() {
    let start = std::time::Instant::now();
    for name in ["theorem1", "theorem2"] {
        run_fixture(fixture(name).unwrap()).unwrap();
    }
    assert!(start.elapsed().as_secs_f64() < 10.0, "{:?}", start.elapsed());
}
