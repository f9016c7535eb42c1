mod common;

use common::suites::{oracle_cases, run_oracle_case};

#[test]
fn tiled_renderer_matches_brute_force_bitwise() {
    let cases = oracle_cases();
    assert!(cases.len() >= 50);
    let failures: Vec<String> = cases.iter().filter_map(|c| run_oracle_case(c).err()).collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn oracle_cases_are_not_trivial() {
    for c in oracle_cases() {
        let img = run_oracle_case(&c).unwrap();
        let covered = img.data.chunks(4).filter(|p| p[3] > 0.0).count();
        if c.name.starts_with("random") {
            continue;
        }
        assert!(covered > 20, "{} covers {covered} pixels", c.name);
    }
}
