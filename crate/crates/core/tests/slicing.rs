mod common;

use common::suites::slicing_suite;

#[test]
fn slicing_matches_dense_conditional() {
    let rep = slicing_suite(2000, 11);
    assert!(rep.passes(1e-10), "{rep:?}");
}
