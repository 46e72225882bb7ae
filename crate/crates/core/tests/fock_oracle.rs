use zeno_dephase::fock::fixture_checks;

#[test]
fn every_fixture_agrees_with_the_fock_reference() {
    let checks = fixture_checks().unwrap();
    assert!(checks.len() > 20);
    let mut failed = Vec::new();
    for c in &checks {
        println!(
            "{:<70} ref {:+.12e} got {:+.12e} err {:.2e} tol {:.0e}",
            c.name, c.reference, c.value, c.error, c.tolerance
        );
        if !c.passed() {
            failed.push(c.name.clone());
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
