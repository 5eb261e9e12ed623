use epcontact::suites::{run_suites, SUITE_NAMES};

#[test]
fn every_suite_passes_with_the_default_seeds() {
    for seed in [0, 7] {
        let report = run_suites(&["all"], seed).unwrap();
        assert_eq!(report.suites.len(), SUITE_NAMES.len());
        for s in &report.suites {
            for c in &s.checks {
                assert!(c.pass, "seed {seed}, {} / {}: {:e} > {:e}", s.suite, c.name, c.max_residual, c.tolerance);
            }
        }
        assert!(report.pass);
    }
}
