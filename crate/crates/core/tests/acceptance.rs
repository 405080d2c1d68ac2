use std::io::Write;

use oblivion::acceptance::{run_all, CRITERIA};
use oblivion::DEFAULT_SEED;

#[test]
fn acceptance_criteria() {
    let results = run_all(DEFAULT_SEED);
    assert_eq!(results.len(), CRITERIA.len());
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    let mut report = String::from("\n");
    for r in &results {
        report.push_str(&format!("{r}\n"));
    }
    report.push_str(&format!(
        "{} of {} criteria passed\n",
        results.len() - failed.len(),
        results.len()
    ));
    // Written to the raw handle so the report shows without --nocapture.
    std::io::stderr().write_all(report.as_bytes()).unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
