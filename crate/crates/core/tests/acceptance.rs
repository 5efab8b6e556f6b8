//! Every acceptance criterion at its stated tolerance, one line per criterion.

use std::io::Write;

use scompress::harness::criteria::{run_all, Config};

#[test]
fn acceptance() {
    let outcomes = run_all(&Config::default());
    assert_eq!(outcomes.len(), 13);
    let mut err = std::io::stderr().lock();
    writeln!(err).unwrap();
    for o in &outcomes {
        writeln!(err, "{}", o.line()).unwrap();
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
