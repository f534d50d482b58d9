//! End-to-end acceptance suite: runs every check in `caustica::acceptance`
//! and prints one PASS/FAIL line per criterion before asserting.

#[test]
fn acceptance_criteria() {
    let results = caustica::acceptance::run_all();
    let mut failed = Vec::new();
    for c in &results {
        println!(
            "[{}] {:2}. {} — {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.detail
        );
        if !c.pass {
            failed.push(c.id);
        }
    }
    assert!(
        failed.is_empty(),
        "acceptance criteria failed: {failed:?} (see lines above)"
    );
}
