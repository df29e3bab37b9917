use std::time::Instant;

use smlab::instance::Caps;
use smlab::laws::{generate_corpus, run_suite, LawId, SuiteConfig, Verdict};
use smlab::par::Parallelism;

#[test]
fn default_corpus_has_no_failures() {
    let start = Instant::now();
    let corpus = generate_corpus(42, &Caps::default());
    let report = run_suite(&LawId::ALL, &corpus, &SuiteConfig::new(42), Parallelism::Ambient).unwrap();
    eprintln!("{}", report.markdown());
    for r in report.results.iter().filter(|r| r.verdict == Verdict::Fail) {
        eprintln!("FAIL {} on {}: {:?}", r.law, r.instance.name, r.counterexample);
    }
    eprintln!("elapsed {:?}", start.elapsed());
    assert!(report.passed());
}
