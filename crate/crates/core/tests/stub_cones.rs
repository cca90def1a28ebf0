use vex::config::SearchConfig;
use vex::corpus::run_corpus;

#[test]
fn stubbed_cones_fail_first_at_the_coderivative_cases() {
    vex::cone::set_stub_cones(true);
    let rep = run_corpus(&SearchConfig::default(), None);
    vex::cone::set_stub_cones(false);
    let first = rep.first_failure().expect("a failure");
    println!("{} {}", first.tag, first.name);
    assert_eq!(first.tag, "example-3.3");
}
