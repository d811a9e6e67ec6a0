//! One test per acceptance criterion; each prints its verdict line.

use ospcone::suite::{self, CriterionResult, SuiteConfig};

fn run(c: suite::Criterion) -> CriterionResult {
    let r = c(&SuiteConfig::default());
    println!("{}", r.line());
    for f in &r.failures {
        println!("    {f}");
    }
    r
}

macro_rules! criterion {
    ($name:ident, $f:path) => {
        #[test]
        fn $name() {
            let r = run($f);
            assert!(r.passed, "{}", r.line());
        }
    };
}

criterion!(criterion_1_round_trip_classification, suite::round_trip);
criterion!(criterion_2_flag_construction, suite::surjectivity);
criterion!(criterion_3_unique_flags_over_regular_elements, suite::birationality);
criterion!(criterion_4_first_step_ambiguity, suite::ambiguity);
criterion!(criterion_5_transversal_slice, suite::section);
criterion!(criterion_6_slice_regularity_and_image_formulas, suite::slice_regularity);
criterion!(criterion_7_weight_bound_identity, suite::weight_identity);
criterion!(criterion_8_algebraic_identities, suite::identities);
