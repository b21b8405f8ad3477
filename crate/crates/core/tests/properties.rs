//! Ordering properties of the information matrices across designs.

use proptest::prelude::*;
use prosinfo::{
    fi_pros_complete, fi_pros_marginal, fi_srs, make_balanced_design, relative_efficiency, Family, McConfig, Method,
    Model, Param, QuadratureSpec,
};

fn model(idx: usize) -> Model {
    let (f, active): (Family, &[Param]) = match idx {
        0 => (Family::Normal, &[Param::Location, Param::Scale]),
        1 => (Family::Exponential, &[Param::Scale]),
        2 => (Family::Logistic, &[Param::Location, Param::Scale]),
        _ => (Family::ExtremeValue, &[Param::Location]),
    };
    Model::new(f, &[], active).expect("model")
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 4)), Just((2, 6)), Just((3, 6)), Just((2, 8)), Just((4, 8)), Just((3, 9))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn complete_dominates_marginal_dominates_srs(idx in 0usize..4, (n, s) in shape()) {
        let spec = QuadratureSpec::default();
        let m = model(idx);
        let design = make_balanced_design(s, n, 1).unwrap();
        let complete = fi_pros_complete(&m, n, s, 1, &spec).unwrap().matrix;
        let marginal = fi_pros_marginal(&m, &design, None, Method::Quadrature, &McConfig::default(), &spec)
            .unwrap()
            .matrix;
        let srs = fi_srs(&m, n, &spec).unwrap();
        let scale = complete.get(0, 0).abs();
        prop_assert!(complete.loewner_gap(&marginal).unwrap() >= -1e-7 * scale);
        prop_assert!(marginal.loewner_gap(&srs).unwrap() >= -1e-7 * scale);
    }

    #[test]
    fn complete_efficiency_grows_with_set_size(idx in 0usize..4, n in 1usize..4, extra in 1usize..4) {
        let spec = QuadratureSpec::default();
        let m = model(idx);
        let srs = fi_srs(&m, n, &spec).unwrap();
        let re = |s: usize| relative_efficiency(&fi_pros_complete(&m, n, s, 1, &spec).unwrap().matrix, &srs).unwrap();
        let small = n * extra;
        prop_assert!(re(small + n) > re(small));
    }

    #[test]
    fn cycles_scale_information(idx in 0usize..4, (n, s) in shape(), cycles in 1usize..5) {
        let spec = QuadratureSpec::default();
        let m = model(idx);
        let one = fi_pros_marginal(&m, &make_balanced_design(s, n, 1).unwrap(), None, Method::Quadrature, &McConfig::default(), &spec).unwrap();
        let many = fi_pros_marginal(&m, &make_balanced_design(s, n, cycles).unwrap(), None, Method::Quadrature, &McConfig::default(), &spec).unwrap();
        prop_assert!(many.matrix.max_abs_diff(&one.matrix.scaled(cycles as f64)) <= 1e-9 * many.matrix.get(0, 0).abs());
    }
}
