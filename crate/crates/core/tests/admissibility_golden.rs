//! Worked examples for both reference parameter sets, with hand-checked arithmetic.

use sigmadamp::admissibility::{admissible_interval, exponent_lower_bound, ExponentBound, TheoremId};
use sigmadamp::params::reference::{set_one, set_two};
use sigmadamp::rational::{q, qi};

fn shown(th: TheoremId, p: &sigmadamp::ModelParams) -> String {
    admissible_interval(th, p).unwrap().to_string()
}

#[test]
fn set_one_energy_space() {
    // 1 + max{3 - 3/5 + 2, 4.4}/(3 - 2.2) = 1 + 4.4/0.8
    assert_eq!(shown(TheoremId::T2A, &set_one(3, qi(2))), "(13/2, ∞)");
    assert_eq!(
        exponent_lower_bound(TheoremId::T2A, &set_one(3, qi(2))).unwrap(),
        ExponentBound::Finite(q(13, 2))
    );
}

#[test]
fn set_one_low_regularity() {
    assert_eq!(shown(TheoremId::T3A, &set_one(3, q(3, 2))), "(13/2, ∞)");
}

#[test]
fn set_one_intermediate_regularity_follows_formula() {
    // 1 + max{3 - 3/5 + 5/2, 4.4}/0.8 = 1 + 49/8
    assert_eq!(
        exponent_lower_bound(TheoremId::T4A, &set_one(3, q(5, 2))).unwrap(),
        ExponentBound::Finite(q(57, 8))
    );
}

#[test]
fn set_one_high_regularity() {
    assert_eq!(shown(TheoremId::T5A, &set_one(5, qi(5))), "[5, ∞)");
    assert_eq!(shown(TheoremId::T6A, &set_one(3, qi(5))), "[5, ∞)");
    // 1 + max{3 - 3/5 + 5 - 9/5, 2(4 - 27/10)}/(3 - 2(2 - 9/5))
    assert_eq!(
        exponent_lower_bound(TheoremId::T6A, &set_one(3, qi(5))).unwrap(),
        ExponentBound::Finite(q(41, 13))
    );
}

#[test]
fn set_two_b_variants() {
    assert_eq!(shown(TheoremId::T2B, &set_two(9, qi(2))), "[4, 9]");
    assert_eq!(shown(TheoremId::T3B, &set_two(9, q(9, 5))), "[4, 5]");
    assert_eq!(shown(TheoremId::T4B, &set_two(9, q(5, 2))), "[4, ∞)");
    assert_eq!(shown(TheoremId::T5B, &set_two(8, qi(5))), "(4, ∞)");
    assert_eq!(shown(TheoremId::T6B, &set_two(9, qi(5))), "(4, ∞)");
}

#[test]
fn b_variant_below_threshold_is_empty() {
    let iv = admissible_interval(TheoremId::T2B, &set_two(6, qi(2))).unwrap();
    assert!(iv.is_empty());
}

#[test]
fn b_lower_bound_is_one() {
    assert_eq!(
        exponent_lower_bound(TheoremId::T2B, &set_two(9, qi(2))).unwrap(),
        ExponentBound::Finite(qi(1))
    );
}

#[test]
fn one_dimensional_energy_space_has_no_admissible_power() {
    let p = sigmadamp::params::reference::linear_1d();
    assert_eq!(
        exponent_lower_bound(TheoremId::T2A, &p).unwrap(),
        ExponentBound::NoFiniteBound
    );
    assert!(admissible_interval(TheoremId::T2A, &p).unwrap().is_empty());
}
