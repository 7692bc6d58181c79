use proptest::prelude::*;
use sigmadamp::admissibility::{
    admissible_interval, constraints, exponent_lower_bound, gn_window, intersect, Effect,
    ExponentBound, TheoremId,
};
use sigmadamp::rational::{q, qi, Q};
use sigmadamp::ModelParams;

fn arb_params() -> impl Strategy<Value = ModelParams> {
    (
        1i128..=4,     // sigma
        1i128..=19,    // delta as fraction of sigma/2 in twentieths
        1u32..=12,     // n
        2i128..=8,     // q
        1i128..=7,     // m
        0i128..=24,    // s in quarters
    )
        .prop_filter_map("m < q", |(sig, dfrac, n, qq, m, s4)| {
            if m >= qq {
                return None;
            }
            let sigma = qi(sig);
            let delta = sigma * q(dfrac, 40);
            Some(
                ModelParams::new(sigma, delta, n)
                    .with_data(qi(qq), qi(m))
                    .with_s(q(s4, 4)),
            )
        })
}

fn binding_is_unique(list: &[sigmadamp::admissibility::Constraint], value: &Q, lower: bool) -> bool {
    list.iter()
        .filter(|c| match &c.effect {
            Effect::Lower { value: v, .. } if lower => v == value,
            Effect::Upper { value: v, .. } if !lower => v == value,
            _ => false,
        })
        .count()
        == 1
}

proptest! {
    #[test]
    fn removing_binding_constraint_enlarges(params in arb_params()) {
        for th in TheoremId::ALL {
            let list = constraints(th, &params).unwrap();
            let iv = intersect(&list);
            if iv.is_empty() {
                continue;
            }
            if binding_is_unique(&list, &iv.lower.value, true) && iv.lower.value > qi(1) {
                let idx = list.iter().position(|c| matches!(&c.effect,
                    Effect::Lower { value, .. } if *value == iv.lower.value)).unwrap();
                let mut reduced = list.clone();
                reduced.remove(idx);
                let wider = intersect(&reduced);
                prop_assert!(wider.lower.value < iv.lower.value
                    || (wider.lower.value == iv.lower.value && wider.lower.closed && !iv.lower.closed));
                prop_assert_eq!(list[idx].kind, iv.lower.source);
            }
            if let Some(up) = &iv.upper {
                if binding_is_unique(&list, &up.value, false) {
                    let idx = list.iter().position(|c| matches!(&c.effect,
                        Effect::Upper { value, .. } if *value == up.value)).unwrap();
                    let mut reduced = list.clone();
                    reduced.remove(idx);
                    let wider = intersect(&reduced);
                    prop_assert!(wider.upper.as_ref().is_none_or(|w| w.value > up.value));
                }
            }
        }
    }

    #[test]
    fn interval_points_respect_every_constraint(params in arb_params()) {
        for th in TheoremId::ALL {
            let iv = admissible_interval(th, &params).unwrap();
            if let Some(p) = iv.interior_point() {
                for c in &iv.active {
                    match &c.effect {
                        Effect::Lower { value, closed } => {
                            let ok = if *closed { p >= *value } else { p > *value };
                            prop_assert!(ok);
                        }
                        Effect::Upper { value, closed } => {
                            let ok = if *closed { p <= *value } else { p < *value };
                            prop_assert!(ok);
                        }
                        Effect::Gate { holds } => prop_assert!(*holds),
                    }
                }
            }
        }
    }

    #[test]
    fn energy_gn_upper_endpoint_grows_with_q(params in arb_params()) {
        let a = gn_window(TheoremId::T2A, &params).unwrap();
        let bigger = params.clone().with_data(params.q + qi(1), params.m);
        let b = gn_window(TheoremId::T2A, &bigger).unwrap();
        // The window itself may close, since the dimension range is not monotone in q.
        if !a.is_empty() && !b.is_empty() {
            match (&a.upper, &b.upper) {
                (Some(x), Some(y)) => prop_assert!(y.value >= x.value),
                (Some(_), None) | (None, None) => {}
                (None, Some(_)) => prop_assert!(false, "upper endpoint appeared"),
            }
        }
    }

    #[test]
    fn low_regularity_tends_to_energy_space(params in arb_params()) {
        let sigma = params.sigma;
        let near = params.clone().with_s(sigma - q(1, 1_000_000));
        let a = exponent_lower_bound(TheoremId::T2A, &params).unwrap();
        let b = exponent_lower_bound(TheoremId::T3A, &near).unwrap();
        match (a, b) {
            (ExponentBound::Finite(x), ExponentBound::Finite(y)) => {
                let diff = sigmadamp::rational::to_f64(&(x - y)).abs();
                prop_assert!(diff < 1e-4);
            }
            (ExponentBound::NoFiniteBound, ExponentBound::NoFiniteBound) => {}
            _ => prop_assert!(false, "limits disagree"),
        }
    }
}

#[test]
fn open_bound_dominates_closed_at_equal_value() {
    use sigmadamp::admissibility::{Constraint, ConstraintKind};
    let list = vec![
        Constraint { kind: ConstraintKind::GnWindow, label: "a".into(), effect: Effect::Lower { value: qi(4), closed: true } },
        Constraint { kind: ConstraintKind::Regularity, label: "b".into(), effect: Effect::Lower { value: qi(4), closed: false } },
    ];
    let iv = intersect(&list);
    assert!(!iv.lower.closed);
    assert_eq!(iv.to_string(), "(4, ∞)");
}

#[test]
fn structural_above_gn_top_is_empty() {
    use sigmadamp::admissibility::{Constraint, ConstraintKind};
    let list = vec![
        Constraint { kind: ConstraintKind::Structural, label: "a".into(), effect: Effect::Lower { value: qi(10), closed: false } },
        Constraint { kind: ConstraintKind::GnWindow, label: "b".into(), effect: Effect::Upper { value: qi(9), closed: true } },
    ];
    assert!(intersect(&list).is_empty());
}
