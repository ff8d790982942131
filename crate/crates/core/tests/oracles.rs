mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use gmtlab::family::{Delta, ProbMeas, RandomFunctions, UnknownFunctions};
use gmtlab::finset::Tables;
use gmtlab::gpt::{build_state_polytope, DEFAULT_DIMENSION_CAP};
use gmtlab::rational::{self, Rational};
use gmtlab::states::{
    enumerate_deterministic_states, enumerate_possibilistic_states, find_probabilistic_state,
    is_deterministic_state, is_possibilistic_state, is_probabilistic_state, point_mass, singleton_lift,
    verify_certificate, ProbabilisticOutcome,
};
use gmtlab::{FamilyRef, Fragment, Measurement, Payload};

use common::*;

#[test]
fn deterministic_states_match_backtracking() {
    for (name, frag) in zoo() {
        let got: BTreeSet<Vec<usize>> = enumerate_deterministic_states(&frag, None)
            .unwrap()
            .into_iter()
            .map(|s| {
                assert!(is_deterministic_state(&frag, &s), "{name}");
                s.outcome
            })
            .collect();
        assert_eq!(got, deterministic_oracle(&frag), "{name}");
    }
}

#[test]
fn possibilistic_states_match_backtracking() {
    for (name, frag) in zoo() {
        let got: BTreeSet<Vec<usize>> = enumerate_possibilistic_states(&frag, None)
            .unwrap()
            .into_iter()
            .map(|s| {
                assert!(is_possibilistic_state(&frag, &s), "{name}");
                s.support.iter().map(|&m| m as usize).collect()
            })
            .collect();
        assert_eq!(got, possibilistic_oracle(&frag), "{name}");
    }
}

#[test]
fn deterministic_states_lift() {
    for (name, frag) in zoo() {
        for s in enumerate_deterministic_states(&frag, None).unwrap() {
            assert!(is_probabilistic_state(&frag, &point_mass(&frag, &s)), "{name}");
            assert!(is_possibilistic_state(&frag, &singleton_lift(&s)), "{name}");
        }
    }
}

#[test]
fn limit_truncates() {
    let frag = full(Arc::new(gmtlab::family::Classical::new(3)), 3);
    assert_eq!(enumerate_deterministic_states(&frag, Some(2)).unwrap().len(), 2);
}

fn check_lp_against_fm(frag: &Fragment) {
    let expected = probabilistic_oracle(frag);
    match find_probabilistic_state(frag).unwrap() {
        ProbabilisticOutcome::State(rho) => {
            assert!(expected, "solver found a state the oracle rules out");
            assert!(is_probabilistic_state(frag, &rho));
        }
        ProbabilisticOutcome::Infeasible(cert) => {
            assert!(!expected, "solver reported infeasible but the oracle finds a point");
            assert_eq!(verify_certificate(frag, &cert), Ok(true));
        }
    }
}

#[test]
fn lp_matches_fm_on_the_zoo() {
    for (_, frag) in zoo() {
        check_lp_against_fm(&frag);
    }
}

#[test]
fn polytope_vertices_match_basis_enumeration() {
    for (name, frag) in zoo() {
        let poly = build_state_polytope(&frag, DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!(poly.vertices(), vertex_oracle(&frag).as_slice(), "{name}");
        for k in 0..poly.vertices().len() {
            assert!(is_probabilistic_state(&frag, &poly.vertex_state(&frag, k)), "{name}");
        }
    }
}

fn tables(m: usize, n: usize) -> Vec<Vec<usize>> {
    Tables::new(m, n).collect()
}

/// A nonempty set of tables `2 → 2`, chosen by bitmask.
fn unknown_generator() -> impl Strategy<Value = Measurement> {
    (1usize..16).prop_map(|mask| {
        let set = tables(2, 2)
            .into_iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, t)| t)
            .collect();
        Measurement::new(2, UnknownFunctions::normalize(set))
    })
}

fn weights(k: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0i64..4, k)
        .prop_filter("some weight", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| {
            let total: i64 = w.iter().sum();
            w.into_iter().map(|x| rational::ratio(x, total)).collect()
        })
}

fn random_function_generator() -> impl Strategy<Value = Measurement> {
    weights(4).prop_map(|w| {
        Measurement::new(2, RandomFunctions::normalize(tables(2, 2).into_iter().zip(w)))
    })
}

fn kernel_generator() -> impl Strategy<Value = Measurement> {
    (weights(2), weights(2)).prop_map(|(a, b)| Measurement::new(2, Payload::Kernel(vec![a, b])))
}

fn close(family: FamilyRef, gens: &[Measurement]) -> Fragment {
    Fragment::close(family, gens, 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_matches_fm_for_unknown_functions(gens in prop::collection::vec(unknown_generator(), 1..=2)) {
        check_lp_against_fm(&close(Arc::new(UnknownFunctions::new(2)), &gens));
    }

    #[test]
    fn lp_matches_fm_for_random_functions(gens in prop::collection::vec(random_function_generator(), 1..=2)) {
        check_lp_against_fm(&close(Arc::new(RandomFunctions::new(2)), &gens));
    }

    #[test]
    fn lp_matches_fm_for_kernels(gens in prop::collection::vec(kernel_generator(), 1..=2)) {
        check_lp_against_fm(&close(Arc::new(ProbMeas::new(2)), &gens));
    }

    #[test]
    fn distributions_always_have_a_state(w in weights(3)) {
        let frag = Fragment::close(Arc::new(Delta), &[Measurement::new(3, Payload::Distribution(w))], 3).unwrap();
        check_lp_against_fm(&frag);
    }
}
