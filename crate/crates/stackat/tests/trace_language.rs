//! The trace automaton against brute-force enumerations of the trace
//! language. The enumeration in `common` recurses on the syntax with the
//! header threaded through; the automaton explores ⟨header, rest⟩ states.
//! The two must accept exactly the same words up to the length bound.

mod common;

use common::{concat_words, regex_words, trace_words, WordSet};
use proptest::prelude::*;
use stackat::ast::{Expr, Header, Universe};
use stackat::trace::{build_trace_nfa, StackLetter};

fn state_machine_example() -> (Expr, Universe) {
    // (f = 1 · push 1 + f := 2 · push 2)*
    let e = Expr::star(Expr::plus(
        Expr::seq(Expr::test_eq("f", 1), Expr::push(1)),
        Expr::seq(Expr::assign("f", 2), Expr::push(2)),
    ));
    let u = Universe::new(vec!["f".to_string()], vec![1, 2]).unwrap();
    (e, u)
}

#[test]
fn state_machine_example_matches_brute_force() {
    let (e, u) = state_machine_example();
    for a1 in u.headers() {
        for a2 in u.headers() {
            let nfa = build_trace_nfa(&e, &a1, &a2, &u);
            assert_eq!(
                nfa.accepted_words_up_to(6),
                trace_words(&e, &a1, &a2, &u, 6),
                "trace mismatch between headers {:?} and {:?}",
                a1,
                a2
            );
        }
    }
}

#[test]
fn state_machine_example_has_the_expected_shapes() {
    let (e, u) = state_machine_example();
    let h1 = Header(vec![1]);
    let h2 = Header(vec![2]);
    let words = |a1: &Header, a2: &Header| -> WordSet {
        build_trace_nfa(&e, a1, a2, &u).accepted_words_up_to(6)
    };

    // Staying at f=1 never takes the assignment branch: push 1 repeated.
    for w in words(&h1, &h1) {
        assert!(
            w.iter().all(|&l| l == StackLetter::Push(1)),
            "unexpected {w:?}"
        );
    }
    assert!(words(&h1, &h1).contains(&vec![]));

    // Moving from f=1 to f=2 takes the assignment branch at least once, so
    // the language is push 1* · push 2 · push 2* — in particular the empty
    // word is *not* included, the header has to change.
    let crossing = words(&h1, &h2);
    assert!(!crossing.contains(&vec![]));
    for w in &crossing {
        let first_two = w
            .iter()
            .position(|&l| l == StackLetter::Push(2))
            .expect("must push 2 at least once");
        assert!(w[..first_two].iter().all(|&l| l == StackLetter::Push(1)));
        assert!(w[first_two..].iter().all(|&l| l == StackLetter::Push(2)));
    }

    // Starting at f=2 the test branch is dead: push 2 repeated.
    let staying = words(&h2, &h2);
    assert!(staying.contains(&vec![]));
    for w in &staying {
        assert!(w.iter().all(|&l| l == StackLetter::Push(2)));
    }

    // The header can never get back to f=1.
    assert!(words(&h2, &h1).is_empty());
}

#[test]
fn assignment_round_trip_traces_are_epsilon_only() {
    let e = Expr::star(Expr::plus(Expr::assign("f", 0), Expr::assign("f", 1)));
    let u = Universe::new(vec!["f".to_string()], vec![0, 1]).unwrap();
    for a1 in u.headers() {
        for a2 in u.headers() {
            let words = build_trace_nfa(&e, &a1, &a2, &u).accepted_words_up_to(4);
            assert_eq!(words, WordSet::from([vec![]]));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// On the push-pop fragment the trace automaton between equal headers
    /// is just the regular-expression reading of the program.
    #[test]
    fn pure_pushpop_traces_equal_regular_language(
        e in common::pushpop_expr(&[1, 2], 8),
    ) {
        let u = Universe::new(vec![], vec![1, 2]).unwrap();
        let h = Header(vec![]);
        let nfa = build_trace_nfa(&e, &h, &h, &u);
        prop_assert_eq!(nfa.accepted_words_up_to(8), regex_words(&e, 8));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Sequencing sums over every intermediate header: the traces of
    /// e1 · e2 from α to α' are exactly ⋃_β traces(e1, α, β) · traces(e2, β, α').
    #[test]
    fn sequencing_sums_over_intermediate_headers(
        e1 in common::full_expr(&["f"], &[0, 1], 5),
        e2 in common::full_expr(&["f"], &[0, 1], 5),
    ) {
        let u = Universe::new(vec!["f".to_string()], vec![0, 1]).unwrap();
        let seq = Expr::seq(e1.clone(), e2.clone());
        for a1 in u.headers() {
            for a2 in u.headers() {
                let combined = build_trace_nfa(&seq, &a1, &a2, &u).accepted_words_up_to(5);
                let mut summed = WordSet::new();
                for mid in u.headers() {
                    let left = build_trace_nfa(&e1, &a1, &mid, &u).accepted_words_up_to(5);
                    let right = build_trace_nfa(&e2, &mid, &a2, &u).accepted_words_up_to(5);
                    summed.extend(concat_words(&left, &right, 5));
                }
                prop_assert_eq!(&combined, &summed, "headers {:?} -> {:?}", a1, a2);
            }
        }
    }

    /// Full-language dual route: automaton exploration vs the recursive
    /// trace-language definition, on every header pair.
    #[test]
    fn full_language_traces_match_brute_force(
        e in common::full_expr(&["f"], &[0, 1], 6),
    ) {
        let u = Universe::new(vec!["f".to_string()], vec![0, 1]).unwrap();
        for a1 in u.headers() {
            for a2 in u.headers() {
                let nfa = build_trace_nfa(&e, &a1, &a2, &u);
                prop_assert_eq!(
                    nfa.accepted_words_up_to(4),
                    trace_words(&e, &a1, &a2, &u, 4),
                    "headers {:?} -> {:?}", a1, a2
                );
            }
        }
    }
}
