//! Each canonicalization pass against a word-level reference computation,
//! plus the end-to-end statement the pipeline exists for: language equality
//! of the canonical automata coincides with semantic equivalence as observed
//! by the bounded oracle.

mod common;

use std::collections::BTreeSet;

use common::{
    filter_words, pop_star_push_star_words, pushpop_close_words, reduce_once, regex_words,
    zip_word_flat,
};
use proptest::prelude::*;
use stackat::ast::{Expr, Header, Universe};
use stackat::canon::{
    canonicalize, filter_popstar_pushstar, poppush_close, pushpop_close, unzip_word, zip_automaton,
    zip_word, ZipLetter,
};
use stackat::nfa::{language_equivalent, LanguageComparison, Nfa};
use stackat::oracle::{eval, refute, Packet};
use stackat::trace::{build_trace_nfa, StackLetter};

const VALUES: &[u32] = &[1, 2];

fn pushpop_universe() -> Universe {
    Universe::new(vec![], VALUES.to_vec()).unwrap()
}

fn trace_nfa(e: &Expr) -> Nfa<StackLetter> {
    let u = pushpop_universe();
    let h = Header(vec![]);
    build_trace_nfa(e, &h, &h, &u)
}

#[test]
fn zip_round_trips_on_pop_push_words() {
    for w in pop_star_push_star_words(VALUES, 10) {
        let zipped = zip_word(&w).expect("pop*push* words are zippable");
        assert_eq!(zip_word_flat(&w).as_ref(), Some(&zipped), "word {w:?}");
        let (pops, pushes) = unzip_word(&zipped).expect("zip output must unzip");
        let rebuilt: Vec<StackLetter> = pops
            .iter()
            .map(|&v| StackLetter::Pop(v))
            .chain(pushes.iter().map(|&v| StackLetter::Push(v)))
            .collect();
        assert_eq!(rebuilt, w);
    }
}

#[test]
fn zip_rejects_exactly_the_non_pop_push_words() {
    // Exhaustive over one value up to length 6: zip is defined iff the word
    // is pop-then-push shaped, and both implementations agree on that.
    let mut layer: Vec<Vec<StackLetter>> = vec![vec![]];
    for _ in 0..=6 {
        for w in &layer {
            let shaped = common::is_pop_star_push_star(w);
            assert_eq!(zip_word(w).is_some(), shaped, "word {w:?}");
            assert_eq!(zip_word_flat(w).is_some(), shaped, "word {w:?}");
        }
        layer = layer
            .iter()
            .flat_map(|w| {
                [StackLetter::Push(1), StackLetter::Pop(1)]
                    .iter()
                    .map(move |&l| {
                        let mut w2 = w.clone();
                        w2.push(l);
                        w2
                    })
            })
            .collect();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The closure keeps every original word.
    #[test]
    fn pushpop_closure_only_adds_words(e in common::pushpop_expr(VALUES, 8)) {
        let a = trace_nfa(&e);
        let closed = pushpop_close(&a);
        for w in a.accepted_words_up_to(8) {
            prop_assert!(closed.accepts(&w), "lost word {w:?}");
        }
    }

    /// Everything the closed automaton accepts stays accepted under one
    /// more reduction step, i.e. the language is closed under
    /// push v · pop v → ε.
    #[test]
    fn pushpop_closure_is_reduction_closed(e in common::pushpop_expr(VALUES, 8)) {
        let closed = pushpop_close(&trace_nfa(&e));
        for w in closed.accepted_words_up_to(8) {
            for reduced in reduce_once(&w) {
                prop_assert!(closed.accepts(&reduced), "word {w:?} reduces out of the language");
            }
        }
    }

    /// Closing twice changes nothing.
    #[test]
    fn pushpop_closure_is_idempotent(e in common::pushpop_expr(VALUES, 7)) {
        let closed = pushpop_close(&trace_nfa(&e));
        let twice = pushpop_close(&closed);
        prop_assert_eq!(language_equivalent(&closed, &twice), LanguageComparison::Equivalent);
    }

    /// On star-free programs the language is finite, so the word-level
    /// reduction fixpoint is exactly computable and the automaton closure
    /// must match it word for word.
    #[test]
    fn pushpop_closure_exact_on_finite_languages(
        e in common::star_free_pushpop_expr(VALUES, 8),
    ) {
        let base = regex_words(&e, 16);
        let expected = pushpop_close_words(&base);
        let closed = pushpop_close(&trace_nfa(&e));
        // Closure never lengthens a word, so enumerating a little past the
        // longest base word sees the whole language.
        let max_len = base.iter().map(|w| w.len()).max().unwrap_or(0);
        prop_assert_eq!(closed.accepted_words_up_to(max_len + 2), expected);
    }

    /// The zip automaton accepts exactly the zips of the pop*push*-shaped
    /// words of its input. A zipped word of length k unzips to a word of
    /// length at most 2k, so enumerating input words to length 8 is
    /// complete for zipped words up to length 4.
    #[test]
    fn zip_stage_matches_wordwise_zip(e in common::pushpop_expr(VALUES, 7)) {
        let closed = pushpop_close(&trace_nfa(&e));
        let expected: BTreeSet<Vec<ZipLetter>> = filter_words(&closed.accepted_words_up_to(8))
            .iter()
            .filter_map(|w| zip_word_flat(w))
            .filter(|z| z.len() <= 4)
            .collect();
        let zipped = zip_automaton(&closed);
        prop_assert_eq!(zipped.accepted_words_up_to(4), expected);
    }

    /// Zipping already drops non-pop*push* words, so running the explicit
    /// filter first never changes the zipped language.
    #[test]
    fn filter_before_zip_is_a_no_op(e in common::pushpop_expr(VALUES, 7)) {
        let closed = pushpop_close(&trace_nfa(&e));
        let with_filter = zip_automaton(&filter_popstar_pushstar(&closed));
        let without = zip_automaton(&closed);
        prop_assert_eq!(
            language_equivalent(&with_filter, &without),
            LanguageComparison::Equivalent
        );
    }

    /// The pop-push closure is exactly A* prefixing on the zipped language,
    /// where A = {(pop v, push v)}.
    #[test]
    fn poppush_stage_prepends_pair_loops(e in common::pushpop_expr(VALUES, 7)) {
        let zipped = zip_automaton(&pushpop_close(&trace_nfa(&e)));
        let base = zipped.accepted_words_up_to(4);
        let mut expected: BTreeSet<Vec<ZipLetter>> = BTreeSet::new();
        for z in &base {
            expected.insert(z.clone());
            let mut layer: Vec<Vec<ZipLetter>> = vec![z.clone()];
            for _ in z.len()..4 {
                let mut next = Vec::new();
                for p in &layer {
                    for &v in VALUES {
                        let mut word = vec![ZipLetter::Pair(v, v)];
                        word.extend(p.iter().copied());
                        expected.insert(word.clone());
                        next.push(word);
                    }
                }
                layer = next;
            }
        }
        let closed = poppush_close(&zipped, VALUES);
        prop_assert_eq!(closed.accepted_words_up_to(4), expected);
    }
}

/// Replays one side of a canonical-language difference through the oracle:
/// the unzipped witness must be an input/output pair related by exactly the
/// side that accepted the word.
fn assert_witness_separates(e1: &Expr, e2: &Expr, word: &[ZipLetter], left_accepts: bool) {
    let u = pushpop_universe();
    let (pops, pushes) = unzip_word(word).expect("canonical witnesses are valid zipped words");
    let input = Packet::new(Header(vec![]), pops);
    let output = Packet::new(Header(vec![]), pushes.iter().rev().copied().collect());
    let bound =
        input.stack.len() + output.stack.len() + e1.count_stack_ops() + e2.count_stack_ops() + 4;
    let in1 = eval(e1, &input, &u, bound).contains(&output);
    let in2 = eval(e2, &input, &u, bound).contains(&output);
    assert_eq!(
        (in1, in2),
        (left_accepts, !left_accepts),
        "witness {word:?} does not separate the programs the way the automata claim"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// End to end: canonical-language equality coincides with bounded-oracle
    /// indistinguishability, and every reported difference replays in the
    /// oracle on the claimed side.
    #[test]
    fn canonical_equality_matches_oracle(
        e1 in common::pushpop_expr(VALUES, 7),
        e2 in common::pushpop_expr(VALUES, 7),
    ) {
        let u = pushpop_universe();
        let c1 = canonicalize(&trace_nfa(&e1), VALUES);
        let c2 = canonicalize(&trace_nfa(&e2), VALUES);
        match language_equivalent(&c1, &c2) {
            LanguageComparison::Equivalent => {
                prop_assert_eq!(refute(&e1, &e2, &u, 4), None);
            }
            LanguageComparison::Inequivalent { word, accepted_by } => {
                assert_witness_separates(&e1, &e2, &word, accepted_by == stackat::Side::Left);
                prop_assert!(
                    refute(&e1, &e2, &u, 4).is_some(),
                    "automata differ but the oracle finds no difference"
                );
            }
        }
    }
}
