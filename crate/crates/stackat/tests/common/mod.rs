//! Word-level reference implementations shared by the integration suites.
//!
//! Everything in this module recomputes a pipeline stage directly on finite
//! sets of words, independently of the automaton constructions in the
//! library. The suites compare the two routes on all words up to a length
//! bound, so a bug would have to hit both implementations identically to
//! slip through.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use proptest::prelude::*;
use stackat::ast::{Expr, Universe, Value};
use stackat::canon::ZipLetter;
use stackat::trace::StackLetter;

pub type Word = Vec<StackLetter>;
pub type WordSet = BTreeSet<Word>;

/// All concatenations `a ++ b` of length at most `max_len`.
pub fn concat_words(a: &WordSet, b: &WordSet, max_len: usize) -> WordSet {
    let mut out = WordSet::new();
    for x in a {
        for y in b {
            if x.len() + y.len() <= max_len {
                let mut w = x.clone();
                w.extend(y.iter().copied());
                out.insert(w);
            }
        }
    }
    out
}

/// Reads a push-pop program as a plain regular expression over
/// `{push v, pop v}` and enumerates its words up to `max_len`.
///
/// Panics on tests and assignments: the regular reading only exists for the
/// push-pop fragment.
pub fn regex_words(e: &Expr, max_len: usize) -> WordSet {
    match e {
        Expr::Zero => WordSet::new(),
        Expr::One => WordSet::from([vec![]]),
        Expr::Push(v) if max_len >= 1 => WordSet::from([vec![StackLetter::Push(*v)]]),
        Expr::Pop(v) if max_len >= 1 => WordSet::from([vec![StackLetter::Pop(*v)]]),
        Expr::Push(_) | Expr::Pop(_) => WordSet::new(),
        Expr::Plus(a, b) => {
            let mut out = regex_words(a, max_len);
            out.extend(regex_words(b, max_len));
            out
        }
        Expr::Seq(a, b) => {
            concat_words(&regex_words(a, max_len), &regex_words(b, max_len), max_len)
        }
        Expr::Star(a) => {
            let base = regex_words(a, max_len);
            let mut acc = WordSet::from([vec![]]);
            loop {
                let mut next = acc.clone();
                next.extend(concat_words(&acc, &base, max_len));
                if next == acc {
                    return acc;
                }
                acc = next;
            }
        }
        Expr::TestEq(..) | Expr::TestNeq(..) | Expr::Assign(..) => {
            panic!("regular-expression reading is only defined for push-pop programs")
        }
    }
}

/// Word sets indexed by (input header, output header) index pairs.
type TraceMatrix = BTreeMap<(usize, usize), WordSet>;

fn empty_matrix(n: usize) -> TraceMatrix {
    let mut m = TraceMatrix::new();
    for i in 0..n {
        for j in 0..n {
            m.insert((i, j), WordSet::new());
        }
    }
    m
}

fn diagonal_matrix(n: usize, word: Option<Word>) -> TraceMatrix {
    let mut m = empty_matrix(n);
    if let Some(w) = word {
        for i in 0..n {
            m.get_mut(&(i, i)).unwrap().insert(w.clone());
        }
    }
    m
}

fn union_matrix(a: &TraceMatrix, b: &TraceMatrix) -> TraceMatrix {
    let mut out = a.clone();
    for (k, words) in b {
        out.get_mut(k).unwrap().extend(words.iter().cloned());
    }
    out
}

fn concat_matrix(n: usize, a: &TraceMatrix, b: &TraceMatrix, max_len: usize) -> TraceMatrix {
    let mut out = empty_matrix(n);
    for i in 0..n {
        for j in 0..n {
            let mut words = WordSet::new();
            for mid in 0..n {
                words.extend(concat_words(&a[&(i, mid)], &b[&(mid, j)], max_len));
            }
            out.insert((i, j), words);
        }
    }
    out
}

fn trace_matrix(e: &Expr, universe: &Universe, max_len: usize) -> TraceMatrix {
    let headers: Vec<_> = universe.headers().collect();
    let n = headers.len();
    match e {
        Expr::Zero => empty_matrix(n),
        Expr::One => diagonal_matrix(n, Some(vec![])),
        Expr::Push(v) => diagonal_matrix(n, (max_len >= 1).then(|| vec![StackLetter::Push(*v)])),
        Expr::Pop(v) => diagonal_matrix(n, (max_len >= 1).then(|| vec![StackLetter::Pop(*v)])),
        Expr::TestEq(f, v) => {
            let fi = universe.field_index(f).expect("field not in universe");
            let mut m = empty_matrix(n);
            for (i, h) in headers.iter().enumerate() {
                if h.get(fi) == *v {
                    m.get_mut(&(i, i)).unwrap().insert(vec![]);
                }
            }
            m
        }
        Expr::TestNeq(f, v) => {
            let fi = universe.field_index(f).expect("field not in universe");
            let mut m = empty_matrix(n);
            for (i, h) in headers.iter().enumerate() {
                if h.get(fi) != *v {
                    m.get_mut(&(i, i)).unwrap().insert(vec![]);
                }
            }
            m
        }
        Expr::Assign(f, v) => {
            let fi = universe.field_index(f).expect("field not in universe");
            let mut m = empty_matrix(n);
            for (i, h) in headers.iter().enumerate() {
                let target = h.set(fi, *v);
                let j = headers.iter().position(|x| *x == target).unwrap();
                m.get_mut(&(i, j)).unwrap().insert(vec![]);
            }
            m
        }
        Expr::Plus(a, b) => union_matrix(
            &trace_matrix(a, universe, max_len),
            &trace_matrix(b, universe, max_len),
        ),
        Expr::Seq(a, b) => concat_matrix(
            n,
            &trace_matrix(a, universe, max_len),
            &trace_matrix(b, universe, max_len),
            max_len,
        ),
        Expr::Star(a) => {
            let step = trace_matrix(a, universe, max_len);
            let mut acc = diagonal_matrix(n, Some(vec![]));
            loop {
                let next = union_matrix(&acc, &concat_matrix(n, &acc, &step, max_len));
                if next == acc {
                    return acc;
                }
                acc = next;
            }
        }
    }
}

/// The trace language of `e` between two headers, enumerated on words up to
/// `max_len` by direct recursion on the syntax: tests and assignments
/// contribute empty words gated on the header, sequencing sums over every
/// intermediate header, and star is an iterated union. This is complete for
/// words up to the bound because concatenation can never shorten a word.
pub fn trace_words(
    e: &Expr,
    a1: &stackat::ast::Header,
    a2: &stackat::ast::Header,
    universe: &Universe,
    max_len: usize,
) -> WordSet {
    let headers: Vec<_> = universe.headers().collect();
    let i = headers
        .iter()
        .position(|h| h == a1)
        .expect("input header not in universe");
    let j = headers
        .iter()
        .position(|h| h == a2)
        .expect("output header not in universe");
    trace_matrix(e, universe, max_len).remove(&(i, j)).unwrap()
}

/// All words obtained from `w` by deleting one adjacent `push v · pop v`
/// pair.
pub fn reduce_once(w: &[StackLetter]) -> Vec<Word> {
    let mut out = Vec::new();
    for i in 0..w.len().saturating_sub(1) {
        if let (StackLetter::Push(v), StackLetter::Pop(u)) = (w[i], w[i + 1]) {
            if v == u {
                let mut reduced = w[..i].to_vec();
                reduced.extend_from_slice(&w[i + 2..]);
                out.push(reduced);
            }
        }
    }
    out
}

/// Closes a finite word set under `push v · pop v → ε`, keeping the
/// originals. Terminates because every reduction strictly shortens a word.
pub fn pushpop_close_words(base: &WordSet) -> WordSet {
    let mut out = base.clone();
    let mut work: Vec<Word> = base.iter().cloned().collect();
    while let Some(w) = work.pop() {
        for reduced in reduce_once(&w) {
            if out.insert(reduced.clone()) {
                work.push(reduced);
            }
        }
    }
    out
}

/// Whether the word is of the shape `pop* push*`.
pub fn is_pop_star_push_star(w: &[StackLetter]) -> bool {
    let first_push = w
        .iter()
        .position(|l| matches!(l, StackLetter::Push(_)))
        .unwrap_or(w.len());
    w[first_push..]
        .iter()
        .all(|l| matches!(l, StackLetter::Push(_)))
}

/// Keeps only the `pop* push*`-shaped words.
pub fn filter_words(words: &WordSet) -> WordSet {
    words
        .iter()
        .filter(|w| is_pop_star_push_star(w))
        .cloned()
        .collect()
}

/// Zips a `pop* push*` word from the middle outwards: the last pop pairs
/// with the first push, and the leftover side trails as `done`-padded
/// letters. Returns `None` when the word is not `pop* push*`-shaped.
///
/// This is a closed-form indexing implementation, kept deliberately
/// different from the library's recursive one.
pub fn zip_word_flat(w: &[StackLetter]) -> Option<Vec<ZipLetter>> {
    if !is_pop_star_push_star(w) {
        return None;
    }
    let pops: Vec<Value> = w
        .iter()
        .filter_map(|l| {
            if let StackLetter::Pop(v) = l {
                Some(*v)
            } else {
                None
            }
        })
        .collect();
    let pushes: Vec<Value> = w
        .iter()
        .filter_map(|l| {
            if let StackLetter::Push(v) = l {
                Some(*v)
            } else {
                None
            }
        })
        .collect();
    let paired = pops.len().min(pushes.len());
    let mut out = Vec::with_capacity(pops.len().max(pushes.len()));
    for i in 0..paired {
        out.push(ZipLetter::Pair(pops[pops.len() - 1 - i], pushes[i]));
    }
    for j in (0..pops.len() - paired).rev() {
        out.push(ZipLetter::PopOnly(pops[j]));
    }
    for &v in &pushes[paired..] {
        out.push(ZipLetter::PushOnly(v));
    }
    Some(out)
}

/// All `pop* push*` words over `values` of length at most `max_len`.
pub fn pop_star_push_star_words(values: &[Value], max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for len in 0..=max_len {
        for split in 0..=len {
            // `split` pops followed by `len - split` pushes.
            let mut stack_words: Vec<Word> = vec![vec![]];
            for pos in 0..len {
                let mut next = Vec::new();
                for w in &stack_words {
                    for &v in values {
                        let mut w2 = w.clone();
                        w2.push(if pos < split {
                            StackLetter::Pop(v)
                        } else {
                            StackLetter::Push(v)
                        });
                        next.push(w2);
                    }
                }
                stack_words = next;
            }
            out.extend(stack_words);
        }
    }
    out.sort();
    out.dedup();
    out
}

fn leaf_pushpop(values: &'static [Value]) -> BoxedStrategy<Expr> {
    prop_oneof![
        1 => Just(Expr::Zero),
        2 => Just(Expr::One),
        4 => proptest::sample::select(values).prop_map(Expr::Push),
        4 => proptest::sample::select(values).prop_map(Expr::Pop),
    ]
    .boxed()
}

/// Random push-pop programs of syntactic size at most `max_size`.
pub fn pushpop_expr(values: &'static [Value], max_size: usize) -> impl Strategy<Value = Expr> {
    leaf_pushpop(values)
        .prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::plus(a, b)),
                3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::seq(a, b)),
                2 => inner.prop_map(Expr::star),
            ]
        })
        .prop_filter("size over budget", move |e| e.size() <= max_size)
}

/// Random star-free push-pop programs (finite languages) of size at most
/// `max_size`.
pub fn star_free_pushpop_expr(
    values: &'static [Value],
    max_size: usize,
) -> impl Strategy<Value = Expr> {
    leaf_pushpop(values)
        .prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::plus(a, b)),
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::seq(a, b)),
            ]
        })
        .prop_filter("size over budget", move |e| e.size() <= max_size)
}

fn leaf_full(fields: &'static [&'static str], values: &'static [Value]) -> BoxedStrategy<Expr> {
    let field = proptest::sample::select(fields);
    let value = proptest::sample::select(values);
    prop_oneof![
        1 => Just(Expr::Zero),
        2 => Just(Expr::One),
        3 => proptest::sample::select(values).prop_map(Expr::Push),
        3 => proptest::sample::select(values).prop_map(Expr::Pop),
        3 => (field.clone(), value.clone()).prop_map(|(f, v)| Expr::test_eq(f, v)),
        2 => (field.clone(), value.clone()).prop_map(|(f, v)| Expr::test_neq(f, v)),
        3 => (field, value).prop_map(|(f, v)| Expr::assign(f, v)),
    ]
    .boxed()
}

/// Random full-language programs (tests, assignments, and stack actions)
/// of size at most `max_size`.
pub fn full_expr(
    fields: &'static [&'static str],
    values: &'static [Value],
    max_size: usize,
) -> impl Strategy<Value = Expr> {
    leaf_full(fields, values)
        .prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::plus(a, b)),
                3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::seq(a, b)),
                2 => inner.prop_map(Expr::star),
            ]
        })
        .prop_filter("size over budget", move |e| e.size() <= max_size)
}

/// Random stack-free programs (tests and assignments only).
pub fn netkat_expr(
    fields: &'static [&'static str],
    values: &'static [Value],
    max_size: usize,
) -> impl Strategy<Value = Expr> {
    let field = proptest::sample::select(fields);
    let value = proptest::sample::select(values);
    let leaf = prop_oneof![
        1 => Just(Expr::Zero),
        2 => Just(Expr::One),
        3 => (field.clone(), value.clone()).prop_map(|(f, v)| Expr::test_eq(f, v)),
        2 => (field.clone(), value.clone()).prop_map(|(f, v)| Expr::test_neq(f, v)),
        3 => (field, value).prop_map(|(f, v)| Expr::assign(f, v)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::plus(a, b)),
            3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::seq(a, b)),
            2 => inner.prop_map(Expr::star),
        ]
    })
    .prop_filter("size over budget", move |e| e.size() <= max_size)
}
