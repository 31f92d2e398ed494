//! Canonicalization of trace automata.
//!
//! Two programs can produce the same packet relation through different
//! traces: `push 1 ; pop 1` moves every packet to itself exactly like `1`
//! does, yet their trace languages differ. Comparing trace languages
//! directly would therefore be unsound. This module closes a trace
//! automaton under the two ways traces can coincide semantically, producing
//! a *canonical* automaton whose language characterizes the packet relation
//! exactly — equality of canonical languages is equivalence of the original
//! programs on the chosen header pair.
//!
//! The pipeline:
//!
//! 1. [`pushpop_close`] — a `push v` immediately undone by `pop v` is a
//!    no-op. Saturating the automaton with ε-edges that shortcut
//!    `push v · ε · pop v` paths (plus reflexive-transitive ε closure) makes
//!    the language closed under inserting/removing such cancelling pairs.
//! 2. [`filter_popstar_pushstar`] — every behaviour has a normal-form trace
//!    that pops everything it needs first and then pushes its output
//!    (`pop* push*`). Intersecting with that shape discards redundant
//!    traces. (The zip construction reads off only `pop* push*` runs anyway,
//!    so [`canonicalize`] can skip this pass; it is exposed for inspection.)
//! 3. [`zip_automaton`] — `pop* push*` traces still over-distinguish: a
//!    trace that pops `v` and pushes it back describes the same behaviour as
//!    one that never touches that slot. Zipping pairs each pop with the
//!    matching push — innermost first, i.e. the last pop with the first
//!    push — into letters over [`ZipLetter`], turning both halves of the
//!    trace into a single word read outward from the middle.
//! 4. [`poppush_close`] — finally, a zipped word prefixed with `(pop v,
//!    push v)` pairs (pop `v`, put it right back) adds nothing. Prefixing
//!    the language with all such diagonal pairs canonicalizes that away.
//!
//! [`canonicalize`] runs the passes in order with trimming in between;
//! [`zip_word`] and [`unzip_word`] are the word-level counterparts used for
//! counterexample extraction and by the test suites.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::ast::Value;
use crate::nfa::{Nfa, NfaBuilder, StateId};
use crate::trace::StackLetter;

/// Letter of a zipped trace: a pop paired with the push that ends up in the
/// same stack slot, or an unmatched half once the other side is exhausted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ZipLetter {
    /// `(pop v, push w)`: the trace pops `v` from this slot and leaves `w`
    /// in it.
    Pair(Value, Value),
    /// `(pop v, done)`: the trace pops `v` and pushes nothing back here.
    PopOnly(Value),
    /// `(done, push w)`: the trace pushes `w` without having popped here.
    PushOnly(Value),
}

impl fmt::Display for ZipLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZipLetter::Pair(v, w) => write!(f, "(pop {v}, push {w})"),
            ZipLetter::PopOnly(v) => write!(f, "(pop {v}, done)"),
            ZipLetter::PushOnly(w) => write!(f, "(done, push {w})"),
        }
    }
}

/// Closes a trace automaton under cancellation of adjacent `push v · pop v`
/// pairs.
///
/// Three ε-saturation rules are applied to a fixpoint: every state gets an
/// ε self-loop; every path `q1 --push v--> q2 --ε--> q3 --pop v--> q4` adds
/// `q1 --ε--> q4`; and the ε relation is kept transitively closed. The
/// result accepts exactly the closure of the original language under
/// removing (hence, read backwards, inserting) cancelling push-pop pairs —
/// at the cost of at most one ε-edge per state pair.
pub fn pushpop_close(a: &Nfa<StackLetter>) -> Nfa<StackLetter> {
    let n = a.num_states();
    let mut push_in: Vec<Vec<(Value, StateId)>> = vec![Vec::new(); n];
    let mut pop_out: Vec<Vec<(Value, StateId)>> = vec![Vec::new(); n];
    for (q, pops) in pop_out.iter_mut().enumerate() {
        for (l, t) in a.edges_from(q) {
            match *l {
                StackLetter::Push(v) => push_in[*t].push((v, q)),
                StackLetter::Pop(v) => pops.push((v, *t)),
            }
        }
    }

    let mut closed = vec![false; n * n];
    let mut eps_out: Vec<Vec<StateId>> = vec![Vec::new(); n];
    let mut eps_in: Vec<Vec<StateId>> = vec![Vec::new(); n];
    let mut queue: VecDeque<(StateId, StateId)> = VecDeque::new();
    let add = |x: StateId,
               y: StateId,
               closed: &mut Vec<bool>,
               eps_out: &mut Vec<Vec<StateId>>,
               eps_in: &mut Vec<Vec<StateId>>,
               queue: &mut VecDeque<(StateId, StateId)>| {
        if !closed[x * n + y] {
            closed[x * n + y] = true;
            eps_out[x].push(y);
            eps_in[y].push(x);
            queue.push_back((x, y));
        }
    };

    for q in 0..n {
        add(q, q, &mut closed, &mut eps_out, &mut eps_in, &mut queue);
        for &t in a.eps_from(q) {
            add(q, t, &mut closed, &mut eps_out, &mut eps_in, &mut queue);
        }
    }

    while let Some((x, y)) = queue.pop_front() {
        // Transitivity in both directions around the new edge.
        let successors: Vec<StateId> = eps_out[y].clone();
        for z in successors {
            add(x, z, &mut closed, &mut eps_out, &mut eps_in, &mut queue);
        }
        let predecessors: Vec<StateId> = eps_in[x].clone();
        for w in predecessors {
            add(w, y, &mut closed, &mut eps_out, &mut eps_in, &mut queue);
        }
        // push v into x, ε from x to y, pop v out of y: shortcut around the
        // cancelling pair.
        for &(v, p) in &push_in[x] {
            for &(w, s) in &pop_out[y] {
                if v == w {
                    add(p, s, &mut closed, &mut eps_out, &mut eps_in, &mut queue);
                }
            }
        }
    }

    let mut builder = NfaBuilder::new();
    for _ in 0..n {
        builder.add_state();
    }
    for (q, eps) in eps_out.iter().enumerate() {
        if a.is_initial(q) {
            builder.set_initial(q);
        }
        if a.is_accepting(q) {
            builder.set_accepting(q);
        }
        for (l, t) in a.edges_from(q) {
            builder.add_edge(q, *l, *t);
        }
        for &t in eps {
            builder.add_eps(q, t);
        }
    }
    builder.build()
}

/// The two-state automaton accepting `pop* push*` over the given values.
pub fn popstar_pushstar(values: &[Value]) -> Nfa<StackLetter> {
    let mut b = NfaBuilder::new();
    let pops = b.add_state();
    let pushes = b.add_state();
    b.set_initial(pops);
    b.set_accepting(pops);
    b.set_accepting(pushes);
    for &v in values {
        b.add_edge(pops, StackLetter::Pop(v), pops);
        b.add_edge(pops, StackLetter::Push(v), pushes);
        b.add_edge(pushes, StackLetter::Push(v), pushes);
    }
    b.build()
}

/// Intersects with `pop* push*` over the values occurring in `a`, keeping
/// only normal-form traces. After [`pushpop_close`] this loses no behaviour:
/// every trace reduces to a normal form the closure already accepts.
pub fn filter_popstar_pushstar(a: &Nfa<StackLetter>) -> Nfa<StackLetter> {
    let mut values: Vec<Value> = a
        .letters()
        .into_iter()
        .map(|l| match l {
            StackLetter::Push(v) | StackLetter::Pop(v) => v,
        })
        .collect();
    values.sort_unstable();
    values.dedup();
    a.intersect(&popstar_pushstar(&values)).trim()
}

/// One side of a zip state: still at a state of the underlying automaton,
/// or finished with its half of the word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Part {
    At(StateId),
    Done,
}

/// Zips an automaton's `pop* push*` runs into an automaton over
/// [`ZipLetter`].
///
/// A zip state `(x, y)` tracks two positions in the underlying automaton:
/// starting anywhere in the middle of a run (every diagonal `(q, q)` is
/// initial), `x` walks the pop prefix *backwards* while `y` walks the push
/// suffix forwards, so each step reads one pop and one push matched to the
/// same stack slot. A side that completes — `x` reaching an initial state,
/// `y` reaching an accepting one — becomes `done`, after which the letters
/// carry its half alone; `(done, done)` is the single accepting state.
///
/// Runs of `a` not of the shape `pop* push*` never reach `(done, done)`, so
/// the construction subsumes [`filter_popstar_pushstar`].
pub fn zip_automaton(a: &Nfa<StackLetter>) -> Nfa<ZipLetter> {
    let n = a.num_states();
    let mut pop_in: Vec<Vec<(Value, StateId)>> = vec![Vec::new(); n];
    let mut eps_in: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for q in 0..n {
        for (l, t) in a.edges_from(q) {
            if let StackLetter::Pop(v) = *l {
                pop_in[*t].push((v, q));
            }
        }
        for &t in a.eps_from(q) {
            eps_in[t].push(q);
        }
    }
    let push_out = |q: StateId| {
        a.edges_from(q).iter().filter_map(|(l, t)| match *l {
            StackLetter::Push(w) => Some((w, *t)),
            StackLetter::Pop(_) => None,
        })
    };

    let mut builder: NfaBuilder<ZipLetter> = NfaBuilder::new();
    let mut index: HashMap<(Part, Part), StateId> = HashMap::new();
    let mut queue: VecDeque<(Part, Part)> = VecDeque::new();
    let state = |key: (Part, Part),
                 index: &mut HashMap<(Part, Part), StateId>,
                 builder: &mut NfaBuilder<ZipLetter>,
                 queue: &mut VecDeque<(Part, Part)>|
     -> StateId {
        match index.entry(key) {
            Entry::Occupied(e) => *e.get(),
            Entry::Vacant(e) => {
                let id = builder.add_state();
                e.insert(id);
                queue.push_back(key);
                id
            }
        }
    };

    for q in 0..n {
        let id = state(
            (Part::At(q), Part::At(q)),
            &mut index,
            &mut builder,
            &mut queue,
        );
        builder.set_initial(id);
    }

    while let Some((x, y)) = queue.pop_front() {
        let id = index[&(x, y)];
        if x == Part::Done && y == Part::Done {
            builder.set_accepting(id);
            continue;
        }
        if let (Part::At(l), Part::At(r)) = (x, y) {
            for &(v, lp) in &pop_in[l] {
                for (w, rt) in push_out(r) {
                    let t = state(
                        (Part::At(lp), Part::At(rt)),
                        &mut index,
                        &mut builder,
                        &mut queue,
                    );
                    builder.add_edge(id, ZipLetter::Pair(v, w), t);
                }
            }
        }
        if let (Part::At(l), Part::Done) = (x, y) {
            for &(v, lp) in &pop_in[l] {
                let t = state(
                    (Part::At(lp), Part::Done),
                    &mut index,
                    &mut builder,
                    &mut queue,
                );
                builder.add_edge(id, ZipLetter::PopOnly(v), t);
            }
        }
        if let (Part::Done, Part::At(r)) = (x, y) {
            for (w, rt) in push_out(r) {
                let t = state(
                    (Part::Done, Part::At(rt)),
                    &mut index,
                    &mut builder,
                    &mut queue,
                );
                builder.add_edge(id, ZipLetter::PushOnly(w), t);
            }
        }
        if let Part::At(l) = x {
            for &lp in &eps_in[l] {
                let t = state((Part::At(lp), y), &mut index, &mut builder, &mut queue);
                builder.add_eps(id, t);
            }
            if a.is_initial(l) {
                let t = state((Part::Done, y), &mut index, &mut builder, &mut queue);
                builder.add_eps(id, t);
            }
        }
        if let Part::At(r) = y {
            for &rt in a.eps_from(r) {
                let t = state((x, Part::At(rt)), &mut index, &mut builder, &mut queue);
                builder.add_eps(id, t);
            }
            if a.is_accepting(r) {
                let t = state((x, Part::Done), &mut index, &mut builder, &mut queue);
                builder.add_eps(id, t);
            }
        }
    }
    builder.build()
}

/// Prefixes the language with `{(pop v, push v) : v ∈ values}*`.
///
/// A zipped word extended with diagonal pairs describes the same behaviour
/// on a deeper stack, so canonical languages must be closed under such
/// prefixes. A single fresh state carrying the diagonal self-loops becomes
/// the only initial state, with ε-edges to the former initials.
pub fn poppush_close(z: &Nfa<ZipLetter>, values: &[Value]) -> Nfa<ZipLetter> {
    let mut builder = NfaBuilder::new();
    for _ in 0..z.num_states() {
        builder.add_state();
    }
    for q in 0..z.num_states() {
        if z.is_accepting(q) {
            builder.set_accepting(q);
        }
        for &t in z.eps_from(q) {
            builder.add_eps(q, t);
        }
        for (l, t) in z.edges_from(q) {
            builder.add_edge(q, *l, *t);
        }
    }
    let fresh = builder.add_state();
    builder.set_initial(fresh);
    for &v in values {
        builder.add_edge(fresh, ZipLetter::Pair(v, v), fresh);
    }
    for q in z.initial_states() {
        builder.add_eps(fresh, q);
    }
    builder.build()
}

/// Full canonicalization of a trace automaton over the given value set:
/// push-pop closure, zipping, and pop-push closure, trimming between
/// passes. Two programs are equivalent on a header pair exactly when their
/// canonicalized trace automata accept the same language.
pub fn canonicalize(a: &Nfa<StackLetter>, values: &[Value]) -> Nfa<ZipLetter> {
    let closed = pushpop_close(a).trim();
    let zipped = zip_automaton(&closed).trim();
    poppush_close(&zipped, values).trim()
}

/// Zips a `pop* push*` word: the last pop is paired with the first push,
/// and so on outward; the longer side's leftovers become `PopOnly` /
/// `PushOnly` letters. Returns `None` if the word is not of the shape
/// `pop* push*`.
pub fn zip_word(word: &[StackLetter]) -> Option<Vec<ZipLetter>> {
    let mut pops: Vec<Value> = Vec::new();
    let mut pushes: Vec<Value> = Vec::new();
    for l in word {
        match *l {
            StackLetter::Pop(v) => {
                if !pushes.is_empty() {
                    return None;
                }
                pops.push(v);
            }
            StackLetter::Push(w) => pushes.push(w),
        }
    }
    let k = pops.len();
    let m = pushes.len();
    let mut out = Vec::with_capacity(k.max(m));
    for j in 0..k.max(m) {
        let pop = if j < k { Some(pops[k - 1 - j]) } else { None };
        let push = if j < m { Some(pushes[j]) } else { None };
        out.push(match (pop, push) {
            (Some(v), Some(w)) => ZipLetter::Pair(v, w),
            (Some(v), None) => ZipLetter::PopOnly(v),
            (None, Some(w)) => ZipLetter::PushOnly(w),
            (None, None) => unreachable!("j < max(k, m)"),
        });
    }
    Some(out)
}

/// A word that cannot be the zip of any `pop* push*` trace.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnzipError {
    #[error("pop component at position {0} after the pop side already finished")]
    PopAfterDone(usize),
    #[error("push component at position {0} after the push side already finished")]
    PushAfterDone(usize),
}

/// Inverts [`zip_word`]: recovers the pops and pushes of the underlying
/// trace, each in the order the trace performs them.
///
/// Valid zipped words are `Pair*` followed by only-`PopOnly` or
/// only-`PushOnly` letters; anything else is rejected.
pub fn unzip_word(word: &[ZipLetter]) -> Result<(Vec<Value>, Vec<Value>), UnzipError> {
    let mut pop_components: Vec<Value> = Vec::new();
    let mut push_components: Vec<Value> = Vec::new();
    let mut pops_done = false;
    let mut pushes_done = false;
    for (i, l) in word.iter().enumerate() {
        match *l {
            ZipLetter::Pair(v, w) => {
                if pops_done {
                    return Err(UnzipError::PopAfterDone(i));
                }
                if pushes_done {
                    return Err(UnzipError::PushAfterDone(i));
                }
                pop_components.push(v);
                push_components.push(w);
            }
            ZipLetter::PopOnly(v) => {
                if pops_done {
                    return Err(UnzipError::PopAfterDone(i));
                }
                pushes_done = true;
                pop_components.push(v);
            }
            ZipLetter::PushOnly(w) => {
                if pushes_done {
                    return Err(UnzipError::PushAfterDone(i));
                }
                pops_done = true;
                push_components.push(w);
            }
        }
    }
    pop_components.reverse();
    Ok((pop_components, push_components))
}
