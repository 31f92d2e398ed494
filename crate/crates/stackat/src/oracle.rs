//! Brute-force reference semantics.
//!
//! A StacKAT program denotes a relation on packets: [`eval`] computes the
//! set of output packets reachable from one input, exploring the relation
//! directly and discarding any packet whose stack grows beyond a caller
//! -supplied bound. That makes it slow but obviously faithful to the
//! definition, so it serves as the ground truth the automaton pipeline is
//! validated against: [`refute`] searches for a concrete input on which two
//! programs disagree, and the decision procedure replays its counterexamples
//! through [`eval`] before reporting them.
//!
//! Bounded evaluation truncates: a packet is dropped the moment its stack
//! exceeds the bound, even if later pops would have shrunk it again. The
//! helpers here pick their internal bounds with explicit headroom so that
//! truncation cannot masquerade as a semantic difference; see [`refute`] for
//! the exact margins.

use std::collections::BTreeSet;

use crate::ast::{Expr, Header, SugarExpr, Universe, Value};

/// A packet: a header plus a stack of values. `stack[0]` is the top.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Packet {
    pub header: Header,
    pub stack: Vec<Value>,
}

impl Packet {
    pub fn new(header: Header, stack: Vec<Value>) -> Packet {
        Packet { header, stack }
    }

    fn push(&self, v: Value) -> Packet {
        let mut stack = Vec::with_capacity(self.stack.len() + 1);
        stack.push(v);
        stack.extend_from_slice(&self.stack);
        Packet {
            header: self.header.clone(),
            stack,
        }
    }

    fn pop(&self, v: Value) -> Option<Packet> {
        if self.stack.first() == Some(&v) {
            Some(Packet {
                header: self.header.clone(),
                stack: self.stack[1..].to_vec(),
            })
        } else {
            None
        }
    }
}

fn field_index(universe: &Universe, name: &str) -> usize {
    universe
        .field_index(name)
        .unwrap_or_else(|| panic!("field `{name}` is not declared in the universe"))
}

/// All packets the program can produce from `input`, keeping only packets
/// whose stack never exceeds `bound` elements at any point.
///
/// An input whose stack already exceeds the bound yields the empty set. The
/// expression must mention only fields declared in the universe; an
/// undeclared field is a caller bug and panics.
pub fn eval(e: &Expr, input: &Packet, universe: &Universe, bound: usize) -> BTreeSet<Packet> {
    let mut out = BTreeSet::new();
    if input.stack.len() <= bound {
        eval_into(e, input, universe, bound, &mut out);
    }
    out
}

fn eval_into(e: &Expr, p: &Packet, universe: &Universe, bound: usize, out: &mut BTreeSet<Packet>) {
    match e {
        Expr::Zero => {}
        Expr::One => {
            out.insert(p.clone());
        }
        Expr::TestEq(f, v) => {
            if p.header.get(field_index(universe, f)) == *v {
                out.insert(p.clone());
            }
        }
        Expr::TestNeq(f, v) => {
            if p.header.get(field_index(universe, f)) != *v {
                out.insert(p.clone());
            }
        }
        Expr::Assign(f, v) => {
            out.insert(Packet {
                header: p.header.set(field_index(universe, f), *v),
                stack: p.stack.clone(),
            });
        }
        Expr::Push(v) => {
            if p.stack.len() < bound {
                out.insert(p.push(*v));
            }
        }
        Expr::Pop(v) => {
            if let Some(q) = p.pop(*v) {
                out.insert(q);
            }
        }
        Expr::Plus(a, b) => {
            eval_into(a, p, universe, bound, out);
            eval_into(b, p, universe, bound, out);
        }
        Expr::Seq(a, b) => {
            for q in eval(a, p, universe, bound) {
                eval_into(b, &q, universe, bound, out);
            }
        }
        Expr::Star(body) => {
            let mut seen = BTreeSet::from([p.clone()]);
            let mut frontier = vec![p.clone()];
            while let Some(q) = frontier.pop() {
                for r in eval(body, &q, universe, bound) {
                    if seen.insert(r.clone()) {
                        frontier.push(r);
                    }
                }
            }
            out.extend(seen);
        }
    }
}

/// [`eval`] lifted to a set of inputs.
pub fn eval_set(
    e: &Expr,
    inputs: &BTreeSet<Packet>,
    universe: &Universe,
    bound: usize,
) -> BTreeSet<Packet> {
    let mut out = BTreeSet::new();
    for p in inputs {
        out.extend(eval(e, p, universe, bound));
    }
    out
}

/// Like [`eval`], but interprets derived forms directly instead of
/// expanding them: `if`/`while` branch and iterate on the tested field,
/// `push f` pushes the field's current value, `pop f` pops whatever is on
/// top into the field, and `dup` pushes every field in universe order.
///
/// This gives desugaring an independent cross-check: for programs and
/// stacks over the universe, `eval_sugar(e)` must agree with
/// `eval(desugar(e))`.
pub fn eval_sugar(
    e: &SugarExpr,
    input: &Packet,
    universe: &Universe,
    bound: usize,
) -> BTreeSet<Packet> {
    let mut out = BTreeSet::new();
    if input.stack.len() <= bound {
        eval_sugar_into(e, input, universe, bound, &mut out);
    }
    out
}

fn eval_sugar_into(
    e: &SugarExpr,
    p: &Packet,
    universe: &Universe,
    bound: usize,
    out: &mut BTreeSet<Packet>,
) {
    match e {
        SugarExpr::Zero => {}
        SugarExpr::One => {
            out.insert(p.clone());
        }
        SugarExpr::TestEq(f, v) => {
            if p.header.get(field_index(universe, f)) == *v {
                out.insert(p.clone());
            }
        }
        SugarExpr::TestNeq(f, v) => {
            if p.header.get(field_index(universe, f)) != *v {
                out.insert(p.clone());
            }
        }
        SugarExpr::Assign(f, v) => {
            out.insert(Packet {
                header: p.header.set(field_index(universe, f), *v),
                stack: p.stack.clone(),
            });
        }
        SugarExpr::Push(v) => {
            if p.stack.len() < bound {
                out.insert(p.push(*v));
            }
        }
        SugarExpr::Pop(v) => {
            if let Some(q) = p.pop(*v) {
                out.insert(q);
            }
        }
        SugarExpr::Plus(a, b) => {
            eval_sugar_into(a, p, universe, bound, out);
            eval_sugar_into(b, p, universe, bound, out);
        }
        SugarExpr::Seq(a, b) => {
            for q in eval_sugar(a, p, universe, bound) {
                eval_sugar_into(b, &q, universe, bound, out);
            }
        }
        SugarExpr::Star(body) => {
            let mut seen = BTreeSet::from([p.clone()]);
            let mut frontier = vec![p.clone()];
            while let Some(q) = frontier.pop() {
                for r in eval_sugar(body, &q, universe, bound) {
                    if seen.insert(r.clone()) {
                        frontier.push(r);
                    }
                }
            }
            out.extend(seen);
        }
        SugarExpr::FieldEq(f, g) => {
            let (fi, gi) = (field_index(universe, f), field_index(universe, g));
            if p.header.get(fi) == p.header.get(gi) {
                out.insert(p.clone());
            }
        }
        SugarExpr::FieldNeq(f, g) => {
            let (fi, gi) = (field_index(universe, f), field_index(universe, g));
            if p.header.get(fi) != p.header.get(gi) {
                out.insert(p.clone());
            }
        }
        SugarExpr::Copy { dst, src } => {
            let v = p.header.get(field_index(universe, src));
            out.insert(Packet {
                header: p.header.set(field_index(universe, dst), v),
                stack: p.stack.clone(),
            });
        }
        SugarExpr::PushField(f) => {
            let v = p.header.get(field_index(universe, f));
            if p.stack.len() < bound {
                out.insert(p.push(v));
            }
        }
        SugarExpr::PopField(f) => {
            if let Some((&top, rest)) = p.stack.split_first() {
                out.insert(Packet {
                    header: p.header.set(field_index(universe, f), top),
                    stack: rest.to_vec(),
                });
            }
        }
        SugarExpr::If {
            field,
            value,
            then_branch,
            else_branch,
        } => {
            if p.header.get(field_index(universe, field)) == *value {
                eval_sugar_into(then_branch, p, universe, bound, out);
            } else {
                eval_sugar_into(else_branch, p, universe, bound, out);
            }
        }
        SugarExpr::While { field, value, body } => {
            let fi = field_index(universe, field);
            let mut seen = BTreeSet::from([p.clone()]);
            let mut frontier = vec![p.clone()];
            while let Some(q) = frontier.pop() {
                if q.header.get(fi) != *value {
                    continue;
                }
                for r in eval_sugar(body, &q, universe, bound) {
                    if seen.insert(r.clone()) {
                        frontier.push(r);
                    }
                }
            }
            out.extend(seen.into_iter().filter(|q| q.header.get(fi) != *value));
        }
        SugarExpr::Dup => {
            let mut q = p.clone();
            if q.stack.len() + universe.fields().len() > bound {
                return;
            }
            for fi in 0..universe.fields().len() {
                q = q.push(q.header.get(fi));
            }
            out.insert(q);
        }
    }
}

/// Extra stack depth [`refute`] grants evaluation beyond the comparison cap,
/// so that runs which briefly overshoot the cap still produce their small
/// outputs.
pub const DEPTH_HEADROOM: usize = 8;

/// How far beyond the input-stack bound [`refute`] still compares outputs.
pub const OUTPUT_SLACK: usize = 4;

/// Searches for an input on which the two programs produce different output
/// sets, by brute force. Returns the first difference found as an
/// `(input, output)` pair, where the output packet belongs to exactly one
/// program's output set; `None` means no difference was found within the
/// bound (which is evidence, not proof, of equivalence).
///
/// Candidate inputs are enumerated deterministically — headers in
/// lexicographic order and, within a header, stacks over the universe's
/// values by length then lexicographically, up to length `bound` — so equal
/// calls return identical witnesses. The witness output is the smallest
/// packet in the symmetric difference of the two output sets.
///
/// Truncation margins: outputs are compared only up to stack size
/// `bound + OUTPUT_SLACK`, while evaluation runs with stack bound
/// `bound + DEPTH_HEADROOM`. A difference is therefore spurious only if one
/// program can produce a compared output solely via runs that exceed even
/// the evaluation bound — i.e. runs that push more than
/// `DEPTH_HEADROOM - OUTPUT_SLACK` elements beyond any stack they later
/// return to. Programs with that much transient stack excursion need a
/// larger `bound` for refute's answer to be trustworthy.
pub fn refute(e1: &Expr, e2: &Expr, universe: &Universe, bound: usize) -> Option<(Packet, Packet)> {
    let eval_bound = bound + DEPTH_HEADROOM;
    let compare_cap = bound + OUTPUT_SLACK;
    for header in universe.headers() {
        for stack in stacks_up_to(universe.values(), bound) {
            let input = Packet::new(header.clone(), stack);
            let out1: BTreeSet<Packet> = eval(e1, &input, universe, eval_bound)
                .into_iter()
                .filter(|q| q.stack.len() <= compare_cap)
                .collect();
            let out2: BTreeSet<Packet> = eval(e2, &input, universe, eval_bound)
                .into_iter()
                .filter(|q| q.stack.len() <= compare_cap)
                .collect();
            if out1 != out2 {
                let witness = out1
                    .symmetric_difference(&out2)
                    .next()
                    .expect("sets differ, so the symmetric difference is non-empty")
                    .clone();
                return Some((input, witness));
            }
        }
    }
    None
}

/// All stacks over `values` of length at most `max_len`, ordered by length
/// and then lexicographically.
pub fn stacks_up_to(values: &[Value], max_len: usize) -> Vec<Vec<Value>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<Value>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * values.len());
        for s in &layer {
            for &v in values {
                let mut t = s.clone();
                t.push(v);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
