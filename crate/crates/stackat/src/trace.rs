//! Trace automata: the stack behaviour of a program between two fixed
//! headers, as a finite automaton over push/pop letters.
//!
//! Fixing an input header `α1` and an output header `α2` strips a StacKAT
//! program of its header dimension: what remains of a run is the sequence of
//! stack actions it performs — its *trace*, a word over [`StackLetter`].
//! [`build_trace_nfa`] constructs an NFA accepting exactly the traces of
//! runs from `α1` to `α2`.
//!
//! States are pairs `⟨α, rest⟩` of a current header and a list of
//! expressions still to run. Header tests, assignments, and the unfoldings
//! of `+` and `*` become ε-transitions; `push v` / `pop v` emit a letter.
//! Sequences are flattened into the rest-list (dropping `1`s), so a state is
//! final exactly when its rest-list is empty and its header is `α2`. The
//! reachable rest-lists are drawn from the program's subterms, so the state
//! space is finite and exploration terminates.

use std::collections::HashMap;
use std::fmt;

use crate::ast::{Expr, Header, Universe, Value};
use crate::nfa::{Nfa, NfaBuilder};

/// A stack action: the alphabet of trace automata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StackLetter {
    Push(Value),
    Pop(Value),
}

impl fmt::Display for StackLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackLetter::Push(v) => write!(f, "push {v}"),
            StackLetter::Pop(v) => write!(f, "pop {v}"),
        }
    }
}

/// Interned expression nodes. Fields are resolved to universe indices so
/// header operations are array lookups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Zero,
    One,
    Plus(usize, usize),
    Seq(usize, usize),
    Star(usize),
    TestEq(usize, Value),
    TestNeq(usize, Value),
    Assign(usize, Value),
    Push(Value),
    Pop(Value),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
}

impl Arena {
    fn add(&mut self, node: Node) -> usize {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    fn intern(&mut self, e: &Expr, universe: &Universe) -> usize {
        let field = |name: &str| {
            universe
                .field_index(name)
                .unwrap_or_else(|| panic!("field `{name}` is not declared in the universe"))
        };
        let node = match e {
            Expr::Zero => Node::Zero,
            Expr::One => Node::One,
            Expr::Plus(a, b) => {
                let (a, b) = (self.intern(a, universe), self.intern(b, universe));
                Node::Plus(a, b)
            }
            Expr::Seq(a, b) => {
                let (a, b) = (self.intern(a, universe), self.intern(b, universe));
                Node::Seq(a, b)
            }
            Expr::Star(a) => {
                let a = self.intern(a, universe);
                Node::Star(a)
            }
            Expr::TestEq(f, v) => Node::TestEq(field(f), *v),
            Expr::TestNeq(f, v) => Node::TestNeq(field(f), *v),
            Expr::Assign(f, v) => Node::Assign(field(f), *v),
            Expr::Push(v) => Node::Push(*v),
            Expr::Pop(v) => Node::Pop(*v),
        };
        self.add(node)
    }

    /// Appends the sequential components of `id` onto `out`, flattening
    /// nested sequences and dropping `1`s.
    fn flatten_onto(&self, id: usize, out: &mut Vec<usize>) {
        match self.nodes[id] {
            Node::One => {}
            Node::Seq(a, b) => {
                self.flatten_onto(a, out);
                self.flatten_onto(b, out);
            }
            _ => out.push(id),
        }
    }

    /// Reconstructs a syntax tree for a node (state labels only).
    fn to_expr(&self, id: usize, universe: &Universe) -> Expr {
        let name = |i: usize| universe.fields()[i].clone();
        match self.nodes[id] {
            Node::Zero => Expr::Zero,
            Node::One => Expr::One,
            Node::Plus(a, b) => Expr::plus(self.to_expr(a, universe), self.to_expr(b, universe)),
            Node::Seq(a, b) => Expr::seq(self.to_expr(a, universe), self.to_expr(b, universe)),
            Node::Star(a) => Expr::star(self.to_expr(a, universe)),
            Node::TestEq(f, v) => Expr::TestEq(name(f), v),
            Node::TestNeq(f, v) => Expr::TestNeq(name(f), v),
            Node::Assign(f, v) => Expr::Assign(name(f), v),
            Node::Push(v) => Expr::Push(v),
            Node::Pop(v) => Expr::Pop(v),
        }
    }
}

struct Exploration {
    builder: NfaBuilder<StackLetter>,
    /// Key of each state, parallel to the builder's state ids.
    keys: Vec<(Header, Vec<usize>)>,
    arena: Arena,
}

/// Explores all states reachable from `⟨α1, e⟩`, leaving accepting flags
/// unset (they depend on the output header).
fn explore(e: &Expr, a1: &Header, universe: &Universe) -> Exploration {
    let mut arena = Arena::default();
    let root_id = arena.intern(e, universe);
    let mut root = Vec::new();
    arena.flatten_onto(root_id, &mut root);

    let mut builder: NfaBuilder<StackLetter> = NfaBuilder::new();
    let mut keys: Vec<(Header, Vec<usize>)> = Vec::new();
    let mut index: HashMap<(Header, Vec<usize>), usize> = HashMap::new();
    let mut worklist: Vec<usize> = Vec::new();

    let mut state = |key: (Header, Vec<usize>),
                     builder: &mut NfaBuilder<StackLetter>,
                     keys: &mut Vec<(Header, Vec<usize>)>,
                     worklist: &mut Vec<usize>|
     -> usize {
        if let Some(&id) = index.get(&key) {
            return id;
        }
        let id = builder.add_state();
        keys.push(key.clone());
        index.insert(key, id);
        worklist.push(id);
        id
    };

    let root_state = state((a1.clone(), root), &mut builder, &mut keys, &mut worklist);
    builder.set_initial(root_state);

    while let Some(id) = worklist.pop() {
        let (header, rest) = keys[id].clone();
        let Some((&head, tail)) = rest.split_first() else {
            continue;
        };
        match arena.nodes[head].clone() {
            Node::Zero => {}
            Node::One | Node::Seq(..) => {
                unreachable!("rest-lists are flattened and contain no 1 or sequence nodes")
            }
            Node::Plus(a, b) => {
                for branch in [a, b] {
                    let mut next = Vec::new();
                    arena.flatten_onto(branch, &mut next);
                    next.extend_from_slice(tail);
                    let t = state(
                        (header.clone(), next),
                        &mut builder,
                        &mut keys,
                        &mut worklist,
                    );
                    builder.add_eps(id, t);
                }
            }
            Node::Star(body) => {
                let skip = state(
                    (header.clone(), tail.to_vec()),
                    &mut builder,
                    &mut keys,
                    &mut worklist,
                );
                builder.add_eps(id, skip);
                let mut next = Vec::new();
                arena.flatten_onto(body, &mut next);
                next.push(head);
                next.extend_from_slice(tail);
                let enter = state(
                    (header.clone(), next),
                    &mut builder,
                    &mut keys,
                    &mut worklist,
                );
                builder.add_eps(id, enter);
            }
            Node::TestEq(f, v) => {
                if header.get(f) == v {
                    let t = state(
                        (header.clone(), tail.to_vec()),
                        &mut builder,
                        &mut keys,
                        &mut worklist,
                    );
                    builder.add_eps(id, t);
                }
            }
            Node::TestNeq(f, v) => {
                if header.get(f) != v {
                    let t = state(
                        (header.clone(), tail.to_vec()),
                        &mut builder,
                        &mut keys,
                        &mut worklist,
                    );
                    builder.add_eps(id, t);
                }
            }
            Node::Assign(f, v) => {
                let t = state(
                    (header.set(f, v), tail.to_vec()),
                    &mut builder,
                    &mut keys,
                    &mut worklist,
                );
                builder.add_eps(id, t);
            }
            Node::Push(v) => {
                let t = state(
                    (header.clone(), tail.to_vec()),
                    &mut builder,
                    &mut keys,
                    &mut worklist,
                );
                builder.add_edge(id, StackLetter::Push(v), t);
            }
            Node::Pop(v) => {
                let t = state(
                    (header.clone(), tail.to_vec()),
                    &mut builder,
                    &mut keys,
                    &mut worklist,
                );
                builder.add_edge(id, StackLetter::Pop(v), t);
            }
        }
    }
    Exploration {
        builder,
        keys,
        arena,
    }
}

fn mark_accepting(ex: &mut Exploration, a2: &Header) {
    for (id, (header, rest)) in ex.keys.iter().enumerate() {
        if rest.is_empty() && header == a2 {
            ex.builder.set_accepting(id);
        }
    }
}

/// Builds the trace automaton of `e` from input header `a1` to output header
/// `a2`. The accepted language is exactly the set of stack-action sequences
/// of runs of `e` that start at `a1` and end at `a2`.
///
/// The expression must mention only fields and values of the universe.
pub fn build_trace_nfa(
    e: &Expr,
    a1: &Header,
    a2: &Header,
    universe: &Universe,
) -> Nfa<StackLetter> {
    let mut ex = explore(e, a1, universe);
    mark_accepting(&mut ex, a2);
    ex.builder.build()
}

/// Like [`build_trace_nfa`], also returning a human-readable label per state
/// (`header | remaining program`) for DOT rendering.
pub fn build_trace_nfa_labeled(
    e: &Expr,
    a1: &Header,
    a2: &Header,
    universe: &Universe,
) -> (Nfa<StackLetter>, Vec<String>) {
    let mut ex = explore(e, a1, universe);
    mark_accepting(&mut ex, a2);
    let labels = ex
        .keys
        .iter()
        .map(|(header, rest)| {
            let program = if rest.is_empty() {
                "1".to_string()
            } else {
                let expr = Expr::seq_all(rest.iter().map(|&id| ex.arena.to_expr(id, universe)));
                crate::parser::pretty(&expr)
            };
            format!("{} | {}", header.display(universe), program)
        })
        .collect();
    (ex.builder.build(), labels)
}

/// Number of states reachable from `⟨a1, e⟩`, independent of any output
/// header.
pub fn reachable_states(e: &Expr, a1: &Header, universe: &Universe) -> usize {
    explore(e, a1, universe).keys.len()
}
