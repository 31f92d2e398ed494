//! Nondeterministic finite automata with ε-transitions, generic over the
//! letter type.
//!
//! Everything downstream of the trace construction is an operation on these
//! automata: ε-saturation, product intersection, trimming, and — the
//! operation the whole decision procedure reduces to — language equivalence
//! with a shortest distinguishing word as witness.
//!
//! States are dense `usize` ids assigned by [`NfaBuilder`]. Edge lists are
//! kept sorted, and every search explores letters in sorted order, so each
//! operation is deterministic: equal inputs produce equal automata and equal
//! witnesses.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::hash::Hash;

pub type StateId = usize;

/// Which of two compared automata (or programs) a witness belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Result of a language-equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LanguageComparison<L> {
    Equivalent,
    /// `word` is accepted by exactly one automaton, namely `accepted_by`.
    /// It is the shortest such word, and lexicographically least among the
    /// shortest (by the letter type's `Ord`).
    Inequivalent {
        word: Vec<L>,
        accepted_by: Side,
    },
}

/// An NFA under construction. States are created explicitly; edges may be
/// added in any order and are deduplicated.
#[derive(Debug, Clone)]
pub struct NfaBuilder<L> {
    eps: Vec<BTreeSet<StateId>>,
    edges: Vec<BTreeSet<(L, StateId)>>,
    initial: Vec<bool>,
    accepting: Vec<bool>,
}

impl<L: Ord + Clone> Default for NfaBuilder<L> {
    fn default() -> Self {
        NfaBuilder::new()
    }
}

impl<L: Ord + Clone> NfaBuilder<L> {
    pub fn new() -> NfaBuilder<L> {
        NfaBuilder {
            eps: Vec::new(),
            edges: Vec::new(),
            initial: Vec::new(),
            accepting: Vec::new(),
        }
    }

    pub fn add_state(&mut self) -> StateId {
        self.eps.push(BTreeSet::new());
        self.edges.push(BTreeSet::new());
        self.initial.push(false);
        self.accepting.push(false);
        self.eps.len() - 1
    }

    pub fn num_states(&self) -> usize {
        self.eps.len()
    }

    pub fn add_eps(&mut self, from: StateId, to: StateId) {
        self.eps[from].insert(to);
    }

    pub fn add_edge(&mut self, from: StateId, letter: L, to: StateId) {
        self.edges[from].insert((letter, to));
    }

    pub fn set_initial(&mut self, q: StateId) {
        self.initial[q] = true;
    }

    pub fn set_accepting(&mut self, q: StateId) {
        self.accepting[q] = true;
    }

    pub fn build(self) -> Nfa<L> {
        Nfa {
            eps: self
                .eps
                .into_iter()
                .map(|s| s.into_iter().collect())
                .collect(),
            edges: self
                .edges
                .into_iter()
                .map(|s| s.into_iter().collect())
                .collect(),
            initial: self.initial,
            accepting: self.accepting,
        }
    }
}

/// An ε-NFA over letters `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa<L> {
    eps: Vec<Vec<StateId>>,
    edges: Vec<Vec<(L, StateId)>>,
    initial: Vec<bool>,
    accepting: Vec<bool>,
}

impl<L: Ord + Clone> Nfa<L> {
    /// The automaton with no states; its language is empty.
    pub fn empty() -> Nfa<L> {
        NfaBuilder::new().build()
    }

    pub fn num_states(&self) -> usize {
        self.eps.len()
    }

    pub fn is_initial(&self, q: StateId) -> bool {
        self.initial[q]
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn initial_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.num_states()).filter(|&q| self.initial[q])
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.num_states()).filter(|&q| self.accepting[q])
    }

    pub fn eps_from(&self, q: StateId) -> &[StateId] {
        &self.eps[q]
    }

    pub fn edges_from(&self, q: StateId) -> &[(L, StateId)] {
        &self.edges[q]
    }

    /// All distinct letters on edges, sorted.
    pub fn letters(&self) -> Vec<L> {
        let set: BTreeSet<L> = self
            .edges
            .iter()
            .flatten()
            .map(|(l, _)| l.clone())
            .collect();
        set.into_iter().collect()
    }

    /// ε-closure of a set of states, sorted and deduplicated. Always
    /// includes the states themselves.
    pub fn eps_closure_of<I: IntoIterator<Item = StateId>>(&self, states: I) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<StateId> = Vec::new();
        for q in states {
            if !seen[q] {
                seen[q] = true;
                stack.push(q);
            }
        }
        while let Some(q) = stack.pop() {
            for &r in &self.eps[q] {
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        (0..self.num_states()).filter(|&q| seen[q]).collect()
    }

    /// States reachable from `set` on one `letter` edge (no ε-closure).
    pub fn step(&self, set: &[StateId], letter: &L) -> Vec<StateId> {
        let mut out = BTreeSet::new();
        for &q in set {
            for (l, t) in &self.edges[q] {
                if l == letter {
                    out.insert(*t);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Replaces the ε relation with its reflexive-transitive closure,
    /// leaving letter edges untouched.
    pub fn saturate_eps(&self) -> Nfa<L> {
        let mut out = self.clone();
        for q in 0..self.num_states() {
            out.eps[q] = self.eps_closure_of([q]);
        }
        out
    }

    pub fn accepts(&self, word: &[L]) -> bool {
        let mut current = self.eps_closure_of(self.initial_states());
        for letter in word {
            current = self.eps_closure_of(self.step(&current, letter));
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|&q| self.accepting[q])
    }

    /// True if the automaton accepts no word at all.
    pub fn is_empty_language(&self) -> bool {
        let reach = self.eps_closure_of(self.initial_states());
        let mut seen = vec![false; self.num_states()];
        let mut stack = reach;
        for &q in &stack {
            seen[q] = true;
        }
        while let Some(q) = stack.pop() {
            if self.accepting[q] {
                return false;
            }
            for (_, t) in &self.edges[q] {
                if !seen[*t] {
                    seen[*t] = true;
                    stack.push(*t);
                }
            }
            for &t in &self.eps[q] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        true
    }

    /// Restricts to states that are both reachable from an initial state and
    /// co-reachable from an accepting state, renumbering densely. The
    /// language is unchanged. Useful between pipeline passes, which can
    /// otherwise accumulate dead states.
    pub fn trim(&self) -> Nfa<L> {
        let n = self.num_states();
        let mut forward = vec![false; n];
        let mut stack: Vec<StateId> = self.initial_states().collect();
        for &q in &stack {
            forward[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &t in &self.eps[q] {
                if !forward[t] {
                    forward[t] = true;
                    stack.push(t);
                }
            }
            for (_, t) in &self.edges[q] {
                if !forward[*t] {
                    forward[*t] = true;
                    stack.push(*t);
                }
            }
        }

        let mut rev_eps: Vec<Vec<StateId>> = vec![Vec::new(); n];
        let mut rev_edges: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for q in 0..n {
            for &t in &self.eps[q] {
                rev_eps[t].push(q);
            }
            for (_, t) in &self.edges[q] {
                rev_edges[*t].push(q);
            }
        }
        let mut backward = vec![false; n];
        let mut stack: Vec<StateId> = self.accepting_states().collect();
        for &q in &stack {
            backward[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &t in rev_eps[q].iter().chain(&rev_edges[q]) {
                if !backward[t] {
                    backward[t] = true;
                    stack.push(t);
                }
            }
        }

        let mut renumber: Vec<Option<StateId>> = vec![None; n];
        let mut builder = NfaBuilder::new();
        for q in 0..n {
            if forward[q] && backward[q] {
                renumber[q] = Some(builder.add_state());
            }
        }
        for q in 0..n {
            let Some(nq) = renumber[q] else { continue };
            if self.initial[q] {
                builder.set_initial(nq);
            }
            if self.accepting[q] {
                builder.set_accepting(nq);
            }
            for &t in &self.eps[q] {
                if let Some(nt) = renumber[t] {
                    builder.add_eps(nq, nt);
                }
            }
            for (l, t) in &self.edges[q] {
                if let Some(nt) = renumber[*t] {
                    builder.add_edge(nq, l.clone(), nt);
                }
            }
        }
        builder.build()
    }

    /// Product automaton accepting the intersection of the two languages.
    /// Only pairs reachable from the initial pairs are constructed.
    pub fn intersect(&self, other: &Nfa<L>) -> Nfa<L> {
        let mut builder = NfaBuilder::new();
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut queue: VecDeque<(StateId, StateId)> = VecDeque::new();

        for p in self.initial_states() {
            for q in other.initial_states() {
                let id = builder.add_state();
                builder.set_initial(id);
                index.insert((p, q), id);
                queue.push_back((p, q));
            }
        }

        while let Some((p, q)) = queue.pop_front() {
            let id = index[&(p, q)];
            if self.accepting[p] && other.accepting[q] {
                builder.set_accepting(id);
            }
            let add = |index: &mut HashMap<(StateId, StateId), StateId>,
                       builder: &mut NfaBuilder<L>,
                       queue: &mut VecDeque<(StateId, StateId)>,
                       target: (StateId, StateId)|
             -> StateId {
                match index.entry(target) {
                    Entry::Occupied(e) => *e.get(),
                    Entry::Vacant(e) => {
                        let nid = builder.add_state();
                        e.insert(nid);
                        queue.push_back(target);
                        nid
                    }
                }
            };
            for &t in &self.eps[p] {
                let nid = add(&mut index, &mut builder, &mut queue, (t, q));
                builder.add_eps(id, nid);
            }
            for &t in &other.eps[q] {
                let nid = add(&mut index, &mut builder, &mut queue, (p, t));
                builder.add_eps(id, nid);
            }
            for (l, t) in &self.edges[p] {
                for (m, s) in &other.edges[q] {
                    if l == m {
                        let nid = add(&mut index, &mut builder, &mut queue, (*t, *s));
                        builder.add_edge(id, l.clone(), nid);
                    }
                }
            }
        }
        builder.build()
    }

    /// The shortest accepted word (lexicographically least among the
    /// shortest), or `None` for the empty language.
    pub fn shortest_word(&self) -> Option<Vec<L>>
    where
        L: Hash,
    {
        struct Node<L> {
            parent: Option<(usize, L)>,
        }
        let root = self.eps_closure_of(self.initial_states());
        let mut nodes: Vec<Node<L>> = vec![Node { parent: None }];
        let mut visited: HashMap<Vec<StateId>, usize> = HashMap::new();
        visited.insert(root.clone(), 0);
        let mut queue: VecDeque<(Vec<StateId>, usize)> = VecDeque::new();
        queue.push_back((root.clone(), 0));

        let reconstruct = |nodes: &[Node<L>], mut idx: usize| {
            let mut word = Vec::new();
            while let Some((p, l)) = &nodes[idx].parent {
                word.push(l.clone());
                idx = *p;
            }
            word.reverse();
            word
        };

        if root.iter().any(|&q| self.accepting[q]) {
            return Some(Vec::new());
        }
        while let Some((set, idx)) = queue.pop_front() {
            let letters: BTreeSet<L> = set
                .iter()
                .flat_map(|&q| self.edges[q].iter().map(|(l, _)| l.clone()))
                .collect();
            for letter in letters {
                let next = self.eps_closure_of(self.step(&set, &letter));
                if next.is_empty() || visited.contains_key(&next) {
                    continue;
                }
                let nidx = nodes.len();
                nodes.push(Node {
                    parent: Some((idx, letter)),
                });
                visited.insert(next.clone(), nidx);
                if next.iter().any(|&q| self.accepting[q]) {
                    return Some(reconstruct(&nodes, nidx));
                }
                queue.push_back((next, nidx));
            }
        }
        None
    }

    /// All accepted words of length at most `max_len`.
    ///
    /// Enumerates the word tree, so the cost is exponential in `max_len`;
    /// intended for cross-checking small automata in tests.
    pub fn accepted_words_up_to(&self, max_len: usize) -> BTreeSet<Vec<L>> {
        let mut out = BTreeSet::new();
        let root = self.eps_closure_of(self.initial_states());
        let mut stack: Vec<(Vec<StateId>, Vec<L>)> = vec![(root, Vec::new())];
        while let Some((set, word)) = stack.pop() {
            if set.iter().any(|&q| self.accepting[q]) {
                out.insert(word.clone());
            }
            if word.len() == max_len {
                continue;
            }
            let letters: BTreeSet<L> = set
                .iter()
                .flat_map(|&q| self.edges[q].iter().map(|(l, _)| l.clone()))
                .collect();
            for letter in letters {
                let next = self.eps_closure_of(self.step(&set, &letter));
                if next.is_empty() {
                    continue;
                }
                let mut next_word = word.clone();
                next_word.push(letter);
                stack.push((next, next_word));
            }
        }
        out
    }

    /// Graphviz rendering. `label` names each state, `letter` each edge
    /// letter; ε edges are labeled `ε`, initial states get an inbound arrow
    /// from an invisible point, accepting states are double-circled.
    pub fn to_dot(
        &self,
        name: &str,
        label: impl Fn(StateId) -> String,
        letter: impl Fn(&L) -> String,
    ) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {name} {{");
        let _ = writeln!(out, "  rankdir=LR;");
        for q in 0..self.num_states() {
            let shape = if self.accepting[q] {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(
                out,
                "  q{q} [shape={shape} label=\"{}\"];",
                escape(&label(q))
            );
            if self.initial[q] {
                let _ = writeln!(out, "  init{q} [shape=point style=invis];");
                let _ = writeln!(out, "  init{q} -> q{q};");
            }
        }
        for q in 0..self.num_states() {
            for &t in &self.eps[q] {
                let _ = writeln!(out, "  q{q} -> q{t} [label=\"ε\"];");
            }
            for (l, t) in &self.edges[q] {
                let _ = writeln!(out, "  q{q} -> q{t} [label=\"{}\"];", escape(&letter(l)));
            }
        }
        let _ = writeln!(out, "}}");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Compares the languages of two automata by breadth-first search over the
/// determinized product. On a mismatch returns the shortest distinguishing
/// word (lexicographically least among the shortest) and which side accepts
/// it.
pub fn language_equivalent<L: Ord + Clone + Hash>(a: &Nfa<L>, b: &Nfa<L>) -> LanguageComparison<L> {
    struct Node<L> {
        parent: Option<(usize, L)>,
    }
    type Key = (Vec<StateId>, Vec<StateId>);

    let accepts_in = |nfa: &Nfa<L>, set: &[StateId]| set.iter().any(|&q| nfa.is_accepting(q));
    let mismatch = |xa: &[StateId], xb: &[StateId]| -> Option<Side> {
        match (accepts_in(a, xa), accepts_in(b, xb)) {
            (true, false) => Some(Side::Left),
            (false, true) => Some(Side::Right),
            _ => None,
        }
    };
    let reconstruct = |nodes: &[Node<L>], mut idx: usize| {
        let mut word = Vec::new();
        while let Some((p, l)) = &nodes[idx].parent {
            word.push(l.clone());
            idx = *p;
        }
        word.reverse();
        word
    };

    let root: Key = (
        a.eps_closure_of(a.initial_states()),
        b.eps_closure_of(b.initial_states()),
    );
    if let Some(side) = mismatch(&root.0, &root.1) {
        return LanguageComparison::Inequivalent {
            word: Vec::new(),
            accepted_by: side,
        };
    }
    let mut nodes: Vec<Node<L>> = vec![Node { parent: None }];
    let mut visited: HashMap<Key, usize> = HashMap::new();
    visited.insert(root.clone(), 0);
    let mut queue: VecDeque<(Key, usize)> = VecDeque::new();
    queue.push_back((root, 0));

    while let Some(((xa, xb), idx)) = queue.pop_front() {
        let letters: BTreeSet<L> = xa
            .iter()
            .flat_map(|&q| a.edges_from(q).iter().map(|(l, _)| l.clone()))
            .chain(
                xb.iter()
                    .flat_map(|&q| b.edges_from(q).iter().map(|(l, _)| l.clone())),
            )
            .collect();
        for l in letters {
            let ya = a.eps_closure_of(a.step(&xa, &l));
            let yb = b.eps_closure_of(b.step(&xb, &l));
            let key = (ya, yb);
            if visited.contains_key(&key) {
                continue;
            }
            let nidx = nodes.len();
            nodes.push(Node {
                parent: Some((idx, l)),
            });
            visited.insert(key.clone(), nidx);
            if let Some(side) = mismatch(&key.0, &key.1) {
                return LanguageComparison::Inequivalent {
                    word: reconstruct(&nodes, nidx),
                    accepted_by: side,
                };
            }
            queue.push_back((key, nidx));
        }
    }
    LanguageComparison::Equivalent
}
