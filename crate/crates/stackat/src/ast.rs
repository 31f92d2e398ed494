//! Core syntax of StacKAT programs.
//!
//! A StacKAT program is a regular expression over primitive packet actions:
//! field tests `f = v`, negated tests `f != v`, assignments `f := v`, and the
//! stack actions `push v` / `pop v`. [`Expr`] is that core language; every
//! analysis in this crate (the oracle, the trace automaton, the decision
//! procedure) works on it directly.
//!
//! [`SugarExpr`] layers the usual derived forms on top — field-to-field
//! tests, field copies, `push f`/`pop f`, `if`/`while`, and `dup` — and
//! [`desugar`] expands them into core syntax relative to a [`Universe`].
//!
//! The [`Universe`] fixes the finite sets of field names and values a
//! program ranges over. Headers, derived-form expansions, and the decision
//! procedure's header-pair loop all enumerate it in a fixed order, so every
//! result is deterministic.

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// A packet-field value. Values are plain natural numbers; the set of values
/// in play is fixed by the [`Universe`].
pub type Value = u32;

/// A field name. Fields are referenced by name in the syntax and resolved
/// against a [`Universe`] when a program is analyzed.
pub type Field = String;

/// A core StacKAT expression.
///
/// `Zero` rejects every packet, `One` is the identity. `Plus`, `Seq`, and
/// `Star` are the Kleene algebra operators (nondeterministic choice,
/// sequencing, iteration). The remaining constructors are the primitive
/// actions: header tests and assignment, and pushing/popping a concrete
/// value on the packet's stack. `pop v` blocks unless `v` is on top.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Zero,
    One,
    Plus(Box<Expr>, Box<Expr>),
    Seq(Box<Expr>, Box<Expr>),
    Star(Box<Expr>),
    TestEq(Field, Value),
    TestNeq(Field, Value),
    Assign(Field, Value),
    Push(Value),
    Pop(Value),
}

impl Expr {
    pub fn plus(a: Expr, b: Expr) -> Expr {
        Expr::Plus(Box::new(a), Box::new(b))
    }

    pub fn seq(a: Expr, b: Expr) -> Expr {
        Expr::Seq(Box::new(a), Box::new(b))
    }

    pub fn star(e: Expr) -> Expr {
        Expr::Star(Box::new(e))
    }

    pub fn test_eq(f: &str, v: Value) -> Expr {
        Expr::TestEq(f.to_string(), v)
    }

    pub fn test_neq(f: &str, v: Value) -> Expr {
        Expr::TestNeq(f.to_string(), v)
    }

    pub fn assign(f: &str, v: Value) -> Expr {
        Expr::Assign(f.to_string(), v)
    }

    pub fn push(v: Value) -> Expr {
        Expr::Push(v)
    }

    pub fn pop(v: Value) -> Expr {
        Expr::Pop(v)
    }

    /// Sequences the expressions in order; the empty sequence is `One`.
    pub fn seq_all<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut iter = items.into_iter();
        match iter.next() {
            None => Expr::One,
            Some(first) => iter.fold(first, Expr::seq),
        }
    }

    /// Sums the expressions in order; the empty sum is `Zero`.
    pub fn plus_all<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut iter = items.into_iter();
        match iter.next() {
            None => Expr::Zero,
            Some(first) => iter.fold(first, Expr::plus),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Zero
            | Expr::One
            | Expr::TestEq(..)
            | Expr::TestNeq(..)
            | Expr::Assign(..)
            | Expr::Push(..)
            | Expr::Pop(..) => 1,
            Expr::Plus(a, b) | Expr::Seq(a, b) => 1 + a.size() + b.size(),
            Expr::Star(a) => 1 + a.size(),
        }
    }

    /// Number of `push`/`pop` occurrences. Used to size evaluation bounds
    /// when replaying counterexamples.
    pub fn count_stack_ops(&self) -> usize {
        match self {
            Expr::Push(..) | Expr::Pop(..) => 1,
            Expr::Plus(a, b) | Expr::Seq(a, b) => a.count_stack_ops() + b.count_stack_ops(),
            Expr::Star(a) => a.count_stack_ops(),
            _ => 0,
        }
    }

    /// Collects every field name and value mentioned in the expression.
    pub fn mentions(&self) -> (BTreeSet<Field>, BTreeSet<Value>) {
        let mut fields = BTreeSet::new();
        let mut values = BTreeSet::new();
        self.collect_mentions(&mut fields, &mut values);
        (fields, values)
    }

    fn collect_mentions(&self, fields: &mut BTreeSet<Field>, values: &mut BTreeSet<Value>) {
        match self {
            Expr::Zero | Expr::One => {}
            Expr::Plus(a, b) | Expr::Seq(a, b) => {
                a.collect_mentions(fields, values);
                b.collect_mentions(fields, values);
            }
            Expr::Star(a) => a.collect_mentions(fields, values),
            Expr::TestEq(f, v) | Expr::TestNeq(f, v) | Expr::Assign(f, v) => {
                fields.insert(f.clone());
                values.insert(*v);
            }
            Expr::Push(v) | Expr::Pop(v) => {
                values.insert(*v);
            }
        }
    }

    /// True if every field and value mentioned is declared in `universe`.
    pub fn is_over(&self, universe: &Universe) -> bool {
        let (fields, values) = self.mentions();
        fields.iter().all(|f| universe.field_index(f).is_some())
            && values.iter().all(|v| universe.has_value(*v))
    }
}

/// A StacKAT expression with derived forms.
///
/// The core constructors mirror [`Expr`]; the rest are shorthand that
/// [`desugar`] expands by enumerating the universe:
///
/// * `FieldEq(f, g)` / `FieldNeq(f, g)` — test two fields against each other.
/// * `Copy { dst, src }` — assign field `src`'s current value to `dst`.
/// * `PushField(f)` / `PopField(f)` — push field `f`'s value; pop into `f`.
/// * `If` / `While` — conditionals guarded by a single field test.
/// * `Dup` — push the values of all header fields, in universe field order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SugarExpr {
    Zero,
    One,
    Plus(Box<SugarExpr>, Box<SugarExpr>),
    Seq(Box<SugarExpr>, Box<SugarExpr>),
    Star(Box<SugarExpr>),
    TestEq(Field, Value),
    TestNeq(Field, Value),
    Assign(Field, Value),
    Push(Value),
    Pop(Value),
    FieldEq(Field, Field),
    FieldNeq(Field, Field),
    Copy {
        dst: Field,
        src: Field,
    },
    PushField(Field),
    PopField(Field),
    If {
        field: Field,
        value: Value,
        then_branch: Box<SugarExpr>,
        else_branch: Box<SugarExpr>,
    },
    While {
        field: Field,
        value: Value,
        body: Box<SugarExpr>,
    },
    Dup,
}

impl SugarExpr {
    pub fn plus(a: SugarExpr, b: SugarExpr) -> SugarExpr {
        SugarExpr::Plus(Box::new(a), Box::new(b))
    }

    pub fn seq(a: SugarExpr, b: SugarExpr) -> SugarExpr {
        SugarExpr::Seq(Box::new(a), Box::new(b))
    }

    pub fn star(e: SugarExpr) -> SugarExpr {
        SugarExpr::Star(Box::new(e))
    }
}

/// Expands derived forms into core syntax.
///
/// Sums and products introduced by the expansion enumerate values and fields
/// in universe order, so the output is deterministic. Negated tests are core
/// syntax and are kept as-is (see [`eliminate_neq`] for the expansion).
///
/// Expansions, writing `V` for the universe's values and `F` for its fields:
///
/// * `FieldEq(f, g)`  = Σ_{v ∈ V} (f = v · g = v)
/// * `FieldNeq(f, g)` = Π_{v ∈ V} (f != v + g != v)
/// * `Copy{dst, src}` = Σ_{v ∈ V} (src = v · dst := v)
/// * `PushField(f)`   = Σ_{v ∈ V} (f = v · push v)
/// * `PopField(f)`    = Σ_{v ∈ V} (pop v · f := v)
/// * `If(f, v, e1, e2)` = f = v · e1 + f != v · e2
/// * `While(f, v, e)`   = (f = v · e)* · f != v
/// * `Dup`            = Π_{f ∈ F} push f
pub fn desugar(e: &SugarExpr, universe: &Universe) -> Expr {
    match e {
        SugarExpr::Zero => Expr::Zero,
        SugarExpr::One => Expr::One,
        SugarExpr::Plus(a, b) => Expr::plus(desugar(a, universe), desugar(b, universe)),
        SugarExpr::Seq(a, b) => Expr::seq(desugar(a, universe), desugar(b, universe)),
        SugarExpr::Star(a) => Expr::star(desugar(a, universe)),
        SugarExpr::TestEq(f, v) => Expr::TestEq(f.clone(), *v),
        SugarExpr::TestNeq(f, v) => Expr::TestNeq(f.clone(), *v),
        SugarExpr::Assign(f, v) => Expr::Assign(f.clone(), *v),
        SugarExpr::Push(v) => Expr::Push(*v),
        SugarExpr::Pop(v) => Expr::Pop(*v),
        SugarExpr::FieldEq(f, g) => Expr::plus_all(
            universe
                .values()
                .iter()
                .map(|&v| Expr::seq(Expr::TestEq(f.clone(), v), Expr::TestEq(g.clone(), v))),
        ),
        SugarExpr::FieldNeq(f, g) => Expr::seq_all(
            universe
                .values()
                .iter()
                .map(|&v| Expr::plus(Expr::TestNeq(f.clone(), v), Expr::TestNeq(g.clone(), v))),
        ),
        SugarExpr::Copy { dst, src } => Expr::plus_all(
            universe
                .values()
                .iter()
                .map(|&v| Expr::seq(Expr::TestEq(src.clone(), v), Expr::Assign(dst.clone(), v))),
        ),
        SugarExpr::PushField(f) => Expr::plus_all(
            universe
                .values()
                .iter()
                .map(|&v| Expr::seq(Expr::TestEq(f.clone(), v), Expr::Push(v))),
        ),
        SugarExpr::PopField(f) => Expr::plus_all(
            universe
                .values()
                .iter()
                .map(|&v| Expr::seq(Expr::Pop(v), Expr::Assign(f.clone(), v))),
        ),
        SugarExpr::If {
            field,
            value,
            then_branch,
            else_branch,
        } => Expr::plus(
            Expr::seq(
                Expr::TestEq(field.clone(), *value),
                desugar(then_branch, universe),
            ),
            Expr::seq(
                Expr::TestNeq(field.clone(), *value),
                desugar(else_branch, universe),
            ),
        ),
        SugarExpr::While { field, value, body } => Expr::seq(
            Expr::star(Expr::seq(
                Expr::TestEq(field.clone(), *value),
                desugar(body, universe),
            )),
            Expr::TestNeq(field.clone(), *value),
        ),
        SugarExpr::Dup => Expr::seq_all(
            universe
                .fields()
                .iter()
                .map(|f| desugar(&SugarExpr::PushField(f.clone()), universe)),
        ),
    }
}

/// Rewrites every `f != v` into the sum of `f = w` over all `w ≠ v` in the
/// universe. The result uses no `TestNeq` nodes and has the same semantics
/// over that universe.
pub fn eliminate_neq(e: &Expr, universe: &Universe) -> Expr {
    match e {
        Expr::TestNeq(f, v) => Expr::plus_all(
            universe
                .values()
                .iter()
                .filter(|&&w| w != *v)
                .map(|&w| Expr::TestEq(f.clone(), w)),
        ),
        Expr::Plus(a, b) => Expr::plus(eliminate_neq(a, universe), eliminate_neq(b, universe)),
        Expr::Seq(a, b) => Expr::seq(eliminate_neq(a, universe), eliminate_neq(b, universe)),
        Expr::Star(a) => Expr::star(eliminate_neq(a, universe)),
        other => other.clone(),
    }
}

/// Error building a [`Universe`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum UniverseError {
    /// The value set may not be empty: stack letters and header contents
    /// range over it, and several expansions sum over it.
    #[error("universe must declare at least one value")]
    EmptyValues,
}

/// The finite sets of field names and values a program ranges over.
///
/// Fields and values are kept sorted and deduplicated, which fixes the
/// enumeration order used for headers, desugaring, and the decision
/// procedure's header-pair loop. The field set may be empty (pure stack
/// programs); the value set may not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    fields: Vec<Field>,
    values: Vec<Value>,
    field_index: HashMap<Field, usize>,
}

impl Universe {
    pub fn new(fields: Vec<Field>, values: Vec<Value>) -> Result<Universe, UniverseError> {
        if values.is_empty() {
            return Err(UniverseError::EmptyValues);
        }
        let mut fields = fields;
        fields.sort();
        fields.dedup();
        let mut values = values;
        values.sort_unstable();
        values.dedup();
        let field_index = fields
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i))
            .collect();
        Ok(Universe {
            fields,
            values,
            field_index,
        })
    }

    /// Universe covering everything the given expressions mention. If no
    /// value occurs anywhere, the value set defaults to `{0}` so the
    /// universe stays well-formed.
    pub fn inferred_from(exprs: &[&Expr]) -> Universe {
        let mut fields = BTreeSet::new();
        let mut values = BTreeSet::new();
        for e in exprs {
            e.collect_mentions(&mut fields, &mut values);
        }
        if values.is_empty() {
            values.insert(0);
        }
        Universe::new(fields.into_iter().collect(), values.into_iter().collect())
            .expect("value set is non-empty by construction")
    }

    /// Fields, in enumeration order (sorted).
    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    /// Values, in enumeration order (sorted).
    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.field_index.get(name).copied()
    }

    pub fn has_value(&self, v: Value) -> bool {
        self.values.binary_search(&v).is_ok()
    }

    /// Number of distinct headers, i.e. `|values| ^ |fields|`.
    ///
    /// # Panics
    ///
    /// Panics if the count overflows `usize`; header spaces that large are
    /// far beyond anything enumerable anyway.
    pub fn header_count(&self) -> usize {
        let mut n: usize = 1;
        for _ in &self.fields {
            n = n
                .checked_mul(self.values.len())
                .expect("header space overflows usize");
        }
        n
    }

    /// All headers, in lexicographic order: the first field varies slowest,
    /// each field ranging over the universe's values in order. With no
    /// fields this yields exactly one (empty) header.
    pub fn headers(&self) -> impl Iterator<Item = Header> + '_ {
        let total = self.header_count();
        (0..total).map(move |mut idx| {
            let mut vals = vec![0; self.fields.len()];
            for slot in vals.iter_mut().rev() {
                *slot = self.values[idx % self.values.len()];
                idx /= self.values.len();
            }
            Header(vals)
        })
    }

    /// The header assigning every field the smallest universe value.
    pub fn min_header(&self) -> Header {
        Header(vec![self.values[0]; self.fields.len()])
    }

    /// Universe with the same values but only the given subset of fields.
    /// Field names not present in `self` are ignored.
    pub fn restrict_fields(&self, keep: &BTreeSet<Field>) -> Universe {
        let fields = self
            .fields
            .iter()
            .filter(|f| keep.contains(*f))
            .cloned()
            .collect();
        Universe::new(fields, self.values.clone()).expect("restriction keeps values intact")
    }
}

/// A packet header: one value per universe field, in universe field order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Header(pub Vec<Value>);

impl Header {
    pub fn get(&self, field: usize) -> Value {
        self.0[field]
    }

    pub fn set(&self, field: usize, v: Value) -> Header {
        let mut vals = self.0.clone();
        vals[field] = v;
        Header(vals)
    }

    /// Renders the header against a universe's field names, e.g. `f=1,g=0`.
    /// The empty header renders as `·`.
    pub fn display<'a>(&'a self, universe: &'a Universe) -> HeaderDisplay<'a> {
        HeaderDisplay {
            header: self,
            universe,
        }
    }
}

pub struct HeaderDisplay<'a> {
    header: &'a Header,
    universe: &'a Universe,
}

impl fmt::Display for HeaderDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.header.0.is_empty() {
            return write!(f, "·");
        }
        for (i, (name, v)) in self
            .universe
            .fields()
            .iter()
            .zip(&self.header.0)
            .enumerate()
        {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{name}={v}")?;
        }
        Ok(())
    }
}
