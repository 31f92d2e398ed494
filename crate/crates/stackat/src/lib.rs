//! Deciding equivalence of StacKAT programs.
//!
//! StacKAT extends the NetKAT packet-programming language with a per-packet
//! stack: programs are regular expressions over header tests (`f = v`,
//! `f != v`), assignments (`f := v`), and stack actions (`push v`,
//! `pop v`). Equivalence — do two programs relate exactly the same input
//! and output packets? — is decidable, and this crate decides it:
//!
//! * [`ast`] / [`parser`] — the program syntax, derived forms, and the
//!   universe of fields and values a program ranges over.
//! * [`oracle`] — slow, obviously-correct bounded evaluation, used to
//!   cross-validate everything else and to replay counterexamples.
//! * [`trace`] — for each input/output header pair, the automaton of stack
//!   traces a program can perform between them.
//! * [`canon`] — canonicalization of trace automata, so that language
//!   equality coincides with semantic equivalence.
//! * [`nfa`] — the generic automaton toolkit backing the pipeline.
//! * [`decide`] — the decision procedure: loop over header pairs, compare
//!   canonical languages, and turn any difference into a concrete
//!   input/output packet counterexample.
//!
//! ```
//! use stackat::{check_equivalence, parse, Universe, Verdict};
//!
//! let u = Universe::new(vec![], vec![1]).unwrap();
//! let e1 = parse("push 1 ; pop 1", &u).unwrap();
//! let e2 = parse("1", &u).unwrap();
//! let report = check_equivalence(&e1, &e2, &u).unwrap();
//! assert_eq!(report.verdict, Verdict::Equivalent);
//!
//! let e3 = parse("pop 1 ; push 1", &u).unwrap();
//! let report = check_equivalence(&e1, &e3, &u).unwrap();
//! match report.verdict {
//!     Verdict::Inequivalent(cx) => {
//!         // pop 1 ; push 1 blocks on the empty stack.
//!         assert!(cx.input_stack.is_empty());
//!     }
//!     Verdict::Equivalent => unreachable!(),
//! }
//! ```

pub mod ast;
pub mod canon;
pub mod decide;
pub mod nfa;
pub mod oracle;
pub mod parser;
pub mod trace;

pub use ast::{desugar, eliminate_neq, Expr, Field, Header, SugarExpr, Universe, Value};
pub use decide::{
    certify, check_equivalence, check_equivalence_with, CheckOptions, CheckReport, Counterexample,
    Verdict,
};
pub use nfa::Side;
pub use oracle::Packet;
pub use parser::{parse, parse_unchecked, pretty, ParseError};
