//! The equivalence decision procedure.
//!
//! Two StacKAT programs are equivalent when they denote the same relation on
//! packets. [`check_equivalence`] decides this by enumerating all pairs of
//! input/output headers over the universe and comparing, for each pair, the
//! canonicalized trace automata of the two programs (see [`crate::trace`]
//! and [`crate::canon`]). The programs are equivalent iff every header pair
//! checks out; a failing pair yields a shortest distinguishing zipped word,
//! which unzips into a concrete input/output packet pair related by exactly
//! one of the programs.
//!
//! Counterexamples are deterministic: header pairs are scanned in
//! lexicographic order and the distinguishing word is the shortest
//! (lexicographically least) one for its pair. [`CheckOptions::exhaustive`]
//! scans all pairs and globally minimizes the witness instead of stopping at
//! the first failing pair. Fields mentioned by neither program cannot
//! influence either behaviour, so by default the header loop runs over the
//! occurring fields only ([`CheckOptions::restrict_fields`]); reported
//! headers are always over the full universe, with inert fields at the
//! smallest value.

use rayon::prelude::*;
use thiserror::Error;

use crate::ast::{Expr, Header, Universe, Value};
use crate::canon::{
    canonicalize, filter_popstar_pushstar, poppush_close, pushpop_close, unzip_word, zip_automaton,
    ZipLetter,
};
use crate::nfa::{language_equivalent, LanguageComparison, Nfa, Side};
use crate::oracle::{eval, Packet};
use crate::trace::{build_trace_nfa, build_trace_nfa_labeled, StackLetter};

/// A concrete behavioural difference: `accepted_by` names the program that
/// relates the input packet to the output packet; the other program does
/// not. Stacks are written top-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub header_in: Header,
    pub input_stack: Vec<Value>,
    pub header_out: Header,
    pub output_stack: Vec<Value>,
    pub accepted_by: Side,
}

/// Outcome of an equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Inequivalent(Counterexample),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

/// A verdict together with how much of the header-pair space was examined.
/// `header_pairs_checked` is the number of pairs scanned in enumeration
/// order — the failing pair's position on inequivalence, the total
/// otherwise, regardless of parallelism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub header_pairs_checked: usize,
}

/// Tuning for [`check_equivalence_with`].
#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// Scan every header pair and return the globally smallest
    /// counterexample (by word length, then word, then pair position)
    /// instead of stopping at the first failing pair.
    pub exhaustive: bool,
    /// Distribute header pairs across threads. The verdict and witness are
    /// identical to the sequential ones.
    pub parallel: bool,
    /// Loop only over headers of fields one of the programs mentions,
    /// treating the rest as inert. Sound because untouched fields pass
    /// through unchanged; disable to force the full header loop.
    pub restrict_fields: bool,
}

impl Default for CheckOptions {
    fn default() -> CheckOptions {
        CheckOptions {
            exhaustive: false,
            parallel: false,
            restrict_fields: true,
        }
    }
}

/// A program mentions a field or value outside the universe.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("{} program mentions {what}, which is not declared in the universe", side.as_str())]
pub struct UniverseMismatch {
    pub side: Side,
    pub what: String,
}

fn validate(e: &Expr, universe: &Universe, side: Side) -> Result<(), UniverseMismatch> {
    let (fields, values) = e.mentions();
    for f in fields {
        if universe.field_index(&f).is_none() {
            return Err(UniverseMismatch {
                side,
                what: format!("field `{f}`"),
            });
        }
    }
    for v in values {
        if !universe.has_value(v) {
            return Err(UniverseMismatch {
                side,
                what: format!("value {v}"),
            });
        }
    }
    Ok(())
}

/// Decides equivalence with default options (first failing pair, sequential,
/// occurring fields only).
pub fn check_equivalence(
    e1: &Expr,
    e2: &Expr,
    universe: &Universe,
) -> Result<CheckReport, UniverseMismatch> {
    check_equivalence_with(e1, e2, universe, &CheckOptions::default())
}

/// Decides equivalence of `e1` and `e2` over `universe`.
pub fn check_equivalence_with(
    e1: &Expr,
    e2: &Expr,
    universe: &Universe,
    options: &CheckOptions,
) -> Result<CheckReport, UniverseMismatch> {
    validate(e1, universe, Side::Left)?;
    validate(e2, universe, Side::Right)?;

    let working = if options.restrict_fields {
        let (mut fields, _) = e1.mentions();
        let (fields2, _) = e2.mentions();
        fields.extend(fields2);
        universe.restrict_fields(&fields)
    } else {
        universe.clone()
    };

    let pairs: Vec<(Header, Header)> = working
        .headers()
        .flat_map(|a1| working.headers().map(move |a2| (a1.clone(), a2)))
        .collect();

    let job = |a1: &Header, a2: &Header| -> Option<(Vec<ZipLetter>, Side)> {
        let t1 = build_trace_nfa(e1, a1, a2, &working).trim();
        let t2 = build_trace_nfa(e2, a1, a2, &working).trim();
        if t1.num_states() == 0 && t2.num_states() == 0 {
            return None;
        }
        let c1 = canonicalize(&t1, working.values());
        let c2 = canonicalize(&t2, working.values());
        match language_equivalent(&c1, &c2) {
            LanguageComparison::Equivalent => None,
            LanguageComparison::Inequivalent { word, accepted_by } => Some((word, accepted_by)),
        }
    };

    let failure: Option<(usize, Vec<ZipLetter>, Side)> = if options.exhaustive {
        let mut failures: Vec<(usize, Vec<ZipLetter>, Side)> = if options.parallel {
            pairs
                .par_iter()
                .enumerate()
                .filter_map(|(i, (a1, a2))| job(a1, a2).map(|(w, s)| (i, w, s)))
                .collect()
        } else {
            pairs
                .iter()
                .enumerate()
                .filter_map(|(i, (a1, a2))| job(a1, a2).map(|(w, s)| (i, w, s)))
                .collect()
        };
        failures.sort_by(|(i1, w1, _), (i2, w2, _)| (w1.len(), w1, i1).cmp(&(w2.len(), w2, i2)));
        failures.into_iter().next()
    } else if options.parallel {
        pairs
            .par_iter()
            .enumerate()
            .find_map_first(|(i, (a1, a2))| job(a1, a2).map(|(w, s)| (i, w, s)))
    } else {
        pairs
            .iter()
            .enumerate()
            .find_map(|(i, (a1, a2))| job(a1, a2).map(|(w, s)| (i, w, s)))
    };

    let report = match failure {
        None => CheckReport {
            verdict: Verdict::Equivalent,
            header_pairs_checked: pairs.len(),
        },
        Some((idx, word, side)) => {
            let (a1, a2) = &pairs[idx];
            let cx = extract_counterexample(&word, a1, a2, side)
                .expect("canonical automata accept only well-formed zipped words");
            let cx = Counterexample {
                header_in: extend_header(&cx.header_in, &working, universe),
                header_out: extend_header(&cx.header_out, &working, universe),
                ..cx
            };
            CheckReport {
                verdict: Verdict::Inequivalent(cx),
                header_pairs_checked: if options.exhaustive {
                    pairs.len()
                } else {
                    idx + 1
                },
            }
        }
    };
    Ok(report)
}

/// Turns a distinguishing zipped word for the header pair
/// `(header_in, header_out)` into a packet-level counterexample.
///
/// Unzipping recovers the pops and pushes of the witnessing trace in
/// execution order. The pops must come off the input stack top-first, so
/// they *are* the input stack; the pushes build the output stack bottom-up,
/// so reversed they are the output stack top-first.
pub fn extract_counterexample(
    word: &[ZipLetter],
    header_in: &Header,
    header_out: &Header,
    accepted_by: Side,
) -> Result<Counterexample, crate::canon::UnzipError> {
    let (pops, pushes) = unzip_word(word)?;
    let output_stack: Vec<Value> = pushes.into_iter().rev().collect();
    Ok(Counterexample {
        header_in: header_in.clone(),
        input_stack: pops,
        header_out: header_out.clone(),
        output_stack,
        accepted_by,
    })
}

/// Extends a header over `from`'s fields to one over `to`'s fields, giving
/// fields absent from `from` the smallest universe value.
fn extend_header(h: &Header, from: &Universe, to: &Universe) -> Header {
    Header(
        to.fields()
            .iter()
            .map(|f| match from.field_index(f) {
                Some(i) => h.get(i),
                None => to.values()[0],
            })
            .collect(),
    )
}

/// Stack headroom [`certify`] grants the replay beyond the counterexample's
/// own footprint, to absorb transient excursions of the witnessing run.
const CERTIFY_SLACK: usize = 4;

/// Replays a counterexample against both programs through the brute-force
/// oracle: true iff exactly the claimed side relates the input packet to the
/// output packet.
///
/// The replay bound is the input and output stack sizes plus each program's
/// push/pop count plus [`CERTIFY_SLACK`] — enough for any normal-form run of
/// the counterexample and for moderate detours. A program that relates the
/// pair only through runs exceeding that stack excursion would certify as
/// not relating it; the decision procedure's witnesses are normal-form, so
/// they are never in that regime.
pub fn certify(cx: &Counterexample, e1: &Expr, e2: &Expr, universe: &Universe) -> bool {
    let bound = cx.input_stack.len()
        + cx.output_stack.len()
        + e1.count_stack_ops()
        + e2.count_stack_ops()
        + CERTIFY_SLACK;
    let input = Packet::new(cx.header_in.clone(), cx.input_stack.clone());
    let expected = Packet::new(cx.header_out.clone(), cx.output_stack.clone());
    let left = eval(e1, &input, universe, bound).contains(&expected);
    let right = eval(e2, &input, universe, bound).contains(&expected);
    match cx.accepted_by {
        Side::Left => left && !right,
        Side::Right => !left && right,
    }
}

/// Serializes a report as the check's JSON output:
///
/// ```json
/// {
///   "equivalent": false,
///   "counterexample": {
///     "header_in": {"f": 0}, "input_stack": [1],
///     "header_out": {"f": 0}, "output_stack": [],
///     "accepted_by": "right"
///   },
///   "header_pairs_checked": 4,
///   "wall_time_ms": 12
/// }
/// ```
///
/// `counterexample` is `null` on equivalence; stacks are top-first.
pub fn report_json(
    report: &CheckReport,
    universe: &Universe,
    wall_time_ms: u64,
) -> serde_json::Value {
    let header_json = |h: &Header| -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (name, v) in universe.fields().iter().zip(&h.0) {
            map.insert(name.clone(), serde_json::Value::from(*v));
        }
        serde_json::Value::Object(map)
    };
    let counterexample = match &report.verdict {
        Verdict::Equivalent => serde_json::Value::Null,
        Verdict::Inequivalent(cx) => serde_json::json!({
            "header_in": header_json(&cx.header_in),
            "input_stack": cx.input_stack,
            "header_out": header_json(&cx.header_out),
            "output_stack": cx.output_stack,
            "accepted_by": cx.accepted_by.as_str(),
        }),
    };
    serde_json::json!({
        "equivalent": report.verdict.is_equivalent(),
        "counterexample": counterexample,
        "header_pairs_checked": report.header_pairs_checked,
        "wall_time_ms": wall_time_ms,
    })
}

/// Every intermediate automaton of the canonicalization pipeline for one
/// program and header pair, for DOT export. The `filter` stage is shown in
/// its textbook position even though [`canonicalize`] folds it into zipping;
/// the `poppush` stage's language equals the canonical one.
pub struct PipelineStages {
    pub trace: Nfa<StackLetter>,
    pub trace_labels: Vec<String>,
    pub pushpop: Nfa<StackLetter>,
    pub filter: Nfa<StackLetter>,
    pub zip: Nfa<ZipLetter>,
    pub poppush: Nfa<ZipLetter>,
}

/// Runs the pipeline pass by pass for inspection.
pub fn pipeline_stages(e: &Expr, a1: &Header, a2: &Header, universe: &Universe) -> PipelineStages {
    let (trace, trace_labels) = build_trace_nfa_labeled(e, a1, a2, universe);
    let pushpop = pushpop_close(&trace);
    let filter = filter_popstar_pushstar(&pushpop);
    let zip = zip_automaton(&filter).trim();
    let poppush = poppush_close(&zip, universe.values()).trim();
    PipelineStages {
        trace,
        trace_labels,
        pushpop,
        filter,
        zip,
        poppush,
    }
}
