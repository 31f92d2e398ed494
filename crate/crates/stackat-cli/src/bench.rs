//! The five benchmark families. Each generator produces program *text*, so
//! the harness exercises the same parse-then-decide path as a user, and the
//! output for a given (family, n) is byte-for-byte reproducible.

use std::time::Instant;

use clap::ValueEnum;
use stackat::ast::Universe;
use stackat::{check_equivalence_with, parse, CheckOptions, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchFamily {
    /// Header-gated pushes followed by arbitrary pops, against the identity.
    HeaderStack,
    /// Left-nested vs right-nested sums of pushes.
    NestedAlternation,
    /// push 1 … push n · pop n … pop 1, against the identity.
    StackDepth,
    /// n stars wrapped around push 1*, against push 1*.
    KleeneStarNesting,
    /// A chain of field tests, against the reversed chain.
    HeaderIndependence,
}

impl BenchFamily {
    pub const ALL: [BenchFamily; 5] = [
        BenchFamily::HeaderStack,
        BenchFamily::NestedAlternation,
        BenchFamily::StackDepth,
        BenchFamily::KleeneStarNesting,
        BenchFamily::HeaderIndependence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchFamily::HeaderStack => "header-stack",
            BenchFamily::NestedAlternation => "nested-alternation",
            BenchFamily::StackDepth => "stack-depth",
            BenchFamily::KleeneStarNesting => "kleene-star-nesting",
            BenchFamily::HeaderIndependence => "header-independence",
        }
    }
}

/// One generated benchmark instance. Both sides are program source; the
/// universe is the one the instance is meant to be checked under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchCase {
    pub left: String,
    pub right: String,
    pub universe: Universe,
}

/// Generates the size-`n` instance of a family. Pure: the same inputs yield
/// identical text.
pub fn bench_case(family: BenchFamily, n: usize) -> BenchCase {
    assert!(n >= 1, "benchmark sizes start at 1");
    match family {
        BenchFamily::HeaderStack => {
            let mut parts: Vec<String> = (1..=n)
                .map(|i| format!("(f{i} = 0 ; push 0 + f{i} = 1 ; push 1)"))
                .collect();
            parts.extend((0..n).map(|_| "(pop 0 + pop 1)".to_string()));
            BenchCase {
                left: parts.join(" ; "),
                right: "1".to_string(),
                universe: Universe::new((1..=n).map(|i| format!("f{i}")).collect(), vec![0, 1])
                    .unwrap(),
            }
        }
        BenchFamily::NestedAlternation => {
            let mut left = "push 1".to_string();
            for i in 2..=n {
                left = format!("({left} + push {i})");
            }
            let mut right = "push 1".to_string();
            for i in 2..=n {
                right = format!("(push {i} + {right})");
            }
            BenchCase {
                left,
                right,
                universe: Universe::new(vec![], (1..=n as u32).collect()).unwrap(),
            }
        }
        BenchFamily::StackDepth => {
            let pushes = (1..=n).map(|i| format!("push {i}"));
            let pops = (1..=n).rev().map(|i| format!("pop {i}"));
            BenchCase {
                left: pushes.chain(pops).collect::<Vec<_>>().join(" ; "),
                right: "1".to_string(),
                universe: Universe::new(vec![], (1..=n as u32).collect()).unwrap(),
            }
        }
        BenchFamily::KleeneStarNesting => {
            let mut left = "push 1*".to_string();
            for _ in 1..n {
                left = format!("({left})*");
            }
            BenchCase {
                left,
                right: "push 1*".to_string(),
                universe: Universe::new(vec![], vec![1]).unwrap(),
            }
        }
        BenchFamily::HeaderIndependence => {
            let test = |i: usize| format!("h{i} = {}", i % 2);
            let left: Vec<String> = (1..=n).map(test).collect();
            let right: Vec<String> = (1..=n).rev().map(test).collect();
            BenchCase {
                left: left.join(" ; "),
                right: right.join(" ; "),
                universe: Universe::new((1..=n).map(|i| format!("h{i}")).collect(), vec![0, 1])
                    .unwrap(),
            }
        }
    }
}

/// One measured benchmark run.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub family: BenchFamily,
    pub n: usize,
    pub verdict: &'static str,
    pub time_ms: u128,
}

/// Runs a family at sizes 1..=n_max. The reported time per size is the
/// minimum over `repeats` runs — the least noisy estimator for a
/// deterministic computation.
pub fn run_family(family: BenchFamily, n_max: usize, repeats: usize) -> Vec<BenchRow> {
    assert!(n_max >= 1 && repeats >= 1);
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let case = bench_case(family, n);
        let e1 = parse(&case.left, &case.universe).expect("generated program must parse");
        let e2 = parse(&case.right, &case.universe).expect("generated program must parse");
        let opts = CheckOptions {
            parallel: true,
            ..CheckOptions::default()
        };
        let mut best: Option<u128> = None;
        let mut verdict = "equivalent";
        for _ in 0..repeats {
            let start = Instant::now();
            let report = check_equivalence_with(&e1, &e2, &case.universe, &opts)
                .expect("generated universe covers the programs");
            let elapsed = start.elapsed().as_millis();
            best = Some(best.map_or(elapsed, |b| b.min(elapsed)));
            verdict = match report.verdict {
                Verdict::Equivalent => "equivalent",
                Verdict::Inequivalent(_) => "inequivalent",
            };
        }
        rows.push(BenchRow {
            family,
            n,
            verdict,
            time_ms: best.unwrap(),
        });
    }
    rows
}

/// Renders rows as CSV with the fixed `family,n,verdict,time_ms` header.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("family,n,verdict,time_ms\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.family.name(),
            row.n,
            row.verdict,
            row.time_ms
        ));
    }
    out
}
