//! Deterministic random program generation for the acceptance suite. A
//! fixed ChaCha seed makes every run check the same programs, so failures
//! reproduce exactly.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stackat::{Expr, Value};

pub struct ExprGen {
    rng: ChaCha8Rng,
}

impl ExprGen {
    pub fn new(seed: u64) -> ExprGen {
        ExprGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Random push-pop program of syntactic size at most `budget`.
    pub fn pushpop(&mut self, budget: usize, values: &[Value]) -> Expr {
        self.expr(budget, &[], values)
    }

    /// Random full-language program (tests, assignments, stack actions) of
    /// syntactic size at most `budget`.
    pub fn full(&mut self, budget: usize, fields: &[&str], values: &[Value]) -> Expr {
        self.expr(budget, fields, values)
    }

    fn expr(&mut self, budget: usize, fields: &[&str], values: &[Value]) -> Expr {
        debug_assert!(budget >= 1);
        if budget == 1 {
            return self.leaf(fields, values);
        }
        if budget == 2 {
            let inner = self.leaf(fields, values);
            return if self.rng.random_range(0..2) == 0 {
                Expr::star(inner)
            } else {
                inner
            };
        }
        match self.rng.random_range(0..8) {
            0..=2 => {
                let left = self.rng.random_range(1..=budget - 2);
                Expr::seq(
                    self.expr(left, fields, values),
                    self.expr(budget - 1 - left, fields, values),
                )
            }
            3..=5 => {
                let left = self.rng.random_range(1..=budget - 2);
                Expr::plus(
                    self.expr(left, fields, values),
                    self.expr(budget - 1 - left, fields, values),
                )
            }
            6 => Expr::star(self.expr(budget - 1, fields, values)),
            _ => self.leaf(fields, values),
        }
    }

    /// A program equivalent to `e` by one Kleene-algebra law. The checker
    /// must answer Equivalent — and if it ever wrongly answers
    /// Inequivalent, the counterexample cannot certify, so either way the
    /// cross-validation protocol catches the bug.
    pub fn equivalent_variant(&mut self, e: &Expr) -> Expr {
        match self.rng.random_range(0..6) {
            0 => Expr::seq(Expr::One, e.clone()),
            1 => Expr::seq(e.clone(), Expr::One),
            2 => Expr::plus(e.clone(), Expr::Zero),
            3 => Expr::plus(e.clone(), e.clone()),
            4 => match e {
                Expr::Plus(a, b) => Expr::plus((**b).clone(), (**a).clone()),
                Expr::Star(inner) => Expr::plus(Expr::One, Expr::seq((**inner).clone(), e.clone())),
                Expr::Seq(a, b) => match &**b {
                    Expr::Plus(f, g) => Expr::plus(
                        Expr::seq((**a).clone(), (**f).clone()),
                        Expr::seq((**a).clone(), (**g).clone()),
                    ),
                    _ => Expr::seq((**a).clone(), Expr::seq((**b).clone(), Expr::One)),
                },
                other => Expr::plus(Expr::Zero, other.clone()),
            },
            _ => Expr::plus(e.clone(), Expr::seq(e.clone(), Expr::Zero)),
        }
    }

    /// A program sharing structure with `e` but usually not equivalent to
    /// it: `e` composed with a fresh fragment. Counterexamples for these
    /// pairs tend to sit past a common behavior prefix.
    pub fn related_variant(&mut self, e: &Expr, fields: &[&str], values: &[Value]) -> Expr {
        let fresh = self.expr(2, fields, values);
        match self.rng.random_range(0..3) {
            0 => Expr::seq(e.clone(), fresh),
            1 => Expr::plus(e.clone(), fresh),
            _ => Expr::seq(fresh, e.clone()),
        }
    }

    fn leaf(&mut self, fields: &[&str], values: &[Value]) -> Expr {
        let v = values[self.rng.random_range(0..values.len())];
        // Stack actions dominate; 0 and 1 appear but rarely, as in hand
        // written programs.
        let choices = if fields.is_empty() { 6 } else { 9 };
        match self.rng.random_range(0..choices) {
            0 | 1 => Expr::push(v),
            2 | 3 => Expr::pop(v),
            4 => Expr::One,
            5 => Expr::Zero,
            _ => {
                let f = fields[self.rng.random_range(0..fields.len())];
                match self.rng.random_range(0..3) {
                    0 => Expr::test_eq(f, v),
                    1 => Expr::test_neq(f, v),
                    _ => Expr::assign(f, v),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_and_respects_the_budget() {
        let mut a = ExprGen::new(7);
        let mut b = ExprGen::new(7);
        for _ in 0..200 {
            let ea = a.full(7, &["f"], &[0, 1]);
            let eb = b.full(7, &["f"], &[0, 1]);
            assert_eq!(ea, eb);
            assert!(ea.size() <= 7, "size {} for {ea:?}", ea.size());
        }
    }
}
