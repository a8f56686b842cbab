use num_traits::{One, Zero};

use crate::automata::{DomainValue, Mode};
use crate::rational::{Ext, Rational};

/// The Eilenberg-Moore algebra of a mode, on its semantic domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Algebra {
    pub mode: Mode,
}

fn mismatch(a: &DomainValue, b: &DomainValue) -> ! {
    panic!("domain values of different modes: {a} and {b}")
}

impl Algebra {
    pub fn new(mode: Mode) -> Self {
        Algebra { mode }
    }

    pub fn bottom(&self) -> DomainValue {
        DomainValue::bottom(self.mode)
    }

    pub fn leq(&self, a: &DomainValue, b: &DomainValue) -> bool {
        a.leq(b)
    }

    /// `p·a + (1-p)·b` componentwise. Only meaningful for weighted modes.
    pub fn combine_flip(&self, p: &Rational, a: &DomainValue, b: &DomainValue) -> DomainValue {
        self.combine_flip_reward(p, &Rational::zero(), a, b)
    }

    /// A probabilistic branch that first collects reward `r`. For the
    /// reward pair `(prob, reward)` the collected reward counts once per
    /// unit of acceptance probability downstream.
    pub fn combine_flip_reward(&self, p: &Rational, r: &Rational, a: &DomainValue, b: &DomainValue) -> DomainValue {
        let q = Rational::one() - p;
        match (a, b) {
            (DomainValue::Prob(x), DomainValue::Prob(y)) => DomainValue::Prob(p * x + &q * y),
            (DomainValue::ProbReward(x1, x2), DomainValue::ProbReward(y1, y2)) => {
                let left = Ext::Fin(x1 * r).add(x2).scale(p);
                let right = Ext::Fin(y1 * r).add(y2).scale(&q);
                DomainValue::ProbReward(p * x1 + &q * y1, left.add(&right))
            }
            _ => mismatch(a, b),
        }
    }

    /// Angelic choice: disjunction or supremum.
    pub fn combine_choose(&self, a: &DomainValue, b: &DomainValue) -> DomainValue {
        match (a, b) {
            (DomainValue::Reach(x), DomainValue::Reach(y)) => DomainValue::Reach(*x || *y),
            (DomainValue::OptReward(x), DomainValue::OptReward(y)) => DomainValue::OptReward(x.max(y).clone()),
            _ => mismatch(a, b),
        }
    }

    /// Collapses a finite valuation. Each item is the query read off one
    /// outcome, its weight `w` (one for set-valued modes) and its reward
    /// mass `wr`, the weight times the reward the outcome accumulated.
    /// Outcomes that share a query value may be merged by summing both.
    pub fn aggregate<'x>(
        &self,
        items: impl IntoIterator<Item = (DomainValue, &'x Rational, &'x Rational)>,
    ) -> DomainValue {
        let mut acc = self.bottom();
        for (v, w, wr) in items {
            acc = match (acc, v) {
                (DomainValue::Prob(s), DomainValue::Prob(p)) => DomainValue::Prob(s + w * p),
                (DomainValue::ProbReward(s1, s2), DomainValue::ProbReward(p, r)) => {
                    let gain = Ext::Fin(&p * wr).add(&r.scale(w));
                    DomainValue::ProbReward(s1 + w * p, s2.add(&gain))
                }
                (DomainValue::Reach(s), DomainValue::Reach(b)) => DomainValue::Reach(s || b),
                (DomainValue::OptReward(s), DomainValue::OptReward(r)) => DomainValue::OptReward(s.max(r)),
                (s, v) => mismatch(&s, &v),
            };
        }
        acc
    }
}
