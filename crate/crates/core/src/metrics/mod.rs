//! Smatch, fine-grained parsing sub-metrics and corpus BLEU.

mod bleu;
mod fine;
mod smatch;
mod triples;

use serde::Serialize;

pub use bleu::{corpus_bleu, BleuError, BleuScore};
pub use fine::{fine_grained, strip_sense, FineGrained, SubMetric};
pub use smatch::{
    matched_under, smatch, smatch_oracle, smatch_triples, Mapping, SmatchError, SmatchResult, DEFAULT_RESTARTS,
    ORACLE_MAX_VARIABLES,
};
pub use triples::{normalize_role, to_triples, TripleSet, TOP};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Matched, test-side and gold-side totals. Adding counts micro-averages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub matched: usize,
    pub test: usize,
    pub gold: usize,
}

impl Counts {
    pub fn is_empty(&self) -> bool {
        self.test == 0 && self.gold == 0
    }

    /// Precision over the test side, recall over the gold side. An empty
    /// side gives a zero.
    pub fn prf(&self) -> Prf {
        let ratio = |n: usize| if n == 0 { 0.0 } else { self.matched as f64 / n as f64 };
        let (precision, recall) = (ratio(self.test), ratio(self.gold));
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Prf { precision, recall, f1 }
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.matched += o.matched;
        self.test += o.test;
        self.gold += o.gold;
    }
}

impl std::iter::Sum for Counts {
    fn sum<I: Iterator<Item = Counts>>(iter: I) -> Counts {
        let mut c = Counts::default();
        for x in iter {
            c += x;
        }
        c
    }
}
