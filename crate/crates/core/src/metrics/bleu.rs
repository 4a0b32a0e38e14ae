use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

const MAX_ORDER: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum BleuError {
    #[error("{hypotheses} hypotheses but {references} references")]
    LengthMismatch { hypotheses: usize, references: usize },
    #[error("no sentences to score")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BleuScore {
    pub bleu: f64,
    /// Modified n-gram precisions for n = 1..4.
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hypothesis_length: usize,
    pub reference_length: usize,
}

fn ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w.iter().map(AsRef::as_ref).collect()).or_default() += 1;
        }
    }
    out
}

/// Corpus BLEU-4 with uniform weights, clipped counts, a brevity penalty
/// and no smoothing: any zero precision gives a score of 0.
pub fn corpus_bleu<S: AsRef<str>>(hypotheses: &[Vec<S>], references: &[Vec<S>]) -> Result<BleuScore, BleuError> {
    if hypotheses.len() != references.len() {
        return Err(BleuError::LengthMismatch { hypotheses: hypotheses.len(), references: references.len() });
    }
    if hypotheses.is_empty() {
        return Err(BleuError::Empty);
    }
    let mut matched = [0usize; MAX_ORDER];
    let mut total = [0usize; MAX_ORDER];
    let (mut c, mut r) = (0, 0);
    for (hyp, reference) in hypotheses.iter().zip(references) {
        c += hyp.len();
        r += reference.len();
        for n in 1..=MAX_ORDER {
            let ref_counts = ngrams(reference, n);
            for (gram, count) in ngrams(hyp, n) {
                matched[n - 1] += count.min(ref_counts.get(&gram).copied().unwrap_or(0));
                total[n - 1] += count;
            }
        }
    }
    let mut precisions = [0.0; MAX_ORDER];
    for n in 0..MAX_ORDER {
        precisions[n] = if total[n] == 0 { 0.0 } else { matched[n] as f64 / total[n] as f64 };
    }
    let brevity_penalty = if c == 0 {
        0.0
    } else if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    let bleu = if precisions.iter().any(|&p| p == 0.0) {
        0.0
    } else {
        brevity_penalty * (precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64).exp()
    };
    Ok(BleuScore { bleu, precisions, brevity_penalty, hypothesis_length: c, reference_length: r })
}
