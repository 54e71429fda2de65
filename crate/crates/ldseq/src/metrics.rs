//! Evaluation: token accuracy, BIO chunk precision/recall/F1, and concept
//! error rate (CER).
//!
//! CER scores the sequence of chunk types ("concepts") extracted from the
//! labels, not the tokens: a minimal-cost edit alignment is computed per
//! sentence and insertion/deletion/substitution counts are summed over the
//! corpus and divided by the number of reference concepts. CER may exceed 1.

use crate::corpus::extract_chunks;
use crate::{Error, Result};

/// Fraction of positions where `gold` and `pred` agree.
pub fn token_accuracy<T: PartialEq>(gold: &[T], pred: &[T]) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::Shape(format!(
            "token accuracy over sequences of lengths {} and {}",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Ok(0.0);
    }
    let hits = gold.iter().zip(pred).filter(|(g, p)| g == p).count();
    Ok(hits as f64 / gold.len() as f64)
}

/// Micro-averaged token accuracy over aligned corpora.
pub fn token_accuracy_corpus<T: PartialEq>(gold: &[Vec<T>], pred: &[Vec<T>]) -> Result<f64> {
    check_alignment(gold, pred)?;
    let mut hits = 0usize;
    let mut total = 0usize;
    for (g, p) in gold.iter().zip(pred) {
        hits += g.iter().zip(p).filter(|(a, b)| a == b).count();
        total += g.len();
    }
    if total == 0 {
        return Ok(0.0);
    }
    Ok(hits as f64 / total as f64)
}

fn check_alignment<T, U>(gold: &[Vec<T>], pred: &[Vec<U>]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::Shape(format!(
            "corpora of {} and {} sentences",
            gold.len(),
            pred.len()
        )));
    }
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Shape(format!(
                "sentence {i}: lengths {} and {}",
                g.len(),
                p.len()
            )));
        }
    }
    Ok(())
}

/// Chunk-level precision, recall, and F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChunkScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub gold_chunks: usize,
    pub pred_chunks: usize,
}

/// Micro-averaged chunk F1: a predicted chunk counts as correct iff its type,
/// start, and end all match a gold chunk of the same sentence.
pub fn chunk_f1<S: AsRef<str>>(gold: &[Vec<S>], pred: &[Vec<S>]) -> Result<ChunkScore> {
    check_alignment(gold, pred)?;
    let mut matched = 0usize;
    let mut gold_total = 0usize;
    let mut pred_total = 0usize;
    for (g, p) in gold.iter().zip(pred) {
        let gc = extract_chunks(g);
        let pc = extract_chunks(p);
        gold_total += gc.len();
        pred_total += pc.len();
        matched += pc.iter().filter(|c| gc.contains(c)).count();
    }
    let precision = if pred_total == 0 {
        0.0
    } else {
        matched as f64 / pred_total as f64
    };
    let recall = if gold_total == 0 {
        0.0
    } else {
        matched as f64 / gold_total as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(ChunkScore {
        precision,
        recall,
        f1,
        matched,
        gold_chunks: gold_total,
        pred_chunks: pred_total,
    })
}

/// Edit counts of one minimal alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EditCounts {
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
}

impl EditCounts {
    pub fn total(&self) -> usize {
        self.insertions + self.deletions + self.substitutions
    }
}

/// Minimal-cost Levenshtein alignment of one sentence pair with unit costs.
/// Among minimal alignments the one with the fewest substitutions, then the
/// fewest deletions, is reported, which makes the breakdown deterministic.
pub fn align_edits<T: PartialEq>(gold: &[T], pred: &[T]) -> EditCounts {
    // DP over (cost, substitutions, deletions) with lexicographic minimum;
    // the order is compatible with componentwise addition, so the usual
    // recurrence stays optimal.
    let n = gold.len();
    let m = pred.len();
    let mut prev: Vec<(usize, usize, usize)> = (0..=m).map(|j| (j, 0, 0)).collect();
    let mut curr = vec![(0usize, 0usize, 0usize); m + 1];
    for i in 1..=n {
        curr[0] = (i, 0, i);
        for j in 1..=m {
            let sub_cost = usize::from(gold[i - 1] != pred[j - 1]);
            let diag = (
                prev[j - 1].0 + sub_cost,
                prev[j - 1].1 + sub_cost,
                prev[j - 1].2,
            );
            let del = (prev[j].0 + 1, prev[j].1, prev[j].2 + 1);
            let ins = (curr[j - 1].0 + 1, curr[j - 1].1, curr[j - 1].2);
            curr[j] = diag.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    let (cost, substitutions, deletions) = prev[m];
    EditCounts {
        insertions: cost - substitutions - deletions,
        deletions,
        substitutions,
    }
}

/// Corpus-level concept error rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CerScore {
    pub cer: f64,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub ref_concepts: usize,
}

/// CER over aligned concept sequences: (I + D + S) / R where R is the total
/// number of reference concepts. A reference with no concepts has no defined
/// rate and is an error.
pub fn cer<T: PartialEq>(gold: &[Vec<T>], pred: &[Vec<T>]) -> Result<CerScore> {
    if gold.len() != pred.len() {
        return Err(Error::Shape(format!(
            "concept corpora of {} and {} sentences",
            gold.len(),
            pred.len()
        )));
    }
    let mut counts = EditCounts::default();
    let mut ref_concepts = 0usize;
    for (g, p) in gold.iter().zip(pred) {
        let c = align_edits(g, p);
        counts.insertions += c.insertions;
        counts.deletions += c.deletions;
        counts.substitutions += c.substitutions;
        ref_concepts += g.len();
    }
    if ref_concepts == 0 {
        return Err(Error::Data(
            "concept error rate undefined: reference contains no concepts".into(),
        ));
    }
    Ok(CerScore {
        cer: counts.total() as f64 / ref_concepts as f64,
        insertions: counts.insertions,
        deletions: counts.deletions,
        substitutions: counts.substitutions,
        ref_concepts,
    })
}

/// Chunk types of one sentence in order. With `include_void`, maximal runs of
/// `O` count as concepts too; by default they are excluded from scoring.
pub fn concept_sequence<S: AsRef<str>>(labels: &[S], include_void: bool) -> Vec<String> {
    if !include_void {
        return extract_chunks(labels)
            .into_iter()
            .map(|c| c.kind)
            .collect();
    }
    let mut out = Vec::new();
    let mut i = 0usize;
    let chunks = extract_chunks(labels);
    let mut next_chunk = chunks.iter().peekable();
    while i < labels.len() {
        if let Some(c) = next_chunk.peek() {
            if c.start == i {
                out.push(c.kind.clone());
                i = c.end;
                next_chunk.next();
                continue;
            }
        }
        // inside a void run; emit one concept per maximal run
        let run_end = next_chunk.peek().map_or(labels.len(), |c| c.start);
        out.push("O".to_string());
        i = run_end;
    }
    out
}

/// Full evaluation of aligned label corpora.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub token_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub cer: f64,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub ref_concepts: usize,
}

pub fn evaluate<S: AsRef<str> + PartialEq>(
    gold: &[Vec<S>],
    pred: &[Vec<S>],
    cer_include_void: bool,
) -> Result<EvalReport> {
    check_alignment(gold, pred)?;
    let acc = token_accuracy_corpus(gold, pred)?;
    let chunks = chunk_f1(gold, pred)?;
    let gold_concepts: Vec<Vec<String>> = gold
        .iter()
        .map(|g| concept_sequence(g, cer_include_void))
        .collect();
    let pred_concepts: Vec<Vec<String>> = pred
        .iter()
        .map(|p| concept_sequence(p, cer_include_void))
        .collect();
    let cer_score = cer(&gold_concepts, &pred_concepts)?;
    Ok(EvalReport {
        token_accuracy: acc,
        precision: chunks.precision,
        recall: chunks.recall,
        f1: chunks.f1,
        cer: cer_score.cer,
        insertions: cer_score.insertions,
        deletions: cer_score.deletions,
        substitutions: cer_score.substitutions,
        ref_concepts: cer_score.ref_concepts,
    })
}

impl EvalReport {
    /// Flat key-value block; rates printed as percentages with 2 decimals.
    pub fn kv_block(&self) -> String {
        format!(
            "token_accuracy {:.2}\nprecision {:.2}\nrecall {:.2}\nf1 {:.2}\ncer {:.2}\ninsertions {}\ndeletions {}\nsubstitutions {}\nref_concepts {}\n",
            100.0 * self.token_accuracy,
            100.0 * self.precision,
            100.0 * self.recall,
            100.0 * self.f1,
            100.0 * self.cer,
            self.insertions,
            self.deletions,
            self.substitutions,
            self.ref_concepts,
        )
    }

    /// Single-line machine-readable record.
    pub fn record_line(&self) -> String {
        format!(
            "acc={:.2} p={:.2} r={:.2} f1={:.2} cer={:.2} i={} d={} s={} r_ref={}",
            100.0 * self.token_accuracy,
            100.0 * self.precision,
            100.0 * self.recall,
            100.0 * self.f1,
            100.0 * self.cer,
            self.insertions,
            self.deletions,
            self.substitutions,
            self.ref_concepts,
        )
    }
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Independent reference implementations used only for testing.

    /// Minimal (cost, substitutions, deletions) by recursive enumeration of
    /// edit scripts, memoized on the (i, j) suffix.
    pub fn min_edits_recursive<T: PartialEq>(gold: &[T], pred: &[T]) -> (usize, usize, usize) {
        fn go<T: PartialEq>(
            gold: &[T],
            pred: &[T],
            i: usize,
            j: usize,
            memo: &mut Vec<Option<(usize, usize, usize)>>,
            m: usize,
        ) -> (usize, usize, usize) {
            if let Some(v) = memo[i * (m + 1) + j] {
                return v;
            }
            let best = if i == gold.len() && j == pred.len() {
                (0, 0, 0)
            } else {
                let mut candidates = Vec::with_capacity(3);
                if i < gold.len() && j < pred.len() {
                    let (c, s, d) = go(gold, pred, i + 1, j + 1, memo, m);
                    let sub = usize::from(gold[i] != pred[j]);
                    candidates.push((c + sub, s + sub, d));
                }
                if i < gold.len() {
                    let (c, s, d) = go(gold, pred, i + 1, j, memo, m);
                    candidates.push((c + 1, s, d + 1));
                }
                if j < pred.len() {
                    let (c, s, d) = go(gold, pred, i, j + 1, memo, m);
                    candidates.push((c + 1, s, d));
                }
                candidates.into_iter().min().expect("at least one move")
            };
            memo[i * (m + 1) + j] = Some(best);
            best
        }
        let m = pred.len();
        let mut memo = vec![None; (gold.len() + 1) * (m + 1)];
        go(gold, pred, 0, 0, &mut memo, m)
    }

    /// Plain enumeration of every edit script, no memoization; exponential,
    /// for small inputs only.
    pub fn min_cost_enumerated<T: PartialEq>(gold: &[T], pred: &[T]) -> usize {
        fn go<T: PartialEq>(gold: &[T], pred: &[T]) -> usize {
            match (gold.is_empty(), pred.is_empty()) {
                (true, true) => 0,
                (true, false) => pred.len(),
                (false, true) => gold.len(),
                (false, false) => {
                    let sub = usize::from(gold[0] != pred[0]) + go(&gold[1..], &pred[1..]);
                    let del = 1 + go(&gold[1..], pred);
                    let ins = 1 + go(gold, &pred[1..]);
                    sub.min(del).min(ins)
                }
            }
        }
        go(gold, pred)
    }
}
