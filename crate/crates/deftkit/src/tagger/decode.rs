//! BIO-constrained Viterbi decoding.
//!
//! The dynamic program maximizes `Σ emission(f_i, t_i) + Σ transition(t_{i-1},
//! t_i)` over sequences that are legal under the schema: `I-X` only ever
//! follows `B-X` or `I-X`, and never opens a sentence. Legality is enforced
//! by excluding illegal predecessors from the max — weights stay finite.
//!
//! Determinism: candidates are scanned in ascending tag index and only a
//! strictly greater score displaces the incumbent, so ties break toward the
//! lowest index (`O` first). An all-zero model therefore decodes to all-`O`.

use crate::corpus::TagSchema;
use crate::scalar::Scalar;

use super::FeatureVector;

/// Run the DP over dense tag ids. `emit(f, t)` and `trans(p, t)` supply the
/// weights. Returns the argmax id sequence and its score.
pub(crate) fn viterbi_ids<S, E, T>(
    schema: &TagSchema,
    features: &[FeatureVector],
    emit: E,
    trans: T,
) -> (Vec<usize>, S)
where
    S: Scalar,
    E: Fn(usize, usize) -> S,
    T: Fn(usize, usize) -> S,
{
    let n = features.len();
    if n == 0 {
        return (Vec::new(), S::zero());
    }
    let t_count = schema.len();

    // Total emission score per (position, tag).
    let mut emit_scores = vec![vec![S::zero(); t_count]; n];
    for (position, feats) in features.iter().enumerate() {
        for &f in feats {
            for (tag, score) in emit_scores[position].iter_mut().enumerate() {
                *score += emit(f, tag);
            }
        }
    }

    let unreachable = S::neg_infinity();
    let mut dp: Vec<S> = (0..t_count)
        .map(|t| {
            if schema.start_legal_idx(t) {
                emit_scores[0][t]
            } else {
                unreachable
            }
        })
        .collect();
    let mut backpointers: Vec<Vec<usize>> = Vec::with_capacity(n.saturating_sub(1));

    for emit_row in emit_scores.iter().skip(1) {
        let mut next = vec![unreachable; t_count];
        let mut back = vec![usize::MAX; t_count];
        for (tag, slot) in next.iter_mut().enumerate() {
            let mut best = unreachable;
            let mut best_prev = usize::MAX;
            for (prev, &prev_score) in dp.iter().enumerate() {
                if prev_score == unreachable || !schema.transition_legal_idx(prev, tag) {
                    continue;
                }
                let candidate = prev_score + trans(prev, tag);
                if best_prev == usize::MAX || candidate > best {
                    best = candidate;
                    best_prev = prev;
                }
            }
            if best_prev != usize::MAX {
                *slot = best + emit_row[tag];
                back[tag] = best_prev;
            }
        }
        dp = next;
        backpointers.push(back);
    }

    let mut best_tag = 0;
    for tag in 1..t_count {
        if dp[tag] > dp[best_tag] {
            best_tag = tag;
        }
    }
    let best_score = dp[best_tag];

    let mut ids = vec![best_tag; n];
    for (i, back) in backpointers.iter().enumerate().rev() {
        ids[i] = back[ids[i + 1]];
    }
    (ids, best_score)
}

/// Score an arbitrary tag-id assignment under the same objective the decoder
/// maximizes. The assignment need not be BIO-legal.
pub(crate) fn score_ids<S, E, T>(features: &[FeatureVector], ids: &[usize], emit: E, trans: T) -> S
where
    S: Scalar,
    E: Fn(usize, usize) -> S,
    T: Fn(usize, usize) -> S,
{
    let mut total = S::zero();
    for (position, feats) in features.iter().enumerate() {
        let tag = ids[position];
        for &f in feats {
            total += emit(f, tag);
        }
        if position > 0 {
            total += trans(ids[position - 1], tag);
        }
    }
    total
}
