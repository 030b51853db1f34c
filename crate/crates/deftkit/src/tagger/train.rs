//! Averaged structured perceptron training for the chain model.
//!
//! Per sentence: decode with the current weights; on a mismatch, add the
//! gold feature/transition counts and subtract the predicted ones. The final
//! model averages the weight vector over every sentence step (mistake-free
//! steps included), which is what makes the perceptron stable as a batch
//! predictor. Averaging uses lazily flushed per-cell totals, so a pass
//! touches only the cells it updates.
//!
//! Determinism: the seed fixes the per-epoch shuffle order, and feature
//! interning happens in corpus order before the first epoch, so identical
//! inputs yield identical models.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Sentence, TagSchema};
use crate::scalar::Scalar;

use super::decode::viterbi_ids;
use super::features::{features_at, FeatureInterner};
use super::{ChainModel, FeatureVector, TaggerError};

/// Per-epoch training diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainLog {
    /// Sentences decoded imperfectly in each epoch, in epoch order.
    pub mistakes_per_epoch: Vec<usize>,
}

/// One weight with its lazily maintained running total for averaging.
#[derive(Debug, Clone, Copy)]
struct Cell<S> {
    weight: S,
    total: S,
    /// Completed-sentence count at the last flush.
    stamp: u64,
}

impl<S: Scalar> Default for Cell<S> {
    fn default() -> Self {
        Cell {
            weight: S::zero(),
            total: S::zero(),
            stamp: 0,
        }
    }
}

impl<S: Scalar> Cell<S> {
    /// Apply `delta` during the sentence after `completed` finished steps.
    fn bump(&mut self, completed: u64, delta: S) {
        self.total += self.weight * S::from_count((completed - self.stamp) as usize);
        self.stamp = completed;
        self.weight += delta;
    }

    /// Average over `total_steps` completed sentence steps.
    fn averaged(&self, total_steps: u64) -> S {
        if total_steps == 0 {
            return S::zero();
        }
        let flushed = self.total + self.weight * S::from_count((total_steps - self.stamp) as usize);
        flushed / S::from_count(total_steps as usize)
    }
}

/// Train and return just the model.
pub fn train_perceptron<S: Scalar>(
    sentences: &[Sentence],
    schema: &TagSchema,
    epochs: usize,
    seed: u64,
) -> Result<ChainModel<S>, TaggerError> {
    train_perceptron_logged(sentences, schema, epochs, seed).map(|(model, _)| model)
}

/// Train and also return per-epoch mistake counts.
pub fn train_perceptron_logged<S: Scalar>(
    sentences: &[Sentence],
    schema: &TagSchema,
    epochs: usize,
    seed: u64,
) -> Result<(ChainModel<S>, TrainLog), TaggerError> {
    if sentences.is_empty() {
        return Err(TaggerError::Empty);
    }

    // Intern features and map gold tags before the first epoch.
    let mut interner = FeatureInterner::new();
    let mut all_features: Vec<Vec<FeatureVector>> = Vec::with_capacity(sentences.len());
    let mut all_gold: Vec<Vec<usize>> = Vec::with_capacity(sentences.len());
    for (s_idx, sentence) in sentences.iter().enumerate() {
        let texts: Vec<String> = sentence.tokens.iter().map(|t| t.text.clone()).collect();
        let features: Vec<FeatureVector> = (0..texts.len())
            .map(|position| {
                features_at(&texts, position)
                    .iter()
                    .map(|name| interner.intern(name))
                    .collect()
            })
            .collect();
        let gold: Vec<usize> = sentence
            .tokens
            .iter()
            .enumerate()
            .map(|(position, tok)| {
                schema.tag_index(&tok.tag).ok_or_else(|| TaggerError::UnknownTag {
                    sentence: s_idx,
                    position,
                    tag: tok.tag.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        all_features.push(features);
        all_gold.push(gold);
    }

    let t_count = schema.len();
    let mut emission: Vec<Vec<Cell<S>>> = vec![vec![Cell::default(); t_count]; interner.len()];
    let mut transition: Vec<Vec<Cell<S>>> = vec![vec![Cell::default(); t_count]; t_count];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut completed: u64 = 0;
    let mut mistakes_per_epoch = Vec::with_capacity(epochs);

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0usize;
        for &s_idx in &order {
            let features = &all_features[s_idx];
            let gold = &all_gold[s_idx];
            let (pred, _) = viterbi_ids(
                schema,
                features,
                |f, t| emission[f][t].weight,
                |p, t| transition[p][t].weight,
            );
            if &pred != gold {
                mistakes += 1;
                let one = S::one();
                for (position, feats) in features.iter().enumerate() {
                    if gold[position] != pred[position] {
                        for &f in feats {
                            emission[f][gold[position]].bump(completed, one);
                            emission[f][pred[position]].bump(completed, -one);
                        }
                    }
                }
                for position in 1..features.len() {
                    let g = (gold[position - 1], gold[position]);
                    let p = (pred[position - 1], pred[position]);
                    if g != p {
                        // Gold data occasionally carries BIO-illegal pairs;
                        // those get no stored weight (the decoder could never
                        // use them), keeping the model's legality invariant.
                        if schema.transition_legal_idx(g.0, g.1) {
                            transition[g.0][g.1].bump(completed, one);
                        }
                        transition[p.0][p.1].bump(completed, -one);
                    }
                }
            }
            completed += 1;
        }
        mistakes_per_epoch.push(mistakes);
    }

    let emission_avg: Vec<Vec<S>> = emission
        .iter()
        .map(|row| row.iter().map(|c| c.averaged(completed)).collect())
        .collect();
    let transition_avg: Vec<Vec<S>> = transition
        .iter()
        .map(|row| row.iter().map(|c| c.averaged(completed)).collect())
        .collect();

    let feature_names: Vec<String> = (0..interner.len())
        .map(|id| interner.name(id).to_string())
        .collect();
    let model = ChainModel::from_parts(schema.clone(), feature_names, emission_avg, transition_avg)?;
    Ok((model, TrainLog { mistakes_per_epoch }))
}
