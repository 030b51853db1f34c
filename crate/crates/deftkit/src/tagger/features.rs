//! Deterministic per-token feature extraction.
//!
//! Features are plain strings (later interned to dense ids): the lowercased
//! token, a case/digit shape pattern, prefixes and suffixes up to length 3,
//! the lowercased neighbor tokens, and sentence-boundary flags. The same
//! (sentence, position) always yields the same vector, in the same order,
//! with no duplicates.

use std::collections::HashMap;

use crate::corpus::Sentence;

/// Map a token to its shape: uppercase letters to `A`, lowercase to `a`,
/// ASCII digits to `0`, everything else kept verbatim.
pub fn token_shape(token: &str) -> String {
    token
        .chars()
        .map(|c| {
            if c.is_uppercase() {
                'A'
            } else if c.is_lowercase() {
                'a'
            } else if c.is_ascii_digit() {
                '0'
            } else {
                c
            }
        })
        .collect()
}

/// Feature strings for the token at `position` within `tokens`.
pub fn features_at(tokens: &[String], position: usize) -> Vec<String> {
    let token = &tokens[position];
    let lower = token.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();

    let mut features = Vec::with_capacity(12);
    features.push(format!("w={lower}"));
    features.push(format!("shape={}", token_shape(token)));
    for k in 1..=3usize {
        if k <= chars.len() {
            let prefix: String = chars[..k].iter().collect();
            features.push(format!("pre{k}={prefix}"));
            let suffix: String = chars[chars.len() - k..].iter().collect();
            features.push(format!("suf{k}={suffix}"));
        }
    }
    if position == 0 {
        features.push("first".to_string());
    } else {
        features.push(format!("prev={}", tokens[position - 1].to_lowercase()));
    }
    if position + 1 == tokens.len() {
        features.push("last".to_string());
    } else {
        features.push(format!("next={}", tokens[position + 1].to_lowercase()));
    }
    features
}

/// Feature strings for one position of a parsed sentence.
pub fn extract_features(sentence: &Sentence, position: usize) -> Vec<String> {
    let texts: Vec<String> = sentence.tokens.iter().map(|t| t.text.clone()).collect();
    features_at(&texts, position)
}

/// Interns feature strings to dense ids in first-seen order.
///
/// Training interns new features as it meets them; prediction only looks
/// features up, so unseen features silently contribute nothing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureInterner {
    index: HashMap<String, usize>,
    names: Vec<String>,
}

impl FeatureInterner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Id for `name`, inserting it if unseen.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.index.insert(name.to_string(), id);
        self.names.push(name.to_string());
        id
    }

    /// Id for `name` if it was interned.
    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}
