//! Deterministic holdout splitting for train/eval protocols.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::CorpusError;

/// Parse a fraction given either as `a/b` or as a decimal like `0.2`.
///
/// Decimals are converted exactly (digits over a power of ten), so `0.2`
/// means 1/5, not the nearest float.
pub fn parse_fraction(s: &str) -> Result<Ratio<u64>, CorpusError> {
    let bad = || CorpusError::BadFraction(s.to_string());
    let ratio = if let Some((num, den)) = s.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ratio::new(num, den)
    } else if let Some((int_part, frac_part)) = s.split_once('.') {
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = int_part.parse().map_err(|_| bad())?;
        let frac: u64 = frac_part.parse().map_err(|_| bad())?;
        let scale = 10u64
            .checked_pow(frac_part.len() as u32)
            .ok_or_else(bad)?;
        Ratio::new(int.checked_mul(scale).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?, scale)
    } else {
        let int: u64 = s.trim().parse().map_err(|_| bad())?;
        Ratio::from_integer(int)
    };
    check_fraction(&ratio).map_err(|_| bad())?;
    Ok(ratio)
}

fn check_fraction(fraction: &Ratio<u64>) -> Result<(), CorpusError> {
    let zero = Ratio::from_integer(0);
    let one = Ratio::from_integer(1);
    if *fraction > zero && *fraction < one {
        Ok(())
    } else {
        Err(CorpusError::BadFraction(fraction.to_string()))
    }
}

/// Split `items` into `(train, eval)` with `|eval| = round(fraction * n)`
/// (half rounds up), deterministically for a given seed.
///
/// Both partitions preserve the items' original relative order; only the
/// choice of which items land in eval is randomized.
pub fn holdout_split<T>(
    items: Vec<T>,
    fraction: Ratio<u64>,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>), CorpusError> {
    check_fraction(&fraction)?;
    let n = items.len();
    if n < 2 {
        return Err(CorpusError::TooFewItems(n));
    }

    // round(fraction * n) in exact arithmetic: floor(num/den + 1/2).
    let num = fraction.numer() * n as u64;
    let den = *fraction.denom();
    let eval_size = ((2 * num + den) / (2 * den)) as usize;

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let mut in_eval = vec![false; n];
    for &i in indices.iter().take(eval_size) {
        in_eval[i] = true;
    }

    let mut train = Vec::with_capacity(n - eval_size);
    let mut eval = Vec::with_capacity(eval_size);
    for (i, item) in items.into_iter().enumerate() {
        if in_eval[i] {
            eval.push(item);
        } else {
            train.push(item);
        }
    }
    Ok((train, eval))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn fifth() -> Ratio<u64> {
        Ratio::new(1, 5)
    }

    #[test]
    fn ten_items_at_one_fifth_split_eight_two() {
        let items: Vec<u32> = (0..10).collect();
        let (train, eval) = holdout_split(items, fifth(), 7).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(eval.len(), 2);
        // Disjoint union of the input.
        let mut all: Vec<u32> = train.iter().chain(eval.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn same_seed_gives_identical_split() {
        let items: Vec<u32> = (0..100).collect();
        let a = holdout_split(items.clone(), fifth(), 42).unwrap();
        let b = holdout_split(items, fifth(), 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn partitions_preserve_original_order() {
        let items: Vec<u32> = (0..50).collect();
        let (train, eval) = holdout_split(items, fifth(), 3).unwrap();
        assert!(train.windows(2).all(|w| w[0] < w[1]));
        assert!(eval.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn every_singleton_occurs_across_seeds() {
        // 5 items at 1/5 always hold out exactly one item, and over many
        // seeds each of the 5 possible singletons shows up.
        let mut seen = HashSet::new();
        for seed in 0..1000 {
            let (train, eval) = holdout_split(vec![0u8, 1, 2, 3, 4], fifth(), seed).unwrap();
            assert_eq!(eval.len(), 1);
            assert_eq!(train.len(), 4);
            seen.insert(eval[0]);
        }
        assert_eq!(seen.len(), 5);
    }

    #[test]
    fn rounding_is_half_up() {
        // 3 items at 1/2 -> eval of 2 (1.5 rounds up).
        let (train, eval) = holdout_split(vec![1, 2, 3], Ratio::new(1, 2), 0).unwrap();
        assert_eq!(eval.len(), 2);
        assert_eq!(train.len(), 1);
        // 7 items at 1/5 -> 1.4 rounds down.
        let (_, eval) = holdout_split((0..7).collect(), fifth(), 0).unwrap();
        assert_eq!(eval.len(), 1);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(
            holdout_split(vec![1], fifth(), 0),
            Err(CorpusError::TooFewItems(1))
        ));
        assert!(matches!(
            holdout_split(vec![1, 2], Ratio::new(0, 5), 0),
            Err(CorpusError::BadFraction(_))
        ));
        assert!(matches!(
            holdout_split(vec![1, 2], Ratio::new(5, 5), 0),
            Err(CorpusError::BadFraction(_))
        ));
    }

    #[test]
    fn fraction_parser_accepts_ratios_and_decimals() {
        assert_eq!(parse_fraction("1/5").unwrap(), Ratio::new(1, 5));
        assert_eq!(parse_fraction("0.2").unwrap(), Ratio::new(1, 5));
        assert_eq!(parse_fraction(".25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_fraction("0.125").unwrap(), Ratio::new(1, 8));
        for bad in ["0", "1", "5/5", "0/5", "1/0", "0.0", "abc", "1.2.3", "-1/5"] {
            assert!(parse_fraction(bad).is_err(), "{bad:?} should be rejected");
        }
    }
}
