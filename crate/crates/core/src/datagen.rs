//! Seeded synthetic sequences.
//!
//! All generators draw from [`SeededRng`], a ChaCha8 stream seeded from a
//! 64-bit value, so a `(generator, parameters, seed)` triple always yields
//! the same sequence on every platform.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::episodes::{SymbolId, SymbolSequence};
use crate::probmodel::SymbolModel;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// I.i.d. uniform symbols over `0..alphabet_size`.
pub fn gen_uniform(alphabet_size: usize, length: usize, seed: u64) -> SymbolSequence {
    assert!(alphabet_size >= 1);
    let mut rng = seeded_rng(seed);
    let n = alphabet_size as SymbolId;
    SymbolSequence::new((0..length).map(|_| rng.random_range(0..n)).collect())
}

/// Digits 0..=9 where each step flips a fair coin: heads draws uniformly
/// from 0..=4, tails draws digit `i` in 5..=9 with weight `0.5^x`, `x` being
/// the distance from the current position back to the last occurrence of
/// `i - 5`. A digit whose partner has not occurred yet has weight zero; if
/// all five weights are zero the draw is uniform over 5..=9.
pub fn gen_correlated(length: usize, seed: u64) -> SymbolSequence {
    let mut rng = seeded_rng(seed);
    let mut last: [Option<usize>; 5] = [None; 5];
    let mut out = Vec::with_capacity(length);
    for pos in 0..length {
        let digit = if rng.random_bool(0.5) {
            rng.random_range(0..5u32)
        } else {
            // weights are rescaled by the smallest distance to avoid underflow
            let nearest = last.iter().flatten().map(|l| pos - l).min();
            let mut weights = [0.0f64; 5];
            if let Some(dmin) = nearest {
                for (w, l) in weights.iter_mut().zip(&last) {
                    if let Some(l) = l {
                        *w = 0.5f64.powi((pos - l - dmin).min(1000) as i32);
                    }
                }
            }
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                5 + rng.random_range(0..5u32)
            } else {
                let mut u = rng.random::<f64>() * total;
                let mut pick = 4;
                for (i, w) in weights.iter().enumerate() {
                    if u < *w {
                        pick = i;
                        break;
                    }
                    u -= w;
                }
                // rounding can leave u past the last positive weight
                while weights[pick] == 0.0 {
                    pick -= 1;
                }
                5 + pick as u32
            }
        };
        if digit < 5 {
            last[digit as usize] = Some(pos);
        }
        out.push(digit);
    }
    SymbolSequence::new(out)
}

/// I.i.d. draws from `model`, exact: a uniform integer in `0..D` (with `D`
/// the model's common denominator) is mapped through the cumulative scaled
/// probabilities.
pub fn sample_model(model: &SymbolModel, length: usize, seed: u64) -> SymbolSequence {
    let mut rng = seeded_rng(seed);
    let d = model.denominator();
    let n = model.len() as SymbolId;
    if let (Some(d64), Some(cum)) = (d.to_u64(), cumulative_u64(model)) {
        let items = (0..length)
            .map(|_| {
                let u = rng.random_range(0..d64);
                cum.partition_point(|&c| c <= u) as SymbolId
            })
            .collect();
        return SymbolSequence::new(items);
    }
    let mut cum = Vec::with_capacity(n as usize);
    let mut acc = BigInt::from(0);
    for a in 0..n {
        acc += model.scaled(a);
        cum.push(acc.clone());
    }
    let items = (0..length)
        .map(|_| {
            let u = uniform_below(&mut rng, d);
            cum.partition_point(|c| *c <= u) as SymbolId
        })
        .collect();
    SymbolSequence::new(items)
}

fn cumulative_u64(model: &SymbolModel) -> Option<Vec<u64>> {
    let mut acc = 0u64;
    (0..model.len() as SymbolId)
        .map(|a| {
            acc = acc.checked_add(model.scaled(a).to_u64()?)?;
            Some(acc)
        })
        .collect()
}

/// Uniform integer in `0..bound` by rejection over random bits.
fn uniform_below(rng: &mut SeededRng, bound: &BigInt) -> BigInt {
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    loop {
        let mut buf = vec![0u8; bytes];
        rng.fill(buf.as_mut_slice());
        let extra = bytes as u64 * 8 - bits;
        if extra > 0 {
            buf[0] &= 0xff >> extra;
        }
        let x = BigInt::from_bytes_be(num_bigint::Sign::Plus, &buf);
        if &x < bound {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probmodel::rational;

    #[test]
    fn uniform_is_deterministic() {
        assert_eq!(gen_uniform(10, 500, 7), gen_uniform(10, 500, 7));
        assert_ne!(gen_uniform(10, 500, 7), gen_uniform(10, 500, 8));
        assert!(gen_uniform(1, 50, 3).as_slice().iter().all(|&a| a == 0));
    }

    #[test]
    fn correlated_stays_in_digits() {
        let s = gen_correlated(20_000, 1);
        assert!(s.as_slice().iter().all(|&a| a < 10));
        assert_eq!(s, gen_correlated(20_000, 1));
    }

    #[test]
    fn degenerate_model_is_constant() {
        let m = SymbolModel::new(vec![rational(1, 1), rational(0, 1)]).unwrap();
        assert!(sample_model(&m, 100, 5).as_slice().iter().all(|&a| a == 0));
    }

    #[test]
    fn big_denominator_path() {
        // denominator beyond u64 forces the BigInt sampler
        let big = BigInt::from(u64::MAX) * BigInt::from(3u32);
        let p = num_rational::BigRational::new(BigInt::from(1), big.clone());
        let q = num_rational::BigRational::new(big - 1, BigInt::from(u64::MAX) * BigInt::from(3u32));
        let m = SymbolModel::new(vec![p, q]).unwrap();
        let s = sample_model(&m, 1000, 11);
        assert!(s.as_slice().iter().filter(|&&a| a == 1).count() >= 999);
    }
}
