//! Classical string measures used alongside ACSS.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{CtmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    Entropy,
    Entropy2,
    Change,
}

fn shannon<T: Eq + Hash>(items: impl Iterator<Item = T>) -> f64 {
    let mut counts: HashMap<T, usize> = HashMap::new();
    let mut n = 0usize;
    for item in items {
        *counts.entry(item).or_default() += 1;
        n += 1;
    }
    let mut freqs: Vec<usize> = counts.into_values().collect();
    // Fixed summation order keeps results reproducible.
    freqs.sort_unstable();
    let h: f64 = freqs
        .into_iter()
        .map(|c| {
            let f = c as f64 / n as f64;
            -f * f.log2()
        })
        .sum();
    h.max(0.0)
}

/// First-order entropy in bits per symbol.
pub fn entropy(s: &str) -> Result<f64> {
    if s.is_empty() {
        return Err(CtmError::InvalidArgument(
            "entropy of an empty string".into(),
        ));
    }
    Ok(shannon(s.chars()))
}

/// Entropy of the `l-1` overlapping adjacent pairs, in bits per digram.
pub fn entropy2(s: &str) -> Result<f64> {
    let chars: Vec<char> = s.chars().collect();
    if chars.len() < 2 {
        return Err(CtmError::InvalidArgument(
            "second-order entropy needs at least two symbols".into(),
        ));
    }
    Ok(shannon(chars.windows(2).map(|w| (w[0], w[1]))))
}

/// Change complexity of a binary string.
///
/// Level 1 marks every position where the string changes symbol; level
/// `k+1` marks where level `k` changes. A string of length `l` has levels
/// `1..l`, level `k` holding `l-k` marks, and the complexity is
/// `sum_k changes(k) / k`. Constant strings score 0; swapping the two
/// symbols leaves every level unchanged.
pub fn change_complexity(s: &str) -> Result<f64> {
    let chars: Vec<char> = s.chars().collect();
    let first = match chars.first() {
        Some(&c) => c,
        None => {
            return Err(CtmError::InvalidArgument(
                "change complexity of an empty string".into(),
            ))
        }
    };
    let mut level: Vec<bool> = Vec::with_capacity(chars.len());
    let mut other = None;
    for &c in &chars {
        if c != first {
            match other {
                None => other = Some(c),
                Some(o) if o != c => return Err(CtmError::NonBinary(s.to_string())),
                _ => {}
            }
        }
        level.push(c != first);
    }
    let mut total = 0.0;
    let mut k = 1;
    while level.len() > 1 {
        level = level.windows(2).map(|w| w[0] != w[1]).collect();
        total += level.iter().filter(|&&b| b).count() as f64 / k as f64;
        k += 1;
    }
    Ok(total)
}

pub fn measure(s: &str, which: Measure) -> Result<f64> {
    match which {
        Measure::Entropy => entropy(s),
        Measure::Entropy2 => entropy2(s),
        Measure::Change => change_complexity(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Frequency-table entropy written independently of `shannon`.
    fn entropy_oracle(s: &[u8]) -> f64 {
        let mut hist = [0usize; 256];
        for &b in s {
            hist[b as usize] += 1;
        }
        let n = s.len() as f64;
        let mut h = 0.0;
        for &c in hist.iter() {
            if c > 0 {
                let p = c as f64 / n;
                h -= p * p.ln() / std::f64::consts::LN_2;
            }
        }
        h
    }

    fn digram_oracle(s: &[u8]) -> f64 {
        let mut hist = vec![0usize; 256 * 256];
        for w in s.windows(2) {
            hist[w[0] as usize * 256 + w[1] as usize] += 1;
        }
        let n = (s.len() - 1) as f64;
        hist.iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln() / std::f64::consts::LN_2
            })
            .sum()
    }

    #[test]
    fn balanced_binary_entropy() {
        assert_eq!(entropy("0101010101010101").unwrap(), 1.0);
        assert!(entropy("0101010101010101").unwrap() > entropy("0100101100100010").unwrap());
        assert_eq!(entropy("aaaa").unwrap(), 0.0);
        assert!(entropy("").is_err());
    }

    #[test]
    fn digram_entropy() {
        assert_eq!(entropy2("aaaa").unwrap(), 0.0);
        assert!(entropy2("a").is_err());
        let s = "01100110011001100110";
        let e = entropy2(s).unwrap();
        assert!((e - digram_oracle(s.as_bytes())).abs() < 1e-12);
        assert!(e < 2.0 && e > 1.99);
    }

    #[test]
    fn equifrequent_string_maximises_entropy2() {
        let s = "01100110011001100110";
        let target = entropy2(s).unwrap();
        let len = s.len();
        let mut best = 0.0f64;
        for code in 0u32..(1 << len) {
            let t: String = (0..len)
                .map(|i| if code >> i & 1 == 1 { '1' } else { '0' })
                .collect();
            best = best.max(entropy2(&t).unwrap());
        }
        assert!((best - target).abs() < 1e-12);
    }

    #[test]
    fn change_complexity_basics() {
        assert_eq!(change_complexity("0000000").unwrap(), 0.0);
        assert_eq!(change_complexity("1").unwrap(), 0.0);
        assert!(matches!(
            change_complexity("0120"),
            Err(CtmError::NonBinary(_))
        ));
        assert!(change_complexity("").is_err());
        // Alternation changes everywhere at level 1 and nowhere above it.
        assert_eq!(change_complexity("010101").unwrap(), 5.0);
        // 0010: levels 011, 10, 1 -> 2 + 1/2 + 1/3
        assert!((change_complexity("0010").unwrap() - (2.0 + 0.5 + 1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(
            change_complexity("HTTH").unwrap(),
            change_complexity("0110").unwrap()
        );
    }

    #[test]
    fn change_complexity_minimum_is_constant_string() {
        for len in 1..=10u32 {
            let mut min = f64::INFINITY;
            for code in 0u32..(1 << len) {
                let t: String = (0..len)
                    .map(|i| if code >> i & 1 == 1 { '1' } else { '0' })
                    .collect();
                min = min.min(change_complexity(&t).unwrap());
            }
            assert_eq!(min, change_complexity(&"0".repeat(len as usize)).unwrap());
        }
    }

    proptest! {
        #[test]
        fn entropy_matches_histogram(s in proptest::collection::vec(b'a'..b'f', 1..64)) {
            let text = String::from_utf8(s.clone()).unwrap();
            prop_assert!((entropy(&text).unwrap() - entropy_oracle(&s)).abs() < 1e-12);
            prop_assert!(entropy(&text).unwrap() <= (crate::pattern::distinct_chars(&text) as f64).log2() + 1e-12);
        }

        #[test]
        fn entropy2_matches_histogram(s in proptest::collection::vec(b'a'..b'e', 2..64)) {
            let text = String::from_utf8(s.clone()).unwrap();
            prop_assert!((entropy2(&text).unwrap() - digram_oracle(&s)).abs() < 1e-12);
            let rev: String = text.chars().rev().collect();
            prop_assert!((entropy2(&text).unwrap() - entropy2(&rev).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn renaming_invariance(s in proptest::collection::vec(0u8..4, 2..40)) {
            let a: String = s.iter().map(|&c| (b'a' + c) as char).collect();
            let b: String = s.iter().map(|&c| (b'w' + (3 - c)) as char).collect();
            prop_assert!((entropy(&a).unwrap() - entropy(&b).unwrap()).abs() < 1e-12);
            prop_assert!((entropy2(&a).unwrap() - entropy2(&b).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn zero_iff_constant(s in proptest::collection::vec(0u8..3, 2..30)) {
            let text: String = s.iter().map(|&c| (b'0' + c) as char).collect();
            let constant = s.iter().all(|&c| c == s[0]);
            prop_assert_eq!(entropy(&text).unwrap() == 0.0, constant);
            let one_digram = s.windows(2).all(|w| w == &s[0..2]);
            prop_assert_eq!(entropy2(&text).unwrap() == 0.0, one_digram);
        }

        #[test]
        fn change_complexity_complement(bits in proptest::collection::vec(any::<bool>(), 1..40)) {
            let s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let c: String = bits.iter().map(|&b| if b { '0' } else { '1' }).collect();
            prop_assert_eq!(change_complexity(&s).unwrap(), change_complexity(&c).unwrap());
        }
    }
}
