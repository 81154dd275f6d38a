//! String patterns: strings up to a renaming of their symbols.
//!
//! The canonical representative relabels symbols by order of first
//! occurrence, so `"22311"` and `"11233"` both become `00122`.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

/// Canonical pattern, stored as symbol indices `0, 1, 2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternKey(Vec<u8>);

impl PatternKey {
    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct symbols.
    pub fn distinct(&self) -> usize {
        self.0.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// Pattern of the reversed string.
    pub fn reversed(&self) -> PatternKey {
        let rev: Vec<u8> = self.0.iter().rev().copied().collect();
        canonicalize(&rev)
    }

    /// Parses a rendered pattern (`"0102"`). Returns `None` unless the text
    /// is already canonical.
    pub fn parse(text: &str) -> Option<PatternKey> {
        let symbols: Option<Vec<u8>> = text
            .chars()
            .map(|c| c.to_digit(36).map(|d| d as u8))
            .collect();
        let symbols = symbols?;
        let key = canonicalize(&symbols);
        (key.0 == symbols).then_some(key)
    }
}

impl fmt::Display for PatternKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_symbols(&self.0))
    }
}

/// Renders symbol indices as digits (`0`-`9`, then `a`-`z`).
pub fn render_symbols(symbols: &[u8]) -> String {
    symbols
        .iter()
        .map(|&s| char::from_digit(s as u32, 36).unwrap_or('?'))
        .collect()
}

/// First-occurrence relabeling of any symbol sequence.
pub fn canonicalize<T: Copy + Eq + Hash>(symbols: &[T]) -> PatternKey {
    let mut seen: HashMap<T, u8> = HashMap::new();
    PatternKey(
        symbols
            .iter()
            .map(|s| {
                let next = seen.len() as u8;
                *seen.entry(*s).or_insert(next)
            })
            .collect(),
    )
}

/// Pattern of a string, treating each `char` as a symbol.
pub fn canonicalize_str(s: &str) -> PatternKey {
    let chars: Vec<char> = s.chars().collect();
    canonicalize(&chars)
}

/// Number of distinct characters in `s`.
pub fn distinct_chars(s: &str) -> usize {
    let mut seen: Vec<char> = s.chars().collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Strings over an `alphabet`-symbol alphabet sharing a pattern with
/// `distinct` symbols: `alphabet·(alphabet-1)···(alphabet-distinct+1)`.
pub fn class_size(distinct: usize, alphabet: usize) -> f64 {
    if distinct > alphabet {
        return 0.0;
    }
    (0..distinct).map(|i| (alphabet - i) as f64).product()
}

/// Number of patterns of `length` using at most `alphabet` symbols:
/// `sum_{k <= alphabet} S(length, k)` (Stirling numbers of the second kind).
pub fn pattern_count(length: usize, alphabet: usize) -> u128 {
    // row[k] = S(i, k)
    let mut row = vec![0u128; alphabet + 1];
    row[0] = 1;
    for _ in 0..length {
        for k in (1..=alphabet).rev() {
            row[k] = k as u128 * row[k] + row[k - 1];
        }
        row[0] = 0;
    }
    row.iter().sum()
}
