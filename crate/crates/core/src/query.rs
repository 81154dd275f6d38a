//! Complexity lookups and the Bayesian quantities built on them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use crate::distribution::{FrequencyDataset, KTable, PUBLISHED_ALPHABETS};
use crate::error::{CtmError, Result};
use crate::pattern::{canonicalize_str, class_size, distinct_chars, pattern_count, PatternKey};

pub const MIN_LENGTH: usize = 2;
pub const MAX_LENGTH: usize = 12;

/// Anything that maps patterns to complexity values for one alphabet size.
pub trait ComplexitySource: Send + Sync {
    fn alphabet(&self) -> u32;

    fn k_pattern(&self, pattern: &PatternKey) -> Option<f64>;

    /// Visits every stored pattern of `length` with its `K`, in pattern
    /// order.
    fn for_each_of_length(&self, length: usize, f: &mut dyn FnMut(&PatternKey, f64));

    fn k_of(&self, s: &str) -> Option<f64> {
        if s.is_empty() || distinct_chars(s) > self.alphabet() as usize {
            return None;
        }
        self.k_pattern(&canonicalize_str(s))
    }
}

impl ComplexitySource for KTable {
    fn alphabet(&self) -> u32 {
        self.alphabet
    }

    fn k_pattern(&self, pattern: &PatternKey) -> Option<f64> {
        self.entries.get(pattern).copied()
    }

    fn for_each_of_length(&self, length: usize, f: &mut dyn FnMut(&PatternKey, f64)) {
        for (p, &k) in &self.entries {
            if p.len() == length {
                f(p, k);
            }
        }
    }
}

impl ComplexitySource for FrequencyDataset {
    fn alphabet(&self) -> u32 {
        self.space.n_symbols()
    }

    fn k_pattern(&self, pattern: &PatternKey) -> Option<f64> {
        self.k_of_pattern(pattern)
    }

    fn for_each_of_length(&self, length: usize, f: &mut dyn FnMut(&PatternKey, f64)) {
        for (p, &c) in &self.patterns {
            if p.len() == length {
                f(p, -(c as f64 / self.total as f64).log2());
            }
        }
    }
}

/// `K` and `D = 2^-K` of one string; both `None` when unavailable.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityResult {
    pub string: String,
    pub alphabet: u32,
    pub k: Option<f64>,
    pub d: Option<f64>,
}

/// ACSS of each string. Strings using more symbols than the alphabet, or
/// whose pattern the table lacks, come back missing.
pub fn acss<S: AsRef<str>>(
    source: &dyn ComplexitySource,
    strings: &[S],
) -> Result<Vec<ComplexityResult>> {
    strings
        .iter()
        .map(|s| {
            let s = s.as_ref();
            check_length(s)?;
            let k = source.k_of(s);
            Ok(ComplexityResult {
                string: s.to_string(),
                alphabet: source.alphabet(),
                k,
                d: k.map(|k| (-k).exp2()),
            })
        })
        .collect()
}

fn check_length(s: &str) -> Result<()> {
    let len = s.chars().count();
    if !(MIN_LENGTH..=MAX_LENGTH).contains(&len) {
        return Err(CtmError::LengthOutOfRange {
            len,
            min: MIN_LENGTH,
            max: MAX_LENGTH,
        });
    }
    Ok(())
}

/// `K` of every window of `span` characters, left to right.
pub fn local_complexity(
    source: &dyn ComplexitySource,
    s: &str,
    span: usize,
) -> Result<Vec<Option<f64>>> {
    let chars: Vec<char> = s.chars().collect();
    if !(MIN_LENGTH..=MAX_LENGTH).contains(&span) || span > chars.len() {
        return Err(CtmError::SpanOutOfRange {
            span,
            len: chars.len(),
        });
    }
    Ok(chars
        .windows(span)
        .map(|w| source.k_of(&w.iter().collect::<String>()))
        .collect())
}

/// Mean of the local complexities, `None` if any window is missing.
pub fn mean_local_complexity(
    source: &dyn ComplexitySource,
    s: &str,
    span: usize,
) -> Result<Option<f64>> {
    let values = local_complexity(source, s, span)?;
    let n = values.len() as f64;
    Ok(values
        .into_iter()
        .sum::<Option<f64>>()
        .map(|total| total / n))
}

/// `P(s|D)` with a flag telling whether the table covered every pattern of
/// the string's length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Likelihood {
    pub value: f64,
    pub complete: bool,
}

/// `sum_{|t| = length} D(t)` over all strings of the alphabet, expanded
/// from patterns by their class sizes, and whether coverage was complete.
pub fn length_mass(source: &dyn ComplexitySource, length: usize) -> (f64, bool) {
    let alphabet = source.alphabet() as usize;
    let mut mass = 0.0;
    let mut seen = 0u128;
    source.for_each_of_length(length, &mut |p, k| {
        if p.distinct() <= alphabet {
            mass += (-k).exp2() * class_size(p.distinct(), alphabet);
            seen += 1;
        }
    });
    (mass, seen == pattern_count(length, alphabet))
}

/// `P(s|D) = D(s) / sum_{|t|=|s|} D(t)`. `Ok(None)` when `s` itself is
/// missing from the table.
pub fn likelihood_d(source: &dyn ComplexitySource, s: &str) -> Result<Option<Likelihood>> {
    let alphabet = source.alphabet() as usize;
    let length = s.chars().count();
    if length == 0 || length > MAX_LENGTH {
        return Err(CtmError::LengthOutOfRange {
            len: length,
            min: 1,
            max: MAX_LENGTH,
        });
    }
    if distinct_chars(s) > alphabet {
        return Ok(None);
    }
    if length == 1 {
        // All single symbols share one pattern.
        return Ok(Some(Likelihood {
            value: 1.0 / alphabet as f64,
            complete: true,
        }));
    }
    let Some(k) = source.k_of(s) else {
        return Ok(None);
    };
    let (mass, complete) = length_mass(source, length);
    if mass <= 0.0 {
        return Err(CtmError::Degenerate(format!(
            "no strings of length {length} in the table"
        )));
    }
    Ok(Some(Likelihood {
        value: (-k).exp2() / mass,
        complete,
    }))
}

/// Evidence for a random versus a deterministic source.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesResult {
    pub string: String,
    /// `P(s|R) = 1/m^l`
    pub likelihood_random: f64,
    /// `P(s|D)`
    pub likelihood_deterministic: f64,
    /// `P(s|R) / P(s|D)`
    pub bayes_factor: f64,
    /// `P(R|s)` under the supplied prior.
    pub posterior_random: Option<f64>,
    /// False when the table missed some strings of this length.
    pub complete: bool,
}

pub fn bayes(
    source: &dyn ComplexitySource,
    s: &str,
    prior: Option<f64>,
) -> Result<Option<BayesResult>> {
    if let Some(p) = prior {
        if !(0.0..=1.0).contains(&p) {
            return Err(CtmError::InvalidArgument(format!(
                "prior {p} outside [0, 1]"
            )));
        }
    }
    let Some(lik) = likelihood_d(source, s)? else {
        return Ok(None);
    };
    let random = (source.alphabet() as f64).powi(-(s.chars().count() as i32));
    let posterior = prior.map(|p| {
        let num = random * p;
        num / (num + lik.value * (1.0 - p))
    });
    Ok(Some(BayesResult {
        string: s.to_string(),
        likelihood_random: random,
        likelihood_deterministic: lik.value,
        bayes_factor: random / lik.value,
        posterior_random: posterior,
        complete: lik.complete,
    }))
}

/// Bayes factor `P(s|R)/P(s|D)`.
pub fn likelihood_ratio(source: &dyn ComplexitySource, s: &str) -> Result<Option<f64>> {
    Ok(bayes(source, s, None)?.map(|b| b.bayes_factor))
}

pub const DEFAULT_PRIOR: f64 = 0.5;

/// Posterior probability of a random source, `P(R|s)`.
pub fn prob_random(source: &dyn ComplexitySource, s: &str, prior: f64) -> Result<Option<f64>> {
    Ok(bayes(source, s, Some(prior))?.and_then(|b| b.posterior_random))
}

/// Either kind of on-disk table.
pub enum LoadedTable {
    Published(KTable),
    Dataset(FrequencyDataset),
}

impl LoadedTable {
    pub fn source(&self) -> &dyn ComplexitySource {
        match self {
            LoadedTable::Published(t) => t,
            LoadedTable::Dataset(d) => d,
        }
    }
}

/// Reads an `acss-ktable` or `acss-dataset` file, telling them apart by the
/// first line.
pub fn load_table(path: &Path) -> Result<LoadedTable> {
    let text = std::fs::read_to_string(path).map_err(|e| CtmError::io(path, e))?;
    let label = path.display().to_string();
    let first = text.lines().next().unwrap_or_default();
    if first.starts_with("# acss-dataset") {
        return FrequencyDataset::from_csv(&text, &label).map(LoadedTable::Dataset);
    }
    let alphabet = first
        .strip_prefix("# acss-ktable alphabet=")
        .and_then(|a| a.trim().parse().ok())
        .ok_or_else(|| {
            CtmError::parse(
                &label,
                1,
                "expected `# acss-ktable alphabet=<a>` or `# acss-dataset v1`",
            )
        })?;
    KTable::parse(&text, alphabet, &label).map(LoadedTable::Published)
}

/// Tables for several alphabets, each read from disk on first use.
#[derive(Default)]
pub struct TableSet {
    slots: BTreeMap<u32, Slot>,
}

struct Slot {
    path: PathBuf,
    table: OnceLock<std::result::Result<Arc<LoadedTable>, String>>,
}

impl TableSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `k<a>.csv` for every published alphabet found in `dir`.
    pub fn from_dir(dir: &Path) -> Self {
        let mut set = TableSet::new();
        for a in PUBLISHED_ALPHABETS {
            let path = dir.join(format!("k{a}.csv"));
            if path.is_file() {
                set.register(a, path);
            }
        }
        set
    }

    pub fn register(&mut self, alphabet: u32, path: impl Into<PathBuf>) {
        self.slots.insert(
            alphabet,
            Slot {
                path: path.into(),
                table: OnceLock::new(),
            },
        );
    }

    pub fn alphabets(&self) -> Vec<u32> {
        self.slots.keys().copied().collect()
    }

    pub fn get(&self, alphabet: u32) -> Result<Arc<LoadedTable>> {
        let slot = self
            .slots
            .get(&alphabet)
            .ok_or(CtmError::TableNotLoaded(alphabet))?;
        slot.table
            .get_or_init(|| {
                let table = load_table(&slot.path).map_err(|e| e.to_string())?;
                if table.source().alphabet() != alphabet {
                    return Err(format!(
                        "{} holds alphabet {}, registered as {alphabet}",
                        slot.path.display(),
                        table.source().alphabet()
                    ));
                }
                Ok(Arc::new(table))
            })
            .clone()
            .map_err(|msg| CtmError::parse(&slot.path.display().to_string(), 0, msg))
    }
}
