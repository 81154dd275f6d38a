//! From raw campaign counts to a frequency dataset, and the two on-disk
//! formats: self-generated datasets (`acss-dataset v1`) and imported
//! complexity tables (`acss-ktable`).

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::enumeration::{Mode, RawCounts};
use crate::error::{CtmError, Result};
use crate::pattern::{canonicalize, canonicalize_str, distinct_chars, PatternKey};
use crate::tm::SpaceSpec;

/// Pattern counts after symmetric completion, before thresholding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletedCounts {
    pub space: SpaceSpec,
    pub cutoff: u64,
    pub origin: Origin,
    pub patterns: HashMap<PatternKey, u64>,
    /// Completed halting mass.
    pub total: u64,
}

/// How the underlying machines were chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Full,
    Sample { seed: u64 },
}

impl From<Mode> for Origin {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Full => Origin::Full,
            Mode::Sample { seed, .. } => Origin::Sample { seed },
        }
    }
}

/// Machines of the full space whose first transition halts:
/// `m·(m·(2n+1))^(n·m-1)`.
pub fn immediate_halters(space: SpaceSpec) -> BigUint {
    BigUint::from(space.action_count()).pow(space.entry_count() as u32 - 1) * space.n_symbols()
}

/// Restores the machines the reduced space leaves out.
///
/// Each observed output credits its own pattern and the pattern of its
/// reversal (the mirror machines moving left first). First-transition
/// halters are added analytically to pattern `0`. Machines entering state 1
/// again on their first move never halt and need no completion.
///
/// A full enumeration yields exact full-space counts. A sample of `N`
/// reduced machines stands for `N/(n-1)` first-transition halters, so sample
/// counts are kept in units of `1/(n-1)` machine: each observation is worth
/// `n-1` and the halters contribute `N`.
pub fn complete(raw: &RawCounts) -> Result<CompletedCounts> {
    let space = raw.space;
    let (weight, immediate) = match raw.mode {
        Mode::Full => {
            let halters = immediate_halters(space).to_u64().ok_or_else(|| {
                CtmError::InvalidArgument(format!("space {space} too large for full completion"))
            })?;
            (1, halters)
        }
        Mode::Sample { .. } => (space.n_states() as u64 - 1, raw.machines_run),
    };
    let overflow = || CtmError::InvalidArgument("completed counts overflow 64 bits".into());

    let mut patterns: HashMap<PatternKey, u64> = HashMap::new();
    for (output, &count) in &raw.counts {
        let credit = count.checked_mul(weight).ok_or_else(overflow)?;
        let forward = canonicalize(output);
        let backward = forward.reversed();
        *patterns.entry(forward).or_default() += credit;
        *patterns.entry(backward).or_default() += credit;
    }
    if immediate > 0 {
        *patterns.entry(canonicalize(&[0u8])).or_default() += immediate;
    }
    let total = raw
        .machines_halted
        .checked_mul(2 * weight)
        .and_then(|t| t.checked_add(immediate))
        .ok_or_else(overflow)?;

    Ok(CompletedCounts {
        space,
        cutoff: raw.cutoff,
        origin: raw.mode.into(),
        patterns,
        total,
    })
}

/// Thresholded pattern counts with their provenance. `D(p) = count/total`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyDataset {
    pub space: SpaceSpec,
    pub cutoff: u64,
    pub origin: Origin,
    pub generator: String,
    pub threshold: u64,
    /// Completed halting mass before thresholding.
    pub total: u64,
    pub patterns: BTreeMap<PatternKey, u64>,
}

pub fn build_dataset(
    completed: &CompletedCounts,
    threshold: u64,
    generator: &str,
) -> Result<FrequencyDataset> {
    if threshold == 0 {
        return Err(CtmError::InvalidArgument(
            "threshold must be at least 1".into(),
        ));
    }
    Ok(FrequencyDataset {
        space: completed.space,
        cutoff: completed.cutoff,
        origin: completed.origin,
        generator: generator.to_string(),
        threshold,
        total: completed.total,
        patterns: completed
            .patterns
            .iter()
            .filter(|(_, &c)| c >= threshold)
            .map(|(k, &c)| (k.clone(), c))
            .collect(),
    })
}

impl FrequencyDataset {
    pub fn count(&self, pattern: &PatternKey) -> Option<u64> {
        self.patterns.get(pattern).copied()
    }

    pub fn d_of_pattern(&self, pattern: &PatternKey) -> Option<f64> {
        self.count(pattern).map(|c| c as f64 / self.total as f64)
    }

    pub fn k_of_pattern(&self, pattern: &PatternKey) -> Option<f64> {
        self.d_of_pattern(pattern).map(|d| -d.log2())
    }

    /// `D` of the pattern of `s`; `None` when the pattern is absent.
    pub fn d_of(&self, s: &str) -> Option<f64> {
        self.d_of_pattern(&canonicalize_str(s))
    }

    /// `K(s) = -log2 D(s)` in bits; `None` when the pattern is absent.
    pub fn k_of(&self, s: &str) -> Option<f64> {
        self.k_of_pattern(&canonicalize_str(s))
    }

    /// `sum_p 2^-K(p)`, at most 1.
    pub fn kraft_sum(&self) -> f64 {
        self.patterns.values().map(|&c| c as f64).sum::<f64>() / self.total as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# acss-dataset v1\n");
        let _ = writeln!(
            out,
            "# space: n={},m={}",
            self.space.n_states(),
            self.space.n_symbols()
        );
        let _ = writeln!(out, "# cutoff: {}", self.cutoff);
        match self.origin {
            Origin::Full => out.push_str("# mode: full\n# seed: n/a\n"),
            Origin::Sample { seed } => {
                let _ = write!(out, "# mode: sample\n# seed: {seed}\n");
            }
        }
        let _ = writeln!(out, "# generator: {}", self.generator);
        let _ = writeln!(out, "# threshold: {}", self.threshold);
        let _ = writeln!(out, "# total: {}", self.total);
        // Rendered patterns sort the same way as their symbol vectors.
        for (pattern, count) in &self.patterns {
            let _ = writeln!(out, "{pattern},{count}");
        }
        out
    }

    pub fn from_csv(text: &str, label: &str) -> Result<Self> {
        let mut lines = text.split('\n').enumerate().peekable();
        let mut header = |key: &str| -> Result<String> {
            let (i, line) = lines
                .next()
                .ok_or_else(|| CtmError::parse(label, 0, format!("missing `# {key}` header")))?;
            if key == "acss-dataset v1" {
                return if line == "# acss-dataset v1" {
                    Ok(String::new())
                } else {
                    Err(CtmError::parse(label, i + 1, "not an acss-dataset v1 file"))
                };
            }
            line.strip_prefix("# ")
                .and_then(|l| l.strip_prefix(key))
                .and_then(|l| l.strip_prefix(": "))
                .map(str::to_string)
                .ok_or_else(|| CtmError::parse(label, i + 1, format!("expected `# {key}: ...`")))
        };
        header("acss-dataset v1")?;
        let space_text = header("space")?;
        let cutoff_text = header("cutoff")?;
        let mode_text = header("mode")?;
        let seed_text = header("seed")?;
        let generator = header("generator")?;
        let threshold_text = header("threshold")?;
        let total_text = header("total")?;

        let bad = |line: usize, msg: String| CtmError::parse(label, line, msg);
        let space =
            parse_space(&space_text).ok_or_else(|| bad(2, format!("bad space {space_text:?}")))?;
        let cutoff: u64 = cutoff_text
            .parse()
            .map_err(|_| bad(3, format!("bad cutoff {cutoff_text:?}")))?;
        let origin = match (mode_text.as_str(), seed_text.as_str()) {
            ("full", "n/a") => Origin::Full,
            ("sample", seed) => Origin::Sample {
                seed: seed
                    .parse()
                    .map_err(|_| bad(5, format!("bad seed {seed:?}")))?,
            },
            _ => return Err(bad(4, format!("bad mode/seed {mode_text:?}/{seed_text:?}"))),
        };
        let threshold: u64 = threshold_text
            .parse()
            .map_err(|_| bad(7, format!("bad threshold {threshold_text:?}")))?;
        let total: u64 = total_text
            .parse()
            .map_err(|_| bad(8, format!("bad total {total_text:?}")))?;

        let mut patterns = BTreeMap::new();
        let mut sum = 0u64;
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (p, c) = line
                .split_once(',')
                .ok_or_else(|| bad(i + 1, "expected `pattern,count`".into()))?;
            let pattern = PatternKey::parse(p)
                .filter(|k| !k.is_empty())
                .ok_or_else(|| bad(i + 1, format!("{p:?} is not a canonical pattern")))?;
            let count: u64 = c
                .parse()
                .map_err(|_| bad(i + 1, format!("bad count {c:?}")))?;
            if count < threshold {
                return Err(bad(
                    i + 1,
                    format!("count {count} below threshold {threshold}"),
                ));
            }
            sum += count;
            if patterns.insert(pattern, count).is_some() {
                return Err(bad(i + 1, format!("duplicate pattern {p:?}")));
            }
        }
        if sum > total {
            return Err(bad(
                8,
                format!("pattern counts sum to {sum}, above total {total}"),
            ));
        }
        Ok(FrequencyDataset {
            space,
            cutoff,
            origin,
            generator,
            threshold,
            total,
            patterns,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| CtmError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CtmError::io(path, e))?;
        Self::from_csv(&text, &path.display().to_string())
    }
}

fn parse_space(text: &str) -> Option<SpaceSpec> {
    let (n, m) = text.strip_prefix("n=")?.split_once(",m=")?;
    SpaceSpec::new(n.parse().ok()?, m.parse().ok()?).ok()
}

pub const PUBLISHED_ALPHABETS: [u32; 5] = [2, 4, 5, 6, 9];

/// Imported complexity values, one per pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct KTable {
    pub alphabet: u32,
    pub entries: BTreeMap<PatternKey, f64>,
}

impl KTable {
    pub fn k_of(&self, s: &str) -> Option<f64> {
        self.entries.get(&canonicalize_str(s)).copied()
    }

    pub fn d_of(&self, s: &str) -> Option<f64> {
        self.k_of(s).map(|k| (-k).exp2())
    }

    /// Parses `# acss-ktable alphabet=<a>` followed by `string,K` rows.
    /// Strings are reduced to their patterns.
    pub fn parse(text: &str, alphabet: u32, label: &str) -> Result<Self> {
        if !PUBLISHED_ALPHABETS.contains(&alphabet) {
            return Err(CtmError::UnsupportedAlphabet(alphabet));
        }
        let bad = |line: usize, msg: String| CtmError::parse(label, line, msg);
        let mut entries: BTreeMap<PatternKey, f64> = BTreeMap::new();
        let mut seen: HashMap<String, ()> = HashMap::new();
        for (i, raw) in text.split('\n').enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(a) = comment.trim().strip_prefix("acss-ktable alphabet=") {
                    let declared: u32 = a
                        .trim()
                        .parse()
                        .map_err(|_| bad(i + 1, format!("bad alphabet {a:?}")))?;
                    if declared != alphabet {
                        return Err(bad(
                            i + 1,
                            format!("table declares alphabet {declared}, expected {alphabet}"),
                        ));
                    }
                }
                continue;
            }
            let (s, k) = line
                .split_once(',')
                .ok_or_else(|| bad(i + 1, "expected `string,K`".into()))?;
            if s.is_empty() {
                return Err(bad(i + 1, "empty string".into()));
            }
            let k: f64 = k
                .trim()
                .parse()
                .map_err(|_| bad(i + 1, format!("bad K value {k:?}")))?;
            if !(k.is_finite() && k > 0.0) {
                return Err(bad(i + 1, format!("K must be positive, got {k}")));
            }
            if distinct_chars(s) > alphabet as usize {
                return Err(bad(
                    i + 1,
                    format!("{s:?} uses more than {alphabet} symbols"),
                ));
            }
            if seen.insert(s.to_string(), ()).is_some() {
                return Err(bad(i + 1, format!("duplicate string {s:?}")));
            }
            let pattern = canonicalize_str(s);
            match entries.get(&pattern) {
                Some(&prev) if (prev - k).abs() > 1e-9 => {
                    return Err(bad(
                        i + 1,
                        format!("{s:?} disagrees with an earlier string of pattern {pattern}"),
                    ))
                }
                Some(_) => {}
                None => {
                    entries.insert(pattern, k);
                }
            }
        }
        Ok(KTable { alphabet, entries })
    }
}

/// Loads a published complexity table CSV.
pub fn import_published(path: &Path, alphabet: u32) -> Result<KTable> {
    let text = std::fs::read_to_string(path).map_err(|e| CtmError::io(path, e))?;
    KTable::parse(&text, alphabet, &path.display().to_string())
}
