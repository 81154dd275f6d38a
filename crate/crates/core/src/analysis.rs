//! Analyses over human response files: the over-complexity t-test, the
//! logistic randomness threshold, the local-complexity span scan and
//! correlation matrices across measures.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::error::{CtmError, Result};
use crate::measures::{change_complexity, entropy, entropy2};
use crate::pattern::{class_size, distinct_chars};
use crate::query::{mean_local_complexity, ComplexitySource};
use crate::stats::{
    correlation_matrix, linear_fit, logistic_fit, one_sample_t, RegressionFit, TTest,
};

/// One observation: a stimulus with a rating or a 0/1 choice.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseRecord {
    pub string: String,
    pub value: f64,
    pub group: Option<String>,
}

/// Parses a response CSV with header `string,value[,group]`.
pub fn parse_responses(reader: impl Read, label: &str) -> Result<Vec<ResponseRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CtmError::parse(label, 1, e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let has_group = match names.as_slice() {
        ["string", "value"] => false,
        ["string", "value", "group"] => true,
        _ => {
            return Err(CtmError::parse(
                label,
                1,
                format!(
                    "expected header string,value[,group], found {}",
                    names.join(",")
                ),
            ))
        }
    };
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CtmError::parse(label, line, e.to_string()))?;
        let string = row[0].trim().to_string();
        if string.is_empty() {
            return Err(CtmError::parse(label, line, "empty stimulus"));
        }
        let value: f64 = row[1]
            .trim()
            .parse()
            .map_err(|_| CtmError::parse(label, line, format!("bad value {:?}", &row[1])))?;
        if !value.is_finite() {
            return Err(CtmError::parse(label, line, "non-finite value"));
        }
        let group = has_group.then(|| row[2].trim().to_string());
        out.push(ResponseRecord {
            string,
            value,
            group,
        });
    }
    if out.is_empty() {
        return Err(CtmError::parse(label, 1, "no records"));
    }
    Ok(out)
}

pub fn read_responses(path: &Path) -> Result<Vec<ResponseRecord>> {
    let file = std::fs::File::open(path).map_err(|e| CtmError::io(path, e))?;
    parse_responses(file, &path.display().to_string())
}

/// Symbols used across all stimuli must fit the table's alphabet.
fn check_alphabet(records: &[ResponseRecord], source: &dyn ComplexitySource) -> Result<()> {
    let all: String = records.iter().map(|r| r.string.as_str()).collect();
    let used = distinct_chars(&all);
    if used > source.alphabet() as usize {
        return Err(CtmError::InvalidArgument(format!(
            "stimuli use {used} symbols but the table has alphabet {}",
            source.alphabet()
        )));
    }
    Ok(())
}

fn k_or_missing(source: &dyn ComplexitySource, s: &str) -> Result<f64> {
    source
        .k_of(s)
        .ok_or_else(|| CtmError::MissingValue(format!("no K for {s:?}")))
}

/// Population mean of `K` over strings of one length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationMean {
    /// Every pattern counted once.
    pub pattern_weighted: f64,
    /// Every string counted once, so a pattern weighs by its class size.
    pub string_weighted: f64,
    pub complete: bool,
}

pub fn population_mean(source: &dyn ComplexitySource, length: usize) -> Result<PopulationMean> {
    let m = source.alphabet() as usize;
    let (mut n, mut sum, mut w_sum, mut wk_sum) = (0usize, 0.0, 0.0, 0.0);
    source.for_each_of_length(length, &mut |p, k| {
        let w = class_size(p.distinct(), m);
        n += 1;
        sum += k;
        w_sum += w;
        wk_sum += w * k;
    });
    if n == 0 {
        return Err(CtmError::MissingValue(format!(
            "no patterns of length {length}"
        )));
    }
    Ok(PopulationMean {
        pattern_weighted: sum / n as f64,
        string_weighted: wk_sum / w_sum,
        complete: n as u128 == crate::pattern::pattern_count(length, m),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    Pattern,
    String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Exp1Result {
    pub length: usize,
    pub k_values: Vec<f64>,
    pub population: PopulationMean,
    pub pattern_weighted: TTest,
    pub string_weighted: TTest,
}

impl Exp1Result {
    pub fn test(&self, weighting: Weighting) -> &TTest {
        match weighting {
            Weighting::Pattern => &self.pattern_weighted,
            Weighting::String => &self.string_weighted,
        }
    }
}

/// Compares the complexity of produced strings with the mean over all
/// strings of their length. Record values are ignored.
pub fn exp1(records: &[ResponseRecord], source: &dyn ComplexitySource) -> Result<Exp1Result> {
    check_alphabet(records, source)?;
    let length = records[0].string.chars().count();
    if records.iter().any(|r| r.string.chars().count() != length) {
        return Err(CtmError::InvalidArgument("stimuli differ in length".into()));
    }
    let k_values = records
        .iter()
        .map(|r| k_or_missing(source, &r.string))
        .collect::<Result<Vec<f64>>>()?;
    let population = population_mean(source, length)?;
    Ok(Exp1Result {
        length,
        pattern_weighted: one_sample_t(&k_values, population.pattern_weighted)?,
        string_weighted: one_sample_t(&k_values, population.string_weighted)?,
        k_values,
        population,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Exp2Result {
    pub k_values: Vec<f64>,
    pub choices: Vec<bool>,
    pub fit: RegressionFit,
}

/// Logistic regression of a 0/1 "random" choice on `K`.
pub fn exp2(records: &[ResponseRecord], source: &dyn ComplexitySource) -> Result<Exp2Result> {
    check_alphabet(records, source)?;
    let mut k_values = Vec::with_capacity(records.len());
    let mut choices = Vec::with_capacity(records.len());
    for r in records {
        let choice = match r.value {
            0.0 => false,
            1.0 => true,
            v => {
                return Err(CtmError::InvalidArgument(format!(
                    "choice must be 0 or 1, got {v}"
                )))
            }
        };
        k_values.push(k_or_missing(source, &r.string)?);
        choices.push(choice);
    }
    let fit = logistic_fit(&k_values, &choices)?;
    Ok(Exp2Result {
        k_values,
        choices,
        fit,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpanFit {
    pub span: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Mean rating per stimulus, in first-appearance order.
pub fn mean_ratings(records: &[ResponseRecord]) -> Vec<(String, f64)> {
    let mut order = Vec::new();
    let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in records {
        let e = sums.entry(&r.string).or_insert_with(|| {
            order.push(r.string.clone());
            (0.0, 0)
        });
        e.0 += r.value;
        e.1 += 1;
    }
    order
        .into_iter()
        .map(|s| {
            let (sum, n) = sums[s.as_str()];
            (s, sum / n as f64)
        })
        .collect()
}

/// For each span, R² of mean rating regressed on mean local complexity.
pub fn span_scan(
    records: &[ResponseRecord],
    source: &dyn ComplexitySource,
    spans: std::ops::RangeInclusive<usize>,
) -> Result<Vec<SpanFit>> {
    check_alphabet(records, source)?;
    let ratings = mean_ratings(records);
    let y: Vec<f64> = ratings.iter().map(|(_, v)| *v).collect();
    spans
        .map(|span| {
            let x = ratings
                .iter()
                .map(|(s, _)| {
                    mean_local_complexity(source, s, span)?.ok_or_else(|| {
                        CtmError::MissingValue(format!("a window of {s:?} at span {span}"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let fit = linear_fit(&x, &y)?;
            Ok(SpanFit {
                span,
                slope: fit.slope,
                intercept: fit.intercept,
                r_squared: fit.r_squared,
            })
        })
        .collect()
}

/// Measure columns for a correlation matrix: `K` from each labelled source,
/// then entropy, plus second-order entropy and change complexity when every
/// string is long enough or binary respectively.
pub fn measure_columns(
    strings: &[String],
    sources: &[(String, &dyn ComplexitySource)],
) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut labels = Vec::new();
    let mut columns = Vec::new();
    for (label, source) in sources {
        labels.push(label.clone());
        columns.push(
            strings
                .iter()
                .map(|s| k_or_missing(*source, s))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    labels.push("entropy".into());
    columns.push(strings.iter().map(|s| entropy(s)).collect::<Result<_>>()?);
    if strings.iter().all(|s| s.chars().count() >= 2) {
        labels.push("entropy2".into());
        columns.push(strings.iter().map(|s| entropy2(s)).collect::<Result<_>>()?);
    }
    if strings.iter().all(|s| distinct_chars(s) <= 2) {
        labels.push("change".into());
        columns.push(
            strings
                .iter()
                .map(|s| change_complexity(s))
                .collect::<Result<_>>()?,
        );
    }
    Ok((labels, columns))
}

pub fn correlate(
    strings: &[String],
    sources: &[(String, &dyn ComplexitySource)],
) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let (labels, columns) = measure_columns(strings, sources)?;
    Ok((labels, correlation_matrix(&columns)?))
}

/// Long-format matrix: `x,y,r`.
pub fn correlation_csv(labels: &[String], matrix: &[Vec<f64>]) -> String {
    let mut out = String::from("x,y,r\n");
    for (i, row) in matrix.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", labels[i], labels[j], r));
        }
    }
    out
}

pub fn exp1_csv(records: &[ResponseRecord], result: &Exp1Result) -> String {
    let mut out = String::from("string,k\n");
    for (r, k) in records.iter().zip(&result.k_values) {
        out.push_str(&format!("{},{}\n", r.string, k));
    }
    out
}

/// Observations plus the fitted curve, tagged by `band`.
pub fn exp2_csv(result: &Exp2Result) -> String {
    let mut out = String::from("x,y,band\n");
    for (k, &c) in result.k_values.iter().zip(&result.choices) {
        out.push_str(&format!("{},{},observed\n", k, u8::from(c)));
    }
    let lo = result
        .k_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = result
        .k_values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    const STEPS: usize = 100;
    for i in 0..=STEPS {
        let x = lo + (hi - lo) * i as f64 / STEPS as f64;
        out.push_str(&format!("{},{},fitted\n", x, result.fit.probability(x)));
    }
    out
}

pub fn span_csv(fits: &[SpanFit]) -> String {
    let mut out = String::from("x,y\n");
    for f in fits {
        out.push_str(&format!("{},{}\n", f.span, f.r_squared));
    }
    out
}
