//! Campaigns over the reduced machine space.
//!
//! Full mode walks every reduced index with a mixed-radix odometer; sample
//! mode draws machines uniformly with replacement. Both split the work into
//! fixed chunks whose results merge by addition, so the outcome does not
//! depend on how many worker threads run the chunks.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CtmError, Result};
use crate::pattern::render_symbols;
use crate::tm::{full_count, Op, Simulator, SpaceSpec, TransitionAction};

pub const DEFAULT_BUDGET: u64 = 10_000_000_000;
pub const DEFAULT_QUANTILE: f64 = 0.999_999;

/// Machines per full-mode chunk.
const FULL_CHUNK: u64 = 1 << 16;
/// Draws per sample-mode batch; each batch owns one generator stream.
const SAMPLE_BATCH: u64 = 1 << 14;

/// Recorded in dataset metadata.
pub const GENERATOR: &str = "chacha8-stream-per-16384-batch";

/// `m·(n-1)·(m·(2n+1))^(n·m-1)`: machines whose first transition moves right
/// into a state other than the initial one.
pub fn reduced_count(space: SpaceSpec) -> Result<BigUint> {
    if space.n_states() < 2 {
        return Err(CtmError::NotReducible(space.n_states()));
    }
    Ok(full_count(space) / space.action_count() * space.restricted_action_count())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Full,
    Sample { count: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub space: SpaceSpec,
    pub mode: Mode,
    pub cutoff: u64,
    /// Largest reduced space that full mode may enumerate.
    pub budget: u64,
}

impl CampaignConfig {
    pub fn full(space: SpaceSpec, cutoff: u64) -> Self {
        CampaignConfig {
            space,
            mode: Mode::Full,
            cutoff,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn sample(space: SpaceSpec, count: u64, seed: u64, cutoff: u64) -> Self {
        CampaignConfig {
            space,
            mode: Mode::Sample { count, seed },
            cutoff,
            budget: DEFAULT_BUDGET,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(CtmError::InvalidArgument(
                "cutoff must be at least 1".into(),
            ));
        }
        let reduced = reduced_count(self.space)?;
        if self.mode == Mode::Full {
            enumerable(&reduced, self.budget)?;
        }
        Ok(())
    }
}

fn enumerable(count: &BigUint, budget: u64) -> Result<u64> {
    match count.to_u64() {
        Some(c) if c <= budget => Ok(c),
        _ => Err(CtmError::BudgetExceeded {
            count: count.to_string(),
            budget,
        }),
    }
}

/// How `calibrate_cutoff` chooses its probe machines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    /// Every machine of the reduced space (subject to [`DEFAULT_BUDGET`]).
    Exhaustive,
    Sample {
        size: u64,
        seed: u64,
    },
}

/// Halting-time histogram of a probe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuntimeHistogram {
    /// step count -> machines halting at exactly that step
    pub bins: BTreeMap<u64, u64>,
    pub probed: u64,
    pub probe_cutoff: u64,
}

impl RuntimeHistogram {
    pub fn halters(&self) -> u64 {
        self.bins.values().sum()
    }

    /// `(steps, fraction of halters with halting time <= steps)`.
    pub fn cumulative(&self) -> Vec<(u64, f64)> {
        let total = self.halters() as f64;
        let mut acc = 0u64;
        self.bins
            .iter()
            .map(|(&s, &c)| {
                acc += c;
                (s, acc as f64 / total)
            })
            .collect()
    }

    /// Smallest step count whose cumulative halting fraction reaches
    /// `quantile`.
    pub fn cutoff_at(&self, quantile: f64) -> Option<u64> {
        let total = self.halters();
        if total == 0 {
            return None;
        }
        let mut acc = 0u64;
        for (&steps, &c) in &self.bins {
            acc += c;
            if acc as f64 / total as f64 >= quantile {
                return Some(steps);
            }
        }
        self.bins.keys().next_back().copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# acss-runtime v1\n");
        let _ = writeln!(out, "# probed: {}", self.probed);
        let _ = writeln!(out, "# probe_cutoff: {}", self.probe_cutoff);
        out.push_str("steps,machines,cumulative\n");
        for ((steps, count), (_, cum)) in self.bins.iter().zip(self.cumulative()) {
            let _ = writeln!(out, "{steps},{count},{cum:.12}");
        }
        out
    }
}

/// Output strings of the halting machines of one campaign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawCounts {
    pub space: SpaceSpec,
    pub cutoff: u64,
    pub mode: Mode,
    /// output (symbols, leftmost first) -> machines producing it
    pub counts: HashMap<Vec<u8>, u64>,
    pub machines_run: u64,
    pub machines_halted: u64,
}

impl RawCounts {
    pub fn new(space: SpaceSpec, cutoff: u64, mode: Mode) -> Self {
        RawCounts {
            space,
            cutoff,
            mode,
            counts: HashMap::new(),
            machines_run: 0,
            machines_halted: 0,
        }
    }

    /// Records `machines` halting machines that produced `output`.
    pub fn record(&mut self, output: &[u8], machines: u64) {
        bump(&mut self.counts, output, machines);
        self.machines_run += machines;
        self.machines_halted += machines;
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# acss-raw v1\n");
        let _ = writeln!(
            out,
            "# space: n={},m={}",
            self.space.n_states(),
            self.space.n_symbols()
        );
        let _ = writeln!(out, "# cutoff: {}", self.cutoff);
        match self.mode {
            Mode::Full => out.push_str("# mode: full\n# seed: n/a\n"),
            Mode::Sample { seed, .. } => {
                let _ = write!(out, "# mode: sample\n# seed: {seed}\n");
            }
        }
        let _ = writeln!(out, "# generator: {GENERATOR}");
        let _ = writeln!(out, "# machines_run: {}", self.machines_run);
        let _ = writeln!(out, "# machines_halted: {}", self.machines_halted);
        let mut rows: Vec<(String, u64)> = self
            .counts
            .iter()
            .map(|(k, &v)| (render_symbols(k), v))
            .collect();
        rows.sort();
        for (s, c) in rows {
            let _ = writeln!(out, "{s},{c}");
        }
        out
    }
}

fn bump(map: &mut HashMap<Vec<u8>, u64>, key: &[u8], by: u64) {
    if let Some(c) = map.get_mut(key) {
        *c += by;
    } else {
        map.insert(key.to_vec(), by);
    }
}

/// Precompiled ops for every digit value of every entry.
struct DigitOps {
    radices: Vec<u64>,
    ops: Vec<Vec<Op>>,
}

impl DigitOps {
    fn reduced(space: SpaceSpec) -> Self {
        let ops: Vec<Vec<Op>> = (0..space.entry_count())
            .map(|entry| {
                if entry == 0 {
                    (0..space.restricted_action_count())
                        .map(|d| TransitionAction::from_restricted_digit(space, d).unwrap())
                        .map(Op::from_action)
                        .collect()
                } else {
                    (0..space.action_count())
                        .map(|d| TransitionAction::from_digit(space, d).unwrap())
                        .map(Op::from_action)
                        .collect()
                }
            })
            .collect();
        DigitOps {
            radices: ops.iter().map(|o| o.len() as u64).collect(),
            ops,
        }
    }

    /// Calls `f` on every machine with reduced index in `start..end`.
    fn for_each_in_range(&self, start: u64, end: u64, mut f: impl FnMut(&[Op])) {
        let mut digits = Vec::with_capacity(self.radices.len());
        let mut rest = start;
        for &r in &self.radices {
            digits.push(rest % r);
            rest /= r;
        }
        let mut table: Vec<Op> = digits
            .iter()
            .enumerate()
            .map(|(e, &d)| self.ops[e][d as usize])
            .collect();
        for _ in start..end {
            f(&table);
            for e in 0..digits.len() {
                digits[e] += 1;
                if digits[e] == self.radices[e] {
                    digits[e] = 0;
                    table[e] = self.ops[e][0];
                } else {
                    table[e] = self.ops[e][digits[e] as usize];
                    break;
                }
            }
        }
    }

    /// Calls `f` on `draws` machines drawn uniformly from the reduced space
    /// using stream `batch` of the generator seeded with `seed`.
    fn for_each_sampled(&self, seed: u64, batch: u64, draws: u64, mut f: impl FnMut(&[Op])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);
        let mut table: Vec<Op> = self.ops.iter().map(|o| o[0]).collect();
        for _ in 0..draws {
            for (e, slot) in table.iter_mut().enumerate() {
                *slot = self.ops[e][rng.gen_range(0..self.radices[e]) as usize];
            }
            f(&table);
        }
    }
}

/// A unit of work: an index range (full) or one sampling batch.
#[derive(Clone, Copy)]
enum Chunk {
    Range(u64, u64),
    Batch { seed: u64, batch: u64, draws: u64 },
}

fn chunks_for(space: SpaceSpec, mode: Mode, budget: u64) -> Result<Vec<Chunk>> {
    Ok(match mode {
        Mode::Full => {
            let total = enumerable(&reduced_count(space)?, budget)?;
            (0..total.div_ceil(FULL_CHUNK))
                .map(|c| Chunk::Range(c * FULL_CHUNK, ((c + 1) * FULL_CHUNK).min(total)))
                .collect()
        }
        Mode::Sample { count, seed } => (0..count.div_ceil(SAMPLE_BATCH))
            .map(|b| Chunk::Batch {
                seed,
                batch: b,
                draws: SAMPLE_BATCH.min(count - b * SAMPLE_BATCH),
            })
            .collect(),
    })
}

fn visit(digits: &DigitOps, chunk: Chunk, f: impl FnMut(&[Op])) {
    match chunk {
        Chunk::Range(a, b) => digits.for_each_in_range(a, b, f),
        Chunk::Batch { seed, batch, draws } => digits.for_each_sampled(seed, batch, draws, f),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(CtmError::InvalidArgument(
            "workers must be at least 1".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CtmError::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Probes the reduced space at `probe_cutoff` and returns the smallest
/// step count reached by at least `quantile` of the probe's halters.
pub fn calibrate_cutoff(
    space: SpaceSpec,
    probe: Probe,
    probe_cutoff: u64,
    quantile: f64,
    workers: usize,
) -> Result<(u64, RuntimeHistogram)> {
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(CtmError::InvalidArgument(format!(
            "quantile {quantile} outside (0, 1]"
        )));
    }
    if probe_cutoff == 0 {
        return Err(CtmError::InvalidArgument(
            "probe cutoff must be at least 1".into(),
        ));
    }
    let mode = match probe {
        Probe::Exhaustive => Mode::Full,
        Probe::Sample { size, seed } => {
            if size == 0 {
                return Err(CtmError::InvalidArgument(
                    "probe size must be at least 1".into(),
                ));
            }
            Mode::Sample { count: size, seed }
        }
    };
    let digits = DigitOps::reduced(space);
    let chunks = chunks_for(space, mode, DEFAULT_BUDGET)?;
    let m = space.n_symbols() as usize;

    let (bins, probed) = pool(workers)?.install(|| {
        chunks
            .par_iter()
            .fold(
                || (Simulator::new(), BTreeMap::<u64, u64>::new(), 0u64),
                |(mut sim, mut bins, mut probed), &chunk| {
                    visit(&digits, chunk, |ops| {
                        probed += 1;
                        if let Some(steps) = sim.execute(ops, m, probe_cutoff) {
                            *bins.entry(steps).or_default() += 1;
                        }
                    });
                    (sim, bins, probed)
                },
            )
            .map(|(_, bins, probed)| (bins, probed))
            .reduce(
                || (BTreeMap::new(), 0),
                |(mut a, pa), (b, pb)| {
                    for (k, v) in b {
                        *a.entry(k).or_default() += v;
                    }
                    (a, pa + pb)
                },
            )
    });

    let histogram = RuntimeHistogram {
        bins,
        probed,
        probe_cutoff,
    };
    let cutoff = histogram.cutoff_at(quantile).ok_or(CtmError::NoHalters {
        probed,
        probe_cutoff,
    })?;
    Ok((cutoff, histogram))
}

pub fn run_campaign(config: &CampaignConfig, workers: usize) -> Result<RawCounts> {
    run_campaign_with_progress(config, workers, &|_, _| {})
}

/// As [`run_campaign`], calling `progress(done, total)` after each chunk.
pub fn run_campaign_with_progress(
    config: &CampaignConfig,
    workers: usize,
    progress: &(dyn Fn(u64, u64) + Sync),
) -> Result<RawCounts> {
    config.validate()?;
    let space = config.space;
    let cutoff = config.cutoff;
    let digits = DigitOps::reduced(space);
    let chunks = chunks_for(space, config.mode, config.budget)?;
    let total_chunks = chunks.len() as u64;
    let done = AtomicU64::new(0);
    let m = space.n_symbols() as usize;

    let (counts, run, halted) = pool(workers)?.install(|| {
        chunks
            .par_iter()
            .fold(
                || (Simulator::new(), HashMap::<Vec<u8>, u64>::new(), 0u64, 0u64),
                |(mut sim, mut counts, mut run, mut halted), &chunk| {
                    visit(&digits, chunk, |ops| {
                        run += 1;
                        if sim.execute(ops, m, cutoff).is_some() {
                            halted += 1;
                            bump(&mut counts, sim.output(), 1);
                        }
                    });
                    progress(done.fetch_add(1, Ordering::Relaxed) + 1, total_chunks);
                    (sim, counts, run, halted)
                },
            )
            .map(|(_, counts, run, halted)| (counts, run, halted))
            .reduce(
                || (HashMap::new(), 0, 0),
                |(a, ra, ha), (b, rb, hb)| {
                    if a.len() < b.len() {
                        return merge_into(b, a, rb + ra, hb + ha);
                    }
                    merge_into(a, b, ra + rb, ha + hb)
                },
            )
    });

    Ok(RawCounts {
        space,
        cutoff,
        mode: config.mode,
        counts,
        machines_run: run,
        machines_halted: halted,
    })
}

fn merge_into(
    mut into: HashMap<Vec<u8>, u64>,
    from: HashMap<Vec<u8>, u64>,
    run: u64,
    halted: u64,
) -> (HashMap<Vec<u8>, u64>, u64, u64) {
    for (k, v) in from {
        *into.entry(k).or_default() += v;
    }
    (into, run, halted)
}
