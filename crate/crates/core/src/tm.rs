//! Busy Beaver machines over `n` states and `m` symbols.
//!
//! Each of the `n·m` table entries chooses one of `m·(2n+1)` actions: a
//! halting write (`m` choices) or a write-move-switch step (`2·n·m` choices).
//! Actions are numbered in a fixed canonical order, which turns a table into
//! a mixed-radix integer ([`MachineIndex`]). Entry `(state 1, symbol 0)` is
//! the least significant digit.
//!
//! In the *reduced* flavor the initial entry only ranges over the rightward
//! steps into a non-initial state, so its digit has radix `m·(n-1)`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{CtmError, Result};

/// An `(n, m)` machine space: `n` states, `m` symbols (blank is `0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceSpec {
    n_states: u32,
    n_symbols: u32,
}

impl SpaceSpec {
    pub fn new(n_states: u32, n_symbols: u32) -> Result<Self> {
        // 250 keeps state numbers inside the simulator's u8 encoding.
        if n_states == 0 || n_states > 250 || !(2..=9).contains(&n_symbols) {
            return Err(CtmError::InvalidSpace {
                n_states,
                n_symbols,
            });
        }
        Ok(SpaceSpec {
            n_states,
            n_symbols,
        })
    }

    pub fn n_states(&self) -> u32 {
        self.n_states
    }

    pub fn n_symbols(&self) -> u32 {
        self.n_symbols
    }

    /// Number of table entries, `n·m`.
    pub fn entry_count(&self) -> usize {
        (self.n_states * self.n_symbols) as usize
    }

    /// Number of distinct actions per entry, `m·(2n+1)`.
    pub fn action_count(&self) -> u32 {
        self.n_symbols * (2 * self.n_states + 1)
    }

    /// Number of actions allowed at the initial entry of the reduced space.
    pub fn restricted_action_count(&self) -> u32 {
        self.n_symbols * (self.n_states - 1)
    }

    /// Radix of digit `entry` in the selected flavor.
    pub(crate) fn radix(&self, entry: usize, reduced: bool) -> u32 {
        if reduced && entry == 0 {
            self.restricted_action_count()
        } else {
            self.action_count()
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n_states, self.n_symbols)
    }
}

/// `(m·(2n+1))^(n·m)`, the size of the unrestricted space.
pub fn full_count(space: SpaceSpec) -> BigUint {
    BigUint::from(space.action_count()).pow(space.entry_count() as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

/// One table entry. States are numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransitionAction {
    /// Write and stop without moving.
    Halt {
        write: u8,
    },
    Step {
        write: u8,
        dir: Direction,
        next: u8,
    },
}

impl TransitionAction {
    /// Action number `digit` in canonical order: halting writes ascending,
    /// then steps ordered by `(write, dir, next)` with `Left < Right`.
    pub fn from_digit(space: SpaceSpec, digit: u32) -> Option<Self> {
        let m = space.n_symbols;
        let n = space.n_states;
        if digit >= space.action_count() {
            return None;
        }
        if digit < m {
            return Some(TransitionAction::Halt { write: digit as u8 });
        }
        let e = digit - m;
        let write = e / (2 * n);
        let rem = e % (2 * n);
        let dir = if rem < n {
            Direction::Left
        } else {
            Direction::Right
        };
        Some(TransitionAction::Step {
            write: write as u8,
            dir,
            next: (rem % n + 1) as u8,
        })
    }

    pub fn to_digit(&self, space: SpaceSpec) -> u32 {
        let m = space.n_symbols;
        let n = space.n_states;
        match *self {
            TransitionAction::Halt { write } => write as u32,
            TransitionAction::Step { write, dir, next } => {
                let d = match dir {
                    Direction::Left => 0,
                    Direction::Right => 1,
                };
                m + write as u32 * 2 * n + d * n + (next as u32 - 1)
            }
        }
    }

    /// Action number `digit` among the restricted initial actions
    /// `Step { write, Right, next >= 2 }`, ordered by `(write, next)`.
    pub fn from_restricted_digit(space: SpaceSpec, digit: u32) -> Option<Self> {
        let k = space.n_states - 1;
        if k == 0 || digit >= space.restricted_action_count() {
            return None;
        }
        Some(TransitionAction::Step {
            write: (digit / k) as u8,
            dir: Direction::Right,
            next: (digit % k + 2) as u8,
        })
    }

    pub fn to_restricted_digit(&self, space: SpaceSpec) -> Option<u32> {
        match *self {
            TransitionAction::Step {
                write,
                dir: Direction::Right,
                next,
            } if next >= 2 => Some(write as u32 * (space.n_states - 1) + (next as u32 - 2)),
            _ => None,
        }
    }

    fn is_valid(&self, space: SpaceSpec) -> bool {
        match *self {
            TransitionAction::Halt { write } => (write as u32) < space.n_symbols,
            TransitionAction::Step { write, next, .. } => {
                (write as u32) < space.n_symbols && next >= 1 && (next as u32) <= space.n_states
            }
        }
    }

    fn mirrored(self) -> Self {
        match self {
            TransitionAction::Step { write, dir, next } => TransitionAction::Step {
                write,
                dir: dir.flipped(),
                next,
            },
            halt => halt,
        }
    }
}

/// A complete transition table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransitionTable {
    space: SpaceSpec,
    entries: Vec<TransitionAction>,
}

impl TransitionTable {
    /// `entries[(state - 1) * m + symbol]`; all `n·m` entries must be present
    /// and within bounds.
    pub fn new(space: SpaceSpec, entries: Vec<TransitionAction>) -> Result<Self> {
        if entries.len() != space.entry_count() {
            return Err(CtmError::InvalidArgument(format!(
                "expected {} table entries, got {}",
                space.entry_count(),
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|a| !a.is_valid(space)) {
            return Err(CtmError::InvalidArgument(format!(
                "action {bad:?} out of bounds for space {space}"
            )));
        }
        Ok(TransitionTable { space, entries })
    }

    /// A table whose every entry is `action`.
    pub fn uniform(space: SpaceSpec, action: TransitionAction) -> Result<Self> {
        Self::new(space, vec![action; space.entry_count()])
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn entries(&self) -> &[TransitionAction] {
        &self.entries
    }

    pub fn get(&self, state: u8, symbol: u8) -> TransitionAction {
        self.entries[self.slot(state, symbol)]
    }

    pub fn set(&mut self, state: u8, symbol: u8, action: TransitionAction) -> Result<()> {
        if !action.is_valid(self.space) {
            return Err(CtmError::InvalidArgument(format!(
                "action {action:?} out of bounds for space {}",
                self.space
            )));
        }
        let slot = self.slot(state, symbol);
        self.entries[slot] = action;
        Ok(())
    }

    fn slot(&self, state: u8, symbol: u8) -> usize {
        assert!(
            state >= 1 && (state as u32) <= self.space.n_states,
            "state {state} out of range"
        );
        assert!(
            (symbol as u32) < self.space.n_symbols,
            "symbol {symbol} out of range"
        );
        (state as usize - 1) * self.space.n_symbols as usize + symbol as usize
    }

    /// The same machine with every step direction flipped.
    pub fn mirrored(&self) -> Self {
        TransitionTable {
            space: self.space,
            entries: self.entries.iter().map(|a| a.mirrored()).collect(),
        }
    }

    pub(crate) fn compile(&self) -> Vec<Op> {
        self.entries.iter().map(|a| Op::from_action(*a)).collect()
    }
}

/// Position of a machine in the enumeration order of one space flavor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MachineIndex(pub BigUint);

impl From<u64> for MachineIndex {
    fn from(value: u64) -> Self {
        MachineIndex(BigUint::from(value))
    }
}

impl fmt::Display for MachineIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Number of machines in the selected flavor.
pub fn space_count(space: SpaceSpec, reduced: bool) -> Result<BigUint> {
    if reduced {
        crate::enumeration::reduced_count(space)
    } else {
        Ok(full_count(space))
    }
}

pub fn decode(index: &MachineIndex, space: SpaceSpec, reduced: bool) -> Result<TransitionTable> {
    let count = space_count(space, reduced)?;
    if index.0 >= count {
        return Err(CtmError::IndexOutOfRange {
            index: index.0.to_string(),
            count: count.to_string(),
        });
    }
    let mut rest = index.0.clone();
    let mut entries = Vec::with_capacity(space.entry_count());
    for entry in 0..space.entry_count() {
        let radix = space.radix(entry, reduced);
        let digit = (&rest % radix).to_u32().expect("digit below radix");
        rest /= radix;
        let action = if reduced && entry == 0 {
            TransitionAction::from_restricted_digit(space, digit)
        } else {
            TransitionAction::from_digit(space, digit)
        }
        .expect("digit below radix");
        entries.push(action);
    }
    debug_assert!(rest.is_zero());
    Ok(TransitionTable { space, entries })
}

pub fn encode(table: &TransitionTable, reduced: bool) -> Result<MachineIndex> {
    let space = table.space;
    let mut value = BigUint::zero();
    let mut scale = BigUint::one();
    for (entry, action) in table.entries.iter().enumerate() {
        let digit = if reduced && entry == 0 {
            action.to_restricted_digit(space).ok_or_else(|| {
                CtmError::NotInReducedSpace(format!(
                    "initial entry {action:?} is not a rightward step into a non-initial state"
                ))
            })?
        } else {
            action.to_digit(space)
        };
        value += &scale * digit;
        scale *= space.radix(entry, reduced);
    }
    Ok(MachineIndex(value))
}

/// Result of running a machine on a blank tape.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RunOutcome {
    /// `output` is the visited tape region, leftmost cell first.
    Halted {
        output: Vec<u8>,
        steps: u64,
    },
    TimedOut,
}

/// Runs `machine` from state 1 on a blank two-way tape. Every transition,
/// the final halting write included, is one step; machines that have not
/// halted after `cutoff` steps time out.
pub fn run(machine: &TransitionTable, cutoff: u64) -> RunOutcome {
    Simulator::new().run(machine, cutoff)
}

pub(crate) const HALT: u8 = u8::MAX;

/// Compiled table entry used by the simulator loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Op {
    pub write: u8,
    /// Zero-based next state, or [`HALT`].
    pub next: u8,
    pub right: bool,
}

impl Op {
    pub(crate) fn from_action(action: TransitionAction) -> Self {
        match action {
            TransitionAction::Halt { write } => Op {
                write,
                next: HALT,
                right: false,
            },
            TransitionAction::Step { write, dir, next } => Op {
                write,
                next: next - 1,
                right: dir == Direction::Right,
            },
        }
    }
}

/// Reusable simulator. The tape buffer survives between runs so campaigns
/// don't allocate per machine.
#[derive(Debug, Default)]
pub struct Simulator {
    tape: Vec<u8>,
    lo: usize,
    hi: usize,
}

impl Simulator {
    pub fn new() -> Self {
        Simulator {
            tape: vec![0; 64],
            lo: 0,
            hi: 0,
        }
    }

    pub fn run(&mut self, machine: &TransitionTable, cutoff: u64) -> RunOutcome {
        let ops = machine.compile();
        match self.execute(&ops, machine.space.n_symbols as usize, cutoff) {
            Some(steps) => RunOutcome::Halted {
                output: self.output().to_vec(),
                steps,
            },
            None => RunOutcome::TimedOut,
        }
    }

    /// Runs compiled `ops`; returns the step count on halt. The halting
    /// output stays readable through [`Simulator::output`] until the next run.
    pub(crate) fn execute(&mut self, ops: &[Op], n_symbols: usize, cutoff: u64) -> Option<u64> {
        self.tape[self.lo..=self.hi].fill(0);
        let mut pos = self.tape.len() / 2;
        self.lo = pos;
        self.hi = pos;
        let mut state = 0usize;
        let mut steps = 0u64;
        while steps < cutoff {
            let op = ops[state * n_symbols + self.tape[pos] as usize];
            steps += 1;
            self.tape[pos] = op.write;
            if op.next == HALT {
                return Some(steps);
            }
            if op.right {
                if pos + 1 == self.tape.len() {
                    let extra = self.tape.len();
                    self.tape.resize(self.tape.len() + extra, 0);
                }
                pos += 1;
                self.hi = self.hi.max(pos);
            } else {
                if pos == 0 {
                    let extra = self.tape.len();
                    self.tape.splice(0..0, std::iter::repeat_n(0, extra));
                    pos += extra;
                    self.lo += extra;
                    self.hi += extra;
                }
                pos -= 1;
                self.lo = self.lo.min(pos);
            }
            state = op.next as usize;
        }
        None
    }

    pub(crate) fn output(&self) -> &[u8] {
        &self.tape[self.lo..=self.hi]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: u32, m: u32) -> SpaceSpec {
        SpaceSpec::new(n, m).unwrap()
    }

    #[test]
    fn space_bounds() {
        assert!(SpaceSpec::new(0, 2).is_err());
        assert!(SpaceSpec::new(2, 1).is_err());
        assert!(SpaceSpec::new(2, 10).is_err());
        assert!(SpaceSpec::new(1, 9).is_ok());
    }

    #[test]
    fn full_counts() {
        assert_eq!(full_count(sp(1, 2)), BigUint::from(36u32));
        assert_eq!(full_count(sp(3, 2)), BigUint::from(7_529_536u64));
        assert_eq!(full_count(sp(5, 2)), BigUint::from(26_559_922_791_424u64));
        // (4,9) overflows 128 bits.
        assert!(full_count(sp(4, 9)).bits() > 128);
    }

    #[test]
    fn digit_order_is_canonical() {
        let s = sp(2, 2);
        let all: Vec<_> = (0..s.action_count())
            .map(|d| TransitionAction::from_digit(s, d).unwrap())
            .collect();
        assert_eq!(all[0], TransitionAction::Halt { write: 0 });
        assert_eq!(all[1], TransitionAction::Halt { write: 1 });
        assert_eq!(
            all[2],
            TransitionAction::Step {
                write: 0,
                dir: Direction::Left,
                next: 1
            }
        );
        assert_eq!(
            all[5],
            TransitionAction::Step {
                write: 0,
                dir: Direction::Right,
                next: 2
            }
        );
        assert_eq!(
            all[9],
            TransitionAction::Step {
                write: 1,
                dir: Direction::Right,
                next: 2
            }
        );
        for (d, a) in all.iter().enumerate() {
            assert_eq!(a.to_digit(s), d as u32);
        }
        assert!(TransitionAction::from_digit(s, 10).is_none());
    }

    #[test]
    fn decode_zero_is_all_first_action() {
        let t = decode(&MachineIndex::from(0), sp(2, 2), false).unwrap();
        assert!(t
            .entries()
            .iter()
            .all(|a| *a == TransitionAction::Halt { write: 0 }));
    }

    #[test]
    fn reduced_initial_entry() {
        let t = decode(&MachineIndex::from(0), sp(5, 2), true).unwrap();
        assert_eq!(
            t.get(1, 0),
            TransitionAction::Step {
                write: 0,
                dir: Direction::Right,
                next: 2
            }
        );
        let err = encode(
            &TransitionTable::uniform(sp(5, 2), TransitionAction::Halt { write: 0 }).unwrap(),
            true,
        );
        assert!(matches!(err, Err(CtmError::NotInReducedSpace(_))));
    }

    #[test]
    fn decode_rejects_out_of_range() {
        assert!(matches!(
            decode(&MachineIndex::from(10_000), sp(2, 2), false),
            Err(CtmError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            decode(&MachineIndex::from(2_000), sp(2, 2), true),
            Err(CtmError::IndexOutOfRange { .. })
        ));
        assert!(decode(&MachineIndex::from(1_999), sp(2, 2), true).is_ok());
    }

    #[test]
    fn bijection_on_small_spaces() {
        for (n, m, reduced) in [(2, 2, false), (2, 2, true), (1, 3, false)] {
            let s = sp(n, m);
            let count = space_count(s, reduced).unwrap().to_u64().unwrap();
            for i in 0..count {
                let t = decode(&MachineIndex::from(i), s, reduced).unwrap();
                assert_eq!(encode(&t, reduced).unwrap(), MachineIndex::from(i));
            }
        }
    }

    #[test]
    fn immediate_halter() {
        let s = sp(2, 2);
        let mut t = TransitionTable::uniform(
            s,
            TransitionAction::Step {
                write: 0,
                dir: Direction::Left,
                next: 2,
            },
        )
        .unwrap();
        t.set(1, 0, TransitionAction::Halt { write: 1 }).unwrap();
        assert_eq!(
            run(&t, 10),
            RunOutcome::Halted {
                output: vec![1],
                steps: 1
            }
        );
    }

    #[test]
    fn right_looper_in_initial_state_times_out() {
        let s = sp(2, 2);
        let mut t = TransitionTable::uniform(s, TransitionAction::Halt { write: 0 }).unwrap();
        t.set(
            1,
            0,
            TransitionAction::Step {
                write: 1,
                dir: Direction::Right,
                next: 1,
            },
        )
        .unwrap();
        assert_eq!(run(&t, 1), RunOutcome::TimedOut);
        assert_eq!(run(&t, 5000), RunOutcome::TimedOut);
    }

    #[test]
    fn cutoff_counts_the_halting_step() {
        // 1 --(0 -> 1, R, 2)--> 2 --(0 -> halt writing 1)-->
        let s = sp(2, 2);
        let mut t = TransitionTable::uniform(s, TransitionAction::Halt { write: 1 }).unwrap();
        t.set(
            1,
            0,
            TransitionAction::Step {
                write: 1,
                dir: Direction::Right,
                next: 2,
            },
        )
        .unwrap();
        assert_eq!(run(&t, 1), RunOutcome::TimedOut);
        assert_eq!(
            run(&t, 2),
            RunOutcome::Halted {
                output: vec![1, 1],
                steps: 2
            }
        );
    }

    #[test]
    fn tape_grows_in_both_directions() {
        // Walks left forever writing 1s.
        let s = sp(1, 2);
        let mut t = TransitionTable::uniform(s, TransitionAction::Halt { write: 0 }).unwrap();
        t.set(
            1,
            0,
            TransitionAction::Step {
                write: 1,
                dir: Direction::Left,
                next: 1,
            },
        )
        .unwrap();
        assert_eq!(run(&t, 300), RunOutcome::TimedOut);

        let mut sim = Simulator::new();
        let ops = t.compile();
        assert_eq!(sim.execute(&ops, 2, 500), None);
        assert!(sim.output().len() > 64);
        // A fresh run after growth starts from a clean tape.
        let mut halter = t.clone();
        halter
            .set(1, 0, TransitionAction::Halt { write: 0 })
            .unwrap();
        assert_eq!(
            sim.run(&halter, 10),
            RunOutcome::Halted {
                output: vec![0],
                steps: 1
            }
        );
    }
}
