//! Where every object of a cycle is expected to be, `τ` engine steps after
//! the cycle's boundary configuration.

/// Region kind relative to the current cycle `j` and an object's cell `i`:
/// `(i,j)`, `(i,j)'` or the skin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    Cell,
    Prime,
    Skin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatePhase {
    /// Counting without knowing the scanned symbol.
    Untagged(Place, usize),
    /// Carrying the scanned symbol (or, from `m+5` on, the chosen move).
    Tagged(Place, usize),
    /// Replaced by the verdict timer.
    Halted,
}

/// Timing of the compiled system for tape bound `p` and alphabet size `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub p: usize,
    pub m: usize,
}

impl Schedule {
    pub fn new(p: usize, m: usize) -> Self {
        Schedule { p, m }
    }

    /// `C = m + 6` engine steps per machine step.
    pub fn cycle_len(&self) -> usize {
        self.m + 6
    }

    /// Global step whose configuration encodes machine step `j`.
    pub fn boundary(&self, j: usize) -> usize {
        1 + j * self.cycle_len()
    }

    /// Global step at which the verdict object leaves the skin; also the
    /// length of every run.
    pub fn t_end(&self) -> usize {
        (self.p + 1) * self.cycle_len() + 4
    }

    /// Global step that turns a halting state object of cycle `j` into a timer.
    pub fn halt_step(&self, j: usize) -> usize {
        self.boundary(j) + self.m + 3
    }

    /// Initial countdown of a timer started in cycle `j`.
    pub fn timer_start(&self, j: usize) -> usize {
        (self.p - j) * self.cycle_len() + 4
    }

    /// Largest timer value ever produced (a halt in cycle 0).
    pub fn max_timer(&self) -> usize {
        self.timer_start(0)
    }

    /// Last global step in which a tape object is rewritten.
    pub fn last_tape_activity(&self) -> usize {
        self.boundary(self.p) + self.m + 1
    }

    /// Tape object of a cell holding a symbol with `φ = f`, `τ` steps into a
    /// cycle. `None` once the head's symbol has been erased (`τ = m + 5`).
    /// In the last cycle the objects stop in the skin at `m + 1`.
    pub fn tape(&self, tau: usize, f: usize, head: bool, last_cycle: bool) -> Option<(Place, usize)> {
        let m = self.m;
        debug_assert!(tau < self.cycle_len() && (1..=m).contains(&f));
        Some(match tau {
            t if t <= f => (Place::Cell, t),
            t if t <= m + 1 => (Place::Skin, t),
            _ if last_cycle => (Place::Skin, m + 1),
            t if t <= m + 3 => (Place::Prime, t),
            t if t == m + 4 && head => (Place::Skin, m + 4),
            t if t == m + 4 => (Place::Prime, m + 4),
            _ if head => return None,
            t => (Place::Skin, t),
        })
    }

    /// State object when the head scans a symbol with `φ = f`.
    pub fn state(&self, tau: usize, f: usize, halting: bool, last_cycle: bool) -> StatePhase {
        let m = self.m;
        debug_assert!(tau < self.cycle_len() && (1..=m).contains(&f));
        match tau {
            0 => StatePhase::Untagged(Place::Skin, 0),
            t if t <= f => StatePhase::Untagged(Place::Cell, t),
            t if t == f + 1 => StatePhase::Untagged(Place::Skin, t),
            t if t <= m + 2 => StatePhase::Tagged(Place::Skin, t),
            _ if halting => StatePhase::Halted,
            _ if last_cycle => StatePhase::Tagged(Place::Skin, m + 2),
            t if t == m + 3 => StatePhase::Tagged(Place::Prime, t),
            t => StatePhase::Tagged(Place::Skin, t),
        }
    }
}
