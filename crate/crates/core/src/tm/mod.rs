//! Single-tape Turing machines with an ordered alphabet and a polynomial
//! time bound, and a direct executor used as ground truth.
//!
//! The tape has `p(n) + 1` cells. The input occupies cells `1..=n`, cell 0 and
//! the cells after the input hold the blank (the first alphabet symbol), and
//! the head starts on cell 0 in the start state. A machine halts when its
//! transition relation has no entry for the current state and symbol; it
//! accepts iff it halts in an accepting state.

mod parse;
pub mod samples;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::object::{is_plain_name, Verdict};

pub use parse::{parse_tm, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Left,
    Right,
}

impl Move {
    pub fn offset(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Right => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Right => 'R',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub next: StateId,
    pub write: SymId,
    pub moves: Move,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmSpec {
    pub states: Vec<String>,
    /// Ordered alphabet; the first symbol is the blank.
    pub alphabet: Vec<String>,
    pub start: StateId,
    pub accept: BTreeSet<StateId>,
    pub delta: BTreeMap<(StateId, SymId), Vec<Transition>>,
    /// Coefficients `c_d, ..., c_0` of the time bound `p(n) = Σ c_t n^t`.
    pub poly: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TmDiagnostic {
    NoStates,
    EmptyAlphabet,
    BadName(String),
    DuplicateName(String),
    /// The same name is used for a state and a symbol.
    NameClash(String),
    UndeclaredState(usize),
    UndeclaredSymbol(usize),
    DuplicateTransition { state: String, symbol: String },
    /// No non-constant positive coefficient, so `p(n) >= n` fails eventually.
    PolyNotAtLeastLinear,
    PolyBelowInput { n: usize, p: u64 },
    PolyOverflow { n: usize },
}

impl fmt::Display for TmDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TmDiagnostic::NoStates => f.write_str("no states declared"),
            TmDiagnostic::EmptyAlphabet => f.write_str("empty alphabet (the first symbol is the blank)"),
            TmDiagnostic::BadName(n) => write!(f, "`{n}` is not a usable name"),
            TmDiagnostic::DuplicateName(n) => write!(f, "`{n}` is declared twice"),
            TmDiagnostic::NameClash(n) => write!(f, "`{n}` names both a state and a symbol"),
            TmDiagnostic::UndeclaredState(i) => write!(f, "transition references undeclared state #{i}"),
            TmDiagnostic::UndeclaredSymbol(i) => write!(f, "transition references undeclared symbol #{i}"),
            TmDiagnostic::DuplicateTransition { state, symbol } => {
                write!(f, "transition on ({state}, {symbol}) listed twice")
            }
            TmDiagnostic::PolyNotAtLeastLinear => {
                f.write_str("p(n) < n for large n: no positive coefficient of degree >= 1")
            }
            TmDiagnostic::PolyBelowInput { n, p } => write!(f, "p(n) < n: p({n}) = {p}"),
            TmDiagnostic::PolyOverflow { n } => write!(f, "p({n}) overflows"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TmError {
    #[error("invalid machine: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<TmDiagnostic>),
    #[error("head out of bounds at step {step}: cell {head} moving {moves:?} on a tape of {cells} cells")]
    HeadOutOfBounds {
        step: usize,
        head: usize,
        moves: Move,
        cells: usize,
    },
    #[error("time-bound violation: not halted within {bound} steps")]
    TimeBoundViolation { bound: usize },
    #[error("{options} transitions apply at step {step}; a choice is required")]
    ChoiceRequired { step: usize, options: usize },
    #[error("choice {choice} out of range ({options} transitions)")]
    BadChoice { choice: usize, options: usize },
    #[error("input position {pos} holds the blank, which is reserved for padding")]
    BlankInInput { pos: usize },
    #[error("unknown input symbol `{0}`")]
    UnknownSymbol(String),
    #[error("more than {0} computation branches")]
    BranchLimit(usize),
}

/// Cap on branches enumerated for nondeterministic machines.
pub const BRANCH_LIMIT: usize = 1 << 20;

impl TmSpec {
    pub fn blank(&self) -> SymId {
        SymId(0)
    }

    /// Alphabet size `m`.
    pub fn m(&self) -> usize {
        self.alphabet.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.0]
    }

    pub fn symbol_name(&self, a: SymId) -> &str {
        &self.alphabet[a.0]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(StateId)
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymId> {
        self.alphabet.iter().position(|s| s == name).map(SymId)
    }

    pub fn transitions(&self, q: StateId, a: SymId) -> &[Transition] {
        self.delta.get(&(q, a)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_deterministic(&self) -> bool {
        self.delta.values().all(|t| t.len() <= 1)
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accept.contains(&q)
    }

    /// `p(n)`, or `None` on overflow.
    pub fn time_bound(&self, n: usize) -> Option<u64> {
        let n = n as u64;
        self.poly
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_mul(n)?.checked_add(c))
    }

    /// `p(n)` checked against the input length.
    pub fn tape_bound(&self, n: usize) -> Result<usize, TmError> {
        let p = self
            .time_bound(n)
            .ok_or(TmError::Invalid(vec![TmDiagnostic::PolyOverflow { n }]))?;
        if p < n as u64 {
            return Err(TmError::Invalid(vec![TmDiagnostic::PolyBelowInput { n, p }]));
        }
        usize::try_from(p).map_err(|_| TmError::Invalid(vec![TmDiagnostic::PolyOverflow { n }]))
    }

    /// Reads an input word: whitespace-separated symbol names, or one
    /// character per symbol when the word has no whitespace.
    pub fn parse_input(&self, text: &str) -> Result<Vec<SymId>, TmError> {
        let text = text.trim();
        let tokens: Vec<String> = if text.contains(char::is_whitespace) {
            text.split_whitespace().map(str::to_owned).collect()
        } else {
            text.chars().map(String::from).collect()
        };
        tokens
            .iter()
            .map(|t| self.symbol_id(t).ok_or_else(|| TmError::UnknownSymbol(t.clone())))
            .collect()
    }

    pub fn format_input(&self, input: &[SymId]) -> String {
        let single = input.iter().all(|a| self.symbol_name(*a).chars().count() == 1);
        let names: Vec<&str> = input.iter().map(|a| self.symbol_name(*a)).collect();
        names.join(if single { "" } else { " " })
    }

    /// The configuration at step 0 for `input` on a tape of `p + 1` cells.
    pub fn initial_config(&self, input: &[SymId], p: usize) -> Result<TmConfig, TmError> {
        if let Some(pos) = input.iter().position(|&a| a == self.blank()) {
            return Err(TmError::BlankInInput { pos: pos + 1 });
        }
        let mut tape = vec![self.blank(); p + 1];
        tape[1..=input.len()].copy_from_slice(input);
        Ok(TmConfig {
            tape,
            head: 0,
            state: self.start,
            step: 0,
        })
    }
}

impl fmt::Display for TmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.states.join(" "))?;
        writeln!(f, "alphabet: {}", self.alphabet.join(" "))?;
        writeln!(f, "start: {}", self.state_name(self.start))?;
        let accept: Vec<&str> = self.accept.iter().map(|q| self.state_name(*q)).collect();
        writeln!(f, "accept: {}", accept.join(" "))?;
        let poly: Vec<String> = self.poly.iter().map(u64::to_string).collect();
        writeln!(f, "poly: {}", poly.join(" "))?;
        for (&(q, a), ts) in &self.delta {
            for t in ts {
                writeln!(
                    f,
                    "delta: {} {} -> {} {} {}",
                    self.state_name(q),
                    self.symbol_name(a),
                    self.state_name(t.next),
                    self.symbol_name(t.write),
                    t.moves.letter()
                )?;
            }
        }
        Ok(())
    }
}

/// Static checks on a machine.
pub fn validate_tm(tm: &TmSpec) -> Vec<TmDiagnostic> {
    let mut diags = Vec::new();
    if tm.states.is_empty() {
        diags.push(TmDiagnostic::NoStates);
    }
    if tm.alphabet.is_empty() {
        diags.push(TmDiagnostic::EmptyAlphabet);
    }
    let mut states = HashSet::new();
    for name in &tm.states {
        if !is_plain_name(name) || name == "yes" || name == "no" || name == "T" {
            diags.push(TmDiagnostic::BadName(name.clone()));
        }
        if !states.insert(name.as_str()) {
            diags.push(TmDiagnostic::DuplicateName(name.clone()));
        }
    }
    let mut symbols = HashSet::new();
    for name in &tm.alphabet {
        if !is_plain_name(name) || name == "yes" || name == "no" || name == "T" {
            diags.push(TmDiagnostic::BadName(name.clone()));
        }
        if !symbols.insert(name.as_str()) {
            diags.push(TmDiagnostic::DuplicateName(name.clone()));
        }
        if states.contains(name.as_str()) {
            diags.push(TmDiagnostic::NameClash(name.clone()));
        }
    }
    let check_state = |q: StateId, diags: &mut Vec<TmDiagnostic>| {
        if q.0 >= tm.states.len() {
            diags.push(TmDiagnostic::UndeclaredState(q.0));
        }
    };
    check_state(tm.start, &mut diags);
    for &q in &tm.accept {
        check_state(q, &mut diags);
    }
    for (&(q, a), ts) in &tm.delta {
        check_state(q, &mut diags);
        if a.0 >= tm.alphabet.len() {
            diags.push(TmDiagnostic::UndeclaredSymbol(a.0));
        }
        let mut seen = HashSet::new();
        for t in ts {
            check_state(t.next, &mut diags);
            if t.write.0 >= tm.alphabet.len() {
                diags.push(TmDiagnostic::UndeclaredSymbol(t.write.0));
            }
            if !seen.insert(*t) && q.0 < tm.states.len() && a.0 < tm.alphabet.len() {
                diags.push(TmDiagnostic::DuplicateTransition {
                    state: tm.state_name(q).to_owned(),
                    symbol: tm.symbol_name(a).to_owned(),
                });
            }
        }
    }
    let degree = tm.poly.len().saturating_sub(1);
    let linear_or_more = tm
        .poly
        .iter()
        .enumerate()
        .any(|(idx, &c)| c > 0 && degree - idx >= 1);
    if !linear_or_more {
        diags.push(TmDiagnostic::PolyNotAtLeastLinear);
    }
    diags
}

/// [`validate_tm`] plus the check `p(n) >= n` for a concrete input length.
pub fn validate_tm_for(tm: &TmSpec, n: usize) -> Vec<TmDiagnostic> {
    let mut diags = validate_tm(tm);
    match tm.time_bound(n) {
        None => diags.push(TmDiagnostic::PolyOverflow { n }),
        Some(p) if p < n as u64 => diags.push(TmDiagnostic::PolyBelowInput { n, p }),
        Some(_) => {}
    }
    diags
}

/// A machine configuration on the fixed tape of `p(n) + 1` cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TmConfig {
    pub tape: Vec<SymId>,
    pub head: usize,
    pub state: StateId,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TmStep {
    Next(TmConfig),
    Halted,
}

/// One step of the machine. `choice` selects among several applicable
/// transitions and is required exactly when there are more than one.
pub fn tm_step(tm: &TmSpec, cfg: &TmConfig, choice: Option<usize>) -> Result<TmStep, TmError> {
    let options = tm.transitions(cfg.state, cfg.tape[cfg.head]);
    let t = match (options.len(), choice) {
        (0, _) => return Ok(TmStep::Halted),
        (1, None) => options[0],
        (n, None) => {
            return Err(TmError::ChoiceRequired {
                step: cfg.step,
                options: n,
            })
        }
        (n, Some(c)) if c < n => options[c],
        (n, Some(c)) => return Err(TmError::BadChoice { choice: c, options: n }),
    };
    let target = cfg.head as i64 + t.moves.offset();
    if target < 0 || target as usize >= cfg.tape.len() {
        return Err(TmError::HeadOutOfBounds {
            step: cfg.step,
            head: cfg.head,
            moves: t.moves,
            cells: cfg.tape.len(),
        });
    }
    let mut next = cfg.clone();
    next.tape[cfg.head] = t.write;
    next.head = target as usize;
    next.state = t.next;
    next.step += 1;
    Ok(TmStep::Next(next))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmRun {
    /// Existential acceptance for nondeterministic machines.
    pub verdict: Verdict,
    /// Every configuration of the run, ending in the halting one. For
    /// nondeterministic machines this is the first accepting branch, or the
    /// first branch when none accepts.
    pub trace: Vec<TmConfig>,
    /// Number of complete choice sequences.
    pub branches: usize,
    pub accepting_branches: usize,
}

impl TmRun {
    pub fn halting_step(&self) -> usize {
        self.trace.last().map_or(0, |c| c.step)
    }
}

/// Runs `tm` on `input` with a tape of `p(n) + 1` cells. Fails if any branch
/// moves the head off the tape or takes more than `max_steps` steps.
pub fn tm_run(tm: &TmSpec, input: &[SymId], max_steps: usize) -> Result<TmRun, TmError> {
    let diags = validate_tm_for(tm, input.len())
        .into_iter()
        .filter(|d| !matches!(d, TmDiagnostic::PolyNotAtLeastLinear))
        .collect::<Vec<_>>();
    if !diags.is_empty() {
        return Err(TmError::Invalid(diags));
    }
    let p = tm.tape_bound(input.len())?;
    let start = tm.initial_config(input, p)?;

    let mut first: Option<Vec<TmConfig>> = None;
    let mut witness: Option<Vec<TmConfig>> = None;
    let mut branches = 0;
    let mut accepting = 0;
    // Depth-first over choice sequences; the path is the current trace.
    let mut path = vec![start];
    let mut pending: Vec<Vec<usize>> = Vec::new();
    loop {
        let cfg = path.last().expect("non-empty path");
        let options = tm.transitions(cfg.state, cfg.tape[cfg.head]).len();
        if options == 0 {
            branches += 1;
            if branches > BRANCH_LIMIT {
                return Err(TmError::BranchLimit(BRANCH_LIMIT));
            }
            if tm.is_accepting(cfg.state) {
                accepting += 1;
                if witness.is_none() {
                    witness = Some(path.clone());
                }
            }
            if first.is_none() {
                first = Some(path.clone());
            }
            // Backtrack to the deepest configuration with untried choices.
            loop {
                match pending.last_mut() {
                    None => {
                        let verdict = Verdict::from_accepting(accepting > 0);
                        return Ok(TmRun {
                            verdict,
                            trace: witness.or(first).expect("one branch"),
                            branches,
                            accepting_branches: accepting,
                        });
                    }
                    Some(rest) if rest.is_empty() => {
                        pending.pop();
                        path.pop();
                    }
                    Some(rest) => {
                        let choice = rest.pop().expect("non-empty");
                        path.pop();
                        let parent = path.last().expect("parent");
                        let TmStep::Next(next) = tm_step(tm, parent, Some(choice))? else {
                            unreachable!("parent has transitions")
                        };
                        path.push(next);
                        break;
                    }
                }
            }
            continue;
        }
        if cfg.step >= max_steps {
            return Err(TmError::TimeBoundViolation { bound: max_steps });
        }
        let choice = if options > 1 { Some(0) } else { None };
        let next = match tm_step(tm, cfg, choice)? {
            TmStep::Next(next) => next,
            TmStep::Halted => unreachable!("options > 0"),
        };
        pending.push((1..options).rev().collect());
        path.push(next);
    }
}
