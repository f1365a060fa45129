//! Seeded random machines for the equivalence suites.
//!
//! Machines are rejection-sampled: a candidate is kept only if the direct
//! executor runs it on the drawn input within `p(n)` steps without leaving
//! the tape, which is exactly the promise the compiler relies on.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tm::{samples, tm_run, Move, StateId, SymId, TmRun, TmSpec, Transition};

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub max_states: usize,
    /// Symbols to draw from, blank first; a machine uses a non-empty prefix.
    pub alphabet: Vec<String>,
    pub max_n: usize,
    pub max_p: usize,
    /// Probability that a `(q, a)` pair has no transition.
    pub halt_bias: f64,
    /// Most branches an admitted nondeterministic machine may have.
    pub max_branches: usize,
    pub max_attempts: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_states: 5,
            alphabet: ["_", "a", "b"].map(String::from).to_vec(),
            max_n: 5,
            max_p: 10,
            halt_bias: 0.25,
            max_branches: 64,
            max_attempts: 100_000,
        }
    }
}

/// A machine, an input it is admitted on, and how to regenerate both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub seed: u64,
    /// Candidates drawn before this one was admitted.
    pub attempts: usize,
    pub tm: TmSpec,
    pub input: Vec<SymId>,
}

/// `count` case seeds derived from `base`.
pub fn case_seeds(base: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    (0..count).map(|_| rng.gen()).collect()
}

impl GenParams {
    /// Bounds taken from a template machine: its alphabet and state count.
    pub fn from_template(tm: &TmSpec) -> Self {
        GenParams {
            max_states: tm.states.len(),
            alphabet: tm.alphabet.clone(),
            ..GenParams::default()
        }
    }
}

fn skeleton(rng: &mut ChaCha8Rng, params: &GenParams) -> (TmSpec, usize) {
    let states = rng.gen_range(1..=params.max_states);
    let symbols = rng.gen_range(1..=params.alphabet.len());
    let n = if symbols == 1 {
        0
    } else {
        rng.gen_range(0..=params.max_n)
    };
    let slack = params.max_p.saturating_sub(params.max_n);
    let mut prefix = String::from("q");
    while params.alphabet.iter().any(|a| a.starts_with(&prefix)) {
        prefix.push('q');
    }
    let tm = TmSpec {
        states: (0..states).map(|t| format!("{prefix}{t}")).collect(),
        alphabet: params.alphabet[..symbols].to_vec(),
        start: StateId(0),
        accept: (0..states).filter(|_| rng.gen_bool(0.5)).map(StateId).collect(),
        delta: BTreeMap::new(),
        poly: vec![1, rng.gen_range(0..=slack as u64)],
    };
    (tm, n)
}

fn random_transition(rng: &mut ChaCha8Rng, tm: &TmSpec) -> Transition {
    Transition {
        next: StateId(rng.gen_range(0..tm.states.len())),
        write: SymId(rng.gen_range(0..tm.alphabet.len())),
        moves: if rng.gen_bool(0.5) { Move::Right } else { Move::Left },
    }
}

fn random_input(rng: &mut ChaCha8Rng, tm: &TmSpec, n: usize) -> Vec<SymId> {
    (0..n).map(|_| SymId(rng.gen_range(1..tm.alphabet.len()))).collect()
}

fn admitted(tm: &TmSpec, input: &[SymId], branches: std::ops::RangeInclusive<usize>) -> Option<TmRun> {
    let p = tm.tape_bound(input.len()).ok()?;
    tm_run(tm, input, p).ok().filter(|run| branches.contains(&run.branches))
}

/// A deterministic machine admitted on its input.
pub fn random_dtm_case(seed: u64, params: &GenParams) -> Option<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempts in 1..=params.max_attempts {
        let (mut tm, n) = skeleton(&mut rng, params);
        for q in 0..tm.states.len() {
            for a in 0..tm.alphabet.len() {
                if !rng.gen_bool(params.halt_bias) {
                    let t = random_transition(&mut rng, &tm);
                    tm.delta.insert((StateId(q), SymId(a)), vec![t]);
                }
            }
        }
        let input = random_input(&mut rng, &tm, n);
        let Some(run) = admitted(&tm, &input, 1..=1) else {
            continue;
        };
        // Most admitted machines halt within a step; keep only a few of those.
        if run.halting_step() >= 2 || rng.gen_ratio(1, 16) {
            return Some(Case {
                seed,
                attempts,
                tm,
                input,
            });
        }
    }
    None
}

/// A machine that actually forks on its input, with at most `max_branches`
/// branches. One case in three is a bit guesser with a random pattern.
pub fn random_ntm_case(seed: u64, params: &GenParams) -> Option<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if rng.gen_ratio(1, 3) {
        let k = rng.gen_range(1..=6usize).min(params.max_branches.max(2).ilog2() as usize);
        let pattern: Vec<bool> = (0..k).map(|_| rng.gen()).collect();
        return Some(Case {
            seed,
            attempts: 1,
            tm: samples::bit_guesser(&pattern),
            input: Vec::new(),
        });
    }
    for attempts in 1..=params.max_attempts {
        let (mut tm, n) = skeleton(&mut rng, params);
        for q in 0..tm.states.len() {
            for a in 0..tm.alphabet.len() {
                let count = match rng.gen_range(0..4) {
                    0 => 0,
                    3 => 2,
                    _ => 1,
                };
                let mut ts: Vec<Transition> = Vec::new();
                while ts.len() < count {
                    let t = random_transition(&mut rng, &tm);
                    if !ts.contains(&t) {
                        ts.push(t);
                    }
                }
                if !ts.is_empty() {
                    tm.delta.insert((StateId(q), SymId(a)), ts);
                }
            }
        }
        let input = random_input(&mut rng, &tm, n);
        if admitted(&tm, &input, 2..=params.max_branches).is_some() {
            return Some(Case {
                seed,
                attempts,
                tm,
                input,
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tm::validate_tm;

    #[test]
    fn generation_is_reproducible_and_within_bounds() {
        let params = GenParams::default();
        for seed in case_seeds(7, 20) {
            let a = random_dtm_case(seed, &params).unwrap();
            assert_eq!(random_dtm_case(seed, &params).unwrap(), a);
            assert!(a.tm.states.len() <= 5 && a.tm.alphabet.len() <= 3);
            assert!(a.input.len() <= 5);
            assert!(a.tm.tape_bound(a.input.len()).unwrap() <= 10);
            assert!(a.tm.is_deterministic());
            assert!(validate_tm(&a.tm).is_empty());
        }
    }

    #[test]
    fn ntm_cases_branch_but_stay_small() {
        let params = GenParams::default();
        for seed in case_seeds(11, 12) {
            let c = random_ntm_case(seed, &params).unwrap();
            assert!(!c.tm.is_deterministic());
            let p = c.tm.tape_bound(c.input.len()).unwrap();
            let run = tm_run(&c.tm, &c.input, p).unwrap();
            assert!(run.branches >= 2 && run.branches <= 64);
        }
    }
}
