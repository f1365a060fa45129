use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Assignment, Configuration, Engine, EngineError, StepError};
use crate::multiset::Multiset;
use crate::object::{ObjId, PObject, Verdict};
use crate::system::PSystem;

/// How to pick among several maximal assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunPolicy {
    /// Fail as soon as a step admits more than one assignment.
    Deterministic,
    /// Pick uniformly at random, reproducibly from the seed.
    SeededRandom(u64),
}

/// Enumeration cap used by the random policy.
const RANDOM_CHOICE_BOUND: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error(transparent)]
    Invalid(#[from] EngineError),
    #[error("nondeterminism at step {step}: {choices} maximal assignments")]
    Nondeterminism { step: usize, choices: usize },
    #[error(transparent)]
    Step(#[from] StepError),
}

/// What an observer sees after each executed step.
#[derive(Debug)]
pub struct StepEvent<'e> {
    /// 1-based index of the step just executed.
    pub step: usize,
    pub before: &'e Configuration,
    pub assignment: &'e Assignment,
    /// Number of maximal assignments available (capped for random runs).
    pub choices: usize,
    pub after: &'e Configuration,
    pub emitted: &'e Multiset<ObjId>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_config: Configuration,
    pub steps: usize,
    /// Non-empty emissions from the skin, by step.
    pub emissions: Vec<(usize, Multiset<ObjId>)>,
    /// True iff no rule is applicable in `final_config`.
    pub halted: bool,
    pub log: Option<Vec<Assignment>>,
}

impl<'a> Engine<'a> {
    /// Runs from the initial configuration until halting or `limit` steps.
    pub fn run_with(
        &self,
        limit: usize,
        policy: RunPolicy,
        keep_log: bool,
        mut observer: impl FnMut(&StepEvent<'_>),
    ) -> Result<RunResult, RunError> {
        let mut rng = match policy {
            RunPolicy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            RunPolicy::Deterministic => None,
        };
        let bound = if rng.is_some() { RANDOM_CHOICE_BOUND } else { 2 };
        let mut cfg = self.initial_configuration();
        let mut emissions = Vec::new();
        let mut log = keep_log.then(Vec::new);
        let mut steps = 0;
        loop {
            let options = self.applicable_assignments(&cfg, bound);
            if options.list.is_empty() {
                return Ok(RunResult {
                    final_config: cfg,
                    steps,
                    emissions,
                    halted: true,
                    log,
                });
            }
            if steps == limit {
                return Ok(RunResult {
                    final_config: cfg,
                    steps,
                    emissions,
                    halted: false,
                    log,
                });
            }
            let choices = options.list.len();
            let pick = match rng.as_mut() {
                None if choices > 1 => {
                    return Err(RunError::Nondeterminism {
                        step: steps + 1,
                        choices,
                    })
                }
                None => 0,
                Some(rng) => rng.gen_range(0..choices),
            };
            let assignment = &options.list[pick];
            let outcome = self.step(&cfg, assignment)?;
            steps += 1;
            observer(&StepEvent {
                step: steps,
                before: &cfg,
                assignment,
                choices,
                after: &outcome.config,
                emitted: &outcome.emitted,
            });
            if !outcome.emitted.is_empty() {
                emissions.push((steps, outcome.emitted));
            }
            if let Some(log) = log.as_mut() {
                log.push(assignment.clone());
            }
            cfg = outcome.config;
        }
    }
}

/// Runs `system` with `input` added to its input membrane.
pub fn run(
    system: &PSystem,
    input: &Multiset<PObject>,
    limit: usize,
    policy: RunPolicy,
) -> Result<RunResult, RunError> {
    let assembled = system.with_input(input);
    let engine = Engine::new(&assembled)?;
    engine.run_with(limit, policy, false, |_| {})
}

/// Ways a run can break the recogniser contract.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecogniserError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("no halting within {0} steps")]
    NotHalted(usize),
    #[error("halted without emitting yes or no")]
    NoVerdict,
    #[error("verdict emitted at step {step}, but the computation halted at step {last}")]
    EarlyVerdict { step: usize, last: usize },
    #[error("both yes and no were emitted")]
    ConflictingVerdicts,
    #[error("{0} verdict objects were emitted")]
    MultipleVerdicts(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recognition {
    pub verdict: Verdict,
    pub steps: usize,
}

impl Recognition {
    /// Audits a finished run against the recogniser contract: exactly one
    /// `yes` or `no` leaves the skin, and only in the last step.
    pub fn audit(result: &RunResult, alphabet: &crate::object::ObjectTable) -> Result<Self, RecogniserError> {
        let mut yes = 0;
        let mut no = 0;
        let mut first_step = None;
        for (step, emitted) in &result.emissions {
            for (obj, &count) in emitted.iter() {
                match alphabet.get(*obj) {
                    PObject::Verdict(Verdict::Accept) => yes += count,
                    PObject::Verdict(Verdict::Reject) => no += count,
                    _ => continue,
                }
                first_step.get_or_insert(*step);
            }
        }
        if !result.halted {
            return Err(RecogniserError::NotHalted(result.steps));
        }
        if yes > 0 && no > 0 {
            return Err(RecogniserError::ConflictingVerdicts);
        }
        match yes + no {
            0 => return Err(RecogniserError::NoVerdict),
            1 => {}
            n => return Err(RecogniserError::MultipleVerdicts(n)),
        }
        let step = first_step.expect("one verdict seen");
        if step != result.steps {
            return Err(RecogniserError::EarlyVerdict {
                step,
                last: result.steps,
            });
        }
        Ok(Recognition {
            verdict: Verdict::from_accepting(yes == 1),
            steps: result.steps,
        })
    }
}

/// Runs a recogniser deterministically and reads off its verdict.
pub fn recognize(
    system: &PSystem,
    input: &Multiset<PObject>,
    limit: usize,
) -> Result<Recognition, RecogniserError> {
    let assembled = system.with_input(input);
    let engine = Engine::new(&assembled).map_err(RunError::from)?;
    let result = engine.run_with(limit, RunPolicy::Deterministic, false, |_| {})?;
    Recognition::audit(&result, &assembled.alphabet)
}
