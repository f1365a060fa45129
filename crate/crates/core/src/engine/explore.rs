//! Exhaustive search over the nondeterministic choices of a system.
//!
//! Every maximal assignment is a separate branch. Configurations reached at
//! the same depth are memoised, so branch counts are path counts through the
//! resulting DAG rather than the number of distinct configurations.

use std::collections::HashMap;

use super::{Configuration, Engine, RunError, StepError};
use crate::multiset::Multiset;
use crate::object::{ObjectTable, PObject, Verdict};
use crate::system::PSystem;

const ASSIGNMENT_BOUND: usize = 1 << 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    accepting: u128,
    rejecting: u128,
    non_halting: u128,
    violations: u128,
}

impl Tally {
    fn add(&mut self, other: &Tally) {
        self.accepting = self.accepting.saturating_add(other.accepting);
        self.rejecting = self.rejecting.saturating_add(other.rejecting);
        self.non_halting = self.non_halting.saturating_add(other.non_halting);
        self.violations = self.violations.saturating_add(other.violations);
    }

    fn total(&self) -> u128 {
        self.accepting
            .saturating_add(self.rejecting)
            .saturating_add(self.non_halting)
            .saturating_add(self.violations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploreReport {
    /// Some branch halts with a single `yes` emitted in its last step.
    pub accepting: bool,
    pub branches: u128,
    pub accepting_branches: u128,
    pub rejecting_branches: u128,
    /// Branches cut off by the step limit.
    pub non_halting_branches: u128,
    /// Halting branches that broke the recogniser contract.
    pub contract_violations: u128,
    pub all_halt: bool,
    /// The branch bound or the assignment enumeration cap was hit.
    pub partial: bool,
    pub states_visited: usize,
    /// Largest number of maximal assignments seen at one configuration.
    pub max_choices: usize,
}

struct Frame {
    cfg: Configuration,
    depth: usize,
    successors: Vec<Configuration>,
    next: usize,
    tally: Tally,
}

fn verdicts(env: &Multiset<crate::object::ObjId>, alphabet: &ObjectTable) -> (u64, u64) {
    let mut yes = 0;
    let mut no = 0;
    for (obj, &c) in env.iter() {
        match alphabet.get(*obj) {
            PObject::Verdict(Verdict::Accept) => yes += c,
            PObject::Verdict(Verdict::Reject) => no += c,
            _ => {}
        }
    }
    (yes, no)
}

impl<'a> Engine<'a> {
    fn leaf(&self, parent: &Configuration, leaf: &Configuration) -> Tally {
        let alphabet = &self.system.alphabet;
        let before = verdicts(parent.environment(), alphabet);
        let after = verdicts(leaf.environment(), alphabet);
        let mut t = Tally::default();
        match (before, after) {
            ((0, 0), (1, 0)) => t.accepting = 1,
            ((0, 0), (0, 1)) => t.rejecting = 1,
            _ => t.violations = 1,
        }
        t
    }

    fn successors(&self, cfg: &Configuration, partial: &mut bool) -> Result<Vec<Configuration>, StepError> {
        let options = self.applicable_assignments(cfg, ASSIGNMENT_BOUND);
        *partial |= options.truncated;
        options
            .list
            .iter()
            .map(|a| self.step(cfg, a).map(|o| o.config))
            .collect()
    }

    /// Explores every branch up to `limit` steps. `observer` sees each
    /// expanded configuration with its number of maximal assignments.
    pub fn explore_with(
        &self,
        limit: usize,
        branch_bound: u128,
        mut observer: impl FnMut(&Configuration, usize),
    ) -> Result<ExploreReport, StepError> {
        let mut partial = false;
        let mut memo: HashMap<(Configuration, usize), Tally> = HashMap::new();
        let mut max_choices = 0;
        let root = self.initial_configuration();
        let root_succ = self.successors(&root, &mut partial)?;
        observer(&root, root_succ.len());
        max_choices = max_choices.max(root_succ.len());

        let total = if root_succ.is_empty() {
            self.leaf(&root, &root)
        } else if limit == 0 {
            Tally {
                non_halting: 1,
                ..Tally::default()
            }
        } else {
            let mut stack = vec![Frame {
                cfg: root,
                depth: 0,
                successors: root_succ,
                next: 0,
                tally: Tally::default(),
            }];
            let mut done = Tally::default();
            while let Some(top) = stack.last_mut() {
                if top.next == top.successors.len() {
                    let frame = stack.pop().expect("non-empty");
                    match stack.last_mut() {
                        Some(parent) => parent.tally.add(&frame.tally),
                        None => done = frame.tally,
                    }
                    memo.insert((frame.cfg, frame.depth), frame.tally);
                    continue;
                }
                let child = top.successors[top.next].clone();
                top.next += 1;
                let depth = top.depth + 1;
                if let Some(t) = memo.get(&(child.clone(), depth)) {
                    let t = *t;
                    top.tally.add(&t);
                } else {
                    let succ = self.successors(&child, &mut partial)?;
                    observer(&child, succ.len());
                    max_choices = max_choices.max(succ.len());
                    if succ.is_empty() {
                        let t = self.leaf(&top.cfg, &child);
                        top.tally.add(&t);
                    } else if depth >= limit {
                        top.tally.non_halting += 1;
                    } else {
                        stack.push(Frame {
                            cfg: child,
                            depth,
                            successors: succ,
                            next: 0,
                            tally: Tally::default(),
                        });
                    }
                }
                let seen: u128 = stack.iter().map(|f| f.tally.total()).sum();
                if seen > branch_bound {
                    partial = true;
                    let mut acc = Tally::default();
                    for f in &stack {
                        acc.add(&f.tally);
                    }
                    done = acc;
                    break;
                }
            }
            done
        };

        Ok(ExploreReport {
            accepting: total.accepting > 0,
            branches: total.total(),
            accepting_branches: total.accepting,
            rejecting_branches: total.rejecting,
            non_halting_branches: total.non_halting,
            contract_violations: total.violations,
            all_halt: total.non_halting == 0 && !partial,
            partial,
            states_visited: memo.len(),
            max_choices,
        })
    }
}

/// Exhaustive branch search from `system` with `input` in its input membrane.
pub fn explore(
    system: &PSystem,
    input: &Multiset<PObject>,
    limit: usize,
    branch_bound: u128,
) -> Result<ExploreReport, RunError> {
    let assembled = system.with_input(input);
    let engine = Engine::new(&assembled)?;
    Ok(engine.explore_with(limit, branch_bound, |_, _| {})?)
}
