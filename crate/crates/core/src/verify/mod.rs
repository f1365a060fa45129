//! Checks that a compiled system does what the machine does.
//!
//! [`compare_run`] executes a deterministic machine and its compiled system
//! side by side. At every cycle boundary the configuration is decoded back
//! into a machine configuration and compared with the direct run; between
//! boundaries every region is compared with the placement predicted by the
//! [`Schedule`]. [`verify_nd`] explores every branch of a compiled
//! nondeterministic machine and compares it with exhaustive enumeration.

pub mod gen;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::compiler::{
    assemble, build_family_member, encode_input, order_alphabet, CompilerError, Phi, Place, Schedule,
    StatePhase,
};
use crate::engine::{Configuration, Engine, Recognition, RunError, RunResult, StepError};
use crate::multiset::Multiset;
use crate::object::{Label, PObject, Tag, Verdict};
use crate::system::PSystem;
use crate::tm::{tm_run, StateId, SymId, TmConfig, TmError, TmSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("membrane {0} is missing at a boundary")]
    MissingCell(Label),
    #[error("membrane {label} holds {count} objects at a boundary, expected one")]
    CellCount { label: Label, count: u64 },
    #[error("unexpected object {object} in {label} at a boundary")]
    Stray { label: Label, object: String },
    #[error("{0} state objects in the skin at a boundary")]
    MultipleStates(u64),
    #[error("object {0} names a symbol or state the machine does not have")]
    Foreign(String),
}

/// A decoded boundary configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Boundary {
    Decoded(TmConfig),
    /// The tape is intact but no state object remains: the machine halted.
    StateAbsent { tape: Vec<SymId> },
}

impl Boundary {
    pub fn tape(&self) -> &[SymId] {
        match self {
            Boundary::Decoded(c) => &c.tape,
            Boundary::StateAbsent { tape } => tape,
        }
    }
}

/// Reads machine step `j` off a configuration at global step `1 + jC`.
pub fn boundary_decode(
    engine: &Engine<'_>,
    tm: &TmSpec,
    cfg: &Configuration,
    j: usize,
    p: usize,
) -> Result<Boundary, DecodeError> {
    let alphabet = &engine.system().alphabet;
    let j32 = j as u32;
    let mut tape = Vec::with_capacity(p + 1);
    for i in 0..=p as u32 {
        let label = Label::Cell(i, j32);
        let membrane = engine
            .label_id(&label)
            .and_then(|id| cfg.membrane(id))
            .ok_or_else(|| DecodeError::MissingCell(label.clone()))?;
        let count = membrane.contents.len();
        if count != 1 {
            return Err(DecodeError::CellCount { label, count });
        }
        let (id, _) = membrane.contents.iter().next().expect("one object");
        let obj = alphabet.get(*id);
        match obj {
            PObject::Tape { sym, i: oi, j: oj, k: 0 } if *oi == i && *oj == j32 => {
                tape.push(tm.symbol_id(sym).ok_or_else(|| DecodeError::Foreign(obj.to_string()))?);
            }
            _ => {
                return Err(DecodeError::Stray {
                    label,
                    object: obj.to_string(),
                })
            }
        }
    }
    let skin = cfg.membrane(cfg.root()).expect("skin is alive");
    let mut state = None;
    let mut states = 0;
    for (id, &count) in skin.contents.iter() {
        let obj = alphabet.get(*id);
        match obj {
            PObject::State {
                q,
                i,
                j: oj,
                k: 0,
                tag: Tag::None,
            } if *oj == j32 => {
                states += count;
                let q = tm.state_id(q).ok_or_else(|| DecodeError::Foreign(obj.to_string()))?;
                state = Some((q, *i as usize));
            }
            PObject::Timer { .. } => {}
            _ => {
                return Err(DecodeError::Stray {
                    label: Label::Skin,
                    object: obj.to_string(),
                })
            }
        }
    }
    Ok(match (states, state) {
        (0, _) => Boundary::StateAbsent { tape },
        (1, Some((state, head))) => Boundary::Decoded(TmConfig {
            tape,
            head,
            state,
            step: j,
        }),
        (n, _) => return Err(DecodeError::MultipleStates(n)),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("machine not admitted: {0}")]
    NotAdmitted(TmError),
    #[error("machine is nondeterministic; use verify_nd")]
    Nondeterministic,
    #[error(transparent)]
    Compile(#[from] CompilerError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Step(#[from] StepError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Engine step budget; the compiled system's default when `None`.
    pub budget: Option<usize>,
    /// Most branches [`verify_nd`] explores.
    pub branch_bound: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            budget: None,
            branch_bound: 1 << 12,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub steps: usize,
    pub t_end: usize,
    pub rules_applied: u64,
    pub max_objects: u64,
    pub initial_membranes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub machine_verdict: Verdict,
    pub machine_steps: usize,
    pub system_verdict: Option<Verdict>,
    pub verdict_match: bool,
    /// One entry per machine step `0..=halting step`.
    pub boundary_matches: Vec<bool>,
    /// Engine steps between consecutive boundaries.
    pub cycle_lengths: Vec<usize>,
    /// The common cycle length, if there is at least one full cycle and all
    /// agree.
    pub cycle_length_observed: Option<usize>,
    pub expected_cycle_length: usize,
    pub confluence_violations: usize,
    pub depth_violations: usize,
    pub schedule_mismatches: usize,
    pub first_schedule_mismatch: Option<String>,
    pub recogniser_violations: Vec<String>,
    pub totals: Totals,
}

impl EquivalenceReport {
    /// Every check passed.
    pub fn ok(&self) -> bool {
        self.verdict_match
            && self.boundary_matches.iter().all(|&b| b)
            && self.cycle_lengths.iter().all(|&c| c == self.expected_cycle_length)
            && self.confluence_violations == 0
            && self.depth_violations == 0
            && self.schedule_mismatches == 0
            && self.recogniser_violations.is_empty()
            && self.totals.steps == self.totals.t_end
    }
}

type Regions = BTreeMap<Label, Multiset<PObject>>;

fn actual_regions(engine: &Engine<'_>, cfg: &Configuration) -> (Regions, Multiset<PObject>) {
    let alphabet = &engine.system().alphabet;
    let regions = cfg
        .membranes()
        .filter(|(_, m)| !m.contents.is_empty())
        .map(|(id, m)| (engine.label(id).clone(), m.contents.map(|o| alphabet.get(*o).clone())))
        .collect();
    (regions, cfg.environment().map(|o| alphabet.get(*o).clone()))
}

/// Where every object of a deterministic run should be after global step `s`.
struct Expectation<'a> {
    tm: &'a TmSpec,
    phi: Phi,
    schedule: Schedule,
    trace: &'a [TmConfig],
    verdict: Verdict,
}

impl Expectation<'_> {
    fn halt(&self) -> usize {
        self.trace.len() - 1
    }

    fn place(&self, place: Place, i: u32, j: u32) -> Label {
        match place {
            Place::Cell => Label::Cell(i, j),
            Place::Prime => Label::Prime(i, j),
            Place::Skin => Label::Skin,
        }
    }

    fn at(&self, s: usize) -> (Regions, Multiset<PObject>) {
        let sch = &self.schedule;
        let m = sch.m;
        let c = sch.cycle_len();
        let mut regions = Regions::new();
        let mut env = Multiset::new();
        let mut put = |label: Label, obj: PObject| {
            regions.entry(label).or_default().insert(obj, 1);
        };
        let (j, tau) = {
            let j = ((s - 1) / c).min(sch.p);
            (j, (s - sch.boundary(j)).min(c - 1))
        };
        let h = self.halt();
        let now = &self.trace[j.min(h)];
        let last = j == sch.p;
        let j32 = j as u32;
        for (i, &a) in now.tape.iter().enumerate() {
            let moving = j < h && i == now.head;
            let sym = self.tm.symbol_name(a);
            match sch.tape(tau, self.phi.of(a), moving, last) {
                Some((place, k)) => put(self.place(place, i as u32, j32), PObject::tape(sym, i as u32, j32, k as u32)),
                None => {
                    let written = self.trace[j + 1].tape[i];
                    put(
                        Label::Skin,
                        PObject::tape(self.tm.symbol_name(written), i as u32, j32, (m + 5) as u32),
                    );
                }
            }
        }
        if j <= h {
            let read = now.tape[now.head];
            let q = self.tm.state_name(now.state);
            let head = now.head as u32;
            let tagged = Tag::Read(self.tm.symbol_name(read).to_owned());
            match sch.state(tau, self.phi.of(read), j == h, last) {
                StatePhase::Untagged(place, k) => {
                    put(self.place(place, head, j32), PObject::state(q, head, j32, k as u32, Tag::None))
                }
                StatePhase::Tagged(place, k) => {
                    put(self.place(place, head, j32), PObject::state(q, head, j32, k as u32, tagged))
                }
                StatePhase::Halted => {}
            }
        }
        let started = sch.halt_step(h);
        if s >= started {
            let elapsed = s - started;
            let start = sch.timer_start(h);
            if elapsed <= start {
                put(
                    Label::Skin,
                    PObject::Timer {
                        countdown: (start - elapsed) as u32,
                        verdict: self.verdict,
                    },
                );
            } else if elapsed == start + 1 {
                put(Label::Skin, PObject::Verdict(self.verdict));
            } else {
                env.insert(PObject::Verdict(self.verdict), 1);
            }
        }
        (regions, env)
    }
}

fn describe_mismatch(step: usize, want: &Regions, got: &Regions) -> String {
    let mut labels: Vec<&Label> = want.keys().chain(got.keys()).collect();
    labels.sort();
    labels.dedup();
    for label in labels {
        let w = want.get(label).cloned().unwrap_or_default();
        let g = got.get(label).cloned().unwrap_or_default();
        if w != g {
            let spell = |m: &Multiset<PObject>| m.iter().map(|(o, c)| format!("{o}x{c}")).collect::<Vec<_>>().join(" ");
            return format!("step {step}, region {label}: expected [{}], found [{}]", spell(&w), spell(&g));
        }
    }
    format!("step {step}: environment differs")
}

/// Runs `tm` on `x` directly and through its compiled system, comparing the
/// two at every step.
pub fn compare_run(tm: &TmSpec, x: &[SymId], limits: Limits) -> Result<EquivalenceReport, VerifyError> {
    if !tm.is_deterministic() {
        return Err(VerifyError::Nondeterministic);
    }
    let p = tm.tape_bound(x.len()).map_err(VerifyError::NotAdmitted)?;
    let oracle = tm_run(tm, x, p).map_err(VerifyError::NotAdmitted)?;
    let member = build_family_member(tm, x.len())?;
    let system = assemble(&member, &encode_input(x, tm)?)?;
    let engine = Engine::new(&system).map_err(RunError::from)?;
    let meta = &member.metadata;
    let schedule = Schedule::new(meta.p, meta.m);
    let budget = limits.budget.unwrap_or_else(|| meta.default_budget());
    let expect = Expectation {
        tm,
        phi: order_alphabet(tm),
        schedule,
        trace: &oracle.trace,
        verdict: oracle.verdict,
    };
    let h = oracle.halting_step();

    let mut report = EquivalenceReport {
        n: x.len(),
        p: meta.p,
        m: meta.m,
        machine_verdict: oracle.verdict,
        machine_steps: h,
        system_verdict: None,
        verdict_match: false,
        boundary_matches: vec![false; h + 1],
        cycle_lengths: Vec::new(),
        cycle_length_observed: None,
        expected_cycle_length: schedule.cycle_len(),
        confluence_violations: 0,
        depth_violations: 0,
        schedule_mismatches: 0,
        first_schedule_mismatch: None,
        recogniser_violations: Vec::new(),
        totals: Totals {
            t_end: meta.t_end,
            initial_membranes: meta.labels,
            ..Totals::default()
        },
    };
    // First step at which the untagged state object of cycle j appears.
    let mut cycle_start: Vec<Option<usize>> = vec![None; h + 1];

    let mut cfg = engine.initial_configuration();
    let mut emissions = Vec::new();
    let mut steps = 0;
    let halted = loop {
        let options = engine.applicable_assignments(&cfg, 2);
        if options.list.is_empty() {
            break true;
        }
        if steps == budget {
            break false;
        }
        if options.list.len() > 1 {
            report.confluence_violations += 1;
        }
        let assignment = &options.list[0];
        let outcome = engine.step(&cfg, assignment)?;
        steps += 1;
        cfg = outcome.config;
        report.totals.rules_applied += assignment.rules_applied();
        report.totals.max_objects = report.totals.max_objects.max(cfg.object_count());
        if cfg.depth() > 1 {
            report.depth_violations += 1;
        }
        if !outcome.emitted.is_empty() {
            emissions.push((steps, outcome.emitted));
        }

        let (got, got_env) = actual_regions(&engine, &cfg);
        let skin = &got.get(&Label::Skin).cloned().unwrap_or_default();
        for (obj, _) in skin.iter() {
            if let PObject::State { j, k: 0, tag: Tag::None, .. } = obj {
                if let Some(slot) = cycle_start.get_mut(*j as usize) {
                    slot.get_or_insert(steps);
                }
            }
        }
        let (want, want_env) = expect.at(steps);
        if want != got || want_env != got_env {
            report.schedule_mismatches += 1;
            if report.first_schedule_mismatch.is_none() {
                report.first_schedule_mismatch = Some(describe_mismatch(steps, &want, &got));
            }
        }
        for j in 0..=h.min(meta.p) {
            if steps == schedule.boundary(j) {
                report.boundary_matches[j] = match boundary_decode(&engine, tm, &cfg, j, meta.p) {
                    Ok(Boundary::Decoded(decoded)) => decoded == oracle.trace[j],
                    _ => false,
                };
            }
        }
    };

    report.cycle_lengths = cycle_start
        .windows(2)
        .map_while(|w| Some(w[1]? - w[0]?))
        .collect();
    if let Some(&first) = report.cycle_lengths.first() {
        if report.cycle_lengths.iter().all(|&c| c == first) {
            report.cycle_length_observed = Some(first);
        }
    }
    report.totals.steps = steps;
    let result = RunResult {
        final_config: cfg,
        steps,
        emissions,
        halted,
        log: None,
    };
    match Recognition::audit(&result, &system.alphabet) {
        Ok(r) => report.system_verdict = Some(r.verdict),
        Err(e) => report.recogniser_violations.push(e.to_string()),
    }
    report.verdict_match =
        report.system_verdict == Some(oracle.verdict) && report.boundary_matches.iter().all(|&b| b);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NdReport {
    pub n: usize,
    pub p: usize,
    pub machine_verdict: Verdict,
    pub machine_branches: usize,
    pub machine_accepting_branches: usize,
    /// `None` when exploration hit its bound.
    pub system_verdict: Option<Verdict>,
    pub system_branches: u128,
    pub system_accepting_branches: u128,
    pub non_halting_branches: u128,
    pub contract_violations: u128,
    pub partial: bool,
    pub states_visited: usize,
    pub choice_points: usize,
    /// Choice points whose number of assignments differs from `|δ(q,a)|`.
    pub choice_mismatches: usize,
    pub depth_violations: usize,
    pub verdict_match: bool,
}

impl NdReport {
    pub fn ok(&self) -> bool {
        !self.partial
            && self.verdict_match
            && self.system_branches == self.machine_branches as u128
            && self.system_accepting_branches == self.machine_accepting_branches as u128
            && self.non_halting_branches == 0
            && self.contract_violations == 0
            && self.choice_mismatches == 0
            && self.depth_violations == 0
    }
}

/// `|δ(q,a)|` for the state object about to choose, if any.
fn pending_choice(tm: &TmSpec, system: &PSystem, cfg: &Configuration, m: usize) -> Option<usize> {
    let skin = cfg.membrane(cfg.root())?;
    skin.contents.iter().find_map(|(id, _)| match system.alphabet.get(*id) {
        PObject::State {
            q,
            k,
            tag: Tag::Read(a),
            ..
        } if *k as usize == m + 4 => {
            let q: StateId = tm.state_id(q)?;
            let a = tm.symbol_id(a)?;
            Some(tm.transitions(q, a).len())
        }
        _ => None,
    })
}

/// Explores every branch of the compiled system for a (possibly
/// nondeterministic) machine and compares with exhaustive enumeration.
pub fn verify_nd(tm: &TmSpec, x: &[SymId], limits: Limits) -> Result<NdReport, VerifyError> {
    let p = tm.tape_bound(x.len()).map_err(VerifyError::NotAdmitted)?;
    let oracle = tm_run(tm, x, p).map_err(VerifyError::NotAdmitted)?;
    let member = build_family_member(tm, x.len())?;
    let system = assemble(&member, &encode_input(x, tm)?)?;
    let engine = Engine::new(&system).map_err(RunError::from)?;
    let meta = &member.metadata;
    let budget = limits.budget.unwrap_or_else(|| meta.default_budget());

    let mut choice_points = 0;
    let mut choice_mismatches = 0;
    let mut depth_violations = 0;
    let explored = engine.explore_with(budget, limits.branch_bound, |cfg, choices| {
        if cfg.depth() > 1 {
            depth_violations += 1;
        }
        let expected = pending_choice(tm, &system, cfg, meta.m).unwrap_or(1).max(1);
        if choices > 1 || expected > 1 {
            choice_points += 1;
            if choices != expected {
                choice_mismatches += 1;
            }
        }
    })?;
    let system_verdict = (!explored.partial).then(|| Verdict::from_accepting(explored.accepting));
    Ok(NdReport {
        n: x.len(),
        p,
        machine_verdict: oracle.verdict,
        machine_branches: oracle.branches,
        machine_accepting_branches: oracle.accepting_branches,
        system_verdict,
        system_branches: explored.branches,
        system_accepting_branches: explored.accepting_branches,
        non_halting_branches: explored.non_halting_branches,
        contract_violations: explored.contract_violations,
        partial: explored.partial,
        states_visited: explored.states_visited,
        choice_points,
        choice_mismatches,
        depth_violations,
        verdict_match: system_verdict == Some(oracle.verdict),
    })
}
