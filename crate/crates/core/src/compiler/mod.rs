//! The depth-1 simulation of a polynomial-time Turing machine.
//!
//! For a machine `M` and input length `n` with `p = p(n)`, the family member
//! `Π_n` has a skin membrane `0` holding one elementary membrane `(i,j)` per
//! cell `i` and machine step `j` (both in `0..=p`) and one `(i,j)'` per cell
//! and step `j < p`. Each simulated step is a cycle of `m + 6` engine steps,
//! where `m = |Σ|`:
//!
//! * the tape object of cell `i` counts up inside `(i,j)` and dissolves it
//!   when its counter reaches `φ(a)`, so the state object sitting in the head
//!   cell learns the symbol from the moment it is released;
//! * every tape object then moves into `(i,j)'`, the state object follows it
//!   into the head cell's primed membrane and dissolves it, and the released
//!   head symbol is erased and replaced with the written one;
//! * finally the tape objects enter `(i,j+1)` and the state object moves.
//!
//! A halting configuration starts a timer whose `yes`/`no` object leaves the
//! skin at step `(p + 1)(m + 6) + 4`, the same step for every input of
//! length `n`.

mod rules;
mod schedule;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiset::Multiset;
use crate::object::{Label, PObject};
use crate::system::{MembraneTree, PSystem};
use crate::tm::{validate_tm_for, SymId, TmDiagnostic, TmSpec};

pub use rules::{
    build_halt_rules, build_handoff_rules, build_initial_rules, build_nd_transition_rules,
    build_scan_rules, build_transition_rules, RuleSpec,
};
pub use schedule::{Place, Schedule, StatePhase};

/// Largest tape bound accepted; `Π_n` has `Θ(p²)` membranes.
pub const MAX_TAPE_BOUND: usize = 1000;

/// The ordering `φ : Σ → {1..m}` given by declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phi {
    symbols: Vec<String>,
}

impl Phi {
    pub fn m(&self) -> usize {
        self.symbols.len()
    }

    /// `φ(a)`, 1-based.
    pub fn of(&self, a: SymId) -> usize {
        a.0 + 1
    }

    pub fn of_name(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name).map(|t| t + 1)
    }

    /// `φ⁻¹(k)` for `k` in `1..=m`.
    pub fn inverse(&self, k: usize) -> Option<SymId> {
        (1..=self.m()).contains(&k).then(|| SymId(k - 1))
    }

    pub fn name(&self, a: SymId) -> &str {
        &self.symbols[a.0]
    }

    pub fn symbols(&self) -> impl Iterator<Item = (SymId, &str)> {
        self.symbols.iter().enumerate().map(|(t, s)| (SymId(t), s.as_str()))
    }
}

pub fn order_alphabet(tm: &TmSpec) -> Phi {
    Phi {
        symbols: tm.alphabet.clone(),
    }
}

/// Λ for tape bound `p`, skin first, then `(i,j)` and `(i,j)'` row by row.
pub fn build_labels(p: usize) -> Vec<Label> {
    let p = p as u32;
    let mut out = vec![Label::Skin];
    for j in 0..=p {
        for i in 0..=p {
            out.push(Label::Cell(i, j));
        }
    }
    for j in 0..p {
        for i in 0..=p {
            out.push(Label::Prime(i, j));
        }
    }
    out
}

/// `(p+1)² + p² + p + 1`.
pub fn label_count_formula(p: usize) -> usize {
    (p + 1) * (p + 1) + p * p + p + 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub cycle_len: usize,
    pub labels: usize,
    pub rules: usize,
    /// Step at which the verdict leaves the skin.
    pub t_end: usize,
    pub deterministic: bool,
}

impl Metadata {
    /// Default step budget: `4 (p+1)(m+6) + 16`.
    pub fn default_budget(&self) -> usize {
        4 * (self.p + 1) * (self.m + 6) + 16
    }
}

/// `Π_n` together with what is needed to feed it an input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompilerOutput {
    pub system: PSystem,
    pub input_membrane: Label,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompilerError {
    #[error("invalid machine: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<TmDiagnostic>),
    #[error("tape bound p({n}) = {p} exceeds the supported maximum {MAX_TAPE_BOUND}")]
    TooLarge { n: usize, p: usize },
    #[error("input position {pos} holds the blank, which is reserved for padding")]
    BlankInInput { pos: usize },
    #[error("input object {object} does not fit a tape of {cells} cells")]
    IndexOverflow { object: String, cells: usize },
    #[error("`{0}` is not an input object")]
    NotInput(String),
}

fn tape_bound(tm: &TmSpec, n: usize) -> Result<usize, CompilerError> {
    let diags: Vec<_> = validate_tm_for(tm, n)
        .into_iter()
        .filter(|d| *d != TmDiagnostic::PolyNotAtLeastLinear)
        .collect();
    if !diags.is_empty() {
        return Err(CompilerError::Invalid(diags));
    }
    let p = tm.tape_bound(n).map_err(|_| CompilerError::Invalid(vec![TmDiagnostic::PolyOverflow { n }]))?;
    if p > MAX_TAPE_BOUND {
        return Err(CompilerError::TooLarge { n, p });
    }
    Ok(p)
}

/// Every rule of `Π_n`, in a fixed order.
pub fn build_rules(tm: &TmSpec, p: usize) -> Vec<RuleSpec> {
    let phi = order_alphabet(tm);
    let schedule = Schedule::new(p, phi.m());
    let mut out = build_initial_rules(tm, p, &phi);
    out.extend(build_scan_rules(tm, p, &phi));
    out.extend(build_handoff_rules(tm, p, &phi));
    if tm.is_deterministic() {
        out.extend(build_transition_rules(tm, p, &phi));
    } else {
        out.extend(build_nd_transition_rules(tm, p, &phi));
    }
    out.extend(build_halt_rules(tm, p, &phi, &schedule));
    out
}

/// Machine F: `Π_n` from the machine and the input length alone.
pub fn build_family_member(tm: &TmSpec, n: usize) -> Result<CompilerOutput, CompilerError> {
    let p = tape_bound(tm, n)?;
    let labels = build_labels(p);
    let children = labels[1..].iter().cloned().map(MembraneTree::leaf).collect();
    let mut system = PSystem::new(MembraneTree::with_children(Label::Skin, children));
    debug_assert_eq!(system.labels, labels);

    let blank = tm.symbol_name(tm.blank()).to_owned();
    system.add_initial(
        Label::Skin,
        PObject::InitState {
            q: tm.state_name(tm.start).to_owned(),
        },
        1,
    );
    for i in std::iter::once(0).chain(n + 1..=p) {
        system.add_initial(
            Label::Skin,
            PObject::InitTape {
                sym: blank.clone(),
                i: i as u32,
            },
            1,
        );
    }
    for rule in build_rules(tm, p) {
        rule.push_into(&mut system);
    }

    let m = tm.m();
    let schedule = Schedule::new(p, m);
    let metadata = Metadata {
        n,
        p,
        m,
        cycle_len: schedule.cycle_len(),
        labels: system.labels.len(),
        rules: system.rules.len(),
        t_end: schedule.t_end(),
        deterministic: tm.is_deterministic(),
    };
    Ok(CompilerOutput {
        system,
        input_membrane: Label::Skin,
        metadata,
    })
}

/// Machine E: `w_x = { x_i[i] : 1 <= i <= |x| }`.
pub fn encode_input(x: &[SymId], tm: &TmSpec) -> Result<Multiset<PObject>, CompilerError> {
    let mut out = Multiset::new();
    for (t, &a) in x.iter().enumerate() {
        if a == tm.blank() {
            return Err(CompilerError::BlankInInput { pos: t + 1 });
        }
        out.insert(
            PObject::InitTape {
                sym: tm.symbol_name(a).to_owned(),
                i: (t + 1) as u32,
            },
            1,
        );
    }
    Ok(out)
}

/// `Π_x`: `Π_n` with `w_x` added to the input membrane.
pub fn assemble(member: &CompilerOutput, w_x: &Multiset<PObject>) -> Result<PSystem, CompilerError> {
    let cells = member.metadata.p + 1;
    for obj in w_x.iter().map(|(o, _)| o) {
        match obj {
            PObject::InitTape { i, .. } if (*i as usize) < cells => {}
            PObject::InitTape { .. } => {
                return Err(CompilerError::IndexOverflow {
                    object: obj.to_string(),
                    cells,
                })
            }
            other => return Err(CompilerError::NotInput(other.to_string())),
        }
    }
    Ok(member.system.with_input(w_x))
}

/// The semi-uniform composition `H(x) = assemble(F(1^|x|), E(x))`.
pub fn compile_for_input(tm: &TmSpec, x: &[SymId]) -> Result<(CompilerOutput, PSystem), CompilerError> {
    let member = build_family_member(tm, x.len())?;
    let system = assemble(&member, &encode_input(x, tm)?)?;
    Ok((member, system))
}

/// Rule counts of a compiled system grouped by kind name.
pub fn rule_census(system: &PSystem) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for rule in &system.rules {
        *out.entry(rule.kind().name()).or_default() += 1;
    }
    out
}
