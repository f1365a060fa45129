//! Rule families of the construction, as structured objects.

use std::collections::BTreeSet;

use crate::object::{Label, PObject, Tag, Verdict};
use crate::system::{PSystem, RuleKind};
use crate::tm::{StateId, SymId, TmSpec};

use super::{Phi, Schedule};

/// A rule over structured objects, before interning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSpec {
    pub label: Label,
    pub kind: RuleKind,
    pub lhs: PObject,
    /// Exactly one object unless `kind` is evolution.
    pub rhs: Vec<PObject>,
}

impl RuleSpec {
    fn evolve(label: Label, lhs: PObject, rhs: Vec<PObject>) -> Self {
        RuleSpec {
            label,
            kind: RuleKind::Evolution,
            lhs,
            rhs,
        }
    }

    fn single(kind: RuleKind, label: Label, lhs: PObject, rhs: PObject) -> Self {
        RuleSpec {
            label,
            kind,
            lhs,
            rhs: vec![rhs],
        }
    }

    pub fn push_into(self, system: &mut PSystem) {
        match self.kind {
            RuleKind::Evolution => system.evolve(self.label, self.lhs, self.rhs),
            kind => {
                let rhs = self.rhs.into_iter().next().expect("single right-hand side");
                match kind {
                    RuleKind::SendIn => system.send_in(self.label, self.lhs, rhs),
                    RuleKind::SendOut => system.send_out(self.label, self.lhs, rhs),
                    _ => system.dissolve(self.label, self.lhs, rhs),
                }
            }
        }
    }
}

struct Ctx<'a> {
    tm: &'a TmSpec,
    p: u32,
    m: u32,
}

impl<'a> Ctx<'a> {
    fn new(tm: &'a TmSpec, p: usize, phi: &Phi) -> Self {
        Ctx {
            tm,
            p: p as u32,
            m: phi.m() as u32,
        }
    }

    fn q(&self, q: StateId) -> &str {
        self.tm.state_name(q)
    }

    fn a(&self, a: SymId) -> &str {
        self.tm.symbol_name(a)
    }

    fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.tm.states.len()).map(StateId)
    }

    fn symbols(&self) -> impl Iterator<Item = SymId> {
        (0..self.tm.alphabet.len()).map(SymId)
    }

    fn read(&self, a: SymId) -> Tag {
        Tag::Read(self.a(a).to_owned())
    }

    fn halts(&self, q: StateId, a: SymId) -> bool {
        self.tm.transitions(q, a).is_empty()
    }
}

fn cells(p: u32) -> impl Iterator<Item = u32> {
    0..=p
}

/// Step 1: the initial tape objects enter the cells of step 0 and the
/// initial state object gets its first subscript.
pub fn build_initial_rules(tm: &TmSpec, p: usize, phi: &Phi) -> Vec<RuleSpec> {
    let cx = Ctx::new(tm, p, phi);
    let mut out = Vec::new();
    for a in cx.symbols() {
        for i in cells(cx.p) {
            out.push(RuleSpec::single(
                RuleKind::SendIn,
                Label::Cell(i, 0),
                PObject::InitTape {
                    sym: cx.a(a).to_owned(),
                    i,
                },
                PObject::tape(cx.a(a), i, 0, 0),
            ));
        }
    }
    let q0 = cx.q(tm.start);
    out.push(RuleSpec::evolve(
        Label::Skin,
        PObject::InitState { q: q0.to_owned() },
        vec![PObject::state(q0, 0, 0, 0, Tag::None)],
    ));
    out
}

/// Counting in `(i,j)`, dissolution at `φ(a)`, and the state object's entry
/// into the head cell and decoding of the symbol from its release time.
pub fn build_scan_rules(tm: &TmSpec, p: usize, phi: &Phi) -> Vec<RuleSpec> {
    let cx = Ctx::new(tm, p, phi);
    let m = cx.m;
    let mut out = Vec::new();
    for j in 0..=cx.p {
        for i in cells(cx.p) {
            let cell = Label::Cell(i, j);
            for a in cx.symbols() {
                let f = phi.of(a) as u32;
                let t = |k| PObject::tape(cx.a(a), i, j, k);
                for k in 0..f {
                    out.push(RuleSpec::evolve(cell.clone(), t(k), vec![t(k + 1)]));
                }
                out.push(RuleSpec::single(RuleKind::Dissolution, cell.clone(), t(f), t(f + 1)));
                for k in f + 1..=m {
                    out.push(RuleSpec::evolve(Label::Skin, t(k), vec![t(k + 1)]));
                }
            }
            for q in cx.states() {
                let s = |k, tag| PObject::state(cx.q(q), i, j, k, tag);
                out.push(RuleSpec::single(RuleKind::SendIn, cell.clone(), s(0, Tag::None), s(1, Tag::None)));
                for k in 1..=m {
                    out.push(RuleSpec::evolve(cell.clone(), s(k, Tag::None), vec![s(k + 1, Tag::None)]));
                }
                for k in 2..=m + 1 {
                    let read = phi.inverse(k as usize - 1).expect("k - 1 in 1..=m");
                    out.push(RuleSpec::evolve(Label::Skin, s(k, Tag::None), vec![s(k + 1, cx.read(read))]));
                }
                for a in cx.symbols() {
                    for k in 1..=m {
                        out.push(RuleSpec::evolve(
                            Label::Skin,
                            s(k, cx.read(a)),
                            vec![s(k + 1, cx.read(a))],
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Subscripts `m+1 .. m+4`: tape objects pass through `(i,j)'`, the state
/// object dissolves the head cell's primed membrane and the released symbol
/// is erased. Halting `(q, a)` pairs do not enter the primed membrane.
pub fn build_handoff_rules(tm: &TmSpec, p: usize, phi: &Phi) -> Vec<RuleSpec> {
    let cx = Ctx::new(tm, p, phi);
    let m = cx.m;
    let mut out = Vec::new();
    for j in 0..=cx.p {
        for i in cells(cx.p) {
            let prime = Label::Prime(i, j);
            let has_prime = j < cx.p;
            for a in cx.symbols() {
                let t = |k| PObject::tape(cx.a(a), i, j, k);
                if has_prime {
                    out.push(RuleSpec::single(RuleKind::SendIn, prime.clone(), t(m + 1), t(m + 2)));
                    out.push(RuleSpec::evolve(prime.clone(), t(m + 2), vec![t(m + 3)]));
                    out.push(RuleSpec::evolve(prime.clone(), t(m + 3), vec![t(m + 4)]));
                    out.push(RuleSpec::single(RuleKind::Dissolution, prime.clone(), t(m + 4), t(m + 5)));
                    out.push(RuleSpec::evolve(Label::Skin, t(m + 4), vec![]));
                }
            }
            for q in cx.states() {
                for a in cx.symbols() {
                    let s = |k| PObject::state(cx.q(q), i, j, k, cx.read(a));
                    out.push(RuleSpec::evolve(Label::Skin, s(m + 1), vec![s(m + 2)]));
                    if has_prime && !cx.halts(q, a) {
                        out.push(RuleSpec::single(RuleKind::SendIn, prime.clone(), s(m + 2), s(m + 3)));
                        out.push(RuleSpec::single(RuleKind::Dissolution, prime.clone(), s(m + 3), s(m + 4)));
                    }
                }
            }
        }
    }
    out
}

/// Subscript `m+5` of every tape object: enter the cell of the next step.
fn reset_rules(cx: &Ctx<'_>, out: &mut Vec<RuleSpec>) {
    let m = cx.m;
    for j in 0..cx.p {
        for i in cells(cx.p) {
            for a in cx.symbols() {
                out.push(RuleSpec::single(
                    RuleKind::SendIn,
                    Label::Cell(i, j + 1),
                    PObject::tape(cx.a(a), i, j, m + 5),
                    PObject::tape(cx.a(a), i, j + 1, 0),
                ));
            }
        }
    }
}

fn target(i: u32, t: &crate::tm::Transition, p: u32) -> Option<u32> {
    let to = i as i64 + t.moves.offset();
    (0..=p as i64).contains(&to).then_some(to as u32)
}

/// `δ(q,a) = (r,b,d)`: write `b` at the head cell, then move to `r` at `i+d`.
pub fn build_transition_rules(tm: &TmSpec, p: usize, phi: &Phi) -> Vec<RuleSpec> {
    let cx = Ctx::new(tm, p, phi);
    let m = cx.m;
    let mut out = Vec::new();
    for j in 0..cx.p {
        for i in cells(cx.p) {
            for (&(q, a), ts) in &tm.delta {
                let [tr] = ts.as_slice() else { continue };
                let Some(to) = target(i, tr, cx.p) else { continue };
                let s = |k| PObject::state(cx.q(q), i, j, k, cx.read(a));
                out.push(RuleSpec::evolve(
                    Label::Skin,
                    s(m + 4),
                    vec![s(m + 5), PObject::tape(cx.a(tr.write), i, j, m + 5)],
                ));
                out.push(RuleSpec::evolve(
                    Label::Skin,
                    s(m + 5),
                    vec![PObject::state(cx.q(tr.next), to, j + 1, 0, Tag::None)],
                ));
            }
        }
    }
    reset_rules(&cx, &mut out);
    out
}

/// Nondeterministic variant: the chosen `(r,b,i+d)` is kept in the state
/// object's tag for one step.
pub fn build_nd_transition_rules(tm: &TmSpec, p: usize, phi: &Phi) -> Vec<RuleSpec> {
    let cx = Ctx::new(tm, p, phi);
    let m = cx.m;
    let mut out = Vec::new();
    for j in 0..cx.p {
        for i in cells(cx.p) {
            let mut moves = BTreeSet::new();
            for (&(q, a), ts) in &tm.delta {
                for tr in ts {
                    let Some(to) = target(i, tr, cx.p) else { continue };
                    let choice = Tag::Choice {
                        next: cx.q(tr.next).to_owned(),
                        write: cx.a(tr.write).to_owned(),
                        target: to,
                    };
                    out.push(RuleSpec::evolve(
                        Label::Skin,
                        PObject::state(cx.q(q), i, j, m + 4, cx.read(a)),
                        vec![
                            PObject::state(cx.q(q), i, j, m + 5, choice),
                            PObject::tape(cx.a(tr.write), i, j, m + 5),
                        ],
                    ));
                    moves.insert((q, tr.next, tr.write, to));
                }
            }
            for (q, r, b, to) in moves {
                let choice = Tag::Choice {
                    next: cx.q(r).to_owned(),
                    write: cx.a(b).to_owned(),
                    target: to,
                };
                out.push(RuleSpec::evolve(
                    Label::Skin,
                    PObject::state(cx.q(q), i, j, m + 5, choice),
                    vec![PObject::state(cx.q(r), to, j + 1, 0, Tag::None)],
                ));
            }
        }
    }
    reset_rules(&cx, &mut out);
    out
}

/// A state object that has read a symbol with no transition becomes a timer
/// that releases `yes` or `no` from the skin at the schedule's `t_end`.
pub fn build_halt_rules(tm: &TmSpec, p: usize, phi: &Phi, schedule: &Schedule) -> Vec<RuleSpec> {
    let cx = Ctx::new(tm, p, phi);
    let m = cx.m;
    let mut out = Vec::new();
    let mut verdicts = BTreeSet::new();
    for q in cx.states() {
        let verdict = Verdict::from_accepting(tm.is_accepting(q));
        for a in cx.symbols().filter(|&a| cx.halts(q, a)) {
            verdicts.insert(verdict);
            for j in 0..=cx.p {
                let countdown = schedule.timer_start(j as usize) as u32;
                for i in cells(cx.p) {
                    out.push(RuleSpec::evolve(
                        Label::Skin,
                        PObject::state(cx.q(q), i, j, m + 2, cx.read(a)),
                        vec![PObject::Timer { countdown, verdict }],
                    ));
                }
            }
        }
    }
    for verdict in verdicts {
        let timer = |countdown| PObject::Timer { countdown, verdict };
        for c in 1..=schedule.max_timer() as u32 {
            out.push(RuleSpec::evolve(Label::Skin, timer(c), vec![timer(c - 1)]));
        }
        out.push(RuleSpec::evolve(Label::Skin, timer(0), vec![PObject::Verdict(verdict)]));
        out.push(RuleSpec::single(
            RuleKind::SendOut,
            Label::Skin,
            PObject::Verdict(verdict),
            PObject::Verdict(verdict),
        ));
    }
    out
}
