//! Maximally parallel execution of P systems with active membranes and
//! dissolution.
//!
//! A step is chosen against the configuration at the start of the step: every
//! object occurrence that can be consumed by some rule is consumed by exactly
//! one, and each membrane takes part in at most one blocking rule
//! (send-in, send-out or dissolution). Effects are then applied in a fixed
//! order: evolution products and communication first, then dissolutions from
//! the innermost membrane outwards, so a dissolving membrane releases its
//! already updated contents into its parent.

mod explore;
mod run;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::multiset::Multiset;
use crate::object::{Label, ObjId};
use crate::system::{validate_system, Action, Diagnostic, PSystem, RuleKind};

pub use crate::object::Verdict;
pub use explore::{explore, ExploreReport};
pub use run::{recognize, run, Recognition, RecogniserError, RunError, RunPolicy, RunResult, StepEvent};

/// Index of a membrane label inside one [`Engine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u32);

impl LabelId {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Membrane {
    pub parent: Option<LabelId>,
    pub contents: Multiset<ObjId>,
}

/// Current membrane tree plus the environment. Membranes are addressed by
/// label; a dissolved membrane's slot is `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    membranes: Vec<Option<Membrane>>,
    root: LabelId,
    environment: Multiset<ObjId>,
}

impl Configuration {
    pub fn root(&self) -> LabelId {
        self.root
    }

    pub fn membrane(&self, id: LabelId) -> Option<&Membrane> {
        self.membranes.get(id.idx()).and_then(Option::as_ref)
    }

    pub fn is_alive(&self, id: LabelId) -> bool {
        self.membrane(id).is_some()
    }

    /// Live membranes in label-index order.
    pub fn membranes(&self) -> impl Iterator<Item = (LabelId, &Membrane)> {
        self.membranes
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.as_ref().map(|m| (LabelId(i as u32), m)))
    }

    pub fn children(&self, id: LabelId) -> impl Iterator<Item = LabelId> + '_ {
        self.membranes()
            .filter(move |(_, m)| m.parent == Some(id))
            .map(|(c, _)| c)
    }

    pub fn environment(&self) -> &Multiset<ObjId> {
        &self.environment
    }

    pub fn membrane_count(&self) -> usize {
        self.membranes.iter().filter(|m| m.is_some()).count()
    }

    /// Objects inside the system, excluding the environment.
    pub fn object_count(&self) -> u64 {
        self.membranes().map(|(_, m)| m.contents.len()).sum()
    }

    /// Distance from the root; `None` for dissolved membranes.
    pub fn depth_of(&self, id: LabelId) -> Option<usize> {
        let mut depth = 0;
        let mut cur = self.membrane(id)?;
        while let Some(p) = cur.parent {
            depth += 1;
            cur = self.membrane(p).expect("parent of a live membrane is live");
        }
        Some(depth)
    }

    /// Depth of the membrane tree; a lone skin has depth 0.
    pub fn depth(&self) -> usize {
        self.membranes()
            .filter_map(|(id, _)| self.depth_of(id))
            .max()
            .unwrap_or(0)
    }
}

/// `count` applications of `rule` to objects in `region`. For send-in rules
/// the region is the parent of the target membrane; for every other kind it
/// is the membrane the rule is scoped to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Application {
    /// Membrane the rule is scoped to.
    pub membrane: LabelId,
    pub rule: usize,
    pub region: LabelId,
    pub count: u64,
}

/// One maximally parallel choice of rules, sorted by (membrane, rule).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    pub applications: Vec<Application>,
}

impl Assignment {
    fn canonical(mut applications: Vec<Application>) -> Self {
        applications.sort();
        Assignment { applications }
    }

    /// Total rule instances applied.
    pub fn rules_applied(&self) -> u64 {
        self.applications.iter().map(|a| a.count).sum()
    }
}

/// Result of [`Engine::applicable_assignments`].
#[derive(Debug, Clone, Default)]
pub struct Assignments {
    pub list: Vec<Assignment>,
    /// More assignments exist than the requested bound.
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineOptions {
    /// Also count a send-in against the region the object leaves. Off by
    /// default: only the target membrane is blocked.
    pub block_send_in_source: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid system: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

/// The assignment does not fit the configuration it was applied to.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("application of rule {rule} refers to a dissolved or unrelated membrane")]
    BadRegion { rule: usize },
    #[error("rule {0} does not exist")]
    UnknownRule(usize),
    #[error("membrane {0:?} is subject to more than one blocking rule")]
    Blocking(LabelId),
    #[error("not enough copies of object {obj:?} in membrane {region:?}")]
    Insufficient { region: LabelId, obj: ObjId },
    #[error("rule {0} would dissolve the skin")]
    SkinDissolution(usize),
    #[error("application with zero multiplicity")]
    ZeroCount,
}

/// Successor configuration plus what left the skin during the step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub config: Configuration,
    pub emitted: Multiset<ObjId>,
    pub dissolved: Vec<LabelId>,
}

#[derive(Debug, Default)]
struct RegionRules {
    evolution: Vec<usize>,
    /// Send-out and dissolution rules scoped to the region itself.
    blocking: Vec<usize>,
}

/// A validated system ready for execution.
pub struct Engine<'a> {
    system: &'a PSystem,
    options: EngineOptions,
    labels: Vec<Label>,
    label_ids: HashMap<Label, LabelId>,
    rule_label: Vec<LabelId>,
    in_region: HashMap<(LabelId, ObjId), RegionRules>,
    send_in: HashMap<ObjId, Vec<usize>>,
    by_lhs: HashMap<ObjId, Vec<usize>>,
}

impl fmt::Debug for Engine<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("labels", &self.labels.len())
            .field("rules", &self.system.rules.len())
            .finish()
    }
}

struct Slot {
    region: LabelId,
    count: u64,
    evolution: Vec<usize>,
}

#[derive(Clone, Copy)]
struct Candidate {
    rule: usize,
    slot: usize,
    primary: LabelId,
    source: Option<LabelId>,
}

struct Search<'s> {
    slots: &'s [Slot],
    primaries: &'s [(LabelId, Vec<Candidate>)],
    /// For each slot, how many primaries at index >= i can still draw on it.
    capacity: Vec<Vec<u64>>,
    remaining: Vec<u64>,
    occupied: Vec<bool>,
    chosen: Vec<Candidate>,
    prune: bool,
    bound: usize,
    out: Vec<Assignment>,
    truncated: bool,
    rule_label: &'s [LabelId],
}

impl<'a> Engine<'a> {
    pub fn new(system: &'a PSystem) -> Result<Self, EngineError> {
        Self::with_options(system, EngineOptions::default())
    }

    pub fn with_options(system: &'a PSystem, options: EngineOptions) -> Result<Self, EngineError> {
        let diags = validate_system(system);
        if !diags.is_empty() {
            return Err(EngineError::Invalid(diags));
        }
        let labels = system.labels.clone();
        let label_ids: HashMap<Label, LabelId> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), LabelId(i as u32)))
            .collect();
        let mut rule_label = Vec::with_capacity(system.rules.len());
        let mut in_region: HashMap<(LabelId, ObjId), RegionRules> = HashMap::new();
        let mut send_in: HashMap<ObjId, Vec<usize>> = HashMap::new();
        let mut by_lhs: HashMap<ObjId, Vec<usize>> = HashMap::new();
        for (idx, rule) in system.rules.iter().enumerate() {
            let h = label_ids[&rule.label];
            by_lhs.entry(rule.lhs).or_default().push(idx);
            rule_label.push(h);
            match rule.kind() {
                RuleKind::Evolution => in_region.entry((h, rule.lhs)).or_default().evolution.push(idx),
                RuleKind::SendOut | RuleKind::Dissolution => {
                    in_region.entry((h, rule.lhs)).or_default().blocking.push(idx)
                }
                RuleKind::SendIn => send_in.entry(rule.lhs).or_default().push(idx),
            }
        }
        Ok(Engine {
            system,
            options,
            labels,
            label_ids,
            rule_label,
            in_region,
            send_in,
            by_lhs,
        })
    }

    pub fn system(&self) -> &'a PSystem {
        self.system
    }

    pub fn label(&self, id: LabelId) -> &Label {
        &self.labels[id.idx()]
    }

    pub fn label_id(&self, label: &Label) -> Option<LabelId> {
        self.label_ids.get(label).copied()
    }

    pub fn initial_configuration(&self) -> Configuration {
        let mut membranes = vec![None; self.labels.len()];
        let mut stack = vec![(&self.system.structure, None)];
        while let Some((node, parent)) = stack.pop() {
            let id = self.label_ids[&node.label];
            membranes[id.idx()] = Some(Membrane {
                parent,
                contents: self.system.initial.get(&node.label).cloned().unwrap_or_default(),
            });
            stack.extend(node.children.iter().map(|c| (c, Some(id))));
        }
        Configuration {
            membranes,
            root: self.label_ids[&self.system.structure.label],
            environment: Multiset::new(),
        }
    }

    fn collect(&self, cfg: &Configuration) -> (Vec<Slot>, Vec<(LabelId, Vec<Candidate>)>) {
        let mut slots = Vec::new();
        let mut by_primary: std::collections::BTreeMap<LabelId, Vec<Candidate>> = Default::default();
        for (region, membrane) in cfg.membranes() {
            for (&obj, &count) in membrane.contents.iter() {
                let slot = slots.len();
                let mut evolution = Vec::new();
                if let Some(rr) = self.in_region.get(&(region, obj)) {
                    evolution.extend_from_slice(&rr.evolution);
                    for &rule in &rr.blocking {
                        if self.system.rules[rule].kind() == RuleKind::Dissolution && region == cfg.root {
                            continue;
                        }
                        by_primary.entry(region).or_default().push(Candidate {
                            rule,
                            slot,
                            primary: region,
                            source: None,
                        });
                    }
                }
                if let Some(rules) = self.send_in.get(&obj) {
                    for &rule in rules {
                        let target = self.rule_label[rule];
                        let ok = cfg.membrane(target).is_some_and(|t| t.parent == Some(region));
                        if ok {
                            by_primary.entry(target).or_default().push(Candidate {
                                rule,
                                slot,
                                primary: target,
                                source: self.options.block_send_in_source.then_some(region),
                            });
                        }
                    }
                }
                slots.push(Slot {
                    region,
                    count,
                    evolution,
                });
            }
        }
        (slots, by_primary.into_iter().collect())
    }

    /// All maximal assignments for `cfg`, at most `bound` of them. An empty
    /// list means no rule is applicable: the configuration is halting.
    pub fn applicable_assignments(&self, cfg: &Configuration, bound: usize) -> Assignments {
        let (slots, primaries) = self.collect(cfg);
        let anything = !primaries.is_empty() || slots.iter().any(|s| !s.evolution.is_empty());
        if !anything || bound == 0 {
            return Assignments {
                list: Vec::new(),
                truncated: anything,
            };
        }
        let mut capacity = vec![vec![0u64; primaries.len() + 1]; slots.len()];
        for (pi, (_, cands)) in primaries.iter().enumerate().rev() {
            for row in capacity.iter_mut() {
                row[pi] = row[pi + 1];
            }
            let mut seen: Vec<usize> = cands.iter().map(|c| c.slot).collect();
            seen.sort_unstable();
            seen.dedup();
            for s in seen {
                capacity[s][pi] += 1;
            }
        }
        let mut search = Search {
            slots: &slots,
            primaries: &primaries,
            capacity,
            remaining: slots.iter().map(|s| s.count).collect(),
            occupied: vec![false; self.labels.len()],
            chosen: Vec::new(),
            prune: !self.options.block_send_in_source,
            bound,
            out: Vec::new(),
            truncated: false,
            rule_label: &self.rule_label,
        };
        search.blocking(0);
        Assignments {
            list: search.out,
            truncated: search.truncated,
        }
    }

    /// Checks that `assignment` is applicable to `cfg`, respects blocking and
    /// leaves no residual object that some free rule could still consume.
    /// Independent of the enumeration in [`Engine::applicable_assignments`].
    pub fn is_maximal(&self, cfg: &Configuration, assignment: &Assignment) -> Result<bool, StepError> {
        let (consumed, occupied) = self.check(cfg, assignment)?;
        let free = |m: LabelId| !occupied.contains(&m);
        for (region, membrane) in cfg.membranes() {
            for (&obj, &count) in membrane.contents.iter() {
                let used = consumed.get(&(region, obj)).copied().unwrap_or(0);
                if used == count {
                    continue;
                }
                for &idx in self.by_lhs.get(&obj).into_iter().flatten() {
                    let rule = &self.system.rules[idx];
                    let h = self.rule_label[idx];
                    let applicable = match rule.kind() {
                        RuleKind::Evolution => h == region,
                        RuleKind::SendOut => h == region && free(h),
                        RuleKind::Dissolution => h == region && h != cfg.root && free(h),
                        RuleKind::SendIn => {
                            cfg.membrane(h).is_some_and(|t| t.parent == Some(region))
                                && free(h)
                                && (!self.options.block_send_in_source || free(region))
                        }
                    };
                    if applicable {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Consumption per (region, object) and the set of blocked membranes.
    #[allow(clippy::type_complexity)]
    fn check(
        &self,
        cfg: &Configuration,
        assignment: &Assignment,
    ) -> Result<(HashMap<(LabelId, ObjId), u64>, Vec<LabelId>), StepError> {
        let mut consumed: HashMap<(LabelId, ObjId), u64> = HashMap::new();
        let mut occupied: Vec<LabelId> = Vec::new();
        let occupy = |m: LabelId, occupied: &mut Vec<LabelId>| {
            if occupied.contains(&m) {
                Err(StepError::Blocking(m))
            } else {
                occupied.push(m);
                Ok(())
            }
        };
        for app in &assignment.applications {
            let rule = self
                .system
                .rules
                .get(app.rule)
                .ok_or(StepError::UnknownRule(app.rule))?;
            if app.count == 0 {
                return Err(StepError::ZeroCount);
            }
            let h = self.rule_label[app.rule];
            if h != app.membrane {
                return Err(StepError::BadRegion { rule: app.rule });
            }
            let region_ok = match rule.kind() {
                RuleKind::SendIn => {
                    cfg.is_alive(app.region) && cfg.membrane(h).is_some_and(|t| t.parent == Some(app.region))
                }
                _ => h == app.region && cfg.is_alive(h),
            };
            if !region_ok {
                return Err(StepError::BadRegion { rule: app.rule });
            }
            if rule.kind().is_blocking() {
                if app.count != 1 {
                    return Err(StepError::Blocking(h));
                }
                occupy(h, &mut occupied)?;
                if rule.kind() == RuleKind::SendIn && self.options.block_send_in_source {
                    occupy(app.region, &mut occupied)?;
                }
            }
            if rule.kind() == RuleKind::Dissolution && h == cfg.root {
                return Err(StepError::SkinDissolution(app.rule));
            }
            let used = consumed.entry((app.region, rule.lhs)).or_insert(0);
            *used += app.count;
            let have = cfg.membrane(app.region).map_or(0, |m| m.contents.count(&rule.lhs));
            if *used > have {
                return Err(StepError::Insufficient {
                    region: app.region,
                    obj: rule.lhs,
                });
            }
        }
        Ok((consumed, occupied))
    }

    /// Applies `assignment` to `cfg` atomically.
    pub fn step(&self, cfg: &Configuration, assignment: &Assignment) -> Result<StepOutcome, StepError> {
        self.check(cfg, assignment)?;
        let mut next = cfg.clone();
        let mut emitted = Multiset::new();
        let mut dissolving = Vec::new();

        for app in &assignment.applications {
            let rule = &self.system.rules[app.rule];
            let region = next.membranes[app.region.idx()].as_mut().expect("checked");
            region
                .contents
                .remove(&rule.lhs, app.count)
                .expect("consumption checked");
        }
        for app in &assignment.applications {
            let rule = &self.system.rules[app.rule];
            match &rule.action {
                Action::Evolve(w) => {
                    let region = next.membranes[app.region.idx()].as_mut().expect("checked");
                    for (&o, &c) in w.iter() {
                        region.contents.insert(o, c * app.count);
                    }
                }
                Action::SendIn(b) => {
                    let target = next.membranes[app.membrane.idx()].as_mut().expect("checked");
                    target.contents.insert(*b, 1);
                }
                Action::SendOut(b) => match cfg.membrane(app.region).and_then(|m| m.parent) {
                    Some(parent) => next.membranes[parent.idx()]
                        .as_mut()
                        .expect("parent is live")
                        .contents
                        .insert(*b, 1),
                    None => emitted.insert(*b, 1),
                },
                Action::Dissolve(b) => dissolving.push((app.membrane, *b)),
            }
        }

        // Innermost first, so cascades move contents outward one level at a time.
        dissolving.sort_by_key(|(m, _)| (std::cmp::Reverse(cfg.depth_of(*m).unwrap_or(0)), *m));
        let mut dissolved = Vec::with_capacity(dissolving.len());
        for (m, product) in dissolving {
            let membrane = next.membranes[m.idx()].take().expect("dissolving membrane is live");
            let parent = membrane.parent.expect("skin never dissolves");
            let target = next.membranes[parent.idx()].as_mut().expect("parent is live");
            target.contents.union_with(&membrane.contents);
            target.contents.insert(product, 1);
            for slot in next.membranes.iter_mut().flatten() {
                if slot.parent == Some(m) {
                    slot.parent = Some(parent);
                }
            }
            dissolved.push(m);
        }
        next.environment.union_with(&emitted);
        Ok(StepOutcome {
            config: next,
            emitted,
            dissolved,
        })
    }
}

impl Search<'_> {
    fn full(&mut self) -> bool {
        if self.out.len() >= self.bound {
            self.truncated = true;
            true
        } else {
            false
        }
    }

    fn is_free(&self, c: &Candidate) -> bool {
        !self.occupied[c.primary.idx()] && c.source.is_none_or(|s| !self.occupied[s.idx()])
    }

    /// Returns true when the search should stop.
    fn blocking(&mut self, pi: usize) -> bool {
        if pi == self.primaries.len() {
            return self.leaf();
        }
        let (primary, cands) = &self.primaries[pi];
        let primary = *primary;
        for c in cands.iter() {
            if !self.is_free(c) || self.remaining[c.slot] == 0 {
                continue;
            }
            self.remaining[c.slot] -= 1;
            self.occupied[primary.idx()] = true;
            if let Some(s) = c.source {
                self.occupied[s.idx()] = true;
            }
            self.chosen.push(*c);
            let stop = self.blocking(pi + 1);
            self.chosen.pop();
            if let Some(s) = c.source {
                self.occupied[s.idx()] = false;
            }
            self.occupied[primary.idx()] = false;
            self.remaining[c.slot] += 1;
            if stop {
                return true;
            }
        }
        // Leaving the membrane unblocked is only maximal if every candidate's
        // object can still be drained by later choices or by evolution.
        if self.prune && !self.occupied[primary.idx()] {
            let doomed = cands.iter().any(|c| {
                self.slots[c.slot].evolution.is_empty()
                    && self.remaining[c.slot] > self.capacity[c.slot][pi + 1]
            });
            if doomed {
                return false;
            }
        }
        self.blocking(pi + 1)
    }

    fn leaf(&mut self) -> bool {
        for (_, cands) in self.primaries {
            for c in cands {
                if self.is_free(c) && self.remaining[c.slot] > 0 && self.slots[c.slot].evolution.is_empty() {
                    return false;
                }
            }
        }
        let pending: Vec<usize> = (0..self.slots.len())
            .filter(|&s| self.remaining[s] > 0 && !self.slots[s].evolution.is_empty())
            .collect();
        let mut apps: Vec<Application> = self
            .chosen
            .iter()
            .map(|c| Application {
                membrane: c.primary,
                rule: c.rule,
                region: self.slots[c.slot].region,
                count: 1,
            })
            .collect();
        let base = apps.len();
        self.distribute(&pending, 0, &mut apps, base)
    }

    /// Splits the remaining copies of each pending slot over its evolution
    /// rules in every possible way.
    fn distribute(&mut self, pending: &[usize], at: usize, apps: &mut Vec<Application>, base: usize) -> bool {
        if at == pending.len() {
            if self.full() {
                return true;
            }
            self.out.push(Assignment::canonical(apps.clone()));
            return false;
        }
        let slot = &self.slots[pending[at]];
        let n = self.remaining[pending[at]];
        let rules = slot.evolution.clone();
        let region = slot.region;
        self.compose(pending, at, &rules, 0, n, region, apps, base)
    }

    #[allow(clippy::too_many_arguments)]
    fn compose(
        &mut self,
        pending: &[usize],
        at: usize,
        rules: &[usize],
        ri: usize,
        left: u64,
        region: LabelId,
        apps: &mut Vec<Application>,
        base: usize,
    ) -> bool {
        if ri + 1 == rules.len() {
            let pushed = left > 0;
            if pushed {
                apps.push(Application {
                    membrane: self.rule_label[rules[ri]],
                    rule: rules[ri],
                    region,
                    count: left,
                });
            }
            let stop = self.distribute(pending, at + 1, apps, base);
            if pushed {
                apps.pop();
            }
            return stop;
        }
        for take in (0..=left).rev() {
            if take > 0 {
                apps.push(Application {
                    membrane: self.rule_label[rules[ri]],
                    rule: rules[ri],
                    region,
                    count: take,
                });
            }
            let stop = self.compose(pending, at, rules, ri + 1, left - take, region, apps, base);
            if take > 0 {
                apps.pop();
            }
            if stop {
                return true;
            }
        }
        false
    }
}
