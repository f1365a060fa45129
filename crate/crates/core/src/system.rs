//! P systems with active membranes and dissolution: rules, initial structure
//! and static well-formedness checks.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::multiset::Multiset;
use crate::object::{Label, ObjId, ObjectTable, PObject};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Evolution,
    SendIn,
    SendOut,
    Dissolution,
}

impl RuleKind {
    /// Communication and dissolution rules: at most one per membrane per step.
    pub fn is_blocking(self) -> bool {
        !matches!(self, RuleKind::Evolution)
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Evolution => "evolution",
            RuleKind::SendIn => "send-in",
            RuleKind::SendOut => "send-out",
            RuleKind::Dissolution => "dissolution",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    /// `[a -> w]_h`, `w` possibly empty.
    Evolve(Multiset<ObjId>),
    /// `a [ ]_h -> [b]_h`
    SendIn(ObjId),
    /// `[a]_h -> [ ]_h b`
    SendOut(ObjId),
    /// `[a]_h -> b`
    Dissolve(ObjId),
}

/// A rule scoped to the membrane labelled `label`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub label: Label,
    pub lhs: ObjId,
    pub action: Action,
}

impl Rule {
    pub fn evolve(label: Label, lhs: ObjId, rhs: Multiset<ObjId>) -> Self {
        Rule {
            label,
            lhs,
            action: Action::Evolve(rhs),
        }
    }

    pub fn send_in(label: Label, lhs: ObjId, rhs: ObjId) -> Self {
        Rule {
            label,
            lhs,
            action: Action::SendIn(rhs),
        }
    }

    pub fn send_out(label: Label, lhs: ObjId, rhs: ObjId) -> Self {
        Rule {
            label,
            lhs,
            action: Action::SendOut(rhs),
        }
    }

    pub fn dissolve(label: Label, lhs: ObjId, rhs: ObjId) -> Self {
        Rule {
            label,
            lhs,
            action: Action::Dissolve(rhs),
        }
    }

    pub fn kind(&self) -> RuleKind {
        match self.action {
            Action::Evolve(_) => RuleKind::Evolution,
            Action::SendIn(_) => RuleKind::SendIn,
            Action::SendOut(_) => RuleKind::SendOut,
            Action::Dissolve(_) => RuleKind::Dissolution,
        }
    }

    /// Formats the rule with object names resolved through `alphabet`.
    pub fn display<'a>(&'a self, alphabet: &'a ObjectTable) -> impl fmt::Display + 'a {
        RuleDisplay {
            rule: self,
            alphabet,
        }
    }
}

struct RuleDisplay<'a> {
    rule: &'a Rule,
    alphabet: &'a ObjectTable,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.rule.label;
        let a = self.alphabet.get(self.rule.lhs);
        match &self.rule.action {
            Action::Evolve(w) => {
                write!(f, "[{a} -> ")?;
                if w.is_empty() {
                    f.write_str("ε")?;
                }
                for (n, (o, c)) in w.iter().enumerate() {
                    if n > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}", self.alphabet.get(*o))?;
                    if *c > 1 {
                        write!(f, "^{c}")?;
                    }
                }
                write!(f, "]_{h}")
            }
            Action::SendIn(b) => write!(f, "{a} []_{h} -> [{}]_{h}", self.alphabet.get(*b)),
            Action::SendOut(b) => write!(f, "[{a}]_{h} -> []_{h} {}", self.alphabet.get(*b)),
            Action::Dissolve(b) => write!(f, "[{a}]_{h} -> {}", self.alphabet.get(*b)),
        }
    }
}

/// A node of the (unordered, rooted) membrane structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembraneTree {
    pub label: Label,
    pub children: Vec<MembraneTree>,
}

impl MembraneTree {
    pub fn leaf(label: Label) -> Self {
        MembraneTree {
            label,
            children: Vec::new(),
        }
    }

    pub fn with_children(label: Label, children: Vec<MembraneTree>) -> Self {
        MembraneTree { label, children }
    }

    /// Nesting depth; an elementary skin has depth 0.
    pub fn depth(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.depth() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Labels in pre-order.
    pub fn labels(&self) -> Vec<&Label> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(&node.label);
            stack.extend(node.children.iter().rev());
        }
        out
    }

    pub fn membrane_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.membrane_count()).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PSystem {
    pub alphabet: ObjectTable,
    pub labels: Vec<Label>,
    pub structure: MembraneTree,
    pub initial: BTreeMap<Label, Multiset<ObjId>>,
    pub rules: Vec<Rule>,
    pub input_membrane: Label,
}

impl PSystem {
    /// An empty system over `structure`; Λ is taken from the structure and
    /// the root is the input membrane.
    pub fn new(structure: MembraneTree) -> Self {
        let labels = structure.labels().into_iter().cloned().collect();
        let input_membrane = structure.label.clone();
        PSystem {
            alphabet: ObjectTable::new(),
            labels,
            structure,
            initial: BTreeMap::new(),
            rules: Vec::new(),
            input_membrane,
        }
    }

    pub fn intern(&mut self, obj: PObject) -> ObjId {
        self.alphabet.intern(obj)
    }

    pub fn add_initial(&mut self, label: Label, obj: PObject, count: u64) {
        let id = self.intern(obj);
        self.initial.entry(label).or_default().insert(id, count);
    }

    pub fn push_rule(&mut self, rule: Rule) -> usize {
        self.rules.push(rule);
        self.rules.len() - 1
    }

    /// Convenience for building rules from structured objects.
    pub fn evolve(&mut self, label: Label, lhs: PObject, rhs: impl IntoIterator<Item = PObject>) {
        let lhs = self.intern(lhs);
        let rhs = rhs.into_iter().map(|o| self.intern(o)).collect();
        self.push_rule(Rule::evolve(label, lhs, rhs));
    }

    pub fn send_in(&mut self, label: Label, lhs: PObject, rhs: PObject) {
        let (lhs, rhs) = (self.intern(lhs), self.intern(rhs));
        self.push_rule(Rule::send_in(label, lhs, rhs));
    }

    pub fn send_out(&mut self, label: Label, lhs: PObject, rhs: PObject) {
        let (lhs, rhs) = (self.intern(lhs), self.intern(rhs));
        self.push_rule(Rule::send_out(label, lhs, rhs));
    }

    pub fn dissolve(&mut self, label: Label, lhs: PObject, rhs: PObject) {
        let (lhs, rhs) = (self.intern(lhs), self.intern(rhs));
        self.push_rule(Rule::dissolve(label, lhs, rhs));
    }

    /// A copy of this system with `input` added to the input membrane.
    pub fn with_input(&self, input: &Multiset<PObject>) -> PSystem {
        let mut out = self.clone();
        let label = out.input_membrane.clone();
        for (obj, &count) in input.iter() {
            out.add_initial(label.clone(), obj.clone(), count);
        }
        out
    }

    pub fn initial_of(&self, label: &Label) -> Multiset<PObject> {
        self.initial
            .get(label)
            .map(|m| m.map(|id| self.alphabet.get(*id).clone()))
            .unwrap_or_default()
    }
}

/// A static well-formedness problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    DuplicateLabel(Label),
    UndeclaredMembrane(Label),
    DanglingRuleLabel { rule: usize, label: Label },
    SkinDissolution { rule: usize },
    SkinSendIn { rule: usize },
    UnknownObject { rule: usize },
    InitialWithoutMembrane(Label),
    MissingInputMembrane(Label),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateLabel(l) => write!(f, "duplicate label {l}"),
            Diagnostic::UndeclaredMembrane(l) => write!(f, "membrane label {l} is not in the label set"),
            Diagnostic::DanglingRuleLabel { rule, label } => {
                write!(f, "rule {rule} is scoped to undeclared label {label}")
            }
            Diagnostic::SkinDissolution { rule } => {
                write!(f, "skin dissolution: rule {rule} dissolves the outermost membrane")
            }
            Diagnostic::SkinSendIn { rule } => {
                write!(f, "rule {rule} sends into the skin from the environment")
            }
            Diagnostic::UnknownObject { rule } => write!(f, "rule {rule} uses an object outside the alphabet"),
            Diagnostic::InitialWithoutMembrane(l) => {
                write!(f, "initial multiset given for {l}, which has no membrane")
            }
            Diagnostic::MissingInputMembrane(l) => write!(f, "input membrane {l} does not exist"),
        }
    }
}

/// Checks label uniqueness, rule scoping and the initial structure. An empty
/// result means the system can be executed.
pub fn validate_system(system: &PSystem) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    let mut declared = HashSet::new();
    for label in &system.labels {
        if !declared.insert(label) {
            diags.push(Diagnostic::DuplicateLabel(label.clone()));
        }
    }

    let mut present = HashSet::new();
    for label in system.structure.labels() {
        if !present.insert(label) {
            // Already reported if Λ itself repeats the label.
            if !diags.contains(&Diagnostic::DuplicateLabel(label.clone())) {
                diags.push(Diagnostic::DuplicateLabel(label.clone()));
            }
        }
        if !declared.contains(label) {
            diags.push(Diagnostic::UndeclaredMembrane(label.clone()));
        }
    }

    let root = &system.structure.label;
    let n_objects = system.alphabet.len() as u32;
    for (idx, rule) in system.rules.iter().enumerate() {
        if !declared.contains(&rule.label) {
            diags.push(Diagnostic::DanglingRuleLabel {
                rule: idx,
                label: rule.label.clone(),
            });
        }
        if &rule.label == root {
            match rule.kind() {
                RuleKind::Dissolution => diags.push(Diagnostic::SkinDissolution { rule: idx }),
                RuleKind::SendIn => diags.push(Diagnostic::SkinSendIn { rule: idx }),
                _ => {}
            }
        }
        let mut ids = vec![rule.lhs];
        match &rule.action {
            Action::Evolve(w) => ids.extend(w.iter().map(|(o, _)| *o)),
            Action::SendIn(b) | Action::SendOut(b) | Action::Dissolve(b) => ids.push(*b),
        }
        if ids.iter().any(|o| o.0 >= n_objects) {
            diags.push(Diagnostic::UnknownObject { rule: idx });
        }
    }

    for label in system.initial.keys() {
        if !present.contains(label) {
            diags.push(Diagnostic::InitialWithoutMembrane(label.clone()));
        }
    }
    if !present.contains(&system.input_membrane) {
        diags.push(Diagnostic::MissingInputMembrane(system.input_membrane.clone()));
    }
    diags
}
