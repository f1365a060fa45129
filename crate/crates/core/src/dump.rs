//! JSON form of a [`PSystem`], optionally with compiler metadata.
//!
//! ```json
//! {
//!   "alphabet": ["q0^I", "_[0]", ...],
//!   "labels": ["0", "(0,0)", ...],
//!   "structure": ["0", [["(0,0)", []], ...]],
//!   "initial": { "0": [["q0^I", 1], ...] },
//!   "rules": [{ "kind": "send-in", "label": "(0,0)", "lhs": "_[0]", "rhs": ["_[0,0,0]"] }, ...],
//!   "input_membrane": "0",
//!   "tape_symbols": ["_", "a", "b"],
//!   "states": ["q0", "q1"],
//!   "metadata": { "n": 2, "p": 3, ... }
//! }
//! ```
//!
//! `tape_symbols` and `states` disambiguate `x[i,j,k]`. Output is a pure
//! function of the system, so equal systems dump to identical bytes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::{CompilerOutput, Metadata};
use crate::multiset::Multiset;
use crate::object::{Label, NameScope, PObject, SpellingError, Tag};
use crate::system::{Action, MembraneTree, PSystem, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node(pub String, pub Vec<Node>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDump {
    pub kind: String,
    pub label: String,
    pub lhs: String,
    pub rhs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dump {
    pub alphabet: Vec<String>,
    pub labels: Vec<String>,
    pub structure: Node,
    pub initial: BTreeMap<String, Vec<(String, u64)>>,
    pub rules: Vec<RuleDump>,
    pub input_membrane: String,
    #[serde(default)]
    pub tape_symbols: Vec<String>,
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {source}")]
    Spelling {
        context: String,
        source: SpellingError,
    },
    #[error("rule {rule}: unknown kind `{kind}`")]
    BadKind { rule: usize, kind: String },
    #[error("rule {rule}: a {kind} rule needs exactly one right-hand object, got {got}")]
    RhsArity { rule: usize, kind: String, got: usize },
    #[error("{context}: object `{object}` is not in the alphabet")]
    UndeclaredObject { context: String, object: String },
}

/// Tape symbol and state names occurring in the system's objects.
fn names_of(system: &PSystem) -> (Vec<String>, Vec<String>) {
    let mut symbols = BTreeSet::new();
    let mut states = BTreeSet::new();
    for (_, obj) in system.alphabet.iter() {
        match obj {
            PObject::Tape { sym, .. } | PObject::InitTape { sym, .. } => {
                symbols.insert(sym.clone());
            }
            PObject::State { q, tag, .. } => {
                states.insert(q.clone());
                match tag {
                    Tag::None => {}
                    Tag::Read(a) => {
                        symbols.insert(a.clone());
                    }
                    Tag::Choice { next, write, .. } => {
                        states.insert(next.clone());
                        symbols.insert(write.clone());
                    }
                }
            }
            PObject::InitState { q } => {
                states.insert(q.clone());
            }
            _ => {}
        }
    }
    (symbols.into_iter().collect(), states.into_iter().collect())
}

fn node(tree: &MembraneTree) -> Node {
    Node(tree.label.to_string(), tree.children.iter().map(node).collect())
}

pub fn to_dump(system: &PSystem, metadata: Option<&Metadata>) -> Dump {
    let spell = |id| system.alphabet.get(id).to_string();
    let (tape_symbols, states) = names_of(system);
    Dump {
        alphabet: system.alphabet.iter().map(|(_, o)| o.to_string()).collect(),
        labels: system.labels.iter().map(Label::to_string).collect(),
        structure: node(&system.structure),
        initial: system
            .initial
            .iter()
            .filter(|(_, m)| !m.is_empty())
            .map(|(l, m)| (l.to_string(), m.iter().map(|(&id, &c)| (spell(id), c)).collect()))
            .collect(),
        rules: system
            .rules
            .iter()
            .map(|r| RuleDump {
                kind: r.kind().name().to_owned(),
                label: r.label.to_string(),
                lhs: spell(r.lhs),
                rhs: match &r.action {
                    Action::Evolve(w) => w
                        .iter()
                        .flat_map(|(&id, &c)| std::iter::repeat_n(spell(id), c as usize))
                        .collect(),
                    Action::SendIn(b) | Action::SendOut(b) | Action::Dissolve(b) => vec![spell(*b)],
                },
            })
            .collect(),
        input_membrane: system.input_membrane.to_string(),
        tape_symbols,
        states,
        metadata: metadata.cloned(),
    }
}

pub fn to_json(system: &PSystem, metadata: Option<&Metadata>) -> String {
    let mut out = serde_json::to_string_pretty(&to_dump(system, metadata)).expect("dump serialises");
    out.push('\n');
    out
}

/// The dump of a compiled family member, metadata included.
pub fn member_json(member: &CompilerOutput) -> String {
    to_json(&member.system, Some(&member.metadata))
}

fn label(text: &str, context: &str) -> Result<Label, DumpError> {
    text.parse().map_err(|source| DumpError::Spelling {
        context: context.to_owned(),
        source,
    })
}

fn tree(node: &Node) -> Result<MembraneTree, DumpError> {
    Ok(MembraneTree::with_children(
        label(&node.0, "structure")?,
        node.1.iter().map(tree).collect::<Result<_, _>>()?,
    ))
}

pub fn from_dump(dump: &Dump) -> Result<(PSystem, Option<Metadata>), DumpError> {
    let scope = NameScope::new(
        dump.tape_symbols.iter().map(String::as_str),
        dump.states.iter().map(String::as_str),
    );
    let mut system = PSystem::new(tree(&dump.structure)?);
    system.labels = dump
        .labels
        .iter()
        .map(|l| label(l, "labels"))
        .collect::<Result<_, _>>()?;
    system.input_membrane = label(&dump.input_membrane, "input_membrane")?;
    for text in &dump.alphabet {
        let obj = scope.parse_object(text).map_err(|source| DumpError::Spelling {
            context: "alphabet".into(),
            source,
        })?;
        system.intern(obj);
    }
    let lookup = |text: &str, context: &str| {
        let undeclared = || DumpError::UndeclaredObject {
            context: context.to_owned(),
            object: text.to_owned(),
        };
        let obj = scope.parse_object(text).map_err(|_| undeclared())?;
        system.alphabet.lookup(&obj).ok_or_else(undeclared)
    };
    let mut initial = BTreeMap::new();
    for (l, objs) in &dump.initial {
        let context = format!("initial {l}");
        let mut m = Multiset::new();
        for (text, count) in objs {
            m.insert(lookup(text, &context)?, *count);
        }
        initial.insert(label(l, &context)?, m);
    }
    let mut rules = Vec::with_capacity(dump.rules.len());
    for (idx, r) in dump.rules.iter().enumerate() {
        let context = format!("rule {idx}");
        let h = label(&r.label, &context)?;
        let lhs = lookup(&r.lhs, &context)?;
        let rhs = r
            .rhs
            .iter()
            .map(|t| lookup(t, &context))
            .collect::<Result<Vec<_>, _>>()?;
        let one = || match rhs.as_slice() {
            [b] => Ok(*b),
            _ => Err(DumpError::RhsArity {
                rule: idx,
                kind: r.kind.clone(),
                got: rhs.len(),
            }),
        };
        rules.push(match r.kind.as_str() {
            "evolution" => Rule::evolve(h, lhs, rhs.iter().copied().collect()),
            "send-in" => Rule::send_in(h, lhs, one()?),
            "send-out" => Rule::send_out(h, lhs, one()?),
            "dissolution" => Rule::dissolve(h, lhs, one()?),
            other => {
                return Err(DumpError::BadKind {
                    rule: idx,
                    kind: other.to_owned(),
                })
            }
        });
    }
    system.initial = initial;
    system.rules = rules;
    Ok((system, dump.metadata.clone()))
}

pub fn from_json(text: &str) -> Result<(PSystem, Option<Metadata>), DumpError> {
    from_dump(&serde_json::from_str(text)?)
}
