//! Objects and membrane labels, with their textual spelling.
//!
//! Objects of a compiled system are structured: a tape object `a[i,j,k]`
//! records the symbol `a` of cell `i` at machine step `j` together with the
//! phase counter `k`; a state object `q[i,j,k]` may additionally carry the
//! symbol it read (`q[i,j,k;a]`) or, for nondeterministic machines, the
//! transition it chose (`q[i,j,k;(r,b,t)]`).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Outcome of a recogniser computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn from_accepting(accepting: bool) -> Self {
        if accepting {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    /// `yes` or `no`.
    pub fn word(self) -> &'static str {
        match self {
            Verdict::Accept => "yes",
            Verdict::Reject => "no",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
        })
    }
}

/// Extra information carried by a state object.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    None,
    /// The symbol found under the head.
    Read(String),
    /// A nondeterministic choice: next state, written symbol, target cell.
    Choice {
        next: String,
        write: String,
        target: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PObject {
    Tape {
        sym: String,
        i: u32,
        j: u32,
        k: u32,
    },
    State {
        q: String,
        i: u32,
        j: u32,
        k: u32,
        tag: Tag,
    },
    InitTape {
        sym: String,
        i: u32,
    },
    InitState {
        q: String,
    },
    Timer {
        countdown: u32,
        verdict: Verdict,
    },
    Verdict(Verdict),
    Opaque(String),
}

impl PObject {
    pub fn opaque(name: impl Into<String>) -> Self {
        PObject::Opaque(name.into())
    }

    pub fn tape(sym: &str, i: u32, j: u32, k: u32) -> Self {
        PObject::Tape {
            sym: sym.to_owned(),
            i,
            j,
            k,
        }
    }

    pub fn state(q: &str, i: u32, j: u32, k: u32, tag: Tag) -> Self {
        PObject::State {
            q: q.to_owned(),
            i,
            j,
            k,
            tag,
        }
    }

    pub fn is_verdict(&self) -> bool {
        matches!(self, PObject::Verdict(_))
    }
}

impl fmt::Display for PObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PObject::Tape { sym, i, j, k } => write!(f, "{sym}[{i},{j},{k}]"),
            PObject::State { q, i, j, k, tag } => {
                write!(f, "{q}[{i},{j},{k}")?;
                match tag {
                    Tag::None => {}
                    Tag::Read(a) => write!(f, ";{a}")?,
                    Tag::Choice {
                        next,
                        write,
                        target,
                    } => write!(f, ";({next},{write},{target})")?,
                }
                f.write_str("]")
            }
            PObject::InitTape { sym, i } => write!(f, "{sym}[{i}]"),
            PObject::InitState { q } => write!(f, "{q}^I"),
            PObject::Timer { countdown, verdict } => {
                write!(f, "T[{countdown};{}]", verdict.word())
            }
            PObject::Verdict(v) => f.write_str(v.word()),
            PObject::Opaque(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpellingError {
    #[error("empty spelling")]
    Empty,
    #[error("malformed object spelling `{0}`")]
    Malformed(String),
    #[error("`{0}` is neither a declared tape symbol nor a declared state")]
    UnknownName(String),
    #[error("malformed label spelling `{0}`")]
    BadLabel(String),
}

/// Names needed to tell tape objects `a[i,j,k]` from state objects `q[i,j,k]`.
#[derive(Debug, Clone, Default)]
pub struct NameScope {
    pub symbols: HashSet<String>,
    pub states: HashSet<String>,
}

impl NameScope {
    pub fn new<'a>(
        symbols: impl IntoIterator<Item = &'a str>,
        states: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        NameScope {
            symbols: symbols.into_iter().map(str::to_owned).collect(),
            states: states.into_iter().map(str::to_owned).collect(),
        }
    }

    pub fn parse_object(&self, text: &str) -> Result<PObject, SpellingError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(SpellingError::Empty);
        }
        let malformed = || SpellingError::Malformed(text.to_owned());
        match text {
            "yes" => return Ok(PObject::Verdict(Verdict::Accept)),
            "no" => return Ok(PObject::Verdict(Verdict::Reject)),
            _ => {}
        }
        if let Some(q) = text.strip_suffix("^I") {
            if !is_plain_name(q) {
                return Err(malformed());
            }
            return Ok(PObject::InitState { q: q.to_owned() });
        }
        let Some(open) = text.find('[') else {
            if !is_plain_name(text) {
                return Err(malformed());
            }
            return Ok(PObject::Opaque(text.to_owned()));
        };
        let name = &text[..open];
        let inner = text[open + 1..].strip_suffix(']').ok_or_else(malformed)?;
        if !is_plain_name(name) {
            return Err(malformed());
        }
        let (nums, tag) = match inner.split_once(';') {
            Some((nums, tag)) => (nums, Some(tag)),
            None => (inner, None),
        };
        let nums: Vec<u32> = nums
            .split(',')
            .map(|s| s.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| malformed())?;

        match (nums.as_slice(), tag) {
            (&[c], Some(v)) if name == "T" => {
                let verdict = match v {
                    "yes" => Verdict::Accept,
                    "no" => Verdict::Reject,
                    _ => return Err(malformed()),
                };
                Ok(PObject::Timer {
                    countdown: c,
                    verdict,
                })
            }
            (&[i], None) => Ok(PObject::InitTape {
                sym: name.to_owned(),
                i,
            }),
            (&[i, j, k], None) if self.symbols.contains(name) => Ok(PObject::tape(name, i, j, k)),
            (&[i, j, k], tag) if self.states.contains(name) => {
                let tag = match tag {
                    None => Tag::None,
                    Some(t) => parse_tag(t).ok_or_else(malformed)?,
                };
                Ok(PObject::state(name, i, j, k, tag))
            }
            (&[_, _, _], _) => Err(SpellingError::UnknownName(name.to_owned())),
            _ => Err(malformed()),
        }
    }
}

fn parse_tag(text: &str) -> Option<Tag> {
    if let Some(body) = text.strip_prefix('(') {
        let body = body.strip_suffix(')')?;
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        let [next, write, target] = parts.as_slice() else {
            return None;
        };
        if !is_plain_name(next) || !is_plain_name(write) {
            return None;
        }
        Some(Tag::Choice {
            next: (*next).to_owned(),
            write: (*write).to_owned(),
            target: target.parse().ok()?,
        })
    } else if is_plain_name(text) {
        Some(Tag::Read(text.to_owned()))
    } else {
        None
    }
}

/// Names usable for symbols, states and opaque objects: non-empty and free of
/// the punctuation used by the spelling grammar.
pub fn is_plain_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || "[](),;^'\"#".contains(c))
}

/// A membrane label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Skin,
    /// Cell `i` of the tape at machine step `j`.
    Cell(u32, u32),
    /// Helper membrane for the transition out of step `j`.
    Prime(u32, u32),
    Opaque(String),
}

impl Label {
    pub fn opaque(name: impl Into<String>) -> Self {
        Label::Opaque(name.into())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Skin => f.write_str("0"),
            Label::Cell(i, j) => write!(f, "({i},{j})"),
            Label::Prime(i, j) => write!(f, "({i},{j})'"),
            Label::Opaque(name) => f.write_str(name),
        }
    }
}

impl FromStr for Label {
    type Err = SpellingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" {
            return Ok(Label::Skin);
        }
        let bad = || SpellingError::BadLabel(s.to_owned());
        if let Some(rest) = s.strip_prefix('(') {
            let (body, prime) = match rest.strip_suffix(")'") {
                Some(body) => (body, true),
                None => (rest.strip_suffix(')').ok_or_else(bad)?, false),
            };
            let (i, j) = body.split_once(',').ok_or_else(bad)?;
            let i = i.trim().parse().map_err(|_| bad())?;
            let j = j.trim().parse().map_err(|_| bad())?;
            return Ok(if prime {
                Label::Prime(i, j)
            } else {
                Label::Cell(i, j)
            });
        }
        if is_plain_name(s) {
            Ok(Label::Opaque(s.to_owned()))
        } else {
            Err(bad())
        }
    }
}

/// Interned object identifier, local to one [`ObjectTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjId(pub u32);

/// The alphabet of a system: interned objects in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObjectTable {
    objects: IndexSet<PObject>,
}

impl ObjectTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, obj: PObject) -> ObjId {
        let (idx, _) = self.objects.insert_full(obj);
        ObjId(idx as u32)
    }

    pub fn lookup(&self, obj: &PObject) -> Option<ObjId> {
        self.objects.get_index_of(obj).map(|i| ObjId(i as u32))
    }

    pub fn get(&self, id: ObjId) -> &PObject {
        &self.objects[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObjId, &PObject)> {
        self.objects
            .iter()
            .enumerate()
            .map(|(i, o)| (ObjId(i as u32), o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scope() -> NameScope {
        NameScope::new(["_", "a", "b"], ["q0", "q1"])
    }

    #[test]
    fn spelling_examples() {
        let s = scope();
        assert_eq!(s.parse_object("a[1,2,3]").unwrap(), PObject::tape("a", 1, 2, 3));
        assert_eq!(
            s.parse_object("q0[0,0,4;b]").unwrap(),
            PObject::state("q0", 0, 0, 4, Tag::Read("b".into()))
        );
        assert_eq!(s.parse_object("b[4]").unwrap().to_string(), "b[4]");
        assert_eq!(s.parse_object("q0^I").unwrap(), PObject::InitState { q: "q0".into() });
        assert_eq!(s.parse_object("yes").unwrap(), PObject::Verdict(Verdict::Accept));
        assert_eq!(
            s.parse_object("T[7;no]").unwrap(),
            PObject::Timer {
                countdown: 7,
                verdict: Verdict::Reject
            }
        );
        assert!(matches!(
            s.parse_object("zz[1,2,3]"),
            Err(SpellingError::UnknownName(_))
        ));
        assert!(s.parse_object("a[1,2").is_err());
    }

    #[test]
    fn label_spelling() {
        for (text, label) in [
            ("0", Label::Skin),
            ("(3,4)", Label::Cell(3, 4)),
            ("(3,4)'", Label::Prime(3, 4)),
            ("h", Label::opaque("h")),
        ] {
            assert_eq!(text.parse::<Label>().unwrap(), label);
            assert_eq!(label.to_string(), text);
        }
        assert!("(1,)".parse::<Label>().is_err());
    }

    fn arb_object() -> impl Strategy<Value = PObject> {
        let sym = prop_oneof![Just("_"), Just("a"), Just("b")];
        let st = prop_oneof![Just("q0"), Just("q1")];
        prop_oneof![
            (sym.clone(), 0u32..20, 0u32..20, 0u32..12).prop_map(|(a, i, j, k)| PObject::tape(a, i, j, k)),
            (st.clone(), 0u32..20, 0u32..20, 0u32..12, prop_oneof![
                Just(Tag::None),
                sym.clone().prop_map(|a| Tag::Read(a.into())),
                (st.clone(), sym.clone(), 0u32..20).prop_map(|(r, b, t)| Tag::Choice {
                    next: r.into(),
                    write: b.into(),
                    target: t
                }),
            ])
                .prop_map(|(q, i, j, k, tag)| PObject::state(q, i, j, k, tag)),
            (sym, 0u32..20).prop_map(|(a, i)| PObject::InitTape { sym: a.into(), i }),
            st.prop_map(|q| PObject::InitState { q: q.into() }),
            (0u32..100, any::<bool>()).prop_map(|(c, v)| PObject::Timer {
                countdown: c,
                verdict: Verdict::from_accepting(v)
            }),
            any::<bool>().prop_map(|v| PObject::Verdict(Verdict::from_accepting(v))),
            "[xyz][a-z0-9_]{0,4}".prop_map(PObject::Opaque),
        ]
    }

    proptest! {
        #[test]
        fn spelling_round_trips(obj in arb_object()) {
            let text = obj.to_string();
            prop_assert_eq!(scope().parse_object(&text).unwrap(), obj);
        }
    }
}
