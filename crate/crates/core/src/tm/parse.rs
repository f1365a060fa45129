//! Line-oriented machine description:
//!
//! ```text
//! # comment
//! states: q0 q1 qa
//! alphabet: _ a b        # first symbol is the blank
//! start: q0
//! accept: qa
//! poly: 1 2              # p(n) = 1*n + 2
//! delta: q0 a -> q1 b R
//! ```

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Move, StateId, SymId, TmSpec, Transition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(text: &str, offset: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &text[s..i],
                    col: offset + s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &text[s..],
            col: offset + s + 1,
        });
    }
    out
}

struct RawDelta<'a> {
    line: usize,
    from: Token<'a>,
    read: Token<'a>,
    next: Token<'a>,
    write: Token<'a>,
    moves: Move,
}

pub fn parse_tm(source: &str) -> Result<TmSpec, ParseError> {
    let err = |line: usize, col: usize, message: String| ParseError { line, col, message };
    let mut states: Option<(usize, Vec<Token<'_>>)> = None;
    let mut alphabet: Option<(usize, Vec<Token<'_>>)> = None;
    let mut start: Option<(usize, Token<'_>)> = None;
    let mut accept: Vec<(usize, Token<'_>)> = Vec::new();
    let mut poly: Option<Vec<u64>> = None;
    let mut deltas = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(colon) = content.find(':') else {
            let col = content.len() - content.trim_start().len() + 1;
            return Err(err(line, col, "expected `key: value`".into()));
        };
        let key = content[..colon].trim();
        let key_col = content.len() - content.trim_start().len() + 1;
        let rest = &content[colon + 1..];
        let toks = tokens(rest, colon + 1);
        let once = |seen: bool| {
            if seen {
                Err(err(line, key_col, format!("`{key}` given twice")))
            } else {
                Ok(())
            }
        };
        match key {
            "states" => {
                once(states.is_some())?;
                states = Some((line, toks));
            }
            "alphabet" => {
                once(alphabet.is_some())?;
                alphabet = Some((line, toks));
            }
            "start" => {
                once(start.is_some())?;
                let mut toks = toks.into_iter();
                let tok = toks
                    .next()
                    .ok_or_else(|| err(line, colon + 2, "missing start state".into()))?;
                if let Some(extra) = toks.next() {
                    return Err(err(line, extra.col, "only one start state".into()));
                }
                start = Some((line, tok));
            }
            "accept" => accept.extend(toks.into_iter().map(|t| (line, t))),
            "poly" => {
                once(poly.is_some())?;
                if toks.is_empty() {
                    return Err(err(line, colon + 2, "missing coefficients".into()));
                }
                let coeffs = toks
                    .iter()
                    .map(|t| {
                        t.text
                            .parse::<u64>()
                            .map_err(|_| err(line, t.col, format!("bad coefficient `{}`", t.text)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                poly = Some(coeffs);
            }
            "delta" => {
                let arrow = toks.iter().position(|t| t.text == "->");
                let shape_ok = arrow == Some(2) && toks.len() == 6;
                if !shape_ok {
                    let col = toks.first().map_or(colon + 2, |t| t.col);
                    return Err(err(line, col, "expected `delta: q a -> r b L|R`".into()));
                }
                let mut it = toks.into_iter();
                let from = it.next().expect("6 tokens");
                let read = it.next().expect("6 tokens");
                it.next();
                let next = it.next().expect("6 tokens");
                let write = it.next().expect("6 tokens");
                let dir = it.next().expect("6 tokens");
                let moves = match dir.text {
                    "R" => Move::Right,
                    "L" => Move::Left,
                    other => return Err(err(line, dir.col, format!("direction must be L or R, got `{other}`"))),
                };
                deltas.push(RawDelta {
                    line,
                    from,
                    read,
                    next,
                    write,
                    moves,
                });
            }
            other => return Err(err(line, key_col, format!("unknown key `{other}`"))),
        }
    }

    let end = source.lines().count() + 1;
    let (_, state_toks) = states.ok_or_else(|| err(end, 1, "missing `states:`".into()))?;
    let (_, alpha_toks) = alphabet.ok_or_else(|| err(end, 1, "missing `alphabet:`".into()))?;
    let (start_line, start_tok) = start.ok_or_else(|| err(end, 1, "missing `start:`".into()))?;
    let poly = poly.ok_or_else(|| err(end, 1, "missing `poly:`".into()))?;

    let state_names: Vec<String> = state_toks.iter().map(|t| t.text.to_owned()).collect();
    let symbol_names: Vec<String> = alpha_toks.iter().map(|t| t.text.to_owned()).collect();
    let state = |line: usize, t: &Token<'_>| {
        state_names
            .iter()
            .position(|s| s == t.text)
            .map(StateId)
            .ok_or_else(|| err(line, t.col, format!("undeclared state `{}`", t.text)))
    };
    let symbol = |line: usize, t: &Token<'_>| {
        symbol_names
            .iter()
            .position(|s| s == t.text)
            .map(SymId)
            .ok_or_else(|| err(line, t.col, format!("undeclared symbol `{}`", t.text)))
    };

    let start = state(start_line, &start_tok)?;
    let accept = accept
        .iter()
        .map(|(line, t)| state(*line, t))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let mut delta: BTreeMap<(StateId, SymId), Vec<Transition>> = BTreeMap::new();
    for d in &deltas {
        let key = (state(d.line, &d.from)?, symbol(d.line, &d.read)?);
        let t = Transition {
            next: state(d.line, &d.next)?,
            write: symbol(d.line, &d.write)?,
            moves: d.moves,
        };
        let entry = delta.entry(key).or_default();
        if entry.contains(&t) {
            return Err(err(d.line, d.from.col, "duplicate transition".into()));
        }
        entry.push(t);
    }
    Ok(TmSpec {
        states: state_names,
        alphabet: symbol_names,
        start,
        accept,
        delta,
        poly,
    })
}
