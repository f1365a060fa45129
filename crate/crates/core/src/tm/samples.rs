//! Small machines used throughout the tests and the guide.

use super::{parse_tm, TmSpec};

/// Flips `a <-> b` while sweeping right over the input, then halts in the
/// accepting state `q1` on the first blank. `p(n) = n + 1`.
pub const SWEEPER: &str = "\
# flip a <-> b left to right, halt on the blank after the input
states: q0 q1
alphabet: _ a b
start: q0
accept: q1
poly: 1 1
delta: q0 _ -> q1 _ R
delta: q1 a -> q1 b R
delta: q1 b -> q1 a R
";

/// Halts at once in an accepting state.
pub const IMMEDIATE_ACCEPT: &str = "\
states: qa
alphabet: _ a b
start: qa
accept: qa
poly: 1 0
";

pub fn sweeper() -> TmSpec {
    parse_tm(SWEEPER).expect("sample parses")
}

pub fn immediate_accept() -> TmSpec {
    parse_tm(IMMEDIATE_ACCEPT).expect("sample parses")
}

/// Text of a machine that guesses `pattern.len()` bits into cells `1..=k`,
/// then walks back checking them against `pattern`, accepting iff every
/// guessed bit matches. Runs on the empty input in `2k + 3` steps.
pub fn bit_guesser_text(pattern: &[bool]) -> String {
    let k = pattern.len();
    let mut states: Vec<String> = (0..=k + 1).map(|t| format!("g{t}")).collect();
    states.extend((0..=k).map(|t| format!("c{t}")));
    states.push("acc".into());
    let mut text = format!(
        "states: {}\nalphabet: _ 0 1\nstart: g0\naccept: acc\npoly: 1 {}\n",
        states.join(" "),
        2 * k + 3
    );
    text.push_str("delta: g0 _ -> g1 _ R\n");
    for t in 1..=k {
        for b in ["0", "1"] {
            text.push_str(&format!("delta: g{t} _ -> g{} {b} R\n", t + 1));
        }
    }
    text.push_str(&format!("delta: g{} _ -> c{k} _ L\n", k + 1));
    for t in (1..=k).rev() {
        let want = if pattern[t - 1] { "1" } else { "0" };
        text.push_str(&format!("delta: c{t} {want} -> c{} {want} L\n", t - 1));
    }
    text.push_str("delta: c0 _ -> acc _ R\n");
    text
}

pub fn bit_guesser(pattern: &[bool]) -> TmSpec {
    parse_tm(&bit_guesser_text(pattern)).expect("generated guesser parses")
}

/// Guesses one bit and then demands it be both 0 and 1: no branch accepts.
pub const CONTRADICTION: &str = "\
states: g0 g1 g2 c1 c2 c3 acc
alphabet: _ 0 1
start: g0
accept: acc
poly: 1 6
delta: g0 _ -> g1 _ R
delta: g1 _ -> g2 0 R
delta: g1 _ -> g2 1 R
delta: g2 _ -> c1 _ L
delta: c1 0 -> c2 0 R
delta: c2 _ -> c3 _ L
delta: c3 1 -> acc 1 R
";

pub fn contradiction() -> TmSpec {
    parse_tm(CONTRADICTION).expect("sample parses")
}
