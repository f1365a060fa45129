//! Shallow P systems with active membranes and dissolution, and a compiler
//! that turns polynomial-time Turing machines into them.
//!
//! The crate is organised bottom-up:
//!
//! * [`multiset`], [`object`] and [`system`] describe P systems: objects,
//!   labels, rules and the initial membrane structure.
//! * [`engine`] executes them under maximally parallel semantics with
//!   blocking communication/dissolution rules.
//! * [`tm`] is a direct Turing machine executor used as the ground truth.
//! * [`compiler`] builds the depth-1 system `Π_n` for a machine and input
//!   length, and the input multiset `w_x` for a concrete input.
//! * [`verify`] decodes configurations back into machine configurations and
//!   checks the two executions agree.
//!
//! The guide under `book/` walks through the construction; its code snippets
//! are compiled as doctests of this crate.

pub mod compiler;
pub mod dump;
pub mod engine;
pub mod multiset;
pub mod object;
pub mod system;
pub mod tm;
pub mod verify;

pub use compiler::{assemble, build_family_member, encode_input, CompilerOutput};
pub use engine::{Configuration, Engine, RunPolicy, RunResult, Verdict};
pub use multiset::Multiset;
pub use object::{Label, ObjId, PObject};
pub use system::{PSystem, Rule};
pub use tm::TmSpec;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/p-systems.md")]
    mod p_systems {}
    #[doc = include_str!("../../../book/src/turing-machines.md")]
    mod turing_machines {}
    #[doc = include_str!("../../../book/src/construction.md")]
    mod construction {}
    #[doc = include_str!("../../../book/src/schedule.md")]
    mod schedule {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
