//! Finite-dimensional operator-algebra workbench.
//!
//! Symbolic Pauli and qudit algebra ([`pauli`], [`expr`]) sits beside a dense
//! matrix backend ([`dense`]). On top of both live states and the GNS
//! construction ([`states`], [`gns`]), composite systems ([`composite`]),
//! measurement ([`measurement`]), operations and channels ([`channels`]),
//! stabilizer codes ([`stabilizer`]) and classical shadows ([`shadows`]).
//! [`cli`] exposes all of it as JSON-emitting commands.

pub mod channels;
pub mod cli;
pub mod composite;
pub mod dense;
pub mod error;
pub mod expr;
pub mod gns;
pub mod measurement;
pub mod pauli;
pub mod random;
pub mod shadows;
pub mod stabilizer;
pub mod states;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/pauli.md")]
    mod pauli {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/composite.md")]
    mod composite {}
    #[doc = include_str!("../../../book/src/measurement.md")]
    mod measurement {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/stabilizer.md")]
    mod stabilizer {}
    #[doc = include_str!("../../../book/src/shadows.md")]
    mod shadows {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
