//! Fake news detection from news text and from the language of the users
//! who spread it.
//!
//! The crate covers the whole pipeline: corpus preprocessing ([`corpus`]),
//! a small differentiable numerical core ([`nn`]), the gated dual-module
//! convolutional classifier ([`model`]), training and evaluation
//! ([`harness`]), significance statistics ([`stats`]), filter attribution
//! and linguistic-category analysis ([`interpret`]), and the echo-chamber
//! analysis over the retweet graph ([`echograph`]). [`commands`] wires these
//! into the steps exposed by the `langspread` binary.

pub mod commands;
pub mod config;
pub mod corpus;
pub mod echograph;
pub mod error;
pub mod harness;
pub mod interpret;
pub mod model;
pub mod nn;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/interpretation.md")]
    mod interpretation {}
    #[doc = include_str!("../../../book/src/echo-chambers.md")]
    mod echo_chambers {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
