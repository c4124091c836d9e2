//! Core building blocks for the hatewatch moderation stack.
//!
//! The crate is split along the data path: [`corpus`] ingests and splits
//! labeled text, [`textnorm`] turns raw social text into tokens,
//! [`features`] builds TF-IDF vectors, [`linear`] trains and evaluates the
//! multinomial logistic regression, and [`langid`] routes incoming text to a
//! per-language model. [`synth`] generates stand-in corpora.
//!
//! Data-parallel loops go through [`par`], which runs on rayon when the
//! `parallel` feature is enabled and falls back to plain iteration otherwise.

pub mod corpus;
pub mod error;
pub mod features;
pub mod label;
pub mod langid;
pub mod lexicon;
pub mod linear;
pub mod par;
pub mod synth;
pub mod textnorm;

pub use error::{Error, Result};
pub use label::{Label, Language};
pub use lexicon::LexiconSet;
pub use par::ExecMode;
