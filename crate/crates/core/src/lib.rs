//! Tooling for aspect-based sentiment analysis pipelines.
//!
//! The crate covers the non-neural parts of an aspect term extraction (ATE)
//! and sentiment orientation extraction (SOE) system:
//!
//! * [`corpus`]: ingestion of row-per-aspect delimited files, grouping into
//!   reviews, dataset statistics.
//! * [`tagging`]: offset-preserving tokenizer and the span/BIO codec.
//! * [`splits`]: leakage-free train/test splits (random, polarity
//!   stratified, polarity and aspect stratified).
//! * [`soe`]: prompt and sentence-pair construction, completion parsing.
//! * [`augment`]: aspect category inference and target-swap augmentation.
//! * [`ensemble`]: per-token median of label probabilities and majority vote.
//! * [`metrics`]: confusion matrices and accuracy / macro P/R/F1 reports.
//! * [`baseline`]: an averaged perceptron tagger and a bag-of-words polarity
//!   model so the whole pipeline runs without external models.
//!
//! Batch operations fan out over reviews with rayon when the `parallel`
//! feature is enabled (the default) and fall back to plain iterators
//! otherwise. See [`par::Exec`].

pub mod augment;
pub mod baseline;
pub mod corpus;
pub mod ensemble;
mod error;
pub mod io;
pub mod metrics;
pub mod par;
pub mod soe;
pub mod splits;
pub mod tagging;
pub mod text;
pub mod toy;

pub use corpus::{AspectSpan, Polarity, RawRow, Review};
pub use error::{Error, Result};
pub use par::Exec;
pub use tagging::{BioTag, TaggedSequence, Token};
