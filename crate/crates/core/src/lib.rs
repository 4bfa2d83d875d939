//! Multi-layer diffusion networks for telling disinformation from
//! mainstream news by how articles spread on Twitter.
//!
//! The pipeline: [`ingest`] tweet records and labels, [`netbuild`] one
//! four-layer network (retweet, reply, quote, mention) per article,
//! encode it with [`features`] into a 38-entry vector, then train and
//! evaluate with [`model`] and the analyses in [`experiments`]. [`synth`]
//! generates labelled corpora for end-to-end runs.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod features;
pub mod graphops;
pub mod ingest;
pub mod model;
pub mod netbuild;
pub mod synth;

pub use error::{Error, Result};
