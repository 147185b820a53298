//! Bullet-point summarization of long earnings call transcripts.
//!
//! The extractive stage turns training-set reference bullets into a question
//! bank ([`qbank`]), groups the questions into LDA topics ([`topics`]) and
//! retrieves the top-k transcript sentences per question ([`retrieval`]). At
//! test time, where no reference exists, [`router`] picks bank questions from
//! the topics a transcript mentions. The abstractive stage ([`generator`])
//! builds instruction prompts for an external generation service and exports
//! instruction-tuning data. [`metrics`] scores output with ROUGE-1/2/L and
//! numeric precision; [`pipeline`] chains everything over a workspace
//! directory.

pub mod corpus;
pub mod error;
pub mod generator;
pub mod metrics;
pub mod pipeline;
pub mod qbank;
pub mod retrieval;
pub mod router;
pub mod service;
pub mod text;
pub mod topics;

pub use error::{Error, Result};
