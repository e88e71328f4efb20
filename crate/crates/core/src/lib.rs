//! De-identification of short social-media posts: detection of directly
//! identifying information, masking, and token-level evaluation.

pub mod config;
pub mod corpus;
pub mod detect;
pub mod error;
pub mod eval;
pub mod masking;
pub mod model;
pub mod patterns;
pub mod pipeline;
pub mod recognizer;
pub mod synth;
pub mod text;
pub mod tokenizer;

pub use error::{Error, Result};
