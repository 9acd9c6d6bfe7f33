//! Automatic discovery of interesting graph facts, their organization into a
//! topic-driven narrative, and layout of the narrative as an annotated
//! node-link poster.

pub mod error;
pub mod export;
pub mod facts;
pub mod graph;
pub mod layout;
pub mod organize;
pub mod pipeline;
pub mod render;
pub mod text;

pub use error::{Error, Result};
