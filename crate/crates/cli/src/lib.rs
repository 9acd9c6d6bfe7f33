//! Command-line generation and the HTTP authoring service.

pub mod api;
pub mod config;
pub mod run;
pub mod store;

pub use api::router;
pub use store::Store;
