//! Data exchange with first-order source-to-target dependencies.

pub mod certain;
pub mod chase;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod laconify;
pub mod lang;
pub mod model;
pub mod sqlgen;
mod syntax;
pub mod verify;

pub use error::{Error, Result};
