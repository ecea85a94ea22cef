//! Std companion of `biphasic-core`: mesh and result files, run
//! configuration, a sparse direct solver and the commands behind the
//! `biphasic` executable.

pub mod config;
pub mod direct;
pub mod driver;
pub mod error;
pub mod mesh_io;
pub mod output;

pub use error::{AppError, Result};
