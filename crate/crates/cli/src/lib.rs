//! Command-line front end for `sepfid`: state reports, roof solving, curve
//! data and verification campaigns.

pub mod cli;
pub mod config;
pub mod error;
pub mod figure;
pub mod measure;
pub mod output;
pub mod roof;
pub mod verify;

pub use cli::run;
pub use error::{CliError, Result};
