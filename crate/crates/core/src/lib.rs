pub mod cli;
pub mod config;
pub mod error;
pub mod fundfn;
pub mod greedy;
pub mod par;
pub mod renorm;
pub mod spaces;
pub mod verify;

pub use config::Caps;
pub use error::{Error, Result};
