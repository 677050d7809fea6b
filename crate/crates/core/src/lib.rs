pub mod error;
pub mod gravity;
pub mod metastate;
pub mod raytrace;

pub use error::{Error, Result};
