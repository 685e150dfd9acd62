pub mod characters;
pub mod dynamics;
pub mod error;
pub mod kinematic;
pub mod matrix;
pub mod report;
pub mod representations;
pub mod sampling;
pub mod topology;

pub use error::{Error, Result};
