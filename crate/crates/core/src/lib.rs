//! Numerical verification that the Brieskorn contact forms are supported by
//! an open book whose monodromy is a k-fold Dehn twist.

pub mod brieskorn;
pub mod cotangent;
pub mod error;
pub mod export;
pub mod forms;
pub mod openbook;
pub mod profile;
pub mod report;
pub mod sampling;
pub mod suite;

pub use error::{Error, Result};
