pub mod cli;
pub mod convex;
pub mod dentability;
pub mod dfjp;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod lp;
pub mod rational;
pub mod tree;
pub mod treespace;
pub mod tsirelson;

pub use error::{LabError, Result};
pub use rational::Rational;
