pub mod caching;
pub mod crp;
pub mod error;
pub mod experiment;
pub mod popularity;
pub mod seed;
pub mod selftest;
pub mod simcore;
pub mod socialnet;
pub mod workload;

pub use error::{Error, Result};
