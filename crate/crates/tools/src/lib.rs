//! JSON codecs, run configuration, the verification suite and the `drinfeld`
//! command line built on `drinfeld-core`.

pub mod cli;
pub mod codec;
pub mod config;
pub mod expr;
pub mod suite;
