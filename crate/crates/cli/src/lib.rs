//! Configuration, presets and artifacts behind the `zk` binary.

pub mod config;
pub mod presets;
