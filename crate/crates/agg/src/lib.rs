//! File formats, random instances, parallel oracles and the command line
//! for the `agg-core` library.

pub mod cli;
pub mod format;
pub mod generate;
pub mod parallel;
