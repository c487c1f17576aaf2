//! IO companion to the `mmimo` core: scenario configuration, parallel
//! experiment execution, CSV emission, and reference-table reproduction.

pub mod config;
pub mod output;
pub mod report;
pub mod runner;
pub mod targets;
