pub mod cluster;
pub mod config;
pub mod harness;
pub mod rl;
pub mod sim;
pub mod stats;
