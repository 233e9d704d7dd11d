pub mod acquire;
pub mod bench;
pub mod classify;
pub mod dict;
pub mod metrics;
pub mod recon;
