pub mod config;
pub mod engine;
pub mod feed;
pub mod generation;
pub mod graph;
pub mod manifest;
pub mod metrics;
pub mod outlets;
pub mod persona;
pub mod seed;

/// Agents are indexed densely; the index doubles as the display number
/// in rendered timelines ("User 17").
pub type AgentId = usize;
