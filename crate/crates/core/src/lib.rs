//! Uplink resource allocation for semantic communication.
//!
//! Models a single-cell uplink in which each user transmits a compressed
//! semantic representation of its data. The allocator assigns per-user
//! bandwidth, transmit power and a compression rate so that as many users as
//! possible meet their SNR threshold and semantic-similarity band. The joint
//! problem is solved by alternating between a lookup-table search over
//! compression rates and a geometric program over bandwidth/power, following
//! the decomposition commonly used for this problem class.
//!
//! Modules:
//! - [`scenario`]: configuration, user sampling, channel/SNR/rate/delay math
//! - [`similarity`]: compression-vs-SNR similarity tables and image metrics
//! - [`gp`]: posynomial types and a log-barrier geometric-program solver
//! - [`allocator`]: the alternating allocator with admission control
//! - [`baselines`]: strict-similarity, classical and QoE-driven comparators
//! - [`metrics`]: satisfaction/similarity summaries and CSV emission
//! - [`stream`]: deterministic counter-based random streams

pub mod allocator;
pub mod baselines;
pub mod gp;
pub mod metrics;
pub mod scenario;
pub mod similarity;
pub mod stream;
