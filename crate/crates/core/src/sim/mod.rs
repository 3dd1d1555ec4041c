//! Trace-driven simulation of RND-LRU (with its SIM-LRU and LRU special
//! cases), the TTL similarity cache, and the single-item renewal process.

mod lru;
mod measure;
mod reference;
mod renewal;
mod stats;
mod trace;
mod ttl;

pub use lru::{run_rnd_lru, simulate_rnd_lru, LruList, Outcome, RndLruCache};
pub use measure::{acceptance_seed, mean_and_half_width, measure_policy, Measurement, Policy, TraceSource, Warmup};
pub use reference::{reference_lru, reference_sim_lru, StateSequenceHash};
pub use renewal::{rnd_ttl_renewal_oracle, RenewalEstimate};
pub use stats::EmpiricalStats;
pub use trace::{generate_irm_trace, Trace};
pub use ttl::simulate_ttl_similarity;
