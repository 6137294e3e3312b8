//! Bin packing under a partition matroid constraint.
//!
//! Items with exact rational sizes in (0,1] are packed into unit bins, with
//! at most `k(G)` items of each group `G` per bin. The crate implements the
//! full approximation pipeline -- configuration-LP column generation, the
//! evict/shift/partition/pack rounding chain, a greedy packer for all-small
//! instances, and instance reduction/reconstruction -- together with an
//! exact-rational simplex, a branch-and-bound optimum oracle, instance
//! generators, and the JSON wire formats used by the CLI.
//!
//! All arithmetic is exact; every stage enforces its own contract and fails
//! loudly rather than degrade.

pub mod config;
pub mod config_lp;
pub mod constants;
pub mod evict;
pub mod gen;
pub mod greedy;
pub mod instance;
pub mod json;
pub mod matching;
pub mod oracle;
pub mod pack;
pub mod partition;
pub mod pipeline;
pub mod polytope;
pub mod pricing;
pub mod prototype;
pub mod rational;
pub mod reduce;
pub mod shift;
pub mod simplex;

pub use config::{Configuration, Packing};
pub use constants::{ConstantSet, Overrides};
pub use instance::{Instance, ItemId};
pub use prototype::Prototype;
pub use rational::Rational;
