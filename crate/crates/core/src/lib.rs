//! Byte-pair encoding training viewed as a combinatorial optimization
//! problem: merge sequences, greedy trainers, an exact search, and tools for
//! auditing the approximation behaviour of greedy training.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod exact;
pub mod greedy;
pub mod merge;
pub mod pair_stats;

pub use error::{BpeError, Result};
pub use merge::{
    apply_merge, apply_sequence, compression_gain, compression_utility, MergeId, MergeSequence, MergeTable, Pair,
    Symbol, TokenStream,
};
