//! Exact finite models of difference-set structure in direct sums of
//! prime-field copies.
//!
//! The ambient objects are digit vectors over a small prime field F_p at a
//! dyadic scale `n` (length `2^n`), ordered by embedding (repeat each digit)
//! into finer scales. On top of that sit:
//!
//! - [`hamming`]: radius-bounded balls around the constants and their
//!   translates, with exact sizes, enumeration, and sampling;
//! - [`partition`]: the bias partition of a scale into `p` cells plus a
//!   remainder class, iterated across nested scales, with exact cell
//!   counts, a concatenation sampler, and machine checks of the shift
//!   stability laws the construction leans on;
//! - [`bohr`]: linear functionals, finite-index kernels, and exhaustive
//!   coset-coverage certificates for unions of balls;
//! - [`construction`]: the dense set whose difference set misses a union of
//!   translated balls, its density accounting, and a brute-force search for
//!   the density threshold past which difference sets fill a small group.
//!
//! All counting is exact (big integers or explicit rational comparisons)
//! unless a result is too large, in which case the counting layer reports a
//! log-space estimate with an error bound. Randomized checks draw from
//! seeded, splittable streams ([`rng`]) so every report is reproducible.

pub mod bohr;
pub mod construction;
pub mod error;
pub mod field;
pub mod field_group;
pub mod hamming;
pub mod partition;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use field::{FieldSubset, FieldValue, Prime};
pub use field_group::{group_size, GroupElement, GroupRange};
