//! Secure multi-party sparse matrix multiplication over secret-shared data,
//! with exact communication accounting, plus tooling that minimizes what the
//! public dimension metadata gives away.
//!
//! The crate simulates an honest-majority Shamir protocol (N parties,
//! threshold t, 2t < N) on a single machine: shares carry every party's
//! evaluation, every communicating step performs the real share arithmetic,
//! and a ledger records rounds, transmitted field elements and bytes, opened
//! values, and peak live share storage. Sparse vectors and matrices are held
//! as lists of secret-shared (coordinate, value) tuples whose public length
//! is the only thing an observer learns, and the multiplication pipelines
//! (oblivious radix-sort merge, duplicate aggregation, placeholder removal)
//! touch them only through data-independent operations.

pub mod dense;
pub mod field;
pub mod fixed;
pub mod minimize;
pub mod mult;
pub mod oracle;
pub mod runtime;
pub mod bits;
pub mod shamir;
pub mod sort;
pub mod sparse;
