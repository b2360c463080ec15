//! Prime-field arithmetic for the protocol stack.
//!
//! All protocol values live in one fixed public prime field. The production
//! field is `Fp255` (p = 2^255 - 19), large enough that a product of two raw
//! fixed-point encodings plus the statistical truncation mask stays far below
//! the modulus. `Fp64<P>` is a small companion field used by statistical tests
//! (share-secrecy chi-square, randomness uniformity) where the distribution
//! over field elements must be observable with feasible trial counts.

mod fp255;
mod small;

pub use fp255::Fp255;
pub use small::Fp64;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// A prime field with the handful of operations the protocols need.
///
/// Implementations must be cheap to copy; shares store one element per party.
pub trait Field:
    Copy
    + Clone
    + Eq
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// Bit length of the modulus.
    const BITS: u32;

    const ZERO: Self;
    const ONE: Self;

    fn from_u64(v: u64) -> Self;

    fn from_u128(v: u128) -> Self;

    /// Signed embedding: negative values map to the upper half of the field.
    fn from_i128(v: i128) -> Self {
        if v < 0 {
            -Self::from_u128(v.unsigned_abs())
        } else {
            Self::from_u128(v as u128)
        }
    }

    /// 2^k mod p. Panics if `k >= Self::BITS` (the protocols never need more).
    fn pow2(k: u32) -> Self;

    /// Multiplicative inverse. Panics on zero.
    fn inv(self) -> Self;

    /// Uniformly random element.
    fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self;

    /// Canonical value as little-endian 64-bit limbs (zero-padded).
    fn to_limbs(self) -> [u64; 4];

    /// Inverse of `to_limbs`. Panics if the value is not canonical (>= p).
    fn from_limbs(limbs: [u64; 4]) -> Self;

    /// Centered (signed) value. Panics if the magnitude exceeds i128 range;
    /// protocol values are bounded far below that.
    fn to_centered_i128(self) -> i128;

    /// Bytes one element occupies on the simulated wire.
    fn wire_bytes() -> u64 {
        (Self::BITS as u64 + 7) / 8
    }
}
