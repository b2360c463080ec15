//! Fixed-point encoding of reals into the field.
//!
//! Values are 64-bit fixed-point numbers with a 32-bit fractional part,
//! embedded into the field with negatives in the upper half. Inputs are
//! bounded by `VALUE_BOUND` so that the product of two raw encodings stays
//! below 2^102, which leaves 40+ bits of statistical masking headroom under
//! the 255-bit modulus before truncation.

use crate::field::Field;

/// Fractional bits of the encoding.
pub const FRAC_BITS: u32 = 32;

/// Total bits of a fixed-point value (integer + fraction, excluding sign).
pub const TOTAL_BITS: u32 = 64;

/// Inputs must satisfy |v| <= VALUE_BOUND so products fit the headroom budget.
pub const VALUE_BOUND: f64 = (1u64 << 19) as f64;

/// Bound on |raw| for a single encoded value: 2^51.
pub const RAW_BOUND: i128 = 1i128 << (19 + FRAC_BITS);

/// Bound on |raw| for a product of two encoded values: 2^102.
pub const PRODUCT_RAW_BOUND: i128 = RAW_BOUND * RAW_BOUND;

/// Encode a real into the field at scale 2^32, rounding to nearest.
///
/// Panics if |v| exceeds `VALUE_BOUND`; input validation happens at ingest.
pub fn encode<F: Field>(v: f64) -> F {
    assert!(v.is_finite() && v.abs() <= VALUE_BOUND, "value out of fixed-point range: {v}");
    let raw = (v * (1u64 << FRAC_BITS) as f64).round() as i128;
    F::from_i128(raw)
}

/// Decode a field element holding a scale-2^32 fixed-point value.
pub fn decode<F: Field>(x: F) -> f64 {
    let raw = x.to_centered_i128();
    raw as f64 / (1u64 << FRAC_BITS) as f64
}

/// Decode a raw (untruncated) product at scale 2^64.
pub fn decode_product<F: Field>(x: F) -> f64 {
    let raw = x.to_centered_i128();
    raw as f64 / (1u128 << (2 * FRAC_BITS)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fp255;

    #[test]
    fn encodes_reference_points() {
        // 1.0 encodes as 2^32; -0.5 as p - 2^31.
        assert_eq!(encode::<Fp255>(1.0), Fp255::pow2(32));
        assert_eq!(encode::<Fp255>(-0.5), -Fp255::pow2(31));
        assert_eq!(encode::<Fp255>(0.0), Fp255::ZERO);
    }

    #[test]
    fn round_trip_error_is_below_half_ulp() {
        let vals = [0.1, -0.1, 3.25, -1234.5678, 0.000001, 524287.9, -524288.0];
        for &v in &vals {
            let err = (decode::<Fp255>(encode::<Fp255>(v)) - v).abs();
            assert!(err <= 1.0 / (1u64 << 32) as f64, "round trip error {err} for {v}");
        }
    }

    #[test]
    #[should_panic(expected = "out of fixed-point range")]
    fn rejects_out_of_range() {
        let _ = encode::<Fp255>(600000.0);
    }

    #[test]
    fn product_scale_decodes() {
        let a = encode::<Fp255>(1.5);
        let b = encode::<Fp255>(-2.0);
        assert_eq!(decode_product(a * b), -3.0);
    }
}
