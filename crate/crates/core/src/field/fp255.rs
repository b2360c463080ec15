//! The production field: integers modulo p = 2^255 - 19.
//!
//! Elements are canonical little-endian [u64; 4] limbs. The pseudo-Mersenne
//! shape keeps reduction to a couple of 38-fold-and-carry passes, which
//! matters because the benchmark sweeps execute on the order of 1e9
//! multiplications. Nothing here is constant-time; this is a simulator, not
//! a deployment target.

use super::Field;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// p = 2^255 - 19 as limbs.
const P: [u64; 4] = [
    0xffff_ffff_ffff_ffed,
    0xffff_ffff_ffff_ffff,
    0xffff_ffff_ffff_ffff,
    0x7fff_ffff_ffff_ffff,
];

#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct Fp255([u64; 4]);

#[inline]
fn geq(a: &[u64; 4], b: &[u64; 4]) -> bool {
    for i in (0..4).rev() {
        if a[i] > b[i] {
            return true;
        }
        if a[i] < b[i] {
            return false;
        }
    }
    true
}

#[inline]
fn sub_in_place(a: &mut [u64; 4], b: &[u64; 4]) {
    let mut borrow = 0u64;
    for i in 0..4 {
        let (d, b1) = a[i].overflowing_sub(b[i]);
        let (d, b2) = d.overflowing_sub(borrow);
        a[i] = d;
        borrow = (b1 as u64) + (b2 as u64);
    }
    debug_assert_eq!(borrow, 0);
}

/// Reduce a value < 2^256 into canonical range.
#[inline]
fn canonicalize(mut a: [u64; 4]) -> [u64; 4] {
    // a < 2^256 < 2p + 40, so at most two subtractions.
    while geq(&a, &P) {
        sub_in_place(&mut a, &P);
    }
    a
}

/// Reduce a 512-bit product. 2^256 = 38 (mod p).
#[inline]
fn reduce512(w: [u64; 8]) -> [u64; 4] {
    // First fold: lo + 38 * hi, at most 5 limbs.
    let mut limbs = [0u64; 4];
    let mut carry: u128 = 0;
    for i in 0..4 {
        let v = w[i] as u128 + 38u128 * (w[i + 4] as u128) + carry;
        limbs[i] = v as u64;
        carry = v >> 64;
    }
    // Second fold: the carry (< 39) re-enters at 38 per 2^256.
    let mut v = limbs[0] as u128 + 38u128 * carry;
    limbs[0] = v as u64;
    let mut c = v >> 64;
    for limb in limbs.iter_mut().skip(1) {
        if c == 0 {
            break;
        }
        v = *limb as u128 + c;
        *limb = v as u64;
        c = v >> 64;
    }
    // A carry out of limb 3 is impossible: limbs < 2^256 - 38*39 before the fold.
    debug_assert_eq!(c, 0);
    canonicalize(limbs)
}

impl Fp255 {
    fn mul_wide(a: &[u64; 4], b: &[u64; 4]) -> [u64; 8] {
        let mut w = [0u64; 8];
        for i in 0..4 {
            let mut carry: u128 = 0;
            for j in 0..4 {
                let v = w[i + j] as u128 + a[i] as u128 * b[j] as u128 + carry;
                w[i + j] = v as u64;
                carry = v >> 64;
            }
            w[i + 4] = carry as u64;
        }
        w
    }

    fn pow(self, exp: &[u64; 4]) -> Self {
        let mut result = Self::ONE;
        let mut base = self;
        for limb in exp {
            let mut e = *limb;
            for _ in 0..64 {
                if e & 1 == 1 {
                    result *= base;
                }
                base = base * base;
                e >>= 1;
            }
        }
        result
    }
}

impl Field for Fp255 {
    const BITS: u32 = 255;
    const ZERO: Self = Fp255([0, 0, 0, 0]);
    const ONE: Self = Fp255([1, 0, 0, 0]);

    fn from_u64(v: u64) -> Self {
        Fp255([v, 0, 0, 0])
    }

    fn from_u128(v: u128) -> Self {
        Fp255([v as u64, (v >> 64) as u64, 0, 0])
    }

    fn pow2(k: u32) -> Self {
        assert!(k < Self::BITS, "pow2 exponent out of range");
        let mut limbs = [0u64; 4];
        limbs[(k / 64) as usize] = 1u64 << (k % 64);
        Fp255(canonicalize(limbs))
    }

    fn inv(self) -> Self {
        assert!(self != Self::ZERO, "inverse of zero");
        // Fermat: a^(p-2).
        let mut exp = P;
        exp[0] -= 2;
        self.pow(&exp)
    }

    fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut limbs = [rng.gen::<u64>(), rng.gen(), rng.gen(), rng.gen()];
            limbs[3] &= 0x7fff_ffff_ffff_ffff;
            if !geq(&limbs, &P) {
                return Fp255(limbs);
            }
        }
    }

    fn to_limbs(self) -> [u64; 4] {
        self.0
    }

    fn from_limbs(limbs: [u64; 4]) -> Self {
        assert!(!geq(&limbs, &P), "non-canonical limbs");
        Fp255(limbs)
    }

    fn to_centered_i128(self) -> i128 {
        let half_up = {
            // (p+1)/2
            let mut h = P;
            h[0] += 1;
            let mut out = [0u64; 4];
            let mut rem = 0u64;
            for i in (0..4).rev() {
                let cur = ((rem as u128) << 64) | h[i] as u128;
                out[i] = (cur / 2) as u64;
                rem = (cur % 2) as u64;
            }
            out
        };
        let (limbs, negative) = if geq(&self.0, &half_up) {
            ((-self).0, true)
        } else {
            (self.0, false)
        };
        assert!(limbs[2] == 0 && limbs[3] == 0 && limbs[1] < 1 << 63, "magnitude exceeds i128");
        let mag = (limbs[0] as u128) | ((limbs[1] as u128) << 64);
        if negative {
            -(mag as i128)
        } else {
            mag as i128
        }
    }
}

impl Add for Fp255 {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut out = [0u64; 4];
        let mut carry = 0u64;
        for i in 0..4 {
            let (s, c1) = self.0[i].overflowing_add(rhs.0[i]);
            let (s, c2) = s.overflowing_add(carry);
            out[i] = s;
            carry = (c1 as u64) + (c2 as u64);
        }
        // a + b < 2p < 2^256, so no carry out of limb 3.
        debug_assert_eq!(carry, 0);
        Fp255(canonicalize(out))
    }
}

impl Sub for Fp255 {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut out = self.0;
        if geq(&out, &rhs.0) {
            sub_in_place(&mut out, &rhs.0);
        } else {
            let mut t = P;
            sub_in_place(&mut t, &rhs.0);
            let lifted = Fp255(t) + Fp255(out);
            out = lifted.0;
        }
        Fp255(out)
    }
}

impl Neg for Fp255 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::ZERO - self
    }
}

impl Mul for Fp255 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Fp255(reduce512(Self::mul_wide(&self.0, &rhs.0)))
    }
}

impl AddAssign for Fp255 {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fp255 {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fp255 {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl std::fmt::Debug for Fp255 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Fp255(0x{:016x}{:016x}{:016x}{:016x})",
            self.0[3], self.0[2], self.0[1], self.0[0]
        )
    }
}
