//! Small prime fields for statistical tests.
//!
//! Chi-square tests over share distributions need every field element to be a
//! bucket with a meaningful expected count, which rules out the production
//! field. `Fp64<P>` gives the test suites a field small enough to enumerate.

use super::Field;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Integers modulo a small prime `P` (must actually be prime; callers pick
/// constants like 97 or 1009).
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct Fp64<const P: u64>(u64);

impl<const P: u64> Fp64<P> {
    pub fn value(self) -> u64 {
        self.0
    }

    fn pow(self, mut exp: u64) -> Self {
        let mut result = Self(1 % P);
        let mut base = self;
        while exp > 0 {
            if exp & 1 == 1 {
                result *= base;
            }
            base = base * base;
            exp >>= 1;
        }
        result
    }
}

impl<const P: u64> Field for Fp64<P> {
    const BITS: u32 = 64 - P.leading_zeros();
    const ZERO: Self = Fp64(0);
    const ONE: Self = Fp64(1);

    fn from_u64(v: u64) -> Self {
        Fp64(v % P)
    }

    fn from_u128(v: u128) -> Self {
        Fp64((v % P as u128) as u64)
    }

    fn pow2(k: u32) -> Self {
        Self::from_u64(2).pow(k as u64)
    }

    fn inv(self) -> Self {
        assert!(self.0 != 0, "inverse of zero");
        self.pow(P - 2)
    }

    fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        Fp64(rng.gen_range(0..P))
    }

    fn to_limbs(self) -> [u64; 4] {
        [self.0, 0, 0, 0]
    }

    fn from_limbs(limbs: [u64; 4]) -> Self {
        assert!(limbs[1] == 0 && limbs[2] == 0 && limbs[3] == 0 && limbs[0] < P);
        Fp64(limbs[0])
    }

    fn to_centered_i128(self) -> i128 {
        if self.0 > P / 2 {
            self.0 as i128 - P as i128
        } else {
            self.0 as i128
        }
    }
}

impl<const P: u64> Add for Fp64<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Fp64((self.0 + rhs.0) % P)
    }
}

impl<const P: u64> Sub for Fp64<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Fp64((P + self.0 - rhs.0) % P)
    }
}

impl<const P: u64> Neg for Fp64<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Fp64((P - self.0) % P)
    }
}

impl<const P: u64> Mul for Fp64<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Fp64(((self.0 as u128 * rhs.0 as u128) % P as u128) as u64)
    }
}

impl<const P: u64> AddAssign for Fp64<P> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const P: u64> SubAssign for Fp64<P> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const P: u64> MulAssign for Fp64<P> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<const P: u64> std::fmt::Debug for Fp64<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fp64<{}>({})", P, self.0)
    }
}
