//! Shamir secret sharing over a prime field, with the communication cost of
//! every share-level protocol charged to the runtime ledger.
//!
//! A share holds one polynomial evaluation per party (the simulator's global
//! view) plus the polynomial degree. Fresh sharings have degree t; a local
//! product of two degree-t shares has degree 2t and must pass through a
//! resharing barrier before it can be multiplied again. Honest majority
//! (2t < N) guarantees 2t + 1 <= N evaluations, enough to interpolate.
//!
//! Cost model per value, with N parties and threshold t:
//! - input sharing: the owner is one of the parties and transmits N - 1
//!   evaluations, one barrier per batch;
//! - opening: every party sends its evaluation to every other party,
//!   N(N - 1) elements, one barrier per batch;
//! - multiplication resharing: (2t + 1)(N - 1) elements, one barrier per
//!   batch (the degree-reduction resharing of Damgard-Nielsen style
//!   protocols, 6 elements per product at N = 3, t = 1);
//! - inner products: all cross products are summed locally and a single
//!   resharing pays for the whole dot product;
//! - correlated randomness (random sharings, truncation masks) is dealer
//!   preprocessing and free, drawn deterministically from the context RNG.
//!
//! Openings come in two flavors. [`open_batch`] reveals semantic values and
//! increments the ledger's `opened_values`; [`open_masked_batch`] is for
//! values that are information-theoretically masked by fresh randomness
//! (truncation), which cost wire traffic but reveal nothing.

use crate::field::Field;
use crate::runtime::Ctx;
use smallvec::SmallVec;

/// One secret-shared field element: every party's polynomial evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Share<F: Field> {
    points: SmallVec<[F; 4]>,
    degree: usize,
}

impl<F: Field> Share<F> {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn point(&self, party: usize) -> F {
        self.points[party]
    }

    /// Public constant as a degree-0 sharing: every party holds the value.
    pub fn constant(parties: usize, value: F) -> Share<F> {
        Share { points: (0..parties).map(|_| value).collect(), degree: 0 }
    }

    pub fn zero(parties: usize) -> Share<F> {
        Share::constant(parties, F::ZERO)
    }

    fn zip_with(&self, other: &Share<F>, f: impl Fn(F, F) -> F) -> Share<F> {
        assert_eq!(self.points.len(), other.points.len());
        Share {
            points: self
                .points
                .iter()
                .zip(other.points.iter())
                .map(|(a, b)| f(*a, *b))
                .collect(),
            degree: self.degree.max(other.degree),
        }
    }

    /// Local addition; free.
    pub fn add(&self, other: &Share<F>) -> Share<F> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Local subtraction; free.
    pub fn sub(&self, other: &Share<F>) -> Share<F> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Local multiplication by a public constant; free.
    pub fn scale(&self, c: F) -> Share<F> {
        Share { points: self.points.iter().map(|p| *p * c).collect(), degree: self.degree }
    }

    /// Local addition of a public constant; free.
    pub fn add_const(&self, c: F) -> Share<F> {
        Share { points: self.points.iter().map(|p| *p + c).collect(), degree: self.degree }
    }

    pub fn neg(&self) -> Share<F> {
        self.scale(F::ZERO - F::ONE)
    }

    /// Pointwise product. Degrees add, so the result usually needs a
    /// resharing barrier before further multiplication; [`mul_batch`] does
    /// both. Local and free.
    pub fn mul_local(&self, other: &Share<F>) -> Share<F> {
        let mut s = self.zip_with(other, |a, b| a * b);
        s.degree = self.degree + other.degree;
        s
    }
}

fn sample_polynomial<F: Field>(ctx: &mut Ctx<F>, secret: F, degree: usize) -> SmallVec<[F; 4]> {
    let mut coeffs = SmallVec::with_capacity(degree + 1);
    coeffs.push(secret);
    for _ in 0..degree {
        coeffs.push(F::random(ctx.rng()));
    }
    coeffs
}

fn evaluate_at_parties<F: Field>(ctx: &Ctx<F>, coeffs: &[F], degree: usize) -> Share<F> {
    let points = (0..ctx.parties())
        .map(|p| {
            let x = ctx.eval_point(p);
            let mut acc = F::ZERO;
            for c in coeffs.iter().rev() {
                acc = acc * x + *c;
            }
            acc
        })
        .collect();
    Share { points, degree }
}

/// Share a batch of secrets at degree t. The owner participates as a party
/// and keeps its own evaluation, so each secret costs N - 1 elements; the
/// whole batch is one barrier.
pub fn share_batch<F: Field>(ctx: &mut Ctx<F>, secrets: &[F]) -> Vec<Share<F>> {
    if secrets.is_empty() {
        return Vec::new();
    }
    let t = ctx.threshold();
    let shares = secrets
        .iter()
        .map(|s| {
            let coeffs = sample_polynomial(ctx, *s, t);
            evaluate_at_parties(ctx, &coeffs, t)
        })
        .collect();
    ctx.barrier(secrets.len() as u64 * (ctx.parties() as u64 - 1));
    shares
}

pub fn share_one<F: Field>(ctx: &mut Ctx<F>, secret: F) -> Share<F> {
    share_batch(ctx, &[secret]).pop().unwrap()
}

/// Random degree-t sharing of a random secret; dealer preprocessing, free.
pub fn rand_share<F: Field>(ctx: &mut Ctx<F>) -> Share<F> {
    let secret = F::random(ctx.rng());
    preprocessed_share(ctx, secret)
}

/// Degree-t sharing of a dealer-chosen secret, part of the free correlated
/// randomness (random bits, truncation masks, shuffle keys).
pub fn preprocessed_share<F: Field>(ctx: &mut Ctx<F>, secret: F) -> Share<F> {
    let t = ctx.threshold();
    let coeffs = sample_polynomial(ctx, secret, t);
    evaluate_at_parties(ctx, &coeffs, t)
}

/// Interpolate the secret from the first degree + 1 evaluations. Pure math
/// for tests and oracles; charges nothing. Protocols open via [`open_batch`].
pub fn reconstruct<F: Field>(ctx: &mut Ctx<F>, share: &Share<F>) -> F {
    let coeffs = ctx.lagrange_at_zero(share.degree);
    let mut acc = F::ZERO;
    for (i, l) in coeffs.iter().enumerate() {
        acc += *l * share.points[i];
    }
    acc
}

fn open_wire_cost<F: Field>(ctx: &Ctx<F>, count: usize) -> u64 {
    let n = ctx.parties() as u64;
    count as u64 * n * (n - 1)
}

/// Open secrets to all parties: each party sends each evaluation to every
/// other party. One barrier; `opened_values` grows by the batch size.
pub fn open_batch<F: Field>(ctx: &mut Ctx<F>, shares: &[Share<F>]) -> Vec<F> {
    if shares.is_empty() {
        return Vec::new();
    }
    ctx.open_barrier(shares.len() as u64, open_wire_cost(ctx, shares.len()));
    shares.iter().map(|s| reconstruct(ctx, s)).collect()
}

/// Open values that carry a fresh uniform mask. Same wire cost as a real
/// opening, but nothing about the underlying secrets is revealed, so
/// `opened_values` stays put.
pub(crate) fn open_masked_batch<F: Field>(ctx: &mut Ctx<F>, shares: &[Share<F>]) -> Vec<F> {
    if shares.is_empty() {
        return Vec::new();
    }
    ctx.barrier(open_wire_cost(ctx, shares.len()));
    shares.iter().map(|s| reconstruct(ctx, s)).collect()
}

fn reshare_to_t<F: Field>(ctx: &mut Ctx<F>, raw: Vec<Share<F>>) -> Vec<Share<F>> {
    let t = ctx.threshold();
    raw.into_iter()
        .map(|s| {
            let v = reconstruct(ctx, &s);
            let coeffs = sample_polynomial(ctx, v, t);
            evaluate_at_parties(ctx, &coeffs, t)
        })
        .collect()
}

/// Reshare locally computed degree-<=2t shares back to degree t: one barrier,
/// (2t + 1)(N - 1) elements each. This is the primitive under [`mul_batch`]
/// and [`inner_product`]; protocols that sum local products themselves (for
/// example a dot product folded into a comparison) call it directly so a
/// whole batch of reductions shares one round.
pub fn reduce_degree_batch<F: Field>(ctx: &mut Ctx<F>, raw: Vec<Share<F>>) -> Vec<Share<F>> {
    if raw.is_empty() {
        return raw;
    }
    let t = ctx.threshold() as u64;
    let n = ctx.parties() as u64;
    for s in &raw {
        assert!(s.degree <= 2 * ctx.threshold(), "degree beyond 2t cannot be reduced");
    }
    ctx.barrier(raw.len() as u64 * (2 * t + 1) * (n - 1));
    reshare_to_t(ctx, raw)
}

/// Multiply pairwise and reshare back to degree t. One barrier for the whole
/// batch, (2t + 1)(N - 1) elements per product.
pub fn mul_batch<F: Field>(ctx: &mut Ctx<F>, lhs: &[Share<F>], rhs: &[Share<F>]) -> Vec<Share<F>> {
    assert_eq!(lhs.len(), rhs.len());
    if lhs.is_empty() {
        return Vec::new();
    }
    let t = ctx.threshold();
    let raw: Vec<Share<F>> = lhs
        .iter()
        .zip(rhs.iter())
        .map(|(a, b)| {
            assert!(
                a.degree + b.degree <= 2 * t,
                "product degree {} exceeds 2t; reshare first",
                a.degree + b.degree
            );
            a.mul_local(b)
        })
        .collect();
    reduce_degree_batch(ctx, raw)
}

pub fn mul<F: Field>(ctx: &mut Ctx<F>, a: &Share<F>, b: &Share<F>) -> Share<F> {
    mul_batch(ctx, std::slice::from_ref(a), std::slice::from_ref(b)).pop().unwrap()
}

/// Dot product of two share vectors. All cross products are summed locally
/// at degree 2t and one resharing pays for the entire sum, so the wire cost
/// is (2t + 1)(N - 1) elements and one round no matter the length.
pub fn inner_product<F: Field>(ctx: &mut Ctx<F>, xs: &[Share<F>], ys: &[Share<F>]) -> Share<F> {
    let acc = inner_product_local(ctx, xs, ys);
    reduce_degree_batch(ctx, vec![acc]).pop().unwrap()
}

/// The local half of a dot product: sum of pointwise products at degree
/// <= 2t, no communication. Callers batch the final reduction themselves
/// via [`reduce_degree_batch`].
pub fn inner_product_local<F: Field>(ctx: &Ctx<F>, xs: &[Share<F>], ys: &[Share<F>]) -> Share<F> {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let t = ctx.threshold();
    let mut acc = Share::zero(ctx.parties());
    for (a, b) in xs.iter().zip(ys.iter()) {
        assert!(a.degree + b.degree <= 2 * t);
        acc = acc.add(&a.mul_local(b));
    }
    acc
}

/// Bit width of the truncation masks: covers the offset range (2^121) with
/// 39 bits of statistical slack, and stays far below the 255-bit modulus so
/// the masked sum never wraps.
const TRUNC_MASK_BITS: u32 = 160;
/// Offset added before masking so the centered value becomes nonnegative.
/// Sized for aggregated sums of raw products: up to ~2^16 terms of magnitude
/// 2^102 each, so |value| < 2^119.
const TRUNC_OFFSET_BITS: u32 = 120;

/// Rescale fixed-point shares by 2^frac_bits via a masked opening.
///
/// For each share x with centered value v, |v| < 2^119, the parties open
/// m = x + 2^120 + r where r is a fresh 160-bit preprocessed mask whose high
/// part floor(r / 2^frac_bits) is also shared. Then
/// floor(m / 2^frac_bits) - [r_hi] - 2^(120 - frac_bits) equals
/// floor(v / 2^frac_bits) up to a +1 carry, an error of at most one unit in
/// the last place. One barrier per batch; the opening is masked, so it does
/// not count as a revealed value. Inputs may sit at degree 2t (a fresh local
/// product or a sum of them); the result is a degree-t sharing.
pub fn trunc_batch<F: Field>(ctx: &mut Ctx<F>, shares: &[Share<F>], frac_bits: u32) -> Vec<Share<F>> {
    assert!(F::BITS > TRUNC_MASK_BITS + 2, "field too small for masked truncation");
    assert!(frac_bits > 0 && frac_bits < 64);
    if shares.is_empty() {
        return Vec::new();
    }
    let parties = ctx.parties();
    let offset = F::pow2(TRUNC_OFFSET_BITS);
    let rescaled_offset = F::pow2(TRUNC_OFFSET_BITS - frac_bits);

    // Dealer preprocessing: r uniform in [0, 2^160), shared together with
    // floor(r / 2^frac_bits).
    let mut masked = Vec::with_capacity(shares.len());
    let mut hi_shares = Vec::with_capacity(shares.len());
    let t = ctx.threshold();
    for x in shares {
        let r_lo: u128 = rand::Rng::gen(ctx.rng());
        let r_top: u64 =
            rand::Rng::gen_range(ctx.rng(), 0..1u64 << (TRUNC_MASK_BITS - 128));
        let r_field = F::from_u128(r_lo) + F::from_u64(r_top) * F::pow2(128);
        let r_hi = (r_lo >> frac_bits) | ((r_top as u128) << (128 - frac_bits));
        let coeffs_r = sample_polynomial(ctx, r_field, t);
        let r_share = evaluate_at_parties(ctx, &coeffs_r, t);
        let coeffs_hi = sample_polynomial(ctx, F::from_u128(r_hi), t);
        hi_shares.push(evaluate_at_parties(ctx, &coeffs_hi, t));
        masked.push(x.add_const(offset).add(&r_share));
    }

    let opened = open_masked_batch(ctx, &masked);
    opened
        .into_iter()
        .zip(hi_shares)
        .map(|(m, r_hi)| {
            // floor(m / 2^frac_bits) for m < 2^162 computed by shifting the
            // limb representation (the quotient can exceed a u128).
            let l = m.to_limbs();
            debug_assert!(l[3] == 0 && l[2] < 1 << 34, "masked value out of range");
            let f = frac_bits;
            let m_hi = F::from_limbs([
                (l[0] >> f) | (l[1] << (64 - f)),
                (l[1] >> f) | (l[2] << (64 - f)),
                (l[2] >> f) | (l[3] << (64 - f)),
                l[3] >> f,
            ]);
            Share::constant(parties, m_hi)
                .sub(&r_hi)
                .add_const(F::ZERO - rescaled_offset)
        })
        .collect()
}
