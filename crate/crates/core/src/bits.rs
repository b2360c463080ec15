//! Bitwise-shared integers and the comparison circuits built on them.
//!
//! Coordinates (row and column indices) live as little-endian vectors of
//! arithmetically shared bits, so equality and order tests become boolean
//! circuits over shared bits: XNOR and AND for equality, a prefix-product
//! ladder for less-than. Everything here is batched: one call on a thousand
//! comparisons costs the same number of rounds as one comparison, and
//! multiplications inside a circuit layer share a single barrier.
//!
//! Per comparison of width-B integers (N parties, threshold t, one reshared
//! product = (2t + 1)(N - 1) elements):
//! - equality: B XNOR products plus an AND tree of B - 1 products over
//!   1 + ceil(log2 B) rounds;
//! - equality against a public constant: the XNOR layer is free, leaving
//!   B - 1 products;
//! - less-than: B bit products, a Brent-Kung suffix-product ladder of at
//!   most 2B products in about 2 log2 B rounds, and one final reduction for
//!   the combining dot product.

use crate::field::Field;
use crate::runtime::Ctx;
use crate::shamir::{self, Share};

/// Little-endian vector of shared bits representing an unsigned integer.
#[derive(Debug, Clone)]
pub struct BitSharedInt<F: Field> {
    bits: Vec<Share<F>>,
}

/// Bits needed to hold values up to and including `max_value`.
pub fn required_width(max_value: u64) -> u32 {
    (64 - max_value.leading_zeros()).max(1)
}

impl<F: Field> BitSharedInt<F> {
    pub fn from_bits(bits: Vec<Share<F>>) -> Self {
        assert!(!bits.is_empty());
        BitSharedInt { bits }
    }

    pub fn width(&self) -> u32 {
        self.bits.len() as u32
    }

    pub fn bits(&self) -> &[Share<F>] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> &Share<F> {
        &self.bits[i]
    }

    /// Public constant, bit-decomposed into degree-0 sharings.
    pub fn constant(parties: usize, value: u64, width: u32) -> Self {
        assert!(width as usize <= 64 && (width == 64 || value < 1 << width));
        let bits = (0..width)
            .map(|i| {
                let b = if value >> i & 1 == 1 { F::ONE } else { F::ZERO };
                Share::constant(parties, b)
            })
            .collect();
        BitSharedInt { bits }
    }

    /// The integer as a single arithmetic sharing, sum of 2^i * bit_i.
    /// Local and free.
    pub fn pack(&self) -> Share<F> {
        let mut acc = self.bits[0].clone();
        for (i, b) in self.bits.iter().enumerate().skip(1) {
            acc = acc.add(&b.scale(F::pow2(i as u32)));
        }
        acc
    }

    /// Concatenate, `self` becoming the high-order part. Builds composite
    /// sort keys like (column || row). Free.
    pub fn concat(&self, low: &BitSharedInt<F>) -> BitSharedInt<F> {
        let mut bits = low.bits.clone();
        bits.extend(self.bits.iter().cloned());
        BitSharedInt { bits }
    }

}

/// Dealer-preprocessed random shared bits (degree t, secrets in {0, 1});
/// free, like every correlated-randomness setup.
pub fn rand_bits<F: Field>(ctx: &mut Ctx<F>, count: usize) -> Vec<Share<F>> {
    (0..count)
        .map(|_| {
            let bit = if rand::Rng::gen::<bool>(ctx.rng()) { F::ONE } else { F::ZERO };
            shamir::preprocessed_share(ctx, bit)
        })
        .collect()
}

/// A random bitwise-shared integer of the given width, from preprocessing.
pub fn rand_int<F: Field>(ctx: &mut Ctx<F>, width: u32) -> BitSharedInt<F> {
    BitSharedInt { bits: rand_bits(ctx, width as usize) }
}

/// Complement of a shared bit; free.
pub fn not<F: Field>(bit: &Share<F>) -> Share<F> {
    bit.neg().add_const(F::ONE)
}

/// Owner bit-decomposes and shares a batch of integers; one barrier,
/// (N - 1) elements per bit.
pub fn share_ints<F: Field>(ctx: &mut Ctx<F>, values: &[u64], width: u32) -> Vec<BitSharedInt<F>> {
    assert!(width >= 1 && width as usize <= 64);
    let mut flat = Vec::with_capacity(values.len() * width as usize);
    for &v in values {
        assert!(width == 64 || v < 1 << width, "value {v} does not fit in {width} bits");
        for i in 0..width {
            flat.push(if v >> i & 1 == 1 { F::ONE } else { F::ZERO });
        }
    }
    let shares = shamir::share_batch(ctx, &flat);
    shares
        .chunks(width as usize)
        .map(|c| BitSharedInt { bits: c.to_vec() })
        .collect()
}

/// Open packed integers: one logical value and one wire element batch per
/// integer, not per bit.
pub fn open_ints<F: Field>(ctx: &mut Ctx<F>, ints: &[BitSharedInt<F>]) -> Vec<u64> {
    let packed: Vec<Share<F>> = ints.iter().map(|b| b.pack()).collect();
    shamir::open_batch(ctx, &packed)
        .into_iter()
        .map(|v| {
            let limbs = v.to_limbs();
            assert!(limbs[1] == 0 && limbs[2] == 0 && limbs[3] == 0, "opened bits not in range");
            limbs[0]
        })
        .collect()
}

/// AND a batch of bit groups down to one bit each, using a balanced product
/// tree batched layer by layer. Groups may have different sizes; the round
/// count is ceil(log2 of the largest group).
fn and_tree<F: Field>(ctx: &mut Ctx<F>, mut groups: Vec<Vec<Share<F>>>) -> Vec<Share<F>> {
    loop {
        let widest = groups.iter().map(|g| g.len()).max().unwrap_or(0);
        if widest <= 1 {
            break;
        }
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for g in &groups {
            for pair in g.chunks_exact(2) {
                lhs.push(pair[0].clone());
                rhs.push(pair[1].clone());
            }
        }
        let products = shamir::mul_batch(ctx, &lhs, &rhs);
        let mut cursor = 0;
        for g in &mut groups {
            let pairs = g.len() / 2;
            let mut next: Vec<Share<F>> = products[cursor..cursor + pairs].to_vec();
            cursor += pairs;
            if g.len() % 2 == 1 {
                next.push(g.pop().unwrap());
            }
            *g = next;
        }
    }
    groups
        .into_iter()
        .map(|mut g| g.pop().expect("empty bit group"))
        .collect()
}

/// Multiply arr[src] into arr[dst] at every site, one batched barrier.
fn product_layer<F: Field>(
    ctx: &mut Ctx<F>,
    arrays: &mut [Vec<Share<F>>],
    sites: &[(usize, usize, usize)],
) {
    if sites.is_empty() {
        return;
    }
    let lhs: Vec<Share<F>> = sites.iter().map(|&(a, s, _)| arrays[a][s].clone()).collect();
    let rhs: Vec<Share<F>> = sites.iter().map(|&(a, _, d)| arrays[a][d].clone()).collect();
    let out = shamir::mul_batch(ctx, &lhs, &rhs);
    for (&(a, _, d), v) in sites.iter().zip(out) {
        arrays[a][d] = v;
    }
}

/// In-place Brent-Kung prefix products over every array, mul layers batched
/// across arrays: afterwards arr[i] holds arr[0] * ... * arr[i]. At most 2L
/// products and about 2 log2 L rounds per array of length L.
fn prefix_products<F: Field>(ctx: &mut Ctx<F>, arrays: &mut [Vec<Share<F>>]) {
    let maxlen = arrays.iter().map(|a| a.len()).max().unwrap_or(0);
    if maxlen <= 1 {
        return;
    }
    let mut top = 0;
    while 1usize << (top + 1) <= maxlen {
        let stride = 1usize << (top + 1);
        let half = 1usize << top;
        let mut sites = Vec::new();
        for (ai, arr) in arrays.iter().enumerate() {
            let mut i = stride - 1;
            while i < arr.len() {
                sites.push((ai, i - half, i));
                i += stride;
            }
        }
        product_layer(ctx, arrays, &sites);
        top += 1;
    }
    for d in (0..top).rev() {
        let stride = 1usize << (d + 1);
        let half = 1usize << d;
        let mut sites = Vec::new();
        for (ai, arr) in arrays.iter().enumerate() {
            let mut i = stride - 1;
            while i + half < arr.len() {
                sites.push((ai, i, i + half));
                i += stride;
            }
        }
        product_layer(ctx, arrays, &sites);
    }
}

/// Reshared products [`prefix_products`] spends on one array of this
/// length: a dry run of the same two sweeps.
pub fn prefix_product_count(len: usize) -> u64 {
    let mut count = 0u64;
    if len <= 1 {
        return 0;
    }
    let mut top = 0;
    while 1usize << (top + 1) <= len {
        let stride = 1usize << (top + 1);
        let mut i = stride - 1;
        while i < len {
            count += 1;
            i += stride;
        }
        top += 1;
    }
    for d in (0..top).rev() {
        let stride = 1usize << (d + 1);
        let half = 1usize << d;
        let mut i = stride - 1;
        while i + half < len {
            count += 1;
            i += stride;
        }
    }
    count
}

/// Reshared products one width-B less-than costs: B bit products, the
/// suffix ladder, one combining reduction.
pub fn lt_product_count(width: u32) -> u64 {
    width as u64 + prefix_product_count(width as usize) + 1
}

/// Reshared products one width-B equality costs: B XNOR products and a
/// B - 1 product AND tree.
pub fn eq_product_count(width: u32) -> u64 {
    2 * width as u64 - 1
}

/// Reshared products one width-B zero test costs: just the AND tree.
pub fn eq_zero_product_count(width: u32) -> u64 {
    width as u64 - 1
}

/// Shared XNOR bits per position: 1 - a - b + 2ab. One product each.
fn xnor_layer<F: Field>(
    ctx: &mut Ctx<F>,
    lhs: &[BitSharedInt<F>],
    rhs: &[BitSharedInt<F>],
) -> Vec<Vec<Share<F>>> {
    let mut la = Vec::new();
    let mut lb = Vec::new();
    for (a, b) in lhs.iter().zip(rhs.iter()) {
        assert_eq!(a.width(), b.width(), "comparing different widths");
        la.extend(a.bits.iter().cloned());
        lb.extend(b.bits.iter().cloned());
    }
    let prods = shamir::mul_batch(ctx, &la, &lb);
    let mut out = Vec::with_capacity(lhs.len());
    let mut cursor = 0;
    for (a, b) in lhs.iter().zip(rhs.iter()) {
        let w = a.width() as usize;
        let group = (0..w)
            .map(|i| {
                let ab = &prods[cursor + i];
                // 1 - a - b + 2ab
                not(&a.bits[i].add(&b.bits[i]).sub(&ab.scale(F::from_u64(2))))
            })
            .collect();
        cursor += w;
        out.push(group);
    }
    out
}

/// Batched equality test: result bit is 1 iff the integers are equal.
pub fn eq_ints<F: Field>(
    ctx: &mut Ctx<F>,
    lhs: &[BitSharedInt<F>],
    rhs: &[BitSharedInt<F>],
) -> Vec<Share<F>> {
    assert_eq!(lhs.len(), rhs.len());
    if lhs.is_empty() {
        return Vec::new();
    }
    let xnors = xnor_layer(ctx, lhs, rhs);
    and_tree(ctx, xnors)
}

/// Batched test against zero: the XNOR against a constant 0 bit is the free
/// complement, so only the AND tree communicates.
pub fn eq_zero<F: Field>(ctx: &mut Ctx<F>, ints: &[BitSharedInt<F>]) -> Vec<Share<F>> {
    if ints.is_empty() {
        return Vec::new();
    }
    let groups = ints
        .iter()
        .map(|v| v.bits.iter().map(not).collect())
        .collect();
    and_tree(ctx, groups)
}

/// Batched unsigned less-than: result bit is 1 iff lhs < rhs.
///
/// lhs < rhs exactly when some position i has lhs_i = 0, rhs_i = 1 and all
/// higher positions equal. With e_i = lhs_i * rhs_i both the strict bit
/// (rhs_i - e_i) and the equality bit (1 - lhs_i - rhs_i + 2 e_i) come from
/// the same product; the all-higher-equal terms are suffix products of the
/// equality bits, and the disjoint disjunction collapses to a dot product
/// that needs a single degree reduction.
pub fn lt_ints<F: Field>(
    ctx: &mut Ctx<F>,
    lhs: &[BitSharedInt<F>],
    rhs: &[BitSharedInt<F>],
) -> Vec<Share<F>> {
    assert_eq!(lhs.len(), rhs.len());
    if lhs.is_empty() {
        return Vec::new();
    }
    let parties = ctx.parties();
    let mut la = Vec::new();
    let mut lb = Vec::new();
    for (a, b) in lhs.iter().zip(rhs.iter()) {
        assert_eq!(a.width(), b.width(), "comparing different widths");
        la.extend(a.bits.iter().cloned());
        lb.extend(b.bits.iter().cloned());
    }
    let prods = shamir::mul_batch(ctx, &la, &lb);

    let mut strict: Vec<Vec<Share<F>>> = Vec::with_capacity(lhs.len());
    let mut eq_rev: Vec<Vec<Share<F>>> = Vec::with_capacity(lhs.len());
    let mut cursor = 0;
    for (a, b) in lhs.iter().zip(rhs.iter()) {
        let w = a.width() as usize;
        let mut s = Vec::with_capacity(w);
        let mut e = Vec::with_capacity(w);
        for i in 0..w {
            let ab = &prods[cursor + i];
            s.push(b.bits[i].sub(ab));
            e.push(not(&a.bits[i].add(&b.bits[i]).sub(&ab.scale(F::from_u64(2)))));
        }
        cursor += w;
        e.reverse(); // prefix products over the reversed array = suffix products
        strict.push(s);
        eq_rev.push(e);
    }
    prefix_products(ctx, &mut eq_rev);

    let sums: Vec<Share<F>> = strict
        .iter()
        .zip(eq_rev.iter())
        .map(|(s, p)| {
            let w = s.len();
            // Suffix product above position i: for the top bit it is empty
            // (one), otherwise the reversed prefix up to w - 2 - i.
            let mut acc = s[w - 1].mul_local(&Share::constant(parties, F::ONE));
            for i in 0..w - 1 {
                acc = acc.add(&s[i].mul_local(&p[w - 2 - i]));
            }
            acc
        })
        .collect();
    shamir::reduce_degree_batch(ctx, sums)
}

/// Batched oblivious choice on arithmetic shares: flag must share a bit;
/// returns when_true where flag = 1 and when_false where flag = 0. One
/// product per slot.
pub fn select<F: Field>(
    ctx: &mut Ctx<F>,
    flags: &[Share<F>],
    when_true: &[Share<F>],
    when_false: &[Share<F>],
) -> Vec<Share<F>> {
    assert!(flags.len() == when_true.len() && flags.len() == when_false.len());
    if flags.is_empty() {
        return Vec::new();
    }
    let diffs: Vec<Share<F>> = when_true
        .iter()
        .zip(when_false.iter())
        .map(|(a, b)| a.sub(b))
        .collect();
    let gated = shamir::mul_batch(ctx, flags, &diffs);
    gated
        .iter()
        .zip(when_false.iter())
        .map(|(g, b)| b.add(g))
        .collect()
}

/// Oblivious choice on bitwise integers: one product per bit position.
pub fn select_ints<F: Field>(
    ctx: &mut Ctx<F>,
    flags: &[Share<F>],
    when_true: &[BitSharedInt<F>],
    when_false: &[BitSharedInt<F>],
) -> Vec<BitSharedInt<F>> {
    assert!(flags.len() == when_true.len() && flags.len() == when_false.len());
    let mut flat_flags = Vec::new();
    let mut flat_true = Vec::new();
    let mut flat_false = Vec::new();
    for ((f, a), b) in flags.iter().zip(when_true.iter()).zip(when_false.iter()) {
        assert_eq!(a.width(), b.width());
        for i in 0..a.width() as usize {
            flat_flags.push(f.clone());
            flat_true.push(a.bits[i].clone());
            flat_false.push(b.bits[i].clone());
        }
    }
    let flat = select(ctx, &flat_flags, &flat_true, &flat_false);
    let mut out = Vec::with_capacity(flags.len());
    let mut cursor = 0;
    for a in when_true {
        let w = a.width() as usize;
        out.push(BitSharedInt { bits: flat[cursor..cursor + w].to_vec() });
        cursor += w;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, Fp255};
    use crate::runtime::RuntimeConfig;

    fn ctx3() -> Ctx<Fp255> {
        Ctx::new(RuntimeConfig::new(3, 1, 99))
    }

    fn open_flags(ctx: &mut Ctx<Fp255>, flags: &[Share<Fp255>]) -> Vec<u64> {
        shamir::open_batch(ctx, flags)
            .into_iter()
            .map(|v| v.to_limbs()[0])
            .collect()
    }

    #[test]
    fn share_pack_open_round_trip() {
        let mut ctx = ctx3();
        let values = [0u64, 1, 5, 12, 15];
        let ints = share_ints(&mut ctx, &values, 4);
        assert_eq!(open_ints(&mut ctx, &ints), values);
    }

    #[test]
    fn widths_cover_the_stated_dimensions() {
        assert_eq!(required_width(340_000), 19);
        assert_eq!(required_width(1), 1);
        assert_eq!(required_width(4096), 13);
        assert_eq!(required_width(4095), 12);
    }

    #[test]
    fn equality_is_correct_and_batched() {
        let mut ctx = ctx3();
        let lhs = share_ints(&mut ctx, &[3, 9, 0, 15, 7], 4);
        let rhs = share_ints(&mut ctx, &[3, 8, 0, 14, 7], 4);
        let before = ctx.ledger();
        let flags = eq_ints(&mut ctx, &lhs, &rhs);
        let d = ctx.ledger().since(&before);
        // Width 4: one XNOR layer then a 3-product tree over 2 more rounds.
        assert_eq!(d.rounds, 3);
        assert_eq!(d.elements_sent, 5 * (4 + 3) * 6);
        assert_eq!(open_flags(&mut ctx, &flags), [1, 0, 1, 0, 1]);
    }

    #[test]
    fn zero_test_skips_the_xnor_layer() {
        let mut ctx = ctx3();
        let ints = share_ints(&mut ctx, &[0, 4, 0, 1], 4);
        let before = ctx.ledger();
        let flags = eq_zero(&mut ctx, &ints);
        let d = ctx.ledger().since(&before);
        assert_eq!(d.rounds, 2);
        assert_eq!(d.elements_sent, 4 * 3 * 6);
        assert_eq!(open_flags(&mut ctx, &flags), [1, 0, 1, 0]);
    }

    #[test]
    fn less_than_is_exhaustively_correct_on_width_four() {
        let mut ctx = ctx3();
        let mut lhs_vals = Vec::new();
        let mut rhs_vals = Vec::new();
        for a in 0..16u64 {
            for b in 0..16u64 {
                lhs_vals.push(a);
                rhs_vals.push(b);
            }
        }
        let lhs = share_ints(&mut ctx, &lhs_vals, 4);
        let rhs = share_ints(&mut ctx, &rhs_vals, 4);
        let flags = lt_ints(&mut ctx, &lhs, &rhs);
        let opened = open_flags(&mut ctx, &flags);
        for (k, got) in opened.iter().enumerate() {
            let expect = u64::from(lhs_vals[k] < rhs_vals[k]);
            assert_eq!(*got, expect, "{} < {}", lhs_vals[k], rhs_vals[k]);
        }
    }

    #[test]
    fn less_than_round_count_is_logarithmic() {
        let mut ctx = ctx3();
        let lhs = share_ints(&mut ctx, &[123_456, 99], 26);
        let rhs = share_ints(&mut ctx, &[123_457, 99], 26);
        let before = ctx.ledger();
        let flags = lt_ints(&mut ctx, &lhs, &rhs);
        let d = ctx.ledger().since(&before);
        // Bit products, ~2 log B ladder layers, one combining reduction.
        assert!(d.rounds <= 2 + 2 * 5, "rounds {}", d.rounds);
        // At most B products, 2B ladder products, and one reduction each.
        assert!(d.elements_sent <= 2 * (26 + 2 * 26 + 1) * 6);
        assert_eq!(open_flags(&mut ctx, &flags), [1, 0]);
    }

    #[test]
    fn select_picks_the_flagged_branch() {
        let mut ctx = ctx3();
        let flags = shamir::share_batch(&mut ctx, &[Fp255::ONE, Fp255::ZERO]);
        let a = shamir::share_batch(&mut ctx, &[Fp255::from_u64(10), Fp255::from_u64(20)]);
        let b = shamir::share_batch(&mut ctx, &[Fp255::from_u64(30), Fp255::from_u64(40)]);
        let out = select(&mut ctx, &flags, &a, &b);
        let vals = shamir::open_batch(&mut ctx, &out);
        assert_eq!(vals, [Fp255::from_u64(10), Fp255::from_u64(40)]);
    }

    #[test]
    fn select_ints_switches_whole_integers() {
        let mut ctx = ctx3();
        let flags = shamir::share_batch(&mut ctx, &[Fp255::ZERO, Fp255::ONE]);
        let a = share_ints(&mut ctx, &[11, 12], 5);
        let b = share_ints(&mut ctx, &[21, 22], 5);
        let out = select_ints(&mut ctx, &flags, &a, &b);
        assert_eq!(open_ints(&mut ctx, &out), [21, 12]);
    }

    #[test]
    fn concat_orders_high_then_low() {
        let mut ctx = ctx3();
        let hi = share_ints(&mut ctx, &[5], 3);
        let lo = share_ints(&mut ctx, &[2], 4);
        let key = hi[0].concat(&lo[0]);
        assert_eq!(key.width(), 7);
        assert_eq!(open_ints(&mut ctx, &[key]), [5 * 16 + 2]);
    }

    #[test]
    fn comparisons_accept_public_constants() {
        let mut ctx = ctx3();
        let parties = ctx.parties();
        let shared = share_ints(&mut ctx, &[9, 9], 4);
        let consts = [
            BitSharedInt::constant(parties, 12, 4),
            BitSharedInt::constant(parties, 9, 4),
        ];
        let lt = lt_ints(&mut ctx, &shared, &consts);
        assert_eq!(open_flags(&mut ctx, &lt), [1, 0]);
        let eq = eq_ints(&mut ctx, &shared, &consts);
        assert_eq!(open_flags(&mut ctx, &eq), [0, 1]);
    }

    #[test]
    fn preprocessed_random_bits_are_bits() {
        let mut ctx = ctx3();
        let before = ctx.ledger();
        let bits = rand_bits(&mut ctx, 64);
        assert_eq!(ctx.ledger(), before, "preprocessing must be free");
        let vals = open_flags(&mut ctx, &bits);
        assert!(vals.iter().all(|v| *v <= 1));
        assert!(vals.iter().any(|v| *v == 0) && vals.iter().any(|v| *v == 1));
    }
}
