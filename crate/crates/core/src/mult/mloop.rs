//! The per-column multiplication pass of the matrix-vector pipeline.
//!
//! Input records are sorted by (column, row) with the row in the low key
//! bits and row 0 reserved for the vector's tuples, so a column's vector
//! entry, when present, leads its group. The pass multiplies every matrix
//! tuple's value by its column's vector value, zeroes matrix tuples in
//! columns without one, and zeroes the vector tuples themselves. Output
//! values sit at the product scale (fractional bits doubled) and degree t;
//! the pipeline truncates once at the very end.
//!
//! The naive variant drags a (column, value) register through the list and
//! needs a round per record. The optimized variant reformulates the
//! register as a segmented broadcast: each position holds a reset flag
//! (new column starts here) and a candidate value (the vector entry or
//! zero), and an associative combine spreads the latest reset's value
//! rightward in logarithmically many rounds.

use super::Mode;
use crate::bits::{self, BitSharedInt};
use crate::field::Field;
use crate::runtime::Ctx;
use crate::shamir::{self, Share};
use crate::sort::Record;

/// Split each record's key into its (row, column) halves. The row occupies
/// the low bits.
fn split_keys<F: Field>(
    records: &[Record<F>],
    row_width: u32,
) -> (Vec<BitSharedInt<F>>, Vec<BitSharedInt<F>>) {
    let rw = row_width as usize;
    records
        .iter()
        .map(|r| {
            let b = r.key.bits();
            assert!(b.len() > rw, "key must contain a column above the row bits");
            (
                BitSharedInt::from_bits(b[..rw].to_vec()),
                BitSharedInt::from_bits(b[rw..].to_vec()),
            )
        })
        .unzip()
}

pub fn mult_loop<F: Field>(
    ctx: &mut Ctx<F>,
    records: &mut [Record<F>],
    row_width: u32,
    mode: Mode,
) {
    if records.is_empty() {
        return;
    }
    match mode {
        Mode::Naive => naive(ctx, records, row_width),
        Mode::Optimized => optimized(ctx, records, row_width),
    }
}

fn naive<F: Field>(ctx: &mut Ctx<F>, records: &mut [Record<F>], row_width: u32) {
    let parties = ctx.parties();
    let n = records.len();
    let (rows, cols) = split_keys(records, row_width);
    let is_y = bits::eq_zero(ctx, &rows);
    let col_width = cols[0].width() as usize;

    // Register: the last vector entry seen and its column. Vector tuples
    // load it, matrix tuples read it. The load is a bitwise conditional
    // assignment batched with this step's match gate; the actual product
    // is deferred so it can run in two batched rounds at the end.
    let mut prev_col = BitSharedInt::constant(parties, 0, col_width as u32);
    let mut prev_val = Share::zero(parties);
    let mut gates = Vec::with_capacity(n);
    let mut snapshots = Vec::with_capacity(n);
    for k in 0..n {
        let eq = bits::eq_ints(ctx, &[cols[k].clone()], &[prev_col.clone()])
            .pop()
            .unwrap();
        snapshots.push(prev_val.clone());
        let mut lhs = vec![eq];
        let mut rhs = vec![bits::not(&is_y[k])];
        for (cb, pb) in cols[k].bits().iter().zip(prev_col.bits()) {
            lhs.push(is_y[k].clone());
            rhs.push(cb.sub(pb));
        }
        lhs.push(is_y[k].clone());
        rhs.push(records[k].payload[0].sub(&prev_val));
        let out = shamir::mul_batch(ctx, &lhs, &rhs);
        gates.push(out[0].clone());
        prev_col = BitSharedInt::from_bits(
            prev_col
                .bits()
                .iter()
                .zip(&out[1..1 + col_width])
                .map(|(p, d)| p.add(d))
                .collect(),
        );
        prev_val = prev_val.add(&out[1 + col_width]);
    }

    let vals: Vec<Share<F>> = records.iter().map(|r| r.payload[0].clone()).collect();
    let gated = shamir::mul_batch(ctx, &gates, &vals);
    let raw: Vec<Share<F>> = gated
        .iter()
        .zip(&snapshots)
        .map(|(g, s)| g.mul_local(s))
        .collect();
    let out = shamir::reduce_degree_batch(ctx, raw);
    for (r, v) in records.iter_mut().zip(out) {
        r.payload[0] = v;
    }
}

/// A segment-fill element: (seen a reset, value of the latest reset).
type Fill<F> = (Share<F>, Share<F>);

/// Batched combine: the right element's value wins when it has seen a
/// reset, otherwise the left's carries through. Two products per pair;
/// associative with (0, 0) as the identity on either side.
fn combine_batch<F: Field>(
    ctx: &mut Ctx<F>,
    left: &[Fill<F>],
    right: &[Fill<F>],
) -> Vec<Fill<F>> {
    let mut lhs = Vec::with_capacity(left.len() * 2);
    let mut rhs = Vec::with_capacity(left.len() * 2);
    for (l, r) in left.iter().zip(right) {
        lhs.push(l.0.clone());
        rhs.push(r.0.clone());
        lhs.push(r.0.clone());
        rhs.push(r.1.sub(&l.1));
    }
    let prods = shamir::mul_batch(ctx, &lhs, &rhs);
    left.iter()
        .zip(right)
        .zip(prods.chunks_exact(2))
        .map(|((l, r), p)| (l.0.add(&r.0).sub(&p[0]), l.1.add(&p[1])))
        .collect()
}

/// Inclusive scan of the segment-fill combine: prefixes inside four-element
/// leaf blocks, a power-of-two tree of block totals, then one batched
/// application of each block's incoming carry.
fn segmented_fill<F: Field>(ctx: &mut Ctx<F>, mut elems: Vec<Fill<F>>) -> Vec<Fill<F>> {
    let n = elems.len();
    let parties = ctx.parties();
    let ident = || (Share::zero(parties), Share::zero(parties));
    let m4 = n.next_multiple_of(4);
    elems.resize_with(m4, ident);
    let leaves = m4 / 4;

    let mut prefixes = elems.clone();
    for step in 1..4 {
        let left: Vec<Fill<F>> =
            (0..leaves).map(|l| prefixes[4 * l + step - 1].clone()).collect();
        let right: Vec<Fill<F>> = (0..leaves).map(|l| elems[4 * l + step].clone()).collect();
        for (l, c) in combine_batch(ctx, &left, &right).into_iter().enumerate() {
            prefixes[4 * l + step] = c;
        }
    }

    let p2 = leaves.next_power_of_two();
    let mut levels: Vec<Vec<Fill<F>>> = vec![(0..p2)
        .map(|l| if l < leaves { prefixes[4 * l + 3].clone() } else { ident() })
        .collect()];
    while levels.last().unwrap().len() > 1 {
        let prev = levels.last().unwrap();
        let left: Vec<Fill<F>> = prev.iter().step_by(2).cloned().collect();
        let right: Vec<Fill<F>> = prev.iter().skip(1).step_by(2).cloned().collect();
        let combined = combine_batch(ctx, &left, &right);
        levels.push(combined);
    }

    let mut carries: Vec<Fill<F>> = vec![ident()];
    for lvl in (0..levels.len() - 1).rev() {
        let parents = carries;
        let left_totals: Vec<Fill<F>> = levels[lvl].iter().step_by(2).cloned().collect();
        let rights = combine_batch(ctx, &parents, &left_totals);
        let mut next = Vec::with_capacity(levels[lvl].len());
        for (p, r) in parents.into_iter().zip(rights) {
            next.push(p);
            next.push(r);
        }
        carries = next;
    }

    let flat: Vec<Fill<F>> = (0..m4).map(|k| carries[k / 4].clone()).collect();
    let mut out = combine_batch(ctx, &flat, &prefixes);
    out.truncate(n);
    out
}

fn optimized<F: Field>(ctx: &mut Ctx<F>, records: &mut [Record<F>], row_width: u32) {
    let parties = ctx.parties();
    let n = records.len();
    let (rows, cols) = split_keys(records, row_width);
    let is_y = bits::eq_zero(ctx, &rows);
    let col_eq = if n >= 2 {
        bits::eq_ints(ctx, &cols[..n - 1], &cols[1..])
    } else {
        Vec::new()
    };

    let vals: Vec<Share<F>> = records.iter().map(|r| r.payload[0].clone()).collect();
    // candidate at each position: the vector value if this is a vector
    // tuple, else zero. A reset fires wherever a new column begins.
    let candidates = shamir::mul_batch(ctx, &is_y, &vals);
    let mut elems: Vec<Fill<F>> = Vec::with_capacity(n);
    elems.push((Share::constant(parties, F::ONE), candidates[0].clone()));
    for k in 1..n {
        elems.push((bits::not(&col_eq[k - 1]), candidates[k].clone()));
    }
    let filled = segmented_fill(ctx, elems);

    // every column starts with its vector tuple when it has one, so the
    // fill at a matrix tuple is exactly its column's vector value (or zero
    // when the latest reset found no vector tuple leading the column)
    let not_y: Vec<Share<F>> = is_y.iter().map(bits::not).collect();
    let fills: Vec<Share<F>> = filled.into_iter().map(|f| f.1).collect();
    let gated = shamir::mul_batch(ctx, &not_y, &fills);
    let raw: Vec<Share<F>> = gated
        .iter()
        .zip(records.iter())
        .map(|(g, r)| g.mul_local(&r.payload[0]))
        .collect();
    let out = shamir::reduce_degree_batch(ctx, raw);
    for (r, v) in records.iter_mut().zip(out) {
        r.payload[0] = v;
    }
}
