//! Data-independent sorting, shuffling, and maximum selection.
//!
//! Two sort engines live here, both over records that pair a bitwise-shared
//! key with an arithmetic payload.
//!
//! [`sort_records`] is Batcher's odd-even mergesort. The comparator schedule
//! depends only on the public list length, so the access pattern leaks
//! nothing; each schedule layer runs its comparisons and its conditional
//! swaps as single batched barriers, giving O(log^2 n) layers and about
//! n log^2 n / 4 comparators. Every comparator pays a full comparison
//! circuit, which is fine for the short lists of the quantile protocol but
//! multiplies the big tuple-list sorts by log^2 n.
//!
//! [`radix_sort_records`] is the engine the multiplication pipelines use: a
//! stable least-significant-bit radix sort whose passes cost Θ(n) share
//! slots each, Θ(width · n) overall. A pass never compares anything; it
//! derives each record's destination rank from prefix sums over one shared
//! bit plane and applies the hidden rank permutation by shuffling the rank
//! column and opening it. The opened column is the composition of a secret
//! data-dependent permutation with a fresh uniform one, so its distribution
//! is the uniform distribution on permutations whatever the data — the
//! ledger counts those openings as masked wire traffic, not as revealed
//! values.
//!
//! Shuffling itself is the resharing kind: the list passes through enough
//! permute-and-reshare stages that every coalition of up to t parties is
//! absent from at least one stage, so nobody can trace a slot end to end.
//! Its cost is linear in the share slots moved, which is also what keeps
//! placeholder removal (shuffle, then open only the emptiness flags) cheap.

use crate::bits::{self, BitSharedInt};
use crate::field::Field;
use crate::runtime::Ctx;
use crate::shamir::{self, Share};

/// One sortable record: the key is compared, the payload rides along.
#[derive(Debug, Clone)]
pub struct Record<F: Field> {
    pub key: BitSharedInt<F>,
    pub payload: Vec<Share<F>>,
}

/// Comparator layers of Batcher's odd-even mergesort for an arbitrary list
/// length. Every pair is (low index, high index); pairs within a layer are
/// disjoint, so one layer is one parallel step. Comparators always direct
/// the larger key to the higher index, which is exactly why truncating the
/// network at `n` works: the virtual tail of plus-infinity padding that
/// completes a power of two never needs to move.
pub fn comparator_layers(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut layers = Vec::new();
    let mut p = 1;
    while p < n {
        let mut k = p;
        loop {
            let mut layer = Vec::new();
            let mut j = k % p;
            while j + k < n {
                for i in 0..k.min(n - j - k) {
                    let lo = i + j;
                    let hi = i + j + k;
                    if lo / (2 * p) == hi / (2 * p) {
                        layer.push((lo, hi));
                    }
                }
                j += 2 * k;
            }
            if !layer.is_empty() {
                layers.push(layer);
            }
            if k == 1 {
                break;
            }
            k /= 2;
        }
        p *= 2;
    }
    layers
}

/// Total comparator count of [`comparator_layers`].
pub fn comparator_count(n: usize) -> u64 {
    comparator_layers(n).iter().map(|l| l.len() as u64).sum()
}

/// Reshared products one comparator spends: the less-than circuit plus one
/// conditional-swap product per record slot (key bits and payload).
pub fn comparator_product_count(key_width: u32, payload_slots: usize) -> u64 {
    bits::lt_product_count(key_width) + key_width as u64 + payload_slots as u64
}

/// Reshared products a whole sort spends; multiply by the per-product wire
/// cost ((2t + 1)(N - 1) elements) for bytes.
pub fn sort_product_count(n: usize, key_width: u32, payload_slots: usize) -> u64 {
    comparator_count(n) * comparator_product_count(key_width, payload_slots)
}

/// Sort records ascending by key, obliviously and in place.
pub fn sort_records<F: Field>(ctx: &mut Ctx<F>, records: &mut [Record<F>]) {
    if records.len() <= 1 {
        return;
    }
    let width = records[0].key.width();
    let slots = records[0].payload.len();
    for r in records.iter() {
        assert_eq!(r.key.width(), width, "records must share one key width");
        assert_eq!(r.payload.len(), slots, "records must share one payload arity");
    }
    for layer in comparator_layers(records.len()) {
        // Out-of-order flags for every comparator in the layer at once.
        let lo_keys: Vec<BitSharedInt<F>> =
            layer.iter().map(|&(lo, _)| records[lo].key.clone()).collect();
        let hi_keys: Vec<BitSharedInt<F>> =
            layer.iter().map(|&(_, hi)| records[hi].key.clone()).collect();
        let flags = bits::lt_ints(ctx, &hi_keys, &lo_keys);

        // flag * (hi - lo) per slot; adding it to lo and subtracting from hi
        // swaps exactly when the flag is set.
        let mut flat_flags = Vec::with_capacity(layer.len() * (width as usize + slots));
        let mut diffs = Vec::with_capacity(flat_flags.capacity());
        for (cell, flag) in layer.iter().zip(flags.iter()) {
            let (lo, hi) = *cell;
            for b in 0..width as usize {
                flat_flags.push(flag.clone());
                diffs.push(records[hi].key.bit(b).sub(records[lo].key.bit(b)));
            }
            for s in 0..slots {
                flat_flags.push(flag.clone());
                diffs.push(records[hi].payload[s].sub(&records[lo].payload[s]));
            }
        }
        let deltas = shamir::mul_batch(ctx, &flat_flags, &diffs);
        let mut cursor = 0;
        for &(lo, hi) in &layer {
            let mut lo_bits = Vec::with_capacity(width as usize);
            let mut hi_bits = Vec::with_capacity(width as usize);
            for b in 0..width as usize {
                let d = &deltas[cursor + b];
                lo_bits.push(records[lo].key.bit(b).add(d));
                hi_bits.push(records[hi].key.bit(b).sub(d));
            }
            cursor += width as usize;
            let mut lo_pay = Vec::with_capacity(slots);
            let mut hi_pay = Vec::with_capacity(slots);
            for s in 0..slots {
                let d = &deltas[cursor + s];
                lo_pay.push(records[lo].payload[s].add(d));
                hi_pay.push(records[hi].payload[s].sub(d));
            }
            cursor += slots;
            records[lo] = Record { key: BitSharedInt::from_bits(lo_bits), payload: lo_pay };
            records[hi] = Record { key: BitSharedInt::from_bits(hi_bits), payload: hi_pay };
        }
    }
}

/// Stages of the resharing shuffle: one per (N - t)-party group, so that
/// every coalition of up to t parties sits out at least one stage and the
/// composed permutation stays hidden from it. That is C(N, t) groups; 3 at
/// the default (3, 1).
pub fn shuffle_stage_count(parties: usize, threshold: usize) -> u64 {
    let (n, t) = (parties as u64, threshold as u64);
    let mut c = 1u64;
    for i in 0..t {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Wire elements the resharing shuffle sends per share slot moved: every
/// stage reshares the slot, and a degree-t resharing costs (t + 1)(N - 1)
/// elements. 12 at the default (3, 1).
pub fn shuffle_cost_per_slot(parties: usize, threshold: usize) -> u64 {
    shuffle_stage_count(parties, threshold) * (threshold as u64 + 1) * (parties as u64 - 1)
}

/// A uniform permutation of 0..n drawn from the context's seeded stream.
/// In the simulator this is the composition of the per-stage permutations,
/// which no real party ever sees whole.
fn sample_permutation<F: Field>(ctx: &mut Ctx<F>, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(ctx.rng());
    p
}

/// Charge the ledger for moving `n` records of `slots` share slots each
/// through the staged resharing shuffle (or its inverse): one barrier per
/// stage, a degree-t resharing per slot per stage.
fn charge_shuffle<F: Field>(ctx: &mut Ctx<F>, n: usize, slots: u64) {
    let stages = shuffle_stage_count(ctx.parties(), ctx.threshold());
    let per_stage =
        n as u64 * slots * (ctx.threshold() as u64 + 1) * (ctx.parties() as u64 - 1);
    for _ in 0..stages {
        ctx.barrier(per_stage);
    }
}

/// Reorder in place: forward puts `old[perm[k]]` at `k`, inverse undoes it.
fn permute_vec<T: Clone>(v: &mut [T], perm: &[usize], invert: bool) {
    let old = v.to_vec();
    for (k, &p) in perm.iter().enumerate() {
        if invert {
            v[p] = old[k].clone();
        } else {
            v[k] = old[p].clone();
        }
    }
}

/// Fresh degree-t sharings of the same secrets; the mechanics of a reshare,
/// charged by the caller.
fn rerandomize_column<F: Field>(ctx: &mut Ctx<F>, column: &mut [Share<F>]) {
    for s in column.iter_mut() {
        let v = shamir::reconstruct(ctx, s);
        *s = shamir::preprocessed_share(ctx, v);
    }
}

/// Move parallel share columns through the staged shuffle under one hidden
/// permutation: one charge, every slot rerandomized, nothing opened.
fn shuffle_columns<F: Field>(
    ctx: &mut Ctx<F>,
    columns: &mut [Vec<Share<F>>],
    perm: &[usize],
    invert: bool,
) {
    charge_shuffle(ctx, perm.len(), columns.len() as u64);
    for col in columns.iter_mut() {
        assert_eq!(col.len(), perm.len());
        permute_vec(col, perm, invert);
        rerandomize_column(ctx, col);
    }
}

/// Obliviously apply a uniformly random hidden permutation by resharing:
/// records pass through the shuffle stages whole (key bits and payload
/// together), every share comes out rerandomized, and neither the
/// permutation nor any value is ever opened.
pub fn shuffle_records<F: Field>(ctx: &mut Ctx<F>, records: &mut [Record<F>]) {
    if records.len() <= 1 {
        return;
    }
    let width = records[0].key.width();
    let slots = records[0].payload.len();
    for r in records.iter() {
        assert_eq!(r.key.width(), width, "records must share one key width");
        assert_eq!(r.payload.len(), slots, "records must share one payload arity");
    }
    let perm = sample_permutation(ctx, records.len());
    charge_shuffle(ctx, records.len(), width as u64 + slots as u64);
    permute_vec(records, &perm, false);
    for r in records.iter_mut() {
        let mut key_bits = r.key.bits().to_vec();
        rerandomize_column(ctx, &mut key_bits);
        r.key = BitSharedInt::from_bits(key_bits);
        rerandomize_column(ctx, &mut r.payload);
    }
}

/// Stable rank of each record under a one-bit key, from prefix sums:
/// zeros keep their order ahead of ones. For bit b at position i with
/// z total zeros, c0 zeros and c1 ones before i, the rank is
/// c0 + b · (z + c1 - c0) — one multiplication per record, everything else
/// local. Returns degree-t arithmetic sharings of the ranks.
fn stable_ranks<F: Field>(ctx: &mut Ctx<F>, plane: &[Share<F>]) -> Vec<Share<F>> {
    let parties = ctx.parties();
    let n = plane.len();
    let mut total_ones = Share::zero(parties);
    for b in plane {
        total_ones = total_ones.add(b);
    }
    let zeros = total_ones.neg().add_const(F::from_u64(n as u64));
    let mut ones_before = Share::zero(parties);
    let mut c0 = Vec::with_capacity(n);
    let mut adj = Vec::with_capacity(n);
    for (i, _) in plane.iter().enumerate() {
        let zeros_before = ones_before.neg().add_const(F::from_u64(i as u64));
        adj.push(zeros.add(&ones_before).sub(&zeros_before));
        c0.push(zeros_before);
        ones_before = ones_before.add(&plane[i]);
    }
    let gated = shamir::mul_batch(ctx, plane, &adj);
    c0.into_iter().zip(gated).map(|(c, g)| c.add(&g)).collect()
}

/// Open a column of shuffled rank shares. The column is a secret
/// permutation composed with the fresh uniform shuffle, so the opening is
/// distributed as a uniform permutation of 0..n whatever the data: masked
/// wire traffic, not a reveal.
fn open_rank_column<F: Field>(ctx: &mut Ctx<F>, column: &[Share<F>]) -> Vec<usize> {
    let n = column.len();
    let mut seen = vec![false; n];
    shamir::open_masked_batch(ctx, column)
        .into_iter()
        .map(|v| {
            let limbs = v.to_limbs();
            let r = limbs[0] as usize;
            assert!(
                limbs[1] == 0 && limbs[2] == 0 && limbs[3] == 0 && r < n && !seen[r],
                "rank column must open to a permutation"
            );
            seen[r] = true;
            r
        })
        .collect()
}

/// Wire elements one [`radix_sort_records`] call sends, from public shape
/// alone: the first rank pass, width - 1 shuffle-open-rank-unshuffle
/// passes over two- and one-wide columns, and the final application pass
/// that moves the whole records.
pub fn radix_sort_element_count(
    parties: usize,
    threshold: usize,
    n: usize,
    key_width: u32,
    payload_slots: usize,
) -> u64 {
    if n <= 1 {
        return 0;
    }
    let n = n as u64;
    let (big_n, t) = (parties as u64, threshold as u64);
    let per_slot = shuffle_cost_per_slot(parties, threshold);
    let rank = n * (2 * t + 1) * (big_n - 1);
    let open = n * big_n * (big_n - 1);
    let per_pass = 3 * n * per_slot + open + rank;
    let finish = n * (1 + key_width as u64 + payload_slots as u64) * per_slot + open;
    rank + (key_width as u64 - 1) * per_pass + finish
}

/// Sort records ascending by key, obliviously, stably, and in place, in
/// Θ(width · n) communicated share slots.
///
/// Least-significant-bit radix: pass b reorders by bit plane b, stably, by
/// computing every record's destination rank with [`stable_ranks`] and
/// tracking the composed permutation as a shared rank column in original
/// record order. Moving a pass's bit plane into the order the previous
/// passes chose — and the composed ranks back — costs one shuffle and one
/// masked opening each way; only the final pass moves the full records.
pub fn radix_sort_records<F: Field>(ctx: &mut Ctx<F>, records: &mut [Record<F>]) {
    let n = records.len();
    if n <= 1 {
        return;
    }
    let width = records[0].key.width();
    let slots = records[0].payload.len();
    for r in records.iter() {
        assert_eq!(r.key.width(), width, "records must share one key width");
        assert_eq!(r.payload.len(), slots, "records must share one payload arity");
    }

    // Ranks after the first pass, held in original record order throughout.
    let plane: Vec<Share<F>> = records.iter().map(|r| r.key.bit(0).clone()).collect();
    let mut dest = stable_ranks(ctx, &plane);

    for b in 1..width as usize {
        let plane: Vec<Share<F>> = records.iter().map(|r| r.key.bit(b).clone()).collect();
        let perm = sample_permutation(ctx, n);
        let mut cols = [dest, plane];
        shuffle_columns(ctx, &mut cols, &perm, false);
        let [shuffled_dest, shuffled_plane] = cols;
        let ranks = open_rank_column(ctx, &shuffled_dest);

        // The plane in current sorted order, then this pass's ranks in it.
        let mut ordered_plane = vec![Share::zero(ctx.parties()); n];
        for (k, &r) in ranks.iter().enumerate() {
            ordered_plane[r] = shuffled_plane[k].clone();
        }
        let delta = stable_ranks(ctx, &ordered_plane);

        // Slot k holds the record that was at original index perm[k]; its
        // new rank is delta at its current position. Unshuffling the column
        // lines the composed ranks back up with the original order.
        let composed: Vec<Share<F>> = ranks.iter().map(|&r| delta[r].clone()).collect();
        let mut cols = [composed];
        shuffle_columns(ctx, &mut cols, &perm, true);
        [dest] = cols;
    }

    // Apply the final ranks to the full records: shuffle them together with
    // the rank column, open the ranks, place.
    let perm = sample_permutation(ctx, n);
    charge_shuffle(ctx, n, 1 + width as u64 + slots as u64);
    permute_vec(&mut dest, &perm, false);
    rerandomize_column(ctx, &mut dest);
    let mut moved = records.to_vec();
    permute_vec(&mut moved, &perm, false);
    for r in moved.iter_mut() {
        let mut key_bits = r.key.bits().to_vec();
        rerandomize_column(ctx, &mut key_bits);
        r.key = BitSharedInt::from_bits(key_bits);
        rerandomize_column(ctx, &mut r.payload);
    }
    let ranks = open_rank_column(ctx, &dest);
    for (k, rec) in moved.into_iter().enumerate() {
        records[ranks[k]] = rec;
    }
}

/// Largest of the given integers by tournament: log2 n rounds of batched
/// comparisons and bitwise selects. Nothing is opened.
pub fn recursive_max<F: Field>(ctx: &mut Ctx<F>, ints: &[BitSharedInt<F>]) -> BitSharedInt<F> {
    assert!(!ints.is_empty());
    let mut round: Vec<BitSharedInt<F>> = ints.to_vec();
    while round.len() > 1 {
        let mut lhs = Vec::with_capacity(round.len() / 2);
        let mut rhs = Vec::with_capacity(round.len() / 2);
        for pair in round.chunks_exact(2) {
            lhs.push(pair[0].clone());
            rhs.push(pair[1].clone());
        }
        let flags = bits::lt_ints(ctx, &lhs, &rhs);
        let mut next = bits::select_ints(ctx, &flags, &rhs, &lhs);
        if round.len() % 2 == 1 {
            next.push(round.last().unwrap().clone());
        }
        round = next;
    }
    round.pop().unwrap()
}
