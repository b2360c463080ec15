//! Aggregation of equal-coordinate runs in a sorted tuple list.
//!
//! After sorting, tuples sharing a coordinate sit in contiguous runs. Both
//! variants move each run's value total into the run's last tuple, zero the
//! values of the earlier run members, and overwrite those members'
//! coordinates with the placeholder. The naive variant walks the list, one
//! communication round per boundary. The optimized variant performs the
//! same moves through a tree over four-element leaves: going up it merges
//! ever larger adjacent blocks, going down it hands each block corrected
//! first and last accumulators, so the depth is logarithmic while the moved
//! values and every survivor are field-identical to the naive result.

use crate::bits::{self, BitSharedInt};
use crate::field::Field;
use crate::runtime::Ctx;
use crate::shamir::{self, Share};
use crate::sort::Record;

/// Batched equality bits between each record's key and its successor's.
pub(crate) fn adjacent_eq<F: Field>(ctx: &mut Ctx<F>, records: &[Record<F>]) -> Vec<Share<F>> {
    if records.len() < 2 {
        return Vec::new();
    }
    let lhs: Vec<BitSharedInt<F>> =
        records[..records.len() - 1].iter().map(|r| r.key.clone()).collect();
    let rhs: Vec<BitSharedInt<F>> = records[1..].iter().map(|r| r.key.clone()).collect();
    bits::eq_ints(ctx, &lhs, &rhs)
}

/// Overwrite the coordinate of every non-final run member with the
/// placeholder: key bit b of record k becomes (1 - e_k)·b, batched over all
/// boundaries.
fn mark_donor_coords<F: Field>(ctx: &mut Ctx<F>, records: &mut [Record<F>], e: &[Share<F>]) {
    if e.is_empty() {
        return;
    }
    let mut flags = Vec::new();
    let mut flat = Vec::new();
    for (k, ek) in e.iter().enumerate() {
        let keep = bits::not(ek);
        for b in records[k].key.bits() {
            flags.push(keep.clone());
            flat.push(b.clone());
        }
    }
    let gated = shamir::mul_batch(ctx, &flags, &flat);
    let mut cursor = 0;
    for (k, _) in e.iter().enumerate() {
        let w = records[k].key.width() as usize;
        records[k].key = BitSharedInt::from_bits(gated[cursor..cursor + w].to_vec());
        cursor += w;
    }
}

/// Linear-round aggregation: each boundary must see the accumulated value
/// of the previous one before it can move, so the list length is the round
/// count. The caller guarantees sorted input; unsorted input silently
/// aggregates the wrong runs, which is undetectable obliviously.
pub fn agg_equal_coord<F: Field>(ctx: &mut Ctx<F>, records: &mut [Record<F>]) {
    let n = records.len();
    if n < 2 {
        return;
    }
    let e = adjacent_eq(ctx, records);
    for k in 0..n - 1 {
        let moved =
            shamir::reduce_degree_batch(ctx, vec![e[k].mul_local(&records[k].payload[0])])
                .pop()
                .unwrap();
        records[k + 1].payload[0] = records[k + 1].payload[0].add(&moved);
        records[k].payload[0] = records[k].payload[0].sub(&moved);
    }
    mark_donor_coords(ctx, records, &e);
}

enum NodeKind {
    Leaf,
    Pair { left: usize, right: usize },
    Pass { child: usize },
}

struct TreeNode<F: Field> {
    lo: usize,
    hi: usize,
    kind: NodeKind,
    /// Four accumulators: destined for the first and last positions of the
    /// left and right halves. Empty for pass-through nodes.
    slots: Vec<Share<F>>,
    alleq: Option<Share<F>>,
    pending: Option<(Share<F>, Share<F>)>,
}

/// Follow pass-through wrappers down to the node that owns slots.
fn substantive<F: Field>(nodes: &[TreeNode<F>], mut id: usize) -> usize {
    loop {
        match nodes[id].kind {
            NodeKind::Pass { child } => id = child,
            _ => return id,
        }
    }
}

/// The three merge conditions of a node: (left half is one run, the halves'
/// boundary coordinates are equal, right half is one run). For a leaf the
/// halves are single elements, so the conditions are the three interior
/// boundary bits.
fn conditions<F: Field>(nodes: &[TreeNode<F>], e: &[Share<F>], id: usize) -> [Share<F>; 3] {
    match nodes[id].kind {
        NodeKind::Leaf => {
            let b = nodes[id].lo;
            [e[b].clone(), e[b + 1].clone(), e[b + 2].clone()]
        }
        NodeKind::Pair { left, right } => {
            let boundary = e[nodes[left].hi].clone();
            let l = substantive(nodes, left);
            let r = substantive(nodes, right);
            [
                nodes[l].alleq.clone().expect("child processed"),
                boundary,
                nodes[r].alleq.clone().expect("child processed"),
            ]
        }
        NodeKind::Pass { .. } => unreachable!("pass nodes have no conditions"),
    }
}

/// One batched move step: for every listed node, value flows from slot s to
/// slot s+1 when condition s holds.
fn move_step<F: Field>(
    ctx: &mut Ctx<F>,
    nodes: &mut [TreeNode<F>],
    ids: &[usize],
    conds: &[[Share<F>; 3]],
    s: usize,
) {
    let lhs: Vec<Share<F>> = conds.iter().map(|c| c[s].clone()).collect();
    let rhs: Vec<Share<F>> = ids.iter().map(|&id| nodes[id].slots[s].clone()).collect();
    let moved = shamir::mul_batch(ctx, &lhs, &rhs);
    for (&id, p) in ids.iter().zip(moved) {
        nodes[id].slots[s + 1] = nodes[id].slots[s + 1].add(&p);
        nodes[id].slots[s] = nodes[id].slots[s].sub(&p);
    }
}

/// Logarithmic-round aggregation. Pads the list to a multiple of four with
/// sentinel tuples whose coordinate is the all-ones key: they sort after
/// every live coordinate, so appending preserves order, and they are
/// rewritten to placeholders with value zero before returning (the list
/// keeps its padded length; the placeholders die at removal like any
/// other). Boundary bits touching the padding are public by construction:
/// the live/padding seam never merges and the pads always merge with each
/// other, so no comparison against the sentinel key is ever made and a live
/// all-ones coordinate cannot collide with it.
pub fn agg_equal_coord_opt<F: Field>(ctx: &mut Ctx<F>, records: &mut Vec<Record<F>>) {
    let n_real = records.len();
    if n_real == 0 {
        return;
    }
    assert!(
        records.iter().all(|r| r.payload.len() == 1),
        "aggregation expects exactly one value slot"
    );
    let parties = ctx.parties();
    let width = records[0].key.width();
    assert!(width <= 64, "aggregation keys wider than 64 bits are unsupported");
    let m4 = n_real.next_multiple_of(4);
    let all_ones = u64::MAX >> (64 - width);
    for _ in n_real..m4 {
        records.push(Record {
            key: BitSharedInt::constant(parties, all_ones, width),
            payload: vec![Share::zero(parties)],
        });
    }

    let mut e = adjacent_eq(ctx, &records[..n_real]);
    if n_real < m4 {
        e.push(Share::zero(parties));
        for _ in n_real..m4 - 1 {
            e.push(Share::constant(parties, F::ONE));
        }
    }
    debug_assert_eq!(e.len(), m4 - 1);

    // Build the tree: leaves over blocks of four, pairs above, and a
    // pass-through wherever a level has an odd node out.
    let mut nodes: Vec<TreeNode<F>> = Vec::new();
    let mut current: Vec<usize> = (0..m4 / 4)
        .map(|l| {
            nodes.push(TreeNode {
                lo: 4 * l,
                hi: 4 * l + 3,
                kind: NodeKind::Leaf,
                slots: records[4 * l..4 * l + 4].iter().map(|r| r.payload[0].clone()).collect(),
                alleq: None,
                pending: None,
            });
            nodes.len() - 1
        })
        .collect();
    let mut level_ids: Vec<Vec<usize>> = Vec::new();
    while current.len() > 1 {
        level_ids.push(current.clone());
        let mut next = Vec::new();
        for pair in current.chunks(2) {
            let id = nodes.len();
            if let [left, right] = *pair {
                nodes.push(TreeNode {
                    lo: nodes[left].lo,
                    hi: nodes[right].hi,
                    kind: NodeKind::Pair { left, right },
                    slots: Vec::new(),
                    alleq: None,
                    pending: None,
                });
            } else {
                nodes.push(TreeNode {
                    lo: nodes[pair[0]].lo,
                    hi: nodes[pair[0]].hi,
                    kind: NodeKind::Pass { child: pair[0] },
                    slots: Vec::new(),
                    alleq: None,
                    pending: None,
                });
            }
            next.push(id);
        }
        current = next;
    }
    level_ids.push(current.clone());
    let root = current[0];

    // Up: per level, capture the children's first/last accumulators, run
    // the three conditional moves, and derive whether the whole block is a
    // single run.
    for ids in &level_ids {
        let active: Vec<usize> = ids
            .iter()
            .copied()
            .filter(|&id| !matches!(nodes[id].kind, NodeKind::Pass { .. }))
            .collect();
        for &id in &active {
            if let NodeKind::Pair { left, right } = nodes[id].kind {
                let l = substantive(&nodes, left);
                let r = substantive(&nodes, right);
                let slots = vec![
                    nodes[l].slots[0].clone(),
                    nodes[l].slots[3].clone(),
                    nodes[r].slots[0].clone(),
                    nodes[r].slots[3].clone(),
                ];
                nodes[id].slots = slots;
            }
        }
        let conds: Vec<[Share<F>; 3]> =
            active.iter().map(|&id| conditions(&nodes, &e, id)).collect();
        let halves = shamir::mul_batch(
            ctx,
            &conds.iter().map(|c| c[0].clone()).collect::<Vec<_>>(),
            &conds.iter().map(|c| c[1].clone()).collect::<Vec<_>>(),
        );
        let alleq = shamir::mul_batch(
            ctx,
            &halves,
            &conds.iter().map(|c| c[2].clone()).collect::<Vec<_>>(),
        );
        for (&id, a) in active.iter().zip(alleq) {
            nodes[id].alleq = Some(a);
        }
        for s in 0..3 {
            move_step(ctx, &mut nodes, &active, &conds, s);
        }
    }

    // Down: each block receives the corrected accumulators for its first
    // and last positions, re-runs the first two moves so an inflow reaches
    // the end of the block's first run, and splits the four slots between
    // its halves. Leaves write their slots back to the list.
    nodes[root].pending =
        Some((nodes[root].slots[0].clone(), nodes[root].slots[3].clone()));
    for ids in level_ids.iter().rev() {
        for &id in ids {
            if let NodeKind::Pass { child } = nodes[id].kind {
                nodes[child].pending = nodes[id].pending.take();
            }
        }
        let active: Vec<usize> = ids
            .iter()
            .copied()
            .filter(|&id| !matches!(nodes[id].kind, NodeKind::Pass { .. }))
            .collect();
        if active.is_empty() {
            continue;
        }
        for &id in &active {
            let (mn, _) = nodes[id].pending.clone().expect("pending set by parent");
            nodes[id].slots[0] = mn;
        }
        let conds: Vec<[Share<F>; 3]> =
            active.iter().map(|&id| conditions(&nodes, &e, id)).collect();
        for s in 0..2 {
            move_step(ctx, &mut nodes, &active, &conds, s);
        }
        for &id in &active {
            let (_, mx) = nodes[id].pending.take().expect("pending set by parent");
            nodes[id].slots[3] = mx;
            match nodes[id].kind {
                NodeKind::Pair { left, right } => {
                    nodes[left].pending =
                        Some((nodes[id].slots[0].clone(), nodes[id].slots[1].clone()));
                    nodes[right].pending =
                        Some((nodes[id].slots[2].clone(), nodes[id].slots[3].clone()));
                }
                NodeKind::Leaf => {
                    for i in 0..4 {
                        records[nodes[id].lo + i].payload[0] = nodes[id].slots[i].clone();
                    }
                }
                NodeKind::Pass { .. } => unreachable!(),
            }
        }
    }

    mark_donor_coords(ctx, records, &e);
    for record in records.iter_mut().skip(n_real) {
        record.key = BitSharedInt::constant(parties, 0, width);
        record.payload[0] = Share::zero(parties);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mult::testutil::{open_records, shared_records, test_ctx};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::collections::BTreeMap;

    fn plain_agg(pairs: &[(u64, f64)]) -> Vec<(u64, f64)> {
        // runs end at the last member; survivors keep totals, donors zero
        let mut out: Vec<(u64, f64)> = pairs.to_vec();
        for k in 0..out.len().saturating_sub(1) {
            if out[k].0 == out[k + 1].0 {
                out[k + 1].1 += out[k].1;
                out[k] = (0, 0.0);
            }
        }
        out
    }

    #[test]
    fn naive_matches_the_hand_example() {
        let mut ctx = test_ctx();
        let mut records = shared_records(&mut ctx, &[(1, 2.0), (1, 3.0), (2, 5.0)], 3);
        agg_equal_coord(&mut ctx, &mut records);
        assert_eq!(
            open_records(&mut ctx, &records),
            vec![(0, 0.0), (1, 5.0), (2, 5.0)]
        );
    }

    #[test]
    fn naive_leaves_distinct_coords_alone() {
        let mut ctx = test_ctx();
        let input = [(2, 1.5), (5, -2.0), (9, 4.0)];
        let mut records = shared_records(&mut ctx, &input, 4);
        agg_equal_coord(&mut ctx, &mut records);
        assert_eq!(open_records(&mut ctx, &records), input.to_vec());
    }

    #[test]
    fn naive_collapses_a_full_run() {
        let mut ctx = test_ctx();
        let input: Vec<(u64, f64)> = (0..7).map(|i| (4, i as f64)).collect();
        let mut records = shared_records(&mut ctx, &input, 3);
        agg_equal_coord(&mut ctx, &mut records);
        let opened = open_records(&mut ctx, &records);
        assert!(opened[..6].iter().all(|&(c, v)| c == 0 && v == 0.0));
        assert_eq!(opened[6], (4, 21.0));
    }

    #[test]
    fn singleton_is_unchanged() {
        let mut ctx = test_ctx();
        let mut records = shared_records(&mut ctx, &[(3, 1.25)], 3);
        agg_equal_coord(&mut ctx, &mut records);
        assert_eq!(open_records(&mut ctx, &records), vec![(3, 1.25)]);

        let mut records = shared_records(&mut ctx, &[(3, 1.25)], 3);
        agg_equal_coord_opt(&mut ctx, &mut records);
        let opened = open_records(&mut ctx, &records);
        assert_eq!(opened[0], (3, 1.25));
        assert!(opened[1..].iter().all(|&(c, v)| c == 0 && v == 0.0));
    }

    #[test]
    fn optimized_matches_naive_positionally() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for trial in 0..40 {
            let n = rng.gen_range(1..48);
            let mut coords: Vec<u64> = (0..n).map(|_| rng.gen_range(1..12)).collect();
            coords.sort_unstable();
            let pairs: Vec<(u64, f64)> = coords
                .into_iter()
                .map(|c| (c, (rng.gen_range(-8..8) as f64) / 4.0))
                .collect();

            let mut naive_ctx = test_ctx();
            let mut naive = shared_records(&mut naive_ctx, &pairs, 5);
            agg_equal_coord(&mut naive_ctx, &mut naive);
            let naive_out = open_records(&mut naive_ctx, &naive);

            let mut opt_ctx = test_ctx();
            let mut opt = shared_records(&mut opt_ctx, &pairs, 5);
            agg_equal_coord_opt(&mut opt_ctx, &mut opt);
            let opt_out = open_records(&mut opt_ctx, &opt);

            assert_eq!(&opt_out[..pairs.len()], &naive_out[..], "trial {trial}");
            assert!(
                opt_out[pairs.len()..].iter().all(|&(c, v)| c == 0 && v == 0.0),
                "trial {trial}: padding must come back as placeholders"
            );
        }
    }

    #[test]
    fn optimized_survivors_match_group_sums() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..10 {
            let n = rng.gen_range(4..60);
            let mut coords: Vec<u64> = (0..n).map(|_| rng.gen_range(1..7)).collect();
            coords.sort_unstable();
            let pairs: Vec<(u64, f64)> = coords.into_iter().map(|c| (c, 1.0)).collect();
            let mut expect: BTreeMap<u64, f64> = BTreeMap::new();
            for &(c, v) in &pairs {
                *expect.entry(c).or_insert(0.0) += v;
            }

            let mut ctx = test_ctx();
            let mut records = shared_records(&mut ctx, &pairs, 3);
            agg_equal_coord_opt(&mut ctx, &mut records);
            let survivors: BTreeMap<u64, f64> = open_records(&mut ctx, &records)
                .into_iter()
                .filter(|&(c, _)| c != 0)
                .collect();
            assert_eq!(survivors, expect);
        }
    }

    #[test]
    fn plain_model_agrees_with_naive_protocol() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut coords: Vec<u64> = (0..20).map(|_| rng.gen_range(1..6)).collect();
        coords.sort_unstable();
        let pairs: Vec<(u64, f64)> = coords.into_iter().map(|c| (c, 2.0)).collect();
        let mut ctx = test_ctx();
        let mut records = shared_records(&mut ctx, &pairs, 3);
        agg_equal_coord(&mut ctx, &mut records);
        assert_eq!(open_records(&mut ctx, &records), plain_agg(&pairs));
    }

    #[test]
    fn optimized_rounds_grow_much_slower() {
        let mut naive_rounds = Vec::new();
        let mut opt_rounds = Vec::new();
        for n in [32usize, 128] {
            let pairs: Vec<(u64, f64)> = (0..n).map(|i| ((i / 3 + 1) as u64, 1.0)).collect();
            let mut ctx = test_ctx();
            let mut records = shared_records(&mut ctx, &pairs, 8);
            let before = ctx.ledger();
            agg_equal_coord(&mut ctx, &mut records);
            naive_rounds.push(ctx.ledger().since(&before).rounds);

            let mut ctx = test_ctx();
            let mut records = shared_records(&mut ctx, &pairs, 8);
            let before = ctx.ledger();
            agg_equal_coord_opt(&mut ctx, &mut records);
            opt_rounds.push(ctx.ledger().since(&before).rounds);
        }
        // naive scales with n, optimized with log n
        assert!(naive_rounds[1] >= naive_rounds[0] + 90, "{naive_rounds:?}");
        assert!(opt_rounds[1] <= opt_rounds[0] + 20, "{opt_rounds:?}");
    }

    #[test]
    fn tolerates_max_width_coordinates() {
        // a live coordinate equal to the all-ones sentinel key must survive
        let mut ctx = test_ctx();
        let mut records = shared_records(&mut ctx, &[(6, 1.0), (7, 2.0), (7, 3.0)], 3);
        agg_equal_coord_opt(&mut ctx, &mut records);
        let opened = open_records(&mut ctx, &records);
        assert_eq!(opened[0], (6, 1.0));
        assert_eq!(opened[1], (0, 0.0));
        assert_eq!(opened[2], (7, 5.0));
        assert_eq!(opened[3], (0, 0.0));
    }
}
