//! Sparse multiplication over secret-shared tuple lists.
//!
//! Every protocol here follows the same shape: lay the operands' nonzero
//! tuples out as records, sort them so interacting tuples become adjacent,
//! do the arithmetic with data-independent batched steps, aggregate runs
//! that target the same output coordinate, truncate the fixed-point scale
//! back down once, and finally shuffle and open only the placeholder
//! pattern to discard dead tuples. All communication depends on public
//! metadata alone: dimensions, nonzero counts per group, and nothing else.
//!
//! Values are fixed-point at [`fixed::FRAC_BITS`]. Interior steps keep the
//! doubled product scale exactly, so the naive and optimized variants of
//! each stage produce identical shares up to resharing randomness and
//! identical reconstructions, and a single end truncation per pipeline
//! bounds the rounding error by one output ulp.

mod agg;
mod mloop;

pub use agg::{agg_equal_coord, agg_equal_coord_opt};
pub use mloop::mult_loop;

use crate::bits::{self, BitSharedInt};
use crate::field::Field;
use crate::fixed;
use crate::oracle::DimMismatch;
use crate::runtime::Ctx;
use crate::shamir::{self, Share};
use crate::sort::{self, Record};
use crate::sparse::{
    NonZeroTuple, Orientation, SparseMatrixShares, SparseMatrixTuples, SparseVectorShares,
};

/// Protocol variant selector. Both variants compute the same function and
/// reconstruct identically; they differ in round depth (linear vs
/// logarithmic in the tuple count) and constant factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Naive,
    Optimized,
}

/// The tight upper bound on the number of scalar multiplications a sparse
/// matrix product can need, from per-group nonzero counts alone: matching
/// column-of-X and row-of-Y counts multiplied and summed.
pub fn minmult_from_counts(x_col_nnz: &[u64], y_row_nnz: &[u64]) -> Result<u64, DimMismatch> {
    if x_col_nnz.len() != y_row_nnz.len() {
        return Err(DimMismatch(format!(
            "inner dimensions disagree: {} columns of X vs {} rows of Y",
            x_col_nnz.len(),
            y_row_nnz.len()
        )));
    }
    Ok(x_col_nnz.iter().zip(y_row_nnz).map(|(a, b)| a * b).sum())
}

/// [`minmult_from_counts`] read off two shared matrices' public metadata.
pub fn compute_minmult<F: Field>(
    x: &SparseMatrixShares<F>,
    y: &SparseMatrixShares<F>,
) -> Result<u64, DimMismatch> {
    if x.orientation != Orientation::ColumnGrouped {
        return Err(DimMismatch("X must be column-grouped".into()));
    }
    if y.orientation != Orientation::RowGrouped {
        return Err(DimMismatch("Y must be row-grouped".into()));
    }
    if x.cols != y.rows {
        return Err(DimMismatch(format!(
            "inner dimensions disagree: X is {}x{}, Y is {}x{}",
            x.rows, x.cols, y.rows, y.cols
        )));
    }
    minmult_from_counts(&x.group_nnz(), &y.group_nnz())
}

/// Discard placeholder records. A shuffle breaks the link between list
/// position and origin, then one batched opening reveals exactly the
/// placeholder pattern of the shuffled list, i.e. the output length and
/// nothing more. Survivors keep their (still shared) keys and values.
pub fn placeholder_removal<F: Field>(
    ctx: &mut Ctx<F>,
    mut records: Vec<Record<F>>,
) -> Vec<Record<F>> {
    if records.is_empty() {
        return records;
    }
    sort::shuffle_records(ctx, &mut records);
    let keys: Vec<BitSharedInt<F>> = records.iter().map(|r| r.key.clone()).collect();
    let flags = bits::eq_zero(ctx, &keys);
    let opened = shamir::open_batch(ctx, &flags);
    records
        .into_iter()
        .zip(opened)
        .filter_map(|(r, f)| (f == F::ZERO).then_some(r))
        .collect()
}

/// Shared pipeline tail: sort by output coordinate, collapse equal
/// coordinates, truncate every value in one batch while the length is still
/// the public input-derived bound, then remove placeholders.
fn aggregate_truncate_remove<F: Field>(
    ctx: &mut Ctx<F>,
    mut records: Vec<Record<F>>,
    mode: Mode,
) -> Vec<Record<F>> {
    sort::radix_sort_records(ctx, &mut records);
    match mode {
        Mode::Naive => agg_equal_coord(ctx, &mut records),
        Mode::Optimized => agg_equal_coord_opt(ctx, &mut records),
    }
    let sums: Vec<Share<F>> = records.iter().map(|r| r.payload[0].clone()).collect();
    let cut = shamir::trunc_batch(ctx, &sums, fixed::FRAC_BITS);
    for (r, v) in records.iter_mut().zip(cut) {
        r.payload[0] = v;
    }
    placeholder_removal(ctx, records)
}

/// Inner product of two shared sparse vectors. Sorting the combined tuple
/// list puts equal coordinates side by side; at most one neighbour pair per
/// coordinate can match since coordinates are unique within each vector.
/// Result is a degree-t share at the standard scale.
pub fn sparse_vec_mult<F: Field>(
    ctx: &mut Ctx<F>,
    x: &SparseVectorShares<F>,
    y: &SparseVectorShares<F>,
) -> Result<Share<F>, DimMismatch> {
    if x.dim != y.dim {
        return Err(DimMismatch(format!(
            "vector dimensions disagree: {} vs {}",
            x.dim, y.dim
        )));
    }
    let parties = ctx.parties();
    let n = x.nnz() + y.nnz();
    if n < 2 {
        return Ok(Share::zero(parties));
    }
    let mut records: Vec<Record<F>> = x
        .tuples
        .iter()
        .chain(&y.tuples)
        .map(|t| Record { key: t.coords[0].clone(), payload: vec![t.value.clone()] })
        .collect();
    sort::radix_sort_records(ctx, &mut records);
    let eq = agg::adjacent_eq(ctx, &records);
    let lhs: Vec<Share<F>> = records[..n - 1].iter().map(|r| r.payload[0].clone()).collect();
    let rhs: Vec<Share<F>> = records[1..].iter().map(|r| r.payload[0].clone()).collect();
    let prods = shamir::mul_batch(ctx, &lhs, &rhs);
    let sum = shamir::inner_product_local(ctx, &eq, &prods);
    Ok(shamir::trunc_batch(ctx, &[sum], fixed::FRAC_BITS).pop().unwrap())
}

/// Matrix-vector product X·y for a row-grouped X. Tuples are keyed by
/// (column, row) with the public row index entering as constant bits and
/// row 0 reserved for y's tuples, so after sorting each column group leads
/// with its vector entry. The multiplication pass scales matrix values by
/// their column's vector value, the column key is then discarded (a free
/// bit slice), and the tail aggregates per row. Output tuples exist for
/// every row of X that has any nonzero, explicit zeros included, so the
/// revealed output length is itself public metadata.
pub fn sparse_matvec<F: Field>(
    ctx: &mut Ctx<F>,
    x: &SparseMatrixShares<F>,
    y: &SparseVectorShares<F>,
    mode: Mode,
) -> Result<SparseVectorShares<F>, DimMismatch> {
    if x.orientation != Orientation::RowGrouped {
        return Err(DimMismatch("matrix-vector product needs a row-grouped matrix".into()));
    }
    if x.cols != y.dim {
        return Err(DimMismatch(format!(
            "dimensions disagree: X is {}x{}, y has dimension {}",
            x.rows, x.cols, y.dim
        )));
    }
    if x.nnz() == 0 || y.nnz() == 0 {
        return Ok(SparseVectorShares { tuples: Vec::new(), dim: x.rows });
    }
    let parties = ctx.parties();
    let row_width = bits::required_width(x.rows);
    let key_width = bits::required_width(x.cols) + row_width;
    let total = (x.nnz() + y.nnz()) as u64;
    ctx.storage_acquire(total * (key_width as u64 + 1));

    let mut records: Vec<Record<F>> = Vec::with_capacity(x.nnz() + y.nnz());
    for t in &y.tuples {
        let row = BitSharedInt::constant(parties, 0, row_width);
        records.push(Record {
            key: t.coords[0].concat(&row),
            payload: vec![t.value.clone()],
        });
    }
    for (g, group) in x.groups.iter().enumerate() {
        let row = BitSharedInt::constant(parties, g as u64 + 1, row_width);
        for t in &group.tuples {
            records.push(Record {
                key: t.coords[0].concat(&row),
                payload: vec![t.value.clone()],
            });
        }
    }

    sort::radix_sort_records(ctx, &mut records);
    mult_loop(ctx, &mut records, row_width, mode);
    for r in &mut records {
        r.key = BitSharedInt::from_bits(r.key.bits()[..row_width as usize].to_vec());
    }
    let survivors = aggregate_truncate_remove(ctx, records, mode);

    ctx.storage_release(total * (key_width as u64 + 1));
    let tuples: Vec<NonZeroTuple<F>> = survivors
        .into_iter()
        .map(|mut r| NonZeroTuple { coords: vec![r.key], value: r.payload.pop().unwrap() })
        .collect();
    ctx.storage_acquire(tuples.len() as u64 * (row_width as u64 + 1));
    Ok(SparseVectorShares { tuples, dim: x.rows })
}

/// Matrix product X·Y for a column-grouped X and row-grouped Y. Matching
/// groups pair every X tuple of column k with every Y tuple of row k, so
/// the list length is exactly the multiplication bound from the public
/// metadata; all raw products are formed locally and reshared in one batch.
/// Keys are (row of X, column of Y) and the tail aggregates shared (i, j)
/// targets across k.
pub fn sparse_matmat<F: Field>(
    ctx: &mut Ctx<F>,
    x: &SparseMatrixShares<F>,
    y: &SparseMatrixShares<F>,
    mode: Mode,
) -> Result<SparseMatrixTuples<F>, DimMismatch> {
    let minmult = compute_minmult(x, y)?;
    if minmult == 0 {
        return Ok(SparseMatrixTuples { tuples: Vec::new(), rows: x.rows, cols: y.cols });
    }
    let wi = bits::required_width(x.rows);
    let wj = bits::required_width(y.cols);
    ctx.storage_acquire(minmult * (wi as u64 + wj as u64 + 1));

    let mut raw = Vec::with_capacity(minmult as usize);
    let mut keys = Vec::with_capacity(minmult as usize);
    for (xg, yg) in x.groups.iter().zip(&y.groups) {
        for xt in &xg.tuples {
            for yt in &yg.tuples {
                raw.push(xt.value.mul_local(&yt.value));
                keys.push(xt.coords[0].concat(&yt.coords[0]));
            }
        }
    }
    debug_assert_eq!(raw.len() as u64, minmult);
    let vals = shamir::reduce_degree_batch(ctx, raw);
    let records: Vec<Record<F>> = keys
        .into_iter()
        .zip(vals)
        .map(|(key, v)| Record { key, payload: vec![v] })
        .collect();

    let survivors = aggregate_truncate_remove(ctx, records, mode);

    ctx.storage_release(minmult * (wi as u64 + wj as u64 + 1));
    let tuples: Vec<NonZeroTuple<F>> = survivors
        .into_iter()
        .map(|mut r| {
            let b = r.key.bits();
            let j = BitSharedInt::from_bits(b[..wj as usize].to_vec());
            let i = BitSharedInt::from_bits(b[wj as usize..].to_vec());
            NonZeroTuple { coords: vec![i, j], value: r.payload.pop().unwrap() }
        })
        .collect();
    ctx.storage_acquire(tuples.len() as u64 * (wi as u64 + wj as u64 + 1));
    Ok(SparseMatrixTuples { tuples, rows: x.rows, cols: y.cols })
}

/// Gram matrix XᵀX of a row-grouped X, as the matrix product of the
/// transposed view with the original. The multiplication bound specializes
/// to the sum of squared row counts.
pub fn gram<F: Field>(
    ctx: &mut Ctx<F>,
    x: &SparseMatrixShares<F>,
    mode: Mode,
) -> Result<SparseMatrixTuples<F>, DimMismatch> {
    if x.orientation != Orientation::RowGrouped {
        return Err(DimMismatch("gram matrix needs a row-grouped input".into()));
    }
    sparse_matmat(ctx, &x.transposed_view(), x, mode)
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::field::Fp255;
    use crate::oracle::{self, PlainMatrix, PlainVector};
    use crate::sparse::{
        owner_share_matrix, owner_share_vector, reconstruct_matrix_tuples, reconstruct_vector,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    const TOL: f64 = 1.0 / (1u64 << 18) as f64;

    fn random_vector(rng: &mut ChaCha12Rng, dim: u64, density: f64) -> Vec<(u64, f64)> {
        let mut out = Vec::new();
        for c in 1..=dim {
            if rng.gen_bool(density) {
                out.push((c, (rng.gen_range(-40..40) as f64) / 8.0));
            }
        }
        out
    }

    fn random_matrix(rng: &mut ChaCha12Rng, rows: u64, cols: u64, density: f64) -> Vec<(u64, u64, f64)> {
        let mut out = Vec::new();
        for r in 1..=rows {
            for c in 1..=cols {
                if rng.gen_bool(density) {
                    out.push((r, c, (rng.gen_range(-40..40) as f64) / 8.0));
                }
            }
        }
        out
    }

    #[test]
    fn minmult_matches_the_hand_example() {
        assert_eq!(minmult_from_counts(&[1, 2], &[3, 4]).unwrap(), 11);
        assert!(minmult_from_counts(&[1], &[2, 3]).is_err());
    }

    #[test]
    fn vec_mult_disjoint_supports_give_zero() {
        let mut ctx = test_ctx();
        let x = owner_share_vector(&mut ctx, &[(1, 2.0), (3, 4.0)], 8).unwrap();
        let y = owner_share_vector(&mut ctx, &[(2, 5.0), (4, 1.0)], 8).unwrap();
        let s = sparse_vec_mult(&mut ctx, &x, &y).unwrap();
        assert_eq!(fixed::decode::<Fp255>(shamir::reconstruct(&mut ctx, &s)), 0.0);
    }

    #[test]
    fn vec_mult_single_overlap_is_the_product() {
        let mut ctx = test_ctx();
        let x = owner_share_vector(&mut ctx, &[(3, -2.5)], 8).unwrap();
        let y = owner_share_vector(&mut ctx, &[(3, 4.0)], 8).unwrap();
        let s = sparse_vec_mult(&mut ctx, &x, &y).unwrap();
        let got = fixed::decode::<Fp255>(shamir::reconstruct(&mut ctx, &s));
        assert!((got + 10.0).abs() < TOL);
    }

    #[test]
    fn vec_mult_trivial_cases_and_mismatch() {
        let mut ctx = test_ctx();
        let x = owner_share_vector(&mut ctx, &[], 8).unwrap();
        let y = owner_share_vector(&mut ctx, &[(2, 5.0)], 8).unwrap();
        let s = sparse_vec_mult(&mut ctx, &x, &y).unwrap();
        assert_eq!(shamir::reconstruct(&mut ctx, &s), Fp255::ZERO);

        let z = owner_share_vector(&mut ctx, &[(1, 1.0)], 9).unwrap();
        assert!(sparse_vec_mult(&mut ctx, &y, &z).is_err());
    }

    #[test]
    fn vec_mult_matches_the_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..8 {
            let xs = random_vector(&mut rng, 24, 0.3);
            let ys = random_vector(&mut rng, 24, 0.3);
            let expect = oracle::oracle_dot(
                &PlainVector { dim: 24, entries: xs.clone() },
                &PlainVector { dim: 24, entries: ys.clone() },
            )
            .unwrap();
            let mut ctx = test_ctx();
            let x = owner_share_vector(&mut ctx, &xs, 24).unwrap();
            let y = owner_share_vector(&mut ctx, &ys, 24).unwrap();
            let s = sparse_vec_mult(&mut ctx, &x, &y).unwrap();
            let got = fixed::decode::<Fp255>(shamir::reconstruct(&mut ctx, &s));
            assert!((got - expect).abs() < TOL, "{got} vs {expect}");
        }
    }

    fn check_matvec_against_oracle(
        entries: &[(u64, u64, f64)],
        ys: &[(u64, f64)],
        rows: u64,
        cols: u64,
        mode: Mode,
    ) {
        let mut ctx = test_ctx();
        let x = owner_share_matrix(&mut ctx, entries, rows, cols, Orientation::RowGrouped)
            .unwrap();
        let y = owner_share_vector(&mut ctx, ys, cols).unwrap();
        let out = sparse_matvec(&mut ctx, &x, &y, mode).unwrap();
        assert_eq!(out.dim, rows);
        let got = reconstruct_vector(&mut ctx, &out);

        let expect = oracle::oracle_matvec(
            &PlainMatrix { rows, cols, entries: entries.to_vec() },
            &PlainVector { dim: cols, entries: ys.to_vec() },
        )
        .unwrap();
        // the protocol keeps one tuple per nonzero row of X; rows whose
        // columns all miss y carry an explicit zero
        let expect_map: std::collections::BTreeMap<u64, f64> =
            expect.entries.iter().copied().collect();
        let live_rows: std::collections::BTreeSet<u64> =
            entries.iter().map(|e| e.0).collect();
        assert_eq!(
            got.entries.iter().map(|e| e.0).collect::<Vec<_>>(),
            live_rows.iter().copied().collect::<Vec<_>>()
        );
        for (r, v) in &got.entries {
            let want = expect_map.get(r).copied().unwrap_or(0.0);
            assert!((v - want).abs() < TOL, "row {r}: {v} vs {want} ({mode:?})");
        }
    }

    #[test]
    fn matvec_matches_the_oracle_in_both_modes() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..4 {
            let entries = random_matrix(&mut rng, 9, 7, 0.35);
            let ys = random_vector(&mut rng, 7, 0.5);
            if entries.is_empty() || ys.is_empty() {
                continue;
            }
            for mode in [Mode::Naive, Mode::Optimized] {
                check_matvec_against_oracle(&entries, &ys, 9, 7, mode);
            }
        }
    }

    #[test]
    fn matvec_applies_a_permutation() {
        // row i picks column i+1 cyclically, y is full
        let entries: Vec<(u64, u64, f64)> =
            (1..=5).map(|i| (i, i % 5 + 1, 1.0)).collect();
        let ys: Vec<(u64, f64)> = (1..=5).map(|c| (c, c as f64)).collect();
        let mut ctx = test_ctx();
        let x = owner_share_matrix(&mut ctx, &entries, 5, 5, Orientation::RowGrouped).unwrap();
        let y = owner_share_vector(&mut ctx, &ys, 5).unwrap();
        let out = sparse_matvec(&mut ctx, &x, &y, Mode::Optimized).unwrap();
        let got = reconstruct_vector(&mut ctx, &out);
        let expect: Vec<(u64, f64)> = (1..=5).map(|i| (i, (i % 5 + 1) as f64)).collect();
        for ((gc, gv), (ec, ev)) in got.entries.iter().zip(&expect) {
            assert_eq!(gc, ec);
            assert!((gv - ev).abs() < TOL);
        }
    }

    #[test]
    fn matvec_empty_operands_short_circuit() {
        let mut ctx = test_ctx();
        let x = owner_share_matrix(&mut ctx, &[(1, 2, 1.0)], 4, 4, Orientation::RowGrouped)
            .unwrap();
        let empty_y = owner_share_vector(&mut ctx, &[], 4).unwrap();
        let out = sparse_matvec(&mut ctx, &x, &empty_y, Mode::Naive).unwrap();
        assert_eq!(out.nnz(), 0);
        assert_eq!(out.dim, 4);

        let empty_x =
            owner_share_matrix(&mut ctx, &[], 4, 4, Orientation::RowGrouped).unwrap();
        let y = owner_share_vector(&mut ctx, &[(2, 1.0)], 4).unwrap();
        let out = sparse_matvec(&mut ctx, &empty_x, &y, Mode::Naive).unwrap();
        assert_eq!(out.nnz(), 0);
    }

    #[test]
    fn matvec_modes_reconstruct_the_same_vector() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let entries = random_matrix(&mut rng, 8, 6, 0.4);
        let ys = random_vector(&mut rng, 6, 0.6);
        let mut outs = Vec::new();
        for mode in [Mode::Naive, Mode::Optimized] {
            let mut ctx = test_ctx();
            let x = owner_share_matrix(&mut ctx, &entries, 8, 6, Orientation::RowGrouped)
                .unwrap();
            let y = owner_share_vector(&mut ctx, &ys, 6).unwrap();
            let out = sparse_matvec(&mut ctx, &x, &y, mode).unwrap();
            outs.push(reconstruct_vector(&mut ctx, &out));
        }
        assert_eq!(outs[0].entries.len(), outs[1].entries.len());
        for (a, b) in outs[0].entries.iter().zip(&outs[1].entries) {
            assert_eq!(a.0, b.0);
            // interior arithmetic is identical; only the final truncation
            // masks differ, costing at most an output ulp each
            assert!((a.1 - b.1).abs() <= 2.0 / (1u64 << 32) as f64);
        }
    }

    #[test]
    fn matvec_keeps_explicit_zero_rows() {
        // row 2's only column misses y entirely, row 3 hits y with value 0
        let entries = vec![(1, 1, 2.0), (2, 3, 1.5), (3, 1, 0.0)];
        let ys = vec![(1, 4.0)];
        let mut ctx = test_ctx();
        let x = owner_share_matrix(&mut ctx, &entries, 3, 3, Orientation::RowGrouped).unwrap();
        let y = owner_share_vector(&mut ctx, &ys, 3).unwrap();
        let out = sparse_matvec(&mut ctx, &x, &y, Mode::Optimized).unwrap();
        assert_eq!(out.nnz(), 3);
        let got = reconstruct_vector(&mut ctx, &out);
        assert_eq!(got.entries.iter().map(|e| e.0).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!((got.entries[0].1 - 8.0).abs() < TOL);
        assert!(got.entries[1].1.abs() < TOL);
        assert!(got.entries[2].1.abs() < TOL);
    }

    #[test]
    fn matvec_costs_depend_only_on_public_metadata() {
        // same dimensions and nonzero counts, different contents
        let a_entries = vec![(1, 1, 2.0), (1, 3, -1.0), (4, 2, 0.5)];
        let b_entries = vec![(2, 4, 9.0), (3, 1, 3.25), (3, 2, -7.0)];
        let mut ledgers = Vec::new();
        for (entries, ys) in [
            (a_entries, vec![(1, 1.0), (4, 2.0)]),
            (b_entries, vec![(2, -3.0), (3, 0.25)]),
        ] {
            let mut ctx = test_ctx();
            let x = owner_share_matrix(&mut ctx, &entries, 5, 4, Orientation::RowGrouped)
                .unwrap();
            let y = owner_share_vector(&mut ctx, &ys, 4).unwrap();
            let before = ctx.ledger();
            sparse_matvec(&mut ctx, &x, &y, Mode::Optimized).unwrap();
            ledgers.push(ctx.ledger().since(&before));
        }
        assert_eq!(ledgers[0], ledgers[1]);
    }

    #[test]
    fn matmat_matches_the_oracle_in_both_modes() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let xe = random_matrix(&mut rng, 6, 5, 0.4);
        let ye = random_matrix(&mut rng, 5, 7, 0.4);
        let px = PlainMatrix { rows: 6, cols: 5, entries: xe.clone() };
        let py = PlainMatrix { rows: 5, cols: 7, entries: ye.clone() };
        let expect = oracle::oracle_matmul(&px, &py).unwrap();
        let expect_map: std::collections::BTreeMap<(u64, u64), f64> =
            expect.entries.iter().map(|&(r, c, v)| ((r, c), v)).collect();

        for mode in [Mode::Naive, Mode::Optimized] {
            let mut ctx = test_ctx();
            let x = owner_share_matrix(&mut ctx, &xe, 6, 5, Orientation::ColumnGrouped)
                .unwrap();
            let y = owner_share_matrix(&mut ctx, &ye, 5, 7, Orientation::RowGrouped)
                .unwrap();
            let out = sparse_matmat(&mut ctx, &x, &y, mode).unwrap();
            assert_eq!((out.rows, out.cols), (6, 7));
            let got = reconstruct_matrix_tuples(&mut ctx, &out);
            assert_eq!(
                got.entries.iter().map(|e| (e.0, e.1)).collect::<Vec<_>>(),
                expect_map.keys().copied().collect::<Vec<_>>(),
                "support must be the pairs with at least one matching product"
            );
            for (r, c, v) in &got.entries {
                let want = expect_map[&(*r, *c)];
                assert!((v - want).abs() < TOL, "({r},{c}): {v} vs {want}");
            }
        }
    }

    #[test]
    fn matmat_disjoint_supports_give_an_empty_product() {
        let mut ctx = test_ctx();
        let x = owner_share_matrix(&mut ctx, &[(1, 1, 2.0)], 3, 3, Orientation::ColumnGrouped)
            .unwrap();
        let y = owner_share_matrix(&mut ctx, &[(2, 2, 3.0)], 3, 3, Orientation::RowGrouped)
            .unwrap();
        let out = sparse_matmat(&mut ctx, &x, &y, Mode::Optimized).unwrap();
        assert!(out.tuples.is_empty());
    }

    #[test]
    fn matmat_rejects_wrong_shapes() {
        let mut ctx = test_ctx();
        let x = owner_share_matrix(&mut ctx, &[], 3, 3, Orientation::RowGrouped).unwrap();
        let y = owner_share_matrix(&mut ctx, &[], 3, 3, Orientation::RowGrouped).unwrap();
        assert!(sparse_matmat(&mut ctx, &x, &y, Mode::Naive).is_err());

        let x = owner_share_matrix(&mut ctx, &[], 3, 4, Orientation::ColumnGrouped).unwrap();
        let y = owner_share_matrix(&mut ctx, &[], 3, 3, Orientation::RowGrouped).unwrap();
        assert!(sparse_matmat(&mut ctx, &x, &y, Mode::Naive).is_err());
    }

    #[test]
    fn gram_matches_the_oracle_and_is_symmetric() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let xe = random_matrix(&mut rng, 5, 6, 0.4);
        let px = PlainMatrix { rows: 5, cols: 6, entries: xe.clone() };
        let xt = PlainMatrix {
            rows: 6,
            cols: 5,
            entries: xe.iter().map(|&(r, c, v)| (c, r, v)).collect(),
        };
        let expect = oracle::oracle_matmul(&xt, &px).unwrap();
        let expect_map: std::collections::BTreeMap<(u64, u64), f64> =
            expect.entries.iter().map(|&(r, c, v)| ((r, c), v)).collect();

        let mut ctx = test_ctx();
        let x = owner_share_matrix(&mut ctx, &xe, 5, 6, Orientation::RowGrouped).unwrap();
        let out = gram(&mut ctx, &x, Mode::Optimized).unwrap();
        assert_eq!((out.rows, out.cols), (6, 6));
        let got = reconstruct_matrix_tuples(&mut ctx, &out);
        let got_map: std::collections::BTreeMap<(u64, u64), f64> =
            got.entries.iter().map(|&(r, c, v)| ((r, c), v)).collect();
        for (&(r, c), v) in &got_map {
            let want = expect_map.get(&(r, c)).copied().unwrap_or(0.0);
            assert!((v - want).abs() < TOL, "({r},{c}): {v} vs {want}");
            let mirror = got_map.get(&(c, r)).copied().unwrap_or(f64::NAN);
            assert!((v - mirror).abs() < 2.0 * TOL, "asymmetry at ({r},{c})");
        }
    }

    #[test]
    fn removal_keeps_live_records_and_reveals_one_flag_each() {
        let mut ctx = test_ctx();
        let pairs = vec![(0, 0.0), (3, 1.0), (0, 0.0), (7, -2.0), (5, 0.5)];
        let records = shared_records(&mut ctx, &pairs, 3);
        let before = ctx.ledger();
        let survivors = placeholder_removal(&mut ctx, records);
        let revealed = ctx.ledger().since(&before).opened_values;
        assert_eq!(revealed, pairs.len() as u64);
        let mut got = open_records(&mut ctx, &survivors);
        got.sort_by_key(|e| e.0);
        assert_eq!(got, vec![(3, 1.0), (5, 0.5), (7, -2.0)]);
    }
}
