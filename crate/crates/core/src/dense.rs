//! Dense secret-shared multiplication, the baseline the sparse protocols
//! are measured against.
//!
//! Every output cell is a delayed-reduction dot product: parties multiply
//! locally, add the degree-2t partial products locally, and spend exactly
//! one masked opening per cell to truncate the fixed-point scale back down
//! (which reduces the degree as a side effect). Communication is therefore
//! proportional to the number of output cells and independent of the inner
//! dimension.

use crate::field::Field;
use crate::fixed;
use crate::oracle::DimMismatch;
use crate::runtime::Ctx;
use crate::shamir::{self, Share};
use crate::sparse::SparseError;

/// Dense grid of degree-t value shares, row-major, every cell populated.
#[derive(Debug, Clone)]
pub struct DenseShares<F: Field> {
    pub rows: u64,
    pub cols: u64,
    pub cells: Vec<Share<F>>,
}

impl<F: Field> DenseShares<F> {
    pub fn cell(&self, r: u64, c: u64) -> &Share<F> {
        &self.cells[(r * self.cols + c) as usize]
    }

    pub fn storage_elements(&self) -> u64 {
        self.rows * self.cols
    }
}

/// Share a dense row-major real matrix; values go through the usual
/// fixed-point range check. One input barrier.
pub fn share_dense<F: Field>(
    ctx: &mut Ctx<F>,
    values: &[f64],
    rows: u64,
    cols: u64,
) -> Result<DenseShares<F>, SparseError> {
    assert_eq!(values.len() as u64, rows * cols, "cell count must match dims");
    let mut encoded = Vec::with_capacity(values.len());
    for &v in values {
        if !v.is_finite() || v.abs() > fixed::VALUE_BOUND {
            return Err(SparseError::ValueRange { value: v, bound: fixed::VALUE_BOUND });
        }
        encoded.push(fixed::encode(v));
    }
    let cells = shamir::share_batch(ctx, &encoded);
    ctx.storage_acquire(rows * cols);
    Ok(DenseShares { rows, cols, cells })
}

/// Test-only opening of every cell.
pub fn reconstruct_dense<F: Field>(ctx: &mut Ctx<F>, m: &DenseShares<F>) -> Vec<f64> {
    m.cells.iter().map(|c| fixed::decode(shamir::reconstruct(ctx, c))).collect()
}

/// Local dot product followed by the shared truncation barrier. Degree-t
/// scale-2^32 output; wire cost is one truncated value no matter the length.
fn dot_sums<F: Field>(x: &[Share<F>], y: &[Share<F>], parties: usize) -> Share<F> {
    let mut acc = Share::zero(parties);
    for (a, b) in x.iter().zip(y) {
        acc = acc.add(&a.mul_local(b));
    }
    acc
}

pub fn dense_dot<F: Field>(
    ctx: &mut Ctx<F>,
    x: &DenseShares<F>,
    y: &DenseShares<F>,
) -> Result<Share<F>, DimMismatch> {
    if x.cells.len() != y.cells.len() {
        return Err(DimMismatch(format!(
            "dot of {} cells with {} cells",
            x.cells.len(),
            y.cells.len()
        )));
    }
    let sum = dot_sums(&x.cells, &y.cells, ctx.parties());
    Ok(shamir::trunc_batch(ctx, &[sum], fixed::FRAC_BITS).pop().unwrap())
}

/// n independent dots over the shared rows of X, truncated in one barrier.
pub fn dense_matvec<F: Field>(
    ctx: &mut Ctx<F>,
    x: &DenseShares<F>,
    y: &DenseShares<F>,
) -> Result<DenseShares<F>, DimMismatch> {
    if x.cols != y.rows || y.cols != 1 {
        return Err(DimMismatch(format!(
            "{}x{} matvec with {}x{}",
            x.rows, x.cols, y.rows, y.cols
        )));
    }
    let parties = ctx.parties();
    let sums: Vec<Share<F>> = (0..x.rows)
        .map(|r| {
            let row = &x.cells[(r * x.cols) as usize..((r + 1) * x.cols) as usize];
            dot_sums(row, &y.cells, parties)
        })
        .collect();
    let cells = shamir::trunc_batch(ctx, &sums, fixed::FRAC_BITS);
    ctx.storage_acquire(x.rows);
    Ok(DenseShares { rows: x.rows, cols: 1, cells })
}

/// n·p batched dots; one truncation barrier for the whole grid.
pub fn dense_matmat<F: Field>(
    ctx: &mut Ctx<F>,
    x: &DenseShares<F>,
    y: &DenseShares<F>,
) -> Result<DenseShares<F>, DimMismatch> {
    if x.cols != y.rows {
        return Err(DimMismatch(format!(
            "{}x{} times {}x{}",
            x.rows, x.cols, y.rows, y.cols
        )));
    }
    let parties = ctx.parties();
    let mut sums = Vec::with_capacity((x.rows * y.cols) as usize);
    for r in 0..x.rows {
        for c in 0..y.cols {
            let mut acc = Share::zero(parties);
            for k in 0..x.cols {
                acc = acc.add(&x.cell(r, k).mul_local(y.cell(k, c)));
            }
            sums.push(acc);
        }
    }
    let cells = shamir::trunc_batch(ctx, &sums, fixed::FRAC_BITS);
    ctx.storage_acquire(x.rows * y.cols);
    Ok(DenseShares { rows: x.rows, cols: y.cols, cells })
}

/// Ledger twin of [`dense_matmat`] on pre-shared inputs: charges the exact
/// barriers and storage without materializing the n x p grid, so sweeps can
/// price dense runs whose cells would not fit in memory. The inner
/// dimension never appears because the wire cost does not depend on it.
pub fn dense_matmat_cost<F: Field>(ctx: &mut Ctx<F>, out_rows: u64, out_cols: u64) {
    let n = ctx.parties() as u64;
    let cells = out_rows * out_cols;
    if cells > 0 {
        ctx.barrier(cells * n * (n - 1));
    }
    ctx.storage_acquire(cells);
}

/// Ledger twin of sharing a dense matrix, for the same purpose.
pub fn share_dense_cost<F: Field>(ctx: &mut Ctx<F>, rows: u64, cols: u64) {
    let n = ctx.parties() as u64;
    let cells = rows * cols;
    if cells > 0 {
        ctx.barrier(cells * (n - 1));
    }
    ctx.storage_acquire(cells);
}
