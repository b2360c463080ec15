//! Plaintext reference implementations backing every correctness test:
//! sparse and dense multiplication, group-by-sum aggregation, quantiles, and
//! template fitting. Deliberately naive (hash maps and cubic loops); the
//! sparse and dense paths are independent so each validates the other.

use std::collections::{BTreeMap, HashMap};

/// Plaintext sparse vector: 1-indexed coordinates, real values.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainVector {
    pub dim: u64,
    pub entries: Vec<(u64, f64)>,
}

/// Plaintext sparse matrix as a triplet list, 1-indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainMatrix {
    pub rows: u64,
    pub cols: u64,
    pub entries: Vec<(u64, u64, f64)>,
}

impl PlainVector {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Dense expansion, index 0 unused space elided (slot i-1 holds coord i).
    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim as usize];
        for &(i, x) in &self.entries {
            v[i as usize - 1] += x;
        }
        v
    }
}

impl PlainMatrix {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.cols as usize]; self.rows as usize];
        for &(r, c, x) in &self.entries {
            m[r as usize - 1][c as usize - 1] += x;
        }
        m
    }

    /// Entries of one row, in insertion order.
    pub fn row(&self, r: u64) -> Vec<(u64, f64)> {
        self.entries.iter().filter(|e| e.0 == r).map(|e| (e.1, e.2)).collect()
    }

    /// Non-zero count per row, rows without entries included as 0.
    pub fn row_nnz_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.rows as usize];
        for &(r, _, _) in &self.entries {
            counts[r as usize - 1] += 1;
        }
        counts
    }

    /// Non-zero count per column.
    pub fn col_nnz_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.cols as usize];
        for &(_, c, _) in &self.entries {
            counts[c as usize - 1] += 1;
        }
        counts
    }
}

/// Mismatched dimensions in an oracle call.
#[derive(Debug, thiserror::Error)]
#[error("dimension mismatch: {0}")]
pub struct DimMismatch(pub String);

/// Sparse dot product via a coordinate map.
pub fn oracle_dot(x: &PlainVector, y: &PlainVector) -> Result<f64, DimMismatch> {
    if x.dim != y.dim {
        return Err(DimMismatch(format!("dot of dim {} with dim {}", x.dim, y.dim)));
    }
    let map: HashMap<u64, f64> = y.entries.iter().copied().collect();
    Ok(x.entries.iter().filter_map(|(i, v)| map.get(i).map(|w| v * w)).sum())
}

/// Sparse matrix-vector product; output keeps only non-zero-support rows
/// (rows whose dot ran over at least one matching coordinate), which is the
/// same support rule the secure protocol's public output follows.
pub fn oracle_matvec(x: &PlainMatrix, y: &PlainVector) -> Result<PlainVector, DimMismatch> {
    if x.cols != y.dim {
        return Err(DimMismatch(format!("{}x{} matvec with dim {}", x.rows, x.cols, y.dim)));
    }
    let map: HashMap<u64, f64> = y.entries.iter().copied().collect();
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    for &(r, c, v) in &x.entries {
        if let Some(w) = map.get(&c) {
            *acc.entry(r).or_insert(0.0) += v * w;
        }
    }
    Ok(PlainVector { dim: x.rows, entries: acc.into_iter().collect() })
}

/// Sparse matrix product over triplets.
pub fn oracle_matmul(a: &PlainMatrix, b: &PlainMatrix) -> Result<PlainMatrix, DimMismatch> {
    if a.cols != b.rows {
        return Err(DimMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut by_row: HashMap<u64, Vec<(u64, f64)>> = HashMap::new();
    for &(r, c, v) in &b.entries {
        by_row.entry(r).or_default().push((c, v));
    }
    let mut acc: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    for &(i, k, x) in &a.entries {
        if let Some(row) = by_row.get(&k) {
            for &(j, y) in row {
                *acc.entry((i, j)).or_insert(0.0) += x * y;
            }
        }
    }
    Ok(PlainMatrix {
        rows: a.rows,
        cols: b.cols,
        entries: acc.into_iter().map(|((i, j), v)| (i, j, v)).collect(),
    })
}

/// Cubic dense matrix product, the independent cross-check for
/// [`oracle_matmul`].
pub fn oracle_matmul_dense(a: &PlainMatrix, b: &PlainMatrix) -> Result<Vec<Vec<f64>>, DimMismatch> {
    if a.cols != b.rows {
        return Err(DimMismatch("dense matmul".into()));
    }
    let ad = a.to_dense();
    let bd = b.to_dense();
    let (n, m, p) = (a.rows as usize, a.cols as usize, b.cols as usize);
    let mut out = vec![vec![0.0; p]; n];
    for i in 0..n {
        for k in 0..m {
            let x = ad[i][k];
            if x == 0.0 {
                continue;
            }
            for j in 0..p {
                out[i][j] += x * bd[k][j];
            }
        }
    }
    Ok(out)
}

/// Group-by-sum over a coordinate-sorted tuple list: one output tuple per
/// distinct coordinate carrying the run total.
pub fn oracle_groupby_sum(sorted: &[(u64, f64)]) -> Vec<(u64, f64)> {
    let mut out: Vec<(u64, f64)> = Vec::new();
    for &(c, v) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out
}

/// The six template quantile positions as 1-indexed sort ranks, floor(q*n)
/// clamped to [1, n].
pub const QUANTILES: [f64; 6] = [0.25, 0.5, 0.75, 0.9, 0.99, 1.0];

pub fn quantile_positions(n: usize) -> [usize; 6] {
    let mut out = [0usize; 6];
    for (slot, q) in out.iter_mut().zip(QUANTILES) {
        *slot = ((q * n as f64).floor() as usize).clamp(1, n);
    }
    out
}

/// Plaintext quantile oracle: the values at the six template ranks of the
/// ascending sort.
pub fn oracle_quantiles(values: &[u64]) -> [u64; 6] {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    quantile_positions(sorted.len()).map(|p| sorted[p - 1])
}

/// Independent template-fit oracle: sort degrees ascending, hand the
/// smallest remaining rows to the block with the smallest bound, and check
/// every assigned row respects its block's bound. Feasibility of this greedy
/// assignment is equivalent to the existence of any order-respecting
/// assignment.
pub fn oracle_greedy_fit(degrees: &[u64], blocks: &[(u64, u64)]) -> bool {
    let total: u64 = blocks.iter().map(|b| b.0).sum();
    if total != degrees.len() as u64 {
        return false;
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    let mut next = 0usize;
    for &(count, bound) in blocks {
        for _ in 0..count {
            if sorted[next] > bound {
                return false;
            }
            next += 1;
        }
    }
    true
}
