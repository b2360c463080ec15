//! Secret-shared sparse objects and their plaintext ingestion.
//!
//! A sparse vector is a list of (coordinate, value) tuples where the
//! coordinate is bit-shared (the sorting and comparison circuits consume
//! individual bits, so owners decompose before sharing) and the value is an
//! arithmetic fixed-point share. Coordinates are 1-indexed; 0 is the
//! placeholder that marks dead tuples inside protocols. The tuple count,
//! the dimensions, and the grouping axis are public; everything else stays
//! shared.

use std::collections::HashSet;
use std::path::Path;

use crate::bits::{self, BitSharedInt};
use crate::field::Field;
use crate::fixed;
use crate::oracle::{PlainMatrix, PlainVector};
use crate::runtime::Ctx;
use crate::shamir::{self, Share};

/// One secret-shared non-zero entry: one coordinate for vector entries, two
/// (row then column) for matrix entries, plus the fixed-point value.
#[derive(Debug, Clone)]
pub struct NonZeroTuple<F: Field> {
    pub coords: Vec<BitSharedInt<F>>,
    pub value: Share<F>,
}

/// Secret-shared sparse vector. `tuples.len()` is the public non-zero
/// count; reconstructed coordinates are distinct and in [1, dim] except for
/// placeholder tuples at 0.
#[derive(Debug, Clone)]
pub struct SparseVectorShares<F: Field> {
    pub tuples: Vec<NonZeroTuple<F>>,
    pub dim: u64,
}

/// Which public axis the matrix groups run along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// groups[k] holds row k+1; in-group coordinates are column indices.
    RowGrouped,
    /// groups[k] holds column k+1; in-group coordinates are row indices.
    ColumnGrouped,
}

/// Secret-shared sparse matrix: one sparse vector per row or per column.
/// The per-group non-zero counts are the matrix's public sparsity metric.
#[derive(Debug, Clone)]
pub struct SparseMatrixShares<F: Field> {
    pub groups: Vec<SparseVectorShares<F>>,
    pub rows: u64,
    pub cols: u64,
    pub orientation: Orientation,
}

/// Flat secret-shared matrix output: both coordinates of every tuple are
/// shared, so no public grouping exists. Matrix products return this shape.
#[derive(Debug, Clone)]
pub struct SparseMatrixTuples<F: Field> {
    pub tuples: Vec<NonZeroTuple<F>>,
    pub rows: u64,
    pub cols: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum SparseError {
    #[error("coordinate {coord} out of range for dimension {dim}")]
    CoordOutOfRange { coord: u64, dim: u64 },
    #[error("duplicate coordinate {coord}")]
    DuplicateCoord { coord: u64 },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: u64, col: u64 },
    #[error("value {value} outside the fixed-point range |v| <= {bound}")]
    ValueRange { value: f64, bound: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl<F: Field> SparseVectorShares<F> {
    pub fn nnz(&self) -> usize {
        self.tuples.len()
    }

    /// Bit width of the shared coordinates: enough for [1, dim].
    pub fn coord_width(&self) -> u32 {
        bits::required_width(self.dim)
    }

    /// Stored share elements: one per coordinate bit plus one per value.
    pub fn storage_elements(&self) -> u64 {
        self.nnz() as u64 * (self.coord_width() as u64 + 1)
    }
}

impl<F: Field> SparseMatrixShares<F> {
    pub fn nnz(&self) -> usize {
        self.groups.iter().map(|g| g.nnz()).sum()
    }

    /// Public per-group non-zero counts, in group order.
    pub fn group_nnz(&self) -> Vec<u64> {
        self.groups.iter().map(|g| g.nnz() as u64).collect()
    }

    /// Dimension the in-group coordinates index into.
    pub fn group_dim(&self) -> u64 {
        match self.orientation {
            Orientation::RowGrouped => self.cols,
            Orientation::ColumnGrouped => self.rows,
        }
    }

    pub fn storage_elements(&self) -> u64 {
        self.groups.iter().map(|g| g.storage_elements()).sum()
    }

    /// Reinterpret the groups along the other axis without touching any
    /// share. Useful for X^T X: a row-grouped X read column-grouped is X^T
    /// with the per-group metadata already in the right place.
    pub fn transposed_view(&self) -> SparseMatrixShares<F> {
        let orientation = match self.orientation {
            Orientation::RowGrouped => Orientation::ColumnGrouped,
            Orientation::ColumnGrouped => Orientation::RowGrouped,
        };
        SparseMatrixShares {
            groups: self.groups.clone(),
            rows: self.cols,
            cols: self.rows,
            orientation,
        }
    }
}

/// Field elements a dense n x m share block occupies.
pub fn dense_storage_elements(rows: u64, cols: u64) -> u64 {
    rows * cols
}

fn check_value(v: f64) -> Result<(), SparseError> {
    if !v.is_finite() || v.abs() > fixed::VALUE_BOUND {
        return Err(SparseError::ValueRange { value: v, bound: fixed::VALUE_BOUND });
    }
    Ok(())
}

/// Data-owner sharing of a sparse vector: validates coordinates, bit-shares
/// them at width ceil(log2(dim+1)), and arithmetic-shares the fixed-point
/// values. Two input barriers (coordinate bits, values) regardless of size.
pub fn owner_share_vector<F: Field>(
    ctx: &mut Ctx<F>,
    entries: &[(u64, f64)],
    dim: u64,
) -> Result<SparseVectorShares<F>, SparseError> {
    let mut seen = HashSet::new();
    for &(c, v) in entries {
        if c == 0 || c > dim {
            return Err(SparseError::CoordOutOfRange { coord: c, dim });
        }
        if !seen.insert(c) {
            return Err(SparseError::DuplicateCoord { coord: c });
        }
        check_value(v)?;
    }
    let width = bits::required_width(dim);
    let coords: Vec<u64> = entries.iter().map(|e| e.0).collect();
    let values: Vec<F> = entries.iter().map(|e| fixed::encode(e.1)).collect();
    let coord_ints = bits::share_ints(ctx, &coords, width);
    let value_shares = shamir::share_batch(ctx, &values);
    let tuples = coord_ints
        .into_iter()
        .zip(value_shares)
        .map(|(c, value)| NonZeroTuple { coords: vec![c], value })
        .collect();
    let out = SparseVectorShares { tuples, dim };
    ctx.storage_acquire(out.storage_elements());
    Ok(out)
}

/// Data-owner sharing of a sparse matrix, grouped along the requested axis.
/// All groups share their coordinate bits in one barrier and their values
/// in another, same as a single vector.
pub fn owner_share_matrix<F: Field>(
    ctx: &mut Ctx<F>,
    entries: &[(u64, u64, f64)],
    rows: u64,
    cols: u64,
    orientation: Orientation,
) -> Result<SparseMatrixShares<F>, SparseError> {
    let mut seen = HashSet::new();
    for &(r, c, v) in entries {
        if r == 0 || r > rows {
            return Err(SparseError::CoordOutOfRange { coord: r, dim: rows });
        }
        if c == 0 || c > cols {
            return Err(SparseError::CoordOutOfRange { coord: c, dim: cols });
        }
        if !seen.insert((r, c)) {
            return Err(SparseError::DuplicateEntry { row: r, col: c });
        }
        check_value(v)?;
    }
    let (group_count, group_dim) = match orientation {
        Orientation::RowGrouped => (rows, cols),
        Orientation::ColumnGrouped => (cols, rows),
    };
    let mut grouped: Vec<Vec<(u64, f64)>> = vec![Vec::new(); group_count as usize];
    for &(r, c, v) in entries {
        match orientation {
            Orientation::RowGrouped => grouped[r as usize - 1].push((c, v)),
            Orientation::ColumnGrouped => grouped[c as usize - 1].push((r, v)),
        }
    }
    let width = bits::required_width(group_dim);
    let flat_coords: Vec<u64> = grouped.iter().flatten().map(|e| e.0).collect();
    let flat_values: Vec<F> = grouped.iter().flatten().map(|e| fixed::encode(e.1)).collect();
    let mut coord_ints = bits::share_ints(ctx, &flat_coords, width).into_iter();
    let mut value_shares = shamir::share_batch(ctx, &flat_values).into_iter();
    let groups = grouped
        .iter()
        .map(|g| SparseVectorShares {
            tuples: g
                .iter()
                .map(|_| NonZeroTuple {
                    coords: vec![coord_ints.next().unwrap()],
                    value: value_shares.next().unwrap(),
                })
                .collect(),
            dim: group_dim,
        })
        .collect();
    let out = SparseMatrixShares { groups, rows, cols, orientation };
    ctx.storage_acquire(out.storage_elements());
    Ok(out)
}

/// Test-only interpolation of a bit-shared coordinate; charges nothing.
pub fn reconstruct_coord<F: Field>(ctx: &mut Ctx<F>, coord: &BitSharedInt<F>) -> u64 {
    let mut out = 0u64;
    for (i, b) in coord.bits().iter().enumerate() {
        let bit = shamir::reconstruct(ctx, b);
        if bit == F::ONE {
            out |= 1 << i;
        } else {
            assert!(bit == F::ZERO, "coordinate bit out of range");
        }
    }
    out
}

/// Test-only opening of a shared vector. Placeholder tuples (coordinate 0)
/// are dropped; output is sorted by coordinate.
pub fn reconstruct_vector<F: Field>(ctx: &mut Ctx<F>, v: &SparseVectorShares<F>) -> PlainVector {
    let mut entries = Vec::new();
    for t in &v.tuples {
        let c = reconstruct_coord(ctx, &t.coords[0]);
        if c != 0 {
            entries.push((c, fixed::decode(shamir::reconstruct(ctx, &t.value))));
        }
    }
    entries.sort_by_key(|e| e.0);
    PlainVector { dim: v.dim, entries }
}

/// Test-only opening of a grouped matrix, sorted by (row, col).
pub fn reconstruct_matrix<F: Field>(ctx: &mut Ctx<F>, m: &SparseMatrixShares<F>) -> PlainMatrix {
    let mut entries = Vec::new();
    for (g, group) in m.groups.iter().enumerate() {
        let g = g as u64 + 1;
        for t in &group.tuples {
            let c = reconstruct_coord(ctx, &t.coords[0]);
            if c == 0 {
                continue;
            }
            let v = fixed::decode(shamir::reconstruct(ctx, &t.value));
            match m.orientation {
                Orientation::RowGrouped => entries.push((g, c, v)),
                Orientation::ColumnGrouped => entries.push((c, g, v)),
            }
        }
    }
    entries.sort_by_key(|e| (e.0, e.1));
    PlainMatrix { rows: m.rows, cols: m.cols, entries }
}

/// Test-only opening of a flat two-coordinate tuple list.
pub fn reconstruct_matrix_tuples<F: Field>(
    ctx: &mut Ctx<F>,
    m: &SparseMatrixTuples<F>,
) -> PlainMatrix {
    let mut entries = Vec::new();
    for t in &m.tuples {
        let r = reconstruct_coord(ctx, &t.coords[0]);
        let c = reconstruct_coord(ctx, &t.coords[1]);
        if r == 0 && c == 0 {
            continue;
        }
        entries.push((r, c, fixed::decode(shamir::reconstruct(ctx, &t.value))));
    }
    entries.sort_by_key(|e| (e.0, e.1));
    PlainMatrix { rows: m.rows, cols: m.cols, entries }
}

fn csv_err(e: csv::Error) -> SparseError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    let msg = e.to_string();
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return SparseError::Io(io);
        }
    }
    SparseError::Parse { line, msg }
}

/// Load a plaintext sparse matrix from a triplet CSV with header
/// `row,col,value`, 1-indexed coordinates. Dimensions are the maximum
/// coordinates seen; duplicates and malformed lines are errors carrying the
/// offending line number.
pub fn ingest_triplets(path: &Path) -> Result<PlainMatrix, SparseError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    {
        let headers = rdr.headers().map_err(csv_err)?;
        let expect = ["row", "col", "value"];
        if headers.len() != 3 || headers.iter().zip(expect).any(|(h, e)| h != e) {
            return Err(SparseError::Parse {
                line: 1,
                msg: format!("expected header row,col,value, found {headers:?}"),
            });
        }
    }
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    let (mut rows, mut cols) = (0u64, 0u64);
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_field = |idx: usize, what: &str| -> Result<&str, SparseError> {
            record.get(idx).ok_or_else(|| SparseError::Parse {
                line,
                msg: format!("missing {what} field"),
            })
        };
        let row: u64 = parse_field(0, "row")?.parse().map_err(|e| SparseError::Parse {
            line,
            msg: format!("bad row index: {e}"),
        })?;
        let col: u64 = parse_field(1, "col")?.parse().map_err(|e| SparseError::Parse {
            line,
            msg: format!("bad col index: {e}"),
        })?;
        let value: f64 = parse_field(2, "value")?.parse().map_err(|e| SparseError::Parse {
            line,
            msg: format!("bad value: {e}"),
        })?;
        if row == 0 || col == 0 {
            return Err(SparseError::Parse {
                line,
                msg: "coordinates are 1-indexed".into(),
            });
        }
        check_value(value)?;
        if !seen.insert((row, col)) {
            return Err(SparseError::DuplicateEntry { row, col });
        }
        rows = rows.max(row);
        cols = cols.max(col);
        entries.push((row, col, value));
    }
    Ok(PlainMatrix { rows, cols, entries })
}

/// Load per-row non-zero counts: one non-negative integer per line, empty
/// lines ignored.
pub fn ingest_nnz_counts(path: &Path) -> Result<Vec<u64>, SparseError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let count = line.parse::<u64>().map_err(|e| SparseError::Parse {
            line: i as u64 + 1,
            msg: format!("bad count: {e}"),
        })?;
        out.push(count);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fp255;
    use crate::runtime::{Ctx, RuntimeConfig};
    use std::io::Write;

    fn ctx() -> Ctx<Fp255> {
        Ctx::new(RuntimeConfig::new(3, 1, 7))
    }

    #[test]
    fn vector_round_trip_preserves_entries() {
        let mut ctx = ctx();
        let entries = vec![(3, 1.5), (17, -0.25), (340000, 2.0)];
        let v = owner_share_vector(&mut ctx, &entries, 340000).unwrap();
        assert_eq!(v.nnz(), 3);
        assert_eq!(v.coord_width(), 19);
        let plain = reconstruct_vector(&mut ctx, &v);
        assert_eq!(plain.entries, entries);
        assert_eq!(plain.dim, 340000);
    }

    #[test]
    fn empty_vector_is_fine() {
        let mut ctx = ctx();
        let v = owner_share_vector(&mut ctx, &[], 10).unwrap();
        assert_eq!(v.nnz(), 0);
        assert_eq!(reconstruct_vector(&mut ctx, &v).entries, vec![]);
    }

    #[test]
    fn sharing_rejects_bad_input() {
        let mut ctx = ctx();
        assert!(matches!(
            owner_share_vector(&mut ctx, &[(11, 1.0)], 10),
            Err(SparseError::CoordOutOfRange { coord: 11, dim: 10 })
        ));
        assert!(matches!(
            owner_share_vector(&mut ctx, &[(0, 1.0)], 10),
            Err(SparseError::CoordOutOfRange { .. })
        ));
        assert!(matches!(
            owner_share_vector(&mut ctx, &[(4, 1.0), (4, 2.0)], 10),
            Err(SparseError::DuplicateCoord { coord: 4 })
        ));
        assert!(matches!(
            owner_share_vector(&mut ctx, &[(4, 1e9)], 10),
            Err(SparseError::ValueRange { .. })
        ));
    }

    #[test]
    fn matrix_round_trip_both_orientations() {
        let entries = vec![(1, 2, 3.0), (2, 1, -1.0), (2, 4, 2.0), (3, 3, 5.5)];
        for orientation in [Orientation::RowGrouped, Orientation::ColumnGrouped] {
            let mut ctx = ctx();
            let m = owner_share_matrix(&mut ctx, &entries, 3, 4, orientation).unwrap();
            assert_eq!(m.nnz(), 4);
            let plain = reconstruct_matrix(&mut ctx, &m);
            assert_eq!(plain.rows, 3);
            assert_eq!(plain.cols, 4);
            assert_eq!(plain.entries, entries);
        }
    }

    #[test]
    fn matrix_grouping_matches_orientation() {
        let mut ctx = ctx();
        let entries = vec![(1, 2, 3.0), (2, 1, -1.0), (2, 4, 2.0)];
        let m = owner_share_matrix(&mut ctx, &entries, 2, 4, Orientation::RowGrouped).unwrap();
        assert_eq!(m.group_nnz(), vec![1, 2]);
        assert_eq!(m.group_dim(), 4);
        let t = owner_share_matrix(&mut ctx, &entries, 2, 4, Orientation::ColumnGrouped).unwrap();
        assert_eq!(t.group_nnz(), vec![1, 1, 0, 1]);
        assert_eq!(t.group_dim(), 2);
    }

    #[test]
    fn transposed_view_swaps_axes_without_copying_shares() {
        let mut ctx = ctx();
        let entries = vec![(1, 2, 3.0), (2, 1, -1.0)];
        let m = owner_share_matrix(&mut ctx, &entries, 2, 3, Orientation::RowGrouped).unwrap();
        let t = m.transposed_view();
        assert_eq!(t.orientation, Orientation::ColumnGrouped);
        assert_eq!((t.rows, t.cols), (3, 2));
        let plain = reconstruct_matrix(&mut ctx, &t);
        assert_eq!(plain.entries, vec![(1, 2, -1.0), (2, 1, 3.0)]);
    }

    #[test]
    fn sharing_costs_track_public_shape_only() {
        let mut a = ctx();
        owner_share_vector(&mut a, &[(1, 1.0), (2, 2.0)], 100).unwrap();
        let mut b = ctx();
        owner_share_vector(&mut b, &[(50, -3.0), (99, 0.125)], 100).unwrap();
        assert_eq!(a.ledger(), b.ledger());
        // 2 tuples x (7 coord bits + 1 value) x (N - 1) elements uploaded.
        assert_eq!(a.ledger().elements_sent, 2 * 8 * 2);
        assert_eq!(a.ledger().peak_stored_elements, 2 * 8);
    }

    #[test]
    fn ingests_triplet_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "row,col,value\n1,3,2.5\n2,1,-1\n").unwrap();
        let m = ingest_triplets(&path).unwrap();
        assert_eq!((m.rows, m.cols), (2, 3));
        assert_eq!(m.entries, vec![(1, 3, 2.5), (2, 1, -1.0)]);

        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "row,col,value\n").unwrap();
        let e = ingest_triplets(&empty).unwrap();
        assert_eq!((e.rows, e.cols, e.entries.len()), (0, 0, 0));
    }

    #[test]
    fn triplet_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "row,col,value\n1,1,1.0\n2,x,1.0\n").unwrap();
        match ingest_triplets(&path) {
            Err(SparseError::Parse { line, msg }) => {
                assert_eq!(line, 3, "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        let dup = dir.path().join("dup.csv");
        std::fs::write(&dup, "row,col,value\n1,1,1.0\n1,1,2.0\n").unwrap();
        assert!(matches!(
            ingest_triplets(&dup),
            Err(SparseError::DuplicateEntry { row: 1, col: 1 })
        ));

        let head = dir.path().join("head.csv");
        std::fs::write(&head, "a,b,c\n1,1,1.0\n").unwrap();
        assert!(matches!(ingest_triplets(&head), Err(SparseError::Parse { line: 1, .. })));
    }

    #[test]
    fn ingests_nnz_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.txt");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "3\n0\n17\n").unwrap();
        drop(f);
        assert_eq!(ingest_nnz_counts(&path).unwrap(), vec![3, 0, 17]);

        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "3\n-1\n").unwrap();
        assert!(matches!(
            ingest_nnz_counts(&bad),
            Err(SparseError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn storage_costs_match_formulas() {
        let mut ctx = ctx();
        let v = owner_share_vector(&mut ctx, &(1..=10).map(|i| (i, 1.0)).collect::<Vec<_>>(), 100)
            .unwrap();
        // nnz=10, 7 coordinate bits, 1 value element.
        assert_eq!(v.storage_elements(), 80);
        assert_eq!(dense_storage_elements(100, 100), 10000);
    }
}
