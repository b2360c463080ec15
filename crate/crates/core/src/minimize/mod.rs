//! Public-knowledge minimization for sparse inputs.
//!
//! Sparse protocols leak their operands' nonzero structure through the cost
//! envelope, so before sharing, owners coarsen that structure: pad every
//! row to a common bound, or to a small template of bounds covering blocks
//! of rows. This module has the plaintext tooling (templates, empirical
//! degree distributions, the two padding schemes) and the two MPC protocols
//! that derive a template across owners without a trusted party: an
//! oblivious quantile sketch over shared per-row counts, and a shared
//! scaling factor that stretches an approximate template until every
//! owner's data fits. Differentially private and population-level upper
//! bounds for releasing degree distributions live in [`dp`]; synthetic
//! power-law data in [`powerlaw`].

pub mod dp;
pub mod powerlaw;

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::{self, BitSharedInt};
use crate::field::Field;
use crate::oracle::{quantile_positions, PlainMatrix};
use crate::runtime::Ctx;
use crate::sort::{self, Record};

/// Fixed-point precision of owner scaling factors.
pub const ALPHA_FRAC_BITS: u32 = 32;
/// Bit width scaling factors are shared at; ratios up to 2^16 fit.
pub const ALPHA_WIDTH: u32 = 48;

#[derive(Debug, thiserror::Error)]
pub enum MinimizeError {
    #[error("bound {bound} is below the maximum row count {max}")]
    BoundTooSmall { bound: u64, max: u64 },
    #[error("row {row} cannot hold {need} entries in {cols} columns")]
    RowFull { row: u64, need: u64, cols: u64 },
    #[error("template does not cover the data: {0}")]
    FitViolation(String),
    #[error("template is malformed: {0}")]
    BadTemplate(String),
    #[error("row-count mismatch: template covers {template} rows, data has {data}")]
    RowCountMismatch { template: u64, data: u64 },
    #[error("input must be nonempty")]
    EmptyInput,
    #[error("scaling factor below one: {0}")]
    AlphaBelowOne(f64),
    #[error("bad parameter: {0}")]
    BadParams(String),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Empirical count distribution of row nonzeros: for each distinct degree
/// d, how many rows have at least d nonzeros. Strictly decreasing over
/// strictly increasing support; the count at the smallest degree is the
/// total row count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ecdf {
    values: Vec<u64>,
    counts: Vec<u64>,
}

impl Ecdf {
    pub fn from_degrees(degrees: &[u64]) -> Result<Ecdf, MinimizeError> {
        if degrees.is_empty() {
            return Err(MinimizeError::EmptyInput);
        }
        let mut sorted = degrees.to_vec();
        sorted.sort_unstable();
        let mut values = Vec::new();
        let mut counts = Vec::new();
        for (i, &d) in sorted.iter().enumerate() {
            if values.last() != Some(&d) {
                values.push(d);
                counts.push((sorted.len() - i) as u64);
            }
        }
        Ok(Ecdf { values, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts[0]
    }

    pub fn max_degree(&self) -> u64 {
        *self.values.last().unwrap()
    }

    /// Rows with at least `d` nonzeros, for any d, not just support points.
    pub fn count_at_least(&self, d: u64) -> u64 {
        match self.values.partition_point(|&v| v < d) {
            i if i == self.values.len() => 0,
            i => self.counts[i],
        }
    }

    /// The degree multiset, ascending. Exact-count of a support value is
    /// the difference of adjacent at-least counts.
    pub fn sorted_degrees(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.total() as usize);
        for (i, &v) in self.values.iter().enumerate() {
            let exact = self.counts[i] - self.counts.get(i + 1).copied().unwrap_or(0);
            out.extend(std::iter::repeat(v).take(exact as usize));
        }
        out
    }

    /// The six template quantile values, read off the degree multiset.
    pub fn quantile_values(&self) -> [u64; 6] {
        let sorted = self.sorted_degrees();
        quantile_positions(sorted.len()).map(|p| sorted[p - 1])
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), MinimizeError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["degree", "count_at_least"]).map_err(csv_err)?;
        for (v, c) in self.values.iter().zip(&self.counts) {
            w.write_record([v.to_string(), c.to_string()]).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_csv(path: &Path) -> Result<Ecdf, MinimizeError> {
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let headers = r.headers().map_err(csv_err)?;
        if headers.iter().collect::<Vec<_>>() != ["degree", "count_at_least"] {
            return Err(MinimizeError::Parse {
                line: 1,
                msg: "expected header degree,count_at_least".into(),
            });
        }
        let mut values = Vec::new();
        let mut counts = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i as u64 + 2;
            let rec = rec.map_err(csv_err)?;
            let parse = |field: &str, what: &str| {
                field.trim().parse::<u64>().map_err(|e| MinimizeError::Parse {
                    line,
                    msg: format!("{what}: {e}"),
                })
            };
            values.push(parse(&rec[0], "degree")?);
            counts.push(parse(&rec[1], "count_at_least")?);
        }
        if values.is_empty() {
            return Err(MinimizeError::EmptyInput);
        }
        for i in 1..values.len() {
            if values[i] <= values[i - 1] || counts[i] >= counts[i - 1] {
                return Err(MinimizeError::Parse {
                    line: i as u64 + 2,
                    msg: "degrees must increase and counts strictly decrease".into(),
                });
            }
        }
        if *counts.last().unwrap() == 0 {
            return Err(MinimizeError::Parse {
                line: values.len() as u64 + 1,
                msg: "count_at_least must be positive".into(),
            });
        }
        Ok(Ecdf { values, counts })
    }
}

fn csv_err(e: csv::Error) -> MinimizeError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    let msg = e.to_string();
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return MinimizeError::Io(io);
        }
    }
    MinimizeError::Parse { line, msg }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateSource {
    Quantile,
    Dp,
    Population,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateBlock {
    pub rows: u64,
    pub nnz_bound: u64,
}

/// A public row-count template: `blocks[k].rows` rows padded to exactly
/// `blocks[k].nnz_bound` nonzeros each, bounds ascending, block row counts
/// summing to the total. The single-block template is max-row padding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub total_rows: u64,
    pub source: TemplateSource,
    pub blocks: Vec<TemplateBlock>,
}

impl Template {
    pub fn validate(&self) -> Result<(), MinimizeError> {
        if self.blocks.is_empty() {
            return Err(MinimizeError::BadTemplate("no blocks".into()));
        }
        for w in self.blocks.windows(2) {
            if w[0].nnz_bound > w[1].nnz_bound {
                return Err(MinimizeError::BadTemplate(format!(
                    "bounds must be ascending, got {} before {}",
                    w[0].nnz_bound, w[1].nnz_bound
                )));
            }
        }
        let covered: u64 = self.blocks.iter().map(|b| b.rows).sum();
        if covered != self.total_rows {
            return Err(MinimizeError::BadTemplate(format!(
                "blocks cover {covered} rows, total says {}",
                self.total_rows
            )));
        }
        Ok(())
    }

    /// Total tuples after padding to this template.
    pub fn padded_nnz(&self) -> u64 {
        self.blocks.iter().map(|b| b.rows * b.nnz_bound).sum()
    }

    /// Field elements at rest per party for a matrix padded to this
    /// template: one value plus `coord_width` coordinate bits per tuple.
    pub fn storage_elements(&self, coord_width: u32) -> u64 {
        self.padded_nnz() * (coord_width as u64 + 1)
    }

    pub fn save(&self, path: &Path) -> Result<(), MinimizeError> {
        self.validate()?;
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| MinimizeError::BadTemplate(e.to_string()))?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Template, MinimizeError> {
        let text = fs::read_to_string(path)?;
        let t: Template = serde_json::from_str(&text)
            .map_err(|e| MinimizeError::BadTemplate(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }
}

/// Pad every row to exactly `bound` tuples by adding zero-valued entries at
/// the row's lowest-index empty cells. The dense reconstruction is
/// unchanged; only the nonzero pattern coarsens.
pub fn max_row_pad(m: &PlainMatrix, bound: u64) -> Result<PlainMatrix, MinimizeError> {
    let counts = m.row_nnz_counts();
    let max = counts.iter().copied().max().unwrap_or(0);
    if bound < max {
        return Err(MinimizeError::BoundTooSmall { bound, max });
    }
    if bound > m.cols {
        return Err(MinimizeError::RowFull { row: 1, need: bound, cols: m.cols });
    }
    let mut entries = Vec::with_capacity((bound * m.rows) as usize);
    for r in 1..=m.rows {
        entries.extend(pad_row(r, &m.row(r), bound, m.cols)?);
    }
    Ok(PlainMatrix { rows: m.rows, cols: m.cols, entries })
}

fn pad_row(
    r: u64,
    row: &[(u64, f64)],
    bound: u64,
    cols: u64,
) -> Result<Vec<(u64, u64, f64)>, MinimizeError> {
    if bound > cols {
        return Err(MinimizeError::RowFull { row: r, need: bound, cols });
    }
    if (row.len() as u64) > bound {
        return Err(MinimizeError::BoundTooSmall { bound, max: row.len() as u64 });
    }
    let mut out: Vec<(u64, u64, f64)> = row.iter().map(|&(c, v)| (r, c, v)).collect();
    out.sort_by_key(|e| e.1);
    let used: std::collections::BTreeSet<u64> = out.iter().map(|e| e.1).collect();
    let mut need = bound - out.len() as u64;
    for c in 1..=cols {
        if need == 0 {
            break;
        }
        if !used.contains(&c) {
            out.push((r, c, 0.0));
            need -= 1;
        }
    }
    out.sort_by_key(|e| e.1);
    Ok(out)
}

/// Build a six-block template from an empirical degree distribution: block
/// bounds are the degree values at the quantile positions, block sizes the
/// gaps between those positions.
pub fn build_template_quantiles(ecdf: &Ecdf) -> Template {
    template_from_quantiles(ecdf.total(), ecdf.quantile_values(), TemplateSource::Quantile)
}

/// Assemble a template from the total row count and six quantile bounds.
pub fn template_from_quantiles(n: u64, bounds: [u64; 6], source: TemplateSource) -> Template {
    let positions = quantile_positions(n as usize);
    let mut blocks = Vec::with_capacity(6);
    let mut prev = 0usize;
    for (p, b) in positions.into_iter().zip(bounds) {
        blocks.push(TemplateBlock { rows: (p - prev) as u64, nnz_bound: b });
        prev = p;
    }
    Template { total_rows: n, source, blocks }
}

/// Whether rows with the given degree distribution can be assigned to the
/// template's blocks in sorted order: for every block k, the rows too big
/// for its bound must fit into the capacity of the later blocks.
pub fn template_fits(ecdf: &Ecdf, t: &Template) -> Result<bool, MinimizeError> {
    t.validate()?;
    if ecdf.total() != t.total_rows {
        return Err(MinimizeError::RowCountMismatch {
            template: t.total_rows,
            data: ecdf.total(),
        });
    }
    let mut capacity_after: u64 = t.blocks.iter().map(|b| b.rows).sum();
    for block in &t.blocks {
        capacity_after -= block.rows;
        if ecdf.count_at_least(block.nnz_bound + 1) > capacity_after {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pad a matrix to a template: rows sorted ascending by nonzero count
/// (ties by original index) fill the blocks in order, each padded to its
/// block's bound. Rows are renumbered in that order; the multiset of row
/// vectors, and hence any product up to row permutation, is unchanged.
pub fn pad_to_template(m: &PlainMatrix, t: &Template) -> Result<PlainMatrix, MinimizeError> {
    let counts = m.row_nnz_counts();
    let ecdf = Ecdf::from_degrees(&counts)?;
    if !template_fits(&ecdf, t)? {
        return Err(MinimizeError::FitViolation(
            "rows exceed the template block bounds".into(),
        ));
    }
    let mut order: Vec<u64> = (1..=m.rows).collect();
    order.sort_by_key(|&r| (counts[r as usize - 1], r));

    let mut entries = Vec::with_capacity(t.padded_nnz() as usize);
    let mut next = 0usize;
    let mut new_row = 0u64;
    for block in &t.blocks {
        for _ in 0..block.rows {
            let original = order[next];
            next += 1;
            new_row += 1;
            entries.extend(pad_row(new_row, &m.row(original), block.nnz_bound, m.cols)?);
        }
    }
    Ok(PlainMatrix { rows: m.rows, cols: m.cols, entries })
}

/// Oblivious quantile sketch: sort the shared per-row counts and open the
/// values at the six quantile positions, nothing else. The opened sextuple
/// is the approximate template bound vector.
pub fn mpc_quantile_template<F: Field>(
    ctx: &mut Ctx<F>,
    nnz_shares: &[BitSharedInt<F>],
) -> Result<[u64; 6], MinimizeError> {
    if nnz_shares.is_empty() {
        return Err(MinimizeError::EmptyInput);
    }
    let mut records: Vec<Record<F>> = nnz_shares
        .iter()
        .map(|s| Record { key: s.clone(), payload: Vec::new() })
        .collect();
    sort::sort_records(ctx, &mut records);
    let picks: Vec<BitSharedInt<F>> = quantile_positions(records.len())
        .iter()
        .map(|&p| records[p - 1].key.clone())
        .collect();
    let opened = bits::open_ints(ctx, &picks);
    Ok([opened[0], opened[1], opened[2], opened[3], opened[4], opened[5]])
}

/// An owner's private scaling factor: the smallest α ≥ 1 with every one of
/// their rows fitting the approximate bounds after scaling, as a raw
/// fixed-point value at [`ALPHA_FRAC_BITS`]. Rows are assigned to blocks by
/// the quantile positions of the owner's own row count.
pub fn owner_alpha(counts: &[u64], approx: &[u64; 6]) -> Result<u64, MinimizeError> {
    if counts.is_empty() {
        return Err(MinimizeError::EmptyInput);
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let positions = quantile_positions(sorted.len());
    let one = 1u64 << ALPHA_FRAC_BITS;
    let mut alpha = one;
    for (i, &nnz) in sorted.iter().enumerate() {
        let block = positions.iter().position(|&p| i + 1 <= p).unwrap();
        let bound = approx[block];
        if nnz == 0 {
            continue;
        }
        if bound == 0 {
            return Err(MinimizeError::BadParams(format!(
                "approximate bound for block {block} is zero but a row has {nnz} nonzeros"
            )));
        }
        let raw = ((nnz as u128) << ALPHA_FRAC_BITS).div_ceil(bound as u128);
        if raw >= 1u128 << ALPHA_WIDTH {
            return Err(MinimizeError::BadParams(format!(
                "scaling ratio {nnz}/{bound} exceeds the representable range"
            )));
        }
        alpha = alpha.max(raw as u64);
    }
    Ok(alpha)
}

/// Joint scaling: take the maximum of the owners' shared factors with an
/// oblivious tournament, open that single value, and stretch the six
/// approximate bounds by it (ceiling division keeps them integers and
/// preserves their ordering). Returns the final bounds and the opened
/// maximum as a float.
pub fn mpc_scaling_factor<F: Field>(
    ctx: &mut Ctx<F>,
    alphas: &[BitSharedInt<F>],
    approx: &[u64; 6],
) -> Result<([u64; 6], f64), MinimizeError> {
    if alphas.is_empty() {
        return Err(MinimizeError::EmptyInput);
    }
    let max = sort::recursive_max(ctx, alphas);
    let raw = bits::open_ints(ctx, &[max])[0];
    let one = 1u64 << ALPHA_FRAC_BITS;
    let alpha = raw as f64 / one as f64;
    if raw < one {
        return Err(MinimizeError::AlphaBelowOne(alpha));
    }
    let bounds = approx
        .map(|b| (((raw as u128) * (b as u128) + (one as u128 - 1)) >> ALPHA_FRAC_BITS) as u64);
    Ok((bounds, alpha))
}
