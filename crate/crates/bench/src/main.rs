//! Benchmark CLI for the `sparse-mpc` library.
//!
//! Every subcommand is a self-contained scenario that runs protocols (or
//! their exact cost twins) on a simulated party set, then emits a CSV with a
//! header row. All randomness flows from `--seed`, so any row can be
//! regenerated bit-identically by re-running the same scenario with the same
//! flags. Errors (bad configs, malformed input files) exit nonzero with a
//! diagnostic; nothing here panics on user input.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use sparse_mpc::bits::{self, required_width};
use sparse_mpc::dense::{dense_matmat_cost, share_dense_cost};
use sparse_mpc::field::Fp255;
use sparse_mpc::minimize::dp::{dp_tree_upper, DpParams};
use sparse_mpc::minimize::powerlaw::{random_value, sample_powerlaw, PowerLawParams};
use sparse_mpc::minimize::{
    build_template_quantiles, mpc_quantile_template, mpc_scaling_factor, owner_alpha,
    template_fits, template_from_quantiles, Ecdf, TemplateSource, ALPHA_WIDTH,
};
use sparse_mpc::mult::{compute_minmult, gram, sparse_matvec, Mode};
use sparse_mpc::oracle::PlainMatrix;
use sparse_mpc::runtime::{CostLedger, Ctx, RuntimeConfig};
use sparse_mpc::sparse::{
    dense_storage_elements, ingest_nnz_counts, ingest_triplets, owner_share_matrix,
    owner_share_vector, Orientation,
};

/// Desk-scale cap on any matrix/vector dimension.
const MAX_DIM: u64 = 1 << 13;
/// Desk-scale cap on the non-zero count of any tuple list a protocol sorts,
/// including the intermediate product list of length MinMult.
const MAX_NNZ: u64 = 1 << 14;

#[derive(Parser)]
#[command(
    name = "sparse-mpc-bench",
    about = "Communication and storage benchmarks for secret-shared sparse linear algebra",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep matrix-vector products (square matrix) over sizes and sparsities.
    MatvecSweep(MatvecSweepArgs),
    /// Sweep Gram products (X^T X, fixed row count) over sizes and sparsities.
    MatmatSweep(MatmatSweepArgs),
    /// Compare storage footprints of padding/templating techniques.
    Overhead(OverheadArgs),
    /// Differentially private upper bounds on an ECDF for a grid of block counts.
    DpCurves(DpCurvesArgs),
    /// Population-knowledge upper bounds on an ECDF for a grid of lambdas.
    PopCurves(PopCurvesArgs),
    /// Generate a synthetic power-law sparse matrix as a triplet CSV.
    Generate(GenerateArgs),
    /// Run the MPC quantile + scaling protocols on an nnz-count file.
    QuantileTemplate(QuantileTemplateArgs),
}

/// Flags shared by every scenario that simulates the party set.
#[derive(Args, Clone)]
struct MpcArgs {
    /// Seed for all data generation and protocol randomness.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of computation parties N.
    #[arg(long, default_value_t = 3)]
    parties: usize,
    /// Corruption threshold t (shares are degree-t polynomials, 2t < N).
    #[arg(long, default_value_t = 1)]
    threshold: usize,
}

impl MpcArgs {
    fn validate(&self) -> Result<()> {
        if self.parties < 3 {
            bail!("--parties must be at least 3 (honest majority), got {}", self.parties);
        }
        if self.threshold < 1 || 2 * self.threshold >= self.parties {
            bail!(
                "--threshold must satisfy 1 <= t and 2t < N, got t={} N={}",
                self.threshold,
                self.parties
            );
        }
        Ok(())
    }

    fn ctx(&self) -> Ctx<Fp255> {
        Ctx::new(RuntimeConfig::new(self.parties, self.threshold, self.seed))
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Naive,
    Optimized,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Naive => Mode::Naive,
            ModeArg::Optimized => Mode::Optimized,
        }
    }
}

#[derive(Args)]
struct MatvecSweepArgs {
    /// Square matrix dimensions m to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [256u64, 512, 1024])]
    sizes: Vec<u64>,
    /// Sparsity levels (fraction of zero cells), each in (0,1).
    #[arg(long, value_delimiter = ',', default_values_t = [0.99, 0.999, 0.9999])]
    sparsities: Vec<f64>,
    /// Aggregation/multiplication variant for the sparse protocol.
    #[arg(long, value_enum, default_value_t = ModeArg::Optimized)]
    mode: ModeArg,
    /// Output CSV path.
    #[arg(long, default_value = "matvec_sweep.csv")]
    out: PathBuf,
    #[command(flatten)]
    mpc: MpcArgs,
}

#[derive(Args)]
struct MatmatSweepArgs {
    /// Fixed number of matrix rows n (the Gram product is m x m).
    #[arg(long, default_value_t = 100)]
    rows: u64,
    /// Column counts m to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [512u64, 1024, 2048, 4096])]
    sizes: Vec<u64>,
    /// Sparsity levels (fraction of zero cells), each in (0,1).
    #[arg(long, value_delimiter = ',', default_values_t = [0.999, 0.9999])]
    sparsities: Vec<f64>,
    /// Aggregation/multiplication variant for the sparse protocol.
    #[arg(long, value_enum, default_value_t = ModeArg::Optimized)]
    mode: ModeArg,
    /// Output CSV path.
    #[arg(long, default_value = "matmat_sweep.csv")]
    out: PathBuf,
    #[command(flatten)]
    mpc: MpcArgs,
}

#[derive(Args)]
struct OverheadArgs {
    /// nnz-count files (one integer per line), one dataset per file.
    /// Without this flag two synthetic datasets (power-law, uniform) are used.
    #[arg(long)]
    counts: Vec<PathBuf>,
    /// Column dimension of the matrices behind the counts. Defaults to the
    /// next power of two at or above the largest count.
    #[arg(long)]
    cols: Option<u64>,
    /// Row count for the synthetic datasets.
    #[arg(long, default_value_t = 1000)]
    rows: u64,
    /// Power-law exponent for the synthetic dataset.
    #[arg(long, default_value_t = 2.5)]
    gamma: f64,
    /// Largest row degree for the synthetic datasets.
    #[arg(long, default_value_t = 64)]
    max_degree: u64,
    /// Output CSV path.
    #[arg(long, default_value = "overhead.csv")]
    out: PathBuf,
    /// Seed for the synthetic datasets.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct DpCurvesArgs {
    /// ECDF CSV (`degree,count_at_least`). Without it a synthetic power-law
    /// ECDF is generated from --rows/--gamma/--max-degree.
    #[arg(long)]
    ecdf: Option<PathBuf>,
    /// Row count for the synthetic ECDF.
    #[arg(long, default_value_t = 1024)]
    rows: u64,
    /// Power-law exponent for the synthetic ECDF.
    #[arg(long, default_value_t = 2.5)]
    gamma: f64,
    /// Largest row degree for the synthetic ECDF.
    #[arg(long, default_value_t = 256)]
    max_degree: u64,
    /// Privacy budget epsilon.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Failure probability delta.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Block counts l to sweep (each a power of two >= 2); the degree axis is
    /// split into l equal-sized blocks per value.
    #[arg(long, value_delimiter = ',', default_values_t = [16u64, 64])]
    blocks: Vec<u64>,
    /// Output CSV path.
    #[arg(long, default_value = "dp_curves.csv")]
    out: PathBuf,
    /// Seed for ECDF generation and mechanism noise.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct PopCurvesArgs {
    /// ECDF CSV (`degree,count_at_least`). Without it a synthetic power-law
    /// ECDF is generated from --rows/--gamma/--max-degree.
    #[arg(long)]
    ecdf: Option<PathBuf>,
    /// Row count for the synthetic ECDF.
    #[arg(long, default_value_t = 1024)]
    rows: u64,
    /// Power-law exponent for the synthetic ECDF.
    #[arg(long, default_value_t = 2.5)]
    gamma: f64,
    /// Largest row degree for the synthetic ECDF.
    #[arg(long, default_value_t = 256)]
    max_degree: u64,
    /// Standard-deviation multipliers to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 20.0])]
    lambdas: Vec<f64>,
    /// Also emit bounds for an s-row sample of the population.
    #[arg(long)]
    sample_size: Option<u64>,
    /// Output CSV path.
    #[arg(long, default_value = "pop_curves.csv")]
    out: PathBuf,
    /// Seed for ECDF generation.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of matrix rows.
    #[arg(long, default_value_t = 1000)]
    rows: u64,
    /// Number of matrix columns.
    #[arg(long, default_value_t = 1024)]
    cols: u64,
    /// Power-law exponent for the per-row degree distribution.
    #[arg(long, default_value_t = 2.5)]
    gamma: f64,
    /// Largest per-row degree in the distribution's support.
    #[arg(long, default_value_t = 64)]
    max_degree: u64,
    /// Output triplet CSV path (header `row,col,value`).
    #[arg(long, default_value = "generated.csv")]
    out: PathBuf,
    /// Seed for sampling.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct QuantileTemplateArgs {
    /// nnz-count file (one integer per line), the pooled per-row counts.
    #[arg(long)]
    counts: PathBuf,
    /// Number of data owners the counts are split among (round-robin).
    #[arg(long, default_value_t = 3)]
    owners: usize,
    /// Column dimension behind the counts (bit width of shared counts).
    /// Defaults to the next power of two at or above the largest count.
    #[arg(long)]
    cols: Option<u64>,
    /// Output template JSON path.
    #[arg(long, default_value = "template.json")]
    out: PathBuf,
    #[command(flatten)]
    mpc: MpcArgs,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::MatvecSweep(a) => run_matvec_sweep(a),
        Command::MatmatSweep(a) => run_matmat_sweep(a),
        Command::Overhead(a) => run_overhead(a),
        Command::DpCurves(a) => run_dp_curves(a),
        Command::PopCurves(a) => run_pop_curves(a),
        Command::Generate(a) => run_generate(a),
        Command::QuantileTemplate(a) => run_quantile_template(a),
    }
}

// --- shared helpers -------------------------------------------------------

fn check_dim(name: &str, dim: u64) -> Result<()> {
    if dim < 1 || dim > MAX_DIM {
        bail!("{name} must be in 1..={MAX_DIM}, got {dim}");
    }
    Ok(())
}

fn check_sparsity(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        bail!("sparsity must be strictly between 0 and 1, got {s}");
    }
    Ok(())
}

/// Non-zero count of a structure with `total` cells at the given sparsity:
/// at least one non-zero, never more than the desk-scale cap.
fn nnz_for(total: u64, sparsity: f64, what: &str) -> Result<u64> {
    let nnz = (((1.0 - sparsity) * total as f64).round() as u64).clamp(1, total);
    if nnz > MAX_NNZ {
        bail!(
            "{what}: {nnz} non-zeros at sparsity {sparsity} exceeds the desk-scale \
             cap of {MAX_NNZ}; raise the sparsity or shrink the dimensions"
        );
    }
    Ok(nnz)
}

/// Uniformly random support of `nnz` cells in a rows x cols grid, with
/// grid-friendly non-zero values.
fn random_matrix_entries(
    rng: &mut ChaCha12Rng,
    rows: u64,
    cols: u64,
    nnz: u64,
) -> Vec<(u64, u64, f64)> {
    let picks = rand::seq::index::sample(rng, (rows * cols) as usize, nnz as usize);
    let mut cells: Vec<u64> = picks.into_iter().map(|i| i as u64).collect();
    cells.sort_unstable();
    cells
        .into_iter()
        .map(|i| (i / cols + 1, i % cols + 1, random_value(rng)))
        .collect()
}

fn random_vector_entries(rng: &mut ChaCha12Rng, dim: u64, nnz: u64) -> Vec<(u64, f64)> {
    let picks = rand::seq::index::sample(rng, dim as usize, nnz as usize);
    let mut coords: Vec<u64> = picks.into_iter().map(|c| c as u64 + 1).collect();
    coords.sort_unstable();
    coords.into_iter().map(|c| (c, random_value(rng))).collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn load_or_sample_ecdf(
    ecdf: &Option<PathBuf>,
    rows: u64,
    gamma: f64,
    max_degree: u64,
    seed: u64,
) -> Result<Ecdf> {
    match ecdf {
        Some(path) => {
            Ecdf::load_csv(path).with_context(|| format!("reading {}", path.display()))
        }
        None => {
            check_dim("--rows", rows)?;
            let params = PowerLawParams { gamma, max_degree };
            params.validate()?;
            let cdf = params.degree_cdf();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let degrees: Vec<u64> = (0..rows)
                .map(|_| sparse_mpc::minimize::powerlaw::sample_degree(&cdf, &mut rng))
                .collect();
            Ok(Ecdf::from_degrees(&degrees)?)
        }
    }
}

// --- matvec sweep ---------------------------------------------------------

#[derive(Serialize)]
struct MatvecRow {
    m: u64,
    sparsity: f64,
    algo: &'static str,
    elements_sent: u64,
    bytes_sent: u64,
    rounds: u64,
    peak_storage: u64,
    nnz_x: u64,
    nnz_y: u64,
    opened_values: u64,
}

fn matvec_row(
    m: u64,
    sparsity: f64,
    algo: &'static str,
    cost: CostLedger,
    nnz_x: u64,
    nnz_y: u64,
) -> MatvecRow {
    MatvecRow {
        m,
        sparsity,
        algo,
        elements_sent: cost.elements_sent,
        bytes_sent: cost.bytes_sent,
        rounds: cost.rounds,
        peak_storage: cost.peak_stored_elements,
        nnz_x,
        nnz_y,
        opened_values: cost.opened_values,
    }
}

fn run_matvec_sweep(args: MatvecSweepArgs) -> Result<()> {
    args.mpc.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(args.mpc.seed);
    let mut rows = Vec::new();
    for &m in &args.sizes {
        check_dim("matrix dimension", m)?;
        for &s in &args.sparsities {
            check_sparsity(s)?;
            let nnz_x = nnz_for(m * m, s, "matrix")?;
            let nnz_y = nnz_for(m, s, "vector")?;
            let x_entries = random_matrix_entries(&mut rng, m, m, nnz_x);
            let y_entries = random_vector_entries(&mut rng, m, nnz_y);

            // Sparse protocol on real shares; the ledger delta covers only
            // the product, with the shared inputs already resident.
            let mut ctx = args.mpc.ctx();
            let x = owner_share_matrix(&mut ctx, &x_entries, m, m, Orientation::RowGrouped)?;
            let y = owner_share_vector(&mut ctx, &y_entries, m)?;
            let before = ctx.ledger();
            sparse_matvec(&mut ctx, &x, &y, args.mode.into())?;
            let cost = ctx.ledger().since(&before);
            rows.push(matvec_row(m, s, "sparse", cost, nnz_x, nnz_y));

            // Dense baseline priced by its exact cost twin (the m x m cell
            // grid at large m is not worth materializing).
            let mut ctx = args.mpc.ctx();
            share_dense_cost(&mut ctx, m, m);
            share_dense_cost(&mut ctx, m, 1);
            let before = ctx.ledger();
            dense_matmat_cost(&mut ctx, m, 1);
            let cost = ctx.ledger().since(&before);
            rows.push(matvec_row(m, s, "dense", cost, nnz_x, nnz_y));
        }
    }
    write_csv(&args.out, &rows)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

// --- matmat sweep ---------------------------------------------------------

#[derive(Serialize)]
struct MatmatRow {
    n: u64,
    m: u64,
    sparsity: f64,
    algo: &'static str,
    elements_sent: u64,
    bytes_sent: u64,
    rounds: u64,
    peak_storage: u64,
    nnz_x: u64,
    minmult: u64,
    opened_values: u64,
}

fn run_matmat_sweep(args: MatmatSweepArgs) -> Result<()> {
    args.mpc.validate()?;
    check_dim("--rows", args.rows)?;
    let n = args.rows;
    let mut rng = ChaCha12Rng::seed_from_u64(args.mpc.seed);
    let mut rows = Vec::new();
    for &m in &args.sizes {
        check_dim("column count", m)?;
        for &s in &args.sparsities {
            check_sparsity(s)?;
            let nnz_x = nnz_for(n * m, s, "matrix")?;
            let x_entries = random_matrix_entries(&mut rng, n, m, nnz_x);

            let mut ctx = args.mpc.ctx();
            let x = owner_share_matrix(&mut ctx, &x_entries, n, m, Orientation::RowGrouped)?;
            let minmult = compute_minmult(&x.transposed_view(), &x)?;
            if minmult > MAX_NNZ {
                bail!(
                    "n={n} m={m} sparsity={s}: the product's intermediate tuple list \
                     has {minmult} entries, above the desk-scale cap of {MAX_NNZ}; \
                     raise the sparsity or shrink the dimensions"
                );
            }
            let before = ctx.ledger();
            gram(&mut ctx, &x, args.mode.into())?;
            let cost = ctx.ledger().since(&before);
            rows.push(MatmatRow {
                n,
                m,
                sparsity: s,
                algo: "sparse",
                elements_sent: cost.elements_sent,
                bytes_sent: cost.bytes_sent,
                rounds: cost.rounds,
                peak_storage: cost.peak_stored_elements,
                nnz_x,
                minmult,
                opened_values: cost.opened_values,
            });

            let mut ctx = args.mpc.ctx();
            share_dense_cost(&mut ctx, n, m);
            let before = ctx.ledger();
            dense_matmat_cost(&mut ctx, m, m);
            let cost = ctx.ledger().since(&before);
            rows.push(MatmatRow {
                n,
                m,
                sparsity: s,
                algo: "dense",
                elements_sent: cost.elements_sent,
                bytes_sent: cost.bytes_sent,
                rounds: cost.rounds,
                peak_storage: cost.peak_stored_elements,
                nnz_x,
                minmult,
                opened_values: cost.opened_values,
            });
        }
    }
    write_csv(&args.out, &rows)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

// --- overhead comparison --------------------------------------------------

#[derive(Serialize)]
struct OverheadRow {
    dataset: String,
    technique: &'static str,
    storage_elements: u64,
    rows: u64,
    cols: u64,
}

fn overhead_rows(name: &str, counts: &[u64], cols: Option<u64>) -> Result<Vec<OverheadRow>> {
    if counts.is_empty() {
        bail!("dataset {name} has no rows");
    }
    let n = counts.len() as u64;
    let max = counts.iter().copied().max().unwrap();
    let m = match cols {
        Some(m) => {
            if m < max {
                bail!("dataset {name}: --cols {m} is below the largest row count {max}");
            }
            m
        }
        None => max.next_power_of_two(),
    };
    let w = required_width(m);
    let per_tuple = w as u64 + 1;
    let raw: u64 = counts.iter().sum::<u64>() * per_tuple;
    let ecdf = Ecdf::from_degrees(counts)?;
    let template = build_template_quantiles(&ecdf);
    let row = |technique, storage_elements| OverheadRow {
        dataset: name.to_string(),
        technique,
        storage_elements,
        rows: n,
        cols: m,
    };
    Ok(vec![
        row("dense", dense_storage_elements(n, m)),
        row("raw-sparse", raw),
        // Row anonymization randomizes which row owns which tuples; the
        // footprint is unchanged.
        row("anonymized", raw),
        row("max-pad", n * max * per_tuple),
        row("template", template.storage_elements(w)),
    ])
}

fn run_overhead(args: OverheadArgs) -> Result<()> {
    let mut rows = Vec::new();
    if args.counts.is_empty() {
        check_dim("--rows", args.rows)?;
        let params = PowerLawParams { gamma: args.gamma, max_degree: args.max_degree };
        params.validate()?;
        let cdf = params.degree_cdf();
        let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
        let degrees: Vec<u64> = (0..args.rows)
            .map(|_| sparse_mpc::minimize::powerlaw::sample_degree(&cdf, &mut rng))
            .collect();
        rows.extend(overhead_rows("powerlaw", &degrees, args.cols)?);
        let uniform = vec![args.max_degree.div_ceil(8).max(1); args.rows as usize];
        rows.extend(overhead_rows("uniform", &uniform, args.cols)?);
    } else {
        for path in &args.counts {
            let counts =
                ingest_nnz_counts(path).with_context(|| format!("reading {}", path.display()))?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            rows.extend(overhead_rows(&name, &counts, args.cols)?);
        }
    }
    write_csv(&args.out, &rows)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

// --- DP curves --------------------------------------------------------------

#[derive(Serialize)]
struct DpRow {
    blocks: u64,
    i: u64,
    threshold: u64,
    fhat: f64,
    bound: f64,
    epsilon: f64,
    delta: f64,
}

fn run_dp_curves(args: DpCurvesArgs) -> Result<()> {
    let ecdf = load_or_sample_ecdf(&args.ecdf, args.rows, args.gamma, args.max_degree, args.seed)?;
    let max_d = ecdf.max_degree();
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed.wrapping_add(1));
    let mut rows = Vec::new();
    for &l in &args.blocks {
        let params = DpParams { epsilon: args.epsilon, delta: args.delta, l };
        params.validate()?;
        if l > max_d {
            bail!("--blocks {l} exceeds the largest degree {max_d}; blocks would repeat");
        }
        // Equal-sized blocks over the degree axis (the uninformed prior):
        // threshold i is the end of the i-th of l equal slices of 1..=max_d.
        let thresholds: Vec<u64> = (1..=l).map(|i| (i * max_d).div_ceil(l)).collect();
        let fhat: Vec<f64> =
            thresholds.iter().map(|&t| ecdf.count_at_least(t) as f64).collect();
        let bounds = dp_tree_upper(&fhat, &params, &mut rng)?;
        for (i, ((&t, &f), b)) in thresholds.iter().zip(&fhat).zip(bounds).enumerate() {
            rows.push(DpRow {
                blocks: l,
                i: i as u64 + 1,
                threshold: t,
                fhat: f,
                bound: b,
                epsilon: args.epsilon,
                delta: args.delta,
            });
        }
    }
    write_csv(&args.out, &rows)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

// --- population curves ------------------------------------------------------

#[derive(Serialize)]
struct PopRow {
    degree: u64,
    fraction: f64,
    lambda: f64,
    variant: &'static str,
    bound: f64,
}

fn run_pop_curves(args: PopCurvesArgs) -> Result<()> {
    let ecdf = load_or_sample_ecdf(&args.ecdf, args.rows, args.gamma, args.max_degree, args.seed)?;
    let n = ecdf.total();
    let mut rows = Vec::new();
    for d in 1..=ecdf.max_degree() {
        let fraction = ecdf.count_at_least(d) as f64 / n as f64;
        for &lambda in &args.lambdas {
            let bound = sparse_mpc::minimize::dp::pop_dist_upper(fraction, n, lambda)?;
            rows.push(PopRow { degree: d, fraction, lambda, variant: "population", bound });
            if let Some(s) = args.sample_size {
                let bound = sparse_mpc::minimize::dp::pop_dist_upper_sample(fraction, s, lambda)?;
                rows.push(PopRow { degree: d, fraction, lambda, variant: "sample", bound });
            }
        }
    }
    write_csv(&args.out, &rows)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

// --- synthetic generation ---------------------------------------------------

fn run_generate(args: GenerateArgs) -> Result<()> {
    check_dim("--rows", args.rows)?;
    check_dim("--cols", args.cols)?;
    let params = PowerLawParams { gamma: args.gamma, max_degree: args.max_degree };
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let matrix: PlainMatrix = sample_powerlaw(&params, args.rows, args.cols, &mut rng)?;
    if matrix.nnz() as u64 > MAX_NNZ {
        bail!(
            "sampled {} non-zeros, above the desk-scale cap of {MAX_NNZ}; \
             lower --rows or --max-degree, or raise --gamma",
            matrix.nnz()
        );
    }
    let mut w = csv::Writer::from_path(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    w.write_record(["row", "col", "value"])?;
    for &(r, c, v) in &matrix.entries {
        w.write_record([r.to_string(), c.to_string(), v.to_string()])?;
    }
    w.flush()?;
    println!(
        "wrote {} non-zeros ({} x {}, sparsity {:.6}) to {}",
        matrix.nnz(),
        args.rows,
        args.cols,
        1.0 - matrix.nnz() as f64 / (args.rows * args.cols) as f64,
        args.out.display()
    );
    // The emitted file must be loadable by the same toolchain.
    ingest_triplets(&args.out).context("self-check: generated file failed to parse")?;
    Ok(())
}

// --- MPC quantile template --------------------------------------------------

fn run_quantile_template(args: QuantileTemplateArgs) -> Result<()> {
    args.mpc.validate()?;
    let counts = ingest_nnz_counts(&args.counts)
        .with_context(|| format!("reading {}", args.counts.display()))?;
    if counts.is_empty() {
        bail!("{} holds no counts", args.counts.display());
    }
    if args.owners == 0 {
        bail!("--owners must be at least 1");
    }
    let max = counts.iter().copied().max().unwrap();
    let cols = match args.cols {
        Some(m) => {
            if m < max {
                bail!("--cols {m} is below the largest row count {max}");
            }
            m
        }
        None => max.next_power_of_two(),
    };

    let mut ctx = args.mpc.ctx();
    let shared = bits::share_ints(&mut ctx, &counts, required_width(cols));
    let before = ctx.ledger();
    let approx = mpc_quantile_template(&mut ctx, &shared)?;

    // Each owner privately checks the published bounds against their own
    // rows and contributes a secret scaling factor; only the maximum opens.
    let mut owner_counts = vec![Vec::new(); args.owners];
    for (i, &c) in counts.iter().enumerate() {
        owner_counts[i % args.owners].push(c);
    }
    let raw_alphas: Vec<u64> = owner_counts
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| owner_alpha(c, &approx))
        .collect::<Result<_, _>>()?;
    let shared_alphas = bits::share_ints(&mut ctx, &raw_alphas, ALPHA_WIDTH);
    let (bounds, alpha) = mpc_scaling_factor(&mut ctx, &shared_alphas, &approx)?;
    let cost = ctx.ledger().since(&before);

    let template = template_from_quantiles(counts.len() as u64, bounds, TemplateSource::Quantile);
    template.validate()?;
    let fits = template_fits(&Ecdf::from_degrees(&counts)?, &template)?;
    template.save(&args.out)?;

    println!("quantile bounds: {approx:?}");
    println!("scaling factor:  {alpha:.6} over {} owners", raw_alphas.len());
    println!("scaled bounds:   {bounds:?}");
    println!(
        "padded nnz {} over {} rows; fits pooled data: {fits}",
        template.padded_nnz(),
        template.total_rows
    );
    println!("protocol opened {} values in {} rounds", cost.opened_values, cost.rounds);
    println!("wrote template to {}", args.out.display());
    Ok(())
}
