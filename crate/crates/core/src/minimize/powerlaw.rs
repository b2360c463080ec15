//! Synthetic sparse rows with power-law degrees.
//!
//! Real-world sparse datasets have heavy-tailed row densities, which is
//! what makes templating worthwhile, so the benchmarks draw row degrees
//! from a truncated power law: P(degree = x) proportional to x^-gamma on
//! [1, max_degree]. Coordinates are uniform without replacement, values
//! uniform on a small signed grid away from zero.

use rand::Rng;

use super::MinimizeError;
use crate::oracle::PlainMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawParams {
    pub gamma: f64,
    pub max_degree: u64,
}

impl PowerLawParams {
    pub fn validate(&self) -> Result<(), MinimizeError> {
        if !(self.gamma > 1.0) {
            return Err(MinimizeError::BadParams("gamma must exceed 1".into()));
        }
        if self.max_degree < 1 {
            return Err(MinimizeError::BadParams("max degree must be at least 1".into()));
        }
        Ok(())
    }

    /// Z(gamma, m) = sum of i^-gamma over the truncated support.
    pub fn normalization(&self) -> f64 {
        (1..=self.max_degree).map(|i| (i as f64).powf(-self.gamma)).sum()
    }

    /// E[degree] = sum of i^(1-gamma) / Z.
    pub fn mean_degree(&self) -> f64 {
        let z = self.normalization();
        (1..=self.max_degree).map(|i| (i as f64).powf(1.0 - self.gamma)).sum::<f64>() / z
    }

    /// Cumulative probabilities P(degree <= i) for i in 1..=max_degree.
    pub fn degree_cdf(&self) -> Vec<f64> {
        let z = self.normalization();
        let mut acc = 0.0;
        (1..=self.max_degree)
            .map(|i| {
                acc += (i as f64).powf(-self.gamma) / z;
                acc
            })
            .collect()
    }
}

/// One degree draw by inverse CDF over the precomputed table.
pub fn sample_degree(cdf: &[f64], rng: &mut impl Rng) -> u64 {
    let u: f64 = rng.gen();
    (cdf.partition_point(|&c| c < u) as u64 + 1).min(cdf.len() as u64)
}

/// A rows x cols plaintext matrix whose row degrees follow the truncated
/// power law. Requires max_degree <= cols so every row has room.
pub fn sample_powerlaw(
    params: &PowerLawParams,
    rows: u64,
    cols: u64,
    rng: &mut impl Rng,
) -> Result<PlainMatrix, MinimizeError> {
    params.validate()?;
    if params.max_degree > cols {
        return Err(MinimizeError::BadParams(format!(
            "max degree {} exceeds {} columns",
            params.max_degree, cols
        )));
    }
    let cdf = params.degree_cdf();
    let mut entries = Vec::new();
    for r in 1..=rows {
        let degree = sample_degree(&cdf, rng);
        let mut coords: Vec<u64> = rand::seq::index::sample(rng, cols as usize, degree as usize)
            .into_iter()
            .map(|c| c as u64 + 1)
            .collect();
        coords.sort_unstable();
        for c in coords {
            entries.push((r, c, random_value(rng)));
        }
    }
    Ok(PlainMatrix { rows, cols, entries })
}

/// A nonzero value on the grid ±[1/8, 8], fixed-point friendly.
pub fn random_value(rng: &mut impl Rng) -> f64 {
    let mag = rng.gen_range(1..=64) as f64 / 8.0;
    if rng.gen() {
        mag
    } else {
        -mag
    }
}
