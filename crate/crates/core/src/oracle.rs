//! Monte Carlo cross-check of the analytic second-moment quantities.
//!
//! Quadrature samples are drawn as `L z` with `L` the unpivoted Cholesky
//! factor of the covariance and `z` standard normal deviates. The inferred
//! variances are then recovered by ordinary least-squares regression on the
//! samples, without touching the analytic gain formulas.
//!
//! Generator: ChaCha8 keyed by `seed_from_u64(seed)`, with one stream per
//! block of [`BLOCK_SAMPLES`] samples (`set_stream(block_index)`), normal
//! deviates from `rand_distr::StandardNormal`. The output depends only on
//! `(seed, state, n_samples)`, not on the thread count.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, Quadrature};
use crate::labels;
use crate::steering::inferred_variance;

pub const GENERATOR: &str = "chacha8-block-streams/v1";
pub const BLOCK_SAMPLES: usize = 8192;
/// Magic bytes opening a raw batch export.
pub const BATCH_MAGIC: [u8; 4] = *b"GSMB";
const REGRESSION_RCOND: f64 = 1e-12;

/// `n_samples` draws of all `2N` quadratures, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub n_samples: usize,
    pub seed: u64,
    pub n_quadratures: usize,
    data: Vec<f64>,
}

impl SampleBatch {
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_quadratures..(i + 1) * self.n_quadratures]
    }

    pub fn column_mean(&self, col: usize) -> f64 {
        self.data.chunks_exact(self.n_quadratures).map(|r| r[col]).sum::<f64>() / self.n_samples as f64
    }

    /// Sample variance of one quadrature about zero mean.
    pub fn column_variance(&self, col: usize) -> f64 {
        self.data
            .chunks_exact(self.n_quadratures)
            .map(|r| r[col] * r[col])
            .sum::<f64>()
            / self.n_samples as f64
    }

    /// Little-endian export: 16-byte header (magic, `n_samples` as u64,
    /// `n_quadratures` as u32) followed by row-major f64 values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&BATCH_MAGIC)?;
        w.write_all(&(self.n_samples as u64).to_le_bytes())?;
        w.write_all(&(self.n_quadratures as u32).to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a batch written by [`SampleBatch::write_binary`]. The seed is not
    /// part of the file and is set to 0.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if header[..4] != BATCH_MAGIC {
            return Err(Error::InvalidArgument("not a sample batch file".into()));
        }
        let n_samples = u64::from_le_bytes(header[4..12].try_into().unwrap()) as usize;
        let n_quadratures = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
        let mut bytes = vec![0u8; n_samples * n_quadratures * 8];
        r.read_exact(&mut bytes)?;
        let data = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Ok(Self {
            n_samples,
            seed: 0,
            n_quadratures,
            data,
        })
    }
}

/// Draws `n_samples` quadrature vectors from the state's zero-mean Gaussian.
pub fn sample(state: &GaussianState, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    let dim = state.covariance().nrows();
    let chol = state
        .covariance()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?;
    let lower: DMatrix<f64> = chol.l();
    let mut data = vec![0.0; n_samples * dim];
    data.par_chunks_mut(BLOCK_SAMPLES * dim)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            let mut z = vec![0.0; dim];
            for row in chunk.chunks_exact_mut(dim) {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for (r, out) in row.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (c, zc) in z.iter().enumerate().take(r + 1) {
                        acc += lower[(r, c)] * zc;
                    }
                    *out = acc;
                }
            }
        });
    Ok(SampleBatch {
        n_samples,
        seed,
        n_quadratures: dim,
        data,
    })
}

/// Residual variance of the least-squares regression of `q_j` on
/// `{q_k : k ∈ set}` (no intercept; the state is zero-mean).
pub fn empirical_inferred_variance(batch: &SampleBatch, j: usize, set: &[usize], axis: Quadrature) -> Result<f64> {
    let n_modes = batch.n_quadratures / 2;
    for &m in std::iter::once(&j).chain(set) {
        if m >= n_modes {
            return Err(Error::ModeOutOfRange { index: m, n_modes });
        }
    }
    if set.contains(&j) {
        return Err(Error::SteeredInSet(j));
    }
    let y_col = axis.index(j);
    let x_cols: Vec<usize> = set.iter().map(|&k| axis.index(k)).collect();
    let p = x_cols.len();
    if p == 0 {
        return Ok(batch.column_variance(y_col));
    }

    let chunk = BLOCK_SAMPLES * batch.n_quadratures;
    // normal equations accumulated per block, summed in block order
    let partials: Vec<(DMatrix<f64>, DVector<f64>)> = batch
        .data
        .par_chunks(chunk)
        .map(|block| {
            let mut gram = DMatrix::zeros(p, p);
            let mut xty = DVector::zeros(p);
            for row in block.chunks_exact(batch.n_quadratures) {
                let y = row[y_col];
                for a in 0..p {
                    let xa = row[x_cols[a]];
                    xty[a] += xa * y;
                    for b in 0..=a {
                        gram[(a, b)] += xa * row[x_cols[b]];
                    }
                }
            }
            (gram, xty)
        })
        .collect();
    let mut gram = DMatrix::zeros(p, p);
    let mut xty = DVector::zeros(p);
    for (g, v) in &partials {
        gram += g;
        xty += v;
    }
    for a in 0..p {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    let svd = gram.svd(true, true);
    let cutoff = REGRESSION_RCOND * svd.singular_values.max();
    let beta = svd
        .solve(&xty, cutoff)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let rss: f64 = batch
        .data
        .par_chunks(chunk)
        .map(|block| {
            block
                .chunks_exact(batch.n_quadratures)
                .map(|row| {
                    let fit: f64 = x_cols.iter().zip(beta.iter()).map(|(&c, b)| row[c] * b).sum();
                    let r = row[y_col] - fit;
                    r * r
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(rss / (batch.n_samples - p) as f64)
}

/// One analytic-versus-sampled comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    #[serde(serialize_with = "labels::one")]
    pub mode: usize,
    pub axis: Quadrature,
    pub analytic: f64,
    pub empirical: f64,
    /// Standard error of a variance estimate, `analytic · sqrt(2/n)`.
    pub sigma: f64,
    pub deviation_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n_samples: usize,
    pub seed: u64,
    pub generator: &'static str,
    pub checks: Vec<OracleCheck>,
    pub max_deviation_sigma: f64,
}

impl OracleReport {
    pub fn passes(&self, sigmas: f64) -> bool {
        self.max_deviation_sigma <= sigmas
    }
}

/// Compares every analytic inferred variance of the active modes (each
/// steered by all the others) with its regression estimate.
pub fn verify_state(state: &GaussianState, active: &[usize], n_samples: usize, seed: u64) -> Result<OracleReport> {
    let batch = sample(state, n_samples, seed)?;
    let mut checks = Vec::new();
    for &j in active {
        let rest: Vec<usize> = active.iter().copied().filter(|&k| k != j).collect();
        for axis in Quadrature::BOTH {
            let analytic = inferred_variance(state, j, &rest, axis)?;
            let empirical = empirical_inferred_variance(&batch, j, &rest, axis)?;
            let sigma = analytic * (2.0 / n_samples as f64).sqrt();
            checks.push(OracleCheck {
                mode: j,
                axis,
                analytic,
                empirical,
                sigma,
                deviation_sigma: (empirical - analytic).abs() / sigma,
            });
        }
    }
    let max_deviation_sigma = checks.iter().map(|c| c.deviation_sigma).fold(0.0, f64::max);
    Ok(OracleReport {
        n_samples,
        seed,
        generator: GENERATOR,
        checks,
        max_deviation_sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_db_pair() -> GaussianState {
        let a = GaussianState::squeezed_mode(-3.01, 3.01, Quadrature::X).unwrap();
        let b = GaussianState::squeezed_mode(-3.01, 3.01, Quadrature::P).unwrap();
        a.tensor(&b).apply_beamsplitter(0, 1, 0.5).unwrap()
    }

    #[test]
    fn vacuum_samples_have_unit_variance() {
        let n = 1_000_000;
        let batch = sample(&GaussianState::vacuum(1).unwrap(), n, 1).unwrap();
        let band = 3.0 * (2.0 / n as f64).sqrt();
        assert!((batch.column_variance(0) - 1.0).abs() < band);
        assert!((batch.column_variance(1) - 1.0).abs() < band);
        for c in 0..2 {
            assert!(batch.column_mean(c).abs() < 5.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn squeezed_samples_match_db_value() {
        let n = 1_000_000;
        let s = GaussianState::squeezed_mode(-3.6, 8.9, Quadrature::P).unwrap();
        let batch = sample(&s, n, 11).unwrap();
        let expected = crate::gaussian::db_to_variance(-3.6);
        let band = 3.0 * expected * (2.0 / n as f64).sqrt();
        assert!((batch.column_variance(1) - expected).abs() < band);
    }

    #[test]
    fn same_seed_same_batch() {
        let s = three_db_pair();
        let a = sample(&s, 20_000, 42).unwrap();
        let b = sample(&s, 20_000, 42).unwrap();
        assert_eq!(a, b);
        let c = sample(&s, 20_000, 43).unwrap();
        assert_ne!(a.data(), c.data());
        // thread count does not matter
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let d = pool.install(|| sample(&s, 20_000, 42).unwrap());
        assert_eq!(a, d);
    }

    #[test]
    fn regression_recovers_three_db_inference() {
        let n = 1_000_000;
        let batch = sample(&three_db_pair(), n, 5).unwrap();
        let v = empirical_inferred_variance(&batch, 0, &[1], Quadrature::X).unwrap();
        let band = 3.0 * 0.8 * (2.0 / n as f64).sqrt();
        assert!((v - 0.8).abs() < band + 2e-4, "{v}");
        let vac = sample(&GaussianState::vacuum(3).unwrap(), n, 5).unwrap();
        let w = empirical_inferred_variance(&vac, 0, &[1, 2], Quadrature::P).unwrap();
        assert!((w - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn binary_round_trip() {
        let batch = sample(&three_db_pair(), 100, 9).unwrap();
        let mut bytes = Vec::new();
        batch.write_binary(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 100 * 4 * 8);
        assert_eq!(&bytes[..4], b"GSMB");
        let back = SampleBatch::read_binary(bytes.as_slice()).unwrap();
        assert_eq!(back.data(), batch.data());
        assert_eq!(back.n_quadratures, 4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = three_db_pair();
        assert!(sample(&s, 1, 0).is_err());
        let batch = sample(&s, 100, 0).unwrap();
        assert!(empirical_inferred_variance(&batch, 0, &[0], Quadrature::X).is_err());
        assert!(empirical_inferred_variance(&batch, 0, &[4], Quadrature::X).is_err());
    }
}
