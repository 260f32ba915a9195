//! Monte Carlo estimate of the per-node log-likelihood ratio under the
//! noise-only hypothesis.
//!
//! Replicate `r` draws from `ChaCha20Rng::seed_from_u64(seed)` switched to
//! stream `r`, so each replicate is independent of how replicates are
//! scheduled across threads. Normal variates use the Marsaglia polar method
//! on 53-bit uniforms. Per-replicate values are reduced serially in
//! replicate order with compensated sums.

use std::sync::Arc;

use hgmrf_core::car::{NoiseModel, SfcarParams};
use hgmrf_core::oracle::{llr_per_node, torus_eigenvalues, MonteCarloSpec};
use hgmrf_core::sum::CompensatedSum;
use hgmrf_core::Error;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub replicates: usize,
}

/// Standard normal variates from a ChaCha stream.
pub struct NormalStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * scale);
                return u * scale;
            }
        }
    }
}

/// In-place unitary 2-D DFT of a row-major `n × n` grid.
///
/// The output is transposed: bin `(k, l)` lands at `l·n + k`. Callers that
/// pair bins with the symmetric torus eigenvalues need not undo this.
pub struct Dft2 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Dft2 {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n);
        Self { n, fft }
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::default(); self.fft.get_inplace_scratch_len()]
    }

    pub fn periodogram(&self, grid: &mut [Complex64], scratch: &mut [Complex64]) -> Vec<f64> {
        let n = self.n;
        self.fft.process_with_scratch(grid, scratch);
        transpose_square(grid, n);
        self.fft.process_with_scratch(grid, scratch);
        let norm = 1.0 / (n * n) as f64;
        grid.iter().map(|z| z.norm_sqr() * norm).collect()
    }
}

fn transpose_square(grid: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            grid.swap(i * n + j, j * n + i);
        }
    }
}

/// Per-node LLR of one noise-only replicate.
fn replicate_llr(
    dft: &Dft2,
    eigenvalues: &[f64],
    noise: &NoiseModel,
    seed: u64,
    replicate: u64,
) -> hgmrf_core::Result<f64> {
    let n = dft.n;
    let sd = noise.sigma2().sqrt();
    let mut normals = NormalStream::new(seed, replicate);
    let mut grid: Vec<Complex64> = (0..n * n)
        .map(|_| Complex64::new(sd * normals.next_normal(), 0.0))
        .collect();
    let mut scratch = dft.scratch();
    let periodogram = dft.periodogram(&mut grid, &mut scratch);
    llr_per_node(&periodogram, eigenvalues, noise)
}

/// Mean and standard error of the per-node LLR `log(p₀/p₁)` over
/// independent `Y ~ N(0, σ²I)` replicates on an `n × n` torus.
pub fn sample_llr_per_node(
    params: &SfcarParams,
    noise: &NoiseModel,
    n: usize,
    mc: &MonteCarloSpec,
) -> hgmrf_core::Result<McEstimate> {
    let replicates = mc.replicates();
    if replicates < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: replicates,
        });
    }
    let eigenvalues = torus_eigenvalues(params, n)?;
    let dft = Dft2::new(n);
    let values: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| replicate_llr(&dft, &eigenvalues, noise, mc.seed(), r))
        .collect::<hgmrf_core::Result<_>>()?;
    let (mean, variance) = mean_and_variance(&values);
    Ok(McEstimate {
        mean,
        standard_error: (variance / replicates as f64).sqrt(),
        replicates,
    })
}

/// Two-pass mean and unbiased sample variance.
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let mut sum = CompensatedSum::new();
    for &v in values {
        sum.add(v);
    }
    let mean = sum.value() / values.len() as f64;
    let mut squares = CompensatedSum::new();
    for &v in values {
        squares.add((v - mean) * (v - mean));
    }
    (mean, squares.value() / (values.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normals_have_unit_moments() {
        let mut s = NormalStream::new(7, 0);
        let xs: Vec<f64> = (0..200_000).map(|_| s.next_normal()).collect();
        let (m, v) = mean_and_variance(&xs);
        assert!(m.abs() < 0.01);
        assert!((v - 1.0).abs() < 0.01);
    }

    #[test]
    fn streams_differ_and_repeat() {
        let a: Vec<f64> = {
            let mut s = NormalStream::new(1, 0);
            (0..4).map(|_| s.next_normal()).collect()
        };
        let b: Vec<f64> = {
            let mut s = NormalStream::new(1, 1);
            (0..4).map(|_| s.next_normal()).collect()
        };
        let c: Vec<f64> = {
            let mut s = NormalStream::new(1, 0);
            (0..4).map(|_| s.next_normal()).collect()
        };
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn dft_matches_direct_sum() {
        let n = 5;
        let dft = Dft2::new(n);
        let mut s = NormalStream::new(3, 0);
        let y: Vec<f64> = (0..n * n).map(|_| s.next_normal()).collect();
        let mut grid: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let p = dft.periodogram(&mut grid, &mut dft.scratch());
        for k in 0..n {
            for l in 0..n {
                let mut acc = Complex64::default();
                for i in 0..n {
                    for j in 0..n {
                        let phase =
                            -2.0 * std::f64::consts::PI * ((k * i + l * j) as f64) / n as f64;
                        acc += Complex64::from_polar(y[i * n + j], phase);
                    }
                }
                let direct = acc.norm_sqr() / (n * n) as f64;
                assert!((p[l * n + k] - direct).abs() < 1e-12);
            }
        }
        // Parseval
        let energy: f64 = y.iter().map(|v| v * v).sum();
        assert!((p.iter().sum::<f64>() - energy).abs() < 1e-12);
    }

    #[test]
    fn needs_two_replicates() {
        let p = SfcarParams::new(1.0, 0.1).unwrap();
        let mc = MonteCarloSpec::new(1, 0).unwrap();
        assert!(sample_llr_per_node(&p, &NoiseModel::default(), 8, &mc).is_err());
    }
}
