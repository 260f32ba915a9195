//! Exact per-node rates on a finite `n × n` SFCAR lattice.
//!
//! On a torus the precision matrix is block circulant, so its eigenvalues
//! are known in closed form and the rates are plain sums over the DFT
//! grid. With a free boundary the neighbour taps that leave the lattice are
//! dropped; the precision is then banded with half-bandwidth `n` and is
//! handled with a banded Cholesky factor and its selected inverse.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::car::{NoiseModel, SfcarParams};
use crate::error::{Error, Result};
use crate::rates::{kli_integrand, mi_integrand, RateMethod, RateResult};
use crate::sum::CompensatedSum;

/// Largest side accepted with a free boundary.
pub const MAX_FREE_SIDE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Boundary {
    Torus,
    Free,
}

/// Side length and boundary handling of a finite lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeSpec {
    n: usize,
    boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(n: usize, boundary: Boundary) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(
                "n",
                n as f64,
                "lattice side must be at least 2",
            ));
        }
        if boundary == Boundary::Free && n > MAX_FREE_SIDE {
            return Err(Error::invalid(
                "n",
                n as f64,
                "free boundary is limited to n <= 64",
            ));
        }
        Ok(Self { n, boundary })
    }

    pub fn torus(n: usize) -> Result<Self> {
        Self::new(n, Boundary::Torus)
    }

    pub fn free(n: usize) -> Result<Self> {
        Self::new(n, Boundary::Free)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn nodes(&self) -> usize {
        self.n * self.n
    }
}

/// Replicate count and seed for Monte Carlo runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonteCarloSpec {
    replicates: usize,
    seed: u64,
}

impl MonteCarloSpec {
    pub fn new(replicates: usize, seed: u64) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::invalid("replicates", 0.0, "must be at least 1"));
        }
        Ok(Self { replicates, seed })
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Precision eigenvalues `q_kl = κ(1 − 2ζ cos(2πk/n) − 2ζ cos(2πl/n))` of the
/// torus-wrapped SFCAR field, row-major in `(k, l)`.
///
/// Evaluated as `κ(1 − 4ζ + 4ζ(sin²(πk/n) + sin²(πl/n)))` so that the
/// smallest eigenvalue keeps full relative precision near `ζ = 1/4`.
pub fn torus_eigenvalues(params: &SfcarParams, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid(
            "n",
            n as f64,
            "lattice side must be at least 2",
        ));
    }
    let kappa = params.kappa();
    let dependence = params.dependence();
    let gap = dependence.gap();
    let four_zeta = 4.0 * dependence.zeta();
    let axis: Vec<f64> = (0..n)
        .map(|k| {
            let s = libm::sin(PI * k as f64 / n as f64);
            s * s
        })
        .collect();
    let mut q = Vec::with_capacity(n * n);
    for &ak in &axis {
        for &al in &axis {
            q.push(kappa * (gap + four_zeta * (ak + al)));
        }
    }
    if let Some(&bad) = q.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::InvalidModel(if bad.is_nan() {
            "torus eigenvalue is not a number"
        } else {
            "torus eigenvalue is not positive"
        }));
    }
    Ok(q)
}

/// Exact per-node KLI and MI of the finite lattice.
pub fn finite_lattice_rates(
    params: &SfcarParams,
    noise: &NoiseModel,
    lattice: &LatticeSpec,
) -> Result<RateResult> {
    let (kli_rate, mi_rate) = match lattice.boundary {
        Boundary::Torus => torus_rates(params, noise, lattice.n)?,
        Boundary::Free => free_rates(params, noise, lattice.n)?,
    };
    Ok(RateResult {
        kli_rate,
        mi_rate,
        quadrature_points: lattice.n,
        converged: true,
        method: RateMethod::Exact,
    })
}

fn torus_rates(params: &SfcarParams, noise: &NoiseModel, n: usize) -> Result<(f64, f64)> {
    let sigma2 = noise.sigma2();
    let mut kli = CompensatedSum::new();
    let mut mi = CompensatedSum::new();
    for q in torus_eigenvalues(params, n)? {
        let s = 1.0 / (q * sigma2);
        kli.add(kli_integrand(s));
        mi.add(mi_integrand(s));
    }
    let nodes = (n * n) as f64;
    Ok((kli.value() / nodes, mi.value() / nodes))
}

/// Per-node log-likelihood ratio `log(p₀/p₁)` of one torus observation.
///
/// `periodogram[k]` is `|Ŷ_k|²` under the unitary 2-D DFT and `eigenvalues`
/// are the matching [`torus_eigenvalues`]. Under `p₀` the mean of the result
/// is the torus KLI rate.
pub fn llr_per_node(periodogram: &[f64], eigenvalues: &[f64], noise: &NoiseModel) -> Result<f64> {
    if periodogram.len() != eigenvalues.len() {
        return Err(Error::InvalidModel(
            "periodogram and eigenvalue grids differ in size",
        ));
    }
    if periodogram.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let sigma2 = noise.sigma2();
    let mut total = CompensatedSum::new();
    for (&power, &q) in periodogram.iter().zip(eigenvalues) {
        let s = 1.0 / (q * sigma2);
        total.add(0.5 * libm::log1p(s) - 0.5 * power * s / (sigma2 * (1.0 + s)));
    }
    Ok(total.value() / periodogram.len() as f64)
}

/// Free boundary: with `Q` the truncated precision and `A = Q + I/σ²`,
///
/// ```text
/// MI  = (log det A − log det Q) / 2N
/// KLI = (log det A − log det Q − tr(A⁻¹)/σ²) / 2N
/// ```
fn free_rates(params: &SfcarParams, noise: &NoiseModel, n: usize) -> Result<(f64, f64)> {
    let sigma2 = noise.sigma2();
    let nodes = n * n;
    let q = BandMatrix::sfcar_free(params, n, 0.0);
    let a = BandMatrix::sfcar_free(params, n, 1.0 / sigma2);
    let q_chol = q.cholesky()?;
    let a_chol = a.cholesky()?;
    let log_ratio = a_chol.log_det() - q_chol.log_det();
    let trace = a_chol.inverse_trace();
    let mi = log_ratio / (2.0 * nodes as f64);
    let kli = (log_ratio - trace / sigma2) / (2.0 * nodes as f64);
    Ok((kli, mi))
}

/// Symmetric band matrix stored by rows as `row[i][j − i]` for
/// `0 ≤ j − i ≤ width`.
struct BandMatrix {
    size: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    fn zeros(size: usize, width: usize) -> Self {
        Self {
            size,
            width,
            data: vec![0.0; size * (width + 1)],
        }
    }

    fn at(&self, i: usize, offset: usize) -> f64 {
        self.data[i * (self.width + 1) + offset]
    }

    fn at_mut(&mut self, i: usize, offset: usize) -> &mut f64 {
        &mut self.data[i * (self.width + 1) + offset]
    }

    /// `κ(I − ζ·adjacency) + shift·I` on the `n × n` grid, node `(i, j)` at
    /// index `i·n + j`.
    fn sfcar_free(params: &SfcarParams, n: usize, shift: f64) -> Self {
        let kappa = params.kappa();
        let lambda = params.lambda();
        let mut m = Self::zeros(n * n, n);
        for i in 0..n {
            for j in 0..n {
                let idx = i * n + j;
                *m.at_mut(idx, 0) = kappa + shift;
                if j + 1 < n {
                    *m.at_mut(idx, 1) = -lambda;
                }
                if i + 1 < n {
                    *m.at_mut(idx, n) = -lambda;
                }
            }
        }
        m
    }

    /// Upper factor `U` with `M = UᵀU`, stored in the same band layout.
    fn cholesky(&self) -> Result<BandMatrix> {
        let (size, width) = (self.size, self.width);
        let mut u = Self::zeros(size, width);
        for i in 0..size {
            let end = (i + width).min(size - 1);
            for j in i..=end {
                let mut sum = self.at(i, j - i);
                let first = j.saturating_sub(width);
                for k in first..i {
                    sum -= u.at(k, i - k) * u.at(k, j - k);
                }
                if j == i {
                    if !(sum > 0.0) {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    *u.at_mut(i, 0) = libm::sqrt(sum);
                } else {
                    *u.at_mut(i, j - i) = sum / u.at(i, 0);
                }
            }
        }
        Ok(u)
    }
}

impl BandMatrix {
    fn log_det(&self) -> f64 {
        let mut sum = CompensatedSum::new();
        for i in 0..self.size {
            sum.add(2.0 * libm::log(self.at(i, 0)));
        }
        sum.value()
    }

    /// `tr(M⁻¹)` from the upper factor, via the selected inverse restricted
    /// to the band.
    fn inverse_trace(&self) -> f64 {
        let (size, width) = (self.size, self.width);
        let mut z = Self::zeros(size, width);
        let mut trace = CompensatedSum::new();
        for i in (0..size).rev() {
            let end = (i + width).min(size - 1);
            let pivot = self.at(i, 0);
            for j in (i + 1..=end).rev() {
                let mut sum = 0.0;
                for k in i + 1..=end {
                    let z_kj = if k <= j {
                        z.at(k, j - k)
                    } else {
                        z.at(j, k - j)
                    };
                    sum += self.at(i, k - i) * z_kj;
                }
                *z.at_mut(i, j - i) = -sum / pivot;
            }
            let mut sum = 0.0;
            for k in i + 1..=end {
                sum += self.at(i, k - i) * z.at(i, k - i);
            }
            let z_ii = (1.0 / pivot - sum) / pivot;
            *z.at_mut(i, 0) = z_ii;
            trace.add(z_ii);
        }
        trace.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::car::sfcar_from_snr;
    use crate::rates::sfcar_rates;
    use crate::specfun::QuadratureSpec;
    use nalgebra::DMatrix;

    const STEIN_SNR1: f64 = 0.096_573_590_279_972_65;
    const HALF_LN2: f64 = 0.346_573_590_279_972_65;

    fn dense_precision(params: &SfcarParams, n: usize) -> DMatrix<f64> {
        let size = n * n;
        let mut q = DMatrix::zeros(size, size);
        let idx = |i: usize, j: usize| i * n + j;
        for i in 0..n {
            for j in 0..n {
                q[(idx(i, j), idx(i, j))] = params.kappa();
                for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n {
                        q[(idx(i, j), idx(a as usize, b as usize))] = -params.lambda();
                    }
                }
            }
        }
        q
    }

    /// Gaussian divergence from the eigenvalues of the explicit covariance.
    fn dense_rates(params: &SfcarParams, sigma2: f64, n: usize) -> (f64, f64) {
        let size = (n * n) as f64;
        let cov = dense_precision(params, n).try_inverse().unwrap();
        let total = &cov + DMatrix::identity(n * n, n * n) * sigma2;
        let eig = total.symmetric_eigen();
        let mut kli = 0.0;
        let mut mi = 0.0;
        for &lam in eig.eigenvalues.iter() {
            let r = lam / sigma2;
            mi += 0.5 * r.ln();
            kli += 0.5 * (1.0 / r - 1.0 + r.ln());
        }
        (kli / size, mi / size)
    }

    #[test]
    fn eigenvalue_examples() {
        let p = SfcarParams::new(1.0, 0.0).unwrap();
        assert!(torus_eigenvalues(&p, 5).unwrap().iter().all(|&q| q == 1.0));
        let p = SfcarParams::new(1.0, 0.2).unwrap();
        let q = torus_eigenvalues(&p, 2).unwrap();
        let expect = [0.2, 1.0, 1.0, 1.8];
        for (a, b) in q.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
        let p = SfcarParams::new(1.0, 0.24).unwrap();
        let q = torus_eigenvalues(&p, 4).unwrap();
        let min = q.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min - 0.04).abs() < 1e-15);
        assert_eq!(min, q[0]);
        assert!(torus_eigenvalues(&p, 1).is_err());
    }

    #[test]
    fn eigenvalues_match_dense_circulant() {
        let n = 6;
        let p = SfcarParams::new(1.7, 0.22).unwrap();
        let size = n * n;
        let mut q = DMatrix::<f64>::zeros(size, size);
        for i in 0..n {
            for j in 0..n {
                let r = i * n + j;
                q[(r, r)] += p.kappa();
                for (a, b) in [
                    ((i + 1) % n, j),
                    ((i + n - 1) % n, j),
                    (i, (j + 1) % n),
                    (i, (j + n - 1) % n),
                ] {
                    q[(r, a * n + b)] -= p.lambda();
                }
            }
        }
        let mut dense: Vec<f64> = q.symmetric_eigen().eigenvalues.iter().cloned().collect();
        let mut exact = torus_eigenvalues(&p, n).unwrap();
        dense.sort_by(f64::total_cmp);
        exact.sort_by(f64::total_cmp);
        for (a, b) in dense.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn iid_case_is_boundary_independent() {
        let p = SfcarParams::new(1.0, 0.0).unwrap();
        let noise = NoiseModel::default();
        for lattice in [
            LatticeSpec::torus(7).unwrap(),
            LatticeSpec::free(7).unwrap(),
        ] {
            let r = finite_lattice_rates(&p, &noise, &lattice).unwrap();
            assert!((r.mi_rate - HALF_LN2).abs() < 1e-14);
            assert!((r.kli_rate - STEIN_SNR1).abs() < 1e-14);
        }
    }

    #[test]
    fn free_boundary_matches_dense_eigendecomposition() {
        let p = SfcarParams::new(1.0, 0.2).unwrap();
        let noise = NoiseModel::default();
        let r = finite_lattice_rates(&p, &noise, &LatticeSpec::free(8).unwrap()).unwrap();
        let (kli, mi) = dense_rates(&p, 1.0, 8);
        assert!((r.kli_rate - kli).abs() < 1e-10, "{} vs {kli}", r.kli_rate);
        assert!((r.mi_rate - mi).abs() < 1e-10);

        let p = SfcarParams::new(0.3, 0.249).unwrap();
        let r = finite_lattice_rates(
            &p,
            &NoiseModel::new(2.5).unwrap(),
            &LatticeSpec::free(5).unwrap(),
        )
        .unwrap();
        let (kli, mi) = dense_rates(&p, 2.5, 5);
        assert!((r.kli_rate - kli).abs() < 1e-10);
        assert!((r.mi_rate - mi).abs() < 1e-10);
    }

    #[test]
    fn torus_matches_dense_circulant_rates() {
        let n = 6;
        let p = SfcarParams::new(1.0, 0.15).unwrap();
        let r = finite_lattice_rates(
            &p,
            &NoiseModel::new(0.5).unwrap(),
            &LatticeSpec::torus(n).unwrap(),
        )
        .unwrap();
        let mut kli = 0.0;
        let mut mi = 0.0;
        for q in torus_eigenvalues(&p, n).unwrap() {
            let total = 1.0 / q + 0.5;
            let r = total / 0.5;
            mi += 0.5 * r.ln();
            kli += 0.5 * (1.0 / r - 1.0 + r.ln());
        }
        let size = (n * n) as f64;
        assert!((r.kli_rate - kli / size).abs() < 1e-14);
        assert!((r.mi_rate - mi / size).abs() < 1e-14);
    }

    #[test]
    fn torus_pins_asymptotic_rates() {
        let noise = NoiseModel::default();
        let p = sfcar_from_snr(10.0, 0.1, &noise).unwrap();
        let torus = finite_lattice_rates(&p, &noise, &LatticeSpec::torus(1024).unwrap()).unwrap();
        let rates = sfcar_rates(0.1, 10.0, &QuadratureSpec::default()).unwrap();
        assert!((torus.kli_rate - rates.kli_rate).abs() < 1e-6);
        assert!((torus.mi_rate - rates.mi_rate).abs() < 1e-6);
    }

    #[test]
    fn free_and_torus_are_close_at_n64() {
        let noise = NoiseModel::default();
        let p = sfcar_from_snr(10.0, 0.1, &noise).unwrap();
        let free = finite_lattice_rates(&p, &noise, &LatticeSpec::free(64).unwrap()).unwrap();
        let torus = finite_lattice_rates(&p, &noise, &LatticeSpec::torus(64).unwrap()).unwrap();
        assert!((free.mi_rate - torus.mi_rate).abs() <= 5e-2);
    }

    #[test]
    fn llr_of_expected_periodogram_is_kli() {
        let noise = NoiseModel::new(0.7).unwrap();
        let p = SfcarParams::new(2.0, 0.18).unwrap();
        let q = torus_eigenvalues(&p, 8).unwrap();
        let periodogram = vec![0.7; q.len()];
        let llr = llr_per_node(&periodogram, &q, &noise).unwrap();
        let exact = finite_lattice_rates(&p, &noise, &LatticeSpec::torus(8).unwrap()).unwrap();
        assert!((llr - exact.kli_rate).abs() < 1e-14);
        assert!(llr_per_node(&periodogram[1..], &q, &noise).is_err());
    }

    #[test]
    fn lattice_spec_validation() {
        assert!(LatticeSpec::torus(1).is_err());
        assert!(LatticeSpec::free(65).is_err());
        assert!(LatticeSpec::torus(4096).is_ok());
        assert!(MonteCarloSpec::new(0, 1).is_err());
    }
}
