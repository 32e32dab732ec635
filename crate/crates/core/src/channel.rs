//! Gaussian-averaged dephasing channel.
//!
//! Every qubit Hamiltonian is proportional to σx, so the averaged map is
//! diagonal in the σx eigenbasis. In that basis an element `ρ̃[r,c]` picks up
//! the phase `exp(-i λ Σ_e φ_e (s_e(r) - s_e(c)))`, where `s_e` is the
//! collective eigenvalue of environment `e`. Averaging over independent
//! zero-mean Gaussian phases with variances `β_e` gives the real decay factor
//!
//! ```text
//! F[r,c] = Π_e exp(-λ² β_e (s_e(r) - s_e(c))² / 2)
//! ```
//!
//! so the channel is a Hadamard transform, a Schur product with `F`, and the
//! inverse transform. `F` is a Gaussian kernel in the integer coordinates
//! `s_e`, hence PSD, and the Schur product preserves positivity.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{schur, ComplexMatrix, DensityMatrix};
use crate::model::{beta, NoiseParams, Partition};

/// Averaged dephasing map for a fixed set of per-environment phase variances.
///
/// A variance of `f64::INFINITY` stands for the long-time limit, where every
/// coherence between different collective eigenvalues is erased.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingChannel {
    partition: Partition,
    betas: Vec<f64>,
    lambda: f64,
}

impl DephasingChannel {
    pub fn new(partition: Partition, betas: Vec<f64>, lambda: f64) -> Result<Self> {
        if betas.len() != partition.n_envs() {
            return Err(Error::InvalidParameter(format!(
                "{} phase variances for {} environments",
                betas.len(),
                partition.n_envs()
            )));
        }
        if let Some(bad) = betas.iter().find(|b| b.is_nan() || **b < 0.0) {
            return Err(Error::InvalidParameter(format!("phase variance must be nonnegative, got {bad}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
        }
        Ok(Self { partition, betas, lambda })
    }

    /// Same variance on every environment.
    pub fn uniform(partition: Partition, beta: f64, lambda: f64) -> Result<Self> {
        let n = partition.n_envs();
        Self::new(partition, vec![beta; n], lambda)
    }

    /// Channel after evolving for time `t` under `noise`.
    pub fn at_time(partition: Partition, noise: &NoiseParams, t: f64) -> Result<Self> {
        Self::uniform(partition, beta(noise, t)?, noise.lambda)
    }

    pub fn asymptotic(partition: Partition) -> Self {
        let n = partition.n_envs();
        Self { partition, betas: vec![f64::INFINITY; n], lambda: 1.0 }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Real decay matrix `F` in the collective σx eigenbasis.
    pub fn decay_matrix(&self) -> Result<ComplexMatrix> {
        let spectrum = self.partition.collective_spectrum();
        let lambda_sq = self.lambda * self.lambda;
        ComplexMatrix::from_fn(spectrum.len(), |r, c| {
            let mut exponent = 0.0;
            for ((sr, sc), &b) in spectrum[r].iter().zip(&spectrum[c]).zip(&self.betas) {
                let gap = f64::from(sr - sc);
                if gap == 0.0 || lambda_sq == 0.0 || b == 0.0 {
                    continue;
                }
                if b.is_infinite() {
                    return Complex64::new(0.0, 0.0);
                }
                exponent += lambda_sq * b * gap * gap / 2.0;
            }
            Complex64::new((-exponent).exp(), 0.0)
        })
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_register(rho)?;
        let rotated = hadamard_transform(rho)?;
        self.apply_rotated(&rotated, &self.decay_matrix()?)
    }

    fn apply_rotated(&self, rotated: &ComplexMatrix, decay: &ComplexMatrix) -> Result<DensityMatrix> {
        let damped = schur(rotated, decay)?;
        DensityMatrix::new(hadamard_transform(&damped)?)
    }

    fn check_register(&self, rho: &DensityMatrix) -> Result<()> {
        let expected = 1usize << self.partition.n_qubits();
        if rho.dim() != expected {
            return Err(Error::DimensionMismatch { left: rho.dim(), right: expected });
        }
        Ok(())
    }
}

/// Conjugation by `H^⊗n`, `H = [[1, 1], [1, -1]]/√2`. Involutive.
pub fn hadamard_transform(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = rho.dim();
    if !d.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(d));
    }
    let mut out = rho.clone();
    let data = out.as_mut_slice();
    for row in data.chunks_exact_mut(d) {
        walsh_hadamard(row, 1);
    }
    for col in 0..d {
        walsh_hadamard(&mut data[col..], d);
    }
    let norm = Complex64::new(1.0 / d as f64, 0.0);
    data.iter_mut().for_each(|z| *z *= norm);
    Ok(out)
}

/// Unnormalized in-place fast Walsh-Hadamard transform on the elements
/// `v[0], v[stride], v[2*stride], …` (`d` of them, `d` a power of two).
fn walsh_hadamard(v: &mut [Complex64], stride: usize) {
    let n = if stride == 1 { v.len() } else { v.len().div_ceil(stride) };
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for i in block..block + half {
                let a = v[i * stride];
                let b = v[(i + half) * stride];
                v[i * stride] = a + b;
                v[(i + half) * stride] = a - b;
            }
        }
        half *= 2;
    }
}

/// Decay matrix for an explicit channel; `n_qubits` must match its partition.
pub fn decay_matrix(channel: &DephasingChannel, n_qubits: usize) -> Result<ComplexMatrix> {
    if channel.partition.n_qubits() != n_qubits {
        return Err(Error::DimensionMismatch { left: n_qubits, right: channel.partition.n_qubits() });
    }
    channel.decay_matrix()
}

/// Averaged state at time `t`.
pub fn evolve(rho0: &DensityMatrix, partition: &Partition, noise: &NoiseParams, t: f64) -> Result<DensityMatrix> {
    DephasingChannel::at_time(partition.clone(), noise, t)?.apply(rho0)
}

/// [`evolve`] on every point of an ascending, nonnegative time grid.
///
/// Grid points are evaluated in parallel; each point is computed on its own,
/// so the result does not depend on scheduling.
pub fn evolve_series(
    rho0: &DensityMatrix,
    partition: &Partition,
    noise: &NoiseParams,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    if t_grid.iter().any(|t| t.is_nan() || *t < 0.0) || t_grid.windows(2).any(|w| w[1].is_nan() || w[1] < w[0]) {
        return Err(Error::UnsortedGrid);
    }
    let probe = DephasingChannel::uniform(partition.clone(), 0.0, noise.lambda)?;
    probe.check_register(rho0)?;
    let rotated = hadamard_transform(rho0)?;
    t_grid
        .par_iter()
        .map(|&t| {
            let channel = DephasingChannel::at_time(partition.clone(), noise, t)?;
            channel.apply_rotated(&rotated, &channel.decay_matrix()?)
        })
        .collect()
}

/// Long-time limit of the averaged state.
pub fn asymptotic(rho0: &DensityMatrix, partition: &Partition) -> Result<DensityMatrix> {
    DephasingChannel::asymptotic(partition.clone()).apply(rho0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_distance;
    use crate::model::ghz_density;

    fn presets() -> Vec<Partition> {
        ["cse", "bse", "tse", "ise"].iter().map(|p| Partition::preset(p, 4).unwrap()).collect()
    }

    #[test]
    fn hadamard_of_identity_and_ghz() {
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let h = hadamard_transform(&mixed).unwrap();
        assert!(frobenius_distance(&h, &mixed).unwrap() < 1e-16);

        let ghz = ghz_density(4).unwrap();
        let h = hadamard_transform(&ghz).unwrap();
        let even = |i: usize| i.count_ones().is_multiple_of(2);
        for r in 0..16 {
            for c in 0..16 {
                let expect = if even(r) && even(c) { 0.125 } else { 0.0 };
                assert_eq!(h[(r, c)], Complex64::new(expect, 0.0), "({r},{c})");
            }
        }
    }

    #[test]
    fn hadamard_is_involutive() {
        let m = ComplexMatrix::from_fn(8, |r, c| Complex64::new((r * 3 + c) as f64 * 0.1, r as f64 - c as f64))
            .unwrap();
        let back = hadamard_transform(&hadamard_transform(&m).unwrap()).unwrap();
        assert!(frobenius_distance(&back, &m).unwrap() < 1e-12);
        assert!(matches!(
            hadamard_transform(&ComplexMatrix::identity(3).unwrap()),
            Err(Error::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn decay_matrix_limits() {
        for p in presets() {
            let f = DephasingChannel::uniform(p.clone(), 0.0, 1.0).unwrap().decay_matrix().unwrap();
            assert!(f.as_slice().iter().all(|z| *z == Complex64::new(1.0, 0.0)));

            let f = DephasingChannel::asymptotic(p.clone()).decay_matrix().unwrap();
            let s = p.collective_spectrum();
            for r in 0..16 {
                for c in 0..16 {
                    let expect = if s[r] == s[c] { 1.0 } else { 0.0 };
                    assert_eq!(f[(r, c)].re, expect);
                }
            }
        }
    }

    #[test]
    fn decay_matrix_cse_gaps() {
        let beta = 0.3;
        let cse = Partition::common(4).unwrap();
        let f = DephasingChannel::uniform(cse.clone(), beta, 1.0).unwrap().decay_matrix().unwrap();
        let s = cse.collective_spectrum();
        for r in 0..16 {
            assert_eq!(f[(r, r)].re, 1.0);
            for c in 0..16 {
                assert_eq!(f[(r, c)], f[(c, r)]);
                let gap = (s[r][0] - s[c][0]).abs();
                let expect = match gap {
                    0 => 1.0,
                    2 => (-2.0 * beta).exp(),
                    4 => (-8.0 * beta).exp(),
                    6 => (-18.0 * beta).exp(),
                    8 => (-32.0 * beta).exp(),
                    _ => unreachable!(),
                };
                assert!((f[(r, c)].re - expect).abs() < 1e-15);
            }
        }
        assert!(decay_matrix(&DephasingChannel::asymptotic(cse), 3).is_err());
    }

    #[test]
    fn decay_matrix_is_psd() {
        for p in presets() {
            let f = DephasingChannel::uniform(p, 0.4, 1.3).unwrap().decay_matrix().unwrap();
            let eig = crate::linalg::hermitian_eigenvalues(&f, 1e-12).unwrap();
            assert!(*eig.last().unwrap() > -1e-12);
        }
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let ghz = ghz_density(4).unwrap();
        let noise = NoiseParams::new(1.0).unwrap();
        for p in presets() {
            let out = evolve(&ghz, &p, &noise, 0.0).unwrap();
            assert!(frobenius_distance(&out, &ghz).unwrap() < 1e-15);
        }
    }

    #[test]
    fn cse_witness_closed_form() {
        let ghz = ghz_density(4).unwrap();
        let cse = Partition::common(4).unwrap();
        let noise = NoiseParams::new(0.7).unwrap();
        for &t in &[0.1, 0.5, 1.0, 3.0] {
            let b = beta(&noise, t).unwrap();
            let rho = evolve(&ghz, &cse, &noise, t).unwrap();
            let ew = crate::linalg::trace_of_product(&ghz, &rho).unwrap().re - 0.5;
            let expect = (3.0 + (-32.0 * b).exp() + 12.0 * (-8.0 * b).exp()) / 32.0;
            assert!((ew - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn asymptotic_is_idempotent() {
        let ghz = ghz_density(4).unwrap();
        for p in presets() {
            let once = asymptotic(&ghz, &p).unwrap();
            let twice = asymptotic(&once, &p).unwrap();
            assert!(frobenius_distance(&once, &twice).unwrap() < 1e-15);
        }
    }

    #[test]
    fn cse_asymptote_blocks() {
        let ghz = ghz_density(4).unwrap();
        let cse = Partition::common(4).unwrap();
        let x = hadamard_transform(&asymptotic(&ghz, &cse).unwrap()).unwrap();
        let s = cse.collective_spectrum();
        let even = |i: usize| i.count_ones().is_multiple_of(2);
        for r in 0..16 {
            for c in 0..16 {
                let expect = if even(r) && even(c) && s[r] == s[c] { 0.125 } else { 0.0 };
                assert!((x[(r, c)].re - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn series_matches_pointwise() {
        let ghz = ghz_density(4).unwrap();
        let bse = Partition::bipartite(4).unwrap();
        let noise = NoiseParams::new(1.0).unwrap();
        let grid = [0.0, 0.5, 1.0, 2.0];
        let series = evolve_series(&ghz, &bse, &noise, &grid).unwrap();
        for (rho, &t) in series.iter().zip(&grid) {
            assert_eq!(rho, &evolve(&ghz, &bse, &noise, t).unwrap());
        }
        assert_eq!(evolve_series(&ghz, &bse, &noise, &[0.0]).unwrap(), vec![ghz.clone()]);
        assert!(matches!(evolve_series(&ghz, &bse, &noise, &[1.0, 0.5]), Err(Error::UnsortedGrid)));
        assert!(matches!(evolve_series(&ghz, &bse, &noise, &[-1.0]), Err(Error::UnsortedGrid)));
    }

    #[test]
    fn register_size_must_match() {
        let ghz = ghz_density(3).unwrap();
        let noise = NoiseParams::new(1.0).unwrap();
        assert!(evolve(&ghz, &Partition::common(4).unwrap(), &noise, 1.0).is_err());
    }

    #[test]
    fn invalid_channel_parameters() {
        let p = Partition::bipartite(4).unwrap();
        assert!(DephasingChannel::new(p.clone(), vec![0.1], 1.0).is_err());
        assert!(DephasingChannel::new(p.clone(), vec![0.1, -0.1], 1.0).is_err());
        assert!(DephasingChannel::new(p, vec![0.1, f64::NAN], 1.0).is_err());
    }

    fn support(rho: &ComplexMatrix) -> Vec<Vec<bool>> {
        (0..rho.dim()).map(|r| (0..rho.dim()).map(|c| rho[(r, c)].norm() > 1e-12).collect()).collect()
    }

    #[test]
    fn ghz_output_support_patterns() {
        let ghz = ghz_density(4).unwrap();
        let noise = NoiseParams::new(1.0).unwrap();
        let out = |name: &str| support(&evolve(&ghz, &Partition::preset(name, 4).unwrap(), &noise, 0.7).unwrap());

        // Equal computational-basis parity.
        let cse = out("cse");
        for r in 0..16usize {
            for c in 0..16usize {
                assert_eq!(cse[r][c], r.count_ones() % 2 == c.count_ones() % 2);
            }
        }

        // Per-pair parity of qubits (0,1) and of qubits (2,3) must agree.
        let bse = out("bse");
        let pair_parity = |i: usize| ((i >> 2).count_ones() % 2, (i & 3).count_ones() % 2);
        for r in 0..16 {
            for c in 0..16 {
                assert_eq!(bse[r][c], pair_parity(r) == pair_parity(c));
            }
        }
        // A tripartite split refines the bipartite one and ends up on the same support.
        assert_eq!(out("tse"), bse);
        for r in 0..16 {
            for c in 0..16 {
                assert!(!bse[r][c] || cse[r][c]);
            }
        }

        // Diagonal and anti-diagonal.
        let ise = out("ise");
        for r in 0..16 {
            for c in 0..16 {
                assert_eq!(ise[r][c], r == c || r + c == 15);
            }
        }
    }
}
