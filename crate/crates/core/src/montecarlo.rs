//! Stochastic trajectory oracle for the averaged channel.
//!
//! Each sample draws one noise phase per environment, builds the product of
//! single-qubit rotations `exp(-i λ φ σx)` in the computational basis and
//! conjugates the initial state with it. Nothing here goes through the
//! Hadamard-basis decay used by [`crate::channel`].
//!
//! Sample `i` draws from ChaCha12 seeded with the user seed on stream `i`, and
//! samples are accumulated in fixed blocks that are combined by a pairwise
//! tree in block order. The estimate is therefore bit-identical for a given
//! seed regardless of how many worker threads run.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{kron, matmul, ComplexMatrix, DensityMatrix};
use crate::model::{beta, NoiseParams, Partition};

const BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Phase drawn directly from `Normal(0, β(t))`.
    #[default]
    DirectPhase,
    /// Phase integrated along a simulated OU path.
    OuPath,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub samples: usize,
    pub seed: u64,
    /// Path time step; only used by [`Scheme::OuPath`].
    pub dt: f64,
    pub scheme: Scheme,
}

impl TrajectoryConfig {
    pub fn new(samples: usize, seed: u64, dt: f64, scheme: Scheme) -> Result<Self> {
        let cfg = Self { samples, seed, dt, scheme };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn direct(samples: usize, seed: u64) -> Result<Self> {
        Self::new(samples, seed, 1e-3, Scheme::DirectPhase)
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("at least one sample is required".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Independent generator for sample `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `φ ~ Normal(0, beta_value)`.
pub fn sample_phase_direct<R: Rng + ?Sized>(rng: &mut R, beta_value: f64) -> Result<f64> {
    if !(beta_value >= 0.0 && beta_value.is_finite()) {
        return Err(Error::InvalidParameter(format!("phase variance must be nonnegative, got {beta_value}")));
    }
    if beta_value == 0.0 {
        return Ok(0.0);
    }
    let normal = Normal::new(0.0, beta_value.sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(normal.sample(rng))
}

/// Integrated phase `∫₀ᵗ Δ(s) ds` of a stationary OU field with variance `g/2`.
///
/// The field is advanced with the exact AR(1) update
/// `Δ ← αΔ + √((g/2)(1-α²)) η`, `α = e^{-g h}`, starting from the stationary
/// law, and integrated with the trapezoid rule. The step `h` is the largest
/// value not above `dt` that divides `t` evenly.
pub fn ou_path_phase<R: Rng + ?Sized>(rng: &mut R, noise: &NoiseParams, t: f64, dt: f64) -> Result<f64> {
    let stationary_sd = (noise.g / 2.0).sqrt();
    let delta0 = stationary_sd * rng.sample::<f64, _>(StandardNormal);
    integrate_ou_path(noise.g, t, dt, delta0, || rng.sample(StandardNormal))
}

fn integrate_ou_path(g: f64, t: f64, dt: f64, delta0: f64, mut eta: impl FnMut() -> f64) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("path length must be positive, got {t}")));
    }
    if dt > t {
        return Err(Error::InvalidParameter(format!("dt {dt} exceeds path length {t}")));
    }
    let steps = ((t / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let alpha = (-g * h).exp();
    let kick = ((g / 2.0) * -(-2.0 * g * h).exp_m1()).sqrt();

    let mut delta = delta0;
    let mut acc = 0.5 * delta;
    for k in 1..=steps {
        delta = alpha * delta + kick * eta();
        acc += if k == steps { 0.5 * delta } else { delta };
    }
    Ok(acc * h)
}

/// `⊗_q exp(-i λ φ_{env(q)} σx)`.
pub fn unitary_for_phases(phases: &[f64], partition: &Partition, lambda: f64, n_qubits: usize) -> Result<ComplexMatrix> {
    if phases.len() != partition.n_envs() {
        return Err(Error::InvalidParameter(format!(
            "{} phases for {} environments",
            phases.len(),
            partition.n_envs()
        )));
    }
    if partition.n_qubits() != n_qubits {
        return Err(Error::DimensionMismatch { left: n_qubits, right: partition.n_qubits() });
    }
    let rotation = |phi: f64| {
        let (s, c) = (lambda * phi).sin_cos();
        let diag = Complex64::new(c, 0.0);
        let off = Complex64::new(0.0, -s);
        ComplexMatrix::from_row_major(vec![diag, off, off, diag])
    };
    let mut u = rotation(phases[partition.env_of(0)])?;
    for q in 1..n_qubits {
        u = kron(&u, &rotation(phases[partition.env_of(q)])?)?;
    }
    Ok(u)
}

/// Monte Carlo estimate of the averaged state.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub state: DensityMatrix,
    /// Frobenius norm of the element-wise sample standard deviation over `√M`.
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Clone)]
struct Accumulator {
    sum: Vec<Complex64>,
    sum_sq: Vec<f64>,
}

impl Accumulator {
    fn zeros(len: usize) -> Self {
        Self { sum: vec![Complex64::new(0.0, 0.0); len], sum_sq: vec![0.0; len] }
    }

    fn add_sample(&mut self, m: &ComplexMatrix) {
        for ((s, q), z) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(m.as_slice()) {
            *s += z;
            *q += z.norm_sqr();
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self
    }
}

/// Combines accumulators pairwise in index order: `((0,1),(2,3)),…`.
fn tree_reduce(mut level: Vec<Accumulator>) -> Accumulator {
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(&b),
                None => a,
            });
        }
        level = next;
    }
    level.pop().expect("at least one block")
}

/// Averages `U ρ₀ U†` over `config.samples` noise realizations.
pub fn mc_evolve(
    rho0: &DensityMatrix,
    partition: &Partition,
    noise: &NoiseParams,
    t: f64,
    config: &TrajectoryConfig,
) -> Result<McEstimate> {
    config.validate()?;
    let n_qubits = partition.n_qubits();
    if rho0.dim() != 1usize << n_qubits {
        return Err(Error::DimensionMismatch { left: rho0.dim(), right: 1usize << n_qubits });
    }
    let variance = beta(noise, t)?;
    let n_envs = partition.n_envs();
    // Qubit energies only contribute this overall phase.
    let global = Complex64::from_polar(1.0, -(n_qubits as f64) * noise.epsilon * t);

    let run_sample = |index: usize, phases: &mut Vec<f64>| -> Result<ComplexMatrix> {
        let mut rng = substream(config.seed, index as u64);
        phases.clear();
        for _ in 0..n_envs {
            let phi = match config.scheme {
                Scheme::DirectPhase => sample_phase_direct(&mut rng, variance)?,
                Scheme::OuPath if t == 0.0 => 0.0,
                Scheme::OuPath => ou_path_phase(&mut rng, noise, t, config.dt.min(t))?,
            };
            phases.push(phi);
        }
        let mut u = unitary_for_phases(phases, partition, noise.lambda, n_qubits)?;
        if global != Complex64::new(1.0, 0.0) {
            u = u.scale(global);
        }
        matmul(&matmul(&u, rho0)?, &u.adjoint())
    };

    let len = rho0.dim() * rho0.dim();
    let n_blocks = config.samples.div_ceil(BLOCK);
    let blocks = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut acc = Accumulator::zeros(len);
            let mut phases = Vec::with_capacity(n_envs);
            let end = ((block + 1) * BLOCK).min(config.samples);
            for index in block * BLOCK..end {
                acc.add_sample(&run_sample(index, &mut phases)?);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = tree_reduce(blocks);

    let m = config.samples as f64;
    let mean: Vec<Complex64> = total.sum.iter().map(|s| s / m).collect();
    let var_sum: f64 = if config.samples > 1 {
        total
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(q, mu)| ((q - m * mu.norm_sqr()) / (m - 1.0)).max(0.0))
            .sum()
    } else {
        0.0
    };
    let state = DensityMatrix::new(ComplexMatrix::from_row_major(mean)?)?;
    Ok(McEstimate { state, std_error: (var_sum / m).sqrt(), samples: config.samples })
}

/// Integrated OU phases for `paths` independent paths (path `i` on stream `i`).
pub fn ou_phase_samples(noise: &NoiseParams, t: f64, dt: f64, paths: usize, seed: u64) -> Result<Vec<f64>> {
    (0..paths)
        .into_par_iter()
        .map(|i| ou_path_phase(&mut substream(seed, i as u64), noise, t, dt))
        .collect()
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}
