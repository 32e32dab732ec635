//! Noise parameters, qubit→environment partitions, the OU phase variance and
//! initial states.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis index.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix};

pub const MIN_QUBITS: usize = 2;
pub const MAX_QUBITS: usize = 12;

/// Parameters of the classical Ornstein-Uhlenbeck field driving each qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Inverse autocorrelation time.
    pub g: f64,
    /// System-environment coupling.
    pub lambda: f64,
    /// Qubit energy. Only contributes a global phase.
    pub epsilon: f64,
}

impl NoiseParams {
    pub fn new(g: f64) -> Result<Self> {
        Self::with_coupling(g, 1.0, 0.0)
    }

    pub fn with_coupling(g: f64, lambda: f64, epsilon: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter(format!("g must be positive and finite, got {g}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
        }
        if !epsilon.is_finite() {
            return Err(Error::InvalidParameter("epsilon must be finite".into()));
        }
        Ok(Self { g, lambda, epsilon })
    }
}

/// Accumulated phase variance `β(t) = (g t + e^{-g t} - 1) / g` of an OU field
/// with autocorrelation `(g/2) e^{-g|τ|}`.
pub fn beta(noise: &NoiseParams, t: f64) -> Result<f64> {
    beta_for_rate(noise.g, t)
}

pub(crate) fn beta_for_rate(g: f64, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be nonnegative and finite, got {t}")));
    }
    let x = g * t;
    Ok(phase_excess(x) / g)
}

/// `x + e^{-x} - 1`, summed as a Taylor series where direct evaluation would
/// cancel.
fn phase_excess(x: f64) -> f64 {
    if x >= 0.5 {
        return x + (-x).exp() - 1.0;
    }
    // Σ_{k≥2} (-x)^k / k!
    let mut term = x * x / 2.0;
    let mut sum: f64 = 0.0;
    let mut k = 2.0;
    while term.abs() > f64::EPSILON * 1e-3 * sum.abs() && term != 0.0 {
        sum += term;
        k += 1.0;
        term *= -x / k;
    }
    sum
}

/// Assignment of each qubit to a noise environment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignments: Vec<usize>,
    n_envs: usize,
}

impl Partition {
    /// Environment ids must cover `0..n_envs` with no gaps.
    pub fn new(assignments: Vec<usize>) -> Result<Self> {
        if assignments.is_empty() {
            return Err(Error::InvalidPartition("no qubits".into()));
        }
        if assignments.len() > MAX_QUBITS {
            return Err(Error::InvalidPartition(format!(
                "{} qubits exceeds the maximum of {MAX_QUBITS}",
                assignments.len()
            )));
        }
        let n_envs = assignments.iter().max().map_or(0, |m| m + 1);
        let mut used = vec![false; n_envs];
        for &a in &assignments {
            used[a] = true;
        }
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(Error::InvalidPartition(format!(
                "environment ids must be contiguous from 0; id {missing} is unused"
            )));
        }
        Ok(Self { assignments, n_envs })
    }

    /// All qubits share one environment.
    pub fn common(n_qubits: usize) -> Result<Self> {
        Self::new(vec![0; n_qubits])
    }

    /// First half of the register on environment 0, second half on 1.
    pub fn bipartite(n_qubits: usize) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::InvalidPartition("bipartite needs at least two qubits".into()));
        }
        let half = n_qubits / 2;
        Self::new((0..n_qubits).map(|q| usize::from(q >= half)).collect())
    }

    /// `[0, 1, 2, 2]`; defined for four qubits only.
    pub fn tripartite(n_qubits: usize) -> Result<Self> {
        if n_qubits != 4 {
            return Err(Error::InvalidPartition("the tripartite preset is defined for four qubits".into()));
        }
        Self::new(vec![0, 1, 2, 2])
    }

    /// Every qubit has its own environment.
    pub fn independent(n_qubits: usize) -> Result<Self> {
        Self::new((0..n_qubits).collect())
    }

    /// Looks up `cse`, `bse`, `tse` or `ise` (case-insensitive).
    pub fn preset(name: &str, n_qubits: usize) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "cse" => Self::common(n_qubits),
            "bse" => Self::bipartite(n_qubits),
            "tse" => Self::tripartite(n_qubits),
            "ise" => Self::independent(n_qubits),
            _ => Err(Error::UnknownPreset(name.to_owned())),
        }
    }

    /// Parses a preset name or a comma-separated assignment such as `0,0,1,1`.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let text = text.trim();
        if !text.contains(',') && text.parse::<usize>().is_err() {
            return Self::preset(text, n_qubits);
        }
        let assignments = text
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("bad environment id `{}`", tok.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        if assignments.len() != n_qubits {
            return Err(Error::InvalidPartition(format!(
                "assignment lists {} qubits, expected {n_qubits}",
                assignments.len()
            )));
        }
        Self::new(assignments)
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn n_qubits(&self) -> usize {
        self.assignments.len()
    }

    pub fn n_envs(&self) -> usize {
        self.n_envs
    }

    pub fn env_of(&self, qubit: usize) -> usize {
        self.assignments[qubit]
    }

    /// Number of qubits attached to `env`.
    pub fn env_size(&self, env: usize) -> usize {
        self.assignments.iter().filter(|&&a| a == env).count()
    }

    /// Collective σx eigenvalue of `env` on X-basis state `basis_index`.
    pub fn collective_eigenvalue(&self, env: usize, basis_index: usize) -> Result<i32> {
        if env >= self.n_envs {
            return Err(Error::OutOfRange(format!("environment {env} of {}", self.n_envs)));
        }
        let n = self.n_qubits();
        if basis_index >> n != 0 {
            return Err(Error::OutOfRange(format!("basis index {basis_index} for {n} qubits")));
        }
        Ok(self.collective_eigenvalue_unchecked(env, basis_index))
    }

    fn collective_eigenvalue_unchecked(&self, env: usize, b: usize) -> i32 {
        let n = self.n_qubits();
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a == env)
            .map(|(q, _)| if (b >> (n - 1 - q)) & 1 == 0 { 1 } else { -1 })
            .sum()
    }

    /// Table `s[b][e]` of collective eigenvalues for every basis state.
    pub fn collective_spectrum(&self) -> Vec<Vec<i32>> {
        (0..1usize << self.n_qubits())
            .map(|b| (0..self.n_envs).map(|e| self.collective_eigenvalue_unchecked(e, b)).collect())
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.assignments.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// GHZ mixture `(1-p) I/d + p |GHZ⟩⟨GHZ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub n_qubits: usize,
    pub p: f64,
}

impl InitialState {
    pub fn ghz(n_qubits: usize) -> Self {
        Self { n_qubits, p: 1.0 }
    }
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if !(MIN_QUBITS..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::InvalidParameter(format!(
            "qubit count must be in {MIN_QUBITS}..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(())
}

/// Projector onto `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_density(n_qubits: usize) -> Result<DensityMatrix> {
    check_qubits(n_qubits)?;
    let mut m = ComplexMatrix::for_qubits(n_qubits)?;
    let last = m.dim() - 1;
    let half = Complex64::new(0.5, 0.0);
    for (r, c) in [(0, 0), (0, last), (last, 0), (last, last)] {
        m[(r, c)] = half;
    }
    DensityMatrix::new(m)
}

pub fn initial_density(state: &InitialState) -> Result<DensityMatrix> {
    let p = state.p;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    let ghz = ghz_density(state.n_qubits)?;
    let d = ghz.dim();
    let mixed = Complex64::new((1.0 - p) / d as f64, 0.0);
    let mut m = ghz.into_matrix().scale(Complex64::new(p, 0.0));
    for i in 0..d {
        m[(i, i)] += mixed;
    }
    DensityMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_distance, matmul};

    fn b(g: f64, t: f64) -> f64 {
        beta(&NoiseParams::new(g).unwrap(), t).unwrap()
    }

    #[test]
    fn beta_reference_values() {
        // -9880 + 10000/e^{3/250} and -80 + 200/e^{3/5}
        assert!((b(1e-4, 120.0) - 0.717_128_619_3).abs() < 1e-9);
        assert!((b(5e-3, 120.0) - 29.762_327_218_8).abs() < 1e-9);
        assert!((b(1e-2, 10.0) - (100.0 / 0.1f64.exp() - 90.0)).abs() < 1e-12);
        assert!((b(1e-1, 10.0) - 10.0 / std::f64::consts::E).abs() < 1e-12);
        assert!((b(10.0, 10.0) - (9.9 + (-100.0f64).exp() / 10.0)).abs() < 1e-12);
        assert_eq!(b(3.0, 0.0), 0.0);
    }

    #[test]
    fn beta_matches_trapezoid_quadrature() {
        // 2-D trapezoid rule on a 2000×2000 grid over [0,2]², K = (1/2) e^{-|s-s'|}.
        let (g, t, n) = (1.0, 2.0, 2000usize);
        let h = t / n as f64;
        let w = |i: usize| if i == 0 || i == n { 0.5 * h } else { h };
        let kernel: Vec<f64> = (0..=n).map(|k| 0.5 * g * (-g * k as f64 * h).exp()).collect();
        let mut total = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                total += w(i) * w(j) * kernel[i.abs_diff(j)];
            }
        }
        assert!((total - 1.135_335_283_2).abs() < 1e-6);
        assert!((b(g, t) - total).abs() < 1e-6);
    }

    #[test]
    fn beta_small_argument_is_smooth() {
        // Compare against the leading series terms where they are exact to ~x^4.
        for &x in &[1e-9, 1e-7, 1e-6, 2e-6, 1e-4] {
            let g = 1.0;
            let series = x * x / 2.0 - x * x * x / 6.0;
            assert!((b(g, x) - series).abs() <= 1e-15 * series + x.powi(4) / 24.0 + 1e-300);
        }
    }

    #[test]
    fn beta_monotone_on_grid() {
        let gs: Vec<f64> = (0..20).map(|i| 10f64.powf(-3.0 + 0.25 * i as f64)).collect();
        let ts: Vec<f64> = (0..20).map(|i| 0.01 + 0.6 * i as f64).collect();
        for &g in &gs {
            for w in ts.windows(2) {
                assert!(b(g, w[1]) >= b(g, w[0]));
            }
        }
        for &t in &ts {
            for w in gs.windows(2) {
                assert!(b(w[1], t) >= b(w[0], t));
            }
        }
    }

    #[test]
    fn beta_linear_asymptote() {
        for &(g, t) in &[(1.0, 20.0), (10.0, 2.5), (0.5, 60.0), (2.0, 100.0)] {
            let lhs = (b(g, t) - (t - 1.0 / g)).abs();
            assert!(lhs <= (-g * t).exp() / g + 1e-12);
        }
    }

    #[test]
    fn beta_rejects_negative_time() {
        let noise = NoiseParams::new(1.0).unwrap();
        assert!(beta(&noise, -1.0).is_err());
        assert!(NoiseParams::new(0.0).is_err());
        assert!(NoiseParams::with_coupling(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn presets_for_four_qubits() {
        let names = [("cse", vec![0, 0, 0, 0]), ("bse", vec![0, 0, 1, 1]), ("tse", vec![0, 1, 2, 2]), ("ise", vec![0, 1, 2, 3])];
        for (name, expect) in names {
            assert_eq!(Partition::preset(name, 4).unwrap().assignments(), expect.as_slice());
        }
        assert_eq!(Partition::parse("0,1,2,2", 4).unwrap(), Partition::tripartite(4).unwrap());
        assert_eq!(Partition::parse("BSE", 4).unwrap().n_envs(), 2);
        assert!(matches!(Partition::preset("xyz", 4), Err(Error::UnknownPreset(_))));
        assert!(Partition::new(vec![0, 2, 2, 0]).is_err());
        assert!(Partition::parse("0,0,1", 4).is_err());
        assert!(Partition::parse("0,a,1,1", 4).is_err());
    }

    #[test]
    fn collective_eigenvalues() {
        let cse = Partition::common(4).unwrap();
        assert_eq!(cse.collective_eigenvalue(0, 0).unwrap(), 4);
        assert_eq!(cse.collective_eigenvalue(0, 15).unwrap(), -4);
        let bse = Partition::bipartite(4).unwrap();
        assert_eq!(bse.collective_eigenvalue(0, 0b0111).unwrap(), 0);
        assert_eq!(bse.collective_eigenvalue(1, 0b0111).unwrap(), -2);
        assert!(bse.collective_eigenvalue(2, 0).is_err());
        assert!(bse.collective_eigenvalue(0, 16).is_err());
    }

    #[test]
    fn collective_eigenvalue_parity() {
        for p in [Partition::common(4), Partition::bipartite(4), Partition::tripartite(4), Partition::independent(4)] {
            let p = p.unwrap();
            for b in 0..16 {
                for e in 0..p.n_envs() {
                    let s = p.collective_eigenvalue(e, b).unwrap();
                    let size = p.env_size(e) as i32;
                    assert!(s.abs() <= size);
                    assert_eq!((s - size).rem_euclid(2), 0);
                }
            }
        }
    }

    #[test]
    fn ghz_corners() {
        let rho = ghz_density(4).unwrap();
        assert_eq!(rho.dim(), 16);
        let nonzero: Vec<_> = (0..16)
            .flat_map(|r| (0..16).map(move |c| (r, c)))
            .filter(|&(r, c)| rho[(r, c)].norm() != 0.0)
            .collect();
        assert_eq!(nonzero, vec![(0, 0), (0, 15), (15, 0), (15, 15)]);
        assert!(nonzero.iter().all(|&rc| rho[rc] == Complex64::new(0.5, 0.0)));
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        let sq = matmul(&rho, &rho).unwrap();
        assert!(frobenius_distance(&sq, &rho).unwrap() < 1e-15);
        assert!(ghz_density(1).is_err() && ghz_density(13).is_err());
    }

    #[test]
    fn initial_density_mixtures() {
        let pure = initial_density(&InitialState::ghz(4)).unwrap();
        assert_eq!(pure, ghz_density(4).unwrap());
        let mixed = initial_density(&InitialState { n_qubits: 4, p: 0.0 }).unwrap();
        assert_eq!(mixed, DensityMatrix::maximally_mixed(4).unwrap());

        let half = initial_density(&InitialState { n_qubits: 4, p: 0.5 }).unwrap();
        assert!((half[(0, 0)].re - (1.0 / 32.0 + 0.25)).abs() < 1e-15);
        assert!((half[(15, 15)].re - (1.0 / 32.0 + 0.25)).abs() < 1e-15);
        assert!((half[(0, 15)].re - 0.25).abs() < 1e-15);
        assert!((half[(3, 3)].re - 1.0 / 32.0).abs() < 1e-15);

        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let rho = initial_density(&InitialState { n_qubits: 4, p }).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-14);
            assert!(rho.eigenvalues().unwrap().iter().all(|&v| v >= -1e-12));
        }
        assert!(initial_density(&InitialState { n_qubits: 4, p: 1.5 }).is_err());
    }
}
