//! Entanglement witness, purity, entropy and saturation detection.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{trace_of_product, ComplexMatrix, DensityMatrix, NEGATIVE_CLAMP};

/// Default relative band for [`saturation`].
pub const DEFAULT_SATURATION_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyBase {
    #[default]
    Natural,
    Two,
}

impl EntropyBase {
    /// Column label used in CSV output.
    pub fn column_name(self) -> &'static str {
        match self {
            EntropyBase::Natural => "entropy_nats",
            EntropyBase::Two => "entropy_bits",
        }
    }
}

/// `-Tr[(I/2 - ρ₀) ρ]`, i.e. `Tr[ρ₀ ρ] - 1/2` for unit-trace `ρ`.
///
/// Positive values flag GHZ-type entanglement under this sign convention.
pub fn entanglement_witness(rho: &ComplexMatrix, rho0: &ComplexMatrix) -> Result<f64> {
    let overlap = trace_of_product(rho0, rho)?;
    Ok(overlap.re - 0.5 * rho.trace().re)
}

/// `Tr[ρ²]`.
pub fn purity(rho: &ComplexMatrix) -> f64 {
    // Σ|ρ_ij|² equals Tr[ρ²] for Hermitian ρ.
    rho.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// `-Σ λ log λ` over the spectrum of `rho`, with `0 log 0 = 0`.
pub fn shannon_entropy(rho: &DensityMatrix, base: EntropyBase) -> Result<f64> {
    let spectrum = rho.eigenvalues()?;
    let nats = entropy_of_spectrum(&spectrum)?;
    Ok(match base {
        EntropyBase::Natural => nats,
        EntropyBase::Two => nats / std::f64::consts::LN_2,
    })
}

/// Entropy in nats of a probability spectrum; tiny negative rounding is
/// clamped to zero.
pub fn entropy_of_spectrum(spectrum: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for &v in spectrum {
        if v < -NEGATIVE_CLAMP {
            return Err(Error::NegativeEigenvalue(v));
        }
        if v > 0.0 {
            h -= v * v.ln();
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Witness,
    Purity,
    Entropy,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Witness, Measure::Purity, Measure::Entropy];
}

/// Measures sampled along a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSeries {
    pub times: Vec<f64>,
    pub ew: Vec<f64>,
    pub purity: Vec<f64>,
    pub entropy: Vec<f64>,
    pub base: EntropyBase,
}

impl MeasureSeries {
    pub fn empty(base: EntropyBase) -> Self {
        Self { times: Vec::new(), ew: Vec::new(), purity: Vec::new(), entropy: Vec::new(), base }
    }

    pub fn from_states(
        times: &[f64],
        states: &[DensityMatrix],
        rho0: &DensityMatrix,
        base: EntropyBase,
    ) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch { left: times.len(), right: states.len() });
        }
        let mut series = Self::empty(base);
        for (&t, rho) in times.iter().zip(states) {
            series.push(t, measure_all(rho, rho0, base)?);
        }
        Ok(series)
    }

    pub fn push(&mut self, t: f64, (ew, p, h): (f64, f64, f64)) {
        self.times.push(t);
        self.ew.push(ew);
        self.purity.push(p);
        self.entropy.push(h);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, measure: Measure) -> &[f64] {
        match measure {
            Measure::Witness => &self.ew,
            Measure::Purity => &self.purity,
            Measure::Entropy => &self.entropy,
        }
    }
}

/// `(EW, P, H)` for one state.
pub fn measure_all(rho: &DensityMatrix, rho0: &DensityMatrix, base: EntropyBase) -> Result<(f64, f64, f64)> {
    Ok((entanglement_witness(rho, rho0)?, purity(rho), shannon_entropy(rho, base)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SaturationTime {
    At(f64),
    /// The band was never entered on the grid.
    BeyondGrid,
}

impl SaturationTime {
    pub fn value(self) -> Option<f64> {
        match self {
            SaturationTime::At(t) => Some(t),
            SaturationTime::BeyondGrid => None,
        }
    }
}

impl fmt::Display for SaturationTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SaturationTime::At(t) => write!(f, "{t}"),
            SaturationTime::BeyondGrid => f.write_str("beyond grid"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationReport {
    pub level: f64,
    pub saturation_time: SaturationTime,
    pub rel_threshold: f64,
}

/// First grid time with `|m(t) - asymptote| <= rel_threshold * |m(0) - asymptote|`.
pub fn saturation(times: &[f64], values: &[f64], asymptote: f64, rel_threshold: f64) -> Result<SaturationReport> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { left: times.len(), right: values.len() });
    }
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, 1), got {rel_threshold}")));
    }
    let band = rel_threshold * (values[0] - asymptote).abs();
    let saturation_time = times
        .iter()
        .zip(values)
        .find(|(_, v)| (*v - asymptote).abs() <= band)
        .map_or(SaturationTime::BeyondGrid, |(t, _)| SaturationTime::At(*t));
    Ok(SaturationReport { level: asymptote, saturation_time, rel_threshold })
}
