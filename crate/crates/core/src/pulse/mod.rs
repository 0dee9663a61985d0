//! Gated squeezed-vacuum pulses through a passive channel, observed with a
//! zero-span analyzer.
//!
//! The measurement chain is linear up to the square-law detector:
//!
//! 1. stationary source field `a(t)` on a periodic time grid,
//! 2. gate as a time-dependent beamsplitter `g(t)a(t) + √(1−g²)·v(t)`,
//! 3. channel `u(δ)` in the frequency domain with vacuum through `√(1−|u|²)`,
//! 4. homodyne current with the (mono- or bichromatic) LO,
//! 5. mixing down by `ε`, Gaussian RBW filter, `|·|²`, single-pole VBW
//!    smoother,
//! 6. division by the same chain fed with vacuum.
//!
//! [`simulate_trace`] evaluates the expectation of step 5 exactly by
//! propagating each output sample's linear functional back to the input
//! modes. [`mc_oracle`] draws Wigner samples of the input and runs the chain
//! forward.

mod det;
mod mc;
mod pipeline;

pub use det::simulate_trace;
pub use mc::{mc_oracle, McTrace};

use crate::error::{invalid, Error, Result};
use crate::measurement::{AnalyzerConfig, ChannelSpec, LoConfig, LoKind};
use crate::spectral::{FrequencyGrid, SqueezingSpectrum};

/// Photon-flux values below this are reported as statistical artifacts.
pub const FLUX_ARTIFACT_LEVEL: f64 = -1e-3;

/// Fraction of the flux peak above which samples enter the delay centroid.
pub const CENTROID_THRESHOLD: f64 = 0.05;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum GateShape {
    Gaussian,
    RaisedCosine,
    Rectangular,
    /// Always open (`g ≡ 1`).
    Open,
    /// Always closed (`g ≡ floor`).
    Closed,
}

impl GateShape {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::RaisedCosine => "raised-cosine",
            Self::Rectangular => "rectangular",
            Self::Open => "open",
            Self::Closed => "closed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "gaussian" => Self::Gaussian,
            "raised-cosine" => Self::RaisedCosine,
            "rectangular" => Self::Rectangular,
            "open" => Self::Open,
            "closed" => Self::Closed,
            _ => return None,
        })
    }
}

/// Amplitude gate applied to the continuous squeezed vacuum.
///
/// `fwhm` is the full width at half maximum of the transmitted *intensity*
/// `g(t)²`, which is what the photon flux of the gated pulse follows.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GateFunction {
    pub shape: GateShape,
    pub fwhm: f64,
    pub center: f64,
    /// Residual amplitude transmission of the closed gate.
    pub floor: f64,
}

impl GateFunction {
    pub fn new(shape: GateShape, fwhm: f64, center: f64, floor: f64) -> Result<Self> {
        if !(fwhm > 0.0 && fwhm.is_finite()) {
            return Err(invalid("fwhm", format!("must be > 0, got {fwhm}")));
        }
        if !center.is_finite() {
            return Err(invalid("center", "must be finite"));
        }
        if !(0.0..1.0).contains(&floor) {
            return Err(invalid("floor", format!("must lie in [0, 1), got {floor}")));
        }
        Ok(Self { shape, fwhm, center, floor })
    }

    /// Open-gate intensity profile, peak 1.
    fn profile(&self, t: f64) -> f64 {
        let x = t - self.center;
        match self.shape {
            GateShape::Gaussian => (-4.0 * std::f64::consts::LN_2 * (x / self.fwhm).powi(2)).exp(),
            GateShape::RaisedCosine => {
                if x.abs() < self.fwhm {
                    0.5 * (1.0 + (std::f64::consts::PI * x / self.fwhm).cos())
                } else {
                    0.0
                }
            }
            GateShape::Rectangular => {
                if x.abs() <= 0.5 * self.fwhm {
                    1.0
                } else {
                    0.0
                }
            }
            GateShape::Open => 1.0,
            GateShape::Closed => 0.0,
        }
    }

    /// Amplitude transmission `g(t) ∈ [0, 1]`.
    pub fn amplitude(&self, t: f64) -> f64 {
        if self.shape == GateShape::Open {
            return 1.0;
        }
        (self.floor + (1.0 - self.floor) * self.profile(t).sqrt()).clamp(0.0, 1.0)
    }
}

/// Periodic sampling grid for the pulse simulation.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TimeGrid {
    n_samples: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(n_samples: usize, dt: f64) -> Result<Self> {
        if n_samples < 4 || !n_samples.is_power_of_two() {
            return Err(invalid("n_samples", format!("must be a power of two >= 4, got {n_samples}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("must be > 0, got {dt}")));
        }
        Ok(Self { n_samples, dt })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn span(&self) -> f64 {
        self.n_samples as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|j| j as f64 * self.dt).collect()
    }

    /// Detuning grid conjugate to this time grid.
    pub fn frequency_grid(&self) -> FrequencyGrid {
        FrequencyGrid::new(self.n_samples, 1.0 / self.span()).expect("validated time grid")
    }

    /// Sampling margin for the LO mixing, and `ε` on a bin of the periodic
    /// grid so the LO and the down-mixing phasor wrap without a jump.
    pub fn check_sampling(&self, epsilon: f64, rbw: f64) -> Result<()> {
        let cycles = epsilon * self.span();
        if (cycles - cycles.round()).abs() > 1e-6 * cycles.max(1.0) {
            return Err(invalid(
                "epsilon",
                format!("{epsilon} Hz is not a multiple of the grid spacing {} Hz", 1.0 / self.span()),
            ));
        }
        let rate = 1.0 / self.dt;
        let required = 4.0 * (epsilon + rbw);
        if rate > required {
            Ok(())
        } else {
            Err(Error::Nyquist { sample_rate: rate, required })
        }
    }
}

/// Everything that defines one pulse measurement.
#[derive(Clone, Debug)]
pub struct PulseSetup {
    pub source: SqueezingSpectrum,
    pub gate: GateFunction,
    pub channel: ChannelSpec,
    pub lo_kind: LoKind,
    pub epsilon: f64,
    pub analyzer: AnalyzerConfig,
    pub grid: TimeGrid,
}

impl PulseSetup {
    /// Validates the sampling condition and re-expresses `source` on the
    /// grid conjugate to `grid`. The LO phase in `lo` is ignored: traces are
    /// always produced for `θ = 0` and `θ = π/2`.
    pub fn new(
        source: &SqueezingSpectrum,
        gate: GateFunction,
        channel: ChannelSpec,
        lo: LoConfig,
        analyzer: AnalyzerConfig,
        grid: TimeGrid,
    ) -> Result<Self> {
        grid.check_sampling(lo.epsilon, analyzer.rbw)?;
        let source = source.resample(grid.frequency_grid())?;
        for p in source.pairs() {
            if !p.is_physical() {
                return Err(crate::spectral::non_physical(p));
            }
        }
        Ok(Self { source, gate, channel, lo_kind: lo.kind, epsilon: lo.epsilon, analyzer, grid })
    }
}

/// Shot-normalized quadrature variances versus time.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTrace {
    pub times: Vec<f64>,
    pub v0: Vec<f64>,
    pub v90: Vec<f64>,
    pub flux: Vec<f64>,
}

impl NoiseTrace {
    pub fn new(times: Vec<f64>, v0: Vec<f64>, v90: Vec<f64>) -> Result<Self> {
        let mut trace = Self { times, v0, v90, flux: Vec::new() };
        trace.flux = photon_flux(&trace)?;
        Ok(trace)
    }
}

/// Excess photon flux `(V₀ + V₉₀)/2 − 1`, arbitrary units.
pub fn photon_flux(trace: &NoiseTrace) -> Result<Vec<f64>> {
    if trace.v0.len() != trace.v90.len() {
        return Err(Error::LengthMismatch(trace.v0.len(), trace.v90.len()));
    }
    if trace.times.len() != trace.v0.len() {
        return Err(Error::LengthMismatch(trace.times.len(), trace.v0.len()));
    }
    Ok(trace.v0.iter().zip(&trace.v90).map(|(a, b)| 0.5 * (a + b) - 1.0).collect())
}

/// Indices whose flux falls below [`FLUX_ARTIFACT_LEVEL`].
pub fn flux_artifacts(flux: &[f64]) -> Vec<usize> {
    flux.iter().enumerate().filter(|(_, &f)| f < FLUX_ARTIFACT_LEVEL).map(|(i, _)| i).collect()
}

fn flux_centroid(times: &[f64], flux: &[f64]) -> Result<f64> {
    let peak = flux.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::UndefinedDelay("no positive excess flux".into()));
    }
    let cut = CENTROID_THRESHOLD * peak;
    let (mut w, mut wt) = (0.0, 0.0);
    for (&t, &f) in times.iter().zip(flux) {
        if f > cut {
            w += f;
            wt += f * t;
        }
    }
    if !(w > 0.0) {
        return Err(Error::UndefinedDelay("no positive excess flux".into()));
    }
    Ok(wt / w)
}

/// Delay of `trace` relative to `reference`: difference of the excess-flux
/// centroids taken over samples above 5% of each trace's peak.
pub fn extract_delay(trace: &NoiseTrace, reference: &NoiseTrace) -> Result<f64> {
    if trace.times.len() != reference.times.len() {
        return Err(Error::LengthMismatch(trace.times.len(), reference.times.len()));
    }
    if trace.times.iter().zip(&reference.times).any(|(a, b)| a != b) {
        return Err(invalid("times", "traces are on different time grids"));
    }
    Ok(flux_centroid(&trace.times, &trace.flux)? - flux_centroid(&reference.times, &reference.flux)?)
}

/// Full width at half maximum of a single-peaked series, with linear
/// interpolation at the crossings.
pub fn flux_fwhm(times: &[f64], flux: &[f64]) -> Result<f64> {
    if times.len() != flux.len() {
        return Err(Error::LengthMismatch(times.len(), flux.len()));
    }
    let (imax, &peak) = flux
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| invalid("flux", "empty series"))?;
    if !(peak > 0.0) {
        return Err(invalid("flux", "no positive peak"));
    }
    let half = 0.5 * peak;
    let cross = |i: usize, j: usize| {
        let (f0, f1) = (flux[i], flux[j]);
        times[i] + (half - f0) / (f1 - f0) * (times[j] - times[i])
    };
    let left = (1..=imax).rev().find(|&i| flux[i - 1] < half).map(|i| cross(i - 1, i));
    let right = (imax..flux.len() - 1).find(|&i| flux[i + 1] < half).map(|i| cross(i, i + 1));
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(invalid("flux", "peak does not fall to half maximum inside the window")),
    }
}
