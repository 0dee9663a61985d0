//! Passive channels and the homodyne / spectrum-analyzer measurement.
//!
//! A monochromatic LO at the carrier, read out at analyzer frequency `f`,
//! sees the pair `ν₀ ± f`. A bichromatic LO with tones at `ν₀ ± ε` read out
//! at `f` sees two pairs, `±(f − ε)` and `±(f + ε)`, each with weight ½. At
//! `f = ε` the inner pair collapses onto the carrier mode.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::eit::EitParams;
use crate::error::{invalid, Error, Result};
use crate::spectral::{
    degenerate_noise, non_physical, pair_noise, DegenerateCovariance, FrequencyGrid, NoiseResult,
    PairCovariance, SqueezingSpectrum,
};

/// Amplitude transmission `t(δ)` of a passive channel, `δ` in Hz.
#[derive(Clone)]
pub enum TransferFunction {
    Unity,
    Constant(C64),
    Eit(EitParams),
    Custom(Arc<dyn Fn(f64) -> C64 + Send + Sync>),
}

impl TransferFunction {
    pub fn custom(f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, delta: f64) -> C64 {
        match self {
            Self::Unity => C64::new(1.0, 0.0),
            Self::Constant(t) => *t,
            Self::Eit(p) => p.exponent(TAU * delta - p.delta_c).exp(),
            Self::Custom(f) => f(delta),
        }
    }
}

impl fmt::Debug for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unity => write!(f, "Unity"),
            Self::Constant(t) => write!(f, "Constant({t})"),
            Self::Eit(p) => write!(f, "Eit({p:?})"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A frequency-dependent transfer followed by a flat path efficiency.
#[derive(Clone, Debug)]
pub struct ChannelSpec {
    pub transfer: TransferFunction,
    pub eta_path: f64,
}

impl ChannelSpec {
    pub fn new(transfer: TransferFunction, eta_path: f64) -> Result<Self> {
        if !(eta_path > 0.0 && eta_path <= 1.0) {
            return Err(invalid("eta_path", format!("must lie in (0, 1], got {eta_path}")));
        }
        Ok(Self { transfer, eta_path })
    }

    pub fn identity() -> Self {
        Self { transfer: TransferFunction::Unity, eta_path: 1.0 }
    }

    /// `u(δ) = √η·t(δ)`, checked for passivity.
    pub fn amplitude(&self, delta: f64) -> Result<C64> {
        let t = self.transfer.eval(delta);
        let mag = t.norm();
        if !(mag <= 1.0 + 1e-12) {
            return Err(Error::NonPassive { delta, magnitude: mag });
        }
        Ok(t * self.eta_path.sqrt())
    }

    /// Send the pair at `±delta` through the channel.
    pub fn transform_pair(&self, pair: &PairCovariance, delta: f64) -> Result<PairCovariance> {
        let up = self.amplitude(delta)?;
        let um = self.amplitude(-delta)?;
        Ok(PairCovariance::new(up.norm_sqr() * pair.n_plus, um.norm_sqr() * pair.n_minus, up * um * pair.m))
    }
}

/// Beamsplitter model of a passive channel: every amplitude is scaled by
/// `u(δ)` and vacuum enters through the complementary port.
pub fn apply_channel(spec: &SqueezingSpectrum, ch: &ChannelSpec) -> Result<SqueezingSpectrum> {
    let grid = *spec.grid();
    let pairs = spec
        .pairs()
        .iter()
        .zip(grid.nonnegative())
        .map(|(p, d)| {
            let q = ch.transform_pair(p, d)?;
            if q.is_physical() {
                Ok(q)
            } else {
                Err(non_physical(&q))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let u0 = ch.amplitude(0.0)?;
    let c = spec.carrier();
    let carrier = DegenerateCovariance::new(u0.norm_sqr() * c.n0, u0 * u0 * c.m0);
    Ok(SqueezingSpectrum::from_raw(grid, pairs, carrier))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LoKind {
    Monochromatic,
    Bichromatic,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LoConfig {
    pub kind: LoKind,
    /// LO tone offset and analyzer center frequency, Hz.
    pub epsilon: f64,
    /// Relative phase between LO and squeezed vacuum, rad.
    pub theta: f64,
}

impl LoConfig {
    pub fn new(kind: LoKind, epsilon: f64, theta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be > 0, got {epsilon}")));
        }
        if !theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        Ok(Self { kind, epsilon, theta })
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }
}

/// Zero-span spectrum analyzer settings.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct AnalyzerConfig {
    pub rbw: f64,
    pub vbw: f64,
}

impl AnalyzerConfig {
    pub fn new(rbw: f64, vbw: f64) -> Result<Self> {
        if !(rbw > 0.0 && rbw.is_finite()) {
            return Err(invalid("rbw", format!("must be > 0, got {rbw}")));
        }
        if !(vbw > 0.0 && vbw.is_finite()) {
            return Err(invalid("vbw", format!("must be > 0, got {vbw}")));
        }
        Ok(Self { rbw, vbw })
    }
}

/// Two-mode noise of the pair at `±ε`.
pub fn noise_mono(spec: &SqueezingSpectrum, lo: &LoConfig) -> Result<NoiseResult> {
    pair_noise(&spec.pair_at(lo.epsilon)?, lo.theta, 0.0)
}

/// `S = S₀/2 + S₂ε/2`: carrier single-mode noise plus the two-mode noise of
/// the pair at `±2ε`.
pub fn noise_bi(spec: &SqueezingSpectrum, lo: &LoConfig) -> Result<NoiseResult> {
    let s0 = degenerate_noise(spec.carrier(), lo.theta, 0.0)?;
    let s2 = pair_noise(&spec.pair_at(2.0 * lo.epsilon)?, lo.theta, 0.0)?;
    NoiseResult::new(0.5 * (s0.s + s2.s))
}

/// Noise seen at analyzer frequency `f` for a field whose pair at `±δ` is
/// given by `pair(δ)`.
pub fn noise_at(
    lo: &LoConfig,
    f: f64,
    pair: impl Fn(f64) -> Result<PairCovariance>,
) -> Result<NoiseResult> {
    match lo.kind {
        LoKind::Monochromatic => pair_noise(&pair(f)?, lo.theta, 0.0),
        LoKind::Bichromatic => {
            let inner = pair_noise(&pair(f - lo.epsilon)?, lo.theta, 0.0)?;
            let outer = pair_noise(&pair(f + lo.epsilon)?, lo.theta, 0.0)?;
            NoiseResult::new(0.5 * (inner.s + outer.s))
        }
    }
}

/// Mean of `noise_fn` over `[center − rbw/2, center + rbw/2]`, trapezoidal
/// with node spacing no coarser than the grid.
pub fn rbw_average(
    noise_fn: impl Fn(f64) -> Result<NoiseResult>,
    center: f64,
    rbw: f64,
    grid: &FrequencyGrid,
) -> Result<NoiseResult> {
    if !(rbw > 0.0 && rbw.is_finite()) {
        return Err(invalid("rbw", format!("must be > 0, got {rbw}")));
    }
    let edge = center.abs() + 0.5 * rbw;
    if !grid.contains(edge) {
        return Err(Error::OffGrid(edge, grid.max_detuning()));
    }
    let intervals = ((rbw / grid.spacing()).ceil() as usize).max(2);
    let step = rbw / intervals as f64;
    let lo = center - 0.5 * rbw;
    let mut acc = 0.0;
    for i in 0..=intervals {
        let w = if i == 0 || i == intervals { 0.5 } else { 1.0 };
        acc += w * noise_fn(lo + i as f64 * step)?.s;
    }
    NoiseResult::new(acc / intervals as f64)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScanPoint {
    /// Control two-photon offset, Hz.
    pub delta_c_hz: f64,
    pub s0: NoiseResult,
    pub s90: NoiseResult,
}

/// RBW-averaged noise at `θ = 0` and `θ = π/2` behind the EIT medium, for
/// each control offset in `scan_hz`.
pub fn noise_scan_vs_control_detuning(
    source: &SqueezingSpectrum,
    eit: &EitParams,
    eta_path: f64,
    lo: &LoConfig,
    analyzer: &AnalyzerConfig,
    scan_hz: &[f64],
) -> Result<Vec<ScanPoint>> {
    eit.validate()?;
    scan_hz
        .par_iter()
        .map(|&dc| {
            let ch = ChannelSpec::new(TransferFunction::Eit(eit.with_delta_c(TAU * dc)), eta_path)?;
            let pair = |d: f64| ch.transform_pair(&source.pair_at(d)?, d);
            let grid = source.grid();
            let s0 = rbw_average(|f| noise_at(&lo.with_theta(0.0), f, pair), lo.epsilon, analyzer.rbw, grid)?;
            let s90 =
                rbw_average(|f| noise_at(&lo.with_theta(FRAC_PI_2), f, pair), lo.epsilon, analyzer.rbw, grid)?;
            Ok(ScanPoint { delta_c_hz: dc, s0, s90 })
        })
        .collect()
}
