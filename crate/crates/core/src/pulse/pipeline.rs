//! Precomputed sample-domain operators shared by the exact and Monte-Carlo
//! evaluations.

use std::f64::consts::{FRAC_PI_2, LN_2, TAU};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use super::PulseSetup;
use crate::error::Result;
use crate::measurement::LoKind;

pub(super) const THETAS: [f64; 2] = [0.0, FRAC_PI_2];

pub(super) struct Pipeline {
    pub n: usize,
    pub norm: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Gate amplitude and its vacuum leak, per sample.
    pub gate: Vec<f64>,
    pub leak: Vec<f64>,
    /// Channel amplitude and its vacuum leak, per bin.
    pub chan: Vec<C64>,
    pub chan_leak: Vec<f64>,
    /// LO envelope times the down-mixing phasor, per sample.
    pub mix: Vec<C64>,
    /// Zero-phase RBW response per bin.
    pub rbw: Vec<f64>,
    pub vbw_alpha: f64,
    /// `(⟨b†b⟩, ⟨b_k b_{−k}⟩)` per bin.
    pub moments: Vec<(f64, C64)>,
}

impl Pipeline {
    pub fn new(setup: &PulseSetup) -> Result<Self> {
        let grid = setup.grid;
        let n = grid.n_samples();
        let dt = grid.dt();
        let freq = grid.frequency_grid();
        let mut planner = FftPlanner::new();
        let times = grid.times();
        let gate: Vec<f64> = times.iter().map(|&t| setup.gate.amplitude(t)).collect();
        let leak = gate.iter().map(|g| (1.0 - g * g).max(0.0).sqrt()).collect();
        let chan = (0..n).map(|k| setup.channel.amplitude(freq.bin_detuning(k))).collect::<Result<Vec<_>>>()?;
        let chan_leak = chan.iter().map(|u| (1.0 - u.norm_sqr()).max(0.0).sqrt()).collect();
        let mix = times
            .iter()
            .map(|&t| {
                let lo = match setup.lo_kind {
                    LoKind::Monochromatic => 1.0,
                    LoKind::Bichromatic => 2f64.sqrt() * (TAU * setup.epsilon * t).cos(),
                };
                C64::from_polar(lo, -TAU * setup.epsilon * t)
            })
            .collect();
        let rbw = (0..n)
            .map(|k| {
                let f = freq.bin_detuning(k);
                (-2.0 * LN_2 * (f / setup.analyzer.rbw).powi(2)).exp()
            })
            .collect();
        let moments = (0..n).map(|k| setup.source.bin_moments(k)).collect();
        Ok(Self {
            n,
            norm: 1.0 / (n as f64).sqrt(),
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            gate,
            leak,
            chan,
            chan_leak,
            mix,
            rbw,
            vbw_alpha: 1.0 - (-TAU * setup.analyzer.vbw * dt).exp(),
            moments,
        })
    }

    /// Unitary forward transform, `e^{−2πijk/n}/√n`.
    pub fn fft(&self, x: &mut [C64]) {
        self.fwd.process(x);
        let s = self.norm;
        x.iter_mut().for_each(|v| *v *= s);
    }

    /// Unitary inverse transform, `e^{+2πijk/n}/√n`.
    pub fn ifft(&self, x: &mut [C64]) {
        self.inv.process(x);
        let s = self.norm;
        x.iter_mut().for_each(|v| *v *= s);
    }

    /// Circular single-pole smoother. The first pass settles the state so the
    /// second sees a periodic steady state.
    pub fn vbw(&self, x: &[f64]) -> Vec<f64> {
        let a = self.vbw_alpha;
        let mut y = x[x.len() - 1];
        for &v in x {
            y += a * (v - y);
        }
        x.iter()
            .map(|&v| {
                y += a * (v - y);
                y
            })
            .collect()
    }
}
