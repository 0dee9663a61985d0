//! Exact expectation of the detected power.
//!
//! Every RBW output sample is a linear functional of the input modes:
//! `Y(θ) = e^{−iθ}A + e^{iθ}D*` with `A = Σ κ_j a_j` and `D = Σ κ*_j a_j`,
//! where `κ_j = r_{s−j}·L_j·e^{−2πiεt_j}` and `a` is the field reaching the
//! detector. Running `κ` backward through the chain gives its weights on the
//! source bins and on the two vacuum inputs, from which `E|Y|²` follows with
//! the source moments.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::pipeline::{Pipeline, THETAS};
use super::{NoiseTrace, PulseSetup};
use crate::error::Result;

struct Weights {
    source: Vec<C64>,
    /// `‖gate vacuum‖² + ‖channel vacuum‖²`.
    vacuum: f64,
}

fn backprop(p: &Pipeline, phi: &[C64]) -> Weights {
    let mut x = phi.to_vec();
    p.ifft(&mut x);
    let mut vacuum: f64 = x.iter().zip(&p.chan_leak).map(|(v, l)| (v * l).norm_sqr()).sum();
    for (v, u) in x.iter_mut().zip(&p.chan) {
        *v *= u;
    }
    p.fft(&mut x);
    vacuum += x.iter().zip(&p.leak).map(|(v, l)| (v * l).norm_sqr()).sum::<f64>();
    for (v, g) in x.iter_mut().zip(&p.gate) {
        *v *= g;
    }
    p.ifft(&mut x);
    Weights { source: x, vacuum }
}

/// `(E|Y₀|², E|Y₉₀|², E|Y_vac|²)` for output sample `s`.
fn sample_power(p: &Pipeline, kernel: &[f64], s: usize) -> (f64, f64, f64) {
    let n = p.n;
    let kappa: Vec<C64> = (0..n).map(|j| p.mix[j] * kernel[(s + n - j) % n]).collect();
    let conj: Vec<C64> = kappa.iter().map(|k| k.conj()).collect();
    let a = backprop(p, &kappa);
    let d = backprop(p, &conj);
    let mut diag = 0.5 * (a.vacuum + d.vacuum);
    let mut vac = diag;
    let mut cross = C64::new(0.0, 0.0);
    for k in 0..n {
        let (nk, mk) = p.moments[k];
        let w = a.source[k].norm_sqr() + d.source[k].norm_sqr();
        diag += w * (nk + 0.5);
        vac += 0.5 * w;
        cross += a.source[k] * d.source[(n - k) % n] * mk;
    }
    let at = |theta: f64| diag + 2.0 * (C64::from_polar(1.0, -2.0 * theta) * cross).re;
    (at(THETAS[0]), at(THETAS[1]), vac)
}

/// Shot-normalized `V₀(t)` and `V₉₀(t)` of the gated pulse behind the
/// channel, evaluated exactly.
pub fn simulate_trace(setup: &PulseSetup) -> Result<NoiseTrace> {
    let p = Pipeline::new(setup)?;
    let n = p.n;
    // RBW impulse response r_m = (1/n)·Σ_k R_k e^{2πikm/n}; R is even, so r is real.
    let mut r: Vec<C64> = p.rbw.iter().map(|&v| C64::new(v, 0.0)).collect();
    p.ifft(&mut r);
    let kernel: Vec<f64> = r.iter().map(|v| v.re * p.norm).collect();

    let rows: Vec<(f64, f64, f64)> = (0..n).into_par_iter().map(|s| sample_power(&p, &kernel, s)).collect();
    let p0 = p.vbw(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let p90 = p.vbw(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let pv = p.vbw(&rows.iter().map(|r| r.2).collect::<Vec<_>>());
    let shot = pv.iter().sum::<f64>() / n as f64;
    NoiseTrace::new(
        setup.grid.times(),
        p0.iter().map(|v| v / shot).collect(),
        p90.iter().map(|v| v / shot).collect(),
    )
}

