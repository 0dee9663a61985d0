//! Monte-Carlo evaluation by Wigner sampling of the input modes.
//!
//! Each sample draws the source bins with the right second moments and
//! independent vacuum for the gate and channel leaks, then runs the chain
//! forward. Symmetric ordering makes the sample mean of `|Y|²` converge to
//! the exact expectation. Samples use their own ChaCha stream and are summed
//! in fixed chunks that are combined in order, so results do not depend on
//! the thread count.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::pipeline::{Pipeline, THETAS};
use super::{NoiseTrace, PulseSetup};
use crate::error::{invalid, Result};

const CHUNK: usize = 32;
pub const MIN_SAMPLES: usize = 1000;

/// Monte-Carlo trace with the standard error of each point.
#[derive(Clone, Debug)]
pub struct McTrace {
    pub trace: NoiseTrace,
    pub sigma0: Vec<f64>,
    pub sigma90: Vec<f64>,
    pub n_samples: usize,
}

fn cnormal(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn draw_source(p: &Pipeline, rng: &mut ChaCha8Rng, vacuum: bool) -> Vec<C64> {
    let n = p.n;
    let mut beta = vec![C64::new(0.0, 0.0); n];
    for k in [0, n / 2] {
        let z = cnormal(rng);
        let (nk, mk) = if vacuum { (0.0, C64::new(0.0, 0.0)) } else { p.moments[k] };
        let s = nk + 0.5;
        let c1 = (0.5 * (s + (s * s - mk.norm_sqr()).max(0.0).sqrt())).sqrt();
        beta[k] = z * c1 + z.conj() * (mk / (2.0 * c1));
    }
    for k in 1..n / 2 {
        let (z1, z2) = (cnormal(rng), cnormal(rng));
        if vacuum {
            beta[k] = z1 * 0.5f64.sqrt();
            beta[n - k] = z2 * 0.5f64.sqrt();
            continue;
        }
        let (np, m) = p.moments[k];
        let (nm, _) = p.moments[n - k];
        let c1 = (np + 0.5).sqrt();
        let c2 = m / c1;
        let c3 = (nm + 0.5 - m.norm_sqr() / (np + 0.5)).max(0.0).sqrt();
        beta[k] = z1 * c1;
        beta[n - k] = z1.conj() * c2 + z2.conj() * c3;
    }
    beta
}

/// Detected power `|Y(θ)|²` per output sample for one draw, both phases.
fn forward(p: &Pipeline, rng: &mut ChaCha8Rng, vacuum: bool) -> [Vec<f64>; 2] {
    let half = 0.5f64.sqrt();
    let mut a = draw_source(p, rng, vacuum);
    p.ifft(&mut a);
    for j in 0..p.n {
        a[j] = a[j] * p.gate[j] + cnormal(rng) * (half * p.leak[j]);
    }
    p.fft(&mut a);
    for k in 0..p.n {
        a[k] = a[k] * p.chan[k] + cnormal(rng) * (half * p.chan_leak[k]);
    }
    p.ifft(&mut a);
    THETAS.map(|theta| {
        let lo = C64::from_polar(1.0, -theta);
        let mut z: Vec<C64> = a.iter().zip(&p.mix).map(|(x, m)| m * (2.0 * (lo * x).re)).collect();
        p.fft(&mut z);
        z.iter_mut().zip(&p.rbw).for_each(|(v, r)| *v *= r);
        p.ifft(&mut z);
        let y: Vec<f64> = z.iter().map(|v| v.norm_sqr()).collect();
        p.vbw(&y)
    })
}

#[derive(Clone)]
struct Acc {
    sum: [Vec<f64>; 2],
    sq: [Vec<f64>; 2],
    shot: f64,
    shot_sq: f64,
}

impl Acc {
    fn new(n: usize) -> Self {
        Self { sum: [vec![0.0; n], vec![0.0; n]], sq: [vec![0.0; n], vec![0.0; n]], shot: 0.0, shot_sq: 0.0 }
    }

    fn merge(mut self, other: &Self) -> Self {
        for q in 0..2 {
            for j in 0..self.sum[q].len() {
                self.sum[q][j] += other.sum[q][j];
                self.sq[q][j] += other.sq[q][j];
            }
        }
        self.shot += other.shot;
        self.shot_sq += other.shot_sq;
        self
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Monte-Carlo estimate of [`simulate_trace`](super::simulate_trace) from
/// `n_samples` draws. The shot reference is the time-averaged power of an
/// independent vacuum run of equal size.
pub fn mc_oracle(setup: &PulseSetup, seed: u64, n_samples: usize) -> Result<McTrace> {
    if n_samples < MIN_SAMPLES {
        return Err(invalid("n_samples", format!("need at least {MIN_SAMPLES}, got {n_samples}")));
    }
    let p = Pipeline::new(setup)?;
    let n = p.n;
    let chunks: Vec<Acc> = (0..n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Acc::new(n);
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let sig = forward(&p, &mut rng_for(seed, 2 * i as u64), false);
                for q in 0..2 {
                    for j in 0..n {
                        acc.sum[q][j] += sig[q][j];
                        acc.sq[q][j] += sig[q][j] * sig[q][j];
                    }
                }
                let vac = forward(&p, &mut rng_for(seed, 2 * i as u64 + 1), true);
                let level = 0.5 * (vac[0].iter().sum::<f64>() + vac[1].iter().sum::<f64>()) / n as f64;
                acc.shot += level;
                acc.shot_sq += level * level;
            }
            acc
        })
        .collect();
    let total = chunks.iter().fold(Acc::new(n), |a, b| a.merge(b));

    let ns = n_samples as f64;
    let shot = total.shot / ns;
    let shot_err = ((total.shot_sq / ns - shot * shot).max(0.0) / ns).sqrt();
    let stats = |q: usize| -> (Vec<f64>, Vec<f64>) {
        (0..n)
            .map(|j| {
                let mean = total.sum[q][j] / ns;
                let err = ((total.sq[q][j] / ns - mean * mean).max(0.0) / ns).sqrt();
                let v = mean / shot;
                (v, ((err / shot).powi(2) + (v * shot_err / shot).powi(2)).sqrt())
            })
            .unzip()
    };
    let (v0, sigma0) = stats(0);
    let (v90, sigma90) = stats(1);
    Ok(McTrace { trace: NoiseTrace::new(setup.grid.times(), v0, v90)?, sigma0, sigma90, n_samples })
}
