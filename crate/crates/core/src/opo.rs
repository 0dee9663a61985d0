//! Below-threshold degenerate OPO as a squeezed-vacuum source.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::spectral::{from_db, DegenerateCovariance, FrequencyGrid, PairCovariance, SqueezingSpectrum};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct OpoParams {
    /// Pump amplitude relative to threshold.
    pub x: f64,
    /// Cavity half-width at half maximum, Hz.
    pub gamma_hwhm: f64,
    /// Lumped escape and detection efficiency.
    pub eta_esc: f64,
}

impl OpoParams {
    pub fn new(x: f64, gamma_hwhm: f64, eta_esc: f64) -> Result<Self> {
        let p = Self { x, gamma_hwhm, eta_esc };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x >= 0.0 && self.x < 1.0) {
            return Err(invalid("x", format!("must lie in [0, 1), got {}", self.x)));
        }
        if !(self.gamma_hwhm.is_finite() && self.gamma_hwhm > 0.0) {
            return Err(invalid("gamma_hwhm", format!("must be > 0, got {}", self.gamma_hwhm)));
        }
        if !(self.eta_esc > 0.0 && self.eta_esc <= 1.0) {
            return Err(invalid("eta_esc", format!("must lie in (0, 1], got {}", self.eta_esc)));
        }
        Ok(())
    }

    /// Squeezed and anti-squeezed quadrature noise at detuning `delta` (Hz).
    pub fn quadratures(&self, delta: f64) -> (f64, f64) {
        let w2 = (delta / self.gamma_hwhm).powi(2);
        let gain = self.eta_esc * 4.0 * self.x;
        let sq = 1.0 - gain / ((1.0 + self.x).powi(2) + w2);
        let anti = 1.0 + gain / ((1.0 - self.x).powi(2) + w2);
        (sq, anti)
    }

    fn pair(&self, delta: f64) -> PairCovariance {
        let (sq, anti) = self.quadratures(delta);
        let n = (anti + sq - 2.0) / 4.0;
        PairCovariance::new(n, n, C64::new((sq - anti) / 4.0, 0.0))
    }
}

/// Stationary OPO output on `grid`. The squeezed quadrature sits at `θ = 0`.
pub fn opo_spectrum(params: &OpoParams, grid: FrequencyGrid) -> Result<SqueezingSpectrum> {
    params.validate()?;
    let p0 = params.pair(0.0);
    let carrier = DegenerateCovariance::new(p0.n_plus, p0.m);
    let sidebands = grid.nonnegative().skip(1).map(|d| params.pair(d)).collect();
    SqueezingSpectrum::new(grid, carrier, sidebands)
}

/// Find `(x, eta_esc)` such that the squeezed/anti-squeezed quadratures at
/// `at_detuning` equal the targets.
///
/// Writing `a = 1 - S₋` and `b = S₊ - 1`, the ratio `b/a` depends on `x`
/// alone and rises monotonically from 1 at `x = 0`, so `x` follows from a
/// bracketed bisection and `eta_esc = a·((1+x)² + Ω²)/(4x)` in closed form.
pub fn calibrate_opo(
    target_sqz_db: f64,
    target_antisqz_db: f64,
    at_detuning: f64,
    gamma_hwhm: f64,
) -> Result<OpoParams> {
    if !(gamma_hwhm.is_finite() && gamma_hwhm > 0.0) {
        return Err(invalid("gamma_hwhm", format!("must be > 0, got {gamma_hwhm}")));
    }
    if !at_detuning.is_finite() {
        return Err(invalid("at_detuning", "must be finite"));
    }
    if !(target_sqz_db < 0.0 && target_antisqz_db > 0.0) {
        return Err(Error::NoSolution(format!(
            "need squeezing < 0 dB < anti-squeezing, got {target_sqz_db} / {target_antisqz_db} dB"
        )));
    }
    if target_sqz_db.abs() >= target_antisqz_db {
        return Err(Error::NoSolution(format!(
            "|{target_sqz_db}| dB squeezing with {target_antisqz_db} dB anti-squeezing needs a better than pure state"
        )));
    }
    let a = 1.0 - from_db(target_sqz_db);
    let b = from_db(target_antisqz_db) - 1.0;
    let w2 = (at_detuning / gamma_hwhm).powi(2);
    let target = b / a;
    let ratio = |x: f64| ((1.0 + x).powi(2) + w2) / ((1.0 - x).powi(2) + w2);
    let sup = ratio(1.0);
    if target >= sup {
        return Err(Error::NoSolution(format!(
            "quadrature ratio {target:.4} exceeds the at-threshold limit {sup:.4}"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    if x <= 0.0 {
        return Err(Error::NoSolution("pump ratio collapsed to zero".into()));
    }
    let eta_esc = a * ((1.0 + x).powi(2) + w2) / (4.0 * x);
    if !(eta_esc > 0.0 && eta_esc <= 1.0) {
        return Err(Error::NoSolution(format!(
            "required escape efficiency {eta_esc:.6} lies outside (0, 1]"
        )));
    }
    OpoParams::new(x, gamma_hwhm, eta_esc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{pair_noise, to_db};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(400, 50e3).unwrap()
    }

    #[test]
    fn zero_pump_is_vacuum() {
        let spec = opo_spectrum(&OpoParams::new(0.0, 5e6, 0.7).unwrap(), grid()).unwrap();
        for p in spec.pairs() {
            assert_eq!(p.n_plus, 0.0);
            assert_eq!(p.m.norm(), 0.0);
        }
    }

    #[test]
    fn half_threshold_ideal_escape() {
        let p = OpoParams::new(0.5, 5e6, 1.0).unwrap();
        let (sq, anti) = p.quadratures(0.0);
        assert_relative_eq!(sq, 1.0 / 9.0, epsilon = 1e-12);
        assert_relative_eq!(anti, 9.0, epsilon = 1e-12);
        assert!((to_db(sq).unwrap() + 9.54).abs() < 5e-3);
        let spec = opo_spectrum(&p, grid()).unwrap();
        let s0 = pair_noise(&spec.pairs()[0], 0.0, 0.0).unwrap().s;
        let s90 = pair_noise(&spec.pairs()[0], FRAC_PI_2, 0.0).unwrap().s;
        assert_relative_eq!(s0, sq, epsilon = 1e-12);
        assert_relative_eq!(s90, anti, epsilon = 1e-12);
    }

    #[test]
    fn far_sidebands_approach_vacuum() {
        let p = OpoParams::new(0.8, 5e6, 0.9).unwrap();
        let (sq, anti) = p.quadratures(1e12);
        assert!((sq - 1.0).abs() < 1e-8 && (anti - 1.0).abs() < 1e-8);
    }

    #[test]
    fn calibration_reproduces_targets() {
        let p = calibrate_opo(-1.60, 3.71, 1e6, 5e6).unwrap();
        let (sq, anti) = p.quadratures(1e6);
        assert!((to_db(sq).unwrap() + 1.60).abs() < 1e-9);
        assert!((to_db(anti).unwrap() - 3.71).abs() < 1e-9);
        assert!(p.eta_esc < 1.0 && p.x < 1.0);
    }

    #[test]
    fn infeasible_targets() {
        assert!(matches!(calibrate_opo(-3.0103, 3.0103, 1e6, 5e6), Err(Error::NoSolution(_))));
        assert!(matches!(calibrate_opo(-4.0, 3.0, 1e6, 5e6), Err(Error::NoSolution(_))));
        assert!(matches!(calibrate_opo(1.0, 3.0, 1e6, 5e6), Err(Error::NoSolution(_))));
    }

    #[test]
    fn vacuum_limit_targets() {
        let p = calibrate_opo(-0.0001, 0.0001 * 1.0001, 1e6, 5e6).unwrap();
        assert!(p.x < 1e-3);
    }
}
