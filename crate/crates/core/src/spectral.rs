//! Second-moment description of a stationary Gaussian field around the
//! optical carrier, and the shot-normalized quadrature-noise functionals.
//!
//! The field is split into sideband pairs at `±δ`. A pair is fully described
//! by the photon numbers of its two modes and their anomalous correlation
//! `m = ⟨a₊a₋⟩`. The carrier (`δ = 0`) is a single mode with `⟨a₀²⟩ = m₀`.
//! Vacuum noise is 1 for every measured quantity.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

/// Absolute slack on every physicality condition.
pub const PHYSICALITY_SLACK: f64 = 1e-9;

/// Frequency offset from the optical carrier, in Hz.
#[derive(Copy, Clone, Debug, PartialEq, PartialOrd)]
pub struct Detuning(f64);

impl Detuning {
    pub fn hz(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(invalid("detuning", format!("must be finite, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Angular frequency, rad/s.
    pub fn angular(self) -> f64 {
        std::f64::consts::TAU * self.0
    }
}

/// Symmetric detuning grid laid out like the bins of an `n_points` DFT:
/// `k·spacing` for `k = -n/2 .. n/2`. Bin `k` pairs with `-k (mod n)`, so the
/// carrier and the `n/2` bin are their own partners and pairing is total.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    n_points: usize,
    spacing: f64,
}

impl FrequencyGrid {
    pub fn new(n_points: usize, spacing: f64) -> Result<Self> {
        if n_points < 2 || n_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and >= 2, got {n_points}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be > 0, got {spacing}")));
        }
        Ok(Self { n_points, spacing })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of distinct nonnegative detunings, `n/2 + 1`.
    pub fn half_len(&self) -> usize {
        self.n_points / 2 + 1
    }

    pub fn max_detuning(&self) -> f64 {
        (self.n_points / 2) as f64 * self.spacing
    }

    /// Detuning of DFT bin `k` (0-based, standard FFT ordering).
    pub fn bin_detuning(&self, k: usize) -> f64 {
        let n = self.n_points;
        let k = k % n;
        if k <= n / 2 {
            k as f64 * self.spacing
        } else {
            (k as f64 - n as f64) * self.spacing
        }
    }

    pub fn contains(&self, delta: f64) -> bool {
        delta.is_finite() && delta.abs() <= self.max_detuning() * (1.0 + 1e-12)
    }

    /// All nonnegative grid detunings in increasing order.
    pub fn nonnegative(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.half_len()).map(move |j| j as f64 * self.spacing)
    }
}

/// Second moments of the mode pair at `+δ` / `-δ`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PairCovariance {
    /// `⟨a₊†a₊⟩`
    pub n_plus: f64,
    /// `⟨a₋†a₋⟩`
    pub n_minus: f64,
    /// `⟨a₊a₋⟩`
    pub m: C64,
}

impl PairCovariance {
    pub const VACUUM: Self = Self { n_plus: 0.0, n_minus: 0.0, m: C64 { re: 0.0, im: 0.0 } };

    pub fn new(n_plus: f64, n_minus: f64, m: C64) -> Self {
        Self { n_plus, n_minus, m }
    }

    /// Pure two-mode squeezed vacuum with squeezing parameter `r`, squeezed
    /// quadrature at `θ = 0`.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let n = r.sinh().powi(2);
        Self::new(n, n, C64::new(-r.sinh() * r.cosh(), 0.0))
    }

    /// The same pair seen from `-δ`.
    pub fn mirrored(self) -> Self {
        Self { n_plus: self.n_minus, n_minus: self.n_plus, m: self.m }
    }

    /// Closed-form physicality: `|m|² ≤ n₊n₋ + min(n₊, n₋)`.
    pub fn is_physical(&self) -> bool {
        let (a, b) = (self.n_plus, self.n_minus);
        if !(a.is_finite() && b.is_finite() && self.m.re.is_finite() && self.m.im.is_finite()) {
            return false;
        }
        if a < -PHYSICALITY_SLACK || b < -PHYSICALITY_SLACK {
            return false;
        }
        let bound = a * b + a.min(b);
        self.m.norm_sqr() <= bound + PHYSICALITY_SLACK * (1.0 + bound)
    }

    /// Symmetrized covariance of `(x₊, p₊, x₋, p₋)` with `x = a + a†`,
    /// `p = -i(a - a†)`; vacuum is the identity.
    pub fn quadrature_covariance(&self) -> Matrix4<f64> {
        let (re, im) = (2.0 * self.m.re, 2.0 * self.m.im);
        let a = 1.0 + 2.0 * self.n_plus;
        let b = 1.0 + 2.0 * self.n_minus;
        Matrix4::new(
            a, 0.0, re, im, //
            0.0, a, im, -re, //
            re, im, b, 0.0, //
            im, -re, 0.0, b,
        )
    }

    fn lerp(self, other: Self, w: f64) -> Self {
        Self {
            n_plus: self.n_plus + w * (other.n_plus - self.n_plus),
            n_minus: self.n_minus + w * (other.n_minus - self.n_minus),
            m: self.m + (other.m - self.m) * w,
        }
    }
}

/// Second moments of the single carrier mode.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DegenerateCovariance {
    /// `⟨a₀†a₀⟩`
    pub n0: f64,
    /// `⟨a₀²⟩`
    pub m0: C64,
}

impl DegenerateCovariance {
    pub const VACUUM: Self = Self { n0: 0.0, m0: C64 { re: 0.0, im: 0.0 } };

    pub fn new(n0: f64, m0: C64) -> Self {
        Self { n0, m0 }
    }

    /// Pure single-mode squeezed vacuum, squeezed at `θ = 0`.
    pub fn squeezed(r: f64) -> Self {
        Self::new(r.sinh().powi(2), C64::new(-0.5 * (2.0 * r).sinh(), 0.0))
    }

    /// `|m₀|² ≤ n₀(n₀ + 1)`.
    pub fn is_physical(&self) -> bool {
        let n = self.n0;
        if !(n.is_finite() && self.m0.re.is_finite() && self.m0.im.is_finite()) {
            return false;
        }
        if n < -PHYSICALITY_SLACK {
            return false;
        }
        let bound = n * (n + 1.0);
        self.m0.norm_sqr() <= bound + PHYSICALITY_SLACK * (1.0 + bound)
    }

    /// The carrier viewed as a pair at zero detuning (both "sides" are the
    /// same mode). Shares the physicality bound.
    pub fn as_pair(&self) -> PairCovariance {
        PairCovariance::new(self.n0, self.n0, self.m0)
    }
}

/// Second moments of a stationary field on a [`FrequencyGrid`].
///
/// `pairs[j]` holds the pair at `±j·spacing`, `j = 0 ..= n/2`; `pairs[0]` is
/// the carrier written as a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SqueezingSpectrum {
    grid: FrequencyGrid,
    pairs: Vec<PairCovariance>,
    carrier: DegenerateCovariance,
}

impl SqueezingSpectrum {
    /// `sidebands[j - 1]` is the pair at `±j·spacing` for `j = 1 ..= n/2`.
    pub fn new(
        grid: FrequencyGrid,
        carrier: DegenerateCovariance,
        sidebands: Vec<PairCovariance>,
    ) -> Result<Self> {
        if sidebands.len() != grid.half_len() - 1 {
            return Err(Error::InvalidGrid(format!(
                "expected {} sideband pairs, got {}",
                grid.half_len() - 1,
                sidebands.len()
            )));
        }
        if !carrier.is_physical() {
            return Err(Error::NonPhysicalCarrier { n0: carrier.n0, m0_abs: carrier.m0.norm() });
        }
        for p in &sidebands {
            if !p.is_physical() {
                return Err(non_physical(p));
            }
        }
        let mut pairs = Vec::with_capacity(grid.half_len());
        pairs.push(carrier.as_pair());
        pairs.extend(sidebands);
        Ok(Self { grid, pairs, carrier })
    }

    pub fn vacuum(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            pairs: vec![PairCovariance::VACUUM; grid.half_len()],
            carrier: DegenerateCovariance::VACUUM,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn carrier(&self) -> &DegenerateCovariance {
        &self.carrier
    }

    /// Pairs at `j·spacing`, `j = 0 ..= n/2`.
    pub fn pairs(&self) -> &[PairCovariance] {
        &self.pairs
    }

    /// Pair at an arbitrary detuning inside the grid. Off-grid points are
    /// linearly interpolated in `(n₊, n₋, Re m, Im m)`; negative detunings
    /// return the mirrored pair.
    pub fn pair_at(&self, delta: f64) -> Result<PairCovariance> {
        if !self.grid.contains(delta) {
            return Err(Error::OffGrid(delta, self.grid.max_detuning()));
        }
        let pos = (delta.abs() / self.grid.spacing()).min((self.pairs.len() - 1) as f64);
        let lo = pos.floor() as usize;
        let w = pos - lo as f64;
        let p = if lo + 1 >= self.pairs.len() || w == 0.0 {
            self.pairs[lo]
        } else {
            self.pairs[lo].lerp(self.pairs[lo + 1], w)
        };
        Ok(if delta < 0.0 { p.mirrored() } else { p })
    }

    /// Moments of DFT bin `k` on this spectrum's grid: `(⟨b†b⟩, ⟨b_k b_{-k}⟩)`.
    pub fn bin_moments(&self, k: usize) -> (f64, C64) {
        let n = self.grid.n_points();
        let k = k % n;
        if k <= n / 2 {
            let p = self.pairs[k];
            if k == 0 || k == n / 2 {
                (0.5 * (p.n_plus + p.n_minus), p.m)
            } else {
                (p.n_plus, p.m)
            }
        } else {
            let p = self.pairs[n - k];
            (p.n_minus, p.m)
        }
    }

    /// Re-express the spectrum on another grid by interpolation. Fails if
    /// the new grid reaches beyond this one.
    pub fn resample(&self, grid: FrequencyGrid) -> Result<Self> {
        if grid == self.grid {
            return Ok(self.clone());
        }
        let pairs = grid
            .nonnegative()
            .map(|d| self.pair_at(d))
            .collect::<Result<Vec<_>>>()?;
        let carrier = self.carrier;
        Ok(Self { grid, pairs, carrier })
    }

    pub(crate) fn from_raw(
        grid: FrequencyGrid,
        pairs: Vec<PairCovariance>,
        carrier: DegenerateCovariance,
    ) -> Self {
        debug_assert_eq!(pairs.len(), grid.half_len());
        Self { grid, pairs, carrier }
    }
}

pub(crate) fn non_physical(p: &PairCovariance) -> Error {
    Error::NonPhysicalPair { n_plus: p.n_plus, n_minus: p.n_minus, m_abs: p.m.norm() }
}

/// Shot-normalized symmetric noise power (vacuum = 1).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NoiseResult {
    pub s: f64,
    pub db: f64,
}

impl NoiseResult {
    pub fn new(s: f64) -> Result<Self> {
        Ok(Self { s, db: to_db(s)? })
    }
}

pub fn to_db(s: f64) -> Result<f64> {
    if s > 0.0 && s.is_finite() {
        Ok(10.0 * s.log10())
    } else {
        Err(Error::NonPositiveNoise(s))
    }
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Two-mode quadrature noise of the pair measured at LO phase `theta`, with
/// an extra channel phase `phase_shift` added to the LO phase.
///
/// `S = 1 + n₊ + n₋ + 2·Re(m·e^{-2i(θ+φ)})`
pub fn pair_noise(pair: &PairCovariance, theta: f64, phase_shift: f64) -> Result<NoiseResult> {
    if !pair.is_physical() {
        return Err(non_physical(pair));
    }
    let rot = C64::from_polar(1.0, -2.0 * (theta + phase_shift));
    NoiseResult::new(1.0 + pair.n_plus + pair.n_minus + 2.0 * (pair.m * rot).re)
}

/// Single-mode quadrature noise of the carrier.
///
/// `S = 1 + 2n₀ + 2·Re(m₀·e^{-2i(θ+φ)})`
pub fn degenerate_noise(
    carrier: &DegenerateCovariance,
    theta: f64,
    phase_shift: f64,
) -> Result<NoiseResult> {
    if !carrier.is_physical() {
        return Err(Error::NonPhysicalCarrier { n0: carrier.n0, m0_abs: carrier.m0.norm() });
    }
    let rot = C64::from_polar(1.0, -2.0 * (theta + phase_shift));
    NoiseResult::new(1.0 + 2.0 * carrier.n0 + 2.0 * (carrier.m0 * rot).re)
}

/// Uncertainty-relation test on the 4×4 quadrature covariance: the Hermitian
/// matrix `V + iΩ` must be positive semidefinite.
pub fn check_physical(pair: &PairCovariance) -> bool {
    let v = pair.quadrature_covariance();
    if v.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let omega = Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    );
    let h: Matrix4<C64> = Matrix4::from_fn(|i, j| C64::new(v[(i, j)], omega[(i, j)]));
    let eig = SymmetricEigen::new(h);
    eig.eigenvalues.iter().all(|&l| l >= -PHYSICALITY_SLACK)
}
