//! Fourier collocation on a uniform periodic grid over `[-T, T)`.
//!
//! Periodic truncation stands in for the real line: homoclinic profiles decay
//! like `e^{-ρ|s|}`, so once `T` is large enough the wrap-around error sits
//! below the solver tolerance and every constant-coefficient operator becomes
//! diagonal in Fourier space.
//!
//! Wavenumbers follow the usual FFT ordering, `ξ_m = π m / T` for
//! `m = 0 … n/2` and `ξ_m = π (m − n) / T` above. Odd-order derivatives drop
//! the Nyquist mode; even orders keep it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid half-length must be positive and finite, got {0}")]
    HalfLength(f64),
    #[error("grid size must be a power of two >= {min}, got {n}")]
    GridSize { n: usize, min: usize },
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("value at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("empty interval [{s1}, {s2}]")]
    EmptyInterval { s1: f64, s2: f64 },
    #[error("interval [{s1}, {s2}] is longer than one period")]
    IntervalTooLong { s1: f64, s2: f64 },
}

pub const MIN_GRID_POINTS: usize = 256;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid `s_j = −T + j·2T/n`, `j = 0 … n−1`.
///
/// Cloning is cheap; FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    half_length: f64,
    n: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("half_length", &self.half_length).field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.half_length == other.half_length && self.n == other.n
    }
}

impl Grid {
    pub fn new(half_length: f64, n: usize) -> Result<Self, SpectralError> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(SpectralError::HalfLength(half_length));
        }
        if n < MIN_GRID_POINTS || !n.is_power_of_two() {
            return Err(SpectralError::GridSize { n, min: MIN_GRID_POINTS });
        }
        let mut planner = FftPlanner::new();
        let plans = Plans { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) };
        Ok(Grid { half_length, n, plans: Arc::new(plans) })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Index of `s = 0`.
    pub fn center(&self) -> usize {
        self.n / 2
    }

    /// Index of the grid point at `−s_j` (periodically).
    pub fn mirror(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    /// Signed wavenumber of FFT slot `m`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let signed = if m <= self.n / 2 { m as f64 } else { m as f64 - self.n as f64 };
        PI * signed / self.half_length
    }

    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// Nearest grid index to `s`, unwrapped (may fall outside `0..n`).
    pub fn snap(&self, s: f64) -> i64 {
        ((s + self.half_length) / self.spacing()).round() as i64
    }

    pub(crate) fn wrap(&self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }

    /// Unnormalized forward DFT of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.n);
        let mut buf: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.plans.forward.process(&mut buf);
        buf
    }

    /// Inverse DFT including the `1/n` factor; returns the real part.
    pub fn inverse_real(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.n);
        self.plans.inverse.process(&mut coeffs);
        let scale = 1.0 / self.n as f64;
        coeffs.into_iter().map(|z| z.re * scale).collect()
    }

    /// Applies a real Fourier multiplier `σ(ξ)` (even in `ξ`) to real samples.
    pub fn apply_even_symbol(&self, values: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut hat = self.forward(values);
        for (m, z) in hat.iter_mut().enumerate() {
            *z *= symbol(self.wavenumber(m));
        }
        self.inverse_real(hat)
    }
}

/// Multiplier `(iξ)^k` for slot `m`; Nyquist is zeroed for odd `k`.
fn derivative_factor(grid: &Grid, m: usize, order: u32) -> Complex64 {
    if order % 2 == 1 && m == grid.nyquist() {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, grid.wavenumber(m)).powu(order)
}

/// Real samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::LengthMismatch { expected: grid.len(), found: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite { index });
        }
        Ok(Profile { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Profile { values: vec![0.0; grid.len()], grid: grid.clone() }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.point(j))).collect();
        Profile { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Profile {
        Profile { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Profile, f: impl Fn(f64, f64) -> f64) -> Profile {
        debug_assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Profile { grid: self.grid.clone(), values }
    }

    /// `max_j |u(s_j) − u(−s_j)|`.
    pub fn asymmetry(&self) -> f64 {
        (0..self.values.len())
            .map(|j| (self.values[j] - self.values[self.grid.mirror(j)]).abs())
            .fold(0.0, f64::max)
    }

    /// Projects onto even profiles by averaging with the reflection.
    pub fn symmetrize(&mut self) {
        let n = self.values.len();
        let mirrored: Vec<f64> = (0..n).map(|j| self.values[self.grid.mirror(j)]).collect();
        for (v, m) in self.values.iter_mut().zip(mirrored) {
            *v = 0.5 * (*v + m);
        }
    }

    /// Spectral derivative of order 1–4.
    pub fn derivative(&self, order: u32) -> Profile {
        assert!((1..=4).contains(&order), "derivative order must be 1..=4");
        let mut hat = self.grid.forward(&self.values);
        for (m, z) in hat.iter_mut().enumerate() {
            *z *= derivative_factor(&self.grid, m, order);
        }
        Profile { grid: self.grid.clone(), values: self.grid.inverse_real(hat) }
    }

    /// `[u, u', u'', u''']` on the grid from a single forward transform.
    pub fn derivatives(&self) -> [Profile; 4] {
        let hat = self.grid.forward(&self.values);
        let make = |order: u32| {
            let scaled: Vec<Complex64> =
                hat.iter().enumerate().map(|(m, &z)| z * derivative_factor(&self.grid, m, order)).collect();
            Profile { grid: self.grid.clone(), values: self.grid.inverse_real(scaled) }
        };
        [self.clone(), make(1), make(2), make(3)]
    }

    /// Full-period integral by the rectangle rule `h·Σ u_j`.
    pub fn quadrature(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    /// Composite Simpson over `[s1, s2]` with both ends snapped to the
    /// nearest grid points. The profile is treated as periodic, so the
    /// interval may wrap past `T` as long as it spans at most one period.
    pub fn quadrature_between(&self, s1: f64, s2: f64) -> Result<f64, SpectralError> {
        if !(s1 < s2) {
            return Err(SpectralError::EmptyInterval { s1, s2 });
        }
        if s2 - s1 > 2.0 * self.grid.half_length() * (1.0 + 1e-12) {
            return Err(SpectralError::IntervalTooLong { s1, s2 });
        }
        let (i1, i2) = (self.grid.snap(s1), self.grid.snap(s2));
        Ok(self.simpson_indices(i1, i2))
    }

    /// Simpson over the unwrapped index range `i1..=i2`.
    pub(crate) fn simpson_indices(&self, i1: i64, i2: i64) -> f64 {
        let h = self.grid.spacing();
        let at = |i: i64| self.values[self.grid.wrap(i)];
        let intervals = i2 - i1;
        match intervals {
            i if i <= 0 => 0.0,
            1 => 0.5 * h * (at(i1) + at(i2)),
            _ => {
                // Simpson needs an even count; an odd remainder takes the 3/8 rule.
                let even = if intervals % 2 == 0 { intervals } else { intervals - 3 };
                let mut sum = 0.0;
                if even > 0 {
                    let mut acc = at(i1) + at(i1 + even);
                    for k in 1..even {
                        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * at(i1 + k);
                    }
                    sum += acc * h / 3.0;
                }
                if even < intervals {
                    let b = i1 + even;
                    sum += 3.0 * h / 8.0 * (at(b) + 3.0 * at(b + 1) + 3.0 * at(b + 2) + at(b + 3));
                }
                sum
            }
        }
    }

    /// Normalized Fourier coefficients `û_m = (1/n) Σ_j u_j e^{−2πijm/n}`.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let scale = 1.0 / self.grid.len() as f64;
        self.grid.forward(&self.values).into_iter().map(|z| z * scale).collect()
    }

    /// Evaluates the trigonometric interpolant and its first three
    /// derivatives at an arbitrary `s`.
    pub fn interpolate(&self, s: f64) -> [f64; 4] {
        interpolate_coefficients(&self.grid, &self.coefficients(), s)
    }

    /// Re-samples onto another grid through the trigonometric interpolant.
    /// Points outside the current domain are set to zero.
    pub fn resample(&self, target: &Grid) -> Profile {
        if *target == self.grid {
            return self.clone();
        }
        let coeffs = self.coefficients();
        let t_old = self.grid.half_length();
        let values = (0..target.len())
            .map(|j| {
                let s = target.point(j);
                if s < -t_old || s >= t_old {
                    0.0
                } else {
                    interpolate_coefficients(&self.grid, &coeffs, s)[0]
                }
            })
            .collect();
        Profile { grid: target.clone(), values }
    }
}

fn interpolate_coefficients(grid: &Grid, coeffs: &[Complex64], s: f64) -> [f64; 4] {
    let n = grid.len();
    let x = s + grid.half_length();
    let base = PI / grid.half_length();
    let mut out = [coeffs[0].re, 0.0, 0.0, 0.0];
    let step = Complex64::from_polar(1.0, base * x);
    let mut phase = Complex64::new(1.0, 0.0);
    for m in 1..n / 2 {
        // re-seed the recurrence periodically to bound phase drift
        phase = if m % 64 == 0 { Complex64::from_polar(1.0, base * x * m as f64) } else { phase * step };
        let xi = base * m as f64;
        let term = coeffs[m] * phase;
        let mut ik = Complex64::new(1.0, 0.0);
        for slot in out.iter_mut() {
            *slot += 2.0 * (term * ik).re;
            ik *= Complex64::new(0.0, xi);
        }
    }
    // Nyquist as a cosine: d^k cos(ξx) = ξ^k cos(ξx + kπ/2)
    let xi_n = base * (n / 2) as f64;
    let c_n = coeffs[n / 2].re;
    for (k, slot) in out.iter_mut().enumerate() {
        *slot += c_n * xi_n.powi(k as i32) * (xi_n * x + k as f64 * PI / 2.0).cos();
    }
    out
}

/// `max_ξ (c²ξ² − ξ⁴)`, located by a dense scan over `[0, c]` followed by
/// golden-section refinement. Analytically `c⁴/4` at `ξ² = c²/2`.
pub fn multiplier_max(c: f64) -> f64 {
    assert!(c > 0.0 && c.is_finite(), "speed must be positive");
    let g = |xi: f64| {
        let x2 = xi * xi;
        c * c * x2 - x2 * x2
    };
    const SCAN: usize = 2048;
    let dx = c / SCAN as f64;
    let best = (0..=SCAN).max_by(|&a, &b| g(a as f64 * dx).total_cmp(&g(b as f64 * dx))).unwrap_or(0);
    let (mut a, mut b) = ((best as f64 - 1.0).max(0.0) * dx, (best as f64 + 1.0) * dx);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while b - a > 1e-10 * c {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + inv_phi * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - inv_phi * (b - a);
            g1 = g(x1);
        }
    }
    g(0.5 * (a + b)).max(g1).max(g2)
}
