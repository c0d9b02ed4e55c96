//! Discrete Fourier analysis with continuous-transform scaling.
//!
//! The forward transform approximates `f̂(ω) = ∫ f(x) e^{-iωx} dx` on a
//! uniform grid `x_k = x0 + k·h`:
//!
//! ```text
//! bin_m = h · e^{-iω_m x0} · Σ_k f_k e^{-2πi m k / N},   ω_m = 2π m' / (N h)
//! ```
//!
//! where `m'` is the signed bin index in `(-N/2, N/2]`. With this scaling the
//! bins can be compared directly against closed-form transforms such as
//! `√(2π) e^{-ω²/2}` for the unit Gaussian. The Hilbert transform is the
//! multiplier `-i·sgn(ω)`, with both the DC and the Nyquist bin sent to zero.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling grid `x_k = x0 + k·step`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalGrid {
    len: usize,
    x0: f64,
    step: f64,
}

impl SignalGrid {
    pub fn new(len: usize, x0: f64, step: f64) -> Result<Self> {
        if len < 4 || len % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "sample count must be even and at least 4, got {len}"
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample spacing must be positive and finite, got {step}"
            )));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidInput(format!("x0 must be finite, got {x0}")));
        }
        Ok(Self { len, x0, step })
    }

    /// Grid of `len` samples covering `[x0, x0 + width)`.
    pub fn over_window(len: usize, x0: f64, width: f64) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidInput("sample count must be positive".into()));
        }
        Self::new(len, x0, width / len as f64)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Length of one period of the grid, `N·h`.
    pub fn period(&self) -> f64 {
        self.len as f64 * self.step
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.step
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.x(k)).collect()
    }

    /// Signed bin index in `(-N/2, N/2]`.
    pub fn signed_index(&self, m: usize) -> i64 {
        if m <= self.len / 2 {
            m as i64
        } else {
            m as i64 - self.len as i64
        }
    }

    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.len / 2
    }

    /// Angular frequency spacing `Δω = 2π / (N h)`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.period()
    }

    pub fn omega(&self, m: usize) -> f64 {
        self.signed_index(m) as f64 * self.frequency_step()
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.len).map(|m| self.omega(m)).collect()
    }

    /// Nyquist angular frequency `π / h`.
    pub fn nyquist(&self) -> f64 {
        PI / self.step
    }
}

/// Complex samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    grid: SignalGrid,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, x0: f64, step: f64) -> Result<Self> {
        let grid = SignalGrid::new(samples.len(), x0, step)?;
        Self::on_grid(grid, samples)
    }

    pub fn on_grid(grid: SignalGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Structure(format!(
                "{} samples for a grid of {}",
                samples.len(),
                grid.len()
            )));
        }
        if let Some(k) = samples.iter().position(|z| !is_finite(*z)) {
            return Err(Error::InvalidInput(format!("sample {k} is not finite")));
        }
        Ok(Self { samples, grid })
    }

    pub fn from_fn(grid: SignalGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = (0..grid.len()).map(|k| f(grid.x(k))).collect();
        Self::on_grid(grid, samples)
    }

    pub fn from_real_fn(grid: SignalGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros(grid: SignalGrid) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn grid(&self) -> SignalGrid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.grid.step
    }

    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.samples.len() as f64
    }

    /// Discrete L2 norm `sqrt(Σ|f_k|²)` (no `h` factor).
    pub fn norm(&self) -> f64 {
        l2_norm(&self.samples)
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|z| z.im == 0.0)
    }

    /// Returns `self · factor + offset` sample-wise.
    pub fn affine(&self, factor: Complex64, offset: Complex64) -> Self {
        Self {
            samples: self.samples.iter().map(|z| z * factor + offset).collect(),
            grid: self.grid,
        }
    }

    /// Sample-wise `self·α + other·β`; the grids must match.
    pub fn combine(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Structure("signals live on different grids".into()));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * alpha + b * beta)
            .collect();
        Ok(Self {
            samples,
            grid: self.grid,
        })
    }
}

/// Frequency-domain representation with explicit angular frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    omega: Vec<f64>,
    grid: SignalGrid,
}

impl Spectrum {
    /// Builds a spectrum for `grid`; bin frequencies follow from the grid.
    pub fn new(bins: Vec<Complex64>, grid: SignalGrid) -> Result<Self> {
        let omega = grid.omegas();
        Self::from_parts(bins, omega, grid)
    }

    /// Builds a spectrum from explicit parts, checking that they agree.
    pub fn from_parts(bins: Vec<Complex64>, omega: Vec<f64>, grid: SignalGrid) -> Result<Self> {
        if bins.len() != grid.len() || omega.len() != grid.len() {
            return Err(Error::Structure(format!(
                "{} bins and {} frequencies for a grid of {}",
                bins.len(),
                omega.len(),
                grid.len()
            )));
        }
        let dw = grid.frequency_step();
        for (m, &w) in omega.iter().enumerate() {
            let expect = grid.omega(m);
            if (w - expect).abs() > 1e-9 * dw.max(expect.abs()) {
                return Err(Error::Structure(format!(
                    "bin {m} has frequency {w}, grid implies {expect}"
                )));
            }
        }
        if let Some(m) = bins.iter().position(|z| !is_finite(*z)) {
            return Err(Error::InvalidInput(format!("bin {m} is not finite")));
        }
        Ok(Self { bins, omega, grid })
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn bins_mut(&mut self) -> &mut [Complex64] {
        &mut self.bins
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn grid(&self) -> SignalGrid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Continuous-scaled forward transform of `signal`.
pub fn forward_spectrum(signal: &SampledSignal) -> Spectrum {
    let grid = signal.grid();
    let plan = FourierPlan::new(grid.len());
    let mut bins = signal.samples().to_vec();
    plan.forward(&mut bins);
    let h = grid.step();
    for (m, b) in bins.iter_mut().enumerate() {
        *b *= Complex64::from_polar(h, -grid.omega(m) * grid.x0());
    }
    Spectrum {
        omega: grid.omegas(),
        bins,
        grid,
    }
}

/// Exact inverse of [`forward_spectrum`].
pub fn inverse_spectrum(spectrum: &Spectrum) -> Result<SampledSignal> {
    let spectrum =
        Spectrum::from_parts(spectrum.bins.clone(), spectrum.omega.clone(), spectrum.grid)?;
    let grid = spectrum.grid;
    let plan = FourierPlan::new(grid.len());
    let scale = 1.0 / grid.period();
    let mut samples = spectrum.bins;
    for (m, b) in samples.iter_mut().enumerate() {
        *b *= Complex64::from_polar(scale, grid.omega(m) * grid.x0());
    }
    plan.inverse(&mut samples);
    SampledSignal::on_grid(grid, samples)
}

/// Sign of the bin frequency, with both DC and Nyquist mapped to zero.
pub(crate) fn hilbert_sign(grid: &SignalGrid, m: usize) -> f64 {
    if m == 0 || grid.is_nyquist(m) {
        0.0
    } else if grid.signed_index(m) > 0 {
        1.0
    } else {
        -1.0
    }
}

/// Discrete Hilbert transform, multiplier `-i·sgn(ω)`.
pub fn hilbert(signal: &SampledSignal) -> SampledSignal {
    let mut spectrum = forward_spectrum(signal);
    let grid = spectrum.grid;
    for (m, b) in spectrum.bins.iter_mut().enumerate() {
        *b *= Complex64::new(0.0, -hilbert_sign(&grid, m));
    }
    inverse_spectrum(&spectrum).expect("spectrum built from a valid signal")
}

/// Zeroes every strictly negative-frequency bin; DC and Nyquist are kept.
pub fn analytic_projection(signal: &SampledSignal) -> SampledSignal {
    let mut spectrum = forward_spectrum(signal);
    let grid = spectrum.grid;
    for (m, b) in spectrum.bins.iter_mut().enumerate() {
        if grid.signed_index(m) < 0 {
            *b = Complex64::new(0.0, 0.0);
        }
    }
    inverse_spectrum(&spectrum).expect("spectrum built from a valid signal")
}

/// `sqrt(Σ_{ω<0} |f̂|² / Σ |f̂|²)`, zero for the zero signal.
pub fn negative_frequency_fraction(signal: &SampledSignal) -> f64 {
    let grid = signal.grid();
    let mut raw = signal.samples().to_vec();
    FourierPlan::new(grid.len()).forward(&mut raw);
    let (mut neg, mut total) = (0.0, 0.0);
    for (m, b) in raw.iter().enumerate() {
        let e = b.norm_sqr();
        total += e;
        if grid.signed_index(m) < 0 {
            neg += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (neg / total).sqrt()
    }
}

pub fn l2_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Cached forward/inverse FFTs of one length. Transforms are unnormalized.
#[derive(Clone)]
pub(crate) struct FourierPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FourierPlan {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
    }

    pub(crate) fn forward_with_scratch(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(data, scratch);
    }

    pub(crate) fn inverse_with_scratch(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, scratch);
    }
}
