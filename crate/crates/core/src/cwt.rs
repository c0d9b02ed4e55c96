//! Forward continuous wavelet transform.
//!
//! For a kernel `ψ` the transform with norm exponent `n` is
//!
//! ```text
//! W(a, b) = ∫ f(x) conj(ψ_{n,a,b}(x)) dx,   ψ_{n,a,b}(x) = |a|^{-1/n} ψ((x - b)/a)
//! ```
//!
//! which in the frequency domain reads
//! `W(a, ·) = F⁻¹[ f̂(ω) · |a|^{1-1/n} · conj(ψ̂(aω)) ]`. [`cwt_forward`]
//! evaluates the latter with one FFT of the signal and one inverse FFT per
//! scale; [`cwt_forward_direct`] evaluates the former by trapezoid quadrature
//! and serves as an independent check. Both treat the signal as periodic.

use std::io::{self, Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{is_finite, FourierPlan, SampledSignal, SignalGrid};
use crate::wavelets::{KernelKind, NormMode, WaveletKernel};

/// Default log-scale step, in octaves.
pub const DEFAULT_OCTAVE_STEP: f64 = 1.0 / 32.0;

/// Default smallest scale as a fraction of the sample spacing.
///
/// The scale integral is truncated below `a_min`; the missing piece is of
/// order `a_min·|ω|·|ψ̂(0)|`, so the grid reaches well below one sample.
pub const DEFAULT_MIN_SCALE_FRACTION: f64 = 1.0 / 4096.0;

/// Largest signal length accepted by [`cwt_forward_direct`].
pub const DIRECT_LIMIT: usize = 4096;

const COVERAGE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleLayout {
    PositiveOnly,
    /// Every `+a` row is paired with a `-a` row carrying the same weight.
    Mirrored,
}

/// Scales `a_j` with quadrature weights for `∫ · da`.
///
/// Rows are ordered as the positive branch (increasing) followed, for the
/// mirrored layout, by the negated branch in the same order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    positive: Vec<f64>,
    weights: Vec<f64>,
    layout: ScaleLayout,
    octave_step: Option<f64>,
}

impl ScaleGrid {
    pub fn new(scales: Vec<f64>, weights: Vec<f64>, layout: ScaleLayout) -> Result<Self> {
        if scales.is_empty() || scales.len() != weights.len() {
            return Err(Error::Structure(format!(
                "{} scales with {} weights",
                scales.len(),
                weights.len()
            )));
        }
        if scales.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidInput(
                "scales must be positive and finite".into(),
            ));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "scales must be strictly increasing".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput(
                "weights must be positive and finite".into(),
            ));
        }
        Ok(Self {
            positive: scales,
            weights,
            layout,
            octave_step: None,
        })
    }

    /// `a_j = a_min·2^{jδ}` up to the first scale reaching `a_max`, with
    /// midpoint weights `a_j·δ·ln 2` in `log a`.
    pub fn log_spaced(
        a_min: f64,
        a_max: f64,
        octave_step: f64,
        layout: ScaleLayout,
    ) -> Result<Self> {
        if !(a_min.is_finite() && a_min > 0.0 && a_max.is_finite() && a_max > a_min) {
            return Err(Error::InvalidInput(format!(
                "need 0 < a_min < a_max, got a_min = {a_min}, a_max = {a_max}"
            )));
        }
        if !(octave_step.is_finite() && octave_step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "octave step must be positive, got {octave_step}"
            )));
        }
        let count = ((a_max / a_min).log2() / octave_step - 1e-9).ceil() as usize + 1;
        let ln2 = std::f64::consts::LN_2;
        let scales: Vec<f64> = (0..count)
            .map(|j| a_min * (j as f64 * octave_step).exp2())
            .collect();
        let weights = scales.iter().map(|a| a * octave_step * ln2).collect();
        let mut grid = Self::new(scales, weights, layout)?;
        grid.octave_step = Some(octave_step);
        Ok(grid)
    }

    /// Default mirrored grid for analysing `signal` with `kernel`.
    ///
    /// `a_min = h·DEFAULT_MIN_SCALE_FRACTION`; `a_max` puts the kernel's whole
    /// frequency band beyond the lowest nonzero bin, `a_max·Δω ≥ max|band|`.
    pub fn default_for(signal: &SignalGrid, kernel: &WaveletKernel) -> Result<Self> {
        let (lo, hi) = kernel.band();
        let edge = lo.abs().max(hi.abs());
        let a_min = signal.step() * DEFAULT_MIN_SCALE_FRACTION;
        let a_max = (edge / signal.frequency_step()).max(2.0 * a_min);
        Self::log_spaced(a_min, a_max, DEFAULT_OCTAVE_STEP, ScaleLayout::Mirrored)
    }

    pub fn with_layout(mut self, layout: ScaleLayout) -> Self {
        self.layout = layout;
        self
    }

    pub fn layout(&self) -> ScaleLayout {
        self.layout
    }

    pub fn octave_step(&self) -> Option<f64> {
        self.octave_step
    }

    pub fn positive_scales(&self) -> &[f64] {
        &self.positive
    }

    pub fn positive_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn a_min(&self) -> f64 {
        self.positive[0]
    }

    pub fn a_max(&self) -> f64 {
        self.positive[self.positive.len() - 1]
    }

    /// Number of rows, counting both branches for the mirrored layout.
    pub fn len(&self) -> usize {
        match self.layout {
            ScaleLayout::PositiveOnly => self.positive.len(),
            ScaleLayout::Mirrored => 2 * self.positive.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    pub fn scale(&self, row: usize) -> f64 {
        let n = self.positive.len();
        if row < n {
            self.positive[row]
        } else {
            -self.positive[row - n]
        }
    }

    pub fn weight(&self, row: usize) -> f64 {
        self.weights[row % self.positive.len()]
    }

    /// `(a_j, w_j)` in row order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(|j| (self.scale(j), self.weight(j)))
    }
}

/// Transform values `W[j][k]` over scale rows and translation columns.
///
/// The translation axis is the signal grid itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    values: Vec<Complex64>,
    scales: ScaleGrid,
    signal: SignalGrid,
    norm: NormMode,
    kernel: String,
    psi0: Complex64,
}

impl Scalogram {
    pub(crate) fn from_parts(
        values: Vec<Complex64>,
        scales: ScaleGrid,
        signal: SignalGrid,
        norm: NormMode,
        kernel: String,
        psi0: Complex64,
    ) -> Result<Self> {
        if values.len() != scales.len() * signal.len() {
            return Err(Error::Structure(format!(
                "{} values for a {}x{} scalogram",
                values.len(),
                scales.len(),
                signal.len()
            )));
        }
        if values.iter().any(|z| !is_finite(*z)) {
            return Err(Error::Numerical("scalogram has non-finite values".into()));
        }
        Ok(Self {
            values,
            scales,
            signal,
            norm,
            kernel,
            psi0,
        })
    }

    /// Same metadata, new values (used by derived matrices such as `∂_b W`).
    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Self::from_parts(
            values,
            self.scales.clone(),
            self.signal,
            self.norm,
            self.kernel.clone(),
            self.psi0,
        )
    }

    pub fn n_rows(&self) -> usize {
        self.scales.len()
    }

    pub fn n_cols(&self) -> usize {
        self.signal.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        let n = self.n_cols();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks_exact(self.n_cols())
    }

    pub fn value(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.n_cols() + k]
    }

    pub fn scale_grid(&self) -> &ScaleGrid {
        &self.scales
    }

    pub fn signal_grid(&self) -> SignalGrid {
        self.signal
    }

    pub fn norm(&self) -> NormMode {
        self.norm
    }

    pub fn kernel_label(&self) -> &str {
        &self.kernel
    }

    pub fn psi0(&self) -> Complex64 {
        self.psi0
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::spectral::l2_norm(&self.values)
    }

    /// One CSV line per scale: `scale,weight` then real/imaginary pairs for
    /// every translation. A leading `#` line records the grids.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let g = self.signal;
        writeln!(
            w,
            "# kernel={};norm={};layout={};x0={};step={};n={}",
            self.kernel,
            self.norm,
            match self.scales.layout {
                ScaleLayout::PositiveOnly => "positive-only",
                ScaleLayout::Mirrored => "mirrored",
            },
            g.x0(),
            g.step(),
            g.len()
        )?;
        write!(w, "scale,weight")?;
        for k in 0..g.len() {
            let b = g.x(k);
            write!(w, ",re@{b},im@{b}")?;
        }
        writeln!(w)?;
        for (j, row) in self.rows().enumerate() {
            write!(w, "{},{}", self.scales.scale(j), self.scales.weight(j))?;
            for z in row {
                write!(w, ",{},{}", z.re, z.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Binary layout: magic `WREC1`, row and column counts as little-endian
    /// `u64`, then row-major `(re, im)` pairs as little-endian `f64`.
    pub fn write_binary(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(WREC1_MAGIC)?;
        w.write_all(&(self.n_rows() as u64).to_le_bytes())?;
        w.write_all(&(self.n_cols() as u64).to_le_bytes())?;
        for z in &self.values {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }
}

pub const WREC1_MAGIC: &[u8; 5] = b"WREC1";

/// Matrix read back from the `WREC1` binary layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<Complex64>,
}

pub fn read_binary(mut r: impl Read) -> Result<RawMatrix> {
    let io_err = |e: io::Error| Error::InvalidInput(format!("WREC1 read: {e}"));
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != WREC1_MAGIC {
        return Err(Error::InvalidInput("missing WREC1 magic".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word).map_err(io_err)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word).map_err(io_err)?;
    let cols = u64::from_le_bytes(word) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::InvalidInput("WREC1 dimensions overflow".into()))?;
    let mut values = Vec::with_capacity(count.min(1 << 24));
    let mut pair = [0u8; 16];
    for _ in 0..count {
        r.read_exact(&mut pair).map_err(io_err)?;
        let re = f64::from_le_bytes(pair[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(pair[8..].try_into().expect("8 bytes"));
        values.push(Complex64::new(re, im));
    }
    Ok(RawMatrix { rows, cols, values })
}

/// Fails when a tabulated kernel is cut off (non-negligible at its table
/// edge) inside the band `a·ω` the grid asks for.
fn check_coverage(signal: &SignalGrid, kernel: &WaveletKernel, grid: &ScaleGrid) -> Result<()> {
    let KernelKind::Tabulated(table) = kernel.kind() else {
        return Ok(());
    };
    let (lo, hi) = table.range();
    let limit = COVERAGE_TOLERANCE * kernel.peak();
    let edge_lo = kernel.eval_freq(lo).norm() > limit;
    let edge_hi = kernel.eval_freq(hi).norm() > limit;
    let w_max = signal.nyquist();
    let w_min = -(w_max - signal.frequency_step());
    for (a, _) in grid.rows() {
        let (p, q) = (a * w_min, a * w_max);
        let (need_lo, need_hi) = (p.min(q), p.max(q));
        if (edge_lo && need_lo < lo) || (edge_hi && need_hi > hi) {
            return Err(Error::Coverage(format!(
                "scale {a} needs psi_hat on [{need_lo}, {need_hi}] but the table spans \
                 [{lo}, {hi}] and is not negligible at its edge"
            )));
        }
    }
    Ok(())
}

/// FFT-based transform: row `j` is `F⁻¹[f̂(ω)·|a_j|^{1-1/n}·conj(ψ̂(a_j ω))]`.
///
/// Rows are computed in parallel; each row depends only on its own scale, so
/// the result does not depend on the thread count.
pub fn cwt_forward(
    signal: &SampledSignal,
    kernel: &WaveletKernel,
    grid: &ScaleGrid,
) -> Result<Scalogram> {
    let sg = signal.grid();
    check_coverage(&sg, kernel, grid)?;
    let n = sg.len();
    let plan = FourierPlan::new(n);
    let mut dft = signal.samples().to_vec();
    plan.forward(&mut dft);
    let omega = sg.omegas();
    let norm = kernel.norm();
    let inv_n = 1.0 / n as f64;

    let mut values = vec![Complex64::new(0.0, 0.0); grid.len() * n];
    values.par_chunks_mut(n).enumerate().for_each_init(
        || vec![Complex64::new(0.0, 0.0); plan.scratch_len()],
        |scratch, (j, row)| {
            let a = grid.scale(j);
            let factor = norm.transform_factor(a) * inv_n;
            for ((out, d), w) in row.iter_mut().zip(&dft).zip(&omega) {
                *out = d * kernel.eval_freq(a * w).conj() * factor;
            }
            plan.inverse_with_scratch(row, scratch);
        },
    );
    Scalogram::from_parts(
        values,
        grid.clone(),
        sg,
        norm,
        kernel.label(),
        kernel.psi0(),
    )
}

/// Time-domain trapezoid evaluation of the transform with the signal
/// extended periodically; limited to `N ≤ DIRECT_LIMIT`.
pub fn cwt_forward_direct(
    signal: &SampledSignal,
    kernel: &WaveletKernel,
    grid: &ScaleGrid,
) -> Result<Scalogram> {
    let sg = signal.grid();
    let n = sg.len();
    if n > DIRECT_LIMIT {
        return Err(Error::TooLarge {
            operation: "cwt_forward_direct",
            len: n,
            limit: DIRECT_LIMIT,
        });
    }
    let radius = kernel.time_radius().ok_or_else(|| {
        Error::Unsupported("direct transform needs a closed-form time-domain kernel".into())
    })?;
    let (h, period) = (sg.step(), sg.period());
    let f = signal.samples();
    let norm = kernel.norm();

    let mut values = vec![Complex64::new(0.0, 0.0); grid.len() * n];
    values.par_chunks_mut(n).enumerate().try_for_each_init(
        || vec![Complex64::new(0.0, 0.0); n],
        |taps, (j, row)| -> Result<()> {
            let a = grid.scale(j);
            let amp = match norm {
                NormMode::Amplitude => 1.0 / a.abs(),
                NormMode::Energy => 1.0 / a.abs().sqrt(),
            };
            let reach = radius * a.abs();
            // taps[d] = Σ_p conj(ψ_{n,a,0}(d h + p L)) over periodic images.
            for (d, tap) in taps.iter_mut().enumerate() {
                let s = if d < n / 2 {
                    d as f64
                } else {
                    d as f64 - n as f64
                } * h;
                let p_lo = ((-reach - s) / period).ceil() as i64;
                let p_hi = ((reach - s) / period).floor() as i64;
                let mut acc = Complex64::new(0.0, 0.0);
                for p in p_lo..=p_hi {
                    acc += kernel.eval_time((s + p as f64 * period) / a)?.conj();
                }
                *tap = acc * amp;
            }
            for (kb, out) in row.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, fk) in f.iter().enumerate() {
                    acc += fk * taps[(k + n - kb) % n];
                }
                *out = acc * h;
            }
            Ok(())
        },
    )?;
    Scalogram::from_parts(
        values,
        grid.clone(),
        sg,
        norm,
        kernel.label(),
        kernel.psi0(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::l2_norm;
    use std::f64::consts::PI;

    fn window(n: usize) -> SignalGrid {
        SignalGrid::over_window(n, -20.0, 40.0).unwrap()
    }

    #[test]
    fn log_grid_layout_and_weights() {
        let g = ScaleGrid::log_spaced(0.5, 8.0, 0.25, ScaleLayout::Mirrored).unwrap();
        assert_eq!(g.positive_scales().len(), 17);
        assert_eq!(g.len(), 34);
        assert!((g.a_max() - 8.0).abs() < 1e-12);
        for j in 0..17 {
            assert_eq!(g.scale(j + 17), -g.scale(j));
            assert_eq!(g.weight(j + 17), g.weight(j));
            let expect = g.scale(j) * 0.25 * std::f64::consts::LN_2;
            assert!((g.weight(j) - expect).abs() < 1e-15);
        }
        assert!(ScaleGrid::log_spaced(1.0, 0.5, 0.1, ScaleLayout::Mirrored).is_err());
        assert!(ScaleGrid::new(vec![1.0, 1.0], vec![1.0, 1.0], ScaleLayout::PositiveOnly).is_err());
        assert!(ScaleGrid::new(vec![0.0, 1.0], vec![1.0, 1.0], ScaleLayout::PositiveOnly).is_err());
    }

    #[test]
    fn default_grid_reaches_kernel_band() {
        let sg = window(1024);
        let k = WaveletKernel::morlet(1.0, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::default_for(&sg, &k).unwrap();
        assert_eq!(g.layout(), ScaleLayout::Mirrored);
        assert!((g.a_min() - sg.step() / 4096.0).abs() < 1e-18);
        assert!(g.a_max() * sg.frequency_step() >= k.band().1);
    }

    #[test]
    fn zero_signal_gives_zero_scalogram() {
        let sg = window(256);
        let k = WaveletKernel::morlet(5.0, NormMode::Energy).unwrap();
        let g = ScaleGrid::log_spaced(0.2, 5.0, 0.25, ScaleLayout::Mirrored).unwrap();
        let z = SampledSignal::zeros(sg);
        assert_eq!(cwt_forward(&z, &k, &g).unwrap().frobenius_norm(), 0.0);
        assert_eq!(
            cwt_forward_direct(&z, &k, &g).unwrap().frobenius_norm(),
            0.0
        );
    }

    #[test]
    fn single_tone_rows_follow_closed_form() {
        // ω_c = 2 is an exact bin on a window of length 8π.
        let sg = SignalGrid::over_window(512, 0.0, 8.0 * PI).unwrap();
        let wc = 2.0;
        let f = SampledSignal::from_fn(sg, |x| Complex64::from_polar(1.0, wc * x)).unwrap();
        let k = WaveletKernel::morlet(5.0, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::log_spaced(0.5, 8.0, 1.0 / 64.0, ScaleLayout::PositiveOnly).unwrap();
        let w = cwt_forward(&f, &k, &g).unwrap();
        for (j, row) in w.rows().enumerate() {
            let a = g.scale(j);
            let amp = k.eval_freq(a * wc).conj();
            for (kk, z) in row.iter().enumerate() {
                let expect = amp * Complex64::from_polar(1.0, wc * sg.x(kk));
                assert!((z - expect).norm() < 1e-12);
            }
        }
        // Scale profile peaks at a = ω0 / ω_c.
        let best = (0..g.len())
            .max_by(|&p, &q| w.value(p, 0).norm().total_cmp(&w.value(q, 0).norm()))
            .unwrap();
        assert!((g.scale(best) - 2.5).abs() < 2.5 * (1.0 / 64.0));
    }

    #[test]
    fn circular_shift_covariance() {
        let sg = window(256);
        let f = SampledSignal::from_real_fn(sg, |x| x * (-x * x / 2.0).exp()).unwrap();
        let s = 17;
        let mut shifted = f.samples().to_vec();
        shifted.rotate_right(s);
        let fs = SampledSignal::on_grid(sg, shifted).unwrap();
        let k = WaveletKernel::morlet(1.0, NormMode::Energy).unwrap();
        let g = ScaleGrid::log_spaced(0.1, 4.0, 0.2, ScaleLayout::Mirrored).unwrap();
        let (w, ws) = (
            cwt_forward(&f, &k, &g).unwrap(),
            cwt_forward(&fs, &k, &g).unwrap(),
        );
        for j in 0..g.len() {
            for kk in 0..256 {
                let diff = ws.value(j, (kk + s) % 256) - w.value(j, kk);
                assert!(diff.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_kernel_rows_are_mirror_symmetric() {
        let sg = window(256);
        let f = SampledSignal::from_real_fn(sg, |x| (-(x - 1.0) * (x - 1.0)).exp()).unwrap();
        let k = WaveletKernel::gaussian(0.5, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::log_spaced(0.1, 4.0, 0.25, ScaleLayout::Mirrored).unwrap();
        let w = cwt_forward(&f, &k, &g).unwrap();
        let half = g.len() / 2;
        for j in 0..half {
            assert_eq!(w.row(j), w.row(j + half));
        }
    }

    #[test]
    fn gaussian_smoothing_widens_variance() {
        // e^{-x²/2} smoothed by the unit-mass Gaussian of scale a is
        // (1 + a²)^{-1/2} e^{-b²/(2(1 + a²))}.
        let sg = window(512);
        let f = SampledSignal::from_real_fn(sg, |x| (-x * x / 2.0).exp()).unwrap();
        let k = WaveletKernel::gaussian(0.5, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::log_spaced(0.25, 2.0, 0.5, ScaleLayout::PositiveOnly).unwrap();
        let w = cwt_forward(&f, &k, &g).unwrap();
        for (j, row) in w.rows().enumerate() {
            let var = 1.0 + g.scale(j).powi(2);
            for (kk, z) in row.iter().enumerate() {
                let b = sg.x(kk);
                let expect = (-b * b / (2.0 * var)).exp() / var.sqrt();
                assert!((z.re - expect).abs() < 1e-10 && z.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn impulse_response_is_conjugated_reflected_kernel() {
        let sg = window(256);
        let mut samples = vec![Complex64::new(0.0, 0.0); 256];
        samples[128] = Complex64::new(1.0, 0.0); // x = 0
        let f = SampledSignal::on_grid(sg, samples).unwrap();
        let k = WaveletKernel::morlet(5.0, NormMode::Energy).unwrap();
        let g = ScaleGrid::log_spaced(0.5, 2.0, 0.5, ScaleLayout::Mirrored).unwrap();
        let w = cwt_forward_direct(&f, &k, &g).unwrap();
        let h = sg.step();
        for (j, row) in w.rows().enumerate() {
            let a = g.scale(j);
            for (kk, z) in row.iter().enumerate() {
                let b = sg.x(kk);
                let expect = k.eval_time(-b / a).unwrap().conj() * (h / a.abs().sqrt());
                assert!((z - expect).norm() < 1e-14, "row {j} col {kk}");
            }
        }
    }

    #[test]
    fn direct_matches_fft_path() {
        let sg = window(512);
        let f = SampledSignal::from_real_fn(sg, |x| (-x * x / 2.0).exp()).unwrap();
        let g = ScaleGrid::log_spaced(2.0 * sg.step(), 10.0, 0.125, ScaleLayout::Mirrored).unwrap();
        for norm in [NormMode::Amplitude, NormMode::Energy] {
            let k = WaveletKernel::morlet(5.0, norm).unwrap();
            let fast = cwt_forward(&f, &k, &g).unwrap();
            let slow = cwt_forward_direct(&f, &k, &g).unwrap();
            let diff: Vec<_> = fast
                .values()
                .iter()
                .zip(slow.values())
                .map(|(a, b)| a - b)
                .collect();
            assert!(l2_norm(&diff) / slow.frobenius_norm() < 1e-6);
        }
    }

    #[test]
    fn direct_rejects_large_and_tabulated() {
        let sg = SignalGrid::new(8192, 0.0, 0.01).unwrap();
        let f = SampledSignal::zeros(sg);
        let k = WaveletKernel::morlet(1.0, NormMode::Energy).unwrap();
        let g = ScaleGrid::log_spaced(0.1, 1.0, 0.5, ScaleLayout::Mirrored).unwrap();
        assert!(matches!(
            cwt_forward_direct(&f, &k, &g),
            Err(Error::TooLarge { .. })
        ));

        let t = crate::wavelets::FrequencyTable::from_fn(vec![-1.0, 0.0, 1.0], |w| {
            Complex64::new(w, 0.0)
        })
        .unwrap();
        let tk = WaveletKernel::tabulated(t, NormMode::Energy).unwrap();
        let small = SampledSignal::zeros(window(64));
        assert!(matches!(
            cwt_forward_direct(&small, &tk, &g),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn truncated_table_is_a_coverage_error() {
        // Table cut off at |ω| = 1 while still at full height.
        let t = crate::wavelets::FrequencyTable::from_fn(vec![-1.0, 0.0, 1.0], |_| {
            Complex64::new(1.0, 0.0)
        })
        .unwrap();
        let k = WaveletKernel::tabulated(t, NormMode::Energy).unwrap();
        let sg = window(64);
        let g = ScaleGrid::log_spaced(0.1, 4.0, 0.5, ScaleLayout::Mirrored).unwrap();
        let f = SampledSignal::zeros(sg);
        assert!(matches!(cwt_forward(&f, &k, &g), Err(Error::Coverage(_))));
    }

    #[test]
    fn binary_layout_round_trips() {
        let sg = window(16);
        let f = SampledSignal::from_real_fn(sg, |x| (-x * x / 8.0).exp()).unwrap();
        let k = WaveletKernel::morlet(2.0, NormMode::Energy).unwrap();
        let g = ScaleGrid::log_spaced(0.5, 2.0, 0.5, ScaleLayout::Mirrored).unwrap();
        let w = cwt_forward(&f, &k, &g).unwrap();
        let mut bytes = Vec::new();
        w.write_binary(&mut bytes).unwrap();
        assert_eq!(&bytes[..5], b"WREC1");
        assert_eq!(bytes.len(), 5 + 16 + 16 * w.values().len());
        assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 10);
        assert_eq!(u64::from_le_bytes(bytes[13..21].try_into().unwrap()), 16);
        let back = read_binary(bytes.as_slice()).unwrap();
        assert_eq!((back.rows, back.cols), (10, 16));
        assert_eq!(back.values, w.values());
        assert!(read_binary(&b"WREC2"[..]).is_err());
    }

    #[test]
    fn csv_has_one_line_per_scale() {
        let sg = window(8);
        let f = SampledSignal::from_real_fn(sg, |x| x).unwrap();
        let k = WaveletKernel::gaussian(1.0, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::log_spaced(1.0, 2.0, 0.5, ScaleLayout::PositiveOnly).unwrap();
        let w = cwt_forward(&f, &k, &g).unwrap();
        let mut out = Vec::new();
        w.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert!(lines[0].starts_with("# kernel=gaussian(c=1)"));
        assert!(lines[1].starts_with("scale,weight,re@-20,im@-20"));
        assert_eq!(lines.len(), 2 + g.len());
        assert_eq!(lines[2].split(',').count(), 2 + 2 * 8);
    }
}
