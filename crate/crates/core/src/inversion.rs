//! Reconstruction of a signal from its scalogram.
//!
//! The derivative-based route never needs the admissibility constant. For
//! every `ω ≠ 0`,
//!
//! ```text
//! ∫_ℝ conj(ψ̂(aω)) · ω da = 2π · sgn(ω) · conj(ψ(0))
//! ```
//!
//! so integrating `∂_b W(a, b)` (amplitude norm) over all scales gives
//! `-2π·conj(ψ(0))·Hf(b)`, with `H` the Hilbert transform. Applying `H` once
//! more and using `H² = -1` recovers `f` up to its mean
//! ([`reconstruct_alternative`]). When `f̂` vanishes for `ω < 0` the Hilbert
//! step is unnecessary and `f = i·g / (2π·conj(ψ(0)))`
//! ([`reconstruct_analytic`]). Both work for kernels with `ψ̂(0) ≠ 0`, such as
//! the Morlet wavelet at any `ω0` or a plain Gaussian.
//!
//! [`reconstruct_classical`] implements the textbook double integral with
//! measure `da db / a²`, which requires a finite `C_ψ`.
//!
//! The `b`-derivative uses the periodic second-order central difference,
//! matching the periodic boundary of the FFT-based transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cwt::{cwt_forward, ScaleGrid, ScaleLayout, Scalogram};
use crate::error::{Error, Result};
use crate::spectral::{hilbert, negative_frequency_fraction, FourierPlan, SampledSignal};
use crate::wavelets::{admissibility, NormMode, WaveletKernel};

/// Smallest `|ψ(0)|` the derivative-based formulas will divide by.
pub const PSI0_TOLERANCE: f64 = 1e-12;

/// Largest negative-frequency fraction accepted by [`reconstruct_analytic`].
pub const ANALYTIC_TOLERANCE: f64 = 1e-8;

/// Tolerance of the quadrature behind `C_ψ` in the classical route.
pub const CLASSICAL_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Scale integral of `∂_b W` followed by a Hilbert transform.
    AlternativeGeneral,
    /// Scale integral of `∂_b W` for signals with one-sided spectra.
    AlternativeAnalytic,
    /// Double integral against the kernel with measure `da db / a²`.
    Classical,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::AlternativeGeneral => "alternative-general",
            Self::AlternativeAnalytic => "alternative-analytic",
            Self::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeScheme {
    /// `(W_{k+1} - W_{k-1}) / 2h` with periodic wrap.
    #[default]
    Central2,
}

/// Relation that lets a positive-only grid stand in for the full scale axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleSymmetry {
    /// `ψ̂` real and even: `W(-a, b) = W(a, b)`.
    EvenKernel,
    /// `ψ̂` real and `f` real: `W(-a, b) = conj(W(a, b))`.
    RealSignal,
}

impl ScaleSymmetry {
    /// Whether the relation holds exactly for this kernel and signal.
    pub fn holds_for(self, kernel: &WaveletKernel, signal: &SampledSignal) -> bool {
        match self {
            Self::EvenKernel => kernel.has_even_spectrum(),
            Self::RealSignal => kernel.has_real_spectrum() && signal.is_real(),
        }
    }

    fn mirror(self, z: Complex64) -> Complex64 {
        match self {
            Self::EvenKernel => z,
            Self::RealSignal => z.conj(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionConfig {
    pub method: Method,
    pub derivative: DerivativeScheme,
    pub psi0: Complex64,
    /// Mean added back to the zero-mean output of the derivative routes.
    pub known_mean: Option<Complex64>,
    /// Declared symmetry allowing a positive-only scale grid.
    pub symmetry: Option<ScaleSymmetry>,
}

impl ReconstructionConfig {
    pub fn new(method: Method, kernel: &WaveletKernel) -> Result<Self> {
        let psi0 = kernel.psi0();
        if method != Method::Classical && psi0.norm() <= PSI0_TOLERANCE {
            return Err(Error::DegenerateKernel(psi0.norm()));
        }
        Ok(Self {
            method,
            derivative: DerivativeScheme::Central2,
            psi0,
            known_mean: None,
            symmetry: None,
        })
    }

    pub fn with_known_mean(mut self, mean: Complex64) -> Self {
        self.known_mean = Some(mean);
        self
    }

    pub fn with_symmetry(mut self, symmetry: ScaleSymmetry) -> Self {
        self.symmetry = Some(symmetry);
        self
    }
}

/// Periodic second-order central difference of one row.
pub fn central_difference(row: &[Complex64], step: f64, out: &mut [Complex64]) {
    let n = row.len();
    assert_eq!(n, out.len());
    assert!(n >= 3, "central difference needs at least three samples");
    let scale = 0.5 / step;
    out[0] = (row[1] - row[n - 1]) * scale;
    for k in 1..n - 1 {
        out[k] = (row[k + 1] - row[k - 1]) * scale;
    }
    out[n - 1] = (row[0] - row[n - 2]) * scale;
}

/// `∂_b W` row by row, computed in parallel over scales.
pub fn d_db(scalogram: &Scalogram) -> Result<Scalogram> {
    let n = scalogram.n_cols();
    let h = scalogram.signal_grid().step();
    let mut out = vec![Complex64::new(0.0, 0.0); scalogram.values().len()];
    out.par_chunks_mut(n)
        .zip(scalogram.values().par_chunks(n))
        .for_each(|(dst, src)| central_difference(src, h, dst));
    scalogram.with_values(out)
}

/// Scale quadrature `g(b) = Σ_j w_j·∂_bW[j][b]`. Rows of an energy-normalized
/// scalogram carry an extra `|a_j|^{1/2}`, which is divided out so both norm
/// modes approximate the same integral.
///
/// Columns are summed in parallel; each column is accumulated in row order,
/// so the result is reproducible bit for bit. A positive-only grid needs a
/// declared [`ScaleSymmetry`] to supply the negative branch.
pub fn integrate_scales(
    dscalogram: &Scalogram,
    symmetry: Option<ScaleSymmetry>,
) -> Result<SampledSignal> {
    let grid = dscalogram.scale_grid();
    let mirror = match (grid.layout(), symmetry) {
        (ScaleLayout::Mirrored, _) => None,
        (ScaleLayout::PositiveOnly, Some(s)) => Some(s),
        (ScaleLayout::PositiveOnly, None) => {
            return Err(Error::Config(
                "integration over all scales needs a mirrored grid or a declared symmetry".into(),
            ))
        }
    };
    let norm = dscalogram.norm();
    let weights: Vec<f64> = grid
        .rows()
        .map(|(a, w)| match norm {
            NormMode::Amplitude => w,
            NormMode::Energy => w / a.abs().sqrt(),
        })
        .collect();
    let n = dscalogram.n_cols();
    let values = dscalogram.values();
    let samples: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, w) in weights.iter().enumerate() {
                let z = values[j * n + k];
                acc += match mirror {
                    None => z * *w,
                    Some(s) => (z + s.mirror(z)) * *w,
                };
            }
            acc
        })
        .collect();
    SampledSignal::on_grid(dscalogram.signal_grid(), samples)
}

/// `Σ_j w_j·conj(ψ̂(a_j ω))·ω` over the grid rows; approximates
/// `2π·sgn(ω)·conj(ψ(0))` on a grid that covers the kernel band.
pub fn scale_identity_sum(kernel: &WaveletKernel, grid: &ScaleGrid, omega: f64) -> Complex64 {
    let sum: Complex64 = grid
        .rows()
        .map(|(a, w)| kernel.eval_freq(a * omega).conj() * w)
        .sum();
    let sum = match grid.layout() {
        ScaleLayout::Mirrored => sum,
        ScaleLayout::PositiveOnly => {
            sum + grid
                .rows()
                .map(|(a, w)| kernel.eval_freq(-a * omega).conj() * w)
                .sum::<Complex64>()
        }
    };
    sum * omega
}

fn check_grid(
    grid: &ScaleGrid,
    cfg: &ReconstructionConfig,
    kernel: &WaveletKernel,
    signal: &SampledSignal,
) -> Result<()> {
    if grid.layout() == ScaleLayout::Mirrored {
        return Ok(());
    }
    match cfg.symmetry {
        None => Err(Error::Config(format!(
            "{} needs a mirrored scale grid or a declared symmetry",
            cfg.method.name()
        ))),
        Some(s) if !s.holds_for(kernel, signal) => Err(Error::Config(format!(
            "declared symmetry {s:?} does not hold for {} and this signal",
            kernel.label()
        ))),
        Some(_) => Ok(()),
    }
}

fn check_psi0(cfg: &ReconstructionConfig) -> Result<()> {
    if cfg.psi0.norm() <= PSI0_TOLERANCE {
        Err(Error::DegenerateKernel(cfg.psi0.norm()))
    } else {
        Ok(())
    }
}

fn expect_method(cfg: &ReconstructionConfig, method: Method) -> Result<()> {
    if cfg.method == method {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "configuration is for {}, not {}",
            cfg.method.name(),
            method.name()
        )))
    }
}

fn restore_mean(f: SampledSignal, cfg: &ReconstructionConfig) -> SampledSignal {
    match cfg.known_mean {
        Some(mean) => f.affine(Complex64::new(1.0, 0.0), mean),
        None => f,
    }
}

/// `∫ ∂_b W da`, the intermediate quantity both derivative routes share.
pub fn scale_integral_of_derivative(
    signal: &SampledSignal,
    kernel: &WaveletKernel,
    grid: &ScaleGrid,
    symmetry: Option<ScaleSymmetry>,
) -> Result<SampledSignal> {
    let w = cwt_forward(signal, kernel, grid)?;
    let dw = d_db(&w)?;
    drop(w);
    integrate_scales(&dw, symmetry)
}

/// General admissibility-free reconstruction, `f = H[g] / (2π·conj(ψ(0)))`
/// with `g = ∫ ∂_b W da`. The output has zero mean unless a known mean is
/// configured.
pub fn reconstruct_alternative(
    signal: &SampledSignal,
    kernel: &WaveletKernel,
    grid: &ScaleGrid,
    cfg: &ReconstructionConfig,
) -> Result<SampledSignal> {
    expect_method(cfg, Method::AlternativeGeneral)?;
    check_psi0(cfg)?;
    check_grid(grid, cfg, kernel, signal)?;
    let g = scale_integral_of_derivative(signal, kernel, grid, cfg.symmetry)?;
    let f = hilbert(&g).affine(
        Complex64::new(1.0, 0.0) / (2.0 * PI * cfg.psi0.conj()),
        Complex64::new(0.0, 0.0),
    );
    Ok(restore_mean(f, cfg))
}

/// Reconstruction for signals with `f̂(ω) = 0` for `ω < 0`:
/// `f = -i·g / (2π·conj(ψ(0)))`, no Hilbert step.
pub fn reconstruct_analytic(
    signal: &SampledSignal,
    kernel: &WaveletKernel,
    grid: &ScaleGrid,
    cfg: &ReconstructionConfig,
) -> Result<SampledSignal> {
    expect_method(cfg, Method::AlternativeAnalytic)?;
    check_psi0(cfg)?;
    let fraction = negative_frequency_fraction(signal);
    if fraction > ANALYTIC_TOLERANCE {
        return Err(Error::NotAnalytic {
            fraction,
            limit: ANALYTIC_TOLERANCE,
        });
    }
    check_grid(grid, cfg, kernel, signal)?;
    let g = scale_integral_of_derivative(signal, kernel, grid, cfg.symmetry)?;
    let f = g.affine(
        Complex64::new(0.0, -1.0) / (2.0 * PI * cfg.psi0.conj()),
        Complex64::new(0.0, 0.0),
    );
    Ok(restore_mean(f, cfg))
}

/// Classical inversion `f = (1/C_ψ) ∫∫ ψ_{2,a,b}(x) W_2(a, b) da db / a²`.
///
/// The translation integral `Σ_k h ψ_{2,a,b_k}(x) W[j][k]` is a circular
/// convolution and is evaluated through the convolution theorem. Requires an
/// admissible, energy-normalized kernel.
pub fn reconstruct_classical(
    signal: &SampledSignal,
    kernel: &WaveletKernel,
    grid: &ScaleGrid,
) -> Result<SampledSignal> {
    let report = admissibility(kernel, CLASSICAL_QUAD_TOL)?;
    let c_psi = match (report.is_admissible(), report.c_psi.finite()) {
        (true, Some(c)) => c,
        _ => {
            return Err(Error::NotAdmissible {
                psi_hat_at_zero: report.psi_hat_at_zero.norm(),
                peak: report.peak,
            })
        }
    };
    if kernel.norm() != NormMode::Energy {
        return Err(Error::Config(
            "the classical reconstruction uses the energy-normalized transform (n = 2)".into(),
        ));
    }
    if grid.layout() != ScaleLayout::Mirrored {
        return Err(Error::Config(
            "the classical reconstruction needs a mirrored grid".into(),
        ));
    }
    let w = cwt_forward(signal, kernel, grid)?;
    let sg = signal.grid();
    let n = sg.len();
    let omega = sg.omegas();
    let plan = FourierPlan::new(n);

    // Per-row spectra of Σ_k ψ_{2,a,b_k}(x) W[j][k], weighted by w_j / a_j².
    let partial: Vec<Vec<Complex64>> = w
        .values()
        .par_chunks(n)
        .enumerate()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); plan.scratch_len()],
            |scratch, (j, row)| {
                let a = grid.scale(j);
                let weight = grid.weight(j) / (a * a);
                let mut buf = row.to_vec();
                plan.forward_with_scratch(&mut buf, scratch);
                for (z, om) in buf.iter_mut().zip(&omega) {
                    *z *= kernel.eval_freq(a * om) * (a.abs().sqrt() * weight);
                }
                buf
            },
        )
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for row in &partial {
        for (s, z) in acc.iter_mut().zip(row) {
            *s += z;
        }
    }
    plan.inverse(&mut acc);
    let scale = 1.0 / (n as f64 * c_psi);
    for z in &mut acc {
        *z *= scale;
    }
    SampledSignal::on_grid(sg, acc)
}

/// Dispatches on `cfg.method`.
pub fn reconstruct(
    signal: &SampledSignal,
    kernel: &WaveletKernel,
    grid: &ScaleGrid,
    cfg: &ReconstructionConfig,
) -> Result<SampledSignal> {
    match cfg.method {
        Method::AlternativeGeneral => reconstruct_alternative(signal, kernel, grid, cfg),
        Method::AlternativeAnalytic => reconstruct_analytic(signal, kernel, grid, cfg),
        Method::Classical => reconstruct_classical(signal, kernel, grid),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{l2_norm, SignalGrid};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn window(n: usize) -> SignalGrid {
        SignalGrid::over_window(n, -20.0, 40.0).unwrap()
    }

    fn rel(a: &SampledSignal, b: &SampledSignal) -> f64 {
        let d: Vec<_> = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| x - y)
            .collect();
        l2_norm(&d) / b.norm()
    }

    #[test]
    fn central_difference_wraps() {
        let row = [c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0), c(8.0, 0.0)];
        let mut out = [c(0.0, 0.0); 4];
        central_difference(&row, 0.5, &mut out);
        assert_eq!(out, [c(-6.0, 0.0), c(3.0, 0.0), c(6.0, 0.0), c(-3.0, 0.0)]);
    }

    #[test]
    fn derivative_of_constant_row_vanishes() {
        let row = vec![c(2.5, -1.0); 16];
        let mut out = vec![c(9.0, 9.0); 16];
        central_difference(&row, 0.1, &mut out);
        assert!(out.iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn derivative_symbol_on_exact_bin() {
        let sg = SignalGrid::over_window(64, 0.0, 2.0 * PI).unwrap();
        let wc = 5.0;
        let row: Vec<_> = (0..64)
            .map(|k| Complex64::from_polar(1.0, wc * sg.x(k)))
            .collect();
        let mut out = vec![c(0.0, 0.0); 64];
        central_difference(&row, sg.step(), &mut out);
        let symbol = c(0.0, (wc * sg.step()).sin() / sg.step());
        for (d, z) in out.iter().zip(&row) {
            assert!((d - symbol * z).norm() < 1e-12);
        }
    }

    #[test]
    fn positive_only_needs_symmetry() {
        let sg = window(64);
        let f = SampledSignal::from_real_fn(sg, |x| x * (-x * x / 2.0).exp()).unwrap();
        let k = WaveletKernel::morlet(1.0, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::log_spaced(0.1, 10.0, 0.25, ScaleLayout::PositiveOnly).unwrap();
        let w = cwt_forward(&f, &k, &g).unwrap();
        let dw = d_db(&w).unwrap();
        assert!(matches!(integrate_scales(&dw, None), Err(Error::Config(_))));
        let cfg = ReconstructionConfig::new(Method::AlternativeGeneral, &k).unwrap();
        assert!(matches!(
            reconstruct_alternative(&f, &k, &g, &cfg),
            Err(Error::Config(_))
        ));
        // Morlet(1) is not even, so that symmetry is refused.
        let bad = cfg.clone().with_symmetry(ScaleSymmetry::EvenKernel);
        assert!(matches!(
            reconstruct_alternative(&f, &k, &g, &bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn symmetry_reductions_match_mirrored_grid() {
        let sg = window(512);
        let f = SampledSignal::from_real_fn(sg, |x| x * (-x * x / 2.0).exp()).unwrap();
        let cases = [
            (
                WaveletKernel::gaussian(0.5, NormMode::Amplitude).unwrap(),
                ScaleSymmetry::EvenKernel,
            ),
            (
                WaveletKernel::morlet(1.0, NormMode::Energy).unwrap(),
                ScaleSymmetry::RealSignal,
            ),
        ];
        for (k, sym) in cases {
            let mirrored = ScaleGrid::default_for(&sg, &k).unwrap();
            let half = mirrored.clone().with_layout(ScaleLayout::PositiveOnly);
            let full = scale_integral_of_derivative(&f, &k, &mirrored, None).unwrap();
            let reduced = scale_integral_of_derivative(&f, &k, &half, Some(sym)).unwrap();
            assert!(rel(&reduced, &full) < 1e-8, "{}", k.label());
        }
    }

    #[test]
    fn zero_signal_reconstructs_to_zero() {
        let sg = window(128);
        let z = SampledSignal::zeros(sg);
        let k = WaveletKernel::morlet(1.0, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::default_for(&sg, &k).unwrap();
        let cfg = ReconstructionConfig::new(Method::AlternativeGeneral, &k).unwrap();
        let out = reconstruct_alternative(&z, &k, &g, &cfg).unwrap();
        assert!(out.samples().iter().all(|s| *s == c(0.0, 0.0)));
        let cfg = ReconstructionConfig::new(Method::AlternativeAnalytic, &k).unwrap();
        let out = reconstruct_analytic(&z, &k, &g, &cfg).unwrap();
        assert!(out.samples().iter().all(|s| *s == c(0.0, 0.0)));
    }

    #[test]
    fn degenerate_kernel_is_refused() {
        let omega: Vec<f64> = (-4000..=4000).map(|i| i as f64 * 1e-3).collect();
        let t = crate::wavelets::FrequencyTable::from_fn(omega, |w| c(w * (-w * w).exp(), 0.0))
            .unwrap();
        let k = WaveletKernel::tabulated(t, NormMode::Energy).unwrap();
        assert!(matches!(
            ReconstructionConfig::new(Method::AlternativeGeneral, &k),
            Err(Error::DegenerateKernel(_))
        ));
        assert!(ReconstructionConfig::new(Method::Classical, &k).is_ok());
    }

    #[test]
    fn analytic_route_rejects_real_input() {
        let sg = window(256);
        let f = SampledSignal::from_real_fn(sg, |x| x * (-x * x / 2.0).exp()).unwrap();
        let k = WaveletKernel::morlet(1.0, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::default_for(&sg, &k).unwrap();
        let cfg = ReconstructionConfig::new(Method::AlternativeAnalytic, &k).unwrap();
        let err = reconstruct_analytic(&f, &k, &g, &cfg).unwrap_err();
        assert!(matches!(err, Error::NotAnalytic { .. }));
        assert!(err.to_string().contains("analytic_projection"));
    }

    #[test]
    fn method_mismatch_is_a_config_error() {
        let sg = window(64);
        let f = SampledSignal::zeros(sg);
        let k = WaveletKernel::morlet(1.0, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::default_for(&sg, &k).unwrap();
        let cfg = ReconstructionConfig::new(Method::AlternativeAnalytic, &k).unwrap();
        assert!(matches!(
            reconstruct_alternative(&f, &k, &g, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn one_sided_tone_is_recovered() {
        // f = e^{iω_c x}/2 on an exact bin.
        let sg = SignalGrid::over_window(512, -20.0, 40.0).unwrap();
        let wc = 10.0 * sg.frequency_step();
        let f = SampledSignal::from_fn(sg, |x| Complex64::from_polar(0.5, wc * x)).unwrap();
        let k = WaveletKernel::morlet(2.0, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::default_for(&sg, &k).unwrap();
        let cfg = ReconstructionConfig::new(Method::AlternativeAnalytic, &k).unwrap();
        let out = reconstruct_analytic(&f, &k, &g, &cfg).unwrap();
        // The discrete derivative symbol sin(ωh)/h replaces ω.
        let symbol = (wc * sg.step()).sin() / (wc * sg.step());
        for (z, s) in out.samples().iter().zip(f.samples()) {
            assert!((z.norm() - 0.5).abs() < 2e-3);
            assert!((z - s * symbol).norm() < 1e-5);
        }
    }

    #[test]
    fn known_mean_is_restored() {
        let sg = window(512);
        let f = SampledSignal::from_real_fn(sg, |x| (-x * x / 2.0).exp()).unwrap();
        let k = WaveletKernel::gaussian(0.5, NormMode::Amplitude).unwrap();
        let g = ScaleGrid::default_for(&sg, &k).unwrap();
        let cfg = ReconstructionConfig::new(Method::AlternativeGeneral, &k).unwrap();
        let zero_mean = reconstruct_alternative(&f, &k, &g, &cfg).unwrap();
        assert!(zero_mean.mean().norm() < 1e-14);
        let cfg = cfg.with_known_mean(f.mean());
        let out = reconstruct_alternative(&f, &k, &g, &cfg).unwrap();
        assert!(rel(&out, &f) < 1e-2);
    }

    #[test]
    fn classical_refuses_morlet() {
        let sg = window(128);
        let f = SampledSignal::zeros(sg);
        let k = WaveletKernel::morlet(6.0, NormMode::Energy).unwrap();
        let g = ScaleGrid::default_for(&sg, &k).unwrap();
        assert!(matches!(
            reconstruct_classical(&f, &k, &g),
            Err(Error::NotAdmissible { .. })
        ));
    }
}
