//! Analyzing kernels and admissibility diagnostics.
//!
//! Two closed-form families are provided, both with a Gaussian envelope:
//!
//! * Morlet: `ψ(x) = C e^{iω0 x} e^{-x²/2}`, `ψ̂(ω) = C√(2π) e^{-(ω-ω0)²/2}`
//! * Gaussian: `ψ(x) = C e^{-c x²}`, `ψ̂(ω) = C√(π/c) e^{-ω²/(4c)}`
//!
//! plus [`FrequencyTable`] kernels described only by samples of `ψ̂`. The
//! constant `C` is fixed by the norm mode: unit L1 mass for
//! [`NormMode::Amplitude`] and unit energy for [`NormMode::Energy`].
//!
//! Neither closed-form family is admissible: `ψ̂(0) ≠ 0` for every `ω0`
//! (it is merely tiny for `ω0 ≳ 5`) and so `C_ψ = ∫ |ψ̂|²/|ω| dω` diverges
//! logarithmically at the origin. [`admissibility`] reports this.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_real, QuadOptions};

/// Relative threshold on `|ψ̂(0)| / max|ψ̂|` separating admissible kernels.
pub const ADMISSIBILITY_TOLERANCE: f64 = 1e-12;

/// Exclusion radii around `ω = 0` used to probe the divergence of `C_ψ`.
pub const EXCLUSION_RADII: [f64; 3] = [1e-2, 1e-4, 1e-6];

/// Relative growth between successive exclusion radii that counts as divergence.
pub const DIVERGENCE_GROWTH: f64 = 0.01;

// Closed-form spectra are treated as zero once the Gaussian factor drops below e^-40.
const SPECTRAL_CUTOFF_EXPONENT: f64 = 40.0;

/// Normalization of the scaled kernel: `n = 1` divides by `|a|`, `n = 2` by `|a|^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    Amplitude,
    Energy,
}

impl NormMode {
    pub fn from_exponent(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Self::Amplitude),
            2 => Ok(Self::Energy),
            _ => Err(Error::InvalidInput(format!(
                "norm mode must be 1 or 2, got {n}"
            ))),
        }
    }

    pub fn exponent(self) -> u8 {
        match self {
            Self::Amplitude => 1,
            Self::Energy => 2,
        }
    }

    /// Factor multiplying `ψ̂*(aω)` in the frequency-domain transform.
    pub(crate) fn transform_factor(self, scale: f64) -> f64 {
        match self {
            Self::Amplitude => 1.0,
            Self::Energy => scale.abs().sqrt(),
        }
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.exponent())
    }
}

/// Samples of `ψ̂` with linear interpolation and zero extension.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    omega: Vec<f64>,
    values: Vec<Complex64>,
}

impl FrequencyTable {
    pub fn new(omega: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if omega.len() != values.len() {
            return Err(Error::Structure(format!(
                "{} frequencies but {} values",
                omega.len(),
                values.len()
            )));
        }
        if omega.len() < 2 {
            return Err(Error::InvalidInput(
                "a frequency table needs at least two rows".into(),
            ));
        }
        if omega.iter().any(|w| !w.is_finite())
            || values
                .iter()
                .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::InvalidInput(
                "frequency table has non-finite entries".into(),
            ));
        }
        if let Some(i) = omega.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(format!(
                "frequencies must be strictly increasing (row {})",
                i + 2
            )));
        }
        Ok(Self { omega, values })
    }

    pub fn from_fn(omega: Vec<f64>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = omega.iter().map(|&w| f(w)).collect();
        Self::new(omega, values)
    }

    /// Parses `omega,re[,im]` rows after a mandatory header line.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::InvalidInput(e.to_string()))?,
            None => return Err(Error::InvalidInput("kernel table is empty".into())),
        };
        if header.split(',').all(|f| f.trim().parse::<f64>().is_ok()) {
            return Err(Error::InvalidInput(
                "kernel table needs a header row (omega,re[,im])".into(),
            ));
        }
        let (mut omega, mut values) = (Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::InvalidInput(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = i + 2;
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidInput(format!("row {row}: {e}")))?;
            match fields.as_slice() {
                [w, re] => {
                    omega.push(*w);
                    values.push(Complex64::new(*re, 0.0));
                }
                [w, re, im] => {
                    omega.push(*w);
                    values.push(Complex64::new(*re, *im));
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "row {row}: expected 2 or 3 columns, found {}",
                        fields.len()
                    )))
                }
            }
        }
        Self::new(omega, values)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn eval(&self, w: f64) -> Complex64 {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&w) {
            return Complex64::new(0.0, 0.0);
        }
        let i = self.omega.partition_point(|&x| x <= w).saturating_sub(1);
        if i + 1 >= self.omega.len() {
            return self.values[self.omega.len() - 1];
        }
        let t = (w - self.omega[i]) / (self.omega[i + 1] - self.omega[i]);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Exact integral of the interpolant.
    fn integral(&self) -> Complex64 {
        self.omega
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| (v[0] + v[1]) * (0.5 * (w[1] - w[0])))
            .sum()
    }

    /// Exact integral of the squared modulus of the interpolant.
    fn energy(&self) -> f64 {
        self.omega
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| {
                let (p, q) = (v[0], v[1]);
                (w[1] - w[0]) * (p.norm_sqr() + (p * q.conj()).re + q.norm_sqr()) / 3.0
            })
            .sum()
    }

    fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    Morlet { omega0: f64 },
    Gaussian { c: f64 },
    Tabulated(FrequencyTable),
}

/// An analyzing kernel together with its normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletKernel {
    kind: KernelKind,
    norm: NormMode,
    constant: f64,
    psi0: Complex64,
}

impl WaveletKernel {
    pub fn morlet(omega0: f64, norm: NormMode) -> Result<Self> {
        if !(omega0.is_finite() && omega0 >= 0.0) {
            return Err(Error::InvalidInput(format!("ω0 must be ≥ 0, got {omega0}")));
        }
        // |ψ_M(x)| = C e^{-x²/2} for every ω0.
        let constant = envelope_constant(0.5, norm)?;
        Ok(Self {
            kind: KernelKind::Morlet { omega0 },
            norm,
            constant,
            psi0: Complex64::new(constant, 0.0),
        })
    }

    pub fn gaussian(c: f64, norm: NormMode) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidInput(format!(
                "Gaussian width c must be > 0, got {c}"
            )));
        }
        let constant = envelope_constant(c, norm)?;
        Ok(Self {
            kind: KernelKind::Gaussian { c },
            norm,
            constant,
            psi0: Complex64::new(constant, 0.0),
        })
    }

    /// Kernel defined by samples of `ψ̂`, scaled to unit energy.
    ///
    /// Only [`NormMode::Energy`] is supported: the energy follows exactly from
    /// the table by Parseval, while the L1 mass would need `ψ` in time.
    pub fn tabulated(table: FrequencyTable, norm: NormMode) -> Result<Self> {
        if norm != NormMode::Energy {
            return Err(Error::Unsupported(
                "tabulated kernels support only the energy norm (n = 2)".into(),
            ));
        }
        let energy = table.energy() / (2.0 * PI);
        if energy.is_nan() || energy <= 0.0 {
            return Err(Error::InvalidInput(
                "tabulated kernel has zero energy".into(),
            ));
        }
        let constant = 1.0 / energy.sqrt();
        let psi0 = table.integral() * (constant / (2.0 * PI));
        Ok(Self {
            kind: KernelKind::Tabulated(table),
            norm,
            constant,
            psi0,
        })
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn norm(&self) -> NormMode {
        self.norm
    }

    /// The time-domain constant `C`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// The frequency-domain constant `C₁` (peak of `ψ̂` for the closed forms).
    pub fn spectral_constant(&self) -> f64 {
        match self.kind {
            KernelKind::Morlet { .. } => self.constant * (2.0 * PI).sqrt(),
            KernelKind::Gaussian { c } => self.constant * (PI / c).sqrt(),
            KernelKind::Tabulated(_) => self.constant,
        }
    }

    /// `ψ(0)`, the quantity the derivative-based inversion divides by.
    pub fn psi0(&self) -> Complex64 {
        self.psi0
    }

    pub fn omega0(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Morlet { omega0 } => Some(omega0),
            KernelKind::Gaussian { .. } => Some(0.0),
            KernelKind::Tabulated(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            KernelKind::Morlet { omega0 } => format!("morlet(omega0={omega0})"),
            KernelKind::Gaussian { c } => format!("gaussian(c={c})"),
            KernelKind::Tabulated(t) => format!("tabulated({} rows)", t.omega.len()),
        }
    }

    /// `ψ(x)` for the closed-form kernels.
    pub fn eval_time(&self, x: f64) -> Result<Complex64> {
        match self.kind {
            KernelKind::Morlet { omega0 } => Ok(Complex64::from_polar(
                self.constant * (-0.5 * x * x).exp(),
                omega0 * x,
            )),
            KernelKind::Gaussian { c } => {
                Ok(Complex64::new(self.constant * (-c * x * x).exp(), 0.0))
            }
            KernelKind::Tabulated(_) => Err(Error::Unsupported(
                "tabulated kernels have no time-domain form".into(),
            )),
        }
    }

    /// `ψ̂(ω)` under the `e^{-iωx}` convention.
    pub fn eval_freq(&self, w: f64) -> Complex64 {
        let c1 = self.spectral_constant();
        match &self.kind {
            KernelKind::Morlet { omega0 } => {
                let d = w - omega0;
                Complex64::new(c1 * (-0.5 * d * d).exp(), 0.0)
            }
            KernelKind::Gaussian { c } => Complex64::new(c1 * (-w * w / (4.0 * c)).exp(), 0.0),
            KernelKind::Tabulated(t) => t.eval(w) * self.constant,
        }
    }

    /// `max |ψ̂|`.
    pub fn peak(&self) -> f64 {
        match &self.kind {
            KernelKind::Tabulated(t) => t.peak() * self.constant,
            _ => self.spectral_constant(),
        }
    }

    /// Frequency interval outside which `ψ̂` vanishes or is below `e^-40` of its peak.
    pub fn band(&self) -> (f64, f64) {
        match &self.kind {
            KernelKind::Morlet { omega0 } => {
                let r = (2.0 * SPECTRAL_CUTOFF_EXPONENT).sqrt();
                (omega0 - r, omega0 + r)
            }
            KernelKind::Gaussian { c } => {
                let r = (4.0 * c * SPECTRAL_CUTOFF_EXPONENT).sqrt();
                (-r, r)
            }
            KernelKind::Tabulated(t) => t.range(),
        }
    }

    /// Radius beyond which `|ψ(x)|` is below `e^-40` of `C`.
    pub(crate) fn time_radius(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Morlet { .. } => Some((2.0 * SPECTRAL_CUTOFF_EXPONENT).sqrt()),
            KernelKind::Gaussian { c } => Some((SPECTRAL_CUTOFF_EXPONENT / c).sqrt()),
            KernelKind::Tabulated(_) => None,
        }
    }

    pub fn has_real_spectrum(&self) -> bool {
        match &self.kind {
            KernelKind::Tabulated(t) => t.values.iter().all(|v| v.im == 0.0),
            _ => true,
        }
    }

    /// True when `ψ̂(-ω) = ψ̂(ω)` holds exactly.
    pub fn has_even_spectrum(&self) -> bool {
        match self.kind {
            KernelKind::Morlet { omega0 } => omega0 == 0.0,
            KernelKind::Gaussian { .. } => true,
            KernelKind::Tabulated(_) => false,
        }
    }
}

/// `C` such that `C e^{-c x²}` has unit L1 mass (n = 1) or unit energy (n = 2).
fn envelope_constant(c: f64, norm: NormMode) -> Result<f64> {
    let power = norm.exponent() as f64;
    let radius = (90.0 / (power * c)).sqrt();
    let r = integrate_real(
        |x| (-power * c * x * x).exp(),
        -radius,
        radius,
        QuadOptions::with_rel_tol(1e-14),
    );
    if !r.converged {
        return Err(Error::Numerical(format!(
            "normalization quadrature did not converge (error {:e})",
            r.error
        )));
    }
    Ok(match norm {
        NormMode::Amplitude => 1.0 / r.value.re,
        NormMode::Energy => 1.0 / r.value.re.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Admissible,
    NonAdmissible,
}

/// Value of a constant integral, or a flag when it diverges at `ω = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constant<T> {
    Finite(T),
    Divergent,
}

impl<T: Copy> Constant<T> {
    pub fn finite(&self) -> Option<T> {
        match self {
            Self::Finite(v) => Some(*v),
            Self::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Self::Divergent)
    }
}

/// Partial integral with the band `|ω| < epsilon` removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionStep<T> {
    pub epsilon: f64,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub kernel: String,
    pub psi_hat_at_zero: Complex64,
    pub peak: f64,
    pub c_psi: Constant<f64>,
    /// Partial integrals for the shrinking exclusion radii.
    pub exclusion_sequence: Vec<ExclusionStep<f64>>,
    /// Observed growth per unit of `ln(1/ε)`; tends to `2|ψ̂(0)|²` for divergent kernels.
    pub log_growth: f64,
    pub verdict: Verdict,
    /// Cross constant with a reconstruction function, when one was supplied.
    pub c_psi_g: Option<Constant<Complex64>>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.verdict == Verdict::Admissible
    }
}

/// Integral of `f` over `[lo, hi] ∖ (-eps, eps)`, split at decades so the
/// `1/|ω|` behaviour near the excluded band is resolved.
fn integrate_excluding_origin<F: Fn(f64) -> Complex64>(
    f: &F,
    lo: f64,
    hi: f64,
    eps: f64,
    opts: QuadOptions,
) -> (Complex64, f64, bool) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let mut converged = true;
    let mut side = |start: f64, end: f64, sign: f64| {
        // Integrate sign·t over t ∈ [start, end] with start ≥ eps > 0.
        let mut a = start;
        while a < end {
            let b = (a * 10.0).min(end);
            let r = integrate(|t| f(sign * t), a, b, opts);
            value += r.value;
            magnitude += r.magnitude;
            converged &= r.converged;
            a = b;
        }
    };
    if hi > eps {
        side(lo.max(eps), hi, 1.0);
    }
    if lo < -eps {
        side((-hi).max(eps), -lo, -1.0);
    }
    (value, magnitude, converged)
}

/// Diagnoses `C_ψ = ∫ |ψ̂(ω)|² / |ω| dω` for `kernel`.
///
/// The verdict follows `|ψ̂(0)|` against [`ADMISSIBILITY_TOLERANCE`] relative to
/// the spectral peak. The integral is evaluated with the shrinking exclusions
/// of [`EXCLUSION_RADII`]; it is reported divergent when `ψ̂(0)` is above
/// tolerance (the integral then grows like `2|ψ̂(0)|² ln(1/ε)`) or when the
/// partial integrals still grow by more than [`DIVERGENCE_GROWTH`].
pub fn admissibility(kernel: &WaveletKernel, quad_tol: f64) -> Result<AdmissibilityReport> {
    if !(quad_tol.is_finite() && quad_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "quad_tol must be > 0, got {quad_tol}"
        )));
    }
    let psi_hat_at_zero = kernel.eval_freq(0.0);
    let peak = kernel.peak();
    let verdict = if psi_hat_at_zero.norm() > ADMISSIBILITY_TOLERANCE * peak {
        Verdict::NonAdmissible
    } else {
        Verdict::Admissible
    };

    let (lo, hi) = kernel.band();
    let opts = QuadOptions::with_rel_tol(quad_tol);
    let integrand = |w: f64| Complex64::new(kernel.eval_freq(w).norm_sqr() / w.abs(), 0.0);
    let mut sequence = Vec::with_capacity(EXCLUSION_RADII.len());
    let mut all_converged = true;
    let mut last_magnitude = 0.0;
    for eps in EXCLUSION_RADII {
        let (value, magnitude, converged) =
            integrate_excluding_origin(&integrand, lo, hi, eps, opts);
        all_converged &= converged;
        last_magnitude = magnitude;
        sequence.push(ExclusionStep {
            epsilon: eps,
            value: value.re,
        });
    }
    if verdict == Verdict::Admissible && !all_converged {
        return Err(Error::Numerical(format!(
            "C_psi quadrature did not converge for {} (partial values {:?})",
            kernel.label(),
            sequence.iter().map(|s| s.value).collect::<Vec<_>>()
        )));
    }
    let n = sequence.len();
    let (prev, last) = (sequence[n - 2], sequence[n - 1]);
    let growth = last.value - prev.value;
    let log_growth = growth / (prev.epsilon / last.epsilon).ln();
    let grows = growth.abs() > DIVERGENCE_GROWTH * last.value.abs().max(quad_tol * last_magnitude);
    let c_psi = if verdict == Verdict::NonAdmissible || grows {
        Constant::Divergent
    } else {
        Constant::Finite(last.value)
    };
    Ok(AdmissibilityReport {
        kernel: kernel.label(),
        psi_hat_at_zero,
        peak,
        c_psi,
        exclusion_sequence: sequence,
        log_growth,
        verdict,
        c_psi_g: None,
    })
}

/// Result of [`cross_admissibility`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossReport {
    pub value: Constant<Complex64>,
    pub exclusion_sequence: Vec<ExclusionStep<Complex64>>,
}

/// `C_{ψ,g} = ∫ |ω|^{-1} conj(ψ̂(ω)) ĝ(ω) dω`, integrated over the band of `ψ̂`.
///
/// `g_freq` is the reconstruction function in the frequency domain, e.g.
/// `|w| Complex64::new(0.0, w)` for the derivative of the Dirac delta.
pub fn cross_admissibility(
    psi: &WaveletKernel,
    g_freq: impl Fn(f64) -> Complex64,
    quad_tol: f64,
) -> Result<CrossReport> {
    if !(quad_tol.is_finite() && quad_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "quad_tol must be > 0, got {quad_tol}"
        )));
    }
    let (lo, hi) = psi.band();
    let opts = QuadOptions::with_rel_tol(quad_tol);
    let integrand = |w: f64| psi.eval_freq(w).conj() * g_freq(w) / w.abs();

    let mut sequence = Vec::with_capacity(EXCLUSION_RADII.len());
    let mut last_magnitude = 0.0;
    for eps in EXCLUSION_RADII {
        let (value, magnitude, converged) =
            integrate_excluding_origin(&integrand, lo, hi, eps, opts);
        if !converged {
            return Err(Error::Numerical(format!(
                "C_psi_g quadrature did not converge at epsilon = {eps:e}"
            )));
        }
        last_magnitude = magnitude;
        sequence.push(ExclusionStep {
            epsilon: eps,
            value,
        });
    }
    let n = sequence.len();
    let growth = (sequence[n - 1].value - sequence[n - 2].value).norm();
    let grows =
        growth > DIVERGENCE_GROWTH * sequence[n - 1].value.norm().max(quad_tol * last_magnitude);

    let g_scale = (0..=1000)
        .map(|i| g_freq(lo + (hi - lo) * i as f64 / 1000.0).norm())
        .fold(0.0, f64::max);
    let at_origin = psi.eval_freq(0.0).norm() > ADMISSIBILITY_TOLERANCE * psi.peak()
        && g_freq(0.0).norm() > ADMISSIBILITY_TOLERANCE * g_scale;

    let value = if grows || at_origin {
        Constant::Divergent
    } else {
        Constant::Finite(sequence[n - 1].value)
    };
    Ok(CrossReport {
        value,
        exclusion_sequence: sequence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODES: [NormMode; 2] = [NormMode::Amplitude, NormMode::Energy];

    fn abs_moment(k: &WaveletKernel, power: i32) -> f64 {
        let r = integrate_real(
            |x| k.eval_time(x).unwrap().norm().powi(power),
            -40.0,
            40.0,
            QuadOptions::with_rel_tol(1e-13),
        );
        r.value.re
    }

    #[test]
    fn normalization_holds_across_omega0() {
        for w0 in [0.0, 0.5, 1.0, 2.0, 5.0, 6.0, 10.0] {
            for norm in MODES {
                let k = WaveletKernel::morlet(w0, norm).unwrap();
                let m = abs_moment(&k, norm.exponent() as i32);
                assert!((m - 1.0).abs() < 1e-8, "ω0={w0} n={norm}: {m}");
                assert_eq!(k.psi0(), k.eval_time(0.0).unwrap());
            }
        }
    }

    #[test]
    fn morlet_energy_constant() {
        let k = WaveletKernel::morlet(5.0, NormMode::Energy).unwrap();
        assert!((k.constant() - PI.powf(-0.25)).abs() < 1e-8);
        let z = k.eval_time(0.0).unwrap();
        assert_eq!(z.im, 0.0);
        assert!(z.re > 0.0);
    }

    #[test]
    fn gaussian_amplitude_constant() {
        let k = WaveletKernel::gaussian(0.5, NormMode::Amplitude).unwrap();
        assert!((k.constant() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-14);
        for c in [0.1, 0.5, 3.0] {
            for norm in MODES {
                let k = WaveletKernel::gaussian(c, norm).unwrap();
                let m = abs_moment(&k, norm.exponent() as i32);
                assert!((m - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn morlet_spectrum_values() {
        let k = WaveletKernel::morlet(5.0, NormMode::Amplitude).unwrap();
        let c1 = k.spectral_constant();
        let at_zero = k.eval_freq(0.0).re / c1;
        assert!((at_zero - (-12.5f64).exp()).abs() < 1e-18);
        assert!((at_zero - 3.726_653e-6).abs() < 1e-11);
        assert_eq!(k.eval_freq(5.0).re, c1);
        assert_eq!(k.peak(), c1);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(WaveletKernel::morlet(-1.0, NormMode::Energy).is_err());
        assert!(WaveletKernel::gaussian(0.0, NormMode::Energy).is_err());
        assert!(NormMode::from_exponent(3).is_err());
        let err = WaveletKernel::morlet(-1.0, NormMode::Energy).unwrap_err();
        assert!(err.to_string().contains("ω0 must be ≥ 0"));
    }

    #[test]
    fn table_interpolates_linearly_with_zero_extension() {
        let t = FrequencyTable::new(
            vec![-1.0, 0.0, 2.0],
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(3.0, 1.0),
                Complex64::new(-1.0, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(t.eval(-0.5), Complex64::new(2.0, 0.5));
        assert_eq!(t.eval(1.0), Complex64::new(1.0, 0.5));
        assert_eq!(t.eval(2.0), Complex64::new(-1.0, 0.0));
        assert_eq!(t.eval(2.5), Complex64::new(0.0, 0.0));
        assert_eq!(t.eval(-1.5), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn table_rejects_unsorted_and_headerless_csv() {
        assert!(FrequencyTable::new(vec![0.0, 0.0], vec![Complex64::default(); 2]).is_err());
        let no_header = "0,1\n1,2\n";
        assert!(FrequencyTable::from_csv_reader(no_header.as_bytes()).is_err());
        let bad_cols = "omega,re\n0,1,2,3\n";
        assert!(FrequencyTable::from_csv_reader(bad_cols.as_bytes()).is_err());
        let ok = "omega,re,im\n-1,0,0\n0,1,0.5\n1,0,0\n";
        let t = FrequencyTable::from_csv_reader(ok.as_bytes()).unwrap();
        assert_eq!(t.eval(0.0), Complex64::new(1.0, 0.5));
    }

    #[test]
    fn tabulated_needs_energy_norm() {
        let t = FrequencyTable::from_fn(vec![-1.0, 0.0, 1.0], |w| Complex64::new(w, 0.0)).unwrap();
        assert!(matches!(
            WaveletKernel::tabulated(t.clone(), NormMode::Amplitude),
            Err(Error::Unsupported(_))
        ));
        let k = WaveletKernel::tabulated(t, NormMode::Energy).unwrap();
        assert!(matches!(k.eval_time(0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn tabulated_energy_is_unit() {
        let omega: Vec<f64> = (-6000..=6000).map(|i| i as f64 * 1e-3).collect();
        let t =
            FrequencyTable::from_fn(omega, |w| Complex64::new(w * (-w * w).exp(), 0.0)).unwrap();
        let k = WaveletKernel::tabulated(t, NormMode::Energy).unwrap();
        let r = integrate_real(
            |w| k.eval_freq(w).norm_sqr(),
            -6.0,
            6.0,
            QuadOptions::default(),
        );
        assert!((r.value.re / (2.0 * PI) - 1.0).abs() < 1e-6);
        // odd spectrum: ψ(0) = 0
        assert!(k.psi0().norm() < 1e-12);
    }

    #[test]
    fn morlet_and_gaussian_are_not_admissible() {
        for k in [
            WaveletKernel::morlet(6.0, NormMode::Energy).unwrap(),
            WaveletKernel::morlet(0.0, NormMode::Amplitude).unwrap(),
            WaveletKernel::gaussian(0.5, NormMode::Energy).unwrap(),
            WaveletKernel::gaussian(2.0, NormMode::Amplitude).unwrap(),
        ] {
            let r = admissibility(&k, 1e-10).unwrap();
            assert_eq!(r.verdict, Verdict::NonAdmissible, "{}", k.label());
            assert!(r.c_psi.is_divergent());
        }
    }

    #[test]
    fn gaussian_divergence_grows_logarithmically() {
        let k = WaveletKernel::gaussian(0.5, NormMode::Amplitude).unwrap();
        let r = admissibility(&k, 1e-10).unwrap();
        let expect = 2.0 * r.psi_hat_at_zero.norm_sqr();
        assert!((r.log_growth - expect).abs() < 1e-6 * expect);
        let values: Vec<f64> = r.exclusion_sequence.iter().map(|s| s.value).collect();
        assert!(values[0] < values[1] && values[1] < values[2]);
    }

    #[test]
    fn admissibility_rejects_bad_tolerance() {
        let k = WaveletKernel::morlet(1.0, NormMode::Energy).unwrap();
        assert!(admissibility(&k, 0.0).is_err());
        assert!(cross_admissibility(&k, |w| Complex64::new(0.0, w), -1.0).is_err());
    }

    #[test]
    fn cross_constant_of_self_equals_c_psi() {
        // Even, real, admissible spectrum ω² e^{-ω²}.
        let omega: Vec<f64> = (-7000..=7000).map(|i| i as f64 * 1e-3).collect();
        let t = FrequencyTable::from_fn(omega, |w| Complex64::new(w * w * (-w * w).exp(), 0.0))
            .unwrap();
        let k = WaveletKernel::tabulated(t, NormMode::Energy).unwrap();
        let report = admissibility(&k, 1e-10).unwrap();
        let c_psi = report.c_psi.finite().unwrap();
        let cross = cross_admissibility(&k, |w| k.eval_freq(w), 1e-10).unwrap();
        let v = cross.value.finite().unwrap();
        assert!(v.im.abs() < 1e-12 * c_psi);
        assert!((v.re - c_psi).abs() < 1e-9 * c_psi);
    }

    #[test]
    fn morlet_self_cross_constant_diverges() {
        let k = WaveletKernel::morlet(6.0, NormMode::Energy).unwrap();
        let cross = cross_admissibility(&k, |w| k.eval_freq(w), 1e-10).unwrap();
        assert!(cross.value.is_divergent());
    }
}
