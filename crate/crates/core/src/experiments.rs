//! Error metrics, convergence studies and the central-frequency sweep.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cwt::{cwt_forward, ScaleGrid, ScaleLayout, DEFAULT_OCTAVE_STEP};
use crate::error::{Error, Result};
use crate::inversion::{d_db, reconstruct, Method, ReconstructionConfig};
use crate::spectral::{
    analytic_projection, forward_spectrum, inverse_spectrum, l2_norm, SampledSignal, SignalGrid,
};
use crate::wavelets::{admissibility, FrequencyTable, NormMode, WaveletKernel};

/// Largest central frequency accepted by [`omega0_sweep`].
pub const MAX_SWEEP_OMEGA0: f64 = 20.0;

/// Consecutive refinements improving by less than this fraction mark the
/// truncation floor of a convergence sweep.
pub const FLOOR_IMPROVEMENT: f64 = 0.1;

/// Grid and method metadata attached to an error measurement.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunDescriptor {
    pub n: usize,
    pub h: f64,
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub delta: Option<f64>,
    pub omega0: Option<f64>,
    pub method: Option<String>,
}

impl RunDescriptor {
    pub fn with_grid(mut self, grid: &ScaleGrid) -> Self {
        self.a_min = Some(grid.a_min());
        self.a_max = Some(grid.a_max());
        self.delta = grid.octave_step();
        self
    }

    pub fn with_omega0(mut self, omega0: Option<f64>) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_method(mut self, method: impl Into<String>) -> Self {
        self.method = Some(method.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub rel_l2: f64,
    pub max_abs: f64,
    pub mean_removed: bool,
    pub run: RunDescriptor,
}

/// Compares a reconstruction against its reference.
///
/// `rel_l2 = ‖f_rec − f‖₂ / ‖f‖₂`; the denominator is always the reference,
/// so the metric is not symmetric in its arguments. With `mean_removed` both
/// signals are centred first.
pub fn compare(
    f: &SampledSignal,
    f_rec: &SampledSignal,
    mean_removed: bool,
) -> Result<ErrorReport> {
    if f.grid() != f_rec.grid() {
        return Err(Error::Structure(
            "compared signals live on different grids".into(),
        ));
    }
    let (mf, mr) = if mean_removed {
        (f.mean(), f_rec.mean())
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    };
    let reference: Vec<Complex64> = f.samples().iter().map(|z| z - mf).collect();
    let diff: Vec<Complex64> = f_rec
        .samples()
        .iter()
        .zip(&reference)
        .map(|(r, z)| r - mr - z)
        .collect();
    let denom = l2_norm(&reference);
    if denom == 0.0 {
        return Err(Error::InvalidInput("reference signal has zero norm".into()));
    }
    let grid = f.grid();
    Ok(ErrorReport {
        rel_l2: l2_norm(&diff) / denom,
        max_abs: diff.iter().map(|z| z.norm()).fold(0.0, f64::max),
        mean_removed,
        run: RunDescriptor {
            n: grid.len(),
            h: grid.step(),
            ..RunDescriptor::default()
        },
    })
}

/// Exact derivative of the trigonometric interpolant (Nyquist bin dropped).
/// Used only as a reference for the finite-difference derivative.
pub fn spectral_derivative(signal: &SampledSignal) -> SampledSignal {
    let mut spec = forward_spectrum(signal);
    let grid = spec.grid();
    let omega = spec.omega().to_vec();
    for (m, (b, w)) in spec.bins_mut().iter_mut().zip(omega).enumerate() {
        *b *= if grid.is_nyquist(m) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, w)
        };
    }
    inverse_spectrum(&spec).expect("spectrum of a valid signal")
}

/// Physical window `[x0, x0 + width)` shared by every resolution of a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub width: f64,
}

impl Default for Window {
    fn default() -> Self {
        Self {
            x0: -20.0,
            width: 40.0,
        }
    }
}

impl Window {
    pub fn grid(&self, n: usize) -> Result<SignalGrid> {
        SignalGrid::over_window(n, self.x0, self.width)
    }
}

/// Built-in test signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestSignal {
    /// `e^{-x²/2}`
    Gaussian,
    /// `x e^{-x²/2}`, zero mean.
    GaussianDerivative,
    /// Analytic projection of `e^{i·carrier·x} e^{-x²/2}`.
    ModulatedGaussian { carrier: f64 },
    /// Two narrow Gaussian pulses, `e^{-(x+3)²/(2σ²)} + e^{-(x-4)²/(2σ²)}`, `σ = 1/2`.
    SpikeTrain,
}

impl TestSignal {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::GaussianDerivative => "gaussian-derivative",
            Self::ModulatedGaussian { .. } => "modulated-gaussian",
            Self::SpikeTrain => "spike-train",
        }
    }

    pub fn sample(&self, grid: SignalGrid) -> Result<SampledSignal> {
        match *self {
            Self::Gaussian => SampledSignal::from_real_fn(grid, |x| (-x * x / 2.0).exp()),
            Self::GaussianDerivative => {
                SampledSignal::from_real_fn(grid, |x| x * (-x * x / 2.0).exp())
            }
            Self::ModulatedGaussian { carrier } => {
                let raw = SampledSignal::from_fn(grid, |x| {
                    Complex64::from_polar((-x * x / 2.0).exp(), carrier * x)
                })?;
                Ok(analytic_projection(&raw))
            }
            Self::SpikeTrain => {
                let pulse = |x: f64, c: f64| (-(x - c) * (x - c) / (2.0 * 0.25)).exp();
                SampledSignal::from_real_fn(grid, |x| pulse(x, -3.0) + pulse(x, 4.0))
            }
        }
    }
}

/// Kernel family before normalization.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Morlet { omega0: f64 },
    Gaussian { c: f64 },
    Tabulated(FrequencyTable),
}

impl KernelSpec {
    pub fn build(&self, norm: NormMode) -> Result<WaveletKernel> {
        match self {
            Self::Morlet { omega0 } => WaveletKernel::morlet(*omega0, norm),
            Self::Gaussian { c } => WaveletKernel::gaussian(*c, norm),
            Self::Tabulated(t) => WaveletKernel::tabulated(t.clone(), norm),
        }
    }
}

/// Scale-grid recipe, resolved per signal grid and kernel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum GridSpec {
    /// [`ScaleGrid::default_for`].
    #[default]
    Default,
    /// Log-spaced grid; unset bounds fall back to the defaults.
    LogSpaced {
        a_min: Option<f64>,
        a_max: Option<f64>,
        octave_step: f64,
        layout: ScaleLayout,
    },
}

impl GridSpec {
    pub fn resolve(&self, signal: &SignalGrid, kernel: &WaveletKernel) -> Result<ScaleGrid> {
        match *self {
            Self::Default => ScaleGrid::default_for(signal, kernel),
            Self::LogSpaced {
                a_min,
                a_max,
                octave_step,
                layout,
            } => {
                let base = ScaleGrid::default_for(signal, kernel)?;
                ScaleGrid::log_spaced(
                    a_min.unwrap_or(base.a_min()),
                    a_max.unwrap_or(base.a_max()),
                    octave_step,
                    layout,
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTarget {
    /// Finite-difference `∂_b W` against the spectral derivative of the same rows.
    Derivative,
    Reconstruction(Method),
}

/// One configuration evaluated at several resolutions over a fixed window.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub signal: TestSignal,
    pub kernel: KernelSpec,
    pub norm: NormMode,
    pub window: Window,
    pub grid: GridSpec,
    pub target: SweepTarget,
}

impl SweepCase {
    pub fn new(signal: TestSignal, kernel: KernelSpec, target: SweepTarget) -> Self {
        Self {
            signal,
            kernel,
            norm: NormMode::Amplitude,
            window: Window::default(),
            grid: GridSpec::Default,
            target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorReport>,
    /// Least-squares slope of `ln(error)` against `ln(h)` above the floor.
    pub observed_order: Option<f64>,
    pub fitted_points: usize,
}

/// Scales probed by the derivative-only sweep.
const DERIVATIVE_PROBE_SCALES: [f64; 3] = [0.5, 1.0, 2.0];

fn derivative_error(signal: &SampledSignal, kernel: &WaveletKernel) -> Result<ErrorReport> {
    let weights = vec![1.0; DERIVATIVE_PROBE_SCALES.len()];
    let grid = ScaleGrid::new(
        DERIVATIVE_PROBE_SCALES.to_vec(),
        weights,
        ScaleLayout::PositiveOnly,
    )?;
    let w = cwt_forward(signal, kernel, &grid)?;
    let fd = d_db(&w)?;
    let sg = signal.grid();
    let (mut num, mut den) = (0.0, 0.0);
    let mut max_abs: f64 = 0.0;
    for (j, row) in w.rows().enumerate() {
        let exact = spectral_derivative(&SampledSignal::on_grid(sg, row.to_vec())?);
        for (a, b) in fd.row(j).iter().zip(exact.samples()) {
            let d = (a - b).norm();
            num += d * d;
            den += b.norm_sqr();
            max_abs = max_abs.max(d);
        }
    }
    Ok(ErrorReport {
        rel_l2: (num / den).sqrt(),
        max_abs,
        mean_removed: false,
        run: RunDescriptor {
            n: sg.len(),
            h: sg.step(),
            ..RunDescriptor::default()
        }
        .with_grid(&grid)
        .with_omega0(kernel.omega0())
        .with_method("d_db"),
    })
}

/// Reconstructs `signal` with `method` and compares against it.
///
/// The derivative routes cannot see the mean, so their error is measured
/// with the mean removed from both signals.
pub fn reconstruction_error(
    signal: &SampledSignal,
    kernel: &WaveletKernel,
    grid: &ScaleGrid,
    method: Method,
) -> Result<ErrorReport> {
    let cfg = ReconstructionConfig::new(method, kernel)?;
    let rec = reconstruct(signal, kernel, grid, &cfg)?;
    let mean_removed = method != Method::Classical;
    let mut report = compare(signal, &rec, mean_removed)?;
    report.run = report
        .run
        .with_grid(grid)
        .with_omega0(kernel.omega0())
        .with_method(method.name());
    Ok(report)
}

/// Runs `case` at every resolution in `resolutions` (strictly increasing).
pub fn convergence_sweep(case: &SweepCase, resolutions: &[usize]) -> Result<ConvergenceTable> {
    if resolutions.is_empty() {
        return Err(Error::InvalidInput("no resolutions given".into()));
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "resolutions must be strictly increasing".into(),
        ));
    }
    let kernel = case.kernel.build(case.norm)?;
    let rows = resolutions
        .iter()
        .map(|&n| {
            let sg = case.window.grid(n)?;
            let signal = case.signal.sample(sg)?;
            match case.target {
                SweepTarget::Derivative => derivative_error(&signal, &kernel),
                SweepTarget::Reconstruction(method) => {
                    let grid = case.grid.resolve(&sg, &kernel)?;
                    reconstruction_error(&signal, &kernel, &grid, method)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (observed_order, fitted_points) = fit_order(&rows);
    Ok(ConvergenceTable {
        rows,
        observed_order,
        fitted_points,
    })
}

/// Slope of `ln(rel_l2)` against `ln(h)` over the leading run of points that
/// each improve on their predecessor by at least [`FLOOR_IMPROVEMENT`].
pub fn fit_order(rows: &[ErrorReport]) -> (Option<f64>, usize) {
    let mut used = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.rel_l2.is_nan() || r.rel_l2 <= 0.0 {
            break;
        }
        if i > 0 && r.rel_l2 >= (1.0 - FLOOR_IMPROVEMENT) * rows[i - 1].rel_l2 {
            break;
        }
        used = i + 1;
    }
    if used < 2 {
        return (None, used);
    }
    let pts: Vec<(f64, f64)> = rows[..used]
        .iter()
        .map(|r| (r.run.h.ln(), r.rel_l2.ln()))
        .collect();
    let m = used as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (Some(sxy / sxx), used)
}

/// Outcome of the classical method in a sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalStatus {
    NotAdmissible,
    RelL2(f64),
}

impl std::fmt::Display for ClassicalStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotAdmissible => write!(f, "N/A (non-admissible)"),
            Self::RelL2(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Omega0Row {
    pub omega0: f64,
    pub report: ErrorReport,
    pub classical: ClassicalStatus,
}

/// General-route reconstruction error of `signal` for each Morlet central
/// frequency in `omega0_list` (`ω0 = 0` is the pure Gaussian kernel).
/// The classical column uses the energy-normalized kernel and is filled only
/// when that kernel passes the admissibility check.
///
/// Rows are computed in parallel and returned in input order.
pub fn omega0_sweep(
    signal: &SampledSignal,
    omega0_list: &[f64],
    grid: &GridSpec,
    norm: NormMode,
) -> Result<Vec<Omega0Row>> {
    if let Some(w) = omega0_list
        .iter()
        .find(|w| !(w.is_finite() && (0.0..=MAX_SWEEP_OMEGA0).contains(*w)))
    {
        return Err(Error::InvalidInput(format!(
            "ω0 = {w} outside [0, {MAX_SWEEP_OMEGA0}]"
        )));
    }
    let sg = signal.grid();
    omega0_list
        .par_iter()
        .map(|&omega0| {
            let kernel = WaveletKernel::morlet(omega0, norm)?;
            let scales = grid.resolve(&sg, &kernel)?;
            let report =
                reconstruction_error(signal, &kernel, &scales, Method::AlternativeGeneral)?;
            let energy = WaveletKernel::morlet(omega0, NormMode::Energy)?;
            let classical = if admissibility(&energy, 1e-10)?.is_admissible() {
                let scales = grid.resolve(&sg, &energy)?;
                let r = reconstruction_error(signal, &energy, &scales, Method::Classical)?;
                ClassicalStatus::RelL2(r.rel_l2)
            } else {
                ClassicalStatus::NotAdmissible
            };
            Ok(Omega0Row {
                omega0,
                report,
                classical,
            })
        })
        .collect()
}

/// Default octave step, re-exported for table headers.
pub const DEFAULT_DELTA: f64 = DEFAULT_OCTAVE_STEP;

const REPORT_HEADER: &str = "n,h,a_min,a_max,delta,omega0,method,rel_l2,max_abs,mean_removed";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn report_fields(r: &ErrorReport) -> String {
    let run = &r.run;
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        run.n,
        run.h,
        opt(run.a_min),
        opt(run.a_max),
        opt(run.delta),
        opt(run.omega0),
        run.method.as_deref().unwrap_or(""),
        r.rel_l2,
        r.max_abs,
        r.mean_removed
    )
}

/// Writes reports as CSV, one row each, with shortest round-trip floats.
pub fn write_reports_csv<'a>(
    mut w: impl Write,
    reports: impl IntoIterator<Item = &'a ErrorReport>,
) -> io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", report_fields(r))?;
    }
    Ok(())
}

impl ConvergenceTable {
    pub fn write_csv(&self, w: impl Write) -> io::Result<()> {
        write_reports_csv(w, &self.rows)
    }
}

/// Writes an ω0 sweep as CSV with a trailing `classical` column.
pub fn write_omega0_csv(mut w: impl Write, rows: &[Omega0Row]) -> io::Result<()> {
    writeln!(w, "{REPORT_HEADER},classical")?;
    for row in rows {
        writeln!(w, "{},{}", report_fields(&row.report), row.classical)?;
    }
    Ok(())
}
