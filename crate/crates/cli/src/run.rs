//! Command execution.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use wavinv::cwt::{cwt_forward, ScaleGrid};
use wavinv::error::Error;
use wavinv::experiments::{
    compare, convergence_sweep, omega0_sweep, write_omega0_csv, ErrorReport, KernelSpec, SweepCase,
};
use wavinv::inversion::{reconstruct, Method, ReconstructionConfig};
use wavinv::spectral::{SampledSignal, SignalGrid};
use wavinv::wavelets::{
    admissibility, cross_admissibility, FrequencyTable, NormMode, WaveletKernel,
};

use crate::config::{Command, Format, KernelChoice, RunConfig, SignalSource};
use crate::output::FileRecord;

/// Largest relative deviation of the sample spacing in a signal CSV.
pub const SPACING_TOLERANCE: f64 = 1e-9;

/// Files produced by a command, in write order.
pub type Outputs = Vec<(String, Vec<u8>)>;

/// Reads `x, re[, im]` rows; a non-numeric first row is taken as a header.
pub fn read_signal_csv(path: &Path) -> Result<SampledSignal> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let (mut xs, mut values) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let fields: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let fields = match fields {
            Ok(f) => f,
            Err(_) if i == 0 => continue,
            Err(e) => bail!("{} row {}: {e}", path.display(), i + 1),
        };
        match fields.as_slice() {
            [x, re] => {
                xs.push(*x);
                values.push(Complex64::new(*re, 0.0));
            }
            [x, re, im] => {
                xs.push(*x);
                values.push(Complex64::new(*re, *im));
            }
            _ => bail!(
                "{} row {}: expected 2 or 3 columns, found {}",
                path.display(),
                i + 1,
                fields.len()
            ),
        }
    }
    if xs.len() < 4 {
        bail!(
            "{}: need at least 4 samples, found {}",
            path.display(),
            xs.len()
        );
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if let Some(k) = xs
        .windows(2)
        .position(|w| ((w[1] - w[0]) - h).abs() > SPACING_TOLERANCE * h.abs())
    {
        bail!(
            "{}: spacing between rows {} and {} is {}, expected uniform {h} (tolerance {SPACING_TOLERANCE:e} relative)",
            path.display(),
            k + 1,
            k + 2,
            xs[k + 1] - xs[k]
        );
    }
    Ok(SampledSignal::new(values, xs[0], h)?)
}

fn load_signal(cfg: &RunConfig) -> Result<SampledSignal> {
    match &cfg.signal {
        SignalSource::Csv(path) => read_signal_csv(path),
        SignalSource::Builtin(s) => {
            let grid = SignalGrid::over_window(cfg.n, cfg.window.x0, cfg.window.width)?;
            Ok(s.sample(grid)?)
        }
    }
}

fn kernel_spec(cfg: &RunConfig) -> Result<KernelSpec> {
    Ok(match &cfg.kernel {
        KernelChoice::Spec(s) => s.clone(),
        KernelChoice::Table(path) => KernelSpec::Tabulated(FrequencyTable::from_csv_path(path)?),
    })
}

fn describe(report: &mut ErrorReport, grid: &ScaleGrid, kernel: &WaveletKernel, method: Method) {
    let run = std::mem::take(&mut report.run);
    report.run = run
        .with_grid(grid)
        .with_omega0(kernel.omega0())
        .with_method(method.name());
}

fn reconstruct_and_compare(
    cfg: &RunConfig,
    signal: &SampledSignal,
    kernel: &WaveletKernel,
    method: Method,
) -> Result<(SampledSignal, ErrorReport)> {
    let grid = cfg.grid.resolve(&signal.grid(), kernel)?;
    let mut rc = ReconstructionConfig::new(method, kernel)?;
    if let Some(mean) = cfg.known_mean {
        rc = rc.with_known_mean(mean);
    }
    if let Some(s) = cfg.symmetry {
        rc = rc.with_symmetry(s);
    }
    let rec = reconstruct(signal, kernel, &grid, &rc)?;
    let mean_removed = method != Method::Classical && cfg.known_mean.is_none();
    let mut report = compare(signal, &rec, mean_removed)?;
    describe(&mut report, &grid, kernel, method);
    Ok((rec, report))
}

fn json(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn transform(cfg: &RunConfig) -> Result<Outputs> {
    let signal = load_signal(cfg)?;
    let kernel = kernel_spec(cfg)?.build(cfg.norm)?;
    let grid = cfg.grid.resolve(&signal.grid(), &kernel)?;
    let w = cwt_forward(&signal, &kernel, &grid)?;
    let mut out = Vec::new();
    for format in &cfg.formats {
        let mut bytes = Vec::new();
        match format {
            Format::Csv => {
                w.write_csv(&mut bytes)?;
                out.push(("scalogram.csv".to_string(), bytes));
            }
            Format::Binary => {
                w.write_binary(&mut bytes)?;
                out.push(("scalogram.wrec1".to_string(), bytes));
            }
        }
    }
    Ok(out)
}

fn reconstruction_csv(f: &SampledSignal, rec: &SampledSignal) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "re_f", "im_f", "re_rec", "im_rec"])?;
    let grid = f.grid();
    for (k, (a, b)) in f.samples().iter().zip(rec.samples()).enumerate() {
        w.write_record([grid.x(k), a.re, a.im, b.re, b.im].map(|v| v.to_string()))?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

fn reconstruct_cmd(cfg: &RunConfig) -> Result<Outputs> {
    let signal = load_signal(cfg)?;
    let kernel = kernel_spec(cfg)?.build(cfg.norm)?;
    let (rec, report) = reconstruct_and_compare(cfg, &signal, &kernel, cfg.method)?;
    Ok(vec![
        (
            "reconstruction.csv".into(),
            reconstruction_csv(&signal, &rec)?,
        ),
        ("error_report.json".into(), json(&report)?),
    ])
}

#[derive(Debug, Serialize)]
struct MethodRow {
    method: &'static str,
    status: String,
    report: Option<ErrorReport>,
}

fn compare_methods(cfg: &RunConfig) -> Result<Outputs> {
    let signal = load_signal(cfg)?;
    let spec = kernel_spec(cfg)?;
    let kernel = spec.build(cfg.norm)?;
    let energy = spec.build(NormMode::Energy)?;
    let mut rows = Vec::new();
    for method in [
        Method::AlternativeGeneral,
        Method::AlternativeAnalytic,
        Method::Classical,
    ] {
        let k = if method == Method::Classical {
            &energy
        } else {
            &kernel
        };
        let outcome = reconstruct_and_compare(cfg, &signal, k, method);
        let row = match outcome {
            Ok((_, report)) => MethodRow {
                method: method.name(),
                status: "ok".into(),
                report: Some(report),
            },
            Err(e) => match e.downcast_ref::<Error>() {
                Some(Error::NotAdmissible { .. }) => MethodRow {
                    method: method.name(),
                    status: "N/A (non-admissible)".into(),
                    report: None,
                },
                Some(Error::DegenerateKernel(_)) => MethodRow {
                    method: method.name(),
                    status: "N/A (psi(0) = 0)".into(),
                    report: None,
                },
                Some(Error::NotAnalytic { .. }) => MethodRow {
                    method: method.name(),
                    status: "N/A (not analytic)".into(),
                    report: None,
                },
                _ => return Err(e.context(format!("method {}", method.name()))),
            },
        };
        rows.push(row);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "status",
        "n",
        "h",
        "a_min",
        "a_max",
        "delta",
        "omega0",
        "rel_l2",
        "max_abs",
        "mean_removed",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in &rows {
        let mut record = vec![row.method.to_string(), row.status.clone()];
        match &row.report {
            Some(r) => record.extend([
                r.run.n.to_string(),
                r.run.h.to_string(),
                opt(r.run.a_min),
                opt(r.run.a_max),
                opt(r.run.delta),
                opt(r.run.omega0),
                r.rel_l2.to_string(),
                r.max_abs.to_string(),
                r.mean_removed.to_string(),
            ]),
            None => record.extend(std::iter::repeat(String::new()).take(9)),
        }
        w.write_record(&record)?;
    }
    let table = w.into_inner().map_err(|e| anyhow!("{e}"))?;
    Ok(vec![
        ("methods.csv".into(), table),
        ("methods.json".into(), json(&rows)?),
    ])
}

fn sweep_omega0(cfg: &RunConfig) -> Result<Outputs> {
    let signal = load_signal(cfg)?;
    let rows = omega0_sweep(&signal, &cfg.omega0_list, &cfg.grid, cfg.norm)?;
    let mut bytes = Vec::new();
    write_omega0_csv(&mut bytes, &rows)?;
    Ok(vec![("omega0_sweep.csv".into(), bytes)])
}

#[derive(Serialize)]
struct ConvergenceSummary {
    signal: &'static str,
    kernel: String,
    target: String,
    resolutions: Vec<usize>,
    observed_order: Option<f64>,
    fitted_points: usize,
}

fn sweep_convergence(cfg: &RunConfig) -> Result<Outputs> {
    let SignalSource::Builtin(signal) = cfg.signal else {
        bail!("sweep-convergence needs a built-in signal");
    };
    let kernel = kernel_spec(cfg)?;
    let case = SweepCase {
        signal,
        kernel: kernel.clone(),
        norm: cfg.norm,
        window: cfg.window,
        grid: cfg.grid,
        target: cfg.target,
    };
    let table = convergence_sweep(&case, &cfg.resolutions)?;
    let mut bytes = Vec::new();
    table.write_csv(&mut bytes)?;
    let summary = ConvergenceSummary {
        signal: signal.name(),
        kernel: kernel.build(cfg.norm)?.label(),
        target: match cfg.target {
            wavinv::experiments::SweepTarget::Derivative => "derivative".into(),
            wavinv::experiments::SweepTarget::Reconstruction(m) => m.name().into(),
        },
        resolutions: cfg.resolutions.clone(),
        observed_order: table.observed_order,
        fitted_points: table.fitted_points,
    };
    Ok(vec![
        ("convergence.csv".into(), bytes),
        ("convergence.json".into(), json(&summary)?),
    ])
}

fn diagnose_kernel(cfg: &RunConfig) -> Result<Outputs> {
    let kernel = kernel_spec(cfg)?.build(cfg.norm)?;
    let mut report = admissibility(&kernel, cfg.quad_tol)?;
    if cfg.cross {
        let cross = cross_admissibility(&kernel, |w| Complex64::new(0.0, w), cfg.quad_tol)?;
        report.c_psi_g = Some(cross.value);
    }
    Ok(vec![("admissibility.json".into(), json(&report)?)])
}

/// Computes every output of `cfg` in memory; nothing touches the disk here.
pub fn execute(cfg: &RunConfig) -> Result<Outputs> {
    match cfg.command {
        Command::Transform => transform(cfg),
        Command::Reconstruct => reconstruct_cmd(cfg),
        Command::CompareMethods => compare_methods(cfg),
        Command::SweepOmega0 => sweep_omega0(cfg),
        Command::SweepConvergence => sweep_convergence(cfg),
        Command::DiagnoseKernel => diagnose_kernel(cfg),
    }
    .with_context(|| format!("{} failed", cfg.command))
}

/// Checksums of the files a config reads.
pub fn input_records(cfg: &RunConfig) -> Result<Vec<FileRecord>> {
    let mut paths = Vec::new();
    if let SignalSource::Csv(p) = &cfg.signal {
        paths.push(p);
    }
    if let KernelChoice::Table(p) = &cfg.kernel {
        paths.push(p);
    }
    paths
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(FileRecord {
                file: p.display().to_string(),
                bytes: bytes.len(),
                sha256: crate::output::sha256_hex(&bytes),
            })
        })
        .collect()
}

/// Stable machine-readable name of an error's root cause.
pub fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(err) = e.downcast_ref::<Error>() {
        return match err {
            Error::InvalidInput(_) => "invalid_input",
            Error::Structure(_) => "structure",
            Error::Unsupported(_) => "unsupported",
            Error::Coverage(_) => "coverage",
            Error::TooLarge { .. } => "too_large",
            Error::Numerical(_) => "numerical",
            Error::DegenerateKernel(_) => "degenerate_kernel",
            Error::Config(_) => "config",
            Error::NotAdmissible { .. } => "not_admissible",
            Error::NotAnalytic { .. } => "not_analytic",
        };
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return "io";
    }
    "runtime"
}
