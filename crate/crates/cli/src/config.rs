//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::Serialize;
use wavinv::cwt::ScaleLayout;
use wavinv::experiments::{
    GridSpec, KernelSpec, SweepTarget, TestSignal, Window, MAX_SWEEP_OMEGA0,
};
use wavinv::inversion::{Method, ScaleSymmetry};
use wavinv::wavelets::NormMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Transform,
    Reconstruct,
    CompareMethods,
    SweepOmega0,
    SweepConvergence,
    DiagnoseKernel,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().expect("no skipped variants");
        f.write_str(name.get_name())
    }
}

/// Recognised keys with their defaults and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "signal",
        "gaussian-derivative",
        "gaussian | gaussian-derivative | modulated-gaussian | spike-train",
    ),
    (
        "signal_csv",
        "",
        "CSV with columns x, re[, im]; replaces the built-in signal and grid",
    ),
    ("carrier", "6", "carrier frequency of modulated-gaussian"),
    ("kernel", "morlet", "morlet | gaussian | tabulated"),
    ("omega0", "1", "Morlet central frequency, >= 0"),
    (
        "gaussian_c",
        "0.5",
        "Gaussian kernel width c in exp(-c x^2), > 0",
    ),
    (
        "kernel_csv",
        "",
        "table omega, re[, im] of the kernel spectrum (kernel = tabulated)",
    ),
    (
        "norm",
        "1",
        "1 (amplitude) or 2 (energy); tabulated kernels default to 2",
    ),
    ("n", "1024", "number of samples, even and >= 4"),
    ("x0", "-20", "left end of the sampling window"),
    ("window", "40", "window width (exclusive with step)"),
    ("step", "", "sample spacing h (exclusive with window)"),
    ("a_min", "", "smallest scale; unset uses the default grid"),
    ("a_max", "", "largest scale; unset uses the default grid"),
    ("delta", "0.03125", "scale spacing in octaves"),
    ("layout", "mirrored", "mirrored | positive-only"),
    (
        "symmetry",
        "none",
        "none | even-kernel | real-signal (needed with positive-only)",
    ),
    (
        "method",
        "alternative-general",
        "alternative-general | alternative-analytic | classical",
    ),
    (
        "known_mean",
        "",
        "mean added back after derivative-based reconstruction: re or re,im",
    ),
    ("out", "out", "output directory"),
    ("formats", "csv", "scalogram formats: csv, binary"),
    (
        "omega0_list",
        "0,0.5,1,2,5,6,10",
        "central frequencies for sweep-omega0, each in [0, 20]",
    ),
    (
        "resolutions",
        "256,512,1024,2048",
        "strictly increasing sample counts for sweep-convergence",
    ),
    (
        "target",
        "reconstruction",
        "reconstruction | derivative (sweep-convergence)",
    ),
    (
        "quad_tol",
        "1e-10",
        "relative tolerance of admissibility quadratures",
    ),
    (
        "cross",
        "none",
        "none | delta-derivative: also report C_psi,g for diagnose-kernel",
    ),
];

fn default_of(key: &str) -> &'static str {
    KEYS.iter().find(|k| k.0 == key).map(|k| k.1).unwrap_or("")
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>, Vec<String>> {
    let mut map = BTreeMap::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let k = k.trim().to_string();
                if map.insert(k.clone(), v.trim().to_string()).is_some() {
                    errors.push(format!("line {}: key `{k}` given twice", i + 1));
                }
            }
            None => errors.push(format!(
                "line {}: expected `key = value`, got `{line}`",
                i + 1
            )),
        }
    }
    if errors.is_empty() {
        Ok(map)
    } else {
        Err(errors)
    }
}

/// Parses a `key=value` override flag.
pub fn parse_override(flag: &str) -> Result<(String, String), String> {
    flag.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("override `{flag}` is not of the form key=value"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalSource {
    Builtin(TestSignal),
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelChoice {
    Spec(KernelSpec),
    Table(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub signal: SignalSource,
    pub kernel: KernelChoice,
    pub norm: NormMode,
    pub window: Window,
    pub n: usize,
    pub grid: GridSpec,
    pub symmetry: Option<ScaleSymmetry>,
    pub method: Method,
    pub known_mean: Option<Complex64>,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub omega0_list: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub target: SweepTarget,
    pub quad_tol: f64,
    pub cross: bool,
    /// Every key with its effective value; the basis of the config hash.
    pub resolved: BTreeMap<String, String>,
}

struct Checker<'a> {
    raw: &'a BTreeMap<String, String>,
    errors: Vec<String>,
}

impl Checker<'_> {
    fn is_set(&self, key: &str) -> bool {
        self.raw.get(key).is_some_and(|v| !v.is_empty())
    }

    fn text(&self, key: &str) -> String {
        match self.raw.get(key) {
            Some(v) if !v.is_empty() => v.clone(),
            _ => default_of(key).to_string(),
        }
    }

    fn number(&mut self, key: &str, check: impl Fn(f64) -> Option<&'static str>) -> f64 {
        let text = self.text(key);
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                if let Some(msg) = check(v) {
                    self.errors.push(format!("{key}: {msg}, got {v}"));
                }
                v
            }
            _ => {
                self.errors
                    .push(format!("{key}: `{text}` is not a finite number"));
                f64::NAN
            }
        }
    }

    fn optional_number(
        &mut self,
        key: &str,
        check: impl Fn(f64) -> Option<&'static str>,
    ) -> Option<f64> {
        self.is_set(key).then(|| self.number(key, check))
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)]) -> Option<T> {
        let text = self.text(key);
        let found = options.iter().find(|o| o.0 == text).map(|o| o.1);
        if found.is_none() {
            let names: Vec<&str> = options.iter().map(|o| o.0).collect();
            self.errors.push(format!(
                "{key}: `{text}` is not one of {}",
                names.join(", ")
            ));
        }
        found
    }

    fn path(&mut self, key: &str) -> Option<PathBuf> {
        if !self.is_set(key) {
            return None;
        }
        let path = PathBuf::from(self.text(key));
        if !path.is_file() {
            self.errors
                .push(format!("{key}: file `{}` does not exist", path.display()));
        }
        Some(path)
    }

    fn list(&mut self, key: &str) -> Vec<f64> {
        let text = self.text(key);
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => self
                    .errors
                    .push(format!("{key}: `{item}` is not a finite number")),
            }
        }
        if out.is_empty() {
            self.errors.push(format!("{key}: list is empty"));
        }
        out
    }
}

fn check_len(n: f64) -> Option<&'static str> {
    (n.fract() != 0.0 || n < 4.0 || n % 2.0 != 0.0).then_some("must be an even integer >= 4")
}

fn positive(v: f64) -> Option<&'static str> {
    (v <= 0.0).then_some("must be > 0")
}

/// Builds a validated [`RunConfig`], reporting every problem at once.
pub fn validate(
    command: Command,
    raw: &BTreeMap<String, String>,
) -> Result<RunConfig, Vec<String>> {
    let mut c = Checker {
        raw,
        errors: Vec::new(),
    };
    for key in raw.keys() {
        if !KEYS.iter().any(|k| k.0 == key) {
            c.errors.push(format!("unknown key `{key}`"));
        }
    }

    let signal_csv = c.path("signal_csv");
    let carrier = c.number("carrier", |_| None);
    let builtin = c.choice(
        "signal",
        &[
            ("gaussian", TestSignal::Gaussian),
            ("gaussian-derivative", TestSignal::GaussianDerivative),
            (
                "modulated-gaussian",
                TestSignal::ModulatedGaussian { carrier },
            ),
            ("spike-train", TestSignal::SpikeTrain),
        ],
    );
    let signal = match (signal_csv, builtin) {
        (Some(p), _) => SignalSource::Csv(p),
        (None, Some(s)) => SignalSource::Builtin(s),
        (None, None) => SignalSource::Builtin(TestSignal::GaussianDerivative),
    };
    if matches!(signal, SignalSource::Csv(_)) {
        for key in ["n", "x0", "window", "step", "signal"] {
            if c.is_set(key) {
                c.errors
                    .push(format!("{key}: cannot be combined with signal_csv"));
            }
        }
        if command == Command::SweepConvergence {
            c.errors
                .push("signal_csv: sweep-convergence resamples a built-in signal".into());
        }
    }

    let omega0 = c.number("omega0", |v| (v < 0.0).then_some("ω0 must be ≥ 0"));
    let gaussian_c = c.number("gaussian_c", positive);
    let kernel_kind = c.choice(
        "kernel",
        &[("morlet", 0), ("gaussian", 1), ("tabulated", 2)],
    );
    let kernel = match kernel_kind {
        Some(1) => KernelChoice::Spec(KernelSpec::Gaussian { c: gaussian_c }),
        Some(2) => match c.path("kernel_csv") {
            Some(p) => KernelChoice::Table(p),
            None => {
                c.errors
                    .push("kernel_csv: required when kernel = tabulated".into());
                KernelChoice::Table(PathBuf::new())
            }
        },
        _ => KernelChoice::Spec(KernelSpec::Morlet { omega0 }),
    };
    let tabulated = matches!(kernel, KernelChoice::Table(_));
    let norm_text = if c.is_set("norm") {
        c.text("norm")
    } else if tabulated {
        "2".to_string()
    } else {
        default_of("norm").to_string()
    };
    let norm = match norm_text.as_str() {
        "1" => NormMode::Amplitude,
        "2" => NormMode::Energy,
        other => {
            c.errors.push(format!("norm: `{other}` is not one of 1, 2"));
            NormMode::Amplitude
        }
    };
    if tabulated && norm != NormMode::Energy {
        c.errors
            .push("norm: tabulated kernels support only norm = 2".into());
    }

    let n = c.number("n", check_len);
    let x0 = c.number("x0", |_| None);
    let width = match (c.is_set("window"), c.is_set("step")) {
        (true, true) => {
            c.errors
                .push("window and step are mutually exclusive".into());
            f64::NAN
        }
        (false, true) => c.number("step", positive) * n,
        _ => c.number("window", positive),
    };

    let a_min = c.optional_number("a_min", positive);
    let a_max = c.optional_number("a_max", positive);
    let delta = c.number("delta", positive);
    let layout = c
        .choice(
            "layout",
            &[
                ("mirrored", ScaleLayout::Mirrored),
                ("positive-only", ScaleLayout::PositiveOnly),
            ],
        )
        .unwrap_or(ScaleLayout::Mirrored);
    if let (Some(lo), Some(hi)) = (a_min, a_max) {
        if lo >= hi {
            c.errors
                .push(format!("a_min ({lo}) must be below a_max ({hi})"));
        }
    }
    let custom_grid = ["a_min", "a_max", "delta", "layout"]
        .iter()
        .any(|k| c.is_set(k));
    let grid = if custom_grid {
        GridSpec::LogSpaced {
            a_min,
            a_max,
            octave_step: delta,
            layout,
        }
    } else {
        GridSpec::Default
    };
    let symmetry = c
        .choice(
            "symmetry",
            &[
                ("none", None),
                ("even-kernel", Some(ScaleSymmetry::EvenKernel)),
                ("real-signal", Some(ScaleSymmetry::RealSignal)),
            ],
        )
        .flatten();

    let method = c
        .choice(
            "method",
            &[
                ("alternative-general", Method::AlternativeGeneral),
                ("alternative-analytic", Method::AlternativeAnalytic),
                ("classical", Method::Classical),
            ],
        )
        .unwrap_or(Method::AlternativeGeneral);
    let known_mean = if c.is_set("known_mean") {
        let parts: Vec<Result<f64, _>> = c
            .text("known_mean")
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect();
        match parts.as_slice() {
            [Ok(re)] => Some(Complex64::new(*re, 0.0)),
            [Ok(re), Ok(im)] => Some(Complex64::new(*re, *im)),
            _ => {
                c.errors.push("known_mean: expected `re` or `re,im`".into());
                None
            }
        }
    } else {
        None
    };

    let out = PathBuf::from(c.text("out"));
    let mut formats = Vec::new();
    for f in c.text("formats").split(',').map(str::trim) {
        match f {
            "csv" => formats.push(Format::Csv),
            "binary" => formats.push(Format::Binary),
            other => c
                .errors
                .push(format!("formats: `{other}` is not one of csv, binary")),
        }
    }

    let omega0_list = c.list("omega0_list");
    if let Some(w) = omega0_list
        .iter()
        .find(|w| !(0.0..=MAX_SWEEP_OMEGA0).contains(*w))
    {
        c.errors.push(format!(
            "omega0_list: {w} is outside [0, {MAX_SWEEP_OMEGA0}]"
        ));
    }
    let resolution_values = c.list("resolutions");
    if resolution_values.iter().any(|&r| check_len(r).is_some()) {
        c.errors
            .push("resolutions: every entry must be an even integer >= 4".into());
    }
    if resolution_values.windows(2).any(|w| w[1] <= w[0]) {
        c.errors
            .push("resolutions: must be strictly increasing".into());
    }
    let resolutions = resolution_values.iter().map(|&r| r as usize).collect();
    let target = c
        .choice(
            "target",
            &[
                ("reconstruction", SweepTarget::Reconstruction(method)),
                ("derivative", SweepTarget::Derivative),
            ],
        )
        .unwrap_or(SweepTarget::Reconstruction(method));
    let quad_tol = c.number("quad_tol", positive);
    let cross = c
        .choice("cross", &[("none", false), ("delta-derivative", true)])
        .unwrap_or(false);

    if !c.errors.is_empty() {
        return Err(c.errors);
    }
    let mut resolved: BTreeMap<String, String> = KEYS
        .iter()
        .map(|k| (k.0.to_string(), c.text(k.0)))
        .collect();
    resolved.insert("norm".into(), norm_text);
    Ok(RunConfig {
        command,
        signal,
        kernel,
        norm,
        window: Window { x0, width },
        n: n as usize,
        grid,
        symmetry,
        method,
        known_mean,
        out,
        formats,
        omega0_list,
        resolutions,
        target,
        quad_tol,
        cross,
        resolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use wavinv::cwt::DEFAULT_OCTAVE_STEP;

    fn raw(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn minimal_transform_fills_defaults() {
        let cfg = validate(Command::Transform, &BTreeMap::new()).unwrap();
        assert_eq!(cfg.n, 1024);
        assert_eq!(cfg.window, Window::default());
        assert_eq!(
            cfg.kernel,
            KernelChoice::Spec(KernelSpec::Morlet { omega0: 1.0 })
        );
        assert_eq!(cfg.norm, NormMode::Amplitude);
        assert_eq!(cfg.grid, GridSpec::Default);
        assert_eq!(cfg.method, Method::AlternativeGeneral);
        assert_eq!(cfg.formats, vec![Format::Csv]);
        assert_eq!(cfg.resolved.len(), KEYS.len());
    }

    #[test]
    fn negative_omega0_is_rejected() {
        let errs = validate(Command::Transform, &raw(&[("omega0", "-1")])).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("ω0 must be ≥ 0"));
    }

    #[test]
    fn all_errors_are_collected() {
        let errs = validate(
            Command::Reconstruct,
            &raw(&[
                ("omega0", "-1"),
                ("n", "7"),
                ("bogus", "1"),
                ("method", "magic"),
            ]),
        )
        .unwrap_err();
        assert_eq!(errs.len(), 4, "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("unknown key `bogus`")));
    }

    #[test]
    fn classical_with_morlet_passes_validation() {
        let cfg = validate(
            Command::Reconstruct,
            &raw(&[("method", "classical"), ("omega0", "6")]),
        )
        .unwrap();
        assert_eq!(cfg.method, Method::Classical);
    }

    #[test]
    fn missing_file_is_reported() {
        let errs = validate(
            Command::Reconstruct,
            &raw(&[("signal_csv", "/no/such/file.csv")]),
        )
        .unwrap_err();
        assert!(errs[0].contains("does not exist"));
    }

    #[test]
    fn grid_keys_switch_to_log_spaced() {
        let cfg = validate(
            Command::Transform,
            &raw(&[("a_min", "0.1"), ("layout", "positive-only")]),
        )
        .unwrap();
        assert_eq!(
            cfg.grid,
            GridSpec::LogSpaced {
                a_min: Some(0.1),
                a_max: None,
                octave_step: DEFAULT_OCTAVE_STEP,
                layout: ScaleLayout::PositiveOnly
            }
        );
    }

    #[test]
    fn step_sets_width() {
        let cfg = validate(Command::Transform, &raw(&[("n", "256"), ("step", "0.125")])).unwrap();
        assert_eq!(cfg.window.width, 32.0);
        assert!(validate(
            Command::Transform,
            &raw(&[("window", "10"), ("step", "0.1")])
        )
        .is_err());
    }

    #[test]
    fn text_parsing() {
        let map = parse_text("# comment\nn = 512\n\nomega0=2 # trailing\n").unwrap();
        assert_eq!(map, raw(&[("n", "512"), ("omega0", "2")]));
        assert_eq!(parse_text("n = 1\nn = 2\njunk").unwrap_err().len(), 2);
        assert_eq!(parse_override("a=b").unwrap(), ("a".into(), "b".into()));
        assert!(parse_override("ab").is_err());
    }

    #[test]
    fn sweep_lists_are_checked() {
        let errs = validate(
            Command::SweepOmega0,
            &raw(&[("omega0_list", "0,25"), ("resolutions", "512,256")]),
        )
        .unwrap_err();
        assert_eq!(errs.len(), 2, "{errs:?}");
    }
}
