//! Continuous wavelet transform with reconstruction formulas that do not
//! depend on the admissibility constant.
//!
//! ```
//! use wavinv::{
//!     compare, cwt_forward, reconstruct, Method, NormMode, ReconstructionConfig, SampledSignal,
//!     ScaleGrid, SignalGrid, WaveletKernel,
//! };
//!
//! let grid = SignalGrid::over_window(512, -20.0, 40.0)?;
//! let f = SampledSignal::from_real_fn(grid, |x| x * (-x * x / 2.0).exp())?;
//! let kernel = WaveletKernel::morlet(6.0, NormMode::Amplitude)?;
//! let scales = ScaleGrid::default_for(&grid, &kernel)?;
//! let w = cwt_forward(&f, &kernel, &scales)?;
//! assert_eq!(w.n_cols(), 512);
//!
//! let cfg = ReconstructionConfig::new(Method::AlternativeGeneral, &kernel)?;
//! let rec = reconstruct(&f, &kernel, &scales, &cfg)?;
//! assert!(compare(&f, &rec, true)?.rel_l2 < 1e-2);
//! # Ok::<(), wavinv::Error>(())
//! ```

pub mod cwt;
pub mod error;
pub mod experiments;
pub mod inversion;
pub mod quad;
pub mod spectral;
pub mod wavelets;

pub use cwt::{cwt_forward, cwt_forward_direct, read_binary, ScaleGrid, ScaleLayout, Scalogram};
pub use error::{Error, Result};
pub use experiments::{compare, convergence_sweep, omega0_sweep, ErrorReport, TestSignal};
pub use inversion::{
    d_db, integrate_scales, reconstruct, Method, ReconstructionConfig, ScaleSymmetry,
};
pub use spectral::{
    analytic_projection, forward_spectrum, hilbert, inverse_spectrum, SampledSignal, SignalGrid,
    Spectrum,
};
pub use wavelets::{admissibility, cross_admissibility, FrequencyTable, NormMode, WaveletKernel};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/transform.md")]
    mod transform {}
    #[doc = include_str!("../../../book/src/reconstruction.md")]
    mod reconstruction {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
