//! Spectrum sweeps, Landau coefficients, nonlinear scaling sweeps and their
//! comparison, as used by the `rodhopf` binary.

pub mod commands;
pub mod config;
pub mod fit;

pub use commands::{
    compare, compare_files, fit_rows, landau, read_landau_json, read_sweep_csv, spectrum, sweep, CompareRow,
    CompareSummary, Context, LandauRecord, SpectrumRow, SpectrumSummary, SweepFitReport, SweepRow,
};
pub use config::{CompareTolerances, ForceSpec, ParamsTemplate, SimOverrides, SweepSpec};
pub use fit::{fit_scaling, ScalingFit, NOISE_FLOOR};
