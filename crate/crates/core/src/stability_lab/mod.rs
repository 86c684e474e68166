//! Measuring stability: error metrics and verdicts, the check-and-fallback
//! solve driver, ensemble experiments and the report format.

pub mod document;
pub mod driver;
pub mod experiments;
pub mod metrics;

pub use document::{
    fmt_num, stability_report, write_bench, write_solve_report, Document, StabilityReport,
    StabilityReportConfig,
};
#[cfg(any(test, feature = "fault-injection"))]
pub use driver::guaranteed_solve_with_fault;
pub use driver::{default_tolerance, guaranteed_solve, solve_with_method, StructuredSystem};
pub use experiments::{
    generator_growth_probe, kappa_sweep_experiment, method_benchmark, solve_toeplitz, BenchConfig,
    BenchRow, Ensemble, GrowthProbe, KappaFamily, ProbeConfig, SlopeFit, SweepConfig, SweepTable,
};
pub use metrics::{
    classify, classify_ensemble, compensated_residual, error_bounds_check, oracle_solve,
    ErrorBounds, StabilityClass, StabilityVerdict, VerdictPolicy,
};
