//! Covariance forecasting backtest: price ingestion, rolling covariance
//! observations, the four forecasters, error norms, window selection and
//! BCa intervals.

pub mod benchmark;
pub mod bootstrap;
pub mod metrics;
pub mod prices;
pub mod report;
pub mod rolling;
pub mod synthetic;
pub mod validation;

pub use benchmark::{
    attach_intervals, fit_params, forecast_all, run_benchmark, BenchmarkConfig, Method,
    MetricReport, ReportEntry,
};
pub use bootstrap::{bca_bootstrap, BootstrapCI};
pub use metrics::{matrix_errors, weight_errors, MatrixErrors, MatrixNorm};
pub use prices::{load_prices, read_prices, PricePanel};
pub use report::{write_report_csv, write_report_md};
pub use rolling::{log_returns, rolling_cov, CovObservationSeries};
pub use synthetic::{base_covariance, business_days, synthetic_prices};
pub use validation::sequential_validation;
