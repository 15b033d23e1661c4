//! Experiment files, independent trace checking and the named check suites
//! behind `verify`.

pub mod enumerate;
pub mod experiment;
pub mod suites;
pub mod trace_check;

pub use experiment::{run_experiment, Expect, ExperimentError, ExperimentSpec, GraphSource, SimPlacement};
pub use suites::{run_suite, suite_names, Row, SuiteReport, VerifyError, SUITES};
pub use trace_check::{check_trace, TraceSummary, TraceViolation};
