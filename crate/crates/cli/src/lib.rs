//! Library side of the `centerfocus` command-line tool.

pub mod pipeline;
pub mod report;
pub mod spec;

pub use pipeline::{run, Command, Overrides, RunError};
pub use report::Report;
pub use spec::{parse_spec, parse_spec_str, ProblemSpec, SpecError};
