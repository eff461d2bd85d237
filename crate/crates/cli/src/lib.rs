//! Batch front end: parse a job description, build the instances it names
//! and report the requested analyses as JSON.

pub mod parse;
pub mod run;

pub use parse::{parse, InputError, JobSpec};
pub use run::{execute, Options, Outcome, Status};
