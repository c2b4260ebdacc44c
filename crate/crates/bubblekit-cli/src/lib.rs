//! Library surface of the CLI package: the CSV readers/writers and report
//! schemas, shared between the binary and its integration tests.

pub mod csvio;
pub mod report;
