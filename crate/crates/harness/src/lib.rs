//! Random instances, axiom suites, the document format and the `coarsex` command line.

pub mod cli;
pub mod doc;
pub mod generate;
pub mod suite;
